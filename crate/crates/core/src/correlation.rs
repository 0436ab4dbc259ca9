//! Pearson correlation matrices and the strong/weak/negative census.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::SymMatrix;
use crate::transform::ReturnsMatrix;

/// Entries may exceed `[-1, 1]` by this much before clamping is refused.
const RHO_SLACK: f64 = 1e-12;

/// Symmetric correlation matrix with unit diagonal, entries in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix(SymMatrix);

impl CorrelationMatrix {
    /// Validates and clamps a hand-built matrix.
    pub fn new(matrix: SymMatrix) -> Result<Self> {
        let n = matrix.len();
        let mut m = matrix;
        for i in 0..n {
            if (m.get(i, i) - 1.0).abs() > RHO_SLACK {
                return Err(Error::Domain(format!(
                    "diagonal entry {} for {:?} is not 1",
                    m.get(i, i),
                    m.labels()[i]
                )));
            }
            m.set(i, i, 1.0);
            for j in i + 1..n {
                let (a, b) = (m.get(i, j), m.get(j, i));
                if a.is_nan() || (a - b).abs() > RHO_SLACK {
                    return Err(Error::Domain(format!(
                        "entries ({i},{j}) are not symmetric: {a} vs {b}"
                    )));
                }
                if a.abs() > 1.0 + RHO_SLACK {
                    return Err(Error::Domain(format!("correlation {a} outside [-1, 1]")));
                }
                m.set_sym(i, j, a.clamp(-1.0, 1.0));
            }
        }
        Ok(CorrelationMatrix(m))
    }

    pub fn from_rows(labels: Vec<String>, rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(SymMatrix::from_rows(labels, rows)?)
    }

    pub fn matrix(&self) -> &SymMatrix {
        &self.0
    }

    pub fn labels(&self) -> &[String] {
        self.0.labels()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0.get(i, j)
    }

    /// The `n(n-1)/2` upper-triangle entries, row by row.
    pub fn off_diagonal(&self) -> Vec<f64> {
        let n = self.len();
        let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            out.extend_from_slice(&self.0.row(i)[i + 1..]);
        }
        out
    }

    pub fn census(&self) -> CorrelationCensus {
        census(self)
    }
}

/// Pair counts per correlation level: strong `[1/2, 1]`, weak `[0, 1/2)`,
/// negative `[-1, 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrelationCensus {
    #[serde(rename = "n")]
    pub n_assets: usize,
    pub strong: usize,
    pub weak: usize,
    pub negative: usize,
}

impl CorrelationCensus {
    pub fn total(&self) -> usize {
        self.strong + self.weak + self.negative
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("census serializes")
    }
}

pub fn census(c: &CorrelationMatrix) -> CorrelationCensus {
    let mut out = CorrelationCensus {
        n_assets: c.len(),
        strong: 0,
        weak: 0,
        negative: 0,
    };
    for rho in c.off_diagonal() {
        if rho >= 0.5 {
            out.strong += 1;
        } else if rho >= 0.0 {
            out.weak += 1;
        } else {
            out.negative += 1;
        }
    }
    out
}

/// Column centered on its mean, with its sum of squares.
struct Centered {
    values: Vec<f64>,
    sum_sq: f64,
}

fn all_equal(values: impl IntoIterator<Item = f64>) -> bool {
    let mut it = values.into_iter();
    match it.next() {
        Some(first) => it.all(|v| v == first),
        None => true,
    }
}

fn center(col: &[f64]) -> Centered {
    let mean = col.iter().sum::<f64>() / col.len() as f64;
    let values: Vec<f64> = col.iter().map(|v| v - mean).collect();
    let sum_sq = values.iter().map(|v| v * v).sum();
    Centered { values, sum_sq }
}

/// Correlation over the observations where both columns are present.
/// Temporal averages use divisor `N`, which cancels in the ratio.
fn pairwise_complete(a: &[f64], b: &[f64]) -> (usize, Option<f64>, bool, bool) {
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (&x, &y) in a.iter().zip(b) {
        if !x.is_nan() && !y.is_nan() {
            xs.push(x);
            ys.push(y);
        }
    }
    let overlap = xs.len();
    if overlap == 0 {
        return (0, None, false, false);
    }
    let flat_a = all_equal(xs.iter().copied());
    let flat_b = all_equal(ys.iter().copied());
    if flat_a || flat_b {
        return (overlap, None, flat_a, flat_b);
    }
    let (ca, cb) = (center(&xs), center(&ys));
    let cross: f64 = ca.values.iter().zip(&cb.values).map(|(x, y)| x * y).sum();
    (overlap, Some(cross / (ca.sum_sq * cb.sum_sq).sqrt()), false, false)
}

/// Pearson correlation matrix with pairwise-complete observations.
///
/// Every pair needs at least `min_overlap` joint observations and non-constant
/// values on them. The summation order within a pair is fixed, so the result
/// does not depend on how pairs are scheduled across threads.
pub fn pearson_matrix(y: &ReturnsMatrix, min_overlap: usize) -> Result<CorrelationMatrix> {
    if min_overlap < 2 {
        return Err(Error::Config(format!(
            "min_overlap must be at least 2, got {min_overlap}"
        )));
    }
    let n = y.n_assets();
    let labels = y.assets();
    let columns = y.columns();
    let complete: Vec<bool> = columns.iter().map(|c| !c.iter().any(|v| v.is_nan())).collect();

    // Fast path for gap-free columns: center once, reuse for every pair.
    let centered: Vec<Option<Centered>> = columns
        .par_iter()
        .zip(&complete)
        .map(|(col, &ok)| (ok && y.n_obs() >= min_overlap).then(|| center(col)))
        .collect();
    let degenerate = |i: usize| Error::DegenerateAsset {
        asset: labels[i].clone(),
    };

    let rows: Vec<Result<Vec<f64>>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut row = Vec::with_capacity(n - i - 1);
            for j in i + 1..n {
                let rho = match (&centered[i], &centered[j]) {
                    (Some(a), Some(b)) => {
                        if all_equal(columns[i].iter().copied()) {
                            return Err(degenerate(i));
                        }
                        if all_equal(columns[j].iter().copied()) {
                            return Err(degenerate(j));
                        }
                        let cross: f64 = a.values.iter().zip(&b.values).map(|(x, y)| x * y).sum();
                        cross / (a.sum_sq * b.sum_sq).sqrt()
                    }
                    _ => {
                        let (overlap, rho, flat_i, flat_j) =
                            pairwise_complete(&columns[i], &columns[j]);
                        if overlap < min_overlap {
                            return Err(Error::InsufficientData {
                                a: labels[i].clone(),
                                b: labels[j].clone(),
                                overlap,
                                required: min_overlap,
                            });
                        }
                        if flat_i {
                            return Err(degenerate(i));
                        }
                        if flat_j {
                            return Err(degenerate(j));
                        }
                        rho.expect("non-degenerate overlap")
                    }
                };
                row.push(rho.clamp(-1.0, 1.0));
            }
            Ok(row)
        })
        .collect();

    let mut m = SymMatrix::filled(labels.to_vec(), 1.0);
    for (i, row) in rows.into_iter().enumerate() {
        for (k, rho) in row?.into_iter().enumerate() {
            m.set_sym(i, i + 1 + k, rho);
        }
    }
    Ok(CorrelationMatrix(m))
}
