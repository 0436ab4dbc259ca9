//! Correlation-to-distance map `d = sqrt(2 (1 - rho))` and metric axiom checks.

use std::fmt;

use crate::correlation::CorrelationMatrix;
use crate::error::{Error, Result};
use crate::matrix::SymMatrix;

/// Default tolerance for [`check_metric_axioms`].
pub const DEFAULT_AXIOM_TOL: f64 = 1e-9;

/// Symmetric distance matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix(SymMatrix);

impl DistanceMatrix {
    /// Accepts any square matrix of finite, non-negative, symmetric entries
    /// with zero diagonal.
    pub fn new(matrix: SymMatrix) -> Result<Self> {
        let n = matrix.len();
        for i in 0..n {
            if matrix.get(i, i) != 0.0 {
                return Err(Error::Domain(format!(
                    "distance diagonal for {:?} is {}",
                    matrix.labels()[i],
                    matrix.get(i, i)
                )));
            }
            for j in i + 1..n {
                let d = matrix.get(i, j);
                if !d.is_finite() || d < 0.0 {
                    return Err(Error::Domain(format!("invalid distance {d} at ({i},{j})")));
                }
                if d != matrix.get(j, i) {
                    return Err(Error::Domain(format!("distance not symmetric at ({i},{j})")));
                }
            }
        }
        Ok(DistanceMatrix(matrix))
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
}

/// `d = sqrt(2 (1 - rho))` for a single coefficient.
pub fn rho_to_distance(rho: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&rho) {
        return Err(Error::Domain(format!("correlation {rho} outside [-1, 1]")));
    }
    Ok((2.0 * (1.0 - rho)).sqrt())
}

/// Inverse map `rho = 1 - d^2 / 2`.
pub fn distance_to_rho(d: f64) -> f64 {
    1.0 - d * d / 2.0
}

pub fn to_distance(c: &CorrelationMatrix) -> Result<DistanceMatrix> {
    let n = c.len();
    let mut out = c.matrix().clone();
    for i in 0..n {
        out.set(i, i, 0.0);
        for j in i + 1..n {
            out.set_sym(i, j, rho_to_distance(c.get(i, j))?);
        }
    }
    Ok(DistanceMatrix(out))
}

#[derive(Debug, Clone, PartialEq)]
pub enum AxiomViolation {
    /// `d(i,i) != 0`, or `d(i,j) == 0` for distinct `i`, `j`.
    Identity { i: usize, j: usize, value: f64 },
    Symmetry { i: usize, j: usize, forward: f64, backward: f64 },
    /// `d(i,j) > d(i,k) + d(k,j) + tol`.
    Triangle { i: usize, j: usize, k: usize, excess: f64 },
}

impl fmt::Display for AxiomViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            AxiomViolation::Identity { i, j, value } => {
                write!(f, "identity: d({i},{j}) = {value}")
            }
            AxiomViolation::Symmetry { i, j, forward, backward } => {
                write!(f, "symmetry: d({i},{j}) = {forward} but d({j},{i}) = {backward}")
            }
            AxiomViolation::Triangle { i, j, k, excess } => {
                write!(f, "triangle: d({i},{j}) exceeds d({i},{k}) + d({k},{j}) by {excess}")
            }
        }
    }
}

/// Lists every breach of identity of indiscernibles, symmetry, and the
/// (non-strict) triangle inequality, each checked with tolerance `tol`.
/// Triangle breaches are reported once per unordered pair `i < j`.
///
/// Takes a raw [`SymMatrix`] so that hand-built, possibly invalid inputs can
/// be audited.
pub fn check_metric_axioms(d: &SymMatrix, tol: f64) -> Vec<AxiomViolation> {
    let n = d.len();
    let mut out = Vec::new();
    for i in 0..n {
        if d.get(i, i).abs() > tol {
            out.push(AxiomViolation::Identity { i, j: i, value: d.get(i, i) });
        }
        for j in i + 1..n {
            let (forward, backward) = (d.get(i, j), d.get(j, i));
            if (forward - backward).abs() > tol {
                out.push(AxiomViolation::Symmetry { i, j, forward, backward });
            }
            if forward.abs() <= tol {
                out.push(AxiomViolation::Identity { i, j, value: forward });
            }
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            let dij = d.get(i, j);
            for k in 0..n {
                if k == i || k == j {
                    continue;
                }
                let excess = dij - (d.get(i, k) + d.get(k, j));
                if excess > tol {
                    out.push(AxiomViolation::Triangle { i, j, k, excess });
                }
            }
        }
    }
    out
}

/// Shape-checked variant over nested rows.
pub fn check_metric_axioms_rows(rows: &[Vec<f64>], tol: f64) -> Result<Vec<AxiomViolation>> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::Shape("distance matrix is not square".into()));
    }
    let labels = (0..n).map(|i| i.to_string()).collect();
    Ok(check_metric_axioms(&SymMatrix::from_rows(labels, rows)?, tol))
}
