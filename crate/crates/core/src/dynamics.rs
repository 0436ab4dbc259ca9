//! Rolling-window trees and edge-survival statistics for tracking how the
//! taxonomy changes in time.

use rayon::prelude::*;

use crate::correlation::pearson_matrix;
use crate::error::{Error, Result};
use crate::metric::to_distance;
use crate::mst::{build_mst, SpanningTree};
use crate::transform::ReturnsMatrix;

/// Minimum observations per window or segment.
pub const MIN_SEGMENT: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowSpec {
    pub width: usize,
    pub step: usize,
}

impl WindowSpec {
    pub fn new(width: usize, step: usize) -> Result<Self> {
        if width < MIN_SEGMENT {
            return Err(Error::Config(format!("window width {width} below {MIN_SEGMENT}")));
        }
        if step == 0 {
            return Err(Error::Config("window step must be at least 1".into()));
        }
        Ok(WindowSpec { width, step })
    }

    /// Half-open `[start, end)` ranges over a series of length `len`.
    pub fn windows(&self, len: usize) -> Result<Vec<(usize, usize)>> {
        if self.width > len {
            return Err(Error::Size(format!(
                "window width {} exceeds series length {len}",
                self.width
            )));
        }
        let count = (len - self.width) / self.step + 1;
        Ok((0..count)
            .map(|k| (k * self.step, k * self.step + self.width))
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeSequence {
    pub windows: Vec<(usize, usize)>,
    pub trees: Vec<SpanningTree>,
}

impl TreeSequence {
    /// Survival of each tree against its predecessor; `None` for the first.
    pub fn survival_series(&self) -> Vec<Option<f64>> {
        let mut out = Vec::with_capacity(self.trees.len());
        for (k, tree) in self.trees.iter().enumerate() {
            out.push(match k {
                0 => None,
                _ => Some(edge_survival(&self.trees[k - 1], tree).expect("same assets")),
            });
        }
        out
    }

    /// CSV rows `window_index,start,end,survival_vs_previous`; `end` is exclusive.
    pub fn survival_csv(&self) -> String {
        let mut out = String::from("window_index,start,end,survival_vs_previous\n");
        for (k, ((start, end), s)) in self.windows.iter().zip(self.survival_series()).enumerate() {
            let s = s.map(|v| v.to_string()).unwrap_or_default();
            out.push_str(&format!("{k},{start},{end},{s}\n"));
        }
        out
    }
}

/// Correlation, distance and tree for one block of observations.
pub fn static_tree(y: &ReturnsMatrix, min_overlap: usize) -> Result<SpanningTree> {
    build_mst(&to_distance(&pearson_matrix(y, min_overlap)?)?)
}

pub fn rolling_trees(y: &ReturnsMatrix, w: WindowSpec, min_overlap: usize) -> Result<TreeSequence> {
    let windows = w.windows(y.n_obs())?;
    let trees = windows
        .par_iter()
        .map(|&(s, e)| static_tree(&y.slice_rows(s, e)?, min_overlap))
        .collect::<Result<Vec<_>>>()?;
    Ok(TreeSequence { windows, trees })
}

/// Fraction of links (ignoring weights) the two trees share.
pub fn edge_survival(a: &SpanningTree, b: &SpanningTree) -> Result<f64> {
    let mut la = a.labels().to_vec();
    let mut lb = b.labels().to_vec();
    la.sort();
    lb.sort();
    if la != lb {
        return Err(Error::Comparison("trees span different asset sets".into()));
    }
    let (ea, eb) = (a.edge_set(), b.edge_set());
    Ok(ea.intersection(&eb).count() as f64 / (a.len() - 1) as f64)
}

/// Trees before and after `split_index`, and their edge survival.
pub fn split_compare(
    y: &ReturnsMatrix,
    split_index: usize,
    min_overlap: usize,
) -> Result<(SpanningTree, SpanningTree, f64)> {
    let t = y.n_obs();
    if split_index < MIN_SEGMENT || t.saturating_sub(split_index) < MIN_SEGMENT {
        return Err(Error::Size(format!(
            "split at {split_index} of {t} leaves a segment shorter than {MIN_SEGMENT}"
        )));
    }
    let before = static_tree(&y.slice_rows(0, split_index)?, min_overlap)?;
    let after = static_tree(&y.slice_rows(split_index, t)?, min_overlap)?;
    let s = edge_survival(&before, &after)?;
    Ok((before, after, s))
}
