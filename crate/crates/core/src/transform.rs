//! Signal transforms that produce the matrix fed to the correlation step.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::ingest::{check_labels, TimeSeriesPanel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SignalKind {
    LogReturn,
    Raw,
    Rank,
    ZScore,
}

impl SignalKind {
    pub fn name(self) -> &'static str {
        match self {
            SignalKind::LogReturn => "log-return",
            SignalKind::Raw => "raw",
            SignalKind::Rank => "rank",
            SignalKind::ZScore => "zscore",
        }
    }
}

impl fmt::Display for SignalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SignalKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "log-return" | "log_return" | "logret" => Ok(SignalKind::LogReturn),
            "raw" => Ok(SignalKind::Raw),
            "rank" => Ok(SignalKind::Rank),
            "zscore" | "z-score" => Ok(SignalKind::ZScore),
            other => Err(Error::Config(format!("unknown signal kind {other:?}"))),
        }
    }
}

/// Transformed signal matrix `[observation × asset]`, `NaN` = missing.
#[derive(Debug, Clone)]
pub struct ReturnsMatrix {
    assets: Vec<String>,
    n_obs: usize,
    observations: Vec<f64>,
    kind: SignalKind,
}

impl ReturnsMatrix {
    pub fn new(assets: Vec<String>, observations: Vec<f64>, kind: SignalKind) -> Result<Self> {
        check_labels(&assets)?;
        if !observations.len().is_multiple_of(assets.len()) {
            return Err(Error::Shape(format!(
                "{} values do not fill rows of {} assets",
                observations.len(),
                assets.len()
            )));
        }
        if observations.iter().any(|v| v.is_infinite()) {
            return Err(Error::Domain("infinite observation".into()));
        }
        Ok(ReturnsMatrix {
            n_obs: observations.len() / assets.len(),
            assets,
            observations,
            kind,
        })
    }

    pub fn from_rows(assets: Vec<String>, rows: &[Vec<f64>], kind: SignalKind) -> Result<Self> {
        if rows.iter().any(|r| r.len() != assets.len()) {
            return Err(Error::Shape("ragged rows".into()));
        }
        Self::new(assets, rows.concat(), kind)
    }

    pub fn from_columns(assets: Vec<String>, columns: &[Vec<f64>], kind: SignalKind) -> Result<Self> {
        if columns.len() != assets.len() {
            return Err(Error::Shape(format!(
                "{} columns for {} assets",
                columns.len(),
                assets.len()
            )));
        }
        let t = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != t) {
            return Err(Error::Shape("columns differ in length".into()));
        }
        let mut obs = Vec::with_capacity(t * columns.len());
        for row in 0..t {
            obs.extend(columns.iter().map(|c| c[row]));
        }
        Self::new(assets, obs, kind)
    }

    pub fn assets(&self) -> &[String] {
        &self.assets
    }

    pub fn kind(&self) -> SignalKind {
        self.kind
    }

    pub fn n_assets(&self) -> usize {
        self.assets.len()
    }

    pub fn n_obs(&self) -> usize {
        self.n_obs
    }

    #[inline]
    pub fn value(&self, t: usize, asset: usize) -> f64 {
        self.observations[t * self.assets.len() + asset]
    }

    pub fn row(&self, t: usize) -> &[f64] {
        let n = self.assets.len();
        &self.observations[t * n..(t + 1) * n]
    }

    pub fn column(&self, asset: usize) -> Vec<f64> {
        (0..self.n_obs).map(|t| self.value(t, asset)).collect()
    }

    pub fn columns(&self) -> Vec<Vec<f64>> {
        (0..self.n_assets()).map(|i| self.column(i)).collect()
    }

    pub fn observations(&self) -> &[f64] {
        &self.observations
    }

    /// Observations `[start, end)` as a new matrix.
    pub fn slice_rows(&self, start: usize, end: usize) -> Result<ReturnsMatrix> {
        if start > end || end > self.n_obs {
            return Err(Error::Size(format!(
                "row range {start}..{end} outside 0..{}",
                self.n_obs
            )));
        }
        let n = self.assets.len();
        Ok(ReturnsMatrix {
            assets: self.assets.clone(),
            n_obs: end - start,
            observations: self.observations[start * n..end * n].to_vec(),
            kind: self.kind,
        })
    }

    /// Stacks `other` below `self`; asset labels must match exactly.
    pub fn concat_rows(&self, other: &ReturnsMatrix) -> Result<ReturnsMatrix> {
        if self.assets != other.assets {
            return Err(Error::Shape("asset labels differ".into()));
        }
        let mut observations = self.observations.clone();
        observations.extend_from_slice(&other.observations);
        Ok(ReturnsMatrix {
            assets: self.assets.clone(),
            n_obs: self.n_obs + other.n_obs,
            observations,
            kind: self.kind,
        })
    }
}

/// Applies the transform named by `kind`.
pub fn apply(panel: &TimeSeriesPanel, kind: SignalKind) -> Result<ReturnsMatrix> {
    match kind {
        SignalKind::LogReturn => log_returns(panel),
        SignalKind::Raw => raw(panel),
        SignalKind::Rank => rank_signal(panel),
        SignalKind::ZScore => zscore(panel),
    }
}

pub fn raw(panel: &TimeSeriesPanel) -> Result<ReturnsMatrix> {
    ReturnsMatrix::new(panel.assets().to_vec(), panel.values().to_vec(), SignalKind::Raw)
}

/// `Y[t][i] = ln P[t+1][i] - ln P[t][i]`; a gap at either end gives a gap.
pub fn log_returns(panel: &TimeSeriesPanel) -> Result<ReturnsMatrix> {
    let (t_len, n) = (panel.n_times(), panel.n_assets());
    if t_len < 2 {
        return Err(Error::Size(format!(
            "log returns need at least 2 observations, got {t_len}"
        )));
    }
    for t in 0..t_len {
        for (i, &p) in panel.row(t).iter().enumerate() {
            if !p.is_nan() && p <= 0.0 {
                return Err(Error::Domain(format!(
                    "non-positive value {p} for asset {:?} at {}",
                    panel.assets()[i],
                    panel.timestamps()[t]
                )));
            }
        }
    }
    let mut out = Vec::with_capacity((t_len - 1) * n);
    for t in 0..t_len - 1 {
        let (now, next) = (panel.row(t), panel.row(t + 1));
        out.extend(now.iter().zip(next).map(|(a, b)| b.ln() - a.ln()));
    }
    ReturnsMatrix::new(panel.assets().to_vec(), out, SignalKind::LogReturn)
}

/// Per-row ranks, 1 = largest value; tied values share the mean of their ranks.
pub fn rank_signal(panel: &TimeSeriesPanel) -> Result<ReturnsMatrix> {
    let n = panel.n_assets();
    let mut out = Vec::with_capacity(panel.values().len());
    let mut order: Vec<usize> = Vec::with_capacity(n);
    let mut ranks = vec![0.0; n];
    for t in 0..panel.n_times() {
        let row = panel.row(t);
        if let Some(i) = row.iter().position(|v| v.is_nan()) {
            return Err(Error::Domain(format!(
                "cannot rank row {} with missing value for asset {:?}",
                panel.timestamps()[t],
                panel.assets()[i]
            )));
        }
        order.clear();
        order.extend(0..n);
        order.sort_by(|&a, &b| row[b].total_cmp(&row[a]));
        let mut start = 0;
        while start < n {
            let mut end = start + 1;
            while end < n && row[order[end]] == row[order[start]] {
                end += 1;
            }
            // positions start..end hold ranks start+1..=end
            let shared = (start + 1 + end) as f64 / 2.0;
            for &k in &order[start..end] {
                ranks[k] = shared;
            }
            start = end;
        }
        out.extend_from_slice(&ranks);
    }
    ReturnsMatrix::new(panel.assets().to_vec(), out, SignalKind::Rank)
}

/// Standardizes each column to mean 0 and population standard deviation 1.
/// Missing cells stay missing.
pub fn zscore(panel: &TimeSeriesPanel) -> Result<ReturnsMatrix> {
    let n = panel.n_assets();
    let mut out = panel.values().to_vec();
    for i in 0..n {
        let col = panel.column(i);
        let present: Vec<f64> = col.iter().copied().filter(|v| !v.is_nan()).collect();
        let label = &panel.assets()[i];
        if present.len() < 2 {
            return Err(Error::Size(format!(
                "asset {label:?} has {} present values, need 2",
                present.len()
            )));
        }
        if present.iter().all(|&v| v == present[0]) {
            return Err(Error::DegenerateAsset {
                asset: label.clone(),
            });
        }
        let m = present.len() as f64;
        let mean = present.iter().sum::<f64>() / m;
        let var = present.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / m;
        let sd = var.sqrt();
        if sd == 0.0 {
            return Err(Error::DegenerateAsset {
                asset: label.clone(),
            });
        }
        for (t, v) in col.iter().enumerate() {
            out[t * n + i] = (v - mean) / sd;
        }
    }
    ReturnsMatrix::new(panel.assets().to_vec(), out, SignalKind::ZScore)
}

/// Re-expresses quotes in `base`. The panel holds each asset's price in a
/// common numeraire named `numeraire`; the result drops `base` and appends the
/// numeraire as an asset priced `1 / P_base`. Rebasing to the numeraire
/// itself returns the panel unchanged.
pub fn rebase(panel: &TimeSeriesPanel, base: &str, numeraire: &str) -> Result<TimeSeriesPanel> {
    if base == numeraire {
        return Ok(panel.clone());
    }
    let b = panel
        .asset_index(base)
        .ok_or_else(|| Error::Lookup(base.to_string()))?;
    if panel.asset_index(numeraire).is_some() {
        return Err(Error::Schema(format!(
            "numeraire label {numeraire:?} is already an asset"
        )));
    }
    for t in 0..panel.n_times() {
        let pb = panel.value(t, b);
        if pb == 0.0 {
            return Err(Error::Domain(format!(
                "base {base:?} quotes zero at {}",
                panel.timestamps()[t]
            )));
        }
        for (i, &p) in panel.row(t).iter().enumerate() {
            if !p.is_nan() && p <= 0.0 {
                return Err(Error::Domain(format!(
                    "non-positive quote {p} for {:?} at {}",
                    panel.assets()[i],
                    panel.timestamps()[t]
                )));
            }
        }
    }
    let mut assets: Vec<String> = panel
        .assets()
        .iter()
        .filter(|a| a.as_str() != base)
        .cloned()
        .collect();
    assets.push(numeraire.to_string());
    let mut values = Vec::with_capacity(panel.n_times() * assets.len());
    for t in 0..panel.n_times() {
        let row = panel.row(t);
        let pb = row[b];
        values.extend(
            row.iter()
                .enumerate()
                .filter(|&(i, _)| i != b)
                .map(|(_, p)| p / pb),
        );
        values.push(1.0 / pb);
    }
    TimeSeriesPanel::new(assets, panel.timestamps().to_vec(), values)
}
