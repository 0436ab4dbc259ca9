//! Seeded one-factor-per-group panels with a known grouping.
//!
//! Asset `k` of group `g` follows `Y_k(t) = loading F_g(t) + global G(t) +
//! noise_sigma e_k(t)` with independent standard normal `F_g`, `G`, `e_k`.
//! Every series draws from its own ChaCha stream keyed on `(seed, series)`,
//! with `t` as the stream position, so columns can be generated in parallel
//! and in any order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ingest::TimeSeriesPanel;
use crate::transform::{ReturnsMatrix, SignalKind};

const FACTOR_STREAM: u64 = 1 << 40;
const NOISE_STREAM: u64 = 2 << 40;
const GLOBAL_STREAM: u64 = 3 << 40;

#[derive(Debug, Clone, PartialEq)]
pub struct FactorModelSpec {
    /// `(label, member count)` per group.
    pub groups: Vec<(String, usize)>,
    pub factor_loading: f64,
    pub noise_sigma: f64,
    pub length: usize,
    pub seed: u64,
    /// Loading on a factor shared by all assets; 0 disables it.
    pub global_loading: f64,
}

impl FactorModelSpec {
    /// `count` groups named `G1..` of `size` members each.
    pub fn uniform(count: usize, size: usize, loading: f64, noise: f64, length: usize, seed: u64) -> Self {
        FactorModelSpec {
            groups: (1..=count).map(|g| (format!("G{g}"), size)).collect(),
            factor_loading: loading,
            noise_sigma: noise,
            length,
            seed,
            global_loading: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.groups.is_empty() {
            return Err(Error::Spec("at least one group required".into()));
        }
        if let Some((label, _)) = self.groups.iter().find(|(l, c)| l.is_empty() || *c == 0) {
            return Err(Error::Spec(format!("group {label:?} is unnamed or empty")));
        }
        if self.n_assets() < 2 {
            return Err(Error::Spec("at least two assets required".into()));
        }
        if !(self.factor_loading > 0.0 && self.factor_loading < 1.0) {
            return Err(Error::Spec(format!(
                "factor loading {} outside (0, 1)",
                self.factor_loading
            )));
        }
        if !(self.global_loading >= 0.0 && self.global_loading < 1.0) {
            return Err(Error::Spec(format!(
                "global loading {} outside [0, 1)",
                self.global_loading
            )));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::Spec(format!("noise sigma {} must be >= 0", self.noise_sigma)));
        }
        if self.length < 2 {
            return Err(Error::Spec(format!("length {} below 2", self.length)));
        }
        Ok(())
    }

    pub fn n_assets(&self) -> usize {
        self.groups.iter().map(|(_, c)| c).sum()
    }

    /// Asset labels `<group>_<k>` with zero-padded, 1-based member numbers.
    pub fn asset_labels(&self) -> Vec<String> {
        self.groups
            .iter()
            .flat_map(|(g, c)| {
                let width = c.to_string().len();
                (1..=*c).map(move |k| format!("{g}_{k:0width$}"))
            })
            .collect()
    }

    /// Ground-truth grouping as lists of asset labels.
    pub fn group_members(&self) -> Vec<Vec<String>> {
        let labels = self.asset_labels();
        let mut out = Vec::with_capacity(self.groups.len());
        let mut start = 0;
        for (_, c) in &self.groups {
            out.push(labels[start..start + c].to_vec());
            start += c;
        }
        out
    }

    /// Population correlation between two members of the same group.
    pub fn implied_within_group_rho(&self) -> f64 {
        let common = self.factor_loading.powi(2) + self.global_loading.powi(2);
        common / (common + self.noise_sigma.powi(2))
    }
}

fn normal_stream(seed: u64, stream: u64, len: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    StandardNormal.sample_iter(&mut rng).take(len).collect()
}

pub fn generate(spec: &FactorModelSpec) -> Result<ReturnsMatrix> {
    spec.validate()?;
    let t_len = spec.length;
    let factors: Vec<Vec<f64>> = (0..spec.groups.len() as u64)
        .into_par_iter()
        .map(|g| normal_stream(spec.seed, FACTOR_STREAM | g, t_len))
        .collect();
    let global = (spec.global_loading > 0.0).then(|| normal_stream(spec.seed, GLOBAL_STREAM, t_len));
    let group_of: Vec<usize> = spec
        .groups
        .iter()
        .enumerate()
        .flat_map(|(g, (_, c))| std::iter::repeat_n(g, *c))
        .collect();
    let columns: Vec<Vec<f64>> = group_of
        .par_iter()
        .enumerate()
        .map(|(k, &g)| {
            let noise = normal_stream(spec.seed, NOISE_STREAM | k as u64, t_len);
            (0..t_len)
                .map(|t| {
                    let mut y = spec.factor_loading * factors[g][t] + spec.noise_sigma * noise[t];
                    if let Some(gl) = &global {
                        y += spec.global_loading * gl[t];
                    }
                    y
                })
                .collect()
        })
        .collect();
    ReturnsMatrix::from_columns(spec.asset_labels(), &columns, SignalKind::LogReturn)
}

/// Integrates returns into prices `P(0) = start`, `P(t+1) = P(t) exp(Y(t))`.
/// Taking log returns of the result recovers the input.
pub fn to_prices(y: &ReturnsMatrix, start: f64) -> Result<TimeSeriesPanel> {
    if !(start > 0.0 && start.is_finite()) {
        return Err(Error::Domain(format!("start price {start} must be positive")));
    }
    let n = y.n_assets();
    let mut values = Vec::with_capacity((y.n_obs() + 1) * n);
    let mut log_p = vec![start.ln(); n];
    values.extend(log_p.iter().map(|l| l.exp()));
    for t in 0..y.n_obs() {
        for (lp, r) in log_p.iter_mut().zip(y.row(t)) {
            *lp += r;
        }
        values.extend(log_p.iter().map(|l| l.exp()));
    }
    let timestamps = (0..=y.n_obs() as i64).map(crate::ingest::Timestamp::Index).collect();
    TimeSeriesPanel::new(y.assets().to_vec(), timestamps, values)
}
