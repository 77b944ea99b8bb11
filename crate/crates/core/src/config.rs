use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::natset::DEFAULT_CAP;
use crate::scalar::{theta_of, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Extrapolation {
    /// Value at the last grid point.
    #[default]
    LastValue,
    /// Least-squares line in the grid's natural small parameter (`1/α` or
    /// `1 − θ`), evaluated at zero and clamped to the observed range.
    LinearFit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    /// Strictly increasing horizons.
    pub horizons: Vec<u64>,
    /// Strictly increasing exponents, all `≥ 0`.
    pub alphas: Vec<f64>,
    /// θ grid is `θ_k = 1 − 2^{−k}` for `k = 1..=theta_k`.
    pub theta_k: u32,
    /// Fraction of the horizon grid (from the top) used for limsup/liminf.
    pub tail_fraction: f64,
    pub extrapolation: Extrapolation,
    /// Enumeration cap for set fallbacks and enumerated sequences.
    pub cap: u64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            horizons: (1..=30).map(|e| 1u64 << e).collect(),
            alphas: (0..=8).map(|e| f64::from(1u32 << e)).collect(),
            theta_k: 10,
            tail_fraction: 1.0 / 3.0,
            extrapolation: Extrapolation::LastValue,
            cap: DEFAULT_CAP,
        }
    }
}

impl EstimatorConfig {
    /// Powers of two below `max`, followed by `max` itself.
    pub fn with_max_horizon(mut self, max: u64) -> Self {
        let mut grid: Vec<u64> = (1..64)
            .map(|e| 1u64 << e)
            .take_while(|&h| h < max)
            .collect();
        grid.push(max.max(1));
        self.horizons = grid;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.horizons.is_empty() || self.horizons[0] == 0 {
            return bad("horizon grid must be non-empty and start at 1 or above".into());
        }
        if self.horizons.windows(2).any(|w| w[0] >= w[1]) {
            return bad("horizon grid must be strictly increasing".into());
        }
        if self.alphas.is_empty() {
            return bad("alpha grid must be non-empty".into());
        }
        if self.alphas.iter().any(|a| !a.is_finite() || *a < 0.0) {
            return bad("alpha values must be finite and non-negative".into());
        }
        if self.alphas.windows(2).any(|w| w[0] >= w[1]) {
            return bad("alpha grid must be strictly increasing".into());
        }
        if !(1..=52).contains(&self.theta_k) {
            return bad(format!("theta index bound {} outside 1..=52", self.theta_k));
        }
        if !(self.tail_fraction > 0.0 && self.tail_fraction <= 1.0) {
            return bad(format!("tail window {} outside (0, 1]", self.tail_fraction));
        }
        if self.cap == 0 {
            return bad("enumeration cap must be positive".into());
        }
        Ok(())
    }

    fn tail_len(&self, len: usize) -> usize {
        ((len as f64 * self.tail_fraction).ceil() as usize).clamp(1, len.max(1))
    }

    /// Top `tail_fraction` of the horizon grid.
    pub fn tail_horizons(&self) -> Vec<u64> {
        let len = self.horizons.len();
        self.horizons[len - self.tail_len(len)..].to_vec()
    }

    /// Tail of the grid after dropping horizons above `limit`.
    pub fn tail_horizons_within(&self, limit: Option<u64>) -> Vec<u64> {
        let grid: Vec<u64> = match limit {
            Some(l) => self.horizons.iter().copied().filter(|&h| h <= l).collect(),
            None => self.horizons.clone(),
        };
        if grid.is_empty() {
            return limit.into_iter().collect();
        }
        let len = grid.len();
        grid[len - self.tail_len(len)..].to_vec()
    }

    /// Tail portion of an arbitrary index list.
    pub fn tail_of(&self, items: &[u64]) -> Vec<u64> {
        let len = items.len();
        if len == 0 {
            return Vec::new();
        }
        items[len - self.tail_len(len)..].to_vec()
    }

    pub fn theta_indices(&self) -> std::ops::RangeInclusive<u32> {
        1..=self.theta_k
    }

    pub fn thetas<S: Scalar>(&self) -> Vec<S> {
        self.theta_indices().map(theta_of).collect()
    }
}

/// Extrapolate `values` observed at small parameters `h` (e.g. `1/α`) to
/// `h = 0`.
pub(crate) fn extrapolate(policy: Extrapolation, points: &[(f64, f64)]) -> f64 {
    let last = points.last().map(|p| p.1).unwrap_or(0.0);
    if policy == Extrapolation::LastValue || points.len() < 2 {
        return last;
    }
    let n = points.len() as f64;
    let mh = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mv = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mh).powi(2)).sum();
    if sxx == 0.0 {
        return last;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mh) * (p.1 - mv)).sum();
    let fit = mv - sxy / sxx * mh;
    let lo = points.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    fit.clamp(lo, hi)
}
