//! Finite-horizon estimates of `d̄`, `ḏ`, `d̄_α`, `ḏ_α` and their `α → ∞` limits.
//!
//! limsup/liminf are taken as max/min over the top of the horizon grid
//! together with the structural breakpoints of the set that fall in the same
//! range; extrema of `A(n)/n` sit at block boundaries, which a geometric grid
//! alone would miss.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{extrapolate, EstimatorConfig};
use crate::error::Result;
use crate::natset::NatSet;
use crate::powersum::SumMode;
use crate::report::{DensityReport, Estimate, Warning};

/// Tolerance for the α-monotonicity diagnostic.
pub const MONOTONE_TOLERANCE: f64 = 1e-2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Upper,
    Lower,
}

impl Side {
    pub fn name(self) -> &'static str {
        match self {
            Side::Upper => "upper",
            Side::Lower => "lower",
        }
    }

    /// Whether `a` is more extreme than `b` on this side.
    pub(crate) fn beats(self, a: f64, b: f64) -> bool {
        match self {
            Side::Upper => a > b,
            Side::Lower => a < b,
        }
    }

    pub(crate) fn pick(self, values: impl Iterator<Item = f64>) -> f64 {
        match self {
            Side::Upper => values.fold(f64::NEG_INFINITY, f64::max),
            Side::Lower => values.fold(f64::INFINITY, f64::min),
        }
    }
}

/// Tail horizons merged with breakpoints of `a` inside the tail range.
pub fn candidate_horizons(a: &NatSet, cfg: &EstimatorConfig) -> Vec<u64> {
    let tail = cfg.tail_horizons();
    let (lo, hi) = (tail[0], tail[tail.len() - 1]);
    let mut points = tail;
    points.extend(a.breakpoints(lo, hi).into_iter().filter(|&b| b >= 1));
    points.sort_unstable();
    points.dedup();
    points
}

/// Extreme of the estimates and the spread between the extreme over all
/// points and over the later half.
fn summarize(side: Side, estimates: &[Estimate]) -> (f64, f64) {
    let all = side.pick(estimates.iter().map(|e| e.value));
    let half = &estimates[estimates.len() / 2..];
    let late = side.pick(half.iter().map(|e| e.value));
    (all, (all - late).abs())
}

fn horizon_report(
    quantity: String,
    a: &NatSet,
    side: Side,
    cfg: &EstimatorConfig,
    eval: impl Fn(u64) -> Result<f64> + Sync,
) -> Result<DensityReport> {
    cfg.validate()?;
    let points = candidate_horizons(a, cfg);
    let estimates = points
        .par_iter()
        .map(|&n| {
            Ok(Estimate {
                param: n as f64,
                value: eval(n)?.clamp(0.0, 1.0),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (extreme, spread) = summarize(side, &estimates);
    let mut report = DensityReport::new(quantity, a.to_string());
    report.estimates = estimates;
    report.extrapolated = extreme;
    report.error_indicator = spread;
    Ok(report)
}

fn density(a: &NatSet, side: Side, cfg: &EstimatorConfig) -> Result<DensityReport> {
    horizon_report(format!("{}_density", side.name()), a, side, cfg, |n| {
        Ok(a.count_capped(n, cfg.cap)? as f64 / n as f64)
    })
}

/// `d̄(A) ≈ max A(n)/n` over the tail window.
pub fn upper_density(a: &NatSet, cfg: &EstimatorConfig) -> Result<DensityReport> {
    density(a, Side::Upper, cfg)
}

/// `ḏ(A) ≈ min A(n)/n` over the tail window.
pub fn lower_density(a: &NatSet, cfg: &EstimatorConfig) -> Result<DensityReport> {
    density(a, Side::Lower, cfg)
}

/// `d̄_α(A)` or `ḏ_α(A)` from the power-sum ratio `A_α(n)/ℕ_α(n)`.
pub fn alpha_density(
    a: &NatSet,
    alpha: f64,
    cfg: &EstimatorConfig,
    side: Side,
) -> Result<DensityReport> {
    horizon_report(
        format!("{}_alpha_density", side.name()),
        a,
        side,
        cfg,
        |n| Ok(a.power_sum_ratio_with(n, alpha, SumMode::Auto, cfg.cap)?.value),
    )
}

/// `d̄_∞(A)` / `ḏ_∞(A)`: the α-density swept over the α grid.
///
/// Upper α-densities are nondecreasing in α and lower ones nonincreasing;
/// finite-horizon violations beyond [`MONOTONE_TOLERANCE`] are reported as
/// warnings.
pub fn d_infinity(a: &NatSet, cfg: &EstimatorConfig, side: Side) -> Result<DensityReport> {
    cfg.validate()?;
    let values = cfg
        .alphas
        .par_iter()
        .map(|&alpha| Ok(alpha_density(a, alpha, cfg, side)?.extrapolated))
        .collect::<Result<Vec<f64>>>()?;

    let mut report = DensityReport::new(format!("{}_d_infinity", side.name()), a.to_string());
    report.estimates = cfg
        .alphas
        .iter()
        .zip(&values)
        .map(|(&param, &value)| Estimate { param, value })
        .collect();

    for (w, &alpha) in values.windows(2).zip(&cfg.alphas[1..]) {
        let excess = match side {
            Side::Upper => w[0] - w[1],
            Side::Lower => w[1] - w[0],
        };
        if excess > MONOTONE_TOLERANCE {
            report.diagnostics.monotone = false;
            report.warnings.push(Warning::Monotonicity { alpha, excess });
        }
    }

    let points: Vec<(f64, f64)> = cfg
        .alphas
        .iter()
        .zip(&values)
        .filter(|(&alpha, _)| alpha > 0.0)
        .map(|(&alpha, &v)| (1.0 / alpha, v))
        .collect();
    report.extrapolated = if points.is_empty() {
        values[values.len() - 1]
    } else {
        extrapolate(cfg.extrapolation, &points)
    };
    report.error_indicator = match values.as_slice() {
        [.., a, b] => (a - b).abs(),
        _ => 0.0,
    };
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geom() -> NatSet {
        NatSet::geom_blocks(1, 2.0, 2.0).unwrap()
    }

    #[test]
    fn periodic_density() {
        let a = NatSet::periodic(3, vec![0]).unwrap();
        let cfg = EstimatorConfig::default();
        let up = upper_density(&a, &cfg).unwrap();
        let lo = lower_density(&a, &cfg).unwrap();
        assert!((up.extrapolated - 1.0 / 3.0).abs() <= 1e-3);
        assert!((lo.extrapolated - 1.0 / 3.0).abs() <= 1e-3);
    }

    #[test]
    fn geometric_blocks_oscillate() {
        let cfg = EstimatorConfig::default();
        let up = upper_density(&geom(), &cfg).unwrap();
        let lo = lower_density(&geom(), &cfg).unwrap();
        assert!((up.extrapolated - 2.0 / 3.0).abs() <= 1e-2, "{}", up.extrapolated);
        assert!((lo.extrapolated - 1.0 / 3.0).abs() <= 1e-2, "{}", lo.extrapolated);
    }

    #[test]
    fn finite_set_vanishes() {
        let a = NatSet::explicit((1..=100).collect()).unwrap();
        let cfg = EstimatorConfig {
            horizons: vec![1 << 20],
            ..EstimatorConfig::default()
        };
        assert!(upper_density(&a, &cfg).unwrap().extrapolated <= 1e-3);
        let wide = upper_density(&a, &EstimatorConfig::default()).unwrap();
        assert!(wide.extrapolated <= 1e-3);
    }

    #[test]
    fn alpha_examples() {
        let cfg = EstimatorConfig::default().with_max_horizon(1_000_000);
        let nat = alpha_density(&NatSet::naturals(), 3.0, &cfg, Side::Upper).unwrap();
        assert_eq!(nat.extrapolated, 1.0);
        let ev = alpha_density(&NatSet::evens(), 1.0, &cfg, Side::Upper).unwrap();
        assert!((ev.extrapolated - 0.5).abs() <= 1e-2);
        let g = alpha_density(&geom(), 8.0, &EstimatorConfig::default(), Side::Upper).unwrap();
        assert!(g.extrapolated >= 0.99, "{}", g.extrapolated);
    }

    #[test]
    fn d_infinity_examples() {
        let cfg = EstimatorConfig::default();
        let nat = d_infinity(&NatSet::naturals(), &cfg, Side::Upper).unwrap();
        assert_eq!(nat.extrapolated, 1.0);
        let ev = d_infinity(&NatSet::evens(), &cfg, Side::Lower).unwrap();
        assert!((ev.extrapolated - 0.5).abs() <= 1e-2);
        assert!(ev.diagnostics.monotone);
        let g = d_infinity(&geom(), &cfg, Side::Upper).unwrap();
        assert!(g.extrapolated >= 0.99);
        assert!(g.diagnostics.monotone);
        let gl = d_infinity(&geom(), &cfg, Side::Lower).unwrap();
        assert!(gl.extrapolated <= 0.01, "{}", gl.extrapolated);
    }

    #[test]
    fn duality_at_matched_horizons() {
        let cfg = EstimatorConfig::default();
        for a in [geom(), NatSet::periodic(5, vec![1, 3]).unwrap()] {
            let up = upper_density(&a, &cfg).unwrap().extrapolated;
            let lo = lower_density(&a.clone().complement(), &cfg).unwrap().extrapolated;
            assert!((up + lo - 1.0).abs() <= 2.0 / cfg.tail_horizons()[0] as f64);
        }
    }
}
