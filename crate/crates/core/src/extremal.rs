//! Extremal values `d̄*(A)`, `ḏ*(A)` and finite surrogate functionals.
//!
//! A [`Surrogate`] is a convex combination of window averages
//! `Σ w_j Θ_{θ_{k_j}, n_j}`, a finite stand-in for iterated ultrafilter limits
//! of `Θ_{θ_k,n}`. Every value computed here is a finite-horizon surrogate.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::EstimatorConfig;
use crate::densities::{d_infinity, Side};
use crate::error::{Error, Result};
use crate::natset::NatSet;
use crate::polya::{t_estimate, t_lower_estimate, theta_at, window_candidates};
use crate::report::{DensityReport, Estimate, Warning, SURROGATE_TAG};
use crate::scalar::{theta_of, Scalar};
use crate::seq::{step_approximate, BoundedSeq};

/// Route disagreement above which a [`Warning::CrossRouteMismatch`] is raised.
pub const CROSS_ROUTE_TOLERANCE: f64 = 5e-2;

/// Slack allowed on `Σ w = 1`.
pub const WEIGHT_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    /// Index into the θ grid, `θ = 1 − 2^{−theta_k}`.
    pub theta_k: u32,
    pub n: u64,
    pub w: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Surrogate {
    pub atoms: Vec<Atom>,
}

impl Surrogate {
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        let s = Surrogate { atoms };
        s.validate()?;
        Ok(s)
    }

    pub fn single(theta_k: u32, n: u64) -> Self {
        Surrogate {
            atoms: vec![Atom { theta_k, n, w: 1.0 }],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.atoms.is_empty() {
            return Err(Error::InvalidParameter("surrogate has no atoms".into()));
        }
        for a in &self.atoms {
            if !(a.w >= 0.0) || !a.w.is_finite() {
                return Err(Error::InvalidParameter(format!("negative weight {}", a.w)));
            }
            if a.n == 0 {
                return Err(Error::InvalidParameter("atom horizon must be ≥ 1".into()));
            }
            if !(1..=52).contains(&a.theta_k) {
                return Err(Error::InvalidParameter(format!(
                    "theta index {} outside 1..=52",
                    a.theta_k
                )));
            }
        }
        let total: f64 = self.atoms.iter().map(|a| a.w).sum();
        if (total - 1.0).abs() > WEIGHT_TOLERANCE {
            return Err(Error::InvalidParameter(format!("weights sum to {total}, not 1")));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("surrogates serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: Surrogate = serde_json::from_str(text)
            .map_err(|e| Error::InvalidParameter(format!("surrogate JSON: {e}")))?;
        s.validate()?;
        Ok(s)
    }
}

/// `Σ w · Θ_{θ_k, n}(x)`.
pub fn eval_surrogate_capped<S: Scalar>(f: &Surrogate, x: &BoundedSeq<S>, cap: u64) -> Result<S> {
    f.atoms.iter().try_fold(S::zero(), |acc, a| {
        let th = theta_of::<S>(a.theta_k);
        Ok(acc + S::from_f64(a.w) * theta_at(x, &th, a.n, cap)?)
    })
}

pub fn eval_surrogate<S: Scalar>(f: &Surrogate, x: &BoundedSeq<S>) -> Result<S> {
    eval_surrogate_capped(f, x, crate::natset::DEFAULT_CAP)
}

/// `μ_f(A) = f(χ_A)`.
pub fn surrogate_measure<S: Scalar>(f: &Surrogate, a: &NatSet) -> Result<S> {
    eval_surrogate(f, &BoundedSeq::indicator(a.clone()))
}

/// Best single-atom surrogate at the top of the θ grid.
///
/// A convex combination never exceeds its best atom on a fixed `x`, so
/// single atoms suffice for the supremum. Ties go to the smallest `n`.
pub fn surrogate_sup<S: Scalar>(x: &BoundedSeq<S>, cfg: &EstimatorConfig) -> Result<(Surrogate, f64)> {
    cfg.validate()?;
    let k = cfg.theta_k;
    let th = theta_of::<S>(k);
    let candidates = window_candidates(x, &th, cfg);
    let values = candidates
        .par_iter()
        .map(|&n| Ok((n, theta_at(x, &th, n, cfg.cap)?.to_f64())))
        .collect::<Result<Vec<_>>>()?;
    let (n, value) = values
        .into_iter()
        .reduce(|best, cur| if cur.1 > best.1 { cur } else { best })
        .expect("candidate set is never empty");
    let (lo, hi) = x.value_range();
    Ok((Surrogate::single(k, n), value.clamp(lo.to_f64(), hi.to_f64())))
}

/// `Σ c_i μ_f(A_i)` for the step approximation `Σ c_i χ_{A_i}` of `x`.
pub fn functional_from_measure<S: Scalar>(f: &Surrogate, x: &BoundedSeq<S>, eps: &S) -> Result<S> {
    let step = step_approximate(x, eps)?;
    step.levels().iter().try_fold(S::zero(), |acc, (c, a)| {
        Ok(acc + c.clone() * surrogate_measure::<S>(f, a)?)
    })
}

fn tagged(name: &str) -> String {
    format!("{name}{SURROGATE_TAG}")
}

/// `d̄*(A)` by the Pólya route (`t(χ_A)`), cross-checked against `d̄_∞(A)`.
pub fn upper_extreme(a: &NatSet, cfg: &EstimatorConfig) -> Result<DensityReport> {
    let ind = BoundedSeq::<f64>::indicator(a.clone());
    let polya = t_estimate(&ind, cfg)?;
    let alpha = d_infinity(a, cfg, Side::Upper)?;
    let gap = (polya.extrapolated - alpha.extrapolated).abs();

    let mut report = DensityReport::new(tagged("upper_extreme"), a.to_string());
    report.estimates = polya.estimates;
    report.extrapolated = polya.extrapolated;
    report.error_indicator = gap;
    report.diagnostics.monotone = alpha.diagnostics.monotone;
    report.diagnostics.cross_route_gap = Some(gap);
    report.warnings = alpha.warnings;
    if gap > CROSS_ROUTE_TOLERANCE {
        report.warnings.push(Warning::CrossRouteMismatch { gap });
    }
    report.routes = vec![
        ("polya".into(), polya.extrapolated),
        ("alpha".into(), alpha.extrapolated),
    ];
    Ok(report)
}

/// `ḏ*(A) = 1 − d̄*(ℕ∖A)`, with the direct lower Pólya route as a cross-check.
pub fn lower_extreme(a: &NatSet, cfg: &EstimatorConfig) -> Result<DensityReport> {
    let upper_c = upper_extreme(&a.clone().complement(), cfg)?;
    let direct = t_lower_estimate(&BoundedSeq::<f64>::indicator(a.clone()), cfg)?;
    let value = 1.0 - upper_c.extrapolated;
    let direct_gap = (value - direct.extrapolated).abs();
    let gap = upper_c.error_indicator.max(direct_gap);
    let alpha_route = 1.0 - upper_c.route("alpha").unwrap_or(f64::NAN);

    let mut report = DensityReport::new(tagged("lower_extreme"), a.to_string());
    report.estimates = upper_c
        .estimates
        .iter()
        .map(|e| Estimate {
            param: e.param,
            value: 1.0 - e.value,
        })
        .collect();
    report.extrapolated = value;
    report.error_indicator = gap;
    report.diagnostics.monotone = upper_c.diagnostics.monotone;
    report.diagnostics.cross_route_gap = Some(gap);
    report.warnings = upper_c
        .warnings
        .into_iter()
        .filter(|w| !matches!(w, Warning::CrossRouteMismatch { .. }))
        .collect();
    if gap > CROSS_ROUTE_TOLERANCE {
        report.warnings.push(Warning::CrossRouteMismatch { gap });
    }
    report.routes = vec![
        ("complement".into(), value),
        ("polya".into(), direct.extrapolated),
        ("alpha".into(), alpha_route),
    ];
    Ok(report)
}

/// `|ḏ*(A ∪ B) − d(A) − ḏ*(B)|` for disjoint `A`, `B` where `A` has a density.
pub fn verify_additivity(a: &NatSet, b: &NatSet, cfg: &EstimatorConfig) -> Result<f64> {
    let d = a
        .exact_density()
        .ok_or_else(|| Error::MissingDensity(a.to_string()))?;
    let union = NatSet::disjoint_union(vec![a.clone(), b.clone()])?;
    let lower_union = lower_extreme(&union, cfg)?.extrapolated;
    let lower_b = lower_extreme(b, cfg)?.extrapolated;
    Ok((lower_union - d - lower_b).abs())
}
