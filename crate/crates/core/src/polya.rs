//! Window averages `Θ_{θ,r}(x) = S_{θ,r}(x) / (r(1−θ))` with
//! `S_{θ,r}(x) = Σ_{θr < i ≤ r} x_i`, and the limits built from them.
//!
//! The window holds the integers `i` with `θr < i ≤ r`, i.e.
//! `⌊θr⌋ < i ≤ ⌊r⌋`; an integral `θr` is excluded.

use rayon::prelude::*;

use crate::config::{extrapolate, EstimatorConfig};
use crate::densities::Side;
use crate::error::{Error, Result};
use crate::report::{DensityReport, Estimate};
use crate::scalar::{max_of, theta_of, Scalar};
use crate::seq::BoundedSeq;

#[derive(Clone, Debug, PartialEq)]
pub struct ThetaEvaluation<S> {
    pub theta: S,
    pub r: S,
    pub value: S,
    /// Number of integers in `(θr, r]`.
    pub window_count: u64,
}

fn check_window<S: Scalar>(theta: &S, r: &S) -> Result<()> {
    if !(*theta > S::zero() && *theta < S::one()) {
        return Err(Error::InvalidParameter(format!("theta {theta} outside (0, 1)")));
    }
    if *r < S::one() {
        return Err(Error::InvalidParameter(format!("window end {r} below 1")));
    }
    Ok(())
}

fn window_bounds<S: Scalar>(theta: &S, r: &S) -> (u64, u64) {
    ((theta.clone() * r.clone()).floor_u64(), r.floor_u64())
}

/// `S_{θ,r}(x)` together with the number of indices in the window.
pub fn window_sum<S: Scalar>(x: &BoundedSeq<S>, theta: &S, r: &S, cap: u64) -> Result<(S, u64)> {
    check_window(theta, r)?;
    let (lo, hi) = window_bounds(theta, r);
    Ok((x.window_sum(lo, hi, cap)?, hi - lo))
}

pub fn theta_eval<S: Scalar>(
    x: &BoundedSeq<S>,
    theta: &S,
    r: &S,
    cap: u64,
) -> Result<ThetaEvaluation<S>> {
    let (sum, window_count) = window_sum(x, theta, r, cap)?;
    let value = sum / (r.clone() * (S::one() - theta.clone()));
    Ok(ThetaEvaluation {
        theta: theta.clone(),
        r: r.clone(),
        value,
        window_count,
    })
}

/// `Θ_{θ,r}(x)` with the default enumeration cap.
pub fn theta<S: Scalar>(x: &BoundedSeq<S>, theta: &S, r: &S) -> Result<S> {
    Ok(theta_eval(x, theta, r, crate::natset::DEFAULT_CAP)?.value)
}

/// `Θ_{θ,n}(x)` at an integer horizon.
pub fn theta_at<S: Scalar>(x: &BoundedSeq<S>, theta: &S, n: u64, cap: u64) -> Result<S> {
    Ok(theta_eval(x, theta, &S::from_u64(n), cap)?.value)
}

/// Horizons at which `Θ_{θ,n}(x)` is examined: the tail of the grid plus,
/// for each structural breakpoint `b`, the horizons where `b` enters the
/// window from the right (`b`) or leaves it on the left (`⌈b/θ⌉`).
pub fn window_candidates<S: Scalar>(x: &BoundedSeq<S>, theta: &S, cfg: &EstimatorConfig) -> Vec<u64> {
    let tail = cfg.tail_horizons_within(x.horizon_limit(cfg.cap));
    let (lo, hi) = (tail[0], tail[tail.len() - 1]);
    let theta_f = theta.to_f64();
    let reach = ((lo as f64) * theta_f).floor().max(1.0) as u64;
    let mut points = tail;
    for b in x.breakpoints(reach, hi) {
        let left = ((b as f64) / theta_f).ceil() as u64;
        for c in [b.saturating_sub(1), b, b + 1, left.saturating_sub(1), left, left + 1] {
            if (lo..=hi).contains(&c) {
                points.push(c);
            }
        }
    }
    points.sort_unstable();
    points.dedup();
    points
}

/// Extreme of `Θ_{θ,n}(x)` over the candidate horizons.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WindowExtreme {
    pub value: f64,
    /// Smallest horizon attaining the extreme.
    pub horizon: u64,
}

pub fn theta_extreme<S: Scalar>(
    x: &BoundedSeq<S>,
    theta: &S,
    cfg: &EstimatorConfig,
    side: Side,
) -> Result<WindowExtreme> {
    check_window(theta, &S::one())?;
    let points = window_candidates(x, theta, cfg);
    let values = points
        .par_iter()
        .map(|&n| Ok((n, theta_at(x, theta, n, cfg.cap)?.to_f64())))
        .collect::<Result<Vec<_>>>()?;
    let (horizon, value) = values
        .into_iter()
        .reduce(|best, cur| if side.beats(cur.1, best.1) { cur } else { best })
        .expect("candidate set is never empty");
    let (lo, hi) = x.value_range();
    Ok(WindowExtreme {
        value: value.clamp(lo.to_f64(), hi.to_f64()),
        horizon,
    })
}

/// `Θ_θ(x) = limsup_n Θ_{θ,n}(x)`, finite-horizon surrogate.
pub fn theta_limsup<S: Scalar>(x: &BoundedSeq<S>, theta: &S, cfg: &EstimatorConfig) -> Result<f64> {
    Ok(theta_extreme(x, theta, cfg, Side::Upper)?.value)
}

/// `liminf_n Θ_{θ,n}(x)`, finite-horizon surrogate.
pub fn theta_liminf<S: Scalar>(x: &BoundedSeq<S>, theta: &S, cfg: &EstimatorConfig) -> Result<f64> {
    Ok(theta_extreme(x, theta, cfg, Side::Lower)?.value)
}

fn theta_sweep<S: Scalar>(
    x: &BoundedSeq<S>,
    cfg: &EstimatorConfig,
    side: Side,
    quantity: &str,
) -> Result<DensityReport> {
    cfg.validate()?;
    let estimates = cfg
        .theta_indices()
        .map(|k| {
            let th = theta_of::<S>(k);
            Ok(Estimate {
                param: th.to_f64(),
                value: theta_extreme(x, &th, cfg, side)?.value,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let points: Vec<(f64, f64)> = estimates.iter().map(|e| (1.0 - e.param, e.value)).collect();
    let mut report = DensityReport::new(quantity, x.to_string());
    report.extrapolated = extrapolate(cfg.extrapolation, &points);
    report.error_indicator = match estimates.as_slice() {
        [.., a, b] => (a.value - b.value).abs(),
        _ => 0.0,
    };
    report.estimates = estimates;
    Ok(report)
}

/// `t(x) = lim_{θ→1⁻} limsup_n Θ_{θ,n}(x)`; for `x = χ_A` this is the upper
/// Pólya density.
pub fn t_estimate<S: Scalar>(x: &BoundedSeq<S>, cfg: &EstimatorConfig) -> Result<DensityReport> {
    theta_sweep(x, cfg, Side::Upper, "upper_polya")
}

/// `lim_{θ→1⁻} liminf_n Θ_{θ,n}(x) = −t(−x)`; lower Pólya density on indicators.
pub fn t_lower_estimate<S: Scalar>(x: &BoundedSeq<S>, cfg: &EstimatorConfig) -> Result<DensityReport> {
    theta_sweep(x, cfg, Side::Lower, "lower_polya")
}

/// `φ(θ) = liminf_{n ∈ I} Θ_{θ,n}(x)` over the tail of the index list `I`.
pub fn phi<S: Scalar>(
    x: &BoundedSeq<S>,
    theta: &S,
    index_set: &[u64],
    cfg: &EstimatorConfig,
) -> Result<S> {
    if index_set.is_empty() {
        return Err(Error::InvalidParameter("index set is empty".into()));
    }
    if index_set.windows(2).any(|w| w[0] >= w[1]) || index_set[0] == 0 {
        return Err(Error::InvalidParameter(
            "index set must be strictly increasing positive integers".into(),
        ));
    }
    let mut best: Option<S> = None;
    for n in cfg.tail_of(index_set) {
        let v = theta_at(x, theta, n, cfg.cap)?;
        best = Some(match best {
            Some(b) if b <= v => b,
            _ => v,
        });
    }
    Ok(best.expect("non-empty tail"))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContinuityCheck<S> {
    pub lhs: S,
    pub bound: S,
    pub ok: bool,
}

/// `|Θ_{θ,r}(x) − Θ_{θ+δ,r}(x)|` against
/// `2δ‖x‖/(1−θ) + ‖x‖·max(2/(r(1−θ)), 1/(r(1−θ−δ)))`.
///
/// The windows differ by the integers in `(θr, (θ+δ)r]`, at most `δr + 1`
/// of them, and the normalizations by `δ/((1−θ)(1−θ−δ)r)`; the second term
/// covers the integer rounding of both window ends.
pub fn continuity_modulus_check<S: Scalar>(
    x: &BoundedSeq<S>,
    theta: &S,
    delta: &S,
    r: &S,
) -> Result<ContinuityCheck<S>> {
    let one = S::one();
    if !(*delta > S::zero() && *delta < one.clone() - theta.clone()) {
        return Err(Error::InvalidParameter(format!(
            "delta {delta} outside (0, 1 − theta)"
        )));
    }
    let shifted = theta.clone() + delta.clone();
    let a = self::theta(x, theta, r)?;
    let b = self::theta(x, &shifted, r)?;
    let lhs = (a - b).abs();
    let sup = x.sup_bound();
    let gap = one.clone() - theta.clone();
    let two = S::from_u64(2);
    let rounding = max_of(
        two.clone() / (r.clone() * gap.clone()),
        one / (r.clone() * (gap.clone() - delta.clone())),
    );
    let bound = two * delta.clone() * sup.clone() / gap + sup * rounding;
    let ok = lhs <= bound;
    Ok(ContinuityCheck { lhs, bound, ok })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::natset::NatSet;
    use crate::scalar::Rational;

    fn geom() -> NatSet {
        NatSet::geom_blocks(1, 2.0, 2.0).unwrap()
    }

    fn q(n: i128, d: i128) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn theta_examples() {
        let one = BoundedSeq::constant(Rational::from_integer(1));
        let half = q(1, 2);
        assert_eq!(theta(&one, &half, &Rational::from_integer(100)).unwrap(), Rational::from_integer(1));
        let ev = BoundedSeq::<Rational>::indicator(NatSet::evens());
        assert_eq!(theta(&ev, &half, &Rational::from_integer(100)).unwrap(), half);
        let g = BoundedSeq::<Rational>::indicator(geom());
        assert_eq!(theta(&g, &half, &Rational::from_integer(32)).unwrap(), q(15, 16));
    }

    #[test]
    fn window_excludes_integral_left_end() {
        let one = BoundedSeq::constant(Rational::from_integer(1));
        let e = theta_eval(&one, &q(1, 2), &Rational::from_integer(10), 100).unwrap();
        assert_eq!(e.window_count, 5);
        let e = theta_eval(&one, &q(1, 3), &q(21, 2), 100).unwrap();
        // (3.5, 10.5] holds 4..=10
        assert_eq!(e.window_count, 7);
        assert!(theta_eval(&one, &Rational::from_integer(1), &Rational::from_integer(10), 100).is_err());
        assert!(theta_eval(&one, &q(1, 2), &q(1, 2), 100).is_err());
    }

    #[test]
    fn limsup_examples() {
        let cfg = EstimatorConfig::default();
        let ev = BoundedSeq::<f64>::indicator(NatSet::evens());
        assert!((theta_limsup(&ev, &0.75, &cfg).unwrap() - 0.5).abs() <= 1e-2);
        let g = BoundedSeq::<f64>::indicator(geom());
        assert!((theta_limsup(&g, &0.75, &cfg).unwrap() - 1.0).abs() <= 1e-2);
        assert!(theta_liminf(&g, &0.75, &cfg).unwrap() <= 1e-2);
        let c = BoundedSeq::constant(0.3);
        let n_min = cfg.tail_horizons()[0] as f64;
        assert!((theta_limsup(&c, &0.75, &cfg).unwrap() - 0.3).abs() <= 2.0 / (n_min * 0.25));
    }

    #[test]
    fn t_examples() {
        let cfg = EstimatorConfig::default();
        let ev = BoundedSeq::<f64>::indicator(NatSet::evens());
        assert!((t_estimate(&ev, &cfg).unwrap().extrapolated - 0.5).abs() <= 1e-2);
        let g = BoundedSeq::<f64>::indicator(geom());
        assert!(t_estimate(&g, &cfg).unwrap().extrapolated >= 0.98);
        assert!(t_lower_estimate(&g, &cfg).unwrap().extrapolated <= 0.02);
        let c = BoundedSeq::constant(0.7);
        assert!((t_estimate(&c, &cfg).unwrap().extrapolated - 0.7).abs() <= 1e-2);
    }

    #[test]
    fn phi_examples() {
        let cfg = EstimatorConfig::default();
        let g = BoundedSeq::<Rational>::indicator(geom());
        // each window (3n/4, n] at n = 2·4^k misses only n itself
        let idx: Vec<u64> = (1..=12).map(|k| 2 * 4u64.pow(k)).collect();
        let tail = cfg.tail_of(&idx)[0] as i128;
        let v = phi(&g, &q(3, 4), &idx, &cfg).unwrap();
        assert_eq!(v, Rational::from_integer(1) - q(4, tail));
        let ev = BoundedSeq::<Rational>::indicator(NatSet::evens());
        let idx: Vec<u64> = (1..=300).map(|k| 4 * k).collect();
        assert_eq!(phi(&ev, &q(1, 2), &idx, &cfg).unwrap(), q(1, 2));
        let one = BoundedSeq::constant(Rational::from_integer(1));
        assert_eq!(phi(&one, &q(1, 4), &idx, &cfg).unwrap(), Rational::from_integer(1));
        assert!(phi(&one, &q(1, 4), &[], &cfg).is_err());
    }

    #[test]
    fn continuity_examples() {
        let one = BoundedSeq::constant(1.0);
        assert!(continuity_modulus_check(&one, &0.5, &0.1, &1000.0).unwrap().ok);
        let g = BoundedSeq::<f64>::indicator(geom());
        let r = 2.0 * 4f64.powi(8);
        assert!(continuity_modulus_check(&g, &0.6, &0.05, &r).unwrap().ok);
        let x = BoundedSeq::<f64>::seeded_random01(7);
        assert!(continuity_modulus_check(&x, &0.9, &0.05, &1e5).unwrap().ok);
        assert!(continuity_modulus_check(&x, &0.9, &0.2, &1e5).is_err());
    }

    #[test]
    fn continuity_bound_holds_near_the_window_edge() {
        // window (θ+δ)r.. r nearly empty: the rounding term dominates
        let one = BoundedSeq::constant(Rational::from_integer(1));
        let c = continuity_modulus_check(&one, &q(1, 2), &q(4999, 10000), &Rational::from_integer(1000)).unwrap();
        assert!(c.ok, "{} > {}", c.lhs, c.bound);
    }

    #[test]
    fn affine_equivariance_and_duality_are_exact() {
        let x = BoundedSeq::<Rational>::seeded_random01(11);
        let (c, d) = (q(-3, 2), q(2, 7));
        let y = BoundedSeq::affine(c, d, x.clone());
        let one = BoundedSeq::constant(Rational::from_integer(1));
        let a = geom();
        let ind = BoundedSeq::<Rational>::indicator(a.clone());
        let co = BoundedSeq::<Rational>::indicator(a.complement());
        for k in [1u32, 3, 7] {
            let th = theta_of::<Rational>(k);
            for n in [100u64, 1023, 5000] {
                let tx = theta_at(&x, &th, n, 1 << 20).unwrap();
                let t1 = theta_at(&one, &th, n, 1 << 20).unwrap();
                assert_eq!(theta_at(&y, &th, n, 1 << 20).unwrap(), c * tx + d * t1);
                assert_eq!(
                    theta_at(&ind, &th, n, 1 << 20).unwrap() + theta_at(&co, &th, n, 1 << 20).unwrap(),
                    t1
                );
            }
        }
    }

    #[test]
    fn splitting_identity_for_real_windows() {
        // S_{θθ', r} = S_{θ, θ'r} + S_{θ', r}
        let x = BoundedSeq::<Rational>::seeded_random01(5);
        for (th, th2, r) in [(q(1, 2), q(2, 3), q(1001, 3)), (q(3, 4), q(7, 8), q(5000, 1)), (q(9, 10), q(1, 3), q(777, 7))] {
            let lhs = window_sum(&x, &(th * th2), &r, 1 << 20).unwrap().0;
            let rhs = window_sum(&x, &th, &(th2 * r), 1 << 20).unwrap().0 + window_sum(&x, &th2, &r, 1 << 20).unwrap().0;
            assert_eq!(lhs, rhs);
        }
    }
}
