//! Normalized power sums `Σ (k/n)^α` over arithmetic progressions.
//!
//! Short progressions are summed term by term. Long ones are summed with the
//! midpoint Euler–Maclaurin formula: the integral over the half-shifted range,
//! one derivative correction, and a remainder bound from the third derivative.
//! All terms are normalized by the horizon `n`, so `(k/n)^α ≤ 1` and large
//! exponents underflow harmlessly instead of overflowing.

use std::fmt::Debug;

use num_traits::{Float, FromPrimitive};

/// Floating-point type usable for power sums.
pub trait Real: Float + FromPrimitive + Debug + Send + Sync + 'static {}

impl Real for f32 {}
impl Real for f64 {}

/// Progressions longer than this are summed with the integral approximation.
pub const EXACT_BLOCK_LEN: u64 = 100_000;

/// Leading terms of a long progression that are always summed exactly; keeps
/// the integration range away from zero where low derivatives of `u^α` blow up.
const HEAD_TERMS: u64 = 32;

/// A value together with an absolute error bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Approx<F> {
    pub value: F,
    pub error: F,
}

impl<F: Real> Approx<F> {
    pub fn exact(value: F) -> Self {
        Approx {
            value,
            error: F::zero(),
        }
    }

    pub fn add(self, other: Self) -> Self {
        Approx {
            value: self.value + other.value,
            error: self.error + other.error,
        }
    }

    pub fn sub(self, other: Self) -> Self {
        Approx {
            value: self.value - other.value,
            error: self.error + other.error,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SumMode {
    /// Exact below [`EXACT_BLOCK_LEN`], integral approximation above.
    #[default]
    Auto,
    /// Always sum term by term.
    Exact,
}

/// `first, first + step, …` with `len` terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Progression {
    pub first: u64,
    pub step: u64,
    pub len: u64,
}

impl Progression {
    pub fn last(&self) -> Option<u64> {
        (self.len > 0).then(|| self.first + (self.len - 1) * self.step)
    }

    /// Number of terms `≤ x`.
    pub fn count_upto(&self, x: u64) -> u64 {
        if self.len == 0 || self.first > x {
            0
        } else {
            ((x - self.first) / self.step + 1).min(self.len)
        }
    }

    /// Terms `k` with `lo < k ≤ hi`.
    pub fn terms_between(&self, lo: u64, hi: u64) -> impl Iterator<Item = u64> {
        let skip = self.count_upto(lo);
        let take = self.count_upto(hi).saturating_sub(skip);
        let (first, step) = (self.first, self.step);
        (skip..skip + take).map(move |j| first + j * step)
    }
}

/// Compensated (Neumaier) accumulator.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Accumulator<F> {
    sum: F,
    comp: F,
}

impl<F: Real> Accumulator<F> {
    pub(crate) fn new() -> Self {
        Accumulator {
            sum: F::zero(),
            comp: F::zero(),
        }
    }

    pub(crate) fn push(&mut self, x: F) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp = self.comp + ((self.sum - t) + x);
        } else {
            self.comp = self.comp + ((x - t) + self.sum);
        }
        self.sum = t;
    }

    pub(crate) fn total(&self) -> F {
        self.sum + self.comp
    }
}

fn cast<F: Real>(v: f64) -> F {
    F::from_f64(v).expect("representable constant")
}

pub(crate) fn normalized_term<F: Real>(k: u64, n: u64, alpha: F) -> F {
    let ratio = F::from_u64(k).unwrap() / F::from_u64(n).unwrap();
    ratio.powf(alpha)
}

fn exact_sum<F: Real>(first: u64, step: u64, len: u64, n: u64, alpha: F) -> F {
    let mut acc = Accumulator::new();
    for j in 0..len {
        acc.push(normalized_term(first + j * step, n, alpha));
    }
    acc.total()
}

/// `Σ_{j<len} ((first + j·step)/n)^α` with an error bound.
pub fn progression_power_sum<F: Real>(
    prog: &Progression,
    n: u64,
    alpha: F,
    mode: SumMode,
) -> Approx<F> {
    if prog.len == 0 {
        return Approx::exact(F::zero());
    }
    if alpha == F::zero() {
        return Approx::exact(F::from_u64(prog.len).unwrap());
    }
    if mode == SumMode::Exact || prog.len <= EXACT_BLOCK_LEN {
        return Approx::exact(exact_sum(prog.first, prog.step, prog.len, n, alpha));
    }

    let head = exact_sum(prog.first, prog.step, HEAD_TERMS, n, alpha);
    let first = prog.first + HEAD_TERMS * prog.step;
    let len = prog.len - HEAD_TERMS;

    let half = cast::<F>(0.5);
    let s = F::from_u64(prog.step).unwrap();
    let nn = F::from_u64(n).unwrap();
    let u_lo = (F::from_u64(first).unwrap() - half * s) / nn;
    let u_hi = (F::from_u64(first).unwrap() + (F::from_u64(len).unwrap() - half) * s) / nn;
    let one = F::one();
    let two = cast::<F>(2.0);
    let three = cast::<F>(3.0);
    let a1 = alpha + one;

    let integral = nn / s / a1 * (u_hi.powf(a1) - u_lo.powf(a1));
    let slope = s / nn;
    let first_derivative = |u: F| alpha * slope * u.powf(alpha - one);
    let correction = -(first_derivative(u_hi) - first_derivative(u_lo)) / cast(24.0);
    let third_derivative = |u: F| {
        alpha * (alpha - one) * (alpha - two) * slope * slope * slope * u.powf(alpha - three)
    };
    let remainder = (third_derivative(u_hi) - third_derivative(u_lo)).abs() / cast(720.0);
    let rounding = integral.abs() * F::epsilon() * cast(8.0);

    Approx {
        value: head + integral + correction,
        error: remainder + rounding,
    }
}

/// `ℕ_α(n) / n^α = Σ_{k ≤ n} (k/n)^α`.
pub fn naturals_power_sum<F: Real>(n: u64, alpha: F, mode: SumMode) -> Approx<F> {
    progression_power_sum(
        &Progression {
            first: 1,
            step: 1,
            len: n,
        },
        n,
        alpha,
        mode,
    )
}

/// Ratio of two approximate sums with the propagated error bound.
pub fn approx_ratio<F: Real>(num: Approx<F>, den: Approx<F>) -> Approx<F> {
    let zero = F::zero();
    let one = F::one();
    let ratio = (num.value / den.value).max(zero).min(one);
    let slack = den.value - den.error;
    let error = if slack > zero {
        (num.error + ratio * den.error) / slack
    } else {
        one
    };
    Approx {
        value: ratio,
        error,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(first: u64, step: u64, len: u64, n: u64, alpha: f64) -> f64 {
        (0..len)
            .map(|j| ((first + j * step) as f64 / n as f64).powf(alpha))
            .sum()
    }

    #[test]
    fn progression_counts() {
        let p = Progression {
            first: 3,
            step: 4,
            len: 5,
        };
        assert_eq!(p.last(), Some(19));
        assert_eq!(p.count_upto(2), 0);
        assert_eq!(p.count_upto(3), 1);
        assert_eq!(p.count_upto(10), 2);
        assert_eq!(p.count_upto(100), 5);
        assert_eq!(p.terms_between(3, 15).collect::<Vec<_>>(), vec![7, 11, 15]);
    }

    #[test]
    fn integral_route_matches_exact_summation() {
        for &(first, step, len, alpha) in &[
            (1u64, 1u64, 400_000u64, 1.0f64),
            (1, 1, 400_000, 0.5),
            (7, 3, 300_000, 2.5),
            (100, 1, 250_000, 8.0),
            (5, 2, 200_000, 256.0),
            (1, 5, 150_000, 0.1),
        ] {
            let n = first + (len - 1) * step;
            let prog = Progression { first, step, len };
            let approx = progression_power_sum(&prog, n, alpha, SumMode::Auto);
            let exact = progression_power_sum(&prog, n, alpha, SumMode::Exact).value;
            let diff = (approx.value - exact).abs();
            assert!(
                diff <= approx.error + 1e-9 * exact,
                "first={first} step={step} alpha={alpha}: diff {diff} bound {}",
                approx.error
            );
            assert!(diff / exact < 1e-9);
        }
    }

    #[test]
    fn short_sums_are_exact() {
        let prog = Progression {
            first: 2,
            step: 2,
            len: 5,
        };
        let v = progression_power_sum(&prog, 10, 1.0, SumMode::Auto);
        assert_eq!(v.error, 0.0);
        assert!((v.value - brute(2, 2, 5, 10, 1.0)).abs() < 1e-12);
        assert!((v.value - 3.0).abs() < 1e-12);
    }

    #[test]
    fn alpha_zero_counts_terms() {
        let prog = Progression {
            first: 1,
            step: 1,
            len: 1 << 30,
        };
        let v = progression_power_sum(&prog, 1 << 30, 0.0, SumMode::Auto);
        assert_eq!(v.value, (1u64 << 30) as f64);
        assert_eq!(v.error, 0.0);
    }

    #[test]
    fn huge_horizon_large_alpha_stays_finite() {
        let n = 1u64 << 30;
        let v = naturals_power_sum(n, 256.0f64, SumMode::Auto);
        // Σ (k/n)^α ≈ n/(α+1) + 1/2 for large n
        let expected = n as f64 / 257.0 + 0.5;
        assert!(v.value.is_finite());
        assert!((v.value - expected).abs() / expected < 1e-3);
    }

    #[test]
    fn f32_route_is_close() {
        let prog = Progression {
            first: 1,
            step: 1,
            len: 200_000,
        };
        let a = progression_power_sum(&prog, 200_000, 2.0f32, SumMode::Auto).value;
        let b = progression_power_sum(&prog, 200_000, 2.0f64, SumMode::Exact).value;
        assert!(((a as f64) - b).abs() / b < 1e-4);
    }

    #[test]
    fn ratio_propagates_error() {
        let r = approx_ratio(
            Approx {
                value: 1.0,
                error: 0.01,
            },
            Approx {
                value: 2.0,
                error: 0.01,
            },
        );
        assert_eq!(r.value, 0.5);
        assert!(r.error > 0.0 && r.error < 0.01);
    }
}
