//! Bounded real sequences `x = (x_1, x_2, …)`.
//!
//! Sequences are descriptions, not buffers: window sums `Σ_{lo<i≤hi} x_i`
//! are computed in closed form wherever the description allows it. The only
//! enumerated variant is the seeded pseudo-random sequence, whose prefix sums
//! are memoized in chunks behind a mutex.

use std::fmt;
use std::sync::{Arc, Mutex};

use rand_chacha::ChaCha8Rng;
use rand::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::natset::{NatSet, DEFAULT_CAP};
use crate::scalar::{max_of, min_of, Scalar};

/// Memoization chunk for enumerated sequences.
pub const PREFIX_CHUNK: usize = 1 << 16;

/// Denominator of the dyadic values produced by [`SeededUnit`].
const UNIT_DENOMINATOR: i64 = 1 << 32;

#[derive(Debug, Default)]
struct UnitCache<S> {
    values: Vec<S>,
    /// `prefix[i] = x_1 + … + x_i`.
    prefix: Vec<S>,
}

/// Deterministic pseudo-random values in `[0, 1)`; `x_i = u_i / 2^32` where
/// `u_i` is the `(i−1)`-th 32-bit word of a ChaCha8 stream seeded by `seed`.
#[derive(Clone)]
pub struct SeededUnit<S> {
    seed: u64,
    cache: Arc<Mutex<UnitCache<S>>>,
}

impl<S: Scalar> SeededUnit<S> {
    pub fn new(seed: u64) -> Self {
        SeededUnit {
            seed,
            cache: Arc::new(Mutex::new(UnitCache {
                values: Vec::new(),
                prefix: vec![S::zero()],
            })),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn word(&self, i: u64) -> u32 {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_word_pos(u128::from(i - 1));
        rng.next_u32()
    }

    fn to_scalar(word: u32) -> S {
        S::from_ratio(i64::from(word), UNIT_DENOMINATOR)
    }

    fn value(&self, i: u64) -> S {
        {
            let cache = self.cache.lock().expect("sequence cache poisoned");
            if let Some(v) = cache.values.get((i - 1) as usize) {
                return v.clone();
            }
        }
        Self::to_scalar(self.word(i))
    }

    fn prefix(&self, n: u64, cap: u64) -> Result<S> {
        if n > cap {
            return Err(Error::EnumerationCapExceeded { requested: n, cap });
        }
        let mut cache = self.cache.lock().expect("sequence cache poisoned");
        while (cache.values.len() as u64) < n {
            let start = cache.values.len() as u64;
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            rng.set_word_pos(u128::from(start));
            let mut running = cache.prefix.last().cloned().unwrap_or_else(S::zero);
            for _ in 0..PREFIX_CHUNK {
                let v = Self::to_scalar(rng.next_u32());
                running = running + v.clone();
                cache.values.push(v);
                cache.prefix.push(running.clone());
            }
        }
        Ok(cache.prefix[n as usize].clone())
    }
}

impl<S> fmt::Debug for SeededUnit<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SeededUnit").field("seed", &self.seed).finish()
    }
}

impl<S> PartialEq for SeededUnit<S> {
    fn eq(&self, other: &Self) -> bool {
        self.seed == other.seed
    }
}

/// `Σ c_j χ_{A_j}`.
#[derive(Clone, Debug, PartialEq)]
pub struct StepSeq<S> {
    levels: Vec<(S, NatSet)>,
    /// Level sets partition ℕ.
    partition: bool,
}

impl<S: Scalar> StepSeq<S> {
    pub fn new(levels: Vec<(S, NatSet)>) -> Self {
        StepSeq {
            levels,
            partition: false,
        }
    }

    pub fn levels(&self) -> &[(S, NatSet)] {
        &self.levels
    }

    pub fn is_partition(&self) -> bool {
        self.partition
    }

    pub fn value(&self, i: u64) -> S {
        self.levels
            .iter()
            .filter(|(_, a)| a.member(i))
            .fold(S::zero(), |acc, (c, _)| acc + c.clone())
    }

    pub fn window_sum(&self, lo: u64, hi: u64, cap: u64) -> Result<S> {
        self.levels.iter().try_fold(S::zero(), |acc, (c, a)| {
            Ok(acc + c.clone() * S::from_u64(a.count_between(lo, hi, cap)?))
        })
    }

    fn value_range(&self) -> (S, S) {
        if self.partition && !self.levels.is_empty() {
            let mut lo = self.levels[0].0.clone();
            let mut hi = lo.clone();
            for (c, _) in &self.levels[1..] {
                lo = min_of(lo, c.clone());
                hi = max_of(hi, c.clone());
            }
            return (lo, hi);
        }
        self.levels.iter().fold((S::zero(), S::zero()), |(lo, hi), (c, _)| {
            (
                lo + min_of(S::zero(), c.clone()),
                hi + max_of(S::zero(), c.clone()),
            )
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum BoundedSeq<S: Scalar> {
    Indicator(NatSet),
    Constant(S),
    /// `x_i = values[(i − 1) mod len]`.
    Periodic(Vec<S>),
    Affine {
        scale: S,
        shift: S,
        inner: Box<BoundedSeq<S>>,
    },
    SeededRandom01(SeededUnit<S>),
    /// `x_i = prefix[i − 1]` for `i ≤ len`, `tail` afterwards.
    PrefixTail {
        prefix: Vec<S>,
        tail: S,
    },
    /// `x̃_n = ⌊s_n⌋ − ⌊s_{n−1}⌋` for the partial sums `s_n` of the inner sequence.
    Rounded(Box<BoundedSeq<S>>),
    Sum(Vec<BoundedSeq<S>>),
    Step(StepSeq<S>),
}

impl<S: Scalar> BoundedSeq<S> {
    pub fn indicator(set: NatSet) -> Self {
        BoundedSeq::Indicator(set)
    }

    pub fn constant(value: S) -> Self {
        BoundedSeq::Constant(value)
    }

    pub fn periodic(values: Vec<S>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter(
                "periodic sequences need at least one value".into(),
            ));
        }
        Ok(BoundedSeq::Periodic(values))
    }

    pub fn affine(scale: S, shift: S, inner: BoundedSeq<S>) -> Self {
        BoundedSeq::Affine {
            scale,
            shift,
            inner: Box::new(inner),
        }
    }

    pub fn seeded_random01(seed: u64) -> Self {
        BoundedSeq::SeededRandom01(SeededUnit::new(seed))
    }

    pub fn prefix_tail(prefix: Vec<S>, tail: S) -> Self {
        BoundedSeq::PrefixTail { prefix, tail }
    }

    pub fn sum(parts: Vec<BoundedSeq<S>>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidParameter("sum needs at least one term".into()));
        }
        Ok(BoundedSeq::Sum(parts))
    }

    /// `x_i`, for `i ≥ 1`.
    pub fn value(&self, i: u64) -> Result<S> {
        if i == 0 {
            return Err(Error::InvalidParameter("sequences are indexed from 1".into()));
        }
        Ok(match self {
            BoundedSeq::Indicator(a) => {
                if a.member(i) {
                    S::one()
                } else {
                    S::zero()
                }
            }
            BoundedSeq::Constant(c) => c.clone(),
            BoundedSeq::Periodic(v) => v[((i - 1) % v.len() as u64) as usize].clone(),
            BoundedSeq::Affine {
                scale,
                shift,
                inner,
            } => scale.clone() * inner.value(i)? + shift.clone(),
            BoundedSeq::SeededRandom01(u) => u.value(i),
            BoundedSeq::PrefixTail { prefix, tail } => prefix
                .get((i - 1) as usize)
                .cloned()
                .unwrap_or_else(|| tail.clone()),
            BoundedSeq::Rounded(inner) => {
                let s = inner.window_sum(0, i, DEFAULT_CAP)?;
                let s_prev = inner.window_sum(0, i - 1, DEFAULT_CAP)?;
                s.floor() - s_prev.floor()
            }
            BoundedSeq::Sum(parts) => parts
                .iter()
                .try_fold(S::zero(), |acc, p| Ok::<_, Error>(acc + p.value(i)?))?,
            BoundedSeq::Step(s) => s.value(i),
        })
    }

    /// `Σ_{lo < i ≤ hi} x_i`.
    pub fn window_sum(&self, lo: u64, hi: u64, cap: u64) -> Result<S> {
        if lo >= hi {
            return Ok(S::zero());
        }
        Ok(match self {
            BoundedSeq::Indicator(a) => S::from_u64(a.count_between(lo, hi, cap)?),
            BoundedSeq::Constant(c) => c.clone() * S::from_u64(hi - lo),
            BoundedSeq::Periodic(v) => periodic_prefix(v, hi) - periodic_prefix(v, lo),
            BoundedSeq::Affine {
                scale,
                shift,
                inner,
            } => scale.clone() * inner.window_sum(lo, hi, cap)? + shift.clone() * S::from_u64(hi - lo),
            BoundedSeq::SeededRandom01(u) => u.prefix(hi, cap)? - u.prefix(lo, cap)?,
            BoundedSeq::PrefixTail { prefix, tail } => {
                let len = prefix.len() as u64;
                let head = if lo < len {
                    prefix[lo as usize..hi.min(len) as usize]
                        .iter()
                        .fold(S::zero(), |acc, v| acc + v.clone())
                } else {
                    S::zero()
                };
                let beyond = hi - hi.min(len).max(lo);
                head + tail.clone() * S::from_u64(beyond)
            }
            BoundedSeq::Rounded(inner) => {
                inner.window_sum(0, hi, cap)?.floor() - inner.window_sum(0, lo, cap)?.floor()
            }
            BoundedSeq::Sum(parts) => parts.iter().try_fold(S::zero(), |acc, p| {
                Ok::<_, Error>(acc + p.window_sum(lo, hi, cap)?)
            })?,
            BoundedSeq::Step(s) => s.window_sum(lo, hi, cap)?,
        })
    }

    /// `x_1 + … + x_n`.
    pub fn prefix_sum(&self, n: u64) -> Result<S> {
        self.window_sum(0, n, DEFAULT_CAP)
    }

    /// Interval `[lo, hi]` known to contain every `x_i`.
    pub fn value_range(&self) -> (S, S) {
        match self {
            BoundedSeq::Indicator(_) | BoundedSeq::SeededRandom01(_) | BoundedSeq::Rounded(_) => {
                (S::zero(), S::one())
            }
            BoundedSeq::Constant(c) => (c.clone(), c.clone()),
            BoundedSeq::Periodic(v) => extent(v.iter().cloned()),
            BoundedSeq::Affine {
                scale,
                shift,
                inner,
            } => {
                let (lo, hi) = inner.value_range();
                let a = scale.clone() * lo + shift.clone();
                let b = scale.clone() * hi + shift.clone();
                (min_of(a.clone(), b.clone()), max_of(a, b))
            }
            BoundedSeq::PrefixTail { prefix, tail } => {
                extent(prefix.iter().cloned().chain(std::iter::once(tail.clone())))
            }
            BoundedSeq::Sum(parts) => parts.iter().fold((S::zero(), S::zero()), |(lo, hi), p| {
                let (a, b) = p.value_range();
                (lo + a, hi + b)
            }),
            BoundedSeq::Step(s) => s.value_range(),
        }
    }

    /// `‖x‖_∞` bound.
    pub fn sup_bound(&self) -> S {
        let (lo, hi) = self.value_range();
        max_of(lo.abs(), hi.abs())
    }

    /// Structural horizons in `[lo, hi]` where window values can jump.
    pub fn breakpoints(&self, lo: u64, hi: u64) -> Vec<u64> {
        let mut out = match self {
            BoundedSeq::Indicator(a) => a.breakpoints(lo, hi),
            BoundedSeq::Affine { inner, .. } | BoundedSeq::Rounded(inner) => {
                inner.breakpoints(lo, hi)
            }
            BoundedSeq::Sum(parts) => parts.iter().flat_map(|p| p.breakpoints(lo, hi)).collect(),
            BoundedSeq::Step(s) => s
                .levels
                .iter()
                .flat_map(|(_, a)| a.breakpoints(lo, hi))
                .collect(),
            _ => Vec::new(),
        };
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Largest horizon this sequence can be evaluated at when enumeration is
    /// capped at `cap`; `None` when window sums are closed-form.
    pub fn horizon_limit(&self, cap: u64) -> Option<u64> {
        match self {
            BoundedSeq::SeededRandom01(_) => Some(cap),
            BoundedSeq::Affine { inner, .. } | BoundedSeq::Rounded(inner) => {
                inner.horizon_limit(cap)
            }
            BoundedSeq::Sum(parts) => parts.iter().filter_map(|p| p.horizon_limit(cap)).min(),
            _ => None,
        }
    }
}

fn periodic_prefix<S: Scalar>(values: &[S], n: u64) -> S {
    let len = values.len() as u64;
    let total = values.iter().fold(S::zero(), |acc, v| acc + v.clone());
    let partial = values[..(n % len) as usize]
        .iter()
        .fold(S::zero(), |acc, v| acc + v.clone());
    total * S::from_u64(n / len) + partial
}

fn extent<S: Scalar>(mut values: impl Iterator<Item = S>) -> (S, S) {
    let first = values.next().unwrap_or_else(S::zero);
    values.fold((first.clone(), first), |(lo, hi), v| {
        (min_of(lo, v.clone()), max_of(hi, v))
    })
}

/// `(x_1 + … + x_n)/n`.
pub fn cesaro_estimate<S: Scalar>(x: &BoundedSeq<S>, n: u64) -> Result<S> {
    if n == 0 {
        return Err(Error::InvalidParameter("Cesàro averages need n ≥ 1".into()));
    }
    Ok(x.prefix_sum(n)? / S::from_u64(n))
}

/// 0/1 sequence whose partial sums are `⌊s_n⌋`, so they stay within 1 of the
/// partial sums of `x`. Inputs must take values in `[0, 1]`.
pub fn rounding_transform<S: Scalar>(x: &BoundedSeq<S>) -> Result<BoundedSeq<S>> {
    let (lo, hi) = x.value_range();
    if lo < S::zero() || hi > S::one() {
        return Err(Error::Domain(format!(
            "rounding needs values in [0, 1], sequence {x} ranges over [{lo}, {hi}]"
        )));
    }
    Ok(BoundedSeq::Rounded(Box::new(x.clone())))
}

fn level_index<S: Scalar>(v: &S, eps: &S) -> i64 {
    let half = S::from_ratio(1, 2);
    (v.clone() / eps.clone() + half).floor().to_f64() as i64
}

/// Step sequence within `eps/2 ≤ eps` of `x` at every index, built from the
/// level sets of `x` quantized to multiples of `eps`.
pub fn step_approximate<S: Scalar>(x: &BoundedSeq<S>, eps: &S) -> Result<StepSeq<S>> {
    if *eps <= S::zero() {
        return Err(Error::InvalidParameter(format!(
            "step width must be positive, got {eps}"
        )));
    }
    let level_value = |j: i64| S::from_ratio(j, 1) * eps.clone();
    match x {
        BoundedSeq::Indicator(a) => return Ok(StepSeq::new(vec![(S::one(), a.clone())])),
        BoundedSeq::Constant(c) => {
            return Ok(StepSeq {
                levels: vec![(level_value(level_index(c, eps)), NatSet::naturals())],
                partition: true,
            })
        }
        BoundedSeq::Periodic(values) => {
            let len = values.len() as u64;
            let mut indices: Vec<i64> = values.iter().map(|v| level_index(v, eps)).collect();
            indices.sort_unstable();
            indices.dedup();
            let mut levels = Vec::with_capacity(indices.len());
            for j in indices {
                let residues = values
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| level_index(*v, eps) == j)
                    .map(|(p, _)| (p as u64 + 1) % len)
                    .collect();
                levels.push((level_value(j), NatSet::periodic(len, residues)?));
            }
            return Ok(StepSeq {
                levels,
                partition: true,
            });
        }
        _ => {}
    }
    let (lo, hi) = x.value_range();
    let (j_lo, j_hi) = (level_index(&lo, eps), level_index(&hi, eps));
    let levels = (j_lo..=j_hi)
        .map(|j| {
            let source = x.clone();
            let width = eps.clone();
            let set = NatSet::predicate(format!("level {j} of {x} at width {eps}"), move |i| {
                source
                    .value(i)
                    .map(|v| level_index(&v, &width) == j)
                    .unwrap_or(false)
            });
            (level_value(j), set)
        })
        .collect();
    Ok(StepSeq {
        levels,
        partition: true,
    })
}

fn write_values<S: Scalar>(f: &mut fmt::Formatter<'_>, values: &[S]) -> fmt::Result {
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "{v}")?;
    }
    Ok(())
}

impl<S: Scalar> fmt::Display for BoundedSeq<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundedSeq::Indicator(a) => write!(f, "ind({a})"),
            BoundedSeq::Constant(c) => write!(f, "const({c})"),
            BoundedSeq::Periodic(v) => {
                f.write_str("periodic(")?;
                write_values(f, v)?;
                f.write_str(")")
            }
            BoundedSeq::Affine {
                scale,
                shift,
                inner,
            } => write!(f, "affine({scale},{shift},{inner})"),
            BoundedSeq::SeededRandom01(u) => write!(f, "rand01({})", u.seed),
            BoundedSeq::PrefixTail { prefix, tail } => {
                f.write_str("prefix(")?;
                write_values(f, prefix)?;
                write!(f, ";{tail})")
            }
            BoundedSeq::Rounded(inner) => write!(f, "round({inner})"),
            BoundedSeq::Sum(parts) => match parts.as_slice() {
                [only] => write!(f, "{only}"),
                _ => {
                    let (head, rest) = parts.split_first().expect("non-empty sum");
                    write!(f, "sum({head},{})", BoundedSeq::Sum(rest.to_vec()))
                }
            },
            BoundedSeq::Step(s) => write!(f, "<step sequence with {} levels>", s.levels.len()),
        }
    }
}
