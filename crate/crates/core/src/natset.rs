//! Structured subsets of ℕ = {1, 2, 3, …}.
//!
//! Counting `A(n) = |A ∩ [1, n]|` and the normalized power sums
//! `Σ_{k∈A, k≤n} (k/n)^α` are computed from the structure of the set. Every
//! set that is built from residue classes and intervals is reduced to a
//! [`Form`] (a residue mask, an interval list, or a list of arithmetic
//! progressions) restricted to the horizon, so horizons like `2^30` cost a
//! handful of operations. Only intersections that do not reduce to a form and
//! opaque predicate sets are enumerated, and enumeration is capped.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::powersum::{
    approx_ratio, naturals_power_sum, normalized_term, progression_power_sum, Accumulator,
    Approx, Progression, Real, SumMode,
};

/// Default limit on the number of integers a fallback may scan.
pub const DEFAULT_CAP: u64 = 10_000_000;

/// Prefix `[1, DISJOINT_CHECK_PREFIX]` on which union parts are checked for disjointness.
pub const DISJOINT_CHECK_PREFIX: u64 = 10_000;

/// Largest modulus a combined residue mask may have.
const MASK_LIMIT: u64 = 1 << 20;

/// Largest number of progressions an intersection form may expand into.
const PROGRESSION_LIMIT: usize = 1 << 20;

/// Numbers `k ≥ 1` with `k mod modulus ∈ residues`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Periodic {
    modulus: u64,
    residues: Vec<u64>,
}

impl Periodic {
    pub fn new(modulus: u64, mut residues: Vec<u64>) -> Result<Self> {
        if modulus == 0 {
            return Err(Error::InvalidSet("modulus must be at least 1".into()));
        }
        if let Some(&r) = residues.iter().find(|&&r| r >= modulus) {
            return Err(Error::InvalidSet(format!(
                "residue {r} is not below modulus {modulus}"
            )));
        }
        residues.sort_unstable();
        if residues.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidSet("residues must be distinct".into()));
        }
        Ok(Periodic { modulus, residues })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn residues(&self) -> &[u64] {
        &self.residues
    }

    pub fn contains(&self, k: u64) -> bool {
        k >= 1 && self.residues.binary_search(&(k % self.modulus)).is_ok()
    }

    fn count_residue(&self, r: u64, x: u64) -> u64 {
        if r == 0 {
            x / self.modulus
        } else if r <= x {
            (x - r) / self.modulus + 1
        } else {
            0
        }
    }

    pub fn count_upto(&self, x: u64) -> u64 {
        self.residues.iter().map(|&r| self.count_residue(r, x)).sum()
    }

    fn complement(&self) -> Periodic {
        let residues = (0..self.modulus)
            .filter(|r| self.residues.binary_search(r).is_err())
            .collect();
        Periodic {
            modulus: self.modulus,
            residues,
        }
    }

    fn progressions(&self, n: u64) -> Vec<Progression> {
        self.residues
            .iter()
            .filter_map(|&r| {
                let first = if r == 0 { self.modulus } else { r };
                (first <= n).then(|| Progression {
                    first,
                    step: self.modulus,
                    len: (n - first) / self.modulus + 1,
                })
            })
            .collect()
    }

    /// Residues of `k ≡ r (mod modulus)` restricted to `[a, b)`.
    fn progressions_within(&self, a: u64, b: u64, out: &mut Vec<Progression>) {
        let m = self.modulus;
        for &r in &self.residues {
            let first = a + (r + m - a % m) % m;
            if first < b {
                out.push(Progression {
                    first,
                    step: m,
                    len: (b - 1 - first) / m + 1,
                });
            }
        }
    }

    fn combine(&self, other: &Periodic, keep: impl Fn(bool, bool) -> bool) -> Option<Periodic> {
        let l = lcm(self.modulus, other.modulus)?;
        if l > MASK_LIMIT {
            return None;
        }
        let in_self = |r: u64| self.residues.binary_search(&(r % self.modulus)).is_ok();
        let in_other = |r: u64| other.residues.binary_search(&(r % other.modulus)).is_ok();
        let residues = (0..l).filter(|&r| keep(in_self(r), in_other(r))).collect();
        Some(Periodic {
            modulus: l,
            residues,
        })
    }
}

/// Finite union of half-open intervals `[a_j, b_j)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockList {
    intervals: Vec<(u64, u64)>,
}

impl BlockList {
    pub fn new(intervals: Vec<(u64, u64)>) -> Result<Self> {
        for &(a, b) in &intervals {
            if a < 1 || a >= b {
                return Err(Error::InvalidSet(format!(
                    "interval [{a},{b}) must satisfy 1 ≤ a < b"
                )));
            }
        }
        if let Some(w) = intervals.windows(2).find(|w| w[0].1 > w[1].0) {
            return Err(Error::InvalidSet(format!(
                "intervals [{},{}) and [{},{}) overlap or are out of order",
                w[0].0, w[0].1, w[1].0, w[1].1
            )));
        }
        Ok(BlockList { intervals })
    }

    pub fn intervals(&self) -> &[(u64, u64)] {
        &self.intervals
    }

    pub fn contains(&self, k: u64) -> bool {
        let idx = self.intervals.partition_point(|&(a, _)| a <= k);
        idx > 0 && k < self.intervals[idx - 1].1
    }
}

/// Blocks `[c_j, ⌈c_j·on⌉)` with `c_{j+1} = ⌈c_j·on·off⌉`, `c_0 = start`.
#[derive(Clone, Debug, PartialEq)]
pub struct GeomBlocks {
    start: u64,
    on_ratio: f64,
    off_ratio: f64,
}

fn ceil_mul(c: u64, ratio: f64) -> Option<u64> {
    if ratio.fract() == 0.0 && ratio < 4_294_967_296.0 {
        return c.checked_mul(ratio as u64);
    }
    let v = (c as f64 * ratio).ceil();
    (v < 9.0e18).then_some(v as u64)
}

impl GeomBlocks {
    pub fn new(start: u64, on_ratio: f64, off_ratio: f64) -> Result<Self> {
        if start < 1 {
            return Err(Error::InvalidSet("geometric blocks must start at 1 or later".into()));
        }
        if !(on_ratio.is_finite() && on_ratio > 1.0 && off_ratio.is_finite() && off_ratio > 1.0)
        {
            return Err(Error::InvalidSet(format!(
                "block ratios must be finite and greater than 1 (got {on_ratio}, {off_ratio})"
            )));
        }
        Ok(GeomBlocks {
            start,
            on_ratio,
            off_ratio,
        })
    }

    pub fn start(&self) -> u64 {
        self.start
    }

    pub fn on_ratio(&self) -> f64 {
        self.on_ratio
    }

    pub fn off_ratio(&self) -> f64 {
        self.off_ratio
    }

    /// All blocks in increasing order; ends when endpoints leave `u64`.
    pub fn blocks(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        let period = self.on_ratio * self.off_ratio;
        let mut next = Some(self.start);
        std::iter::from_fn(move || {
            let c = next?;
            let end = ceil_mul(c, self.on_ratio).map(|e| e.max(c + 1));
            next = end.and_then(|e| ceil_mul(c, period).map(|v| v.max(e)));
            match end {
                Some(e) => Some((c, e)),
                None => {
                    next = None;
                    None
                }
            }
        })
    }

    pub fn contains(&self, k: u64) -> bool {
        self.blocks()
            .take_while(|&(a, _)| a <= k)
            .any(|(_, b)| k < b)
    }
}

/// Finite strictly increasing list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Explicit {
    elements: Vec<u64>,
}

impl Explicit {
    pub fn new(elements: Vec<u64>) -> Result<Self> {
        if elements.first() == Some(&0) {
            return Err(Error::InvalidSet("elements must be positive".into()));
        }
        if elements.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSet("elements must be strictly increasing".into()));
        }
        Ok(Explicit { elements })
    }

    pub fn elements(&self) -> &[u64] {
        &self.elements
    }
}

type MembershipTest = dyn Fn(u64) -> bool + Send + Sync;

/// Opaque set given by a membership test; counted by enumeration only.
#[derive(Clone)]
pub struct PredicateSet {
    label: String,
    test: Arc<MembershipTest>,
}

impl PredicateSet {
    pub fn label(&self) -> &str {
        &self.label
    }
}

impl fmt::Debug for PredicateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PredicateSet")
            .field("label", &self.label)
            .finish_non_exhaustive()
    }
}

impl PartialEq for PredicateSet {
    fn eq(&self, other: &Self) -> bool {
        self.label == other.label && Arc::ptr_eq(&self.test, &other.test)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum NatSet {
    Periodic(Periodic),
    BlockList(BlockList),
    GeomBlocks(GeomBlocks),
    Explicit(Explicit),
    Complement(Box<NatSet>),
    /// Parts are pairwise disjoint, checked on a prefix at construction.
    DisjointUnion(Vec<NatSet>),
    Intersection(Vec<NatSet>),
    Predicate(PredicateSet),
}

/// Closed-form description of `A ∩ [1, n]`.
#[derive(Clone, Debug)]
enum Form {
    Periodic(Periodic),
    /// Sorted disjoint `[a, b)` with `b ≤ n + 1`.
    Intervals(Vec<(u64, u64)>),
    Progressions(Vec<Progression>),
}

impl Form {
    fn count_upto(&self, x: u64) -> u64 {
        match self {
            Form::Periodic(p) => p.count_upto(x),
            Form::Intervals(iv) => iv
                .iter()
                .take_while(|&&(a, _)| a <= x)
                .map(|&(a, b)| b.min(x + 1) - a)
                .sum(),
            Form::Progressions(ps) => ps.iter().map(|p| p.count_upto(x)).sum(),
        }
    }

    fn progressions(&self, n: u64) -> Vec<Progression> {
        match self {
            Form::Periodic(p) => p.progressions(n),
            Form::Intervals(iv) => iv
                .iter()
                .map(|&(a, b)| Progression {
                    first: a,
                    step: 1,
                    len: b - a,
                })
                .collect(),
            Form::Progressions(ps) => ps.clone(),
        }
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn lcm(a: u64, b: u64) -> Option<u64> {
    (a / gcd(a, b)).checked_mul(b)
}

fn clip(iv: impl Iterator<Item = (u64, u64)>, n: u64) -> Vec<(u64, u64)> {
    iv.take_while(|&(a, _)| a <= n)
        .map(|(a, b)| (a, b.min(n + 1)))
        .collect()
}

fn gaps(iv: &[(u64, u64)], n: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::with_capacity(iv.len() + 1);
    let mut cursor = 1;
    for &(a, b) in iv {
        if a > cursor {
            out.push((cursor, a));
        }
        cursor = cursor.max(b);
    }
    if cursor <= n {
        out.push((cursor, n + 1));
    }
    out
}

fn merge_intervals(mut iv: Vec<(u64, u64)>) -> Vec<(u64, u64)> {
    iv.sort_unstable();
    let mut out: Vec<(u64, u64)> = Vec::with_capacity(iv.len());
    for (a, b) in iv {
        match out.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => out.push((a, b)),
        }
    }
    out
}

fn intersect_intervals(x: &[(u64, u64)], y: &[(u64, u64)]) -> Vec<(u64, u64)> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < x.len() && j < y.len() {
        let a = x[i].0.max(y[j].0);
        let b = x[i].1.min(y[j].1);
        if a < b {
            out.push((a, b));
        }
        if x[i].1 < y[j].1 {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}

fn union_forms(forms: Vec<Form>, n: u64) -> Option<Form> {
    if forms.iter().all(|f| matches!(f, Form::Periodic(_))) {
        let mut acc: Option<Periodic> = None;
        let mut fits = true;
        for f in &forms {
            if let Form::Periodic(p) = f {
                acc = match acc.take() {
                    None => Some(p.clone()),
                    Some(q) => {
                        let c = q.combine(p, |a, b| a || b);
                        if c.is_none() {
                            fits = false;
                            break;
                        }
                        c
                    }
                };
            }
        }
        if fits {
            return Some(Form::Periodic(acc.unwrap_or_else(|| Periodic {
                modulus: 1,
                residues: Vec::new(),
            })));
        }
    }
    if forms.iter().all(|f| matches!(f, Form::Intervals(_))) {
        let all = forms
            .into_iter()
            .flat_map(|f| match f {
                Form::Intervals(iv) => iv,
                _ => unreachable!(),
            })
            .collect();
        return Some(Form::Intervals(merge_intervals(all)));
    }
    Some(Form::Progressions(
        forms.iter().flat_map(|f| f.progressions(n)).collect(),
    ))
}

fn intersect_forms(x: Form, y: Form) -> Option<Form> {
    match (x, y) {
        (Form::Periodic(p), Form::Periodic(q)) => p.combine(&q, |a, b| a && b).map(Form::Periodic),
        (Form::Intervals(a), Form::Intervals(b)) => {
            Some(Form::Intervals(intersect_intervals(&a, &b)))
        }
        (Form::Periodic(p), Form::Intervals(iv)) | (Form::Intervals(iv), Form::Periodic(p)) => {
            if iv.len().saturating_mul(p.residues.len()) > PROGRESSION_LIMIT {
                return None;
            }
            let mut out = Vec::new();
            for &(a, b) in &iv {
                p.progressions_within(a, b, &mut out);
            }
            Some(Form::Progressions(out))
        }
        _ => None,
    }
}

fn push_block_breakpoints(out: &mut Vec<u64>, a: u64, b: u64, lo: u64, hi: u64) {
    for v in [a.saturating_sub(1), a, b - 1, b] {
        if v >= lo && v <= hi && v >= 1 {
            out.push(v);
        }
    }
}

impl NatSet {
    pub fn periodic(modulus: u64, residues: Vec<u64>) -> Result<NatSet> {
        Periodic::new(modulus, residues).map(NatSet::Periodic)
    }

    pub fn block_list(intervals: Vec<(u64, u64)>) -> Result<NatSet> {
        BlockList::new(intervals).map(NatSet::BlockList)
    }

    pub fn geom_blocks(start: u64, on_ratio: f64, off_ratio: f64) -> Result<NatSet> {
        GeomBlocks::new(start, on_ratio, off_ratio).map(NatSet::GeomBlocks)
    }

    pub fn explicit(elements: Vec<u64>) -> Result<NatSet> {
        Explicit::new(elements).map(NatSet::Explicit)
    }

    /// ℕ itself, as the single residue class modulo 1.
    pub fn naturals() -> NatSet {
        NatSet::Periodic(Periodic {
            modulus: 1,
            residues: vec![0],
        })
    }

    pub fn empty() -> NatSet {
        NatSet::Explicit(Explicit {
            elements: Vec::new(),
        })
    }

    pub fn evens() -> NatSet {
        NatSet::Periodic(Periodic {
            modulus: 2,
            residues: vec![0],
        })
    }

    pub fn complement(self) -> NatSet {
        NatSet::Complement(Box::new(self))
    }

    /// Union of parts that must be pairwise disjoint; disjointness is checked
    /// on `[1, DISJOINT_CHECK_PREFIX]`.
    pub fn disjoint_union(parts: Vec<NatSet>) -> Result<NatSet> {
        if let Some(witness) = first_common_element(&parts, DISJOINT_CHECK_PREFIX) {
            return Err(Error::DisjointnessViolation { witness });
        }
        Ok(NatSet::DisjointUnion(parts))
    }

    pub fn intersection(parts: Vec<NatSet>) -> Result<NatSet> {
        if parts.is_empty() {
            return Err(Error::InvalidSet("intersection needs at least one part".into()));
        }
        Ok(NatSet::Intersection(parts))
    }

    pub fn predicate(
        label: impl Into<String>,
        test: impl Fn(u64) -> bool + Send + Sync + 'static,
    ) -> NatSet {
        NatSet::Predicate(PredicateSet {
            label: label.into(),
            test: Arc::new(test),
        })
    }

    pub fn member(&self, k: u64) -> bool {
        if k == 0 {
            return false;
        }
        match self {
            NatSet::Periodic(p) => p.contains(k),
            NatSet::BlockList(b) => b.contains(k),
            NatSet::GeomBlocks(g) => g.contains(k),
            NatSet::Explicit(e) => e.elements.binary_search(&k).is_ok(),
            NatSet::Complement(inner) => !inner.member(k),
            NatSet::DisjointUnion(parts) => parts.iter().any(|p| p.member(k)),
            NatSet::Intersection(parts) => parts.iter().all(|p| p.member(k)),
            NatSet::Predicate(p) => (p.test)(k),
        }
    }

    fn form(&self, n: u64) -> Option<Form> {
        match self {
            NatSet::Periodic(p) => Some(Form::Periodic(p.clone())),
            NatSet::BlockList(b) => Some(Form::Intervals(clip(b.intervals.iter().copied(), n))),
            NatSet::GeomBlocks(g) => Some(Form::Intervals(clip(g.blocks(), n))),
            NatSet::Explicit(e) => Some(Form::Intervals(
                e.elements
                    .iter()
                    .take_while(|&&k| k <= n)
                    .map(|&k| (k, k + 1))
                    .collect(),
            )),
            NatSet::Complement(inner) => match inner.form(n)? {
                Form::Periodic(p) => Some(Form::Periodic(p.complement())),
                Form::Intervals(iv) => Some(Form::Intervals(gaps(&iv, n))),
                Form::Progressions(_) => None,
            },
            NatSet::DisjointUnion(parts) => {
                let forms = parts.iter().map(|p| p.form(n)).collect::<Option<Vec<_>>>()?;
                union_forms(forms, n)
            }
            NatSet::Intersection(parts) => {
                let mut iter = parts.iter();
                let mut acc = iter.next()?.form(n)?;
                for part in iter {
                    acc = intersect_forms(acc, part.form(n)?)?;
                }
                Some(acc)
            }
            NatSet::Predicate(_) => None,
        }
    }

    /// Members in `(lo, hi]` produced by scanning, at most `cap` candidates.
    fn scan_between(&self, lo: u64, hi: u64, cap: u64) -> Result<Vec<u64>> {
        let candidates: Vec<Progression> = match self {
            NatSet::Intersection(parts) => parts
                .iter()
                .find_map(|p| p.form(hi))
                .map(|f| f.progressions(hi))
                .unwrap_or_else(|| {
                    vec![Progression {
                        first: 1,
                        step: 1,
                        len: hi,
                    }]
                }),
            _ => vec![Progression {
                first: 1,
                step: 1,
                len: hi,
            }],
        };
        let requested: u64 = candidates
            .iter()
            .map(|p| p.count_upto(hi) - p.count_upto(lo))
            .sum();
        if requested > cap {
            return Err(Error::EnumerationCapExceeded { requested, cap });
        }
        let mut members: Vec<u64> = candidates
            .iter()
            .flat_map(|p| p.terms_between(lo, hi))
            .filter(|&k| self.member(k))
            .collect();
        members.sort_unstable();
        Ok(members)
    }

    /// `|A ∩ (lo, hi]|`.
    pub fn count_between(&self, lo: u64, hi: u64, cap: u64) -> Result<u64> {
        if lo >= hi {
            return Ok(0);
        }
        if let Some(f) = self.form(hi) {
            return Ok(f.count_upto(hi) - f.count_upto(lo));
        }
        match self {
            NatSet::Complement(inner) => Ok((hi - lo) - inner.count_between(lo, hi, cap)?),
            NatSet::DisjointUnion(parts) => parts
                .iter()
                .map(|p| p.count_between(lo, hi, cap))
                .sum(),
            _ => Ok(self.scan_between(lo, hi, cap)?.len() as u64),
        }
    }

    /// `A(n) = |A ∩ [1, n]|` with the default enumeration cap.
    pub fn count(&self, n: u64) -> Result<u64> {
        self.count_between(0, n, DEFAULT_CAP)
    }

    pub fn count_capped(&self, n: u64, cap: u64) -> Result<u64> {
        self.count_between(0, n, cap)
    }

    /// `Σ_{k∈A, k≤n} (k/n)^α` with an error bound.
    pub fn power_sum<F: Real>(&self, n: u64, alpha: F, mode: SumMode, cap: u64) -> Result<Approx<F>> {
        if let Some(f) = self.form(n) {
            return Ok(f
                .progressions(n)
                .iter()
                .map(|p| progression_power_sum(p, n, alpha, mode))
                .fold(Approx::exact(F::zero()), Approx::add));
        }
        match self {
            NatSet::Complement(inner) => {
                let all = naturals_power_sum(n, alpha, mode);
                Ok(all.sub(inner.power_sum(n, alpha, mode, cap)?))
            }
            NatSet::DisjointUnion(parts) => parts.iter().try_fold(
                Approx::exact(F::zero()),
                |acc, p| Ok(acc.add(p.power_sum(n, alpha, mode, cap)?)),
            ),
            _ => {
                let mut acc = Accumulator::new();
                for k in self.scan_between(0, n, cap)? {
                    acc.push(normalized_term(k, n, alpha));
                }
                Ok(Approx::exact(acc.total()))
            }
        }
    }

    /// `A_α(n) / ℕ_α(n)`, in `[0, 1]`, with the propagated error bound.
    pub fn power_sum_ratio<F: Real>(&self, n: u64, alpha: F) -> Result<Approx<F>> {
        self.power_sum_ratio_with(n, alpha, SumMode::Auto, DEFAULT_CAP)
    }

    pub fn power_sum_ratio_with<F: Real>(
        &self,
        n: u64,
        alpha: F,
        mode: SumMode,
        cap: u64,
    ) -> Result<Approx<F>> {
        if n == 0 {
            return Err(Error::InvalidParameter("power sums need n ≥ 1".into()));
        }
        if !(alpha >= F::zero()) || !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "alpha must be finite and non-negative, got {alpha:?}"
            )));
        }
        let num = self.power_sum(n, alpha, mode, cap)?;
        let den = naturals_power_sum(n, alpha, mode);
        Ok(approx_ratio(num, den))
    }

    /// `d(A)` when it follows from the structure of the set.
    pub fn exact_density(&self) -> Option<f64> {
        if self.is_finite() {
            return Some(0.0);
        }
        match self {
            NatSet::Periodic(p) => Some(p.residues.len() as f64 / p.modulus as f64),
            NatSet::Complement(inner) => inner.exact_density().map(|d| 1.0 - d),
            NatSet::DisjointUnion(parts) => parts.iter().map(NatSet::exact_density).sum(),
            NatSet::Intersection(_) => {
                let p = self.period()?;
                Some(self.count(p).ok()? as f64 / p as f64)
            }
            _ => None,
        }
    }

    /// Whether the structure certifies the set is finite.
    pub fn is_finite(&self) -> bool {
        match self {
            NatSet::BlockList(_) | NatSet::Explicit(_) => true,
            NatSet::Periodic(p) => p.residues.is_empty(),
            NatSet::DisjointUnion(parts) => parts.iter().all(NatSet::is_finite),
            NatSet::Intersection(parts) => parts.iter().any(NatSet::is_finite),
            _ => false,
        }
    }

    /// Period of a purely periodic set.
    pub fn period(&self) -> Option<u64> {
        match self {
            NatSet::Periodic(p) => Some(p.modulus),
            NatSet::Complement(inner) => inner.period(),
            NatSet::DisjointUnion(parts) | NatSet::Intersection(parts) => {
                parts.iter().try_fold(1u64, |acc, p| {
                    lcm(acc, p.period()?).filter(|&l| l <= MASK_LIMIT)
                })
            }
            _ => None,
        }
    }

    /// Horizons in `[lo, hi]` where `A(n)/n` can turn: just before and at
    /// block starts and block ends.
    pub fn breakpoints(&self, lo: u64, hi: u64) -> Vec<u64> {
        let mut out = Vec::new();
        self.collect_breakpoints(lo, hi, &mut out);
        out.sort_unstable();
        out.dedup();
        out
    }

    fn collect_breakpoints(&self, lo: u64, hi: u64, out: &mut Vec<u64>) {
        match self {
            NatSet::BlockList(b) => {
                for &(a, e) in &b.intervals {
                    if a <= hi.saturating_add(1) && e >= lo {
                        push_block_breakpoints(out, a, e, lo, hi);
                    }
                }
            }
            NatSet::GeomBlocks(g) => {
                for (a, e) in g.blocks().take_while(|&(a, _)| a <= hi.saturating_add(1)) {
                    if e >= lo {
                        push_block_breakpoints(out, a, e, lo, hi);
                    }
                }
            }
            NatSet::Explicit(e) => {
                for &k in &e.elements {
                    if k > hi.saturating_add(1) {
                        break;
                    }
                    push_block_breakpoints(out, k, k + 1, lo, hi);
                }
            }
            NatSet::Complement(inner) => inner.collect_breakpoints(lo, hi, out),
            NatSet::DisjointUnion(parts) | NatSet::Intersection(parts) => {
                for p in parts {
                    p.collect_breakpoints(lo, hi, out);
                }
            }
            NatSet::Periodic(_) | NatSet::Predicate(_) => {}
        }
    }
}

/// Smallest `k ≤ limit` that lies in two of the parts.
pub(crate) fn first_common_element(parts: &[NatSet], limit: u64) -> Option<u64> {
    (1..=limit).find(|&k| parts.iter().filter(|p| p.member(k)).nth(1).is_some())
}

fn write_list<T: fmt::Display>(f: &mut fmt::Formatter<'_>, items: &[T]) -> fmt::Result {
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "{item}")?;
    }
    Ok(())
}

fn write_nested(f: &mut fmt::Formatter<'_>, op: &str, parts: &[NatSet]) -> fmt::Result {
    match parts {
        [] => f.write_str("explicit()"),
        [only] => write!(f, "{only}"),
        [head, rest @ ..] => {
            write!(f, "{op}({head},")?;
            write_nested(f, op, rest)?;
            f.write_str(")")
        }
    }
}

impl fmt::Display for NatSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NatSet::Periodic(p) if p.residues.is_empty() => f.write_str("explicit()"),
            NatSet::Periodic(p) => {
                write!(f, "mod({};", p.modulus)?;
                write_list(f, &p.residues)?;
                f.write_str(")")
            }
            NatSet::BlockList(b) if b.intervals.is_empty() => f.write_str("explicit()"),
            NatSet::BlockList(b) => {
                f.write_str("blocks(list;")?;
                for (i, (a, e)) in b.intervals.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "[{a},{e})")?;
                }
                f.write_str(")")
            }
            NatSet::GeomBlocks(g) => {
                write!(f, "blocks(geom;{},{},{})", g.start, g.on_ratio, g.off_ratio)
            }
            NatSet::Explicit(e) => {
                f.write_str("explicit(")?;
                write_list(f, &e.elements)?;
                f.write_str(")")
            }
            NatSet::Complement(inner) => write!(f, "compl({inner})"),
            NatSet::DisjointUnion(parts) => write_nested(f, "union", parts),
            NatSet::Intersection(parts) => write_nested(f, "inter", parts),
            NatSet::Predicate(p) => write!(f, "<{}>", p.label),
        }
    }
}
