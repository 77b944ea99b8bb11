//! Seeded property suites, shared by the `verify` command and the tests.

use rand::seq::index::sample;
use rand::Rng;
use num_traits::Signed;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::EstimatorConfig;
use crate::densities::{alpha_density, d_infinity, lower_density, upper_density, Side};
use crate::error::{Error, Result};
use crate::expr::{parse_seq_expr, parse_set_expr};
use crate::extremal::{eval_surrogate_capped, lower_extreme, upper_extreme, Atom, Surrogate};
use crate::natset::NatSet;
use crate::polya::{continuity_modulus_check, theta_at, window_sum};
use crate::scalar::{theta_of, Rational};
use crate::seq::{cesaro_estimate, rounding_transform, step_approximate, BoundedSeq};

/// Expressions for the sets used throughout the cross-route checks.
pub fn standard_family_exprs() -> Vec<String> {
    let first_hundred: Vec<String> = (1..=100).map(|k| k.to_string()).collect();
    vec![
        "mod(3;0)".into(),
        "mod(5;1,3)".into(),
        "blocks(geom;1,2,2)".into(),
        "blocks(geom;3,1.5,3)".into(),
        "blocks(list;[10,20),[100,300))".into(),
        format!("explicit({})", first_hundred.join(",")),
        "union(mod(4;0),explicit(1,5,9))".into(),
        "union(mod(2;0),inter(blocks(geom;1,2,2),mod(2;1)))".into(),
        "compl(union(mod(4;0),mod(4;1)))".into(),
    ]
}

pub fn standard_family() -> Vec<NatSet> {
    standard_family_exprs()
        .iter()
        .map(|t| parse_set_expr(t).expect("family expressions parse"))
        .collect()
}

/// Periodic set with modulus in `1..=max_modulus` and a non-empty residue set.
pub fn random_periodic<R: Rng>(rng: &mut R, max_modulus: u64) -> NatSet {
    let m = rng.gen_range(1..=max_modulus);
    let k = rng.gen_range(1..=m as usize);
    let residues = sample(rng, m as usize, k).into_iter().map(|r| r as u64).collect();
    NatSet::periodic(m, residues).expect("valid residues")
}

fn random_simple<R: Rng>(rng: &mut R) -> NatSet {
    match rng.gen_range(0..4) {
        0 => random_periodic(rng, 12),
        1 => {
            let k = rng.gen_range(1..=4);
            let mut ends: Vec<u64> = sample(rng, 3000, 2 * k)
                .into_iter()
                .map(|v| v as u64 + 1)
                .collect();
            ends.sort_unstable();
            NatSet::block_list(ends.chunks(2).map(|c| (c[0], c[1])).collect())
                .expect("sorted distinct endpoints")
        }
        2 => {
            let ratios = [1.5, 2.0, 3.0];
            NatSet::geom_blocks(
                rng.gen_range(1..=5),
                ratios[rng.gen_range(0..3)],
                ratios[rng.gen_range(0..3)],
            )
            .expect("valid ratios")
        }
        _ => {
            let k = rng.gen_range(1..=30);
            let mut elements: Vec<u64> = sample(rng, 5000, k)
                .into_iter()
                .map(|v| v as u64 + 1)
                .collect();
            elements.sort_unstable();
            NatSet::explicit(elements).expect("sorted distinct elements")
        }
    }
}

/// Random structured set: a simple set, or a complement, intersection or
/// certified disjoint union of simple sets.
pub fn random_set<R: Rng>(rng: &mut R) -> NatSet {
    match rng.gen_range(0..6) {
        0 => random_simple(rng).complement(),
        1 => NatSet::intersection(vec![random_simple(rng), random_simple(rng)])
            .expect("non-empty"),
        2 => {
            let a = random_simple(rng);
            let rest = NatSet::intersection(vec![a.clone().complement(), random_simple(rng)])
                .expect("non-empty");
            NatSet::disjoint_union(vec![a, rest]).expect("disjoint by construction")
        }
        _ => random_simple(rng),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type Check = fn(&mut ChaCha8Rng) -> std::result::Result<(), String>;

fn q(n: i128, d: i128) -> Rational {
    Rational::new(n, d)
}

fn err(e: Error) -> String {
    e.to_string()
}

fn check_counts(rng: &mut ChaCha8Rng) -> std::result::Result<(), String> {
    for _ in 0..30 {
        let a = random_set(rng);
        let mut running = 0u64;
        for n in 1..=3000u64 {
            running += u64::from(a.member(n));
            let c = a.count(n).map_err(err)?;
            if c != running {
                return Err(format!("{a}: count({n}) = {c}, enumeration gives {running}"));
            }
        }
    }
    Ok(())
}

fn check_complement(rng: &mut ChaCha8Rng) -> std::result::Result<(), String> {
    for _ in 0..30 {
        let a = random_set(rng);
        let c = a.clone().complement();
        for _ in 0..50 {
            let n = rng.gen_range(0..=1_000_000u64);
            let total = a.count(n).map_err(err)? + c.count(n).map_err(err)?;
            if total != n {
                return Err(format!("{a}: A(n) + A^c(n) = {total} at n = {n}"));
            }
        }
    }
    Ok(())
}

fn check_alpha_zero(rng: &mut ChaCha8Rng) -> std::result::Result<(), String> {
    for _ in 0..30 {
        let a = random_set(rng);
        let n = rng.gen_range(1..=200_000u64);
        let r = a.power_sum_ratio(n, 0.0f64).map_err(err)?.value;
        let direct = a.count(n).map_err(err)? as f64 / n as f64;
        if r != direct {
            return Err(format!("{a}: ratio {r} vs count ratio {direct} at n = {n}"));
        }
    }
    Ok(())
}

fn check_rounding(rng: &mut ChaCha8Rng) -> std::result::Result<(), String> {
    for _ in 0..5 {
        let x = BoundedSeq::<Rational>::seeded_random01(rng.gen());
        let r = rounding_transform(&x).map_err(err)?;
        let (mut s, mut t) = (Rational::from_integer(0), Rational::from_integer(0));
        for i in 1..=10_000u64 {
            s += x.value(i).map_err(err)?;
            let v = r.value(i).map_err(err)?;
            if v != Rational::from_integer(0) && v != Rational::from_integer(1) {
                return Err(format!("{x}: rounded value {v} at {i}"));
            }
            t += v;
            if (t - s).abs() >= Rational::from_integer(1) {
                return Err(format!("{x}: partial sums differ by {} at {i}", t - s));
            }
        }
        for k in 1..=10 {
            let th = theta_of::<Rational>(k);
            for _ in 0..20 {
                let n = rng.gen_range(1..=10_000u64);
                let d = theta_at(&x, &th, n, 1 << 20).map_err(err)?
                    - theta_at(&r, &th, n, 1 << 20).map_err(err)?;
                let bound = q(2, 1) / (Rational::from_integer(n as i128) * (q(1, 1) - th));
                if d.abs() > bound {
                    return Err(format!("{x}: window gap {d} above {bound} at k={k}, n={n}"));
                }
            }
        }
    }
    Ok(())
}

fn check_steps(rng: &mut ChaCha8Rng) -> std::result::Result<(), String> {
    let x = BoundedSeq::affine(q(3, 1), q(-1, 1), BoundedSeq::seeded_random01(rng.gen()));
    for eps in [q(1, 10), q(1, 20), q(1, 100)] {
        let s = step_approximate(&x, &eps).map_err(err)?;
        for i in 1..=2000 {
            let d = (x.value(i).map_err(err)? - s.value(i)).abs();
            if d > eps {
                return Err(format!("{x}: step error {d} above {eps} at {i}"));
            }
        }
    }
    Ok(())
}

fn check_affine(rng: &mut ChaCha8Rng) -> std::result::Result<(), String> {
    for _ in 0..10 {
        let x = BoundedSeq::<Rational>::seeded_random01(rng.gen());
        let c = q(rng.gen_range(-20..=20), rng.gen_range(1..=9));
        let d = q(rng.gen_range(-20..=20), rng.gen_range(1..=9));
        let y = BoundedSeq::affine(c, d, x.clone());
        let one = BoundedSeq::constant(q(1, 1));
        let n = rng.gen_range(1..=5000u64);
        let lhs = cesaro_estimate(&y, n).map_err(err)?;
        if lhs != c * cesaro_estimate(&x, n).map_err(err)? + d {
            return Err(format!("Cesàro mean of {y} not affine at n = {n}"));
        }
        let th = theta_of::<Rational>(rng.gen_range(1..=10));
        let ty = theta_at(&y, &th, n, 1 << 20).map_err(err)?;
        let tx = theta_at(&x, &th, n, 1 << 20).map_err(err)?;
        let t1 = theta_at(&one, &th, n, 1 << 20).map_err(err)?;
        if ty != c * tx + d * t1 {
            return Err(format!("window average of {y} not affine at n = {n}"));
        }
    }
    Ok(())
}

fn check_duality(rng: &mut ChaCha8Rng) -> std::result::Result<(), String> {
    let one = BoundedSeq::constant(q(1, 1));
    for _ in 0..20 {
        let a = random_set(rng);
        let x = BoundedSeq::<Rational>::indicator(a.clone());
        let y = BoundedSeq::<Rational>::indicator(a.clone().complement());
        let th = theta_of::<Rational>(rng.gen_range(1..=10));
        let n = rng.gen_range(1..=100_000u64);
        let s = theta_at(&x, &th, n, 1 << 20).map_err(err)? + theta_at(&y, &th, n, 1 << 20).map_err(err)?;
        if s != theta_at(&one, &th, n, 1 << 20).map_err(err)? {
            return Err(format!("{a}: window duality fails at n = {n}"));
        }
    }
    Ok(())
}

fn check_splitting(rng: &mut ChaCha8Rng) -> std::result::Result<(), String> {
    let x = BoundedSeq::<Rational>::seeded_random01(rng.gen());
    for _ in 0..50 {
        let th = q(rng.gen_range(1..100), 100);
        let th2 = q(rng.gen_range(1..100), 100);
        let r = q(rng.gen_range(100..200_000), rng.gen_range(1..=7));
        if th2 * r < q(1, 1) {
            continue;
        }
        let lhs = window_sum(&x, &(th * th2), &r, 1 << 20).map_err(err)?.0;
        let rhs = window_sum(&x, &th, &(th2 * r), 1 << 20).map_err(err)?.0
            + window_sum(&x, &th2, &r, 1 << 20).map_err(err)?.0;
        if lhs != rhs {
            return Err(format!("window splitting fails at θ={th}, θ'={th2}, r={r}"));
        }
        let r2 = r + q(rng.gen_range(0..100), 101);
        let d = window_sum(&x, &th, &r, 1 << 20).map_err(err)?.0
            - window_sum(&x, &th, &r2, 1 << 20).map_err(err)?.0;
        if d.abs() > q(2, 1) {
            return Err(format!("nearby windows at r={r}, r'={r2} differ by {d}"));
        }
    }
    Ok(())
}

/// Random `(x, θ, δ, r)` sample for the continuity check.
pub fn continuity_sample<R: Rng>(rng: &mut R) -> (BoundedSeq<f64>, f64, f64, f64) {
    let x = match rng.gen_range(0..4) {
        0 => BoundedSeq::seeded_random01(rng.gen()),
        1 => BoundedSeq::affine(rng.gen_range(-3.0..3.0), rng.gen_range(-1.0..1.0), BoundedSeq::seeded_random01(rng.gen())),
        2 => BoundedSeq::constant(rng.gen_range(-2.0..2.0)),
        _ => BoundedSeq::indicator(random_set(rng)),
    };
    let theta = rng.gen_range(0.01..0.99);
    let delta: f64 = rng.gen_range(0.0..1.0 - theta);
    let delta = delta.max(1e-6);
    let r = rng.gen_range(1.0..200_000.0);
    (x, theta, delta, r)
}

fn check_continuity(rng: &mut ChaCha8Rng) -> std::result::Result<(), String> {
    for _ in 0..100 {
        let (x, th, d, r) = continuity_sample(rng);
        let c = continuity_modulus_check(&x, &th, &d, &r).map_err(err)?;
        if !c.ok {
            return Err(format!("{x}: θ={th}, δ={d}, r={r}: {} > {}", c.lhs, c.bound));
        }
    }
    Ok(())
}

/// Random surrogate with up to four atoms and dyadic weights summing to one.
pub fn random_surrogate<R: Rng>(rng: &mut R, max_n: u64) -> Surrogate {
    let k = rng.gen_range(1..=4usize);
    let mut cuts: Vec<u32> = (0..k - 1).map(|_| rng.gen_range(0..=1024)).collect();
    cuts.push(0);
    cuts.push(1024);
    cuts.sort_unstable();
    let atoms = cuts
        .windows(2)
        .map(|w| Atom {
            theta_k: rng.gen_range(1..=10),
            n: rng.gen_range(1..=max_n),
            w: f64::from(w[1] - w[0]) / 1024.0,
        })
        .collect();
    Surrogate::new(atoms).expect("weights sum to one")
}

fn check_linearity(rng: &mut ChaCha8Rng) -> std::result::Result<(), String> {
    for _ in 0..20 {
        let f = random_surrogate(rng, 50_000);
        let x = BoundedSeq::<Rational>::seeded_random01(rng.gen());
        let y = BoundedSeq::indicator(random_set(rng));
        let c = q(rng.gen_range(0..=30), rng.gen_range(1..=7));
        let combo = BoundedSeq::sum(vec![x.clone(), BoundedSeq::affine(c, q(0, 1), y.clone())])
            .map_err(err)?;
        let lhs = eval_surrogate_capped(&f, &combo, 1 << 20).map_err(err)?;
        let fx = eval_surrogate_capped(&f, &x, 1 << 20).map_err(err)?;
        let fy = eval_surrogate_capped(&f, &y, 1 << 20).map_err(err)?;
        if lhs != fx + c * fy {
            return Err(format!("surrogate not linear on {x} + {c}·{y}"));
        }
        if fx < q(0, 1) || fy < q(0, 1) {
            return Err("surrogate negative on a non-negative sequence".into());
        }
    }
    Ok(())
}

fn check_round_trip(rng: &mut ChaCha8Rng) -> std::result::Result<(), String> {
    for _ in 0..50 {
        let a = random_set(rng);
        let text = a.to_string();
        let back = parse_set_expr(&text).map_err(err)?;
        if back != a {
            return Err(format!("{text} re-parses to {back}"));
        }
        let x = BoundedSeq::<f64>::affine(rng.gen_range(-4..=4) as f64 / 4.0, 0.5, BoundedSeq::indicator(a));
        let back = parse_seq_expr::<f64>(&x.to_string()).map_err(err)?;
        if back != x {
            return Err(format!("{x} re-parses to {back}"));
        }
    }
    Ok(())
}

fn heavy_config() -> EstimatorConfig {
    EstimatorConfig::default().with_max_horizon(1_000_000)
}

fn check_density_duality(_: &mut ChaCha8Rng) -> std::result::Result<(), String> {
    let cfg = heavy_config();
    let slack = 2.0 / cfg.tail_horizons()[0] as f64;
    for a in standard_family() {
        let up = upper_density(&a, &cfg).map_err(err)?.extrapolated;
        let lo = lower_density(&a.clone().complement(), &cfg).map_err(err)?.extrapolated;
        if (up + lo - 1.0).abs() > slack {
            return Err(format!("{a}: upper {up} + lower of complement {lo} ≠ 1"));
        }
    }
    Ok(())
}

fn check_collapse(rng: &mut ChaCha8Rng) -> std::result::Result<(), String> {
    let cfg = heavy_config();
    for _ in 0..3 {
        let a = random_periodic(rng, 12);
        let d = a.exact_density().expect("periodic");
        let mut values = vec![
            upper_density(&a, &cfg).map_err(err)?.extrapolated,
            lower_density(&a, &cfg).map_err(err)?.extrapolated,
        ];
        for alpha in [1.0, 4.0] {
            values.push(alpha_density(&a, alpha, &cfg, Side::Upper).map_err(err)?.extrapolated);
            values.push(alpha_density(&a, alpha, &cfg, Side::Lower).map_err(err)?.extrapolated);
        }
        if let Some(v) = values.iter().find(|v| (*v - d).abs() > 1e-2) {
            return Err(format!("{a}: estimate {v} away from density {d}"));
        }
    }
    Ok(())
}

fn check_alpha_monotone(_: &mut ChaCha8Rng) -> std::result::Result<(), String> {
    let cfg = EstimatorConfig::default();
    for a in standard_family().into_iter().filter(|a| a.exact_density().is_some()) {
        for side in [Side::Upper, Side::Lower] {
            let r = d_infinity(&a, &cfg, side).map_err(err)?;
            if !r.diagnostics.monotone {
                return Err(format!("{a}: {} α-sweep not monotone", side.name()));
            }
        }
    }
    Ok(())
}

fn check_sandwich(_: &mut ChaCha8Rng) -> std::result::Result<(), String> {
    let cfg = EstimatorConfig::default();
    for a in standard_family() {
        let lx = lower_extreme(&a, &cfg).map_err(err)?.extrapolated;
        let ld = lower_density(&a, &cfg).map_err(err)?.extrapolated;
        let ud = upper_density(&a, &cfg).map_err(err)?.extrapolated;
        let ux = upper_extreme(&a, &cfg).map_err(err)?.extrapolated;
        if !(lx <= ld + 2e-2 && ld <= ud && ud <= ux + 2e-2) {
            return Err(format!("{a}: chain {lx} ≤ {ld} ≤ {ud} ≤ {ux} broken"));
        }
    }
    Ok(())
}

const CORE: &[(&str, Check)] = &[
    ("count_matches_enumeration", check_counts),
    ("complement_counts_sum_to_n", check_complement),
    ("alpha_zero_ratio_is_count_ratio", check_alpha_zero),
    ("rounding_transform_bounds", check_rounding),
    ("step_approximation_uniform_error", check_steps),
    ("affine_equivariance", check_affine),
    ("window_duality", check_duality),
    ("window_splitting", check_splitting),
    ("continuity_modulus", check_continuity),
    ("surrogate_linear_and_positive", check_linearity),
    ("expression_round_trip", check_round_trip),
];

const ESTIMATORS: &[(&str, Check)] = &[
    ("density_duality", check_density_duality),
    ("exact_density_collapse", check_collapse),
    ("alpha_monotone_on_density_sets", check_alpha_monotone),
    ("extremal_sandwich", check_sandwich),
];

/// Runs `core` (fast structural properties) or `all` (adds the estimator
/// checks). Each check draws from its own stream derived from `seed`.
pub fn run_suite(suite: &str, seed: u64) -> Result<Vec<CheckResult>> {
    let checks: Vec<&(&str, Check)> = match suite {
        "core" => CORE.iter().collect(),
        "all" => CORE.iter().chain(ESTIMATORS).collect(),
        other => {
            return Err(Error::InvalidParameter(format!(
                "unknown suite `{other}`, expected `core` or `all`"
            )))
        }
    };
    Ok(checks
        .into_iter()
        .enumerate()
        .map(|(i, (name, check))| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let outcome = check(&mut rng);
            CheckResult {
                name,
                passed: outcome.is_ok(),
                detail: outcome.err().unwrap_or_default(),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn core_suite_passes() {
        let results = run_suite("core", 42).unwrap();
        for r in &results {
            assert!(r.passed, "{}: {}", r.name, r.detail);
        }
        assert_eq!(results.len(), CORE.len());
        assert!(run_suite("nope", 1).is_err());
    }

    #[test]
    fn family_parses() {
        assert_eq!(standard_family().len(), 9);
    }
}
