//! Acceptance criteria, one line per criterion.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use densitylab::densities::{alpha_density, lower_density, upper_density, Side};
use densitylab::extremal::{
    eval_surrogate, functional_from_measure, lower_extreme, surrogate_sup, upper_extreme,
    verify_additivity, Surrogate,
};
use densitylab::polya::{continuity_modulus_check, t_estimate, t_lower_estimate, theta_at};
use densitylab::powersum::SumMode;
use densitylab::verify::{continuity_sample, random_periodic, random_set, standard_family};
use densitylab::{parse_set_expr, theta_of, BoundedSeq, EstimatorConfig, ExactSeq, NatSet, Rational, Seq};
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e<T: std::fmt::Display>(err: T) -> String {
    err.to_string()
}

fn geom() -> NatSet {
    NatSet::geom_blocks(1, 2.0, 2.0).unwrap()
}

/// Direct window count by membership, `|A ∩ (⌊θn⌋, n]| / (n(1−θ))`.
fn brute_window(a: &NatSet, theta: f64, n: u64) -> f64 {
    let lo = (theta * n as f64).floor() as u64;
    let count = (lo + 1..=n).filter(|&k| a.member(k)).count();
    count as f64 / (n as f64 * (1.0 - theta))
}

fn c1_four_routes() -> Outcome {
    let a = geom();
    let cfg = EstimatorConfig::default();
    let r = upper_extreme(&a, &cfg).map_err(e)?;
    let polya = r.route("polya").unwrap();
    let alpha = r.route("alpha").unwrap();
    let gap = r.diagnostics.cross_route_gap.unwrap();

    // oracle: a window at the end of the block [4^14, 2·4^14)
    let n = 2 * 4u64.pow(14) - 1;
    let window = brute_window(&a, 1.0 - 1.0 / 1024.0, n).min(1.0);
    // oracle: direct power sums at the end of [4^9, 2·4^9)
    let m = 2 * 4u64.pow(9) - 1;
    let (mut num, mut den) = (0.0f64, 0.0f64);
    for k in 1..=m {
        let t = (k as f64 / m as f64).powf(256.0);
        den += t;
        if a.member(k) {
            num += t;
        }
    }
    let alpha_oracle = num / den;

    ensure(polya >= 0.98, || format!("Pólya route {polya} < 0.98"))?;
    ensure(alpha >= 0.97, || format!("α route {alpha} < 0.97"))?;
    ensure(gap <= 0.05, || format!("gap {gap} > 0.05"))?;
    ensure(window >= 0.98 && polya >= window - 1e-12, || {
        format!("oracle window {window} vs Pólya route {polya}")
    })?;
    ensure(alpha_oracle >= 0.97 && alpha >= alpha_oracle - 1e-9, || {
        format!("oracle ratio {alpha_oracle} vs α route {alpha}")
    })?;
    Ok(format!(
        "polya={polya:.4} alpha={alpha:.4} gap={gap:.2e} oracle window={window:.4} oracle ratio={alpha_oracle:.4}"
    ))
}

fn collapse_config() -> EstimatorConfig {
    let mut horizons: Vec<u64> = (10..20).map(|e| 1u64 << e).collect();
    horizons.push(1_000_000);
    EstimatorConfig {
        horizons,
        theta_k: 7,
        ..EstimatorConfig::default()
    }
}

fn c2_exact_density_collapse() -> Outcome {
    let cfg = collapse_config();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let a = random_periodic(&mut rng, 12);
        let m = a.period().unwrap();
        // oracle: residues found by membership over one period
        let d = (1..=m).filter(|&k| a.member(k)).count() as f64 / m as f64;
        let mut values = vec![
            ("upper", upper_density(&a, &cfg).map_err(e)?.extrapolated),
            ("lower", lower_density(&a, &cfg).map_err(e)?.extrapolated),
        ];
        for alpha in [1.0, 2.0, 4.0, 8.0] {
            values.push(("alpha upper", alpha_density(&a, alpha, &cfg, Side::Upper).map_err(e)?.extrapolated));
            values.push(("alpha lower", alpha_density(&a, alpha, &cfg, Side::Lower).map_err(e)?.extrapolated));
        }
        let ind = Seq::indicator(a.clone());
        values.push(("polya upper", t_estimate(&ind, &cfg).map_err(e)?.extrapolated));
        values.push(("polya lower", t_lower_estimate(&ind, &cfg).map_err(e)?.extrapolated));
        values.push(("upper extreme", upper_extreme(&a, &cfg).map_err(e)?.extrapolated));
        values.push(("lower extreme", lower_extreme(&a, &cfg).map_err(e)?.extrapolated));
        for (name, v) in values {
            worst = worst.max((v - d).abs());
            ensure((v - d).abs() <= 1e-2, || format!("{a}: {name} = {v}, density {d}"))?;
        }
    }
    Ok(format!("20 periodic sets, max deviation {worst:.2e}"))
}

fn c3_duality() -> Outcome {
    let cfg = EstimatorConfig::default();
    let mut worst = 0.0f64;
    for a in standard_family() {
        let up = upper_extreme(&a, &cfg).map_err(e)?.extrapolated;
        let lo = lower_extreme(&a.clone().complement(), &cfg).map_err(e)?.extrapolated;
        worst = worst.max((up + lo - 1.0).abs());
        ensure((up + lo - 1.0).abs() <= 2e-2, || format!("{a}: {up} + {lo} ≠ 1"))?;
    }
    Ok(format!("{} sets, max |sum − 1| = {worst:.2e}", standard_family().len()))
}

fn c4_sandwich() -> Outcome {
    let cfg = EstimatorConfig::default();
    for a in standard_family() {
        let lx = lower_extreme(&a, &cfg).map_err(e)?.extrapolated;
        let ld = lower_density(&a, &cfg).map_err(e)?.extrapolated;
        let ud = upper_density(&a, &cfg).map_err(e)?.extrapolated;
        let ux = upper_extreme(&a, &cfg).map_err(e)?.extrapolated;
        ensure(lx <= ld + 2e-2 && ld <= ud && ud <= ux + 2e-2, || {
            format!("{a}: {lx} ≤ {ld} ≤ {ud} ≤ {ux} fails")
        })?;
    }
    Ok(format!("{} sets", standard_family().len()))
}

fn c5_rounding() -> Outcome {
    let grid: Vec<u64> = (1..=16).map(|e| 1u64 << e).chain([100_000]).collect();
    let mut checks = 0u64;
    for seed in 0..50u64 {
        let x = ExactSeq::seeded_random01(seed);
        let r = densitylab::seq::rounding_transform(&x).map_err(e)?;
        let (mut s, mut t) = (Rational::zero(), Rational::zero());
        let one = Rational::from_integer(1);
        for i in 1..=100_000u64 {
            s += x.value(i).map_err(e)?;
            let v = r.value(i).map_err(e)?;
            ensure(v.is_zero() || v == one, || format!("seed {seed}: x̃_{i} = {v}"))?;
            t += v;
            ensure((t - s).abs() < one, || format!("seed {seed}: partial sums differ by {} at {i}", t - s))?;
            checks += 1;
        }
        for k in 1..=10u32 {
            let th = theta_of::<Rational>(k);
            for &n in &grid {
                let d = theta_at(&x, &th, n, 1 << 20).map_err(e)? - theta_at(&r, &th, n, 1 << 20).map_err(e)?;
                let bound = Rational::from_integer(2) / (Rational::from_integer(n as i128) * (one - th));
                ensure(d.abs() <= bound, || format!("seed {seed}: k={k} n={n}: {d} > {bound}"))?;
                checks += 1;
            }
        }
    }
    Ok(format!("{checks} exact comparisons, 0 violations"))
}

fn c6_continuity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut tightest = f64::INFINITY;
    for i in 0..1000 {
        let (x, th, d, r) = continuity_sample(&mut rng);
        let c = continuity_modulus_check(&x, &th, &d, &r).map_err(e)?;
        ensure(c.ok, || format!("sample {i}: {x} θ={th} δ={d} r={r}: {} > {}", c.lhs, c.bound))?;
        tightest = tightest.min(c.bound - c.lhs);
    }
    Ok(format!("1000 samples, smallest slack {tightest:.3e}"))
}

fn c7_surrogate_sup() -> Outcome {
    let cfg = EstimatorConfig::default();
    let random_cfg = EstimatorConfig::default().with_max_horizon(1 << 18);
    let mut worst = 0.0f64;
    let mut cases: Vec<(Seq, &EstimatorConfig)> =
        standard_family().into_iter().map(|a| (Seq::indicator(a), &cfg)).collect();
    cases.extend((0..10).map(|s| (Seq::seeded_random01(700 + s), &random_cfg)));
    for (x, c) in &cases {
        let (_, sup) = surrogate_sup(x, c).map_err(e)?;
        let t = t_estimate(x, c).map_err(e)?.extrapolated;
        worst = worst.max((sup - t).abs());
        ensure((sup - t).abs() <= 3e-2, || format!("{x}: sup {sup} vs t {t}"))?;
    }
    Ok(format!("{} inputs, max gap {worst:.2e}", cases.len()))
}

fn c8_cesaro_extension() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let len = rng.gen_range(1..=6);
        let values: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mean = values.iter().sum::<f64>() / len as f64;
        let x = Seq::periodic(values).unwrap();
        for _ in 0..4 {
            let n = 1024 * rng.gen_range(1024..=8192u64);
            let v = eval_surrogate(&Surrogate::single(10, n), &x).map_err(e)?;
            worst = worst.max((v - mean).abs());
            ensure((v - mean).abs() <= 2e-2, || format!("{x} at n={n}: {v} vs mean {mean}"))?;
        }
    }
    Ok(format!("200 atoms at k=10, max deviation {worst:.2e}"))
}

fn c9_additivity() -> Outcome {
    let cfg = EstimatorConfig::default();
    let pairs = [
        ("mod(2;0)", "explicit()"),
        ("mod(2;0)", "inter(blocks(geom;1,2,2),mod(2;1))"),
        ("mod(4;0)", "explicit(1,2,3,5)"),
        ("mod(3;0)", "inter(blocks(geom;3,1.5,3),compl(mod(3;0)))"),
        ("mod(5;1,3)", "blocks(list;[2,3),[4,5))"),
        ("compl(union(mod(4;0),mod(4;1)))", "inter(blocks(geom;1,2,2),mod(4;0))"),
        ("explicit(2,3,9,10)", "blocks(geom;1,2,2)"),
        ("mod(6;0,1)", "inter(blocks(geom;1,2,2),compl(mod(6;0,1)))"),
        ("mod(12;0,1,2,3,4,5)", "inter(blocks(geom;2,2,3),mod(12;6,7,8,9,10,11))"),
        ("mod(7;0)", "compl(mod(7;0))"),
    ];
    let mut worst = 0.0f64;
    for (a, b) in pairs {
        let (a, b) = (parse_set_expr(a).map_err(e)?, parse_set_expr(b).map_err(e)?);
        let residual = verify_additivity(&a, &b, &cfg).map_err(e)?;
        worst = worst.max(residual);
        ensure(residual <= 3e-2, || format!("A={a}, B={b}: residual {residual}"))?;
    }
    Ok(format!("10 pairs, max residual {worst:.2e}"))
}

fn c10_step_extension() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut count = 0;
    for eps in [0.1, 0.05, 0.01] {
        for i in 0..12 {
            let x: Seq = match i % 4 {
                0 => Seq::seeded_random01(rng.gen()),
                1 => BoundedSeq::affine(2.0, -1.0, Seq::seeded_random01(rng.gen())),
                2 => Seq::periodic((0..5).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap(),
                _ => Seq::indicator(random_set(&mut rng)),
            };
            let k = rng.gen_range(2..=10u32);
            let n = rng.gen_range(1000..=20_000u64);
            let f = Surrogate::single(k, n);
            let th = theta_of::<f64>(k);
            let lhs = (functional_from_measure(&f, &x, &eps).map_err(e)? - eval_surrogate(&f, &x).map_err(e)?).abs();
            let bound = eps + 2.0 / (n as f64 * (1.0 - th));
            ensure(lhs <= bound, || format!("{x}, eps={eps}, k={k}, n={n}: {lhs} > {bound}"))?;
            count += 1;
        }
    }
    Ok(format!("{count} cases, 0 violations"))
}

fn c11_oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let alphas = [0.0, 0.5, 1.0, 2.0, 4.0];
    let (mut counts, mut ratios) = (0u64, 0u64);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let a = random_set(&mut rng);
        let limit = 10_000u64;
        // oracle: membership scan with unnormalized running power sums
        let mut running = 0u64;
        let mut num = vec![0.0f64; alphas.len()];
        let mut den = vec![0.0f64; alphas.len()];
        let mut table = vec![(0u64, vec![0.0f64; alphas.len()]); (limit + 1) as usize];
        for n in 1..=limit {
            let member = a.member(n);
            running += u64::from(member);
            for (j, &alpha) in alphas.iter().enumerate() {
                let t = (n as f64).powf(alpha);
                den[j] += t;
                if member {
                    num[j] += t;
                }
            }
            table[n as usize] = (running, (0..alphas.len()).map(|j| num[j] / den[j]).collect());
            let c = a.count(n).map_err(e)?;
            ensure(c == running, || format!("{a}: count({n}) = {c}, oracle {running}"))?;
            counts += 1;
        }
        let mut sample: Vec<u64> = (1..=300).collect();
        sample.extend(a.breakpoints(1, limit));
        sample.extend((0..200).map(|_| rng.gen_range(1..=limit)));
        sample.sort_unstable();
        sample.dedup();
        for (i, &n) in sample.iter().enumerate() {
            let j = i % alphas.len();
            let got = a
                .power_sum_ratio_with(n, alphas[j], SumMode::Exact, 1 << 24)
                .map_err(e)?
                .value;
            let want = table[n as usize].1[j];
            let rel = if want == 0.0 { got.abs() } else { (got - want).abs() / want };
            worst = worst.max(rel);
            ensure(rel <= 1e-9, || format!("{a}: ratio at n={n}, α={}: {got} vs {want}", alphas[j]))?;
            ratios += 1;
        }
    }
    Ok(format!("{counts} counts exact, {ratios} ratios, max relative error {worst:.2e}"))
}

fn panic_message(p: &(dyn std::any::Any + Send)) -> String {
    p.downcast_ref::<String>()
        .cloned()
        .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
        .unwrap_or_default()
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("four-route concordance", c1_four_routes),
        ("exact-density collapse", c2_exact_density_collapse),
        ("duality", c3_duality),
        ("sandwich chain", c4_sandwich),
        ("rounding transform", c5_rounding),
        ("continuity modulus", c6_continuity),
        ("surrogate sup", c7_surrogate_sup),
        ("Cesàro extension", c8_cesaro_extension),
        ("additivity", c9_additivity),
        ("step extension", c10_step_extension),
        ("oracle equivalence", c11_oracle_equivalence),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run))
            .unwrap_or_else(|p| Err(format!("panicked: {}", panic_message(p.as_ref()))));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} {name}: PASS ({detail}) [{secs:.1}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} {name}: FAIL ({detail}) [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
