use std::process::ExitCode;
use std::time::{Duration, Instant};

use gevrey_core::analysis::{analyze, build_polygon, compute_indices, is_regular_singular, phi_bound_suite};
use gevrey_core::equation::{im_pairs, normalize, NormalizedEquation};
use gevrey_core::estimator::{fit_s, fit_sigma, membership_test, verify_bound_e64, SMode, Verdict, DEFAULT_RHO};
use gevrey_core::fixtures::{
    catalog, e27_convergent_in_t, example_e27_with, example_e62, model_e58, model_e58_degenerate, random_spec,
    Fixture, ModelOracle, ModelSetting,
};
use gevrey_core::series::borel::pole_series;
use gevrey_core::series::rat::{factorial, int, rat, Rat};
use gevrey_core::series::{borel_m, check_nagumo, check_nagumo_higher, BiSeries, UniSeries};
use gevrey_core::solver::{build_rhs_enumerated, residual_is_zero, solve_formal, SolveState};
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

type Outcome = Result<String, String>;

struct Criterion {
    id: &'static str,
    name: &'static str,
    budget: Option<Duration>,
    run: fn() -> Outcome,
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn norm_of(spec: &gevrey_core::equation::EquationSpec) -> Result<NormalizedEquation, String> {
    normalize(spec).map_err(|e| e.to_string())
}

fn e27_indices() -> Outcome {
    let mut count = 0;
    for mu in 0..=6 {
        for pair in im_pairs(4) {
            for n in 1..=3usize {
                for i in 0..=3usize {
                    if i + n < 2 {
                        continue;
                    }
                    let f = example_e27_with(mu, i, pair.j, pair.alpha, n, (mu + 2).max(8)).map_err(|e| e.to_string())?;
                    let norm = norm_of(&f.spec)?;
                    let poly = build_polygon(&norm.lambda0, norm.m());
                    let ix = compute_indices(&norm, &poly).map_err(|e| e.to_string())?;
                    ensure(ix.sigma0.value == int(2), || format!("{}: sigma0 = {}", f.name, ix.sigma0.value))?;
                    ensure(ix.s0.value == f.expected.s0, || format!("{}: s0 = {}", f.name, ix.s0.value))?;
                    ensure(
                        (ix.s0.value == int(1)) == e27_convergent_in_t(mu, pair.j, pair.alpha),
                        || format!("{}: convergence classification", f.name),
                    )?;
                    count += 1;
                }
            }
        }
    }
    Ok(format!("{count} instances"))
}

fn e62_full() -> Outcome {
    let f = example_e62();
    let norm = norm_of(&f.spec)?;
    let an = analyze(&norm, 30).map_err(|e| e.to_string())?;
    let ix = &an.indices;
    ensure(
        ix.sigma0.value == int(2) && ix.s0.value == int(2) && ix.s1.value == int(1),
        || format!("indices ({}, {}, {})", ix.sigma0.value, ix.s0.value, ix.s1.value),
    )?;
    let u = solve_formal(&norm, 10, 40).map_err(|e| e.to_string())?;
    let row1 = f.oracle.as_ref().and_then(|o| o.first_row(40)).ok_or("no oracle")?;
    ensure(u.row(1) == &row1, || "row 1 differs from (l-1)!".into())?;
    let bound = verify_bound_e64(&u, 10);
    ensure(bound.passed(), || format!("bound violated at {:?}", bound.witness))?;
    let inside = membership_test(&u, &int(1), &int(2), DEFAULT_RHO);
    ensure(inside.verdict == Verdict::Consistent, || format!("(1,2): {inside:?}"))?;
    let outside = membership_test(&u, &int(1), &rat(3, 2), DEFAULT_RHO);
    ensure(
        outside.verdict == Verdict::Inconsistent && outside.margin > 0.0,
        || format!("(1,3/2): {outside:?}"),
    )?;
    Ok(format!(
        "growth at (1,2) = {:.3}, at (1,3/2) = {:.3} (margin {:.3})",
        inside.growth, outside.growth, outside.margin
    ))
}

fn random_indices() -> Result<Vec<(u64, gevrey_core::analysis::IndexResult, bool)>, String> {
    (0..200u64)
        .map(|seed| {
            let norm = norm_of(&random_spec(seed))?;
            let poly = build_polygon(&norm.lambda0, norm.m());
            let ix = compute_indices(&norm, &poly).map_err(|e| format!("seed {seed}: {e}"))?;
            Ok((seed, ix, is_regular_singular(&norm, &poly)))
        })
        .collect()
}

fn dual_routes() -> Outcome {
    for (seed, ix, _) in random_indices()? {
        ensure(ix.s0.value == ix.s0_alt.value, || {
            format!("seed {seed}: {} vs {}", ix.s0.value, ix.s0_alt.value)
        })?;
    }
    Ok("200 specs".into())
}

fn regular_singular_iff() -> Outcome {
    let mut regular = 0;
    for (seed, ix, r) in random_indices()? {
        ensure((ix.sigma0.value == int(1)) == r, || format!("seed {seed}: sigma0 = {}, R = {r}", ix.sigma0.value))?;
        regular += r as usize;
    }
    Ok(format!("200 specs, {regular} regular singular"))
}

fn phi_bounds() -> Outcome {
    let mut checks = 0;
    for f in catalog() {
        let norm = norm_of(&f.spec)?;
        let poly = build_polygon(&norm.lambda0, norm.m());
        let rep = phi_bound_suite(&poly, &[1, 2, 3], 200, 200);
        ensure(rep.violations.is_empty(), || format!("{}: {:?}", f.name, rep.violations[0]))?;
        checks += rep.inside_pairs + rep.outside_checks;
    }
    Ok(format!("{checks} pair checks, k,l <= 200"))
}

fn borel_rules() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let draw = |rng: &mut ChaCha8Rng| {
        let len = rng.random_range(1..=14);
        let c: Vec<i64> = (0..len).map(|_| rng.random_range(-9..=9)).collect();
        UniSeries::from_ints(&c).truncate(14)
    };
    for case in 0..100 {
        let f = draw(&mut rng);
        let g = draw(&mut rng);
        let s = int(rng.random_range(2..=3));
        let m = rng.random_range(0..=3usize);
        let b = |h: &UniSeries, m| borel_m(h, &s, m).map_err(|e| e.to_string());
        let abs = f.majorant_abs();
        ensure(b(&abs, m + 1)?.dominates(&b(&abs, m)?), || format!("case {case}: chain"))?;
        let lhs = b(&f.mul(&g).majorant_abs(), m)?;
        let rhs = b(&abs, m)?.mul(&b(&g.majorant_abs(), m)?);
        ensure(rhs.dominates(&lhs), || format!("case {case}: product"))?;
        for k in 1..=m {
            ensure(b(&f.mul_x_pow(k), m)? == b(&f, m - k)?.mul_x_pow(k), || format!("case {case}: shift k={k}"))?;
        }
    }
    Ok("100 random pairs".into())
}

fn nagumo() -> Outcome {
    let two = int(2);
    let one = int(1);
    let mut inputs: Vec<(String, UniSeries)> = (1..=3)
        .map(|a| (format!("pole a={a}"), pole_series(&one, &one, &int(a), 60)))
        .collect();
    for shift in 0..=2usize {
        inputs.push((
            format!("factorial row (l-{shift})!"),
            UniSeries::from_fn(60, |l| if l < shift { Rat::zero() } else { Rat::from_integer(factorial(l - shift)) }),
        ));
    }
    let mut checks = 0;
    for (label, f) in &inputs {
        for a in 1..=3 {
            for m in 1..=3 {
                let r = check_nagumo(f, &two, m, a, &one).map_err(|e| e.to_string())?;
                ensure(r.first && r.second, || format!("{label}, a={a}, m={m}: {r:?}"))?;
                let hi = check_nagumo_higher(f, &two, m, a, &one, 3).map_err(|e| e.to_string())?;
                ensure(hi.is_none(), || format!("{label}, a={a}, m={m}: higher-order fails at {hi:?}"))?;
                checks += 1;
            }
        }
    }
    Ok(format!("{checks} (series, a, m) combinations"))
}

fn solver_fixtures() -> Vec<Fixture> {
    let mut out = vec![
        example_e27_with(0, 1, 3, 1, 1, 40).expect("valid"),
        example_e27_with(2, 1, 0, 3, 1, 40).expect("valid"),
        example_e27_with(1, 0, 1, 2, 2, 40).expect("valid"),
        gevrey_core::fixtures::example_e62_with(40),
    ];
    for s in ModelSetting::ALL {
        out.push(model_e58(&s.params(), 40).expect("valid"));
        out.push(model_e58_degenerate(&s.params(), 40).expect("valid"));
    }
    out
}

fn solver_equivalence() -> Outcome {
    let mut rows = 0;
    for f in solver_fixtures() {
        let norm = norm_of(&f.spec)?;
        let mut st = SolveState::new(&norm, 8, 6);
        for k in 1..=8 {
            let fast = st.rhs().map_err(|e| format!("{} k={k}: {e}", f.name))?;
            let slow = build_rhs_enumerated(&norm, st.rows(), k).map_err(|e| format!("{} k={k}: {e}", f.name))?;
            ensure(fast == slow, || format!("{} k={k}: engine and enumeration differ", f.name))?;
            st.step().map_err(|e| format!("{} k={k}: {e}", f.name))?;
            rows += 1;
        }
        let u = st.finish();
        let ok = residual_is_zero(&f.spec, &u).map_err(|e| e.to_string())?;
        ensure(ok, || format!("{}: nonzero residual", f.name))?;
    }
    Ok(format!("{rows} right-hand sides, residuals zero"))
}

fn model_domination() -> Outcome {
    for s in ModelSetting::ALL {
        let pr = s.params();
        let oracle = ModelOracle::new(pr.clone());
        ensure(oracle.ladder_bounds_hold(50), || format!("{s:?}: ladder bounds"))?;
        let lx = 10 * pr.p + pr.m + pr.p;
        let kt = oracle.t_exponent(5);
        let f = model_e58(&pr, lx + kt * pr.alpha + 8).map_err(|e| e.to_string())?;
        let u = solve_formal(&norm_of(&f.spec)?, kt, lx).map_err(|e| format!("{s:?}: {e}"))?;
        for (k, rung) in oracle.table(5, 10).iter().enumerate() {
            let row = u.row(oracle.t_exponent(k));
            for (x, a) in rung {
                let v = row.get(*x).ok_or_else(|| format!("{s:?}: (k={k}, x^{x}) untrusted"))?;
                ensure(v >= a, || format!("{s:?}: u[{},{x}] = {v} < {a}", oracle.t_exponent(k)))?;
            }
        }
    }
    Ok("settings A, B, C; k <= 5, l <= 10; ladder to k = 50".into())
}

fn positivity() -> Outcome {
    let mut cases = Vec::new();
    for mu in 0..=6 {
        for pair in im_pairs(4) {
            for n in 1..=3usize {
                for i in 0..=3usize {
                    if i + n >= 2 {
                        cases.push((mu, i, pair.j, pair.alpha, n));
                    }
                }
            }
        }
    }
    let total = cases.len();
    cases.into_par_iter().try_for_each(|(mu, i, j, alpha, n)| {
        let f = example_e27_with(mu, i, j, alpha, n, 8 + 8 * alpha + 4).map_err(|e| e.to_string())?;
        let u = solve_formal(&norm_of(&f.spec)?, 8, 8).map_err(|e| format!("{}: {e}", f.name))?;
        ensure(u.is_nonneg(), || format!("{}: negative coefficient", f.name))
    })?;
    Ok(format!("{total} instances at K_t = 8"))
}

fn planted(a: usize, b: usize) -> BiSeries {
    let third = rat(1, 3);
    BiSeries::from_fn(40, 40, |k, l| {
        if k == 0 {
            return Rat::zero();
        }
        let v = Rat::from_integer(num_traits::pow(factorial(k), a) * num_traits::pow(factorial(l), b));
        v * num_traits::pow(third.clone(), k + l)
    })
}

fn calibration() -> Outcome {
    let mut worst: f64 = 0.0;
    for (a, b) in [(1, 1), (1, 2), (2, 1)] {
        let u = planted(a, b);
        let want_sigma = 1.0 + b as f64;
        let sf = fit_sigma(&u, &[1, 5, 10]);
        let sig = sf.sigma_hat.ok_or("no sigma fit")?;
        worst = worst.max((sig - want_sigma).abs());
        for mode in [SMode::NormalizedRows, SMode::Columns] {
            let s = fit_s(&u, want_sigma, DEFAULT_RHO, mode).s_hat.ok_or("no s fit")?;
            worst = worst.max((s - (1.0 + a as f64)).abs());
        }
    }
    ensure(worst <= 0.05, || format!("planted error {worst:.4}"))?;
    let pr = ModelSetting::A.params();
    let f = model_e58(&pr, 70).map_err(|e| e.to_string())?;
    let u = solve_formal(&norm_of(&f.spec)?, 6, 60).map_err(|e| e.to_string())?;
    let sf = fit_sigma(&u, &(1..=6).collect::<Vec<_>>());
    let sig = sf.sigma_hat.ok_or("model A: no sigma fit")?;
    ensure((1.85..=2.15).contains(&sig), || format!("model A sigma_hat = {sig:.4}"))?;
    Ok(format!("planted max error {worst:.4}; model A sigma_hat = {sig:.4}"))
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { id: "A1", name: "e27 grid: sigma0 = 2, s0 closed form, convergence classification", budget: Some(Duration::from_secs(5)), run: e27_indices },
        Criterion { id: "A2", name: "e62: indices, exact solve, coefficient bound, membership", budget: Some(Duration::from_secs(30)), run: e62_full },
        Criterion { id: "A3", name: "s0 valuation route equals term route on random specs", budget: None, run: dual_routes },
        Criterion { id: "A4", name: "sigma0 = 1 iff regular singular on random specs", budget: None, run: regular_singular_iff },
        Criterion { id: "A5", name: "phi bounds on fixture polygons", budget: Some(Duration::from_secs(10)), run: phi_bounds },
        Criterion { id: "A6", name: "Borel chain, product and shift rules", budget: None, run: borel_rules },
        Criterion { id: "A7", name: "Nagumo-type derivative estimates", budget: None, run: nagumo },
        Criterion { id: "A8", name: "RHS engine equals enumeration; residual vanishes", budget: None, run: solver_equivalence },
        Criterion { id: "A9", name: "model solution dominates the minorant chain", budget: None, run: model_domination },
        Criterion { id: "A10", name: "e27 family coefficients are nonnegative", budget: None, run: positivity },
        Criterion { id: "A11", name: "estimator calibration", budget: None, run: calibration },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let mut outcome = (c.run)();
        let took = start.elapsed();
        if let (Ok(detail), Some(b)) = (&outcome, c.budget) {
            if took > b {
                outcome = Err(format!("{detail}; exceeded {:.0?} budget", b));
            }
        }
        match outcome {
            Ok(detail) => println!("PASS {:<4} {} [{detail}] ({:.2?})", c.id, c.name, took),
            Err(why) => {
                failed += 1;
                println!("FAIL {:<4} {} [{why}] ({:.2?})", c.id, c.name, took);
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
