//! Acceptance suite. Runs without the default harness so every criterion
//! prints exactly one PASS/FAIL line; the process fails if any criterion does.

use std::time::{Duration, Instant};

use orlicz_growth::admissibility::{analyze, power_log_thresholds, GrowthSpec, Outcome};
use orlicz_growth::degiorgi::{
    calibrate_sphere_kappa, hole_filling, iterate, optimized_cutoff, CutoffConstants, CutoffRegime, DecayParams,
};
use orlicz_growth::harness::{
    boundedness_sweep, discretize, minimize, quasi_min_check, FunctionalSpec, SweepOptions,
};
use orlicz_growth::norms::SobolevPoincare;
use orlicz_growth::sampled::SampledFunction;
use orlicz_growth::sobolev::{
    inverse_product_ratio, lemma_shift_constant, log_log_slope, regularize_near_zero, sobolev_conjugate,
};
use orlicz_growth::young::log_points;
use orlicz_growth::YoungFunction;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SELF_CONJUGATE_TOL: f64 = 1e-8;
const BICONJUGATE_REL_TOL: f64 = 1e-6;
const CONJUGATE_TABLE_END: f64 = 1e6;
const SANDWICH_REL_SLACK: f64 = 1e-9;
const CONJUGATION_BUDGET: Duration = Duration::from_secs(10);
const SLOPE_TOL: f64 = 1e-3;
const SLOPE_BUDGET: Duration = Duration::from_secs(30);
const INVERSE_PRODUCT_SLACK: f64 = 1e-6;
const THRESHOLD_MARGIN: f64 = 0.05;
const HOLE_INSTANCES: usize = 1000;
const HOLE_GRID: usize = 200;
const DECAY_POINTS: usize = 50;
const DECAY_STEPS: usize = 60;
const CUTOFF_REL_SLACK: f64 = 1e-6;
const DIRICHLET_TOL: f64 = 1e-6;
const QUASI_MIN_Q: f64 = 1.0 + 1e-6;
const QUASI_MIN_TRIALS: usize = 100;
const SWEEP_STABILITY: f64 = 0.05;
const HARNESS_BUDGET: Duration = Duration::from_secs(300);
const SP_DEFECT_TOL: f64 = 1e-6;

type Check = Result<String, String>;

fn pw(p: f64) -> YoungFunction {
    YoungFunction::power(p).unwrap()
}

fn basket() -> Vec<(&'static str, YoungFunction)> {
    vec![
        ("power:1.5", pw(1.5)),
        ("power:2", pw(2.0)),
        ("power:3", pw(3.0)),
        ("power_log:2:1", YoungFunction::power_log(2.0, 1.0).unwrap()),
        ("linear_splice:1:power:3", YoungFunction::linear_splice(1.0, pw(3.0)).unwrap()),
        ("exp_poly:1", YoungFunction::exp_poly(1.0).unwrap()),
    ]
}

fn ensure(ok: bool, detail: String) -> Check {
    if ok { Ok(detail) } else { Err(detail) }
}

fn conjugation_suite() -> Check {
    let start = Instant::now();
    let half = YoungFunction::scaled(pw(2.0), 1.0, 0.5).map_err(|e| e.to_string())?;
    let half_conj = half.conjugate().map_err(|e| e.to_string())?;
    let mut self_err: f64 = 0.0;
    for t in log_points(1e-3, 1e3, 200) {
        self_err = self_err.max((half_conj.value(t) - half.value(t)).abs() / half.value(t).max(1.0));
    }
    let mut bi_err: f64 = 0.0;
    let mut sandwich_worst: f64 = 0.0;
    for (name, a) in basket() {
        let conj = a.conjugate().map_err(|e| format!("{name}: {e}"))?;
        let bi = conj.conjugate().map_err(|e| format!("{name}: {e}"))?;
        for t in log_points(1e-2, 1e2, 50) {
            if a.derivative(t) >= CONJUGATE_TABLE_END {
                continue;
            }
            let v = a.value(t);
            bi_err = bi_err.max((bi.value(t) - v).abs() / v);
        }
        for s in log_points(1e-3, 1e3, 200) {
            let prod = a.inverse(s).map_err(|e| e.to_string())? * conj.inverse(s).map_err(|e| e.to_string())?;
            let excess = (s - prod).max(prod - 2.0 * s) / s;
            sandwich_worst = sandwich_worst.max(excess);
        }
    }
    let elapsed = start.elapsed();
    ensure(
        self_err <= SELF_CONJUGATE_TOL
            && bi_err <= BICONJUGATE_REL_TOL
            && sandwich_worst <= SANDWICH_REL_SLACK
            && elapsed < CONJUGATION_BUDGET,
        format!("self {self_err:.2e}, biconjugate {bi_err:.2e}, sandwich excess {sandwich_worst:.2e}, {elapsed:.2?}"),
    )
}

fn sobolev_slopes() -> Check {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for (n, p) in [(3usize, 1.5), (3, 2.0), (4, 2.0), (4, 3.0)] {
        let sc = sobolev_conjugate(&pw(p), n).map_err(|e| e.to_string())?;
        let nf = n as f64;
        worst = worst.max((log_log_slope(&sc.result, 10.0, 1e4) - nf * p / (nf - p)).abs());
    }
    let a2 = sobolev_conjugate(&pw(1.5), 2).map_err(|e| e.to_string())?;
    let s6 = log_log_slope(&a2.result, 10.0, 1e4);
    worst = worst.max((s6 - 6.0).abs());
    let elapsed = start.elapsed();
    ensure(worst <= SLOPE_TOL && elapsed < SLOPE_BUDGET, format!("worst slope error {worst:.2e}, A_2 slope {s6:.6}, {elapsed:.2?}"))
}

fn inverse_product_and_shift() -> Check {
    let n = 3;
    let mut worst_ratio: f64 = 0.0;
    let mut worst_c: f64 = 0.0;
    for (name, a) in basket() {
        let reg = regularize_near_zero(&a, &[]).map_err(|e| format!("{name}: {e}"))?;
        let sc = sobolev_conjugate(&reg, n).map_err(|e| format!("{name}: {e}"))?;
        let conj = reg.conjugate().map_err(|e| format!("{name}: {e}"))?;
        worst_ratio = worst_ratio.max(inverse_product_ratio(&conj, &sc.result, n).map_err(|e| format!("{name}: {e}"))?);
        for k in [0.25, 1.0, 4.0] {
            worst_c = worst_c.max(lemma_shift_constant(&reg, &sc.result, k));
        }
    }
    ensure(
        worst_ratio <= 1.0 + INVERSE_PRODUCT_SLACK && worst_c.is_finite(),
        format!("worst inverse-product ratio {worst_ratio:.9}, largest shift constant {worst_c:.3e}"),
    )
}

fn expected_outcome(n: usize, p: f64, q: f64) -> Outcome {
    let nf = n as f64;
    if p > nf {
        Outcome::TriviallyBounded
    } else if n == 2 || p >= nf - 1.0 {
        Outcome::Admissible
    } else if q < (nf - 1.0) * p / (nf - 1.0 - p) {
        Outcome::Admissible
    } else {
        Outcome::NotAdmissible
    }
}

fn admissibility_table() -> Check {
    let cases: [(usize, f64, f64); 20] = [
        (3, 1.5, 2.0),
        (3, 1.5, 5.5),
        (3, 1.5, 5.9),
        (3, 1.5, 6.1),
        (3, 1.5, 8.0),
        (3, 1.2, 2.9),
        (3, 1.2, 3.1),
        (4, 2.0, 5.0),
        (4, 2.0, 7.0),
        (4, 1.5, 2.9),
        (4, 1.5, 3.2),
        (5, 2.0, 3.9),
        (5, 2.0, 4.5),
        (4, 2.5, 12.0),
        (4, 2.5, 16.0),
        (3, 2.0, 9.0),
        (3, 2.5, 12.0),
        (2, 1.5, 10.0),
        (2, 3.0, 4.0),
        (3, 3.5, 5.0),
    ];
    let mut wrong = Vec::new();
    for (n, p, q) in cases {
        let nf = n as f64;
        if n >= 3 && p < nf - 1.0 {
            let thr = (nf - 1.0) * p / (nf - 1.0 - p);
            assert!((q - thr).abs() >= THRESHOLD_MARGIN, "case ({n}, {p}, {q}) is inside the margin");
        }
        let got = analyze(&GrowthSpec::new(pw(p), pw(q), n)).map_err(|e| format!("({n}, {p}, {q}): {e}"))?.outcome;
        if got != expected_outcome(n, p, q) {
            wrong.push(format!("({n}, {p}, {q}) -> {got:?}"));
        }
    }
    let t = power_log_thresholds(3, 1.5, 1.0).map_err(|e| e.to_string())?;
    let exact = t.b_exponent == Some(6.0) && t.b_log_exponent == Some(4.0);
    ensure(
        wrong.is_empty() && exact,
        format!("{} misclassified {wrong:?}, thresholds ({:?}, {:?})", wrong.len(), t.b_exponent, t.b_log_exponent),
    )
}

fn hole_filling_brute_force() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let mut accepted = 0usize;
    let mut violations = 0usize;
    let mut attempts = 0usize;
    while accepted < HOLE_INSTANCES && attempts < 20 * HOLE_INSTANCES {
        attempts += 1;
        let theta: f64 = rng.random_range(0.0..0.95);
        let alpha: f64 = rng.random_range(0.2..3.0);
        let a: f64 = rng.random_range(0.0..2.0);
        let b: f64 = rng.random_range(0.0..2.0);
        let rho: f64 = rng.random_range(0.1..0.6);
        let sigma: f64 = rng.random_range(rho + 0.1..1.2);
        let family = rng.random_range(0..4u8);
        let m: f64 = a * rng.random_range(0.0..1.0);
        let z0: f64 = b / (1.0 - theta) * rng.random_range(0.0..1.0);
        let delta: f64 = rng.random_range(1e-3..0.5);
        let wobble: f64 = rng.random_range(0.0..1.0);
        let freq: f64 = rng.random_range(1.0..20.0);
        let z = move |r: f64| -> f64 {
            let d = sigma + delta - r;
            match family {
                0 => z0 + m * d.powf(-alpha),
                1 => z0 + m * (sigma - r) / (sigma - rho),
                2 => z0 + wobble * m * (1.0 + (freq * r).sin()),
                _ => (z0 + m * d.powf(-alpha)) * (1.0 + wobble * (freq * r).sin()),
            }
        };
        let h = hole_filling(&z, rho, sigma, theta, a, b, alpha, HOLE_GRID).map_err(|e| e.to_string())?;
        if !h.hypothesis.holds() {
            continue;
        }
        accepted += 1;
        if !h.conclusion.holds() {
            violations += 1;
        }
    }
    ensure(
        accepted == HOLE_INSTANCES && violations == 0,
        format!("{accepted} instances satisfying the hypothesis ({attempts} drawn), {violations} violations"),
    )
}

fn de_giorgi_decay() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut violations = Vec::new();
    for i in 0..DECAY_POINTS {
        let n = rng.random_range(2..=6usize);
        let q = rng.random_range(1.1..12.0);
        let l = rng.random_range(1.0..64.0);
        let c2 = rng.random_range(1.0..16.0);
        let params = DecayParams::with_constants(n, q, l, c2, 1.0).map_err(|e| e.to_string())?;
        let fraction = if i % 5 == 0 { 1.0 } else { rng.random_range(1e-6..1.0) };
        let j0 = params.eps0() * fraction;
        let trace = iterate(j0, &params, 1.0, DECAY_STEPS).map_err(|e| e.to_string())?;
        if !trace.verdict.is_decayed() {
            violations.push(format!("(n={n}, q={q:.3}, L={l:.3}, c2={c2:.3})"));
        }
    }
    ensure(violations.is_empty(), format!("{DECAY_POINTS} parameter points, {} violations {violations:?}", violations.len()))
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

type Seed = (&'static str, Box<dyn Fn(&[f64]) -> f64>, Box<dyn Fn(&[f64]) -> Vec<f64>>);

fn radial_seed(n: usize, seed: &Seed) -> SampledFunction {
    SampledFunction::radial(n, 1.0, 256, 6, &*seed.1).unwrap().with_gradient(&*seed.2)
}

fn cutoff_seeds() -> Vec<Seed> {
    vec![
        ("cone", Box::new(norm), Box::new(|x: &[f64]| {
            let r = norm(x).max(1e-300);
            x.iter().map(|v| v / r).collect()
        })),
        ("bump", Box::new(|x: &[f64]| (1.0 - norm(x).powi(2)).powi(2)), Box::new(|x: &[f64]| {
            let s = 1.0 - norm(x).powi(2);
            x.iter().map(|v| -4.0 * s * v).collect()
        })),
        ("linear", Box::new(|x: &[f64]| 1.0 + 2.0 * x[0] - x[1]), Box::new(|x: &[f64]| {
            let mut g = vec![0.0; x.len()];
            g[0] = 2.0;
            g[1] = -1.0;
            g
        })),
        ("saddle", Box::new(|x: &[f64]| x[0] * x[1] + 0.5 * x[0].powi(3)), Box::new(|x: &[f64]| {
            let mut g = vec![0.0; x.len()];
            g[0] = x[1] + 1.5 * x[0] * x[0];
            g[1] = x[0];
            g
        })),
        ("wave", Box::new(|x: &[f64]| (3.0 * x[0]).sin() * (2.0 * x[1]).cos()), Box::new(|x: &[f64]| {
            let mut g = vec![0.0; x.len()];
            g[0] = 3.0 * (3.0 * x[0]).cos() * (2.0 * x[1]).cos();
            g[1] = -2.0 * (3.0 * x[0]).sin() * (2.0 * x[1]).sin();
            g
        })),
    ]
}

struct CutoffCase {
    n: usize,
    a: YoungFunction,
    b: YoungFunction,
    q: f64,
    l: f64,
    regime: CutoffRegime,
    seeds: Vec<usize>,
}

fn optimized_cutoff_cases() -> Check {
    let (rho, sigma) = (0.5, 0.75);
    let sub_a = pw(1.5);
    let sub_target = sobolev_conjugate(&sub_a, 2).map_err(|e| e.to_string())?.result;
    let cases = vec![
        CutoffCase { n: 3, a: sub_a.clone(), b: sub_target.clone(), q: 6.0, l: 1.0, regime: CutoffRegime::Subcritical, seeds: vec![0, 1, 2, 3] },
        CutoffCase {
            n: 2,
            a: YoungFunction::linear_splice(1.0, pw(3.0)).unwrap(),
            b: pw(4.0),
            q: 4.0,
            l: 1.0,
            regime: CutoffRegime::Supercritical,
            seeds: vec![1, 2, 4],
        },
        CutoffCase { n: 3, a: pw(3.0), b: pw(4.0), q: 4.0, l: 1.0, regime: CutoffRegime::Supercritical, seeds: vec![0, 3, 4] },
    ];
    let seeds = cutoff_seeds();
    let mut passed = 0usize;
    let mut total = 0usize;
    let mut failures = Vec::new();
    for case in &cases {
        let fields: Vec<SampledFunction> = case.seeds.iter().map(|&i| radial_seed(case.n, &seeds[i])).collect();
        let target = matches!(case.regime, CutoffRegime::Subcritical).then_some(&sub_target);
        let kappa = calibrate_sphere_kappa(&fields, &case.a, target, case.q, rho, sigma, case.regime).map_err(|e| e.to_string())?;
        let constants = CutoffConstants { q: case.q, l: case.l, kappa };
        for (u, &i) in fields.iter().zip(&case.seeds) {
            total += 1;
            let r = optimized_cutoff(u, &case.a, &case.b, rho, sigma, case.regime, constants).map_err(|e| e.to_string())?;
            if r.measure_ok() && r.gradient_ok() && r.lhs <= r.bound * (1.0 + CUTOFF_REL_SLACK) {
                passed += 1;
            } else {
                failures.push(format!("n={} {} {:?}: lhs {:.3e} bound {:.3e}", case.n, seeds[i].0, case.regime, r.lhs, r.bound));
            }
        }
    }
    ensure(passed == total && total == 10, format!("{passed}/{total} seeds within the calibrated bound {failures:?}"))
}

fn harness_sanity() -> Check {
    let start = Instant::now();
    let linear = FunctionalSpec::new(2, pw(2.0), pw(2.0)).with_boundary(std::sync::Arc::new(|x: &[f64]| x[0]));
    let problem = discretize(&linear, 16).map_err(|e| e.to_string())?;
    let m = minimize(&problem, 1e-15, 20_000).map_err(|e| e.to_string())?;
    let mut dirichlet_err: f64 = 0.0;
    for i in 0..problem.node_count() {
        dirichlet_err = dirichlet_err.max((m.nodes[i] - problem.node(i)[0]).abs());
    }

    let mixed = FunctionalSpec::new(2, pw(2.0), pw(3.0))
        .with_boundary(std::sync::Arc::new(|x: &[f64]| x[0] * x[0] - x[1] + 0.5))
        .with_theta(std::sync::Arc::new(|x: &[f64]| if x[0] < 0.5 { 1.0 } else { 0.0 }));
    let mp = discretize(&mixed, 12).map_err(|e| e.to_string())?;
    let mm = minimize(&mp, 1e-15, 20_000).map_err(|e| e.to_string())?;
    let quasi = quasi_min_check(&mp, &mm.nodes, QUASI_MIN_Q, QUASI_MIN_TRIALS, 7).map_err(|e| e.to_string())?;

    let rows = boundedness_sweep(2, &[2.0], &[2.0], &[8, 16, 32], &SweepOptions::default()).map_err(|e| e.to_string())?;
    let sups: Vec<f64> = rows.iter().map(|r| r.interior_sup).collect();
    let hi = sups.iter().copied().fold(f64::MIN, f64::max);
    let lo = sups.iter().copied().fold(f64::MAX, f64::min);
    let spread = (hi - lo) / hi.abs();
    let elapsed = start.elapsed();
    ensure(
        dirichlet_err <= DIRICHLET_TOL
            && quasi.violations == 0
            && quasi.trials == QUASI_MIN_TRIALS
            && rows.iter().all(|r| r.verdict == "admissible")
            && spread <= SWEEP_STABILITY
            && elapsed < HARNESS_BUDGET,
        format!(
            "dirichlet error {dirichlet_err:.2e}, quasi-min {}/{} violations (worst ratio {:.9}), sweep sups {sups:.5?} spread {spread:.3}, {elapsed:.2?}",
            quasi.violations, quasi.trials, quasi.worst_ratio
        ),
    )
}

fn sp_seeds(n: usize) -> Vec<SampledFunction> {
    let fields: Vec<Box<dyn Fn(&[f64]) -> f64>> = vec![
        Box::new(|x: &[f64]| x[0]),
        Box::new(|x: &[f64]| x[0] * x[1]),
        Box::new(|x: &[f64]| x[0] * x[0] - x[1] * x[1] + 0.3 * x[0]),
        Box::new(|x: &[f64]| 1.0 + x[0].powi(3) - 2.0 * x[1]),
        Box::new(norm),
        Box::new(|x: &[f64]| (norm(x) - 0.5).abs()),
        Box::new(|x: &[f64]| (1.0 - norm(x).powi(2)).max(0.0).powi(2)),
        Box::new(|x: &[f64]| (-8.0 * ((x[0] - 0.3).powi(2) + x[1].powi(2))).exp()),
        Box::new(|x: &[f64]| (0.5 - norm(x)).max(0.0)),
        Box::new(|x: &[f64]| (4.0 * x[0]).sin()),
        Box::new(|x: &[f64]| 3.0 * x[1] + x[0] * x[0]),
        Box::new(|x: &[f64]| if n == 3 { x[2] * x[0] } else { (x[0] + x[1]).powi(2) }),
    ];
    fields
        .iter()
        .map(|f| SampledFunction::radial(n, 1.0, 96, 6, &**f).unwrap().with_fd_gradient().unwrap())
        .collect()
}

fn sobolev_poincare() -> Check {
    let a = pw(1.5);
    let mut report = serde_json::Map::new();
    let mut summary = Vec::new();
    let mut ok = true;
    for n in [2usize, 3] {
        let sp = SobolevPoincare::new(&a, n).map_err(|e| e.to_string())?;
        let seeds = sp_seeds(n);
        let kappa = sp.search_kappa(&seeds, SP_DEFECT_TOL).map_err(|e| e.to_string())?;
        let Some(kappa) = kappa else {
            ok = false;
            summary.push(format!("n={n}: no kappa"));
            continue;
        };
        let mut worst = f64::INFINITY;
        for u in &seeds {
            let e = sp.evaluate(u, kappa).map_err(|e| e.to_string())?;
            worst = worst.min(e.defect / e.rhs);
            ok &= e.defect >= -SP_DEFECT_TOL * e.rhs;
        }
        summary.push(format!("n={n}: kappa {kappa}, worst relative defect {worst:.3e}"));
        report.insert(format!("n{n}"), serde_json::json!({ "a": "power:1.5", "kappa": kappa, "seeds": seeds.len(), "worst_relative_defect": worst }));
    }
    let path = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("sp_certificate.json");
    std::fs::write(&path, serde_json::to_string_pretty(&report).unwrap()).map_err(|e| e.to_string())?;
    ensure(ok, format!("{}, certificate {}", summary.join("; "), path.display()))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 9] = [
        ("conjugation suite", conjugation_suite),
        ("sobolev conjugate slopes", sobolev_slopes),
        ("inverse product and shift constants", inverse_product_and_shift),
        ("admissibility table", admissibility_table),
        ("hole filling", hole_filling_brute_force),
        ("de giorgi decay", de_giorgi_decay),
        ("optimized cutoff", optimized_cutoff_cases),
        ("harness sanity", harness_sanity),
        ("sobolev-poincare", sobolev_poincare),
    ];
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    let mut ran = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        if !only.is_empty() && !only.contains(&(i + 1)) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        match outcome {
            Ok(detail) => println!("criterion {} [{name}]: PASS ({detail}) in {elapsed:.2?}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} [{name}]: FAIL ({detail}) in {elapsed:.2?}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", ran - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
