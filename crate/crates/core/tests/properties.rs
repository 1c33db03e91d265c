use std::sync::Arc;

use orlicz_growth::admissibility::{analyze, power_log_thresholds, GrowthSpec, Outcome};
use orlicz_growth::degiorgi::{iterate, level_energy, schedule, DecayParams};
use orlicz_growth::harness::{convexity_witness, discretize, growth_envelope, minimize, FunctionalSpec};
use orlicz_growth::norms::{holder_defect, luxemburg_norm, modular};
use orlicz_growth::sampled::SampledFunction;
use orlicz_growth::sobolev::{h_n, regularize_near_zero, sobolev_conjugate};
use orlicz_growth::young::{check_dominates, log_grid, DominationMode};
use orlicz_growth::YoungFunction;
use proptest::prelude::*;

fn pw(p: f64) -> YoungFunction {
    YoungFunction::power(p).unwrap()
}

fn young() -> impl Strategy<Value = YoungFunction> {
    prop_oneof![
        (1.1f64..6.0).prop_map(pw),
        (1.5f64..4.0, 0.0f64..2.0).prop_map(|(p, a)| YoungFunction::power_log(p, a).unwrap()),
        (0.5f64..2.0, 1.5f64..4.0).prop_map(|(t1, p)| YoungFunction::linear_splice(t1, pw(p)).unwrap()),
    ]
}

fn field(values: &[f64]) -> SampledFunction {
    let m = values.len();
    let vals = values.to_vec();
    SampledFunction::cartesian(&[0.0], &[1.0], &[m], &move |x: &[f64]| {
        let i = ((x[0] * m as f64) as usize).min(m - 1);
        vals[i]
    })
    .unwrap()
}

fn radial_seed(c: [f64; 4]) -> SampledFunction {
    let f = move |x: &[f64]| c[0] + c[1] * x[0] + c[2] * x[0] * x[1] + c[3] * (x[0] * x[0] + x[1] * x[1]);
    SampledFunction::radial(2, 1.0, 48, 4, &f).unwrap().with_gradient(&move |x: &[f64]| {
        vec![c[1] + c[2] * x[1] + 2.0 * c[3] * x[0], c[2] * x[0] + 2.0 * c[3] * x[1]]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn conjugate_sandwich(y in young(), e in -6.0f64..6.0) {
        let s = 10f64.powf(e);
        let conj = y.conjugate().unwrap();
        let prod = y.inverse(s).unwrap() * conj.inverse(s).unwrap();
        prop_assert!(prod >= s * (1.0 - 1e-9), "s={s} prod={prod}");
        prop_assert!(prod <= 2.0 * s + 1e-6 * s, "s={s} prod={prod}");
    }

    #[test]
    fn certificates_survive_dense_reprobe(p in 1.2f64..5.0, gap in 0.0f64..2.0) {
        let a = pw(p + gap);
        let b = pw(p);
        let cert = check_dominates(&a, &b, DominationMode::NearInfinity);
        prop_assert!(cert.is_some());
        let cert = cert.unwrap();
        for t in log_grid(cert.t0.max(1e-12), cert.horizon, 200) {
            prop_assert!(b.value(t) <= a.value(cert.c * t) * (1.0 + 1e-12), "t={t}");
        }
    }

    #[test]
    fn h_round_trip(p in 1.2f64..2.8, e in -3.0f64..3.0) {
        let s = 10f64.powf(e);
        let a = regularize_near_zero(&pw(p), &[]).unwrap();
        let sc = sobolev_conjugate(&a, 3).unwrap();
        let h = h_n(&a, 3, s).unwrap();
        let back = sc.h_inverse(h).unwrap();
        prop_assert!((back - s).abs() <= 1e-6 * s, "s={s} back={back}");
    }

    #[test]
    fn analyze_is_monotone_in_b(p in 1.2f64..1.8, q in 2.0f64..5.0, shrink in 0.0f64..1.0) {
        let n = 3;
        let accept = |q: f64| analyze(&GrowthSpec::new(pw(p), pw(q), n)).unwrap().outcome == Outcome::Admissible;
        let smaller = p.max(1.0 + shrink * (q - 1.0));
        if accept(q) {
            prop_assert!(accept(smaller.max(p)), "q={q} smaller={smaller}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn norm_and_modular_agree_on_the_unit_ball(y in young(), vals in prop::collection::vec(-3.0f64..3.0, 8..40)) {
        let u = field(&vals);
        let m = modular(&y, &u, false).unwrap();
        let norm = luxemburg_norm(&y, &u).unwrap().norm;
        prop_assert_eq!(m <= 1.0, norm <= 1.0 + 1e-9, "modular {} norm {}", m, norm);
    }

    #[test]
    fn norm_is_positively_homogeneous(y in young(), vals in prop::collection::vec(-3.0f64..3.0, 8..40), c in prop::sample::select(vec![0.1, 2.0, 10.0, -2.0])) {
        let u = field(&vals);
        let base = luxemburg_norm(&y, &u).unwrap().norm;
        let scaled = luxemburg_norm(&y, &u.scaled(c)).unwrap().norm;
        prop_assert!((scaled - c.abs() * base).abs() <= 1e-9 * (c.abs() * base).max(1e-300), "{scaled} vs {}", c.abs() * base);
    }

    #[test]
    fn thresholds_reduce_to_powers(n in 3usize..7, frac in 0.05f64..0.95) {
        let p = 1.0 + frac * (n as f64 - 2.0);
        let t = power_log_thresholds(n, p, 0.0).unwrap();
        let d = n as f64 - 1.0;
        prop_assert_eq!(t.b_exponent, Some(d * p / (d - p)));
        prop_assert_eq!(t.b_log_exponent, Some(0.0));
    }

    #[test]
    fn schedule_matches_closed_form(k in 0.01f64..1e6, steps in 1usize..80) {
        let s = schedule(k, steps);
        prop_assert_eq!(s.len(), steps + 1);
        for (l, (kl, sl)) in s.iter().enumerate() {
            let h = 2f64.powi(-(l as i32 + 1));
            prop_assert_eq!(*kl, k - k * h);
            prop_assert_eq!(*sl, 0.5 + 0.5 * h);
        }
        for w in s.windows(2) {
            prop_assert!(w[1].0 >= w[0].0 && w[1].1 <= w[0].1);
        }
    }

    #[test]
    fn decay_below_threshold(n in 2usize..7, q in 1.1f64..12.0, l in 1.0f64..64.0, c2 in 1.0f64..16.0, frac in 1e-6f64..1.0) {
        let params = DecayParams::with_constants(n, q, l, c2, 1.0).unwrap();
        let trace = iterate(params.eps0() * frac, &params, 1.0, 60).unwrap();
        prop_assert!(trace.verdict.is_decayed(), "{:?}", trace.verdict);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn holder_defect_is_nonnegative(y in young(), u in prop::collection::vec(-3.0f64..3.0, 16), v in prop::collection::vec(-3.0f64..3.0, 16)) {
        let d = holder_defect(&field(&u), &field(&v), &y).unwrap();
        prop_assert!(d.defect >= -1e-9 * d.bound.max(1e-300), "{d:?}");
    }

    #[test]
    fn level_energy_is_monotone(c in prop::array::uniform4(-2.0f64..2.0), k1 in 0.0f64..2.0, dk in 0.0f64..1.0, r1 in 0.1f64..0.9, dr in 0.0f64..0.1) {
        let u = radial_seed(c);
        let a = pw(2.0);
        let base = level_energy(&u, &a, k1, r1).unwrap().value;
        prop_assert!(level_energy(&u, &a, k1 + dk, r1).unwrap().value <= base);
        prop_assert!(level_energy(&u, &a, k1, r1 + dr).unwrap().value >= base);
    }

    #[test]
    fn harness_energy_is_convex_and_enveloped(p in 1.5f64..3.0, gap in 0.0f64..1.5, seed in 0u64..1000) {
        let spec = FunctionalSpec::new(2, pw(p), pw(p + gap))
            .with_boundary(Arc::new(|x: &[f64]| x[0] - 0.5 * x[1]))
            .with_theta(Arc::new(|x: &[f64]| x[1]));
        let problem = discretize(&spec, 8).unwrap();
        prop_assert!(convexity_witness(&problem, 10, seed).max_defect <= 1e-9);
        let m = minimize(&problem, 1e-10, 5000).unwrap();
        for w in m.energy_trace.windows(2) {
            prop_assert!(w[1] <= w[0]);
        }
        prop_assert_eq!(growth_envelope(&problem, &m.nodes, 1.0).violations, 0);
    }
}

#[test]
fn indicator_norms_match_the_inverse() {
    let ys = [pw(1.5), pw(2.0), YoungFunction::power_log(2.0, 1.0).unwrap()];
    for m in [1e-3, 0.25, 1.0, 10.0] {
        let u = SampledFunction::cartesian(&[0.0], &[10.0], &[10_000], &move |x: &[f64]| if x[0] < m { 1.0 } else { 0.0 }).unwrap();
        for y in &ys {
            let norm = luxemburg_norm(y, &u).unwrap().norm;
            let exact = 1.0 / y.inverse(1.0 / m).unwrap();
            assert!((norm - exact).abs() <= 1e-8 * exact, "m={m} {}: {norm} vs {exact}", y.describe());
        }
    }
}
