//! Level energies, the good-radii cutoff, hole filling and the geometric
//! decay iteration that turns small level energy into a sup bound.

mod cutoff;
mod hole;
mod iteration;

pub use cutoff::{calibrate_sphere_kappa, optimized_cutoff, CutoffConstants, CutoffRegime, CutoffReport, RadialProfile, ShellRecord};
pub use hole::{hole_filling, hole_filling_constant, GridCheck, HoleFilling, Witness};
pub use iteration::{iterate, iterate_sampled, schedule, DecayParams, DecayVerdict, IterationTrace, TraceRow, TraceSource};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sampled::{pairwise_sum, Grid, SampledFunction};
use crate::young::YoungFunction;

/// Modular threshold below which `(u - K)_+` counts as zero on `B_{1/2}`.
pub const SUP_SMALLNESS: f64 = 1e-12;
/// Largest level tried by the doubling search.
pub const MAX_LEVEL_EXPONENT: i32 = 60;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LevelEnergy {
    pub k: f64,
    pub r: f64,
    pub value: f64,
    /// Measure of `{u > k}` inside `B_r`.
    pub level_set_measure: f64,
}

fn check_covers(u: &SampledFunction, r: f64) -> Result<()> {
    let tol = 1e-12 * r.max(1.0);
    let ok = match u.grid() {
        Grid::Radial { radius, .. } => *radius >= r - tol,
        Grid::Cartesian { lower, upper, .. } => lower.iter().all(|l| *l <= -r + tol) && upper.iter().all(|h| *h >= r - tol),
        Grid::Scattered { n } => {
            let far = u.coords().chunks(*n).map(|x| x.iter().map(|v| v * v).sum::<f64>().sqrt()).fold(0.0, f64::max);
            far >= 0.99 * r
        }
    };
    if ok {
        Ok(())
    } else {
        Err(Error::GridMismatch(format!("grid does not cover the ball of radius {r}")))
    }
}

fn node_radii(u: &SampledFunction) -> Vec<f64> {
    u.coords().chunks(u.dim()).map(|x| x.iter().map(|v| v * v).sum::<f64>().sqrt()).collect()
}

/// `J(k, r) = int_{B_r} A((u-k)_+) + A(|grad (u-k)_+|)`.
pub fn level_energy(u: &SampledFunction, a: &YoungFunction, k: f64, r: f64) -> Result<LevelEnergy> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::Domain(format!("radius must lie in (0, 1], got {r}")));
    }
    if !(k >= 0.0) {
        return Err(Error::Domain(format!("level must be >= 0, got {k}")));
    }
    check_covers(u, r)?;
    let grads = u.gradient_magnitudes()?;
    let radii = node_radii(u);
    let rmax = r * (1.0 + 1e-12);
    let mut terms = vec![0.0; u.len()];
    let mut measure = vec![0.0; u.len()];
    for i in 0..u.len() {
        let v = u.values()[i];
        if radii[i] <= rmax && v > k {
            let w = u.weights()[i];
            terms[i] = w * (a.value(v - k) + a.value(grads[i]));
            measure[i] = w;
        }
    }
    Ok(LevelEnergy { k, r, value: pairwise_sum(&terms), level_set_measure: pairwise_sum(&measure) })
}

fn half_ball_excess(u: &SampledFunction, a: &YoungFunction, k: f64, radii: &[f64]) -> f64 {
    let terms: Vec<f64> = (0..u.len())
        .map(|i| {
            let v = u.values()[i];
            if radii[i] <= 0.5 * (1.0 + 1e-12) && v > k { u.weights()[i] * a.value(v - k) } else { 0.0 }
        })
        .collect();
    pairwise_sum(&terms)
}

/// Result of a doubling search for a level `K` with `(u - K)_+` negligible on `B_{1/2}`.
#[derive(Clone, Debug, Serialize)]
pub struct SupBound {
    pub k: f64,
    /// `sum_{B_{1/2}} w A((u-K)_+)` at the returned level.
    pub half_ball_modular: f64,
    pub doublings: u32,
    /// Decay trace that certifies the level, when one was requested.
    pub trace: Option<IterationTrace>,
}

fn doubling_search(u: &SampledFunction, a: &YoungFunction, start: f64) -> Result<SupBound> {
    check_covers(u, 0.5)?;
    let radii = node_radii(u);
    let mut k = start;
    let mut last = f64::INFINITY;
    for j in 0..=MAX_LEVEL_EXPONENT as u32 {
        last = half_ball_excess(u, a, k, &radii);
        if last <= SUP_SMALLNESS {
            return Ok(SupBound { k, half_ball_modular: last, doublings: j, trace: None });
        }
        if k >= 2f64.powi(MAX_LEVEL_EXPONENT) {
            break;
        }
        k *= 2.0;
    }
    Err(Error::SupBoundNotFound { largest_level: k, modular: last })
}

/// First `K = 2^j`, `j >= 0`, with `sum_{B_{1/2}} w A((u-K)_+) <= 1e-12`.
pub fn sup_bound(u: &SampledFunction, a: &YoungFunction) -> Result<SupBound> {
    doubling_search(u, a, 1.0)
}

/// Sup bound read off a decayed trace driven by the level energies of `u`.
pub fn sup_bound_from_trace(u: &SampledFunction, a: &YoungFunction, trace: &IterationTrace) -> Result<SupBound> {
    if trace.source != TraceSource::Sampled {
        return Err(Error::Precondition("trace must be driven by level energies of the field".into()));
    }
    if !trace.verdict.is_decayed() {
        return Err(Error::Precondition("trace did not decay".into()));
    }
    let mut out = doubling_search(u, a, trace.k)?;
    out.trace = Some(trace.clone());
    Ok(out)
}

/// Doubles `K` until the start energy `J(K/2, B_{3/4})` is below the smallness
/// threshold and the sampled trace decays, then reads off the sup bound.
pub fn certified_sup_bound(u: &SampledFunction, a: &YoungFunction, params: &DecayParams, steps: usize) -> Result<SupBound> {
    let mut k = 1.0;
    for _ in 0..=MAX_LEVEL_EXPONENT {
        let start = level_energy(u, a, 0.5 * k, 0.75)?;
        if start.value <= params.eps0() {
            let trace = iterate_sampled(u, a, k, params, steps)?;
            if trace.verdict.is_decayed() {
                return sup_bound_from_trace(u, a, &trace);
            }
        }
        k *= 2.0;
    }
    Err(Error::SupBoundNotFound { largest_level: k / 2.0, modular: f64::NAN })
}

/// `-u`, the field seen by the reflected integrand `f(x, -t, -xi)`.
pub fn reflect(u: &SampledFunction) -> SampledFunction {
    u.scaled(-1.0)
}

/// Bounds for `u` and `-u` on `B_{1/2}`.
pub fn two_sided_sup_bound(u: &SampledFunction, a: &YoungFunction) -> Result<(SupBound, SupBound)> {
    Ok((sup_bound(u, a)?, sup_bound(&reflect(u), a)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cone(n: usize, shells: usize) -> SampledFunction {
        SampledFunction::radial(n, 1.0, shells, 8, &|x: &[f64]| x.iter().map(|v| v * v).sum::<f64>().sqrt())
            .unwrap()
            .with_gradient(&|x: &[f64]| {
                let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                x.iter().map(|v| v / r).collect()
            })
    }

    #[test]
    fn constant_above_level_is_zero() {
        let u = SampledFunction::radial(2, 1.0, 20, 4, &|_| 3.0).unwrap().with_gradient(&|_| vec![0.0, 0.0]);
        let a = YoungFunction::power(2.0).unwrap();
        assert_eq!(level_energy(&u, &a, 3.0, 1.0).unwrap().value, 0.0);
        assert_eq!(level_energy(&u, &a, 7.0, 0.5).unwrap().value, 0.0);
    }

    #[test]
    fn constant_on_unit_measure_ball() {
        let r = 1.0 / PI.sqrt();
        let c = 1.7;
        let u = SampledFunction::radial(2, r, 50, 4, &|_| c).unwrap().with_gradient(&|_| vec![0.0, 0.0]);
        let a = YoungFunction::power(2.0).unwrap();
        let j = level_energy(&u, &a, 0.0, r).unwrap();
        assert!((j.value - c * c).abs() < 1e-12, "{}", j.value);
    }

    #[test]
    fn cone_matches_polar_integral() {
        let exact = 2.0 * PI * (0.5f64.powi(4) / 4.0 + 0.5 * 0.5f64.powi(3) / 3.0 + 0.375);
        let a = YoungFunction::power(2.0).unwrap();
        let coarse = (level_energy(&cone(2, 100), &a, 0.5, 1.0).unwrap().value - exact).abs();
        let fine = (level_energy(&cone(2, 400), &a, 0.5, 1.0).unwrap().value - exact).abs();
        assert!(fine < 1e-4 && fine <= coarse, "{coarse} {fine}");
    }

    #[test]
    fn uncovered_ball_is_rejected() {
        let u = SampledFunction::radial(2, 0.5, 10, 4, &|_| 1.0).unwrap().with_gradient(&|_| vec![0.0, 0.0]);
        let a = YoungFunction::power(2.0).unwrap();
        assert!(matches!(level_energy(&u, &a, 0.0, 0.75), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn constant_five_needs_eight() {
        let u = SampledFunction::radial(2, 1.0, 20, 4, &|_| 5.0).unwrap().with_gradient(&|_| vec![0.0, 0.0]);
        let a = YoungFunction::power(2.0).unwrap();
        let s = sup_bound(&u, &a).unwrap();
        assert_eq!(s.k, 8.0);
    }

    #[test]
    fn cone_bound_exceeds_half() {
        let a = YoungFunction::power(2.0).unwrap();
        let s = sup_bound(&cone(2, 64), &a).unwrap();
        assert!(s.k >= 0.5);
        let (up, down) = two_sided_sup_bound(&cone(2, 64), &a).unwrap();
        assert!(up.k >= 0.5 && down.k >= 1.0 - 1e-12);
    }

    #[test]
    fn reflection_is_symmetric_for_even_fields() {
        let a = YoungFunction::power(2.0).unwrap();
        let u = SampledFunction::radial(2, 1.0, 40, 6, &|x: &[f64]| 3.0 * x[0]).unwrap().with_fd_gradient().unwrap();
        let (up, down) = two_sided_sup_bound(&u, &a).unwrap();
        assert_eq!(up.k, down.k);
    }

    #[test]
    fn certified_bound_for_small_field() {
        let a = YoungFunction::power(2.0).unwrap();
        let u = cone(3, 64).scaled(1e-3);
        let params = DecayParams::new(3, 2.0, 1.0).unwrap();
        let s = certified_sup_bound(&u, &a, &params, 30).unwrap();
        assert!(s.trace.as_ref().unwrap().verdict.is_decayed());
        assert!(s.k >= 0.5e-3);
    }
}
