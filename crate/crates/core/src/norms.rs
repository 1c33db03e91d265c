//! Modulars, Luxemburg norms, the Hölder pairing and the modular
//! Sobolev-Poincaré inequality on sampled fields.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sampled::{pairwise_sum, SampledFunction};
use crate::sobolev::{sobolev_conjugate, SobolevConjugate};
use crate::young::YoungFunction;

/// `sum_i w_i Y(|f_i|)` where `f` is the value or the gradient magnitude.
pub fn modular(y: &YoungFunction, u: &SampledFunction, use_gradient: bool) -> Result<f64> {
    let field: Vec<f64> = if use_gradient { u.gradient_magnitudes()? } else { u.values().iter().map(|v| v.abs()).collect() };
    Ok(weighted_modular(y, &field, u.weights(), 1.0))
}

fn weighted_modular(y: &YoungFunction, field: &[f64], weights: &[f64], scale: f64) -> f64 {
    let terms: Vec<f64> = field.iter().zip(weights).map(|(f, w)| if *f == 0.0 { 0.0 } else { w * y.value(f / scale) }).collect();
    pairwise_sum(&terms)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NormResult {
    pub norm: f64,
    /// Modular of `u / norm`, in `[1 - 1e-9, 1]` for continuous modulars.
    pub modular: f64,
}

/// Luxemburg norm `inf { lambda : sum w Y(|u|/lambda) <= 1 }` by bracketing and bisection.
pub fn luxemburg_norm(y: &YoungFunction, u: &SampledFunction) -> Result<NormResult> {
    let field: Vec<f64> = u.values().iter().map(|v| v.abs()).collect();
    luxemburg_of(y, &field, u.weights())
}

fn luxemburg_of(y: &YoungFunction, field: &[f64], weights: &[f64]) -> Result<NormResult> {
    if field.iter().all(|f| *f == 0.0) {
        return Ok(NormResult { norm: 0.0, modular: 0.0 });
    }
    let m = |lam: f64| weighted_modular(y, field, weights, lam);
    let (mut lo, mut hi);
    if m(1.0) > 1.0 {
        lo = 1.0;
        hi = 2.0;
        while m(hi) > 1.0 {
            lo = hi;
            hi *= 2.0;
            if hi > 1e12 {
                return Err(Error::UnboundedNorm);
            }
        }
    } else {
        hi = 1.0;
        lo = 0.5;
        while m(lo) <= 1.0 {
            hi = lo;
            lo *= 0.5;
            if lo < 1e-12 {
                return Err(Error::UnboundedNorm);
            }
        }
    }
    for _ in 0..200 {
        if hi - lo <= 1e-14 * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if m(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(NormResult { norm: hi, modular: m(hi) })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HolderDefect {
    pub bound: f64,
    pub pairing: f64,
    /// `bound - pairing`.
    pub defect: f64,
}

/// `2 ||u||_Y ||v||_{Y~} - sum w |u v|`, computing the conjugate.
pub fn holder_defect(u: &SampledFunction, v: &SampledFunction, y: &YoungFunction) -> Result<HolderDefect> {
    let conj = y.conjugate()?;
    holder_defect_with(u, v, y, &conj)
}

/// [`holder_defect`] with a precomputed conjugate.
pub fn holder_defect_with(u: &SampledFunction, v: &SampledFunction, y: &YoungFunction, conj: &YoungFunction) -> Result<HolderDefect> {
    if !u.same_grid(v) {
        return Err(Error::GridMismatch("Hölder pairing needs both fields on one grid".into()));
    }
    let nu = luxemburg_norm(y, u)?.norm;
    let nv = luxemburg_norm(conj, v)?.norm;
    let terms: Vec<f64> = u.values().iter().zip(v.values()).zip(u.weights()).map(|((a, b), w)| w * (a * b).abs()).collect();
    let pairing = pairwise_sum(&terms);
    let bound = 2.0 * nu * nv;
    Ok(HolderDefect { bound, pairing, defect: bound - pairing })
}

/// Both sides of the modular Sobolev-Poincaré inequality
/// `sum A_n(|u - u_B| / (kappa M^{1/n})) <= M`, `M = sum A(|grad u|)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpEvaluation {
    pub rhs: f64,
    pub lhs: f64,
    pub defect: f64,
}

/// Caches the conjugate `A_n` for repeated Sobolev-Poincaré evaluations.
#[derive(Clone, Debug)]
pub struct SobolevPoincare {
    pub a: YoungFunction,
    pub n: usize,
    pub conjugate: SobolevConjugate,
}

impl SobolevPoincare {
    pub fn new(a: &YoungFunction, n: usize) -> Result<Self> {
        Ok(Self { a: a.clone(), n, conjugate: sobolev_conjugate(a, n)? })
    }

    pub fn evaluate(&self, u: &SampledFunction, kappa: f64) -> Result<SpEvaluation> {
        if u.dim() != self.n {
            return Err(Error::GridMismatch(format!("field lives in dimension {}, inequality in {}", u.dim(), self.n)));
        }
        if !(kappa > 0.0) {
            return Err(Error::Domain(format!("kappa must be positive, got {kappa}")));
        }
        let rhs = modular(&self.a, u, true)?;
        let mean = u.mean();
        let dev: Vec<f64> = u.values().iter().map(|v| (v - mean).abs()).collect();
        let spread = dev.iter().copied().fold(0.0, f64::max);
        if rhs == 0.0 {
            if spread <= 1e-14 * mean.abs().max(1.0) {
                return Ok(SpEvaluation { rhs: 0.0, lhs: 0.0, defect: 0.0 });
            }
            return Err(Error::DivisionGuard("gradient modular vanishes for a non-constant field".into()));
        }
        let scale = kappa * rhs.powf(1.0 / self.n as f64);
        let lhs = weighted_modular(&self.conjugate.result, &dev, u.weights(), scale);
        Ok(SpEvaluation { rhs, lhs, defect: rhs - lhs })
    }

    /// Smallest `kappa = 2^k / 8`, `k = 0..=60`, with every defect at least `-tol * rhs`.
    pub fn search_kappa(&self, seeds: &[SampledFunction], tol: f64) -> Result<Option<f64>> {
        for k in 0..=60 {
            let kappa = 2f64.powi(k) / 8.0;
            let mut ok = true;
            for u in seeds {
                let e = self.evaluate(u, kappa)?;
                if e.defect < -tol * e.rhs.max(f64::MIN_POSITIVE) {
                    ok = false;
                    break;
                }
            }
            if ok {
                return Ok(Some(kappa));
            }
        }
        Ok(None)
    }
}

/// One-shot defect `rhs - lhs` of the Sobolev-Poincaré inequality.
pub fn sobolev_poincare_defect(u: &SampledFunction, a: &YoungFunction, n: usize, kappa: f64) -> Result<f64> {
    Ok(SobolevPoincare::new(a, n)?.evaluate(u, kappa)?.defect)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pw(p: f64) -> YoungFunction {
        YoungFunction::power(p).unwrap()
    }

    fn unit_interval(m: usize, f: &dyn Fn(&[f64]) -> f64) -> SampledFunction {
        SampledFunction::cartesian(&[0.0], &[1.0], &[m], f).unwrap()
    }

    #[test]
    fn modular_examples() {
        assert!((modular(&pw(2.0), &unit_interval(10, &|_| 3.0), false).unwrap() - 9.0).abs() < 1e-12);
        assert_eq!(modular(&pw(2.0), &unit_interval(10, &|_| 0.0), false).unwrap(), 0.0);
        let m = modular(&pw(2.0), &unit_interval(10_000, &|x| x[0]), false).unwrap();
        assert!((m - 1.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn norm_examples() {
        let ind = unit_interval(1000, &|x| if x[0] < 0.25 { 1.0 } else { 0.0 });
        let r = luxemburg_norm(&pw(2.0), &ind).unwrap();
        assert!((r.norm - 0.5).abs() < 1e-9);
        let c = luxemburg_norm(&pw(2.0), &unit_interval(10, &|_| 3.0)).unwrap();
        assert!((c.norm - 3.0).abs() < 1e-9 * 3.0);
        assert!(c.modular <= 1.0 && c.modular >= 1.0 - 1e-9);
        assert_eq!(luxemburg_norm(&pw(2.0), &unit_interval(10, &|_| 0.0)).unwrap().norm, 0.0);
    }

    #[test]
    fn holder_zero_field() {
        let u = unit_interval(10, &|_| 0.0);
        let v = unit_interval(10, &|x| x[0]);
        let h = holder_defect(&u, &v, &pw(2.0)).unwrap();
        assert_eq!(h.defect, h.bound);
        let w = unit_interval(11, &|x| x[0]);
        assert!(matches!(holder_defect(&u, &w, &pw(2.0)), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn sp_constant_and_guard() {
        let a = crate::sobolev::regularize_near_zero(&pw(2.0), &[]).unwrap();
        let sp = SobolevPoincare::new(&a, 2).unwrap();
        let c = SampledFunction::radial(2, 1.0, 16, 4, &|_| 2.0).unwrap().with_gradient(&|_| vec![0.0, 0.0]);
        assert_eq!(sp.evaluate(&c, 1.0).unwrap().defect, 0.0);
        let bad = SampledFunction::radial(2, 1.0, 16, 4, &|x| x[0]).unwrap().with_gradient(&|_| vec![0.0, 0.0]);
        assert!(matches!(sp.evaluate(&bad, 1.0), Err(Error::DivisionGuard(_))));
    }
}
