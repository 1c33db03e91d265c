use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

/// Relative slack used when comparing both sides of the grid inequalities.
pub const GRID_SLACK: f64 = 1e-12;

/// A pair `r < s` at which an inequality fails.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub r: f64,
    pub s: f64,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridCheck {
    pub pairs: usize,
    pub witness: Option<Witness>,
}

impl GridCheck {
    pub fn holds(&self) -> bool {
        self.witness.is_none()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HoleFilling {
    pub c: f64,
    /// Ratio of consecutive radii in the dyadic chain that attains `c`.
    pub lambda: f64,
    pub theta: f64,
    pub a: f64,
    pub b: f64,
    pub alpha: f64,
    pub hypothesis: GridCheck,
    pub conclusion: GridCheck,
}

impl HoleFilling {
    /// `c ((s - r)^{-alpha} a + b)`.
    pub fn bound(&self, r: f64, s: f64) -> f64 {
        self.c * (tail(self.a, self.alpha, s - r) + self.b)
    }
}

fn tail(a: f64, alpha: f64, gap: f64) -> f64 {
    if a == 0.0 { 0.0 } else { a * gap.powf(-alpha) }
}

/// `c(alpha, theta)` together with the minimising `lambda`: the dyadic radii
/// `r_i = r + (1 - lambda) lambda^i (s - r)` give
/// `Z(r) <= (1-lambda)^{-alpha} / (1 - theta lambda^{-alpha}) (s-r)^{-alpha} a + b / (1 - theta)`.
pub fn hole_filling_constant(theta: f64, alpha: f64) -> Result<(f64, f64)> {
    if !(0.0..1.0).contains(&theta) {
        return Err(Error::Domain(format!("theta must lie in [0, 1), got {theta}")));
    }
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::Domain(format!("alpha must be positive, got {alpha}")));
    }
    let g = |lam: f64| (1.0 - lam).powf(-alpha) / (1.0 - theta * lam.powf(-alpha));
    let lo0 = theta.powf(1.0 / alpha);
    let (mut lo, mut hi) = (lo0, 1.0);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let (mut f1, mut f2) = (g(x1), g(x2));
    for _ in 0..200 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = g(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = g(x2);
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    let lambda = if f1 <= f2 { x1 } else { x2 };
    let c = g(lambda).max(1.0 / (1.0 - theta));
    Ok((c, lambda))
}

fn pair_check(xs: &[f64], zs: &[f64], rhs: impl Fn(f64, f64, f64) -> f64 + Sync) -> GridCheck {
    let m = xs.len();
    let witness = (0..m)
        .into_par_iter()
        .filter_map(|i| {
            (i + 1..m).find_map(|j| {
                let (lhs, r) = (zs[i], rhs(xs[i], xs[j], zs[j]));
                (lhs > r + GRID_SLACK * lhs.abs().max(r.abs())).then_some(Witness { r: xs[i], s: xs[j], lhs, rhs: r })
            })
        })
        .find_first(|_| true);
    GridCheck { pairs: m * (m - 1) / 2, witness }
}

/// Checks `Z(r) <= theta Z(s) + (s-r)^{-alpha} a + b` on all grid pairs of
/// `[rho, sigma]` and, with the computed `c`, the conclusion
/// `Z(r) <= c ((s-r)^{-alpha} a + b)`.
#[allow(clippy::too_many_arguments)]
pub fn hole_filling(
    z: &(dyn Fn(f64) -> f64 + Sync),
    rho: f64,
    sigma: f64,
    theta: f64,
    a: f64,
    b: f64,
    alpha: f64,
    grid_points: usize,
) -> Result<HoleFilling> {
    if !(rho < sigma) || !rho.is_finite() || !sigma.is_finite() {
        return Err(Error::Domain(format!("need rho < sigma, got [{rho}, {sigma}]")));
    }
    if !(a >= 0.0 && b >= 0.0) {
        return Err(Error::Domain("a and b must be >= 0".into()));
    }
    if grid_points < 2 {
        return Err(Error::Domain("verification grid needs at least two points".into()));
    }
    let (c, lambda) = hole_filling_constant(theta, alpha)?;
    let xs: Vec<f64> = (0..grid_points).map(|i| rho + (sigma - rho) * i as f64 / (grid_points - 1) as f64).collect();
    let zs: Vec<f64> = xs.iter().map(|x| z(*x)).collect();
    if zs.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("Z must be finite on the verification grid".into()));
    }
    let hypothesis = pair_check(&xs, &zs, |r, s, zs| theta * zs + tail(a, alpha, s - r) + b);
    let conclusion = pair_check(&xs, &zs, |r, s, _| c * (tail(a, alpha, s - r) + b));
    Ok(HoleFilling { c, lambda, theta, a, b, alpha, hypothesis, conclusion })
}
