use serde::Serialize;

use super::{log_grid, log_points, YoungFunction, HORIZON};
use crate::error::{Error, Result};

/// Sup of the elasticity `t A'(t)/A(t)` over the probe window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Delta2 {
    Finite(f64),
    Infinite,
}

impl Delta2 {
    pub fn is_finite(&self) -> bool {
        matches!(self, Delta2::Finite(_))
    }

    pub fn value(&self) -> f64 {
        match self {
            Delta2::Finite(v) => *v,
            Delta2::Infinite => f64::INFINITY,
        }
    }
}

/// Doubling diagnostic on the log grid `[max(t_from, 1e-6), 1e8]`.
///
/// Reports `Infinite` when the sup passes `1e6`, or when the elasticity keeps
/// rising without slowing down over the last two decades of the window.
pub fn delta2_index(y: &YoungFunction, t_from: f64) -> Result<Delta2> {
    if !(t_from >= 0.0) {
        return Err(Error::Domain(format!("t_from must be >= 0, got {t_from}")));
    }
    let start = t_from.max(1e-6);
    if start >= HORIZON {
        return Err(Error::Domain(format!("t_from = {t_from} lies beyond the probe horizon")));
    }
    let grid = log_grid(start, HORIZON, 20);
    let mut sup: f64 = 0.0;
    let mut values = Vec::with_capacity(grid.len());
    for &t in &grid {
        let e = y.elasticity(t);
        if e.is_nan() || y.value(t) == 0.0 {
            return Err(Error::Domain(format!("elasticity undefined at t = {t:e} (function vanishes)")));
        }
        sup = sup.max(e);
        values.push(e);
    }
    if sup > 1e6 {
        return Ok(Delta2::Infinite);
    }
    let last = grid.len() - 1;
    let two_decades = grid.iter().position(|&t| t >= HORIZON / 100.0).unwrap_or(0);
    let one_decade = grid.iter().position(|&t| t >= HORIZON / 10.0).unwrap_or(0);
    if last - two_decades >= 4 {
        let window = &values[two_decades..];
        let rising = window.windows(2).all(|w| w[1] > w[0] * (1.0 + 1e-12));
        let first_gain = values[one_decade] - values[two_decades];
        let second_gain = values[last] - values[one_decade];
        if rising && second_gain >= first_gain * (1.0 - 1e-9) {
            return Ok(Delta2::Infinite);
        }
    }
    Ok(Delta2::Finite(sup))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DominationMode {
    Global,
    NearInfinity,
}

/// Evidence for `B(t) <= A(c t)` on `[t0, horizon]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DominationCertificate {
    pub c: f64,
    pub t0: f64,
    pub mode: DominationMode,
    pub horizon: f64,
    pub witness_grid: Vec<f64>,
    /// Log-log slope of `B` minus that of `A(c .)` over the final two decades.
    pub tail_slope_excess: f64,
}

/// Tail slope excess accepted alongside a pointwise certificate.
pub const SLOPE_TOLERANCE: f64 = 1e-3;

/// Searches `c = 2^k` (`k = 0..40`) and a log grid of thresholds `t0` for
/// `B(t) <= A(c t)` on `[t0, 1e8]`.
///
/// A certificate also requires the log-log slope of `B` over the final two
/// decades to exceed that of `A(c .)` by at most [`SLOPE_TOLERANCE`], so a
/// slower-growing `A` is never certified by a large `c` on a finite window.
pub fn check_dominates(a: &YoungFunction, b: &YoungFunction, mode: DominationMode) -> Option<DominationCertificate> {
    check_dominates_within(a, b, mode, HORIZON)
}

/// [`check_dominates`] with an explicit right end of the probe window.
pub fn check_dominates_within(
    a: &YoungFunction,
    b: &YoungFunction,
    mode: DominationMode,
    horizon: f64,
) -> Option<DominationCertificate> {
    let thresholds: Vec<f64> = match mode {
        DominationMode::Global => vec![0.0],
        DominationMode::NearInfinity => (-24..=16).map(|k| 10f64.powf(k as f64 / 4.0)).filter(|t| *t < horizon / 100.0).collect(),
    };
    for k in 0..=40 {
        let c = 2f64.powi(k);
        let excess = tail_slope_excess(a, b, c, horizon);
        if excess > SLOPE_TOLERANCE {
            continue;
        }
        for &t0 in &thresholds {
            let grid = witness_grid(t0, horizon);
            if grid.iter().all(|&t| below(b.value(t), a.value(c * t))) {
                return Some(DominationCertificate { c, t0, mode, horizon, witness_grid: grid, tail_slope_excess: excess });
            }
        }
    }
    None
}

/// Log-uniform witness grid with at least 64 points and 20 per decade.
pub fn witness_grid(t0: f64, horizon: f64) -> Vec<f64> {
    let start = if t0 > 0.0 { t0 } else { 1e-8 };
    let decades = (horizon / start).log10();
    let n = ((decades * 20.0).ceil() as usize + 1).max(64);
    log_points(start, horizon, n)
}

fn below(bv: f64, av: f64) -> bool {
    bv <= av * (1.0 + 1e-12) || bv <= 1e-300
}

/// Secant slope of `ln B - ln A(c .)` over `[horizon/100, horizon]`.
pub fn tail_slope_excess(a: &YoungFunction, b: &YoungFunction, c: f64, horizon: f64) -> f64 {
    let lo = horizon / 100.0;
    let slope = |f: &dyn Fn(f64) -> f64| {
        let (v0, v1) = (f(lo), f(horizon));
        if v1.is_infinite() {
            f64::INFINITY
        } else if v0 <= 0.0 {
            if v1 > 0.0 {
                f64::INFINITY
            } else {
                0.0
            }
        } else {
            (v1 / v0).ln() / 100f64.ln()
        }
    };
    let sb = slope(&|t| b.value(t));
    let sa = slope(&|t| a.value(c * t));
    if sa.is_infinite() {
        if sb.is_infinite() {
            0.0
        } else {
            f64::NEG_INFINITY
        }
    } else {
        sb - sa
    }
}

/// `t` for `t < 1`, `t^q` otherwise.
pub fn phi_q(q: f64, t: f64) -> Result<f64> {
    if !(q >= 1.0) || !q.is_finite() {
        return Err(Error::Domain(format!("phi_q needs q >= 1, got {q}")));
    }
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("phi_q needs t >= 0, got {t}")));
    }
    Ok(if t < 1.0 { t } else { t.powf(q) })
}
