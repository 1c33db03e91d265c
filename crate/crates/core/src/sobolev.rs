//! The transform `H_d(s) = (int_0^s (t/A(t))^{1/(d-1)} dt)^{(d-1)/d}`, the
//! Sobolev conjugate `A_d = A o H_d^{-1}`, convergence profiles of the
//! integrals `int (t/A)^m`, and the near-zero and global splices that make a
//! growth specification fit the iteration.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::{integrate, integrate_from_zero};
use crate::young::{
    check_dominates, log_grid, ConvexTable, DominationMode, HeadKind, Knot, Piece, TableTail, TailKind, YoungFunction,
};

const T_RESOLUTION: f64 = 64.0 * f64::EPSILON;
const QUAD_TOL: f64 = 1e-12;
const TABLE_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Convergence {
    Converges,
    Diverges,
}

/// Integral over one window of a nested family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PartialValue {
    pub a: f64,
    pub b: f64,
    pub value: f64,
    pub clipped: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntegralProfile {
    pub exponent_m: f64,
    pub at_zero: Convergence,
    pub at_infinity: Convergence,
    /// Classification read off the doubling windows alone.
    pub numeric_at_zero: Convergence,
    pub numeric_at_infinity: Convergence,
    /// Fitted log2 growth rate of doubling-window contributions near each end.
    pub rate_at_zero: f64,
    pub rate_at_infinity: f64,
    /// Integrals over `[2^-j, 2^j]`, nondecreasing in `j`.
    pub partial_values: Vec<PartialValue>,
}

fn integrand(a: &YoungFunction, m: f64) -> impl Fn(f64) -> f64 + '_ {
    move |t: f64| {
        if t <= 0.0 {
            return 0.0;
        }
        let v = a.value(t);
        if v <= 0.0 {
            f64::INFINITY
        } else {
            (t / v).powf(m)
        }
    }
}

fn zero_rule(head: HeadKind, m: f64) -> Convergence {
    match head {
        HeadKind::Power(p0) if (p0 - 1.0) * m < 1.0 => Convergence::Converges,
        _ => Convergence::Diverges,
    }
}

fn infinity_rule(tail: TailKind, m: f64) -> Convergence {
    match tail {
        TailKind::Super | TailKind::Infinite => Convergence::Converges,
        TailKind::Power { p, alpha } => {
            let e = (p - 1.0) * m;
            if e > 1.0 + 1e-12 || ((e - 1.0).abs() <= 1e-12 && alpha * m > 1.0) {
                Convergence::Converges
            } else {
                Convergence::Diverges
            }
        }
    }
}

fn fit_rate(values: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = values
        .iter()
        .enumerate()
        .filter(|(_, v)| **v > 0.0 && v.is_finite())
        .map(|(i, v)| (i as f64, v.log2()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Convergence profile of `int (t/A(t))^m dt` at both ends.
///
/// Doubling windows cover `[1e-8, 1e8]`; the final classification uses the
/// exact rules for the function's asymptotic class, and the window-based
/// estimate is kept alongside for auditing.
pub fn integral_profile(a: &YoungFunction, m: f64) -> Result<IntegralProfile> {
    if !(m > 0.0) || !m.is_finite() {
        return Err(Error::Domain(format!("exponent m must be positive, got {m}")));
    }
    let f = integrand(a, m);
    let kmax: i32 = 27;
    let mut windows = Vec::with_capacity(2 * kmax as usize);
    for k in -kmax..kmax {
        let lo = 2f64.powi(k);
        let q = integrate(&f, lo, 2.0 * lo, 1e-9);
        windows.push((lo, q.value, q.overflow));
    }
    let mut partial_values = Vec::with_capacity(kmax as usize);
    for j in 1..=kmax {
        let lo_idx = (kmax - j) as usize;
        let hi_idx = (kmax + j) as usize;
        let slice = &windows[lo_idx..hi_idx];
        let value: f64 = slice.iter().map(|w| w.1).sum();
        let clipped = slice.iter().any(|w| w.2);
        partial_values.push(PartialValue { a: 2f64.powi(-j), b: 2f64.powi(j), value, clipped });
    }
    let per_two_decades = 7;
    let tail_vals: Vec<f64> = windows[windows.len() - per_two_decades..].iter().map(|w| w.1).collect();
    let head_vals: Vec<f64> = windows[..per_two_decades].iter().rev().map(|w| w.1).collect();
    let rate_at_infinity = fit_rate(&tail_vals);
    let rate_at_zero = fit_rate(&head_vals);
    let numeric = |r: f64| if r.is_nan() || r < -0.02 { Convergence::Converges } else { Convergence::Diverges };
    let head_infinite = windows[..per_two_decades].iter().any(|w| w.1.is_infinite() || w.2);
    Ok(IntegralProfile {
        exponent_m: m,
        at_zero: zero_rule(a.head(), m),
        at_infinity: infinity_rule(a.tail(), m),
        numeric_at_zero: if head_infinite { Convergence::Diverges } else { numeric(rate_at_zero) },
        numeric_at_infinity: numeric(rate_at_infinity),
        rate_at_zero,
        rate_at_infinity,
        partial_values,
    })
}

fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::Domain(format!("dimension must be at least 2, got {d}")));
    }
    Ok(())
}

fn require_conv0(a: &YoungFunction, d: usize) -> Result<()> {
    let m = 1.0 / (d as f64 - 1.0);
    if zero_rule(a.head(), m) == Convergence::Diverges {
        return Err(Error::Precondition(format!(
            "int_0 (t/A(t))^(1/{}) dt diverges; apply regularize_near_zero first",
            d - 1
        )));
    }
    Ok(())
}

/// `H_d(s)` by direct quadrature.
pub fn h_n(a: &YoungFunction, d: usize, s: f64) -> Result<f64> {
    check_dim(d)?;
    if !(s >= 0.0) {
        return Err(Error::Domain(format!("s must be >= 0, got {s}")));
    }
    require_conv0(a, d)?;
    if s == 0.0 {
        return Ok(0.0);
    }
    let m = 1.0 / (d as f64 - 1.0);
    let q = integrate_from_zero(integrand(a, m), s, QUAD_TOL);
    Ok(q.value.powf((d as f64 - 1.0) / d as f64))
}

/// Table of `H_d` together with the conjugate `A_d` it induces.
#[derive(Clone, Debug)]
pub struct SobolevConjugate {
    pub base: YoungFunction,
    pub dim: usize,
    /// Pairs `(s, H_d(s))`, strictly increasing in both entries.
    pub h_table: Vec<(f64, f64)>,
    cumulative: Vec<f64>,
    pub result: YoungFunction,
}

impl SobolevConjugate {
    /// `H_d^{-1}(t)`, bracketed on the table and polished by bisection against
    /// exact partial quadrature from the nearest knot.
    pub fn h_inverse(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("t must be >= 0, got {t}")));
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        let e = (self.dim as f64 - 1.0) / self.dim as f64;
        let target = t.powf(1.0 / e);
        let m = 1.0 / (self.dim as f64 - 1.0);
        let g = integrand(&self.base, m);
        let i = self.h_table.partition_point(|p| p.1 <= t);
        let (s_lo, i_lo) = if i == 0 { (0.0, 0.0) } else { (self.h_table[i - 1].0, self.cumulative[i - 1]) };
        let mut s_hi = if i < self.h_table.len() {
            self.h_table[i].0
        } else {
            let mut hi = 2.0 * s_lo.max(1.0);
            while i_lo + integrate(&g, s_lo, hi, QUAD_TOL).value < target {
                hi *= 2.0;
                if hi > 1e300 {
                    return Err(Error::UnboundedInverse { level: t, horizon: 1e300 });
                }
            }
            hi
        };
        let mut s_a = s_lo;
        for _ in 0..200 {
            if s_hi - s_a <= 1e-14 * s_hi {
                break;
            }
            let mid = 0.5 * (s_a + s_hi);
            let val = if s_lo == 0.0 {
                integrate_from_zero(&g, mid, QUAD_TOL).value
            } else {
                i_lo + integrate(&g, s_lo, mid, QUAD_TOL).value
            };
            if val >= target {
                s_hi = mid;
            } else {
                s_a = mid;
            }
        }
        Ok(s_hi)
    }

    pub fn value(&self, t: f64) -> f64 {
        self.result.value(t)
    }
}

/// Builds `A_d = A o H_d^{-1}` as a convex table.
pub fn sobolev_conjugate(a: &YoungFunction, d: usize) -> Result<SobolevConjugate> {
    check_dim(d)?;
    require_conv0(a, d)?;
    let df = d as f64;
    let m = 1.0 / (df - 1.0);
    let e = (df - 1.0) / df;
    let g = integrand(a, m);

    let mut s_grid = log_grid(1e-20, 1e280, 16);
    s_grid.extend(a.breakpoints().into_iter().filter(|b| *b > 1e-20 && *b < 1e280));
    s_grid.sort_by(f64::total_cmp);
    s_grid.dedup_by(|x, y| (*x - *y).abs() <= 1e-14 * y.abs());

    let mut samples: Vec<(f64, f64)> = Vec::with_capacity(s_grid.len());
    let mut total = integrate_from_zero(&g, s_grid[0], QUAD_TOL).value;
    samples.push((s_grid[0], total));
    let mut overflowed = false;
    for w in s_grid.windows(2) {
        let av = a.value(w[1]);
        if av > 1e280 || !av.is_finite() {
            overflowed = true;
            break;
        }
        let q = integrate(&g, w[0], w[1], QUAD_TOL);
        total += q.value;
        samples.push((w[1], total));
        if total.powf(e) > 1e30 {
            break;
        }
    }
    let finite_domain = overflowed || infinity_rule(a.tail(), m) == Convergence::Converges;

    let knot_at = |s: f64, i_s: f64| -> Knot {
        let t = i_s.powf(e);
        let h_prime = e * i_s.powf(-1.0 / df) * g(s);
        Knot::new(t, a.value(s), a.derivative(s) / h_prime)
    };

    let mut knots = Vec::with_capacity(samples.len() * 4);
    let mut h_table = Vec::with_capacity(samples.len() * 4);
    let mut cumulative = Vec::with_capacity(samples.len() * 4);
    for (idx, w) in samples.windows(2).enumerate() {
        if idx == 0 {
            knots.push(knot_at(w[0].0, w[0].1));
            h_table.push((w[0].0, w[0].1.powf(e)));
            cumulative.push(w[0].1);
        }
        refine(a, &g, e, &knot_at, w[0], w[1], 0, &mut knots, &mut h_table, &mut cumulative);
        knots.push(knot_at(w[1].0, w[1].1));
        h_table.push((w[1].0, w[1].1.powf(e)));
        cumulative.push(w[1].1);
    }
    snap_convex(&mut knots);
    let tail = if finite_domain { TableTail::Infinite } else { TableTail::Extrapolate };
    let table = ConvexTable::new(knots, tail)?;
    Ok(SobolevConjugate { base: a.clone(), dim: d, h_table, cumulative, result: YoungFunction::table(table) })
}

#[allow(clippy::too_many_arguments)]
fn refine<G: Fn(f64) -> f64, K: Fn(f64, f64) -> Knot>(
    a: &YoungFunction,
    g: &G,
    e: f64,
    knot_at: &K,
    left: (f64, f64),
    right: (f64, f64),
    depth: u32,
    knots: &mut Vec<Knot>,
    h_table: &mut Vec<(f64, f64)>,
    cumulative: &mut Vec<f64>,
) {
    if depth >= 30 {
        return;
    }
    let sm = (left.0 * right.0).sqrt();
    if sm <= left.0 || sm >= right.0 {
        return;
    }
    let im = left.1 + integrate(g, left.0, sm, QUAD_TOL).value;
    let tm = im.powf(e);
    let exact = a.value(sm);
    let ka = knot_at(left.0, left.1);
    let kb = knot_at(right.0, right.1);
    if !(tm > ka.t && tm < kb.t) || kb.t - ka.t <= T_RESOLUTION * kb.t {
        return;
    }
    let approx = crate::young::table::segment_value(ka, kb, tm);
    let noise = T_RESOLUTION * tm * kb.slope;
    if (approx - exact).abs() <= TABLE_TOL * exact.abs() + noise + 1e-300 {
        return;
    }
    refine(a, g, e, knot_at, left, (sm, im), depth + 1, knots, h_table, cumulative);
    knots.push(knot_at(sm, im));
    h_table.push((sm, tm));
    cumulative.push(im);
    refine(a, g, e, knot_at, (sm, im), right, depth + 1, knots, h_table, cumulative);
}

fn snap_convex(knots: &mut Vec<Knot>) {
    knots.dedup_by(|x, y| x.t <= y.t);
    for i in 1..knots.len() {
        if knots[i].value < knots[i - 1].value {
            knots[i].value = knots[i - 1].value;
        }
        if knots[i].slope < knots[i - 1].slope {
            knots[i].slope = knots[i - 1].slope;
        }
    }
    for i in 0..knots.len() {
        let left = if i > 0 { (knots[i].value - knots[i - 1].value) / (knots[i].t - knots[i - 1].t) } else { 0.0 };
        let right = if i + 1 < knots.len() {
            (knots[i + 1].value - knots[i].value) / (knots[i + 1].t - knots[i].t)
        } else {
            f64::INFINITY
        };
        knots[i].slope = knots[i].slope.clamp(left.min(right), right.max(left));
    }
}

/// Linear splice of `A` below `t1 = max(1, thresholds)`.
pub fn regularize_near_zero(a: &YoungFunction, thresholds: &[f64]) -> Result<YoungFunction> {
    let t1 = thresholds.iter().copied().fold(1.0_f64, f64::max);
    if a.value(t1) <= 0.0 {
        return Err(Error::Degenerate(format!("A vanishes at the splice point t1 = {t1}")));
    }
    YoungFunction::linear_splice(t1, a.clone())
}

/// Smallest `L = 2^k`, `k <= 40`, with `t^{d/(d-1)} <= L A_d(t)` on `[0, 1e4]`.
pub fn lower_power_constant(a_d: &YoungFunction, d: usize) -> Option<f64> {
    let expo = d as f64 / (d as f64 - 1.0);
    let probes = log_grid(1e-8, 1e4, 20);
    (0..=40).map(|k| 2f64.powi(k)).find(|l| probes.iter().all(|&t| t.powf(expo) <= l * a_d.value(t) * (1.0 + 1e-12)))
}

/// Output of the global-domination splice.
#[derive(Clone, Debug)]
pub struct LiftedBound {
    pub function: YoungFunction,
    pub t2: f64,
    pub t3: f64,
    /// Constant with `B_hat(t) <= target(l_hat t)` for every `t >= 0`.
    pub l_hat: f64,
}

/// Replaces `B` below `t3` by `target` on `[0, t2)` and a convex affine bridge
/// on `[t2, t3]`, so that a near-infinity bound `B(t) <= target(L t)` for
/// `t >= t0` becomes global.
pub fn lift_global_bound(b: &YoungFunction, target: &YoungFunction, l: f64, t0: f64) -> Result<LiftedBound> {
    if !(l >= 1.0) || !(t0 >= 0.0) {
        return Err(Error::Domain(format!("need L >= 1 and t0 >= 0, got L = {l}, t0 = {t0}")));
    }
    let probes = log_grid(t0.max(1e-6), crate::young::HORIZON, 20);
    if !probes.iter().all(|&t| b.value(t) <= target.value(l * t) * (1.0 + 1e-12)) {
        return Err(Error::Precondition(format!(
            "no near-infinity certificate B(t) <= target({l} t) for t >= {t0}"
        )));
    }
    let start = t0.max(1.0);
    let k0 = start.log2().ceil() as i32;
    for k in k0..k0 + 60 {
        let t2 = 2f64.powi(k);
        let left_slope = left_derivative(target, t2);
        let v2 = target.value(t2);
        for j in 1..=40 {
            let t3 = t2 * 2f64.powi(j);
            let v3 = b.value(t3);
            if !(v3 > v2) || !v3.is_finite() {
                continue;
            }
            let slope = (v3 - v2) / (t3 - t2);
            if slope < left_slope * (1.0 - 1e-12) || slope > b.derivative(t3) * (1.0 + 1e-12) {
                continue;
            }
            let pieces = vec![
                (0.0, Piece::Function(target.clone())),
                (t2, Piece::Affine { t0: t2, v0: v2, slope }),
                (t3, Piece::Function(b.clone())),
            ];
            let function = YoungFunction::glued(pieces, crate::young::DomainNote::NearInfinity { splice: t3 });
            let l_hat = (l * t3 / t2).max(1.0);
            let lifted = LiftedBound { function, t2, t3, l_hat };
            if verify_global(&lifted.function, target, l_hat) {
                return Ok(lifted);
            }
            if let Some(cert) = check_dominates(target, &lifted.function, DominationMode::Global) {
                return Ok(LiftedBound { l_hat: cert.c.max(1.0), ..lifted });
            }
        }
    }
    Err(Error::Degenerate("no convex bridge found for the global splice".into()))
}

fn left_derivative(y: &YoungFunction, t: f64) -> f64 {
    let h = t * 1e-9;
    (y.value(t) - y.value(t - h)) / h
}

fn verify_global(bh: &YoungFunction, target: &YoungFunction, l_hat: f64) -> bool {
    let probes = log_grid(1e-6, crate::young::HORIZON, 200);
    probes.iter().all(|&t| bh.value(t) <= target.value(l_hat * t) * (1.0 + 1e-12))
}

/// Smallest `c` on the probe grid with `A(t) <= A_d(k t) + c`.
pub fn lemma_shift_constant(a: &YoungFunction, a_d: &YoungFunction, k: f64) -> f64 {
    let mut probes = log_grid(1e-6, crate::young::HORIZON, 20);
    probes.push(0.0);
    probes.iter().map(|&t| (a.value(t) - a_d.value(k * t)).max(0.0)).fold(0.0, f64::max)
}

/// Largest value of `t^{1/n'} / (Atilde^{-1}(t) A_d^{-1}(t))` over `[1e-2, 1e6]`.
pub fn inverse_product_ratio(conj: &YoungFunction, a_d: &YoungFunction, d: usize) -> Result<f64> {
    let expo = (d as f64 - 1.0) / d as f64;
    let mut worst: f64 = 0.0;
    for t in log_grid(1e-2, 1e6, 20) {
        let r = t.powf(expo) / (conj.inverse(t)? * a_d.inverse(t)?);
        worst = worst.max(r);
    }
    Ok(worst)
}

/// Least-squares slope of `log A` against `log t` on `[lo, hi]`.
pub fn log_log_slope(y: &YoungFunction, lo: f64, hi: f64) -> f64 {
    let pts: Vec<(f64, f64)> = log_grid(lo, hi, 20).into_iter().map(|t| (t.ln(), y.value(t).ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pw(p: f64) -> YoungFunction {
        YoungFunction::power(p).unwrap()
    }

    fn closed_h(n: f64, p: f64, s: f64) -> f64 {
        ((n - 1.0) / (n - p)).powf((n - 1.0) / n) * s.powf((n - p) / n)
    }

    #[test]
    fn h_closed_form() {
        let a = pw(2.0);
        assert!((h_n(&a, 3, 1.0).unwrap() - 2f64.powf(2.0 / 3.0)).abs() < 1e-8);
        assert!((h_n(&a, 3, 8.0).unwrap() - 2.0 * 2f64.powf(2.0 / 3.0)).abs() < 1e-8);
        assert_eq!(h_n(&a, 3, 0.0).unwrap(), 0.0);
        assert!((h_n(&pw(1.5), 4, 3.0).unwrap() - closed_h(4.0, 1.5, 3.0)).abs() < 1e-9);
    }

    #[test]
    fn conv0_violation_names_regularization() {
        let err = h_n(&pw(3.0), 3, 1.0).unwrap_err().to_string();
        assert!(err.contains("regularize_near_zero"), "{err}");
    }

    #[test]
    fn profiles_match_examples() {
        let a = pw(2.0);
        assert_eq!(integral_profile(&a, 0.5).unwrap().at_infinity, Convergence::Diverges);
        assert_eq!(integral_profile(&a, 1.0).unwrap().at_infinity, Convergence::Diverges);
        let p = integral_profile(&pw(4.0), 1.0).unwrap();
        assert_eq!(p.at_infinity, Convergence::Converges);
        assert_eq!(p.numeric_at_infinity, Convergence::Converges);
        assert!(p.partial_values.windows(2).all(|w| w[1].value >= w[0].value));
    }

    #[test]
    fn conjugate_point_check() {
        let sc = sobolev_conjugate(&pw(2.0), 3).unwrap();
        let t = 2f64.powf(2.0 / 3.0);
        assert!((sc.value(t) - 1.0).abs() < 1e-8);
        assert!((sc.h_inverse(t).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn power_slopes() {
        for &(n, p) in &[(3usize, 1.5), (3, 2.0), (4, 2.0), (4, 3.0)] {
            let sc = sobolev_conjugate(&pw(p), n).unwrap();
            let slope = log_log_slope(&sc.result, 10.0, 1e4);
            let nf = n as f64;
            assert!((slope - nf * p / (nf - p)).abs() < 1e-3, "n={n} p={p} slope={slope}");
        }
    }

    #[test]
    fn splice_examples() {
        let r = regularize_near_zero(&pw(3.0), &[1.0]).unwrap();
        assert_eq!(r.value(0.5), 0.5);
        assert_eq!(r.value(2.0), 8.0);
        let rn = sobolev_conjugate(&r, 3).unwrap();
        let l = lower_power_constant(&rn.result, 3).unwrap();
        assert!(l <= 2f64.powi(40));
    }

    #[test]
    fn h_round_trip() {
        let sc = sobolev_conjugate(&regularize_near_zero(&pw(2.5), &[]).unwrap(), 3).unwrap();
        for s in log_grid(1e-3, 1e3, 3) {
            let h = h_n(&sc.base, 3, s).unwrap();
            let back = sc.h_inverse(h).unwrap();
            assert!((back - s).abs() <= 1e-6 * s, "s={s} back={back}");
        }
    }
}
