use std::sync::OnceLock;

use super::table::{segment_value, ConvexTable, Knot, TableTail};
use super::YoungFunction;
use crate::error::Result;

const GOLDEN: f64 = 0.618_033_988_749_894_9;
const REFINE_TOL: f64 = 1e-11;
const SCAN_WINDOW: usize = 8;
const NOISE_ULPS: f64 = 64.0;
const ARG_TOL: f64 = 4.0 * f64::EPSILON;

fn scan_grid() -> &'static Vec<f64> {
    static GRID: OnceLock<Vec<f64>> = OnceLock::new();
    GRID.get_or_init(|| std::iter::once(0.0).chain((-800..=800).map(|k| 10f64.powf(k as f64 / 20.0))).collect())
}

/// Evaluates the conjugate `sup_tau { tau t - A(tau) }` at one point.
///
/// Returns `(value, maximizer)`, or `None` when the supremum is infinite.
pub fn conjugate_point(y: &YoungFunction, t: f64) -> Option<(f64, f64)> {
    if t <= 0.0 {
        return Some((0.0, 0.0));
    }
    let slope_inf = y.slope_at_infinity();
    if t > slope_inf {
        return None;
    }
    let g = |tau: f64| tau * t - y.value(tau);

    let mut taus = std::borrow::Cow::Borrowed(scan_grid().as_slice());
    let (mut lo_i, mut hi_i) = (0usize, taus.len() - 1);
    while lo_i < hi_i {
        let mid = (lo_i + hi_i) / 2;
        if g(taus[mid + 1]) <= g(taus[mid]) {
            hi_i = mid;
        } else {
            lo_i = mid + 1;
        }
    }
    let mut best = 0;
    let mut best_val = 0.0;
    let window = lo_i.saturating_sub(SCAN_WINDOW)..=(lo_i + SCAN_WINDOW).min(taus.len() - 1);
    for i in window {
        let v = g(taus[i]);
        if v > best_val {
            best = i;
            best_val = v;
        }
    }
    if best == taus.len() - 1 {
        let step = 10f64.powf(0.05);
        let mut tau = taus[best];
        loop {
            let next = tau * step;
            if next > 1e300 {
                return if t == slope_inf { Some((best_val, tau)) } else { None };
            }
            let v = g(next);
            if v <= best_val {
                taus.to_mut().push(next);
                break;
            }
            best_val = v;
            tau = next;
            taus.to_mut().push(next);
            best = taus.len() - 1;
        }
    }
    let lo = if best == 0 { 0.0 } else { taus[best - 1] };
    let hi = taus[(best + 1).min(taus.len() - 1)];

    let (mut a, mut b) = (lo, hi);
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    for _ in 0..300 {
        if b - a <= ARG_TOL * b.max(1e-300) {
            break;
        }
        if gc >= gd {
            b = d;
            d = c;
            gd = gc;
            c = b - GOLDEN * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + GOLDEN * (b - a);
            gd = g(d);
        }
    }
    let tau_golden = if gc >= gd { c } else { d };

    let (mut pa, mut pb) = (lo, hi);
    let tau_slope = if y.derivative(pa) >= t {
        pa
    } else {
        for _ in 0..300 {
            if pb - pa <= ARG_TOL * pb {
                break;
            }
            let mid = 0.5 * (pa + pb);
            if y.derivative(mid) >= t {
                pb = mid;
            } else {
                pa = mid;
            }
        }
        pb
    };

    let slope_val = g(tau_slope);
    let mut arg = (tau_slope, slope_val);
    for &tau in &[tau_golden, pa, taus[best]] {
        let v = g(tau);
        let tie = 1e-13 * v.abs().max(arg.1.abs());
        if v > arg.1 + tie || ((v - arg.1).abs() <= tie && tau < arg.0 && arg.0 != tau_slope) {
            arg = (tau, v);
        }
    }
    Some((arg.1.max(0.0), arg.0))
}

pub(super) fn conjugate(y: &YoungFunction) -> Result<YoungFunction> {
    let mut grid = super::log_points(1e-6, 1e6, 512);
    if let super::YoungKind::Table(tab) = y.kind() {
        let edge = tab.derivative(tab.last_t());
        if tab.tail() == TableTail::Extrapolate && edge > grid[1] && edge < grid[grid.len() - 1] {
            grid.retain(|&t| t < edge);
            grid.push(edge);
        }
    }
    let mut knots: Vec<Knot> = Vec::with_capacity(1024);
    let mut finite_domain = false;
    for &t in &grid {
        match conjugate_point(y, t) {
            Some((v, tau)) => knots.push(Knot::new(t, v, tau)),
            None => {
                finite_domain = true;
                break;
            }
        }
    }
    if finite_domain {
        let edge = y.slope_at_infinity();
        if edge.is_finite() && knots.last().is_none_or(|k| k.t < edge) {
            if let Some((v, tau)) = conjugate_point(y, edge) {
                knots.push(Knot::new(edge, v, tau));
            }
        }
    }
    let mut refined = Vec::with_capacity(knots.len() * 2);
    for w in knots.windows(2) {
        refined.push(w[0]);
        refine(y, w[0], w[1], 0, &mut refined);
    }
    if let Some(last) = knots.last() {
        refined.push(*last);
    }
    regularize_slopes(&mut refined);
    let tail = if finite_domain { TableTail::Infinite } else { TableTail::Extrapolate };
    Ok(YoungFunction::table(ConvexTable::new(refined, tail)?))
}

fn refine(y: &YoungFunction, a: Knot, b: Knot, depth: u32, out: &mut Vec<Knot>) {
    if depth >= 40 {
        return;
    }
    let mut probes = vec![(a.t * b.t).sqrt()];
    if b.slope > a.slope {
        let cross = (b.value - a.value + a.slope * a.t - b.slope * b.t) / (a.slope - b.slope);
        probes.push(cross);
    }
    for tm in probes {
        if !(tm > a.t && tm < b.t) {
            continue;
        }
        let Some((exact, tau)) = conjugate_point(y, tm) else {
            continue;
        };
        let approx = segment_value(a, b, tm);
        let noise = NOISE_ULPS * f64::EPSILON * tm * tau;
        if (approx - exact).abs() <= REFINE_TOL * exact.abs() + noise + 1e-300 {
            continue;
        }
        let mid = Knot::new(tm, exact, tau);
        refine(y, a, mid, depth + 1, out);
        out.push(mid);
        refine(y, mid, b, depth + 1, out);
        return;
    }
}

/// Snaps rounding noise so that values and slopes are nondecreasing and
/// every slope is bracketed by the neighbouring chords.
fn regularize_slopes(knots: &mut [Knot]) {
    for i in 1..knots.len() {
        if knots[i].value < knots[i - 1].value {
            knots[i].value = knots[i - 1].value;
        }
        if knots[i].slope < knots[i - 1].slope {
            knots[i].slope = knots[i - 1].slope;
        }
    }
    for i in 0..knots.len() {
        let left = if i > 0 {
            (knots[i].value - knots[i - 1].value) / (knots[i].t - knots[i - 1].t)
        } else {
            0.0
        };
        let right = if i + 1 < knots.len() {
            (knots[i + 1].value - knots[i].value) / (knots[i + 1].t - knots[i].t)
        } else {
            f64::INFINITY
        };
        knots[i].slope = knots[i].slope.clamp(left, right.max(left));
    }
    for i in 1..knots.len() {
        if knots[i].slope < knots[i - 1].slope {
            knots[i].slope = knots[i - 1].slope;
        }
    }
}
