//! Young functions: convex growth profiles `A: [0, inf) -> [0, inf]` with
//! `A(0) = 0`, together with inverses, conjugation, doubling diagnostics and
//! the domination order `B(t) <= A(ct)`.

mod analysis;
mod conjugate;
mod spec;
pub(crate) mod table;

pub use analysis::{tail_slope_excess, witness_grid, SLOPE_TOLERANCE};
pub use analysis::{check_dominates, check_dominates_within, delta2_index, phi_q, Delta2, DominationCertificate, DominationMode};
pub use conjugate::conjugate_point;

/// Slope excess of `b` over `a` on the final two decades of the probe window.
pub fn analysis_tail_excess(a: &YoungFunction, b: &YoungFunction) -> f64 {
    tail_slope_excess(a, b, 1.0, HORIZON)
}
pub use spec::{parse_function, FunctionSpec};
pub use table::{ConvexTable, Knot, TableTail};

use crate::error::{Error, Result};

/// Right end of the probe window used for every "near infinity" check.
pub const HORIZON: f64 = 1e8;

/// Largest argument explored when inverting a Young function.
pub const INVERSE_HORIZON: f64 = 1e150;

/// Whether an analytic form is asserted on all of `[0, inf)` or only past a splice.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DomainNote {
    Global,
    NearInfinity { splice: f64 },
}

/// Growth of a Young function at infinity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TailKind {
    /// `t^p (log t)^alpha`.
    Power { p: f64, alpha: f64 },
    /// Faster than every power.
    Super,
    /// `+inf` beyond a finite point.
    Infinite,
}

/// Behaviour near the origin.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum HeadKind {
    Power(f64),
    /// Identically zero on a neighbourhood of 0.
    Flat,
}

/// Piece of a glued function: either a Young function or an affine bridge.
#[derive(Clone, Debug)]
pub enum Piece {
    Function(YoungFunction),
    Affine { t0: f64, v0: f64, slope: f64 },
}

impl Piece {
    fn value(&self, t: f64) -> f64 {
        match self {
            Piece::Function(f) => f.value(t),
            Piece::Affine { t0, v0, slope } => v0 + slope * (t - t0),
        }
    }

    fn derivative(&self, t: f64) -> f64 {
        match self {
            Piece::Function(f) => f.derivative(t),
            Piece::Affine { slope, .. } => *slope,
        }
    }
}

#[derive(Clone, Debug)]
pub enum YoungKind {
    Power { p: f64 },
    PowerLog { p: f64, alpha: f64, splice: f64 },
    ExpPoly { a: f64, splice: f64 },
    LinearSplice { t1: f64, slope: f64, base: Box<YoungFunction> },
    Table(ConvexTable),
    Scaled { inner: Box<YoungFunction>, lambda_arg: f64, lambda_val: f64 },
    /// Pieces with ascending start points; the first starts at 0.
    Glued(Vec<(f64, Piece)>),
}

/// A convex growth profile with its provenance.
#[derive(Clone, Debug)]
pub struct YoungFunction {
    kind: YoungKind,
    note: DomainNote,
}

fn positive_finite(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be positive and finite, got {x}")))
    }
}

impl YoungFunction {
    /// `t^p`, `p >= 1`.
    pub fn power(p: f64) -> Result<Self> {
        if !(p.is_finite() && p >= 1.0) {
            return Err(Error::Domain(format!("power exponent must be >= 1, got {p}")));
        }
        Ok(Self { kind: YoungKind::Power { p }, note: DomainNote::Global })
    }

    /// `t^p (log t)^alpha` near infinity, spliced linearly below the first
    /// point `e^L` past which the form is convex with elasticity at least 1.
    pub fn power_log(p: f64, alpha: f64) -> Result<Self> {
        if !(p.is_finite() && alpha.is_finite()) || p < 1.0 || (p == 1.0 && alpha < 0.0) {
            return Err(Error::Domain(format!(
                "power_log needs p > 1, or p = 1 with alpha >= 0; got p = {p}, alpha = {alpha}"
            )));
        }
        let mut l: f64 = 1.0;
        if p > 1.0 {
            let qa = p * (p - 1.0);
            let qb = alpha * (2.0 * p - 1.0);
            let qc = alpha * (alpha - 1.0);
            let disc = qb * qb - 4.0 * qa * qc;
            if disc >= 0.0 {
                l = l.max((-qb + disc.sqrt()) / (2.0 * qa));
            }
            l = l.max(-alpha / (p - 1.0));
        } else {
            l = l.max(1.0 - alpha);
        }
        let splice = l.exp();
        Ok(Self { kind: YoungKind::PowerLog { p, alpha, splice }, note: DomainNote::NearInfinity { splice } })
    }

    /// `exp(t^a) - 1`; for `a < 1` spliced linearly near 0 where the form is not convex.
    pub fn exp_poly(a: f64) -> Result<Self> {
        positive_finite("exp_poly exponent", a)?;
        if a >= 1.0 {
            return Ok(Self { kind: YoungKind::ExpPoly { a, splice: 0.0 }, note: DomainNote::Global });
        }
        let convex_x = (1.0 - a) / a;
        let elastic = |x: f64| a * x / -(-x).exp_m1();
        let mut x = convex_x.max(1e-12);
        if elastic(x) < 1.0 {
            let (mut lo, mut hi) = (x, x.max(1.0));
            while elastic(hi) < 1.0 {
                hi *= 2.0;
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if elastic(mid) >= 1.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            x = hi;
        }
        let splice = x.powf(1.0 / a);
        Ok(Self { kind: YoungKind::ExpPoly { a, splice }, note: DomainNote::NearInfinity { splice } })
    }

    /// Linear on `[0, t1)` with slope `base(t1)/t1`, equal to `base` beyond.
    pub fn linear_splice(t1: f64, base: YoungFunction) -> Result<Self> {
        positive_finite("splice point t1", t1)?;
        let v = base.value(t1);
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::Degenerate(format!("base vanishes or is infinite at the splice point t1 = {t1}")));
        }
        let slope = v / t1;
        Ok(Self {
            kind: YoungKind::LinearSplice { t1, slope, base: Box::new(base) },
            note: DomainNote::NearInfinity { splice: t1 },
        })
    }

    /// `lambda_val * inner(lambda_arg * t)`.
    pub fn scaled(inner: YoungFunction, lambda_arg: f64, lambda_val: f64) -> Result<Self> {
        positive_finite("lambda_arg", lambda_arg)?;
        positive_finite("lambda_val", lambda_val)?;
        let note = match inner.note {
            DomainNote::Global => DomainNote::Global,
            DomainNote::NearInfinity { splice } => DomainNote::NearInfinity { splice: splice / lambda_arg },
        };
        Ok(Self { kind: YoungKind::Scaled { inner: Box::new(inner), lambda_arg, lambda_val }, note })
    }

    pub fn table(table: ConvexTable) -> Self {
        Self { kind: YoungKind::Table(table), note: DomainNote::Global }
    }

    pub(crate) fn glued(pieces: Vec<(f64, Piece)>, note: DomainNote) -> Self {
        Self { kind: YoungKind::Glued(pieces), note }
    }

    pub fn kind(&self) -> &YoungKind {
        &self.kind
    }

    pub fn domain_note(&self) -> DomainNote {
        self.note
    }

    /// Checked evaluation.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::Domain(format!("Young functions are evaluated at finite t >= 0, got {t}")));
        }
        Ok(self.value(t))
    }

    /// Evaluation without argument checks; `t` must be nonnegative.
    pub fn value(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match &self.kind {
            YoungKind::Power { p } => t.powf(*p),
            YoungKind::PowerLog { p, alpha, splice } => {
                if t < *splice {
                    t * power_log_raw(*p, *alpha, *splice) / splice
                } else {
                    power_log_raw(*p, *alpha, t)
                }
            }
            YoungKind::ExpPoly { a, splice } => {
                if t < *splice {
                    t * splice.powf(*a).exp_m1() / splice
                } else {
                    t.powf(*a).exp_m1()
                }
            }
            YoungKind::LinearSplice { t1, slope, base } => {
                if t < *t1 {
                    slope * t
                } else {
                    base.value(t)
                }
            }
            YoungKind::Table(tab) => tab.value(t),
            YoungKind::Scaled { inner, lambda_arg, lambda_val } => lambda_val * inner.value(lambda_arg * t),
            YoungKind::Glued(pieces) => piece_at(pieces, t).value(t),
        }
    }

    /// Right derivative.
    pub fn derivative(&self, t: f64) -> f64 {
        let t = t.max(0.0);
        match &self.kind {
            YoungKind::Power { p } => {
                if t == 0.0 {
                    if *p == 1.0 {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    p * t.powf(p - 1.0)
                }
            }
            YoungKind::PowerLog { p, alpha, splice } => {
                if t < *splice {
                    power_log_raw(*p, *alpha, *splice) / splice
                } else {
                    let l = t.ln();
                    t.powf(p - 1.0) * l.powf(alpha - 1.0) * (p * l + alpha)
                }
            }
            YoungKind::ExpPoly { a, splice } => {
                if t < *splice {
                    splice.powf(*a).exp_m1() / splice
                } else if t == 0.0 {
                    if *a == 1.0 {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    let x = t.powf(*a);
                    a * x / t * x.exp()
                }
            }
            YoungKind::LinearSplice { t1, slope, base } => {
                if t < *t1 {
                    *slope
                } else {
                    base.derivative(t)
                }
            }
            YoungKind::Table(tab) => tab.derivative(t),
            YoungKind::Scaled { inner, lambda_arg, lambda_val } => {
                lambda_val * lambda_arg * inner.derivative(lambda_arg * t)
            }
            YoungKind::Glued(pieces) => piece_at(pieces, t).derivative(t),
        }
    }

    /// `t A'(t) / A(t)`, computed in closed form where available.
    pub fn elasticity(&self, t: f64) -> f64 {
        match &self.kind {
            YoungKind::Power { p } => *p,
            YoungKind::PowerLog { p, alpha, splice } => {
                if t < *splice {
                    1.0
                } else {
                    p + alpha / t.ln()
                }
            }
            YoungKind::ExpPoly { a, splice } => {
                if t < *splice {
                    1.0
                } else {
                    let x = t.powf(*a);
                    if x < 1e-300 {
                        *a
                    } else {
                        a * x / -(-x).exp_m1()
                    }
                }
            }
            YoungKind::LinearSplice { t1, base, .. } => {
                if t < *t1 {
                    1.0
                } else {
                    base.elasticity(t)
                }
            }
            YoungKind::Scaled { inner, lambda_arg, .. } => inner.elasticity(lambda_arg * t),
            _ => {
                let v = self.value(t);
                t * self.derivative(t) / v
            }
        }
    }

    /// Asymptotic growth class at infinity.
    pub fn tail(&self) -> TailKind {
        match &self.kind {
            YoungKind::Power { p } => TailKind::Power { p: *p, alpha: 0.0 },
            YoungKind::PowerLog { p, alpha, .. } => TailKind::Power { p: *p, alpha: *alpha },
            YoungKind::ExpPoly { .. } => TailKind::Super,
            YoungKind::LinearSplice { base, .. } => base.tail(),
            YoungKind::Scaled { inner, .. } => inner.tail(),
            YoungKind::Table(tab) => match tab.tail() {
                TableTail::Infinite => TailKind::Infinite,
                TableTail::Extrapolate => TailKind::Power { p: tab.tail_exponent(), alpha: 0.0 },
            },
            YoungKind::Glued(pieces) => match &pieces[pieces.len() - 1].1 {
                Piece::Function(f) => f.tail(),
                Piece::Affine { .. } => TailKind::Power { p: 1.0, alpha: 0.0 },
            },
        }
    }

    /// Behaviour near the origin.
    pub fn head(&self) -> HeadKind {
        match &self.kind {
            YoungKind::Power { p } => HeadKind::Power(*p),
            YoungKind::PowerLog { .. } | YoungKind::LinearSplice { .. } => HeadKind::Power(1.0),
            YoungKind::ExpPoly { a, splice } => HeadKind::Power(if *splice > 0.0 { 1.0 } else { *a }),
            YoungKind::Scaled { inner, .. } => inner.head(),
            YoungKind::Table(tab) => match tab.head_exponent() {
                None => HeadKind::Flat,
                Some(_) if tab.first_t() == 0.0 => {
                    let k = tab.knots();
                    if k[0].slope > 0.0 {
                        HeadKind::Power(1.0)
                    } else if k.len() > 1 && k[1].value == 0.0 {
                        HeadKind::Flat
                    } else {
                        HeadKind::Power(2.0)
                    }
                }
                Some(e) => HeadKind::Power(e),
            },
            YoungKind::Glued(pieces) => match &pieces[0].1 {
                Piece::Function(f) => f.head(),
                Piece::Affine { v0, slope, .. } => {
                    if *v0 == 0.0 && *slope == 0.0 {
                        HeadKind::Flat
                    } else {
                        HeadKind::Power(1.0)
                    }
                }
            },
        }
    }

    /// `lim A(t)/t` as `t -> inf`.
    pub fn slope_at_infinity(&self) -> f64 {
        match &self.kind {
            YoungKind::Power { p } => {
                if *p == 1.0 {
                    1.0
                } else {
                    f64::INFINITY
                }
            }
            YoungKind::PowerLog { p, alpha, splice } => {
                if *p == 1.0 && *alpha == 0.0 {
                    power_log_raw(*p, *alpha, *splice) / splice
                } else {
                    f64::INFINITY
                }
            }
            YoungKind::ExpPoly { .. } => f64::INFINITY,
            YoungKind::LinearSplice { base, .. } => base.slope_at_infinity(),
            YoungKind::Scaled { inner, lambda_arg, lambda_val } => lambda_val * lambda_arg * inner.slope_at_infinity(),
            YoungKind::Table(tab) => match tab.tail() {
                TableTail::Infinite => f64::INFINITY,
                TableTail::Extrapolate => {
                    let last = tab.knots()[tab.knots().len() - 1];
                    if last.value == 0.0 {
                        last.slope
                    } else if tab.tail_exponent() > 1.0 {
                        f64::INFINITY
                    } else {
                        last.value / last.t
                    }
                }
            },
            YoungKind::Glued(pieces) => match &pieces[pieces.len() - 1].1 {
                Piece::Function(f) => f.slope_at_infinity(),
                Piece::Affine { slope, .. } => *slope,
            },
        }
    }

    /// Points where the representation changes form (splices, knots, glue points).
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out = match &self.kind {
            YoungKind::Power { .. } => vec![],
            YoungKind::PowerLog { splice, .. } | YoungKind::ExpPoly { splice, .. } => vec![*splice],
            YoungKind::LinearSplice { t1, base, .. } => {
                let mut v = vec![*t1];
                v.extend(base.breakpoints().into_iter().filter(|x| x > t1));
                v
            }
            YoungKind::Scaled { inner, lambda_arg, .. } => {
                inner.breakpoints().into_iter().map(|x| x / lambda_arg).collect()
            }
            YoungKind::Table(tab) => tab.knots().iter().map(|k| k.t).collect(),
            YoungKind::Glued(pieces) => {
                let mut v = Vec::new();
                for (i, (start, piece)) in pieces.iter().enumerate() {
                    let end = pieces.get(i + 1).map_or(f64::INFINITY, |p| p.0);
                    v.push(*start);
                    if let Piece::Function(f) = piece {
                        v.extend(f.breakpoints().into_iter().filter(|x| *x > *start && *x < end));
                    }
                }
                v
            }
        };
        out.retain(|x| *x > 0.0 && x.is_finite());
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// Right-continuous generalized inverse `inf { t : A(t) > s }`.
    pub fn inverse(&self, s: f64) -> Result<f64> {
        self.inverse_within(s, INVERSE_HORIZON)
    }

    /// Inverse restricted to arguments in `[0, horizon]`.
    pub fn inverse_within(&self, s: f64, horizon: f64) -> Result<f64> {
        if !(s >= 0.0) || s.is_nan() {
            return Err(Error::Domain(format!("inverse needs s >= 0, got {s}")));
        }
        if s.is_infinite() {
            return Err(Error::UnboundedInverse { level: s, horizon });
        }
        if s == 0.0 {
            if let HeadKind::Power(_) = self.head() {
                return Ok(0.0);
            }
        }
        let mut hi = 1.0_f64.min(horizon);
        while !(self.value(hi) > s) {
            if hi >= horizon {
                return Err(Error::UnboundedInverse { level: s, horizon });
            }
            hi = (hi * 2.0).min(horizon);
        }
        let mut lo = 0.5 * hi;
        while self.value(lo) > s {
            hi = lo;
            lo *= 0.5;
            if lo < 1e-300 {
                lo = 0.0;
                break;
            }
        }
        for _ in 0..400 {
            if hi - lo <= 1e-13 * hi {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if self.value(mid) > s {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }

    /// Young conjugate as a convex table on `[1e-6, 1e6]`, refined adaptively.
    pub fn conjugate(&self) -> Result<YoungFunction> {
        conjugate::conjugate(self)
    }

    /// Checks monotonicity, convexity and growth of `A(t)/t` on a log grid.
    pub fn validate_on_grid(&self) -> Result<()> {
        let grid = log_grid(1e-6, HORIZON, 20);
        let fail = |t: f64, msg: &str| Error::InvalidSpec { field: "$".into(), message: format!("{msg} near t = {t:e}") };
        let mut prev_v = 0.0;
        let mut prev_d = 0.0;
        let mut prev_ratio = 0.0;
        for &t in &grid {
            let v = self.value(t);
            let d = self.derivative(t);
            if v.is_nan() || v < 0.0 {
                return Err(fail(t, "value is negative or undefined"));
            }
            if v.is_infinite() {
                break;
            }
            let tol = 1e-9;
            if v < prev_v * (1.0 - tol) {
                return Err(fail(t, "values decrease"));
            }
            if d < prev_d * (1.0 - 1e-7) {
                return Err(fail(t, "slopes decrease (not convex)"));
            }
            let ratio = v / t;
            if ratio < prev_ratio * (1.0 - 1e-7) {
                return Err(fail(t, "A(t)/t decreases"));
            }
            prev_v = v;
            prev_d = d;
            prev_ratio = ratio;
        }
        Ok(())
    }

    /// Short human-readable description.
    pub fn describe(&self) -> String {
        match &self.kind {
            YoungKind::Power { p } => format!("power(p={p})"),
            YoungKind::PowerLog { p, alpha, splice } => format!("power_log(p={p}, alpha={alpha}; splice {splice:.6})"),
            YoungKind::ExpPoly { a, .. } => format!("exp_poly(a={a})"),
            YoungKind::LinearSplice { t1, base, .. } => format!("linear_splice(t1={t1}, {})", base.describe()),
            YoungKind::Table(tab) => format!("table({} knots, {:?} tail)", tab.knots().len(), tab.tail()),
            YoungKind::Scaled { inner, lambda_arg, lambda_val } => {
                format!("scaled({}, arg x{lambda_arg}, value x{lambda_val})", inner.describe())
            }
            YoungKind::Glued(p) => format!("glued({} pieces)", p.len()),
        }
    }
}

fn power_log_raw(p: f64, alpha: f64, t: f64) -> f64 {
    t.powf(p) * t.ln().powf(alpha)
}

fn piece_at(pieces: &[(f64, Piece)], t: f64) -> &Piece {
    let i = pieces.partition_point(|(s, _)| *s <= t).max(1) - 1;
    &pieces[i].1
}

/// `per_decade` log-uniform points on `[a, b]`, both ends included.
pub fn log_grid(a: f64, b: f64, per_decade: usize) -> Vec<f64> {
    let decades = (b / a).log10();
    let n = ((decades * per_decade as f64).ceil() as usize).max(1);
    let (la, lb) = (a.ln(), b.ln());
    (0..=n).map(|i| (la + (lb - la) * i as f64 / n as f64).exp()).collect()
}

/// Exactly `n` log-uniform points on `[a, b]`.
pub fn log_points(a: f64, b: f64, n: usize) -> Vec<f64> {
    let (la, lb) = (a.ln(), b.ln());
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|i| (la + (lb - la) * i as f64 / (n - 1) as f64).exp()).collect()
}
