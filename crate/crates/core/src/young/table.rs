use crate::error::{Error, Result};

/// One sample of a convex table: abscissa, value and right-slope.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Knot {
    pub t: f64,
    pub value: f64,
    pub slope: f64,
}

impl Knot {
    pub fn new(t: f64, value: f64, slope: f64) -> Self {
        Self { t, value, slope }
    }
}

/// Behaviour of a table beyond its last knot.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableTail {
    /// Power-law continuation with the elasticity of the last knot.
    Extrapolate,
    /// The function is `+inf` past the last knot (finite-domain conjugates).
    Infinite,
}

/// Convex, nondecreasing table with slope-aware interpolation.
///
/// Each segment uses the cubic Hermite interpolant when it stays convex
/// (the secant lies in the middle third of the end slopes) and otherwise the
/// upper envelope of the two tangent lines. Tables whose slopes equal the
/// chord slopes therefore interpolate linearly.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvexTable {
    knots: Vec<Knot>,
    tail: TableTail,
}

const CHORD_TOL: f64 = 1e-7;

impl ConvexTable {
    /// Validates knots for monotonicity and convexity.
    pub fn new(knots: Vec<Knot>, tail: TableTail) -> Result<Self> {
        let bad = |i: usize, msg: &str| Error::InvalidSpec {
            field: format!("knots[{i}]"),
            message: msg.to_string(),
        };
        if knots.is_empty() {
            return Err(bad(0, "table needs at least one knot"));
        }
        for (i, k) in knots.iter().enumerate() {
            if !(k.t.is_finite() && k.value.is_finite() && k.slope.is_finite()) {
                return Err(bad(i, "entries must be finite"));
            }
            if k.t < 0.0 || k.value < 0.0 || k.slope < 0.0 {
                return Err(bad(i, "entries must be nonnegative"));
            }
        }
        if knots[0].t == 0.0 && knots[0].value != 0.0 {
            return Err(bad(0, "value at t = 0 must be 0"));
        }
        if knots[0].t > 0.0 && knots[0].value > 0.0 {
            let ratio = knots[0].value / knots[0].t;
            if knots[0].slope < ratio * (1.0 - CHORD_TOL) {
                return Err(bad(0, "slope below value/t breaks convexity through the origin"));
            }
        }
        for i in 1..knots.len() {
            let (a, b) = (knots[i - 1], knots[i]);
            if b.t <= a.t {
                return Err(bad(i, "abscissae must be strictly increasing"));
            }
            if b.value < a.value {
                return Err(bad(i, "values must be nondecreasing"));
            }
            if b.slope < a.slope * (1.0 - CHORD_TOL) {
                return Err(bad(i, "right-slopes must be nondecreasing (convexity)"));
            }
            let m = (b.value - a.value) / (b.t - a.t);
            let tol = CHORD_TOL * (a.slope.abs() + b.slope.abs() + m.abs()) + 1e-300;
            if m < a.slope - tol || m > b.slope + tol {
                return Err(bad(i, "chord slope must lie between the knot slopes (convexity)"));
            }
        }
        Ok(Self { knots, tail })
    }

    pub fn knots(&self) -> &[Knot] {
        &self.knots
    }

    pub fn tail(&self) -> TableTail {
        self.tail
    }

    pub fn first_t(&self) -> f64 {
        self.knots[0].t
    }

    pub fn last_t(&self) -> f64 {
        self.knots[self.knots.len() - 1].t
    }

    pub(crate) fn head_exponent(&self) -> Option<f64> {
        let k = self.knots[0];
        if k.t == 0.0 {
            return Some(1.0);
        }
        if k.value == 0.0 {
            None
        } else {
            Some((k.t * k.slope / k.value).max(1.0))
        }
    }

    pub(crate) fn tail_exponent(&self) -> f64 {
        let k = self.knots[self.knots.len() - 1];
        if k.value == 0.0 {
            1.0
        } else {
            (k.t * k.slope / k.value).max(1.0)
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        self.eval_both(t).0
    }

    pub fn derivative(&self, t: f64) -> f64 {
        self.eval_both(t).1
    }

    fn eval_both(&self, t: f64) -> (f64, f64) {
        let first = self.knots[0];
        if t < first.t {
            return match self.head_exponent() {
                None => (0.0, 0.0),
                Some(e) => {
                    let x = t / first.t;
                    let v = first.value * x.powf(e);
                    (v, if t > 0.0 { e * v / t } else if e == 1.0 { first.value / first.t } else { 0.0 })
                }
            };
        }
        let last = self.knots[self.knots.len() - 1];
        if t >= last.t {
            if t == last.t {
                return (last.value, last.slope);
            }
            return match self.tail {
                TableTail::Infinite => (f64::INFINITY, f64::INFINITY),
                TableTail::Extrapolate => {
                    if last.value == 0.0 {
                        (last.slope * (t - last.t), last.slope)
                    } else {
                        let e = self.tail_exponent();
                        let v = last.value * (t / last.t).powf(e);
                        (v, e * v / t)
                    }
                }
            };
        }
        let i = self.knots.partition_point(|k| k.t <= t) - 1;
        segment(self.knots[i], self.knots[i + 1], t)
    }
}

pub(crate) fn segment_value(a: Knot, b: Knot, t: f64) -> f64 {
    segment(a, b, t).0
}

fn segment(a: Knot, b: Knot, t: f64) -> (f64, f64) {
    let h = b.t - a.t;
    let m = (b.value - a.value) / h;
    let tol = 1e-12 * (a.slope + b.slope);
    let hermite = 3.0 * m >= 2.0 * a.slope + b.slope - tol && 3.0 * m <= a.slope + 2.0 * b.slope + tol;
    if hermite {
        let x = (t - a.t) / h;
        let x2 = x * x;
        let x3 = x2 * x;
        let v = (2.0 * x3 - 3.0 * x2 + 1.0) * a.value
            + (x3 - 2.0 * x2 + x) * h * a.slope
            + (-2.0 * x3 + 3.0 * x2) * b.value
            + (x3 - x2) * h * b.slope;
        let d = (6.0 * x2 - 6.0 * x) / h * a.value
            + (3.0 * x2 - 4.0 * x + 1.0) * a.slope
            + (-6.0 * x2 + 6.0 * x) / h * b.value
            + (3.0 * x2 - 2.0 * x) * b.slope;
        (v.max(a.value), d.max(a.slope))
    } else {
        let left = a.value + a.slope * (t - a.t);
        let right = b.value + b.slope * (t - b.t);
        if left >= right {
            (left, a.slope)
        } else {
            (right, b.slope)
        }
    }
}
