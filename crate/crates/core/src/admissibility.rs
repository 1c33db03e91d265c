//! Admissibility of a growth envelope `A(|xi|) - L <= f <= B(|xi|) + L`
//! (optionally with an `E(|t|)` term) for local boundedness of minimizers.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sobolev::{integral_profile, regularize_near_zero, sobolev_conjugate, Convergence, IntegralProfile};
use crate::young::{
    check_dominates_within, delta2_index, log_grid, Delta2, DominationCertificate, DominationMode, YoungFunction, HORIZON,
};

/// Slope excess at or above which a bound is rejected.
pub const BOUNDARY_BAND: f64 = 0.05;
const SLOPE_EPS: f64 = 1e-3;

#[derive(Clone, Debug)]
pub struct GrowthSpec {
    pub a: YoungFunction,
    pub b: YoungFunction,
    pub e: Option<YoungFunction>,
    pub n: usize,
    pub l: f64,
    pub t0: f64,
    pub q: f64,
}

impl GrowthSpec {
    pub fn new(a: YoungFunction, b: YoungFunction, n: usize) -> Self {
        Self { a, b, e: None, n, l: 1.0, t0: 0.0, q: 1.0 }
    }

    pub fn with_e(mut self, e: YoungFunction) -> Self {
        self.e = Some(e);
        self
    }

    fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Domain(format!("n must be at least 2, got {}", self.n)));
        }
        if !(self.l >= 1.0) || !(self.t0 >= 0.0) || !(self.q >= 1.0) {
            return Err(Error::Domain("need L >= 1, t0 >= 0 and Q >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Subcritical,
    Supercritical,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Admissible,
    NotAdmissible,
    Boundary,
    TriviallyBounded,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Admissible => 0,
            Outcome::NotAdmissible => 1,
            Outcome::Boundary => 2,
            Outcome::TriviallyBounded => 3,
        }
    }
}

/// Result of comparing one envelope against its sharp Sobolev target.
#[derive(Clone, Debug, Serialize)]
pub struct BoundCheck {
    pub certificate: Option<DominationCertificate>,
    /// Log-log slope of the envelope minus that of the target on the final two decades.
    pub slope_excess: f64,
    /// First probe violating `envelope(t) <= target(t)` when no certificate exists.
    pub failing_probe: Option<(f64, f64, f64)>,
    pub outcome: Outcome,
}

#[derive(Clone, Debug, Serialize)]
pub struct Diagnostics {
    pub divinf: IntegralProfile,
    pub regime_profile: Option<IntegralProfile>,
    pub b_delta2: Delta2,
    pub e_doubling: Option<f64>,
    pub splice_t1: f64,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub outcome: Outcome,
    pub regime: Option<Regime>,
    pub b_check: Option<BoundCheck>,
    pub e_check: Option<BoundCheck>,
    pub admissible: bool,
    pub diagnostics: Diagnostics,
}

/// `n = 2` is supercritical; otherwise subcritical iff `int^inf (t/A)^{1/(n-2)}` diverges.
pub fn classify_regime(a: &YoungFunction, n: usize) -> Result<(Regime, Option<IntegralProfile>)> {
    if n < 2 {
        return Err(Error::Domain(format!("n must be at least 2, got {n}")));
    }
    if n == 2 {
        return Ok((Regime::Supercritical, None));
    }
    let prof = integral_profile(a, 1.0 / (n as f64 - 2.0))?;
    let regime = if prof.at_infinity == Convergence::Diverges { Regime::Subcritical } else { Regime::Supercritical };
    Ok((regime, Some(prof)))
}

fn doubling_index(e: &YoungFunction, t0: f64) -> Result<f64> {
    let grid = log_grid(t0.max(1.0), HORIZON / 2.0, 20);
    let mut worst: f64 = 1.0;
    let mut prev = 0.0;
    for &t in &grid {
        let v = e.value(t);
        if v < prev {
            return Err(Error::Precondition(format!("E decreases near t = {t:e}")));
        }
        prev = v;
        if v > 0.0 {
            worst = worst.max(e.value(2.0 * t) / v);
        }
    }
    Ok(worst)
}

fn bound_check(target: &YoungFunction, envelope: &YoungFunction) -> BoundCheck {
    let certificate = check_dominates_within(target, envelope, DominationMode::NearInfinity, HORIZON);
    let slope_excess = crate::young::analysis_tail_excess(target, envelope);
    let failing_probe = if certificate.is_none() {
        log_grid(1.0, HORIZON, 20).into_iter().find_map(|t| {
            let (bv, av) = (envelope.value(t), target.value(t));
            (bv > av).then_some((t, bv, av))
        })
    } else {
        None
    };
    let outcome = if certificate.is_some() && slope_excess <= SLOPE_EPS {
        Outcome::Admissible
    } else if slope_excess >= BOUNDARY_BAND - SLOPE_EPS {
        Outcome::NotAdmissible
    } else {
        Outcome::Boundary
    };
    BoundCheck { certificate, slope_excess, failing_probe, outcome }
}

/// Decides admissibility of a growth specification.
pub fn analyze(spec: &GrowthSpec) -> Result<Verdict> {
    spec.validate()?;
    let n = spec.n;
    let mut notes = Vec::new();
    let b_delta2 = delta2_index(&spec.b, spec.t0)?;
    let e_doubling = match &spec.e {
        Some(e) => Some(doubling_index(e, spec.t0)?),
        None => None,
    };
    let divinf = integral_profile(&spec.a, 1.0 / (n as f64 - 1.0))?;
    let splice_t1 = spec.t0.max(1.0);
    if divinf.at_infinity == Convergence::Converges {
        notes.push("int^inf (t/A)^(1/(n-1)) converges: every W^{1,A} function is locally bounded".into());
        let diagnostics = Diagnostics { divinf, regime_profile: None, b_delta2, e_doubling, splice_t1, notes };
        return Ok(Verdict {
            outcome: Outcome::TriviallyBounded,
            regime: None,
            b_check: None,
            e_check: None,
            admissible: false,
            diagnostics,
        });
    }
    let a_hat = regularize_near_zero(&spec.a, &[spec.t0])?;
    let (regime, regime_profile) = classify_regime(&spec.a, n)?;

    let mut flags_ok = true;
    if !b_delta2.is_finite() {
        notes.push("B fails the doubling condition near infinity".into());
        flags_ok = false;
    }
    if let Some(d) = e_doubling {
        if !(d < 1e6) {
            notes.push("E fails the doubling condition near infinity".into());
            flags_ok = false;
        }
    }

    let b_check = if regime == Regime::Subcritical {
        let target = YoungFunction::scaled(sobolev_conjugate(&a_hat, n - 1)?.result, spec.l, 1.0)?;
        Some(bound_check(&target, &spec.b))
    } else {
        None
    };
    let e_check = match &spec.e {
        Some(e) => {
            let target = YoungFunction::scaled(sobolev_conjugate(&a_hat, n)?.result, spec.l, 1.0)?;
            Some(bound_check(&target, e))
        }
        None => None,
    };

    let checks: Vec<Outcome> = b_check.iter().chain(e_check.iter()).map(|c| c.outcome).collect();
    let outcome = if !flags_ok || checks.contains(&Outcome::NotAdmissible) {
        Outcome::NotAdmissible
    } else if checks.contains(&Outcome::Boundary) {
        Outcome::Boundary
    } else {
        Outcome::Admissible
    };
    let diagnostics = Diagnostics { divinf, regime_profile, b_delta2, e_doubling, splice_t1, notes };
    Ok(Verdict { outcome, regime: Some(regime), b_check, e_check, admissible: outcome == Outcome::Admissible, diagnostics })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdRegime {
    /// `B` must satisfy the sharp power-log bound.
    Bounded,
    /// Any doubling `B` is admissible.
    AnyB,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Thresholds {
    pub b_exponent: Option<f64>,
    pub b_log_exponent: Option<f64>,
    /// `None` when any doubling `E` is admissible (`p = n`).
    pub e_exponent: Option<f64>,
    pub e_log_exponent: Option<f64>,
    pub regime: ThresholdRegime,
}

/// Closed-form exponents for `A(t) ~ t^p (log t)^alpha`.
pub fn power_log_thresholds(n: usize, p: f64, alpha: f64) -> Result<Thresholds> {
    if n < 2 {
        return Err(Error::Domain(format!("n must be at least 2, got {n}")));
    }
    let nf = n as f64;
    if !(p.is_finite() && alpha.is_finite()) {
        return Err(Error::Domain("p and alpha must be finite".into()));
    }
    if p < 1.0 || p > nf {
        return Err(Error::Domain(format!("need 1 <= p <= n, got p = {p}")));
    }
    if p == 1.0 && alpha < 0.0 {
        return Err(Error::Domain(format!("p = 1 requires alpha >= 0, got {alpha}")));
    }
    if p == nf && alpha > nf - 1.0 {
        return Err(Error::Domain(format!("p = n requires alpha <= n - 1, got {alpha}")));
    }
    let (b_exponent, b_log_exponent, regime) = if n >= 3 && p < nf - 1.0 {
        let d = nf - 1.0 - p;
        (Some((nf - 1.0) * p / d), Some((nf - 1.0) * alpha / d), ThresholdRegime::Bounded)
    } else {
        (None, None, ThresholdRegime::AnyB)
    };
    let (e_exponent, e_log_exponent) = if p < nf { (Some(nf * p / (nf - p)), Some(nf * alpha / (nf - p))) } else { (None, None) };
    Ok(Thresholds { b_exponent, b_log_exponent, e_exponent, e_log_exponent, regime })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pw(p: f64) -> YoungFunction {
        YoungFunction::power(p).unwrap()
    }

    #[test]
    fn regimes() {
        assert_eq!(classify_regime(&pw(1.5), 2).unwrap().0, Regime::Supercritical);
        assert_eq!(classify_regime(&pw(1.5), 3).unwrap().0, Regime::Subcritical);
        assert_eq!(classify_regime(&pw(2.5), 3).unwrap().0, Regime::Supercritical);
    }

    #[test]
    fn example_one_threshold() {
        let v = analyze(&GrowthSpec::new(pw(1.5), pw(6.0), 3)).unwrap();
        assert_eq!(v.outcome, Outcome::Admissible);
        let v = analyze(&GrowthSpec::new(pw(1.5), pw(6.05), 3)).unwrap();
        assert_eq!(v.outcome, Outcome::NotAdmissible);
        let b = v.b_check.unwrap();
        assert!(b.certificate.is_none() && b.failing_probe.is_some());
        let v = analyze(&GrowthSpec::new(pw(1.5), pw(6.02), 3)).unwrap();
        assert_eq!(v.outcome, Outcome::Boundary);
    }

    #[test]
    fn e_check_at_sobolev_exponent() {
        let v = analyze(&GrowthSpec::new(pw(1.5), pw(2.0), 3).with_e(pw(3.0))).unwrap();
        assert!(v.e_check.as_ref().unwrap().certificate.is_some());
        assert_eq!(v.outcome, Outcome::Admissible);
    }

    #[test]
    fn trivially_bounded_when_p_exceeds_n() {
        let v = analyze(&GrowthSpec::new(pw(4.0), pw(10.0), 3)).unwrap();
        assert_eq!(v.outcome, Outcome::TriviallyBounded);
        assert_eq!(v.outcome.exit_code(), 3);
    }

    #[test]
    fn critical_power_accepts_any_b() {
        let v = analyze(&GrowthSpec::new(pw(2.0), pw(12.0), 3)).unwrap();
        assert_eq!(v.outcome, Outcome::Admissible);
    }

    #[test]
    fn example_two_exponents() {
        let t = power_log_thresholds(3, 1.5, 1.0).unwrap();
        assert_eq!(t.b_exponent, Some(6.0));
        assert_eq!(t.b_log_exponent, Some(4.0));
        let t0 = power_log_thresholds(3, 1.5, 0.0).unwrap();
        assert_eq!((t0.b_exponent, t0.e_exponent, t0.b_log_exponent, t0.e_log_exponent), (Some(6.0), Some(3.0), Some(0.0), Some(0.0)));
        assert_eq!(power_log_thresholds(3, 2.0, 5.0).unwrap().regime, ThresholdRegime::AnyB);
        assert!(power_log_thresholds(3, 1.0, -1.0).is_err());
        assert!(power_log_thresholds(3, 3.0, 2.5).is_err());
    }
}
