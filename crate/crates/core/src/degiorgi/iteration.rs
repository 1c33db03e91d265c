use rayon::prelude::*;
use serde::Serialize;

use super::level_energy;
use crate::error::{Error, Result};
use crate::sampled::SampledFunction;
use crate::young::YoungFunction;

/// Slack allowed in `ln J_l - (l ln tau + ln J_0)` before a step counts as a violation.
pub const LOG_SLACK: f64 = 1e-10;

/// Constants of the decay recurrence `J_{l+1} = c2 2^{gamma l} J_l^{1+1/n}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecayParams {
    pub n: usize,
    pub q: f64,
    pub l: f64,
    pub c2: f64,
    pub c_b: f64,
}

impl DecayParams {
    /// Defaults `c2 = 2`, `c_B = 1`.
    pub fn new(n: usize, q: f64, l: f64) -> Result<Self> {
        Self::with_constants(n, q, l, 2.0, 1.0)
    }

    pub fn with_constants(n: usize, q: f64, l: f64, c2: f64, c_b: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("dimension must be >= 2, got {n}")));
        }
        if !(q > 1.0) || !q.is_finite() {
            return Err(Error::Domain(format!("q must exceed 1, got {q}")));
        }
        if !(l >= 1.0) || !l.is_finite() {
            return Err(Error::Domain(format!("L must be >= 1, got {l}")));
        }
        if !(c2 >= 1.0) || !c2.is_finite() {
            return Err(Error::Domain(format!("c2 must be >= 1, got {c2}")));
        }
        if !(c_b > 0.0) || !c_b.is_finite() {
            return Err(Error::Domain(format!("c_B must be positive, got {c_b}")));
        }
        Ok(Self { n, q, l, c2, c_b })
    }

    /// `max{q n/(n-1), log2 L}`.
    pub fn gamma(&self) -> f64 {
        let nf = self.n as f64;
        (self.q * nf / (nf - 1.0)).max(self.l.log2())
    }

    /// Solution of `c2 2^gamma tau^{1/n} = 1`.
    pub fn tau(&self) -> f64 {
        self.ln_tau().exp()
    }

    fn ln_tau(&self) -> f64 {
        -(self.n as f64) * (self.c2.ln() + self.gamma() * std::f64::consts::LN_2)
    }

    /// Smallness threshold `min{(c_B L)^{-n}, (tau/c2)^n}` under which the chain
    /// `J_l <= tau^l J_0` holds from the first step on.
    pub fn eps0(&self) -> f64 {
        let nf = self.n as f64;
        (-nf * (self.c_b * self.l).ln()).exp().min((nf * (self.ln_tau() - self.c2.ln())).exp())
    }

    /// `min{(c_B L)^{-n}, tau^n}`, which only controls the steps `l >= 1`.
    pub fn eps0_uncorrected(&self) -> f64 {
        let nf = self.n as f64;
        (-nf * (self.c_b * self.l).ln()).exp().min((nf * self.ln_tau()).exp())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceSource {
    Recurrence,
    Sampled,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum DecayVerdict {
    Decayed,
    /// First step at which `J_l > tau^l J_0`.
    Stalled { witness: usize },
}

impl DecayVerdict {
    pub fn is_decayed(self) -> bool {
        matches!(self, DecayVerdict::Decayed)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct IterationTrace {
    pub k: f64,
    pub params: DecayParams,
    /// `(k_l, sigma_l)` for `l = 0..=steps`.
    pub schedule: Vec<(f64, f64)>,
    pub j_values: Vec<f64>,
    pub gamma: f64,
    pub tau: f64,
    pub eps0: f64,
    pub eps0_uncorrected: f64,
    /// Whether `J_0 <= eps0`.
    pub small_start: bool,
    pub verdict: DecayVerdict,
    /// Step whose value left the floating range; the trace stops there.
    pub overflow: Option<usize>,
    pub source: TraceSource,
}

/// One CSV row of a trace.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TraceRow {
    pub l: usize,
    pub k_l: f64,
    pub sigma_l: f64,
    pub j_l: f64,
    pub decay_bound: f64,
}

impl IterationTrace {
    pub fn rows(&self) -> Vec<TraceRow> {
        let j0 = self.j_values.first().copied().unwrap_or(0.0);
        self.j_values
            .iter()
            .enumerate()
            .map(|(l, &j)| TraceRow {
                l,
                k_l: self.schedule[l].0,
                sigma_l: self.schedule[l].1,
                j_l: j,
                decay_bound: (l as f64 * self.tau.ln()).exp() * j0,
            })
            .collect()
    }
}

/// `k_l = K(1 - 2^{-(l+1)})`, `sigma_l = 1/2 + 2^{-(l+2)}`.
pub fn schedule(k: f64, steps: usize) -> Vec<(f64, f64)> {
    (0..=steps)
        .map(|l| {
            let h = 0.5f64.powi(l as i32 + 1);
            (k - k * h, 0.5 + 0.5 * h)
        })
        .collect()
}

fn verdict_of(ln_j: &[f64], ln_tau: f64) -> DecayVerdict {
    let ln_j0 = ln_j[0];
    if ln_j0 == f64::NEG_INFINITY {
        return match ln_j.iter().position(|v| *v > f64::NEG_INFINITY) {
            Some(l) => DecayVerdict::Stalled { witness: l },
            None => DecayVerdict::Decayed,
        };
    }
    for (l, v) in ln_j.iter().enumerate().skip(1) {
        if *v - (l as f64 * ln_tau + ln_j0) > LOG_SLACK {
            return DecayVerdict::Stalled { witness: l };
        }
    }
    DecayVerdict::Decayed
}

/// Worst-case recurrence started at `J_0`, evolved in log space.
pub fn iterate(j0: f64, params: &DecayParams, k: f64, steps: usize) -> Result<IterationTrace> {
    if !(j0 >= 0.0) || !j0.is_finite() {
        return Err(Error::Domain(format!("J0 must be finite and >= 0, got {j0}")));
    }
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::Domain(format!("K must be positive, got {k}")));
    }
    if steps == 0 {
        return Err(Error::Domain("at least one step is required".into()));
    }
    let nf = params.n as f64;
    let gamma = params.gamma();
    let ln_tau = params.ln_tau();
    let mut ln_j = vec![j0.ln()];
    let mut j_values = vec![j0];
    let mut overflow = None;
    for l in 0..steps {
        let prev = ln_j[l];
        let next = if prev == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            params.c2.ln() + gamma * l as f64 * std::f64::consts::LN_2 + (1.0 + 1.0 / nf) * prev
        };
        let value = next.exp();
        if !value.is_finite() || next.is_nan() {
            overflow = Some(l + 1);
            break;
        }
        ln_j.push(next);
        j_values.push(value);
    }
    let mut verdict = verdict_of(&ln_j, ln_tau);
    if let (Some(l), DecayVerdict::Decayed) = (overflow, verdict) {
        verdict = DecayVerdict::Stalled { witness: l };
    }
    let computed = j_values.len() - 1;
    Ok(IterationTrace {
        k,
        params: *params,
        schedule: schedule(k, computed),
        j_values,
        gamma,
        tau: params.tau(),
        eps0: params.eps0(),
        eps0_uncorrected: params.eps0_uncorrected(),
        small_start: j0 <= params.eps0(),
        verdict,
        overflow,
        source: TraceSource::Recurrence,
    })
}

/// Trace whose `J_l` are the level energies `J(k_l, sigma_l)` of `u`.
pub fn iterate_sampled(u: &SampledFunction, a: &YoungFunction, k: f64, params: &DecayParams, steps: usize) -> Result<IterationTrace> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::Domain(format!("K must be positive, got {k}")));
    }
    let sched = schedule(k, steps);
    let j_values: Vec<f64> = sched
        .par_iter()
        .map(|&(kl, sl)| level_energy(u, a, kl, sl).map(|e| e.value))
        .collect::<Result<_>>()?;
    let ln_j: Vec<f64> = j_values.iter().map(|v| v.ln()).collect();
    let verdict = verdict_of(&ln_j, params.ln_tau());
    Ok(IterationTrace {
        k,
        params: *params,
        schedule: sched,
        small_start: j_values[0] <= params.eps0(),
        j_values,
        gamma: params.gamma(),
        tau: params.tau(),
        eps0: params.eps0(),
        eps0_uncorrected: params.eps0_uncorrected(),
        verdict,
        overflow: None,
        source: TraceSource::Sampled,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> DecayParams {
        DecayParams::new(3, 6.0, 2.0).unwrap()
    }

    #[test]
    fn schedule_matches_closed_form() {
        for (l, (k, s)) in schedule(3.0, 60).into_iter().enumerate() {
            assert_eq!(k, 3.0 * (1.0 - 2f64.powi(-(l as i32 + 1))));
            assert_eq!(s, 0.5 + 2f64.powi(-(l as i32 + 2)));
        }
    }

    #[test]
    fn tau_solves_its_equation() {
        let pr = p();
        let lhs = pr.c2 * 2f64.powf(pr.gamma()) * pr.tau().powf(1.0 / 3.0);
        assert!((lhs - 1.0).abs() < 1e-12);
        assert!(pr.tau() > 0.0 && pr.tau() < 1.0);
        assert_eq!(pr.gamma(), 9.0);
    }

    #[test]
    fn start_at_threshold_decays() {
        let pr = p();
        let t = iterate(pr.eps0(), &pr, 1.0, 60).unwrap();
        assert!(t.verdict.is_decayed(), "{:?}", t.verdict);
        assert!(t.small_start);
    }

    #[test]
    fn zero_start_stays_zero() {
        let t = iterate(0.0, &p(), 1.0, 20).unwrap();
        assert!(t.j_values.iter().all(|v| *v == 0.0));
        assert!(t.verdict.is_decayed());
    }

    #[test]
    fn large_start_stalls_at_first_step() {
        let pr = p();
        let t = iterate(10.0 * pr.eps0(), &pr, 1.0, 60).unwrap();
        assert_eq!(t.verdict, DecayVerdict::Stalled { witness: 1 });
    }

    #[test]
    fn uncorrected_threshold_fails_first_step() {
        let pr = p();
        assert!(pr.eps0_uncorrected() > pr.eps0());
        let t = iterate(pr.eps0_uncorrected(), &pr, 1.0, 60).unwrap();
        assert_eq!(t.verdict, DecayVerdict::Stalled { witness: 1 });
    }

    #[test]
    fn overflow_is_flagged() {
        let pr = DecayParams::with_constants(2, 4.0, 1.0, 4.0, 1.0).unwrap();
        let t = iterate(1e3, &pr, 1.0, 60).unwrap();
        let l = t.overflow.expect("overflow");
        assert_eq!(t.j_values.len(), l);
        assert!(!t.verdict.is_decayed());
    }

    #[test]
    fn rows_carry_the_decay_bound() {
        let pr = p();
        let t = iterate(pr.eps0(), &pr, 2.0, 5).unwrap();
        let rows = t.rows();
        assert_eq!(rows.len(), 6);
        assert_eq!(rows[0].decay_bound, pr.eps0());
        assert!(rows.iter().all(|r| r.j_l <= r.decay_bound * (1.0 + 1e-9)));
    }
}
