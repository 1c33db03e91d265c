use rayon::prelude::*;
use serde::Serialize;

use super::{discretize, interior_sup, minimize, Expression, FunctionalSpec};
use crate::admissibility::{analyze, GrowthSpec, Outcome};
use crate::error::Result;
use crate::young::YoungFunction;

#[derive(Clone, Debug)]
pub struct SweepOptions {
    /// Dirichlet data; the default is harmonic in the first two coordinates.
    pub boundary: String,
    /// Mixing weight; the default puts `B`-growth on `x1 >= 1/2`.
    pub theta: String,
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            boundary: "x1 * x1 - x2 * x2 + 0.5".into(),
            theta: "if(x1 < 0.5, 1.0, 0.0)".into(),
            tol: 1e-12,
            max_iters: 20_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub p: f64,
    pub q: f64,
    pub refinement: usize,
    pub interior_sup: f64,
    pub energy: f64,
    pub converged: bool,
    pub verdict: String,
}

fn verdict_label(outcome: Outcome) -> &'static str {
    match outcome {
        Outcome::Admissible => "admissible",
        Outcome::NotAdmissible => "not_admissible",
        Outcome::Boundary => "boundary",
        Outcome::TriviallyBounded => "trivially_bounded",
    }
}

/// Minimizes the mixed power-growth functional for every `(p, q)` pair and
/// refinement (cells per axis) and records the interior sup next to the
/// admissibility verdict of the pair. Rows are ordered by `p`, `q`, refinement.
pub fn boundedness_sweep(n: usize, p_list: &[f64], q_list: &[f64], refinements: &[usize], opts: &SweepOptions) -> Result<Vec<SweepRow>> {
    let boundary = Expression::parse(&opts.boundary)?;
    let theta = Expression::parse(&opts.theta)?;
    let pairs: Vec<(f64, f64)> = p_list.iter().flat_map(|p| q_list.iter().map(move |q| (*p, *q))).collect();
    let verdicts: Vec<String> = pairs
        .par_iter()
        .map(|&(p, q)| {
            let spec = GrowthSpec::new(YoungFunction::power(p)?, YoungFunction::power(q)?, n);
            Ok(verdict_label(analyze(&spec)?.outcome).to_string())
        })
        .collect::<Result<_>>()?;
    let jobs: Vec<(usize, usize)> = (0..pairs.len()).flat_map(|i| refinements.iter().map(move |r| (i, *r))).collect();
    jobs.par_iter()
        .map(|&(i, cells)| {
            let (p, q) = pairs[i];
            let spec = FunctionalSpec::new(n, YoungFunction::power(p)?, YoungFunction::power(q)?)
                .with_boundary(boundary.to_field())
                .with_theta(theta.to_field());
            let problem = discretize(&spec, cells)?;
            let m = minimize(&problem, opts.tol, opts.max_iters)?;
            Ok(SweepRow {
                p,
                q,
                refinement: cells,
                interior_sup: interior_sup(&problem, &m.nodes),
                energy: m.energy,
                converged: m.converged,
                verdict: verdicts[i].clone(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_row_is_stable_and_admissible() {
        let rows = boundedness_sweep(2, &[2.0], &[2.0], &[8, 16], &SweepOptions::default()).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.verdict == "admissible" && r.converged));
        let rel = (rows[0].interior_sup - rows[1].interior_sup).abs() / rows[1].interior_sup;
        assert!(rel < 0.05, "{rows:?}");
    }
}
