//! Minimizing a mixed-growth functional on the unit square.
//!
//! The integrand has quadratic growth on the left half and cubic growth on
//! the right; the minimizer is then tested against random perturbations.
//!
//! ```bash
//! cargo run --example minimize
//! ```

use orlicz_growth::harness::{discretize, interior_sup, minimize, quasi_min_check, ProblemConfig};

const CONFIG: &str = r#"{
    "n": 2,
    "cells": 12,
    "boundary": "x1 * x1 - x2 + 0.5",
    "theta": "if(x1 < 0.5, 1.0, 0.0)",
    "a": "power:2",
    "b": "power:3",
    "tol": 1e-13
}"#;

fn main() -> orlicz_growth::Result<()> {
    let config = ProblemConfig::from_json(CONFIG)?;
    let problem = discretize(&config.functional()?, config.cells)?;
    let m = minimize(&problem, config.tol, config.max_iters)?;
    println!("energy {:.8} after {} iterations (converged: {})", m.energy, m.iterations, m.converged);
    println!("interior sup {:.6}", interior_sup(&problem, &m.nodes));

    let report = quasi_min_check(&problem, &m.nodes, 1.0 + 1e-6, 100, 11)?;
    println!("quasi-minimality: {} violations in {} trials", report.violations, report.trials);
    Ok(())
}
