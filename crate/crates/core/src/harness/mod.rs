//! Discrete convex functionals `theta A(|grad u|) + (1 - theta) B(|grad u|) + e E(|u|)`
//! on the unit cube, a first-order minimizer, and checks of minimality,
//! convexity and growth envelopes.

mod config;
mod sweep;

pub use config::{Expression, FunctionArg, ProblemConfig};
pub use sweep::{boundedness_sweep, SweepOptions, SweepRow};

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampled::{pairwise_sum, SampledFunction};
use crate::young::YoungFunction;

pub type ScalarField = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StructureMode {
    #[default]
    JointlyConvex,
    ConvexInGradientWithMonotoneE,
}

/// Integrand recipe and Dirichlet data on `[0, 1]^n`.
#[derive(Clone)]
pub struct FunctionalSpec {
    pub n: usize,
    pub a: YoungFunction,
    pub b: YoungFunction,
    pub e: Option<YoungFunction>,
    pub e_coef: f64,
    pub theta: ScalarField,
    pub boundary: ScalarField,
    pub structure: StructureMode,
}

impl std::fmt::Debug for FunctionalSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FunctionalSpec")
            .field("n", &self.n)
            .field("a", &self.a.describe())
            .field("b", &self.b.describe())
            .field("e", &self.e.as_ref().map(|e| e.describe()))
            .field("e_coef", &self.e_coef)
            .field("structure", &self.structure)
            .finish()
    }
}

impl FunctionalSpec {
    /// `theta = 1`, zero boundary data, no `E` term.
    pub fn new(n: usize, a: YoungFunction, b: YoungFunction) -> Self {
        Self {
            n,
            a,
            b,
            e: None,
            e_coef: 0.0,
            theta: Arc::new(|_| 1.0),
            boundary: Arc::new(|_| 0.0),
            structure: StructureMode::JointlyConvex,
        }
    }

    pub fn with_theta(mut self, theta: ScalarField) -> Self {
        self.theta = theta;
        self
    }

    pub fn with_boundary(mut self, boundary: ScalarField) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn with_e(mut self, e: YoungFunction, coef: f64) -> Self {
        self.e = Some(e);
        self.e_coef = coef;
        self
    }

    pub fn with_structure(mut self, structure: StructureMode) -> Self {
        self.structure = structure;
        self
    }

    /// `f(x, t, xi)` at a point with mixing weight `theta`.
    pub fn integrand(&self, theta: f64, t: f64, xi: f64) -> f64 {
        let e = match &self.e {
            Some(e) if self.e_coef != 0.0 => self.e_coef * e.value(t.abs()),
            _ => 0.0,
        };
        theta * self.a.value(xi) + (1.0 - theta) * self.b.value(xi) + e
    }
}

/// Lattice of `(cells + 1)^n` nodes; interior nodes are unknowns.
#[derive(Clone, Debug)]
pub struct DiscreteProblem {
    pub spec: FunctionalSpec,
    pub cells: usize,
    pub h: f64,
    stride: Vec<usize>,
    /// Mixing weight per cell.
    theta: Vec<f64>,
    /// Lower-corner node of every cell.
    cell_base: Vec<usize>,
    /// Node values with boundary data filled in and zero interior.
    template: Vec<f64>,
    interior: Vec<usize>,
    node_coords: Vec<f64>,
}

/// Builds the discrete energy: forward differences from the lower corner of
/// each cell, `E` evaluated at that corner, cell volume `h^n`.
pub fn discretize(spec: &FunctionalSpec, cells: usize) -> Result<DiscreteProblem> {
    let n = spec.n;
    if n == 0 || n > 3 {
        return Err(Error::Domain(format!("dimension must be 1, 2 or 3, got {n}")));
    }
    if cells < 8 {
        return Err(Error::Domain(format!("need at least 8 cells per axis, got {cells}")));
    }
    if !(0.0..=1.0).contains(&spec.e_coef) {
        return Err(Error::Domain(format!("e_coef must lie in [0, 1], got {}", spec.e_coef)));
    }
    let side = cells + 1;
    let stride: Vec<usize> = (0..n).map(|a| side.pow(a as u32)).collect();
    let total = side.pow(n as u32);
    let h = 1.0 / cells as f64;
    let index = |node: usize| -> Vec<usize> { (0..n).map(|a| (node / stride[a]) % side).collect() };

    let mut node_coords = Vec::with_capacity(total * n);
    let mut template = vec![0.0; total];
    let mut interior = Vec::new();
    for node in 0..total {
        let idx = index(node);
        let x: Vec<f64> = idx.iter().map(|i| *i as f64 * h).collect();
        if idx.iter().any(|i| *i == 0 || *i == cells) {
            let g = (spec.boundary)(&x);
            if !g.is_finite() {
                return Err(Error::Domain(format!("boundary data is not finite at {x:?}")));
            }
            template[node] = g;
        } else {
            interior.push(node);
        }
        node_coords.extend(x);
    }
    let mut cell_base = Vec::with_capacity(cells.pow(n as u32));
    let mut theta = Vec::with_capacity(cells.pow(n as u32));
    for node in 0..total {
        let idx = index(node);
        if idx.iter().all(|i| *i < cells) {
            let centre: Vec<f64> = idx.iter().map(|i| (*i as f64 + 0.5) * h).collect();
            let th = (spec.theta)(&centre);
            if !(0.0..=1.0).contains(&th) {
                return Err(Error::Domain(format!("theta = {th} outside [0, 1] at {centre:?}")));
            }
            cell_base.push(node);
            theta.push(th);
        }
    }
    Ok(DiscreteProblem { spec: spec.clone(), cells, h, stride, theta, cell_base, template, interior, node_coords })
}

impl DiscreteProblem {
    pub fn dim(&self) -> usize {
        self.spec.n
    }

    pub fn unknowns(&self) -> usize {
        self.interior.len()
    }

    pub fn node_count(&self) -> usize {
        self.template.len()
    }

    pub fn node_coords(&self) -> &[f64] {
        &self.node_coords
    }

    pub fn node(&self, i: usize) -> &[f64] {
        let n = self.dim();
        &self.node_coords[i * n..(i + 1) * n]
    }

    /// Full node vector for the given interior values.
    pub fn expand(&self, x: &[f64]) -> Vec<f64> {
        let mut u = self.template.clone();
        for (k, &node) in self.interior.iter().enumerate() {
            u[node] = x[k];
        }
        u
    }

    pub fn restrict(&self, nodes: &[f64]) -> Vec<f64> {
        self.interior.iter().map(|&i| nodes[i]).collect()
    }

    fn cell_state(&self, c: usize, u: &[f64], xi: &mut [f64]) -> f64 {
        let base = self.cell_base[c];
        for (a, s) in self.stride.iter().enumerate() {
            xi[a] = (u[base + s] - u[base]) / self.h;
        }
        xi.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    fn cell_energies(&self, u: &[f64]) -> Vec<f64> {
        let vol = self.h.powi(self.dim() as i32);
        let mut xi = vec![0.0; self.dim()];
        (0..self.cell_base.len())
            .map(|c| {
                let g = self.cell_state(c, u, &mut xi);
                vol * self.spec.integrand(self.theta[c], u[self.cell_base[c]], g)
            })
            .collect()
    }

    /// Energy of a full node vector.
    pub fn energy_nodes(&self, u: &[f64]) -> f64 {
        pairwise_sum(&self.cell_energies(u))
    }

    /// Energy of interior values.
    pub fn energy(&self, x: &[f64]) -> f64 {
        self.energy_nodes(&self.expand(x))
    }

    /// Gradient with respect to the interior values; kinks use the right derivative.
    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let u = self.expand(x);
        let n = self.dim();
        let vol = self.h.powi(n as i32);
        let mut g = vec![0.0; u.len()];
        let mut xi = vec![0.0; n];
        for c in 0..self.cell_base.len() {
            let base = self.cell_base[c];
            let m = self.cell_state(c, &u, &mut xi);
            if m > 0.0 {
                let th = self.theta[c];
                let d = th * self.spec.a.derivative(m) + (1.0 - th) * self.spec.b.derivative(m);
                let s = vol * d / (m * self.h);
                for (a, st) in self.stride.iter().enumerate() {
                    g[base + st] += s * xi[a];
                    g[base] -= s * xi[a];
                }
            }
            if let Some(e) = &self.spec.e {
                let t = u[base];
                if self.spec.e_coef != 0.0 && t != 0.0 {
                    g[base] += vol * self.spec.e_coef * e.derivative(t.abs()) * t.signum();
                }
            }
        }
        self.restrict(&g)
    }

    /// Energy of the cells whose stencil meets `support` (node indices).
    pub fn local_energy(&self, u: &[f64], support: &[usize]) -> f64 {
        let mut mark = vec![false; u.len()];
        support.iter().for_each(|i| mark[*i] = true);
        let all = self.cell_energies(u);
        let terms: Vec<f64> = self
            .cell_base
            .iter()
            .zip(all)
            .map(|(&b, e)| if mark[b] || self.stride.iter().any(|s| mark[b + s]) { e } else { 0.0 })
            .collect();
        pairwise_sum(&terms)
    }

    /// Nodes as a scattered field with trapezoid weights.
    pub fn to_sampled(&self, nodes: &[f64]) -> Result<SampledFunction> {
        let n = self.dim();
        let side = self.cells + 1;
        let weights: Vec<f64> = (0..nodes.len())
            .map(|node| {
                (0..n)
                    .map(|a| {
                        let i = (node / self.stride[a]) % side;
                        if i == 0 || i == self.cells { 0.5 * self.h } else { self.h }
                    })
                    .product()
            })
            .collect();
        SampledFunction::scattered(n, self.node_coords.clone(), weights, nodes.to_vec(), None)
    }
}

#[derive(Clone, Debug)]
pub struct Minimized {
    pub u: SampledFunction,
    pub nodes: Vec<f64>,
    pub energy: f64,
    /// Energy after every accepted step, starting with the initial guess.
    pub energy_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

const WINDOW: usize = 50;

/// Accelerated gradient descent with backtracking and monotone restart from a
/// zero interior guess. Stops when the energy drops by less than
/// `tol * |energy|` over 50 accepted steps.
pub fn minimize(problem: &DiscreteProblem, tol: f64, max_iters: usize) -> Result<Minimized> {
    minimize_from(problem, &vec![0.0; problem.unknowns()], tol, max_iters)
}

pub fn minimize_from(problem: &DiscreteProblem, start: &[f64], tol: f64, max_iters: usize) -> Result<Minimized> {
    if start.len() != problem.unknowns() {
        return Err(Error::GridMismatch("initial guess has the wrong length".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain("tolerance must be positive".into()));
    }
    let mut x = start.to_vec();
    let mut fx = problem.energy(&x);
    if !fx.is_finite() {
        return Err(Error::Domain("energy of the initial guess is not finite".into()));
    }
    let mut trace = vec![fx];
    let mut y = x.clone();
    let mut t = 1.0f64;
    let mut lip = 1.0f64;
    let mut converged = problem.unknowns() == 0;
    let mut iterations = 0;
    let mut restarted = false;
    while !converged && iterations < max_iters {
        iterations += 1;
        let fy = problem.energy(&y);
        let gy = problem.gradient(&y);
        let gg: f64 = gy.iter().map(|v| v * v).sum();
        if gg == 0.0 {
            if fy < fx {
                x = y.clone();
                fx = fy;
                trace.push(fx);
            }
            converged = true;
            break;
        }
        let (candidate, fc) = loop {
            let cand: Vec<f64> = y.iter().zip(&gy).map(|(a, b)| a - b / lip).collect();
            let fc = problem.energy(&cand);
            if fc.is_finite() && fc <= fy - 0.5 * gg / lip + 1e-15 * fy.abs() {
                break (cand, fc);
            }
            lip *= 2.0;
            if lip > 1e300 {
                break (x.clone(), fx);
            }
        };
        if fc > fx || lip > 1e300 {
            if restarted {
                converged = true;
                break;
            }
            y = x.clone();
            t = 1.0;
            restarted = true;
            continue;
        }
        restarted = false;
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let beta = (t - 1.0) / t_next;
        y = candidate.iter().zip(&x).map(|(c, p)| c + beta * (c - p)).collect();
        x = candidate;
        fx = fc;
        t = t_next;
        lip *= 0.9;
        trace.push(fx);
        let k = trace.len() - 1;
        if k >= WINDOW && trace[k - WINDOW] - trace[k] <= tol * trace[k].abs().max(1e-300) {
            converged = true;
        }
    }
    let nodes = problem.expand(&x);
    Ok(Minimized { u: problem.to_sampled(&nodes)?, nodes, energy: fx, energy_trace: trace, iterations, converged })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct QuasiMinReport {
    pub trials: usize,
    pub violations: usize,
    /// Largest `F(u; S) / F(u + phi; S)` over the trials.
    pub worst_ratio: f64,
}

/// Tests `F(u; supp phi) <= q F(u + phi; supp phi)` for random bumps `phi`
/// supported on interior nodes.
pub fn quasi_min_check(problem: &DiscreteProblem, nodes: &[f64], q: f64, trials: usize, seed: u64) -> Result<QuasiMinReport> {
    if problem.unknowns() == 0 {
        return Err(Error::Degenerate("no interior nodes".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = problem.dim();
    let mut violations = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let centre = problem.interior[rng.random_range(0..problem.unknowns())];
        let radius = rng.random_range(1..=3) as f64 * problem.h;
        let amp = rng.random_range(-3.0..0.0f64).exp2() * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let c = problem.node(centre).to_vec();
        let mut v = nodes.to_vec();
        let mut support = Vec::new();
        for &i in &problem.interior {
            let x = problem.node(i);
            let d = (0..n).map(|a| (x[a] - c[a]).abs()).fold(0.0, f64::max);
            let bump = 1.0 - d / (radius + problem.h);
            if bump > 0.0 {
                v[i] += amp * bump;
                support.push(i);
            }
        }
        let before = problem.local_energy(nodes, &support);
        let after = problem.local_energy(&v, &support);
        let ratio = if after > 0.0 { before / after } else if before > 0.0 { f64::INFINITY } else { 0.0 };
        worst = worst.max(ratio);
        if before > q * after {
            violations += 1;
        }
    }
    Ok(QuasiMinReport { trials, violations, worst_ratio: worst })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ConvexityReport {
    pub trials: usize,
    /// Largest `(E(l u + (1-l) v) - l E(u) - (1-l) E(v)) / max(1, E(u), E(v))`.
    pub max_defect: f64,
}

/// Random midpoint test of convexity of the discrete energy.
pub fn convexity_witness(problem: &DiscreteProblem, trials: usize, seed: u64) -> ConvexityReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = problem.unknowns();
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..trials {
        let u: Vec<f64> = (0..m).map(|_| rng.random_range(-2.0..2.0)).collect();
        let v: Vec<f64> = (0..m).map(|_| rng.random_range(-2.0..2.0)).collect();
        let l: f64 = rng.random_range(0.0..1.0);
        let w: Vec<f64> = u.iter().zip(&v).map(|(a, b)| l * a + (1.0 - l) * b).collect();
        let (eu, ev, ew) = (problem.energy(&u), problem.energy(&v), problem.energy(&w));
        let defect = (ew - l * eu - (1.0 - l) * ev) / eu.max(ev).max(1.0);
        worst = worst.max(defect);
    }
    ConvexityReport { trials, max_defect: worst }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct EnvelopeReport {
    pub points: usize,
    pub violations: usize,
    /// Largest amount by which either side of the envelope is exceeded (<= 0 when it holds).
    pub max_excess: f64,
}

/// Checks `A(|xi|) - E(|t|) - L <= f <= B(|xi|) + E(|t|) + L` at every cell evaluation point.
pub fn growth_envelope(problem: &DiscreteProblem, nodes: &[f64], l: f64) -> EnvelopeReport {
    let spec = &problem.spec;
    let mut xi = vec![0.0; problem.dim()];
    let mut violations = 0;
    let mut worst = f64::NEG_INFINITY;
    for c in 0..problem.cell_base.len() {
        let g = problem.cell_state(c, nodes, &mut xi);
        let t = nodes[problem.cell_base[c]];
        let f = spec.integrand(problem.theta[c], t, g);
        let e = spec.e.as_ref().map_or(0.0, |e| e.value(t.abs()));
        let lower = spec.a.value(g) - e - l - f;
        let upper = f - spec.b.value(g) - e - l;
        let excess = lower.max(upper);
        let slack = 1e-12 * f.abs().max(1.0);
        if excess > slack {
            violations += 1;
        }
        worst = worst.max(excess);
    }
    EnvelopeReport { points: problem.cell_base.len(), violations, max_excess: worst }
}

/// Largest `|u|` over nodes in the centred half-size cube `[1/4, 3/4]^n`.
pub fn interior_sup(problem: &DiscreteProblem, nodes: &[f64]) -> f64 {
    (0..nodes.len())
        .filter(|&i| problem.node(i).iter().all(|x| (0.25 - 1e-12..=0.75 + 1e-12).contains(x)))
        .map(|i| nodes[i].abs())
        .fold(0.0, f64::max)
}
