use serde::Serialize;

use crate::error::{Error, Result};
use crate::sampled::{pairwise_sum, Grid, SampledFunction, SphereRule};
use crate::young::{phi_q, YoungFunction};

pub const MIN_SHELLS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffRegime {
    /// `B <= A_{n-1}(L t)` with `q`-growth of `B`; bound through `Phi_q`.
    Subcritical,
    /// `B(t) <= L t^q`, `q > n`; bound through the sphere sup-norm embedding.
    Supercritical,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CutoffConstants {
    pub q: f64,
    pub l: f64,
    pub kappa: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ShellRecord {
    pub r_inner: f64,
    pub r_outer: f64,
    pub r_node: f64,
    pub sphere_value_modular: f64,
    pub sphere_gradient_modular: f64,
    pub in_u1: bool,
    pub in_u2: bool,
}

impl ShellRecord {
    pub fn good(&self) -> bool {
        self.in_u1 && self.in_u2
    }

    /// `F_r`, the full sphere energy of the shell.
    pub fn sphere_energy(&self) -> f64 {
        self.sphere_value_modular + self.sphere_gradient_modular
    }
}

/// Piecewise linear profile `eta(edges[i]) = values[i]` on `[rho, sigma]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RadialProfile {
    pub edges: Vec<f64>,
    pub values: Vec<f64>,
}

impl RadialProfile {
    pub fn at(&self, r: f64) -> f64 {
        let (e, v) = (&self.edges, &self.values);
        if r <= e[0] {
            return 1.0;
        }
        if r >= e[e.len() - 1] {
            return 0.0;
        }
        let i = e.partition_point(|x| *x <= r) - 1;
        let t = (r - e[i]) / (e[i + 1] - e[i]);
        v[i] + t * (v[i + 1] - v[i])
    }

    /// Largest slope magnitude.
    pub fn max_slope(&self) -> f64 {
        self.edges
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(e, v)| (v[0] - v[1]) / (e[1] - e[0]))
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CutoffReport {
    pub rho: f64,
    pub sigma: f64,
    pub regime: CutoffRegime,
    pub constants: CutoffConstants,
    pub shells: Vec<ShellRecord>,
    /// Number of annulus shells and how many are good.
    pub shell_count: usize,
    pub good_count: usize,
    pub shell_width: f64,
    /// `|U|` and `sigma - rho`, both as multiples of the shell width.
    pub good_measure: f64,
    pub annulus_width: f64,
    /// `1 / |U|`.
    pub eta_gradient_max: f64,
    pub eta: RadialProfile,
    pub value_energy: f64,
    pub gradient_energy: f64,
    /// `F(u, rho, sigma)`.
    pub shell_energy: f64,
    pub lhs: f64,
    pub bound: f64,
}

impl CutoffReport {
    /// `|U| >= (sigma - rho)/2`, decided on shell counts.
    pub fn measure_ok(&self) -> bool {
        2 * self.good_count >= self.shell_count
    }

    pub fn gradient_ok(&self) -> bool {
        self.eta_gradient_max <= 2.0 / self.annulus_width
    }
}

struct ShellLayout {
    n: usize,
    rule: SphereRule,
    edges: Vec<f64>,
    nodes: Vec<f64>,
    dr: f64,
    first: usize,
    last: usize,
}

fn layout(u: &SampledFunction, rho: f64, sigma: f64) -> Result<ShellLayout> {
    let Grid::Radial { n, radius, shells, angular_order } = *u.grid() else {
        return Err(Error::Resolution("the cutoff needs shell-resolved samples on a radial grid".into()));
    };
    if !(0.0 < rho && rho < sigma && sigma < 1.0) {
        return Err(Error::Domain(format!("need 0 < rho < sigma < 1, got ({rho}, {sigma})")));
    }
    if sigma > radius {
        return Err(Error::GridMismatch(format!("grid radius {radius} is below sigma = {sigma}")));
    }
    let dr = radius / shells as f64;
    let on_edge = |r: f64| -> Result<usize> {
        let i = (r / dr).round();
        if (i * dr - r).abs() > 1e-9 * dr {
            return Err(Error::Resolution(format!("radius {r} is not a shell edge (width {dr})")));
        }
        Ok(i as usize)
    };
    let (first, last) = (on_edge(rho)?, on_edge(sigma)?);
    if last - first < MIN_SHELLS {
        return Err(Error::Resolution(format!("{} shells in [rho, sigma], need at least {MIN_SHELLS}", last - first)));
    }
    let rule = SphereRule::new(n, angular_order)?;
    let (edges, nodes) = crate::sampled::shell_layout(n, radius, shells);
    Ok(ShellLayout { n, rule, edges, nodes, dr, first, last })
}

/// Per-shell `(sum_z w A(|u|), sum_z w A(|grad_S u_r|))`, `grad_S u_r = r (g - (g.z) z)`.
fn sphere_modulars(u: &SampledFunction, grads: &[f64], a: &YoungFunction, lay: &ShellLayout, shell: usize) -> (f64, f64) {
    let m = lay.rule.len();
    let n = lay.n;
    let r = lay.nodes[shell];
    let mut vals = Vec::with_capacity(m);
    let mut tans = Vec::with_capacity(m);
    for (d, (z, w)) in lay.rule.directions.iter().zip(&lay.rule.weights).enumerate() {
        let i = shell * m + d;
        vals.push(w * a.value(u.values()[i].abs()));
        let g = &grads[i * n..(i + 1) * n];
        let gz: f64 = g.iter().zip(z).map(|(x, y)| x * y).sum();
        let t: f64 = g.iter().zip(z).map(|(x, y)| (x - gz * y).powi(2)).sum::<f64>().sqrt();
        tans.push(w * a.value(r * t));
    }
    (pairwise_sum(&vals), pairwise_sum(&tans))
}

/// Good-radii cutoff between `B_rho` and `B_sigma` and the regime bound on
/// `int B(|u grad eta|)`.
pub fn optimized_cutoff(
    u: &SampledFunction,
    a: &YoungFunction,
    b: &YoungFunction,
    rho: f64,
    sigma: f64,
    regime: CutoffRegime,
    constants: CutoffConstants,
) -> Result<CutoffReport> {
    let lay = layout(u, rho, sigma)?;
    let n = lay.n;
    let nf = n as f64;
    if !(constants.q >= 1.0 && constants.l >= 1.0 && constants.kappa > 0.0) {
        return Err(Error::Domain("constants need q >= 1, L >= 1, kappa > 0".into()));
    }
    let grads = u.gradient_or_fd()?;
    let m = lay.rule.len();
    let range = lay.first..lay.last;

    let mut fv = Vec::with_capacity(range.len() * m);
    let mut fg = Vec::with_capacity(range.len() * m);
    for shell in range.clone() {
        for d in 0..m {
            let i = shell * m + d;
            let w = u.weights()[i];
            let g: f64 = grads[i * n..(i + 1) * n].iter().map(|x| x * x).sum::<f64>().sqrt();
            fv.push(w * a.value(u.values()[i].abs()));
            fg.push(w * a.value(g));
        }
    }
    let (value_energy, gradient_energy) = (pairwise_sum(&fv), pairwise_sum(&fg));
    let width = lay.dr * (lay.last - lay.first) as f64;

    let shells: Vec<ShellRecord> = range
        .clone()
        .map(|shell| {
            let (sv, sg) = sphere_modulars(u, &grads, a, &lay, shell);
            let scale = 4.0 / (width * lay.nodes[shell].powf(nf - 1.0));
            ShellRecord {
                r_inner: lay.edges[shell],
                r_outer: lay.edges[shell + 1],
                r_node: lay.nodes[shell],
                sphere_value_modular: sv,
                sphere_gradient_modular: sg,
                in_u1: sg <= scale * gradient_energy,
                in_u2: sv <= scale * value_energy,
            }
        })
        .collect();
    let good_count = shells.iter().filter(|s| s.good()).count();
    let shell_count = shells.len();
    let good_measure = lay.dr * good_count as f64;
    let eta_gradient_max = if good_count == 0 { f64::INFINITY } else { 1.0 / good_measure };

    let mut values = vec![0.0; shell_count + 1];
    let mut above = 0usize;
    for (i, s) in shells.iter().enumerate().rev() {
        if s.good() {
            above += 1;
        }
        values[i] = above as f64 / good_count.max(1) as f64;
    }
    let eta = RadialProfile { edges: lay.edges[lay.first..=lay.last].to_vec(), values };

    let mut lhs_terms = Vec::with_capacity(good_count * m);
    for (k, s) in shells.iter().enumerate() {
        if s.good() {
            let shell = lay.first + k;
            for d in 0..m {
                let i = shell * m + d;
                lhs_terms.push(u.weights()[i] * b.value(u.values()[i].abs() / good_measure));
            }
        }
    }
    let lhs = pairwise_sum(&lhs_terms);

    let f = value_energy + gradient_energy;
    let (q, l, kappa) = (constants.q, constants.l, constants.kappa);
    let e = 1.0 / (nf - 1.0);
    let bound = match regime {
        CutoffRegime::Subcritical => {
            let arg = 2.0 * l * kappa * 4f64.powf(e) * f.powf(e) / (width.powf(nf * e) * rho);
            4.0 * f * phi_q(q, arg)?
        }
        CutoffRegime::Supercritical => {
            l * 2f64.powf(q) * 4f64.powf(q * e) * kappa.powf(q) * f.powf(q * e)
                / (width.powf(q - 1.0 + q * e) * rho.powf(q - (nf - 1.0)))
        }
    };

    Ok(CutoffReport {
        rho,
        sigma,
        regime,
        constants,
        shells,
        shell_count,
        good_count,
        shell_width: lay.dr,
        good_measure,
        annulus_width: width,
        eta_gradient_max,
        eta,
        value_energy,
        gradient_energy,
        shell_energy: f,
        lhs,
        bound,
    })
}

/// Smallest `kappa = 2^k / 8` for which the sphere inequality used by the
/// cutoff bound holds on every annulus shell of every seed.
///
/// Subcritical: `sum_z w A_{n-1}(|u| / (kappa F_r^{1/(n-1)})) <= F_r`, with
/// `sphere_target` the `(n-1)`-dimensional conjugate.
/// Supercritical: `(sum_z w |u|^q)^{1/q} <= kappa F_r^{1/(n-1)}`.
pub fn calibrate_sphere_kappa(
    seeds: &[SampledFunction],
    a: &YoungFunction,
    sphere_target: Option<&YoungFunction>,
    q: f64,
    rho: f64,
    sigma: f64,
    regime: CutoffRegime,
) -> Result<f64> {
    let mut need: f64 = 0.0;
    for u in seeds {
        let lay = layout(u, rho, sigma)?;
        let grads = u.gradient_or_fd()?;
        let m = lay.rule.len();
        let e = 1.0 / (lay.n as f64 - 1.0);
        for shell in lay.first..lay.last {
            let (sv, sg) = sphere_modulars(u, &grads, a, &lay, shell);
            let fr = sv + sg;
            let vals: Vec<f64> = (0..m).map(|d| u.values()[shell * m + d].abs()).collect();
            if vals.iter().all(|v| *v == 0.0) {
                continue;
            }
            if fr == 0.0 {
                return Err(Error::DivisionGuard("non-zero trace with zero sphere energy".into()));
            }
            let denom = fr.powf(e);
            let k = match regime {
                CutoffRegime::Supercritical => {
                    let s: Vec<f64> = vals.iter().zip(&lay.rule.weights).map(|(v, w)| w * v.powf(q)).collect();
                    pairwise_sum(&s).powf(1.0 / q) / denom
                }
                CutoffRegime::Subcritical => {
                    let target = sphere_target.ok_or_else(|| Error::Precondition("the subcritical regime needs A_{n-1}".into()))?;
                    let modular = |kap: f64| {
                        let s: Vec<f64> = vals.iter().zip(&lay.rule.weights).map(|(v, w)| w * target.value(v / (kap * denom))).collect();
                        pairwise_sum(&s)
                    };
                    let mut hi = 1.0;
                    while modular(hi) > fr {
                        hi *= 2.0;
                        if hi > 1e12 {
                            return Err(Error::UnboundedNorm);
                        }
                    }
                    let mut lo = hi / 2.0;
                    while modular(lo) <= fr && lo > 1e-12 {
                        lo /= 2.0;
                    }
                    for _ in 0..80 {
                        let mid = 0.5 * (lo + hi);
                        if modular(mid) <= fr { hi = mid } else { lo = mid }
                    }
                    hi
                }
            };
            need = need.max(k);
        }
    }
    let mut kappa = 0.125;
    while kappa < need {
        kappa *= 2.0;
    }
    Ok(kappa)
}
