//! Scalar fields sampled on radial, Cartesian or scattered node sets, with
//! positive measure weights and optional gradients.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Node layout of a [`SampledFunction`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Grid {
    /// Ball of radius `radius` cut into `shells` equal shells; `angular_order`
    /// sets the sphere quadrature (2K equispaced angles in 2D, K Gauss-Legendre
    /// polar nodes times 2K azimuths in 3D).
    Radial { n: usize, radius: f64, shells: usize, angular_order: usize },
    /// Cell-centred nodes on a box with `counts[i]` cells along axis `i`.
    Cartesian { n: usize, lower: Vec<f64>, upper: Vec<f64>, counts: Vec<usize> },
    Scattered { n: usize },
}

impl Grid {
    pub fn dim(&self) -> usize {
        match self {
            Grid::Radial { n, .. } | Grid::Cartesian { n, .. } | Grid::Scattered { n } => *n,
        }
    }
}

/// Directions and weights of the sphere quadrature used on radial grids.
#[derive(Clone, Debug, PartialEq)]
pub struct SphereRule {
    pub directions: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    /// 3D only: polar (cos theta) index and azimuth index per direction.
    pub polar: Vec<(usize, usize)>,
    pub cos_nodes: Vec<f64>,
    pub azimuths: usize,
}

impl SphereRule {
    pub fn new(n: usize, order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::Domain("angular order must be positive".into()));
        }
        match n {
            2 => {
                let m = 2 * order;
                let dirs: Vec<Vec<f64>> = (0..m)
                    .map(|j| {
                        let th = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / m as f64;
                        vec![th.cos(), th.sin()]
                    })
                    .collect();
                let w = 2.0 * std::f64::consts::PI / m as f64;
                Ok(Self { weights: vec![w; m], polar: (0..m).map(|j| (0, j)).collect(), directions: dirs, cos_nodes: vec![], azimuths: m })
            }
            3 => {
                let (x, wx) = gauss_legendre(order);
                let m = 2 * order;
                let mut directions = Vec::with_capacity(order * m);
                let mut weights = Vec::with_capacity(order * m);
                let mut polar = Vec::with_capacity(order * m);
                for (i, (&c, &wc)) in x.iter().zip(&wx).enumerate() {
                    let s = (1.0 - c * c).sqrt();
                    for j in 0..m {
                        let ph = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / m as f64;
                        directions.push(vec![s * ph.cos(), s * ph.sin(), c]);
                        weights.push(wc * 2.0 * std::f64::consts::PI / m as f64);
                        polar.push((i, j));
                    }
                }
                Ok(Self { directions, weights, polar, cos_nodes: x, azimuths: m })
            }
            _ => Err(Error::Domain(format!("radial grids are available for n = 2 and n = 3, got {n}"))),
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(k: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; k];
    let mut w = vec![0.0; k];
    for i in 0..k {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (k as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=k {
                let p2 = ((2 * j - 1) as f64 * z * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = k as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[k - 1 - i] = z;
        w[k - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// Scalar field with node coordinates, measure weights and optional gradient.
#[derive(Clone, Debug)]
pub struct SampledFunction {
    grid: Grid,
    coords: Vec<f64>,
    weights: Vec<f64>,
    values: Vec<f64>,
    gradient: Option<Vec<f64>>,
}

type Field<'a> = &'a dyn Fn(&[f64]) -> f64;
type GradField<'a> = &'a dyn Fn(&[f64]) -> Vec<f64>;

/// Edges and volume-equivalent node radii of the shells of a radial grid.
pub fn shell_layout(n: usize, radius: f64, shells: usize) -> (Vec<f64>, Vec<f64>) {
    let nf = n as f64;
    let dr = radius / shells as f64;
    let edges: Vec<f64> = (0..=shells).map(|i| radius * i as f64 / shells as f64).collect();
    let nodes = edges
        .windows(2)
        .map(|e| ((e[1].powf(nf) - e[0].powf(nf)) / (nf * dr)).powf(1.0 / (nf - 1.0)))
        .collect();
    (edges, nodes)
}

impl SampledFunction {
    /// Radial grid on the ball of radius `radius`; node index is `shell * M + direction`.
    pub fn radial(n: usize, radius: f64, shells: usize, angular_order: usize, f: Field) -> Result<Self> {
        if !(radius > 0.0) || shells == 0 {
            return Err(Error::Domain("radial grid needs radius > 0 and at least one shell".into()));
        }
        let rule = SphereRule::new(n, angular_order)?;
        let (edges, nodes) = shell_layout(n, radius, shells);
        let nf = n as f64;
        let mut coords = Vec::with_capacity(shells * rule.len() * n);
        let mut weights = Vec::with_capacity(shells * rule.len());
        for (i, &rb) in nodes.iter().enumerate() {
            let shell_measure = (edges[i + 1].powf(nf) - edges[i].powf(nf)) / nf;
            for (d, w) in rule.directions.iter().zip(&rule.weights) {
                coords.extend(d.iter().map(|z| rb * z));
                weights.push(shell_measure * w);
            }
        }
        let grid = Grid::Radial { n, radius, shells, angular_order };
        Ok(Self::from_parts(grid, coords, weights, f))
    }

    /// Cell-centred Cartesian grid.
    pub fn cartesian(lower: &[f64], upper: &[f64], counts: &[usize], f: Field) -> Result<Self> {
        let n = lower.len();
        if n == 0 || upper.len() != n || counts.len() != n {
            return Err(Error::Domain("box bounds and counts must share one dimension".into()));
        }
        if counts.iter().any(|c| *c == 0) || lower.iter().zip(upper).any(|(a, b)| !(b > a)) {
            return Err(Error::Domain("degenerate Cartesian grid".into()));
        }
        let h: Vec<f64> = (0..n).map(|i| (upper[i] - lower[i]) / counts[i] as f64).collect();
        let cell: f64 = h.iter().product();
        let total: usize = counts.iter().product();
        let mut coords = Vec::with_capacity(total * n);
        let mut idx = vec![0usize; n];
        for _ in 0..total {
            for a in 0..n {
                coords.push(lower[a] + (idx[a] as f64 + 0.5) * h[a]);
            }
            for a in (0..n).rev() {
                idx[a] += 1;
                if idx[a] < counts[a] {
                    break;
                }
                idx[a] = 0;
            }
        }
        let grid = Grid::Cartesian { n, lower: lower.to_vec(), upper: upper.to_vec(), counts: counts.to_vec() };
        Ok(Self::from_parts(grid, coords, vec![cell; total], f))
    }

    fn from_parts(grid: Grid, coords: Vec<f64>, weights: Vec<f64>, f: Field) -> Self {
        let n = grid.dim();
        let values = coords.chunks(n).map(f).collect();
        Self { grid, coords, weights, values, gradient: None }
    }

    /// Scattered nodes with explicit weights.
    pub fn scattered(n: usize, coords: Vec<f64>, weights: Vec<f64>, values: Vec<f64>, gradient: Option<Vec<f64>>) -> Result<Self> {
        let m = weights.len();
        if coords.len() != m * n || values.len() != m || gradient.as_ref().is_some_and(|g| g.len() != m * n) {
            return Err(Error::GridMismatch("coordinate, weight, value and gradient lengths disagree".into()));
        }
        if weights.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::Domain("weights must be positive".into()));
        }
        Ok(Self { grid: Grid::Scattered { n }, coords, weights, values, gradient })
    }

    /// Attaches an analytic gradient.
    pub fn with_gradient(mut self, g: GradField) -> Self {
        let n = self.dim();
        let mut out = Vec::with_capacity(self.coords.len());
        for x in self.coords.chunks(n) {
            let v = g(x);
            debug_assert_eq!(v.len(), n);
            out.extend(v);
        }
        self.gradient = Some(out);
        self
    }

    /// Fills the gradient by finite differences on the structured grid.
    pub fn with_fd_gradient(mut self) -> Result<Self> {
        self.gradient = Some(self.fd_gradient()?);
        Ok(self)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn point(&self, i: usize) -> &[f64] {
        let n = self.dim();
        &self.coords[i * n..(i + 1) * n]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn gradient(&self) -> Option<&[f64]> {
        self.gradient.as_deref()
    }

    pub fn measure(&self) -> f64 {
        pairwise_sum(&self.weights)
    }

    pub fn same_grid(&self, other: &SampledFunction) -> bool {
        self.grid == other.grid && self.coords == other.coords && self.weights == other.weights
    }

    /// Gradient vectors: stored ones, or finite differences on structured grids.
    pub fn gradient_or_fd(&self) -> Result<std::borrow::Cow<'_, [f64]>> {
        match &self.gradient {
            Some(g) => Ok(std::borrow::Cow::Borrowed(g)),
            None => self.fd_gradient().map(std::borrow::Cow::Owned),
        }
    }

    pub fn gradient_magnitudes(&self) -> Result<Vec<f64>> {
        let n = self.dim();
        let g = self.gradient_or_fd()?;
        Ok(g.chunks(n).map(|v| v.iter().map(|x| x * x).sum::<f64>().sqrt()).collect())
    }

    /// `c u`.
    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= c);
        if let Some(g) = out.gradient.as_mut() {
            g.iter_mut().for_each(|v| *v *= c);
        }
        out
    }

    /// `u - c`.
    pub fn shifted(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v -= c);
        out
    }

    /// `(u - k)_+`, with gradient equal to that of `u` where `u > k` and zero elsewhere.
    pub fn positive_part_above(&self, k: f64) -> Result<Self> {
        let n = self.dim();
        let grad = self.gradient_or_fd()?.into_owned();
        let mut out = self.clone();
        let mut g = grad;
        for (i, v) in out.values.iter_mut().enumerate() {
            if *v > k {
                *v -= k;
            } else {
                *v = 0.0;
                g[i * n..(i + 1) * n].iter_mut().for_each(|x| *x = 0.0);
            }
        }
        out.gradient = Some(g);
        Ok(out)
    }

    /// Weighted mean of the values.
    pub fn mean(&self) -> f64 {
        let wv: Vec<f64> = self.weights.iter().zip(&self.values).map(|(w, v)| w * v).collect();
        pairwise_sum(&wv) / self.measure()
    }

    fn fd_gradient(&self) -> Result<Vec<f64>> {
        match &self.grid {
            Grid::Cartesian { n, lower, upper, counts } => Ok(fd_cartesian(*n, lower, upper, counts, &self.values)),
            Grid::Radial { n, radius, shells, angular_order } => {
                fd_radial(*n, *radius, *shells, *angular_order, &self.values)
            }
            Grid::Scattered { .. } => Err(Error::MissingGradient),
        }
    }

    /// Writes `x..., weight, value[, g...]` rows plus a `<file>.grid.json` sidecar.
    pub fn write_csv(&self, path: &Path) -> Result<PathBuf> {
        let n = self.dim();
        let mut w = csv::Writer::from_path(path)?;
        let mut header: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
        header.push("weight".into());
        header.push("value".into());
        if self.gradient.is_some() {
            header.extend((0..n).map(|i| format!("g{i}")));
        }
        w.write_record(&header)?;
        for i in 0..self.len() {
            let mut row: Vec<String> = self.point(i).iter().map(|x| format!("{x:e}")).collect();
            row.push(format!("{:e}", self.weights[i]));
            row.push(format!("{:e}", self.values[i]));
            if let Some(g) = &self.gradient {
                row.extend(g[i * n..(i + 1) * n].iter().map(|x| format!("{x:e}")));
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        let sidecar = sidecar_path(path);
        std::fs::write(&sidecar, serde_json::to_string_pretty(&self.grid)?)?;
        Ok(sidecar)
    }

    /// Reads the format of [`SampledFunction::write_csv`]; the sidecar is optional.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|source| Error::Read { path: path.to_path_buf(), source })?;
        let mut r = csv::Reader::from_reader(file);
        let header = r.headers()?.clone();
        let n = header.iter().filter(|h| h.starts_with('x')).count();
        let has_grad = header.iter().any(|h| h.starts_with('g'));
        if n == 0 || header.len() != n + 2 + if has_grad { n } else { 0 } {
            return Err(Error::Config(format!("unexpected CSV header in {}", path.display())));
        }
        let (mut coords, mut weights, mut values, mut grad) = (vec![], vec![], vec![], vec![]);
        for rec in r.records() {
            let rec = rec?;
            let nums: Vec<f64> = rec
                .iter()
                .map(|s| s.trim().parse::<f64>().map_err(|_| Error::Config(format!("`{s}` is not a number"))))
                .collect::<Result<_>>()?;
            coords.extend_from_slice(&nums[..n]);
            weights.push(nums[n]);
            values.push(nums[n + 1]);
            if has_grad {
                grad.extend_from_slice(&nums[n + 2..]);
            }
        }
        let mut f = Self::scattered(n, coords, weights, values, has_grad.then_some(grad))?;
        let sidecar = sidecar_path(path);
        if sidecar.exists() {
            let grid: Grid = serde_json::from_str(&std::fs::read_to_string(&sidecar)?)?;
            if grid.dim() != n {
                return Err(Error::GridMismatch("sidecar dimension differs from CSV columns".into()));
            }
            f.grid = grid;
        }
        Ok(f)
    }
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".grid.json");
    PathBuf::from(s)
}

/// Sum with a fixed binary reduction tree.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 16 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

fn fd_cartesian(n: usize, lower: &[f64], upper: &[f64], counts: &[usize], values: &[f64]) -> Vec<f64> {
    let total = values.len();
    let mut strides = vec![1usize; n];
    for a in (0..n.saturating_sub(1)).rev() {
        strides[a] = strides[a + 1] * counts[a + 1];
    }
    let mut out = vec![0.0; total * n];
    for idx in 0..total {
        for a in 0..n {
            let h = (upper[a] - lower[a]) / counts[a] as f64;
            let i = (idx / strides[a]) % counts[a];
            let at = |k: usize| values[idx - i * strides[a] + k * strides[a]];
            let c = counts[a];
            out[idx * n + a] = if c == 1 {
                0.0
            } else if c == 2 {
                (at(1) - at(0)) / h
            } else if i == 0 {
                (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h)
            } else if i == c - 1 {
                (3.0 * at(c - 1) - 4.0 * at(c - 2) + at(c - 3)) / (2.0 * h)
            } else {
                (at(i + 1) - at(i - 1)) / (2.0 * h)
            };
        }
    }
    out
}

fn three_point(x: [f64; 3], y: [f64; 3], at: usize) -> f64 {
    let [x0, x1, x2] = x;
    let [y0, y1, y2] = y;
    let xe = x[at];
    let l0 = (2.0 * xe - x1 - x2) / ((x0 - x1) * (x0 - x2));
    let l1 = (2.0 * xe - x0 - x2) / ((x1 - x0) * (x1 - x2));
    let l2 = (2.0 * xe - x0 - x1) / ((x2 - x0) * (x2 - x1));
    l0 * y0 + l1 * y1 + l2 * y2
}

fn derivative_along(x: &[f64], y: &[f64], i: usize) -> f64 {
    let m = x.len();
    if m < 2 {
        return 0.0;
    }
    if m == 2 {
        return (y[1] - y[0]) / (x[1] - x[0]);
    }
    let (s, at) = if i == 0 { (0, 0) } else if i == m - 1 { (m - 3, 2) } else { (i - 1, 1) };
    three_point([x[s], x[s + 1], x[s + 2]], [y[s], y[s + 1], y[s + 2]], at)
}

fn fd_radial(n: usize, radius: f64, shells: usize, order: usize, values: &[f64]) -> Result<Vec<f64>> {
    let rule = SphereRule::new(n, order)?;
    let (_, radii) = shell_layout(n, radius, shells);
    let m = rule.len();
    let mut out = vec![0.0; values.len() * n];
    let two_pi = 2.0 * std::f64::consts::PI;
    for s in 0..shells {
        let r = radii[s];
        for d in 0..m {
            let along: Vec<f64> = (0..shells).map(|k| values[k * m + d]).collect();
            let ur = derivative_along(&radii, &along, s);
            let z = &rule.directions[d];
            let idx = s * m + d;
            if n == 2 {
                let dth = two_pi / m as f64;
                let up = values[s * m + (d + 1) % m];
                let dn = values[s * m + (d + m - 1) % m];
                let uth = (up - dn) / (2.0 * dth);
                let th_hat = [-z[1], z[0]];
                for a in 0..2 {
                    out[idx * 2 + a] = ur * z[a] + uth / r * th_hat[a];
                }
            } else {
                let (pi, aj) = rule.polar[d];
                let az = rule.azimuths;
                let thetas: Vec<f64> = rule.cos_nodes.iter().map(|c| c.acos()).collect();
                let col: Vec<f64> = (0..rule.cos_nodes.len()).map(|k| values[s * m + k * az + aj]).collect();
                let uth = derivative_along(&thetas, &col, pi);
                let dph = two_pi / az as f64;
                let up = values[s * m + pi * az + (aj + 1) % az];
                let dn = values[s * m + pi * az + (aj + az - 1) % az];
                let uph = (up - dn) / (2.0 * dph);
                let th = thetas[pi];
                let ph = two_pi * (aj as f64 + 0.5) / az as f64;
                let th_hat = [th.cos() * ph.cos(), th.cos() * ph.sin(), -th.sin()];
                let ph_hat = [-ph.sin(), ph.cos(), 0.0];
                for a in 0..3 {
                    out[idx * 3 + a] = ur * z[a] + uth / r * th_hat[a] + uph / (r * th.sin()) * ph_hat[a];
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radial_weights_sum_to_ball_measure() {
        let pi = std::f64::consts::PI;
        let f2 = SampledFunction::radial(2, 1.0, 40, 6, &|_| 0.0).unwrap();
        assert!((f2.measure() - pi).abs() < 1e-12 * pi);
        let f3 = SampledFunction::radial(3, 0.5, 40, 8, &|_| 0.0).unwrap();
        let vol = 4.0 / 3.0 * pi * 0.125;
        assert!((f3.measure() - vol).abs() < 1e-12 * vol);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(5);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(8)).sum();
        assert!((s - 2.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn cartesian_fd_gradient_is_second_order() {
        let err = |m: usize| {
            let f = SampledFunction::cartesian(&[0.0, 0.0], &[1.0, 1.0], &[m, m], &|x| (x[0] * 2.0).sin() * x[1] * x[1]).unwrap();
            let g = f.gradient_or_fd().unwrap();
            let mut worst: f64 = 0.0;
            for i in 0..f.len() {
                let x = f.point(i);
                let ex = [2.0 * (2.0 * x[0]).cos() * x[1] * x[1], 2.0 * (2.0 * x[0]).sin() * x[1]];
                worst = worst.max((g[2 * i] - ex[0]).abs()).max((g[2 * i + 1] - ex[1]).abs());
            }
            worst
        };
        let (e1, e2) = (err(20), err(40));
        assert!(e1 / e2 > 3.5, "ratio {}", e1 / e2);
    }

    #[test]
    fn radial_fd_gradient_converges() {
        for n in [2usize, 3] {
            let err = |shells: usize, order: usize| {
                let f = SampledFunction::radial(n, 1.0, shells, order, &|x| x[0] + 0.5 * x[1] * x[1]).unwrap();
                let g = f.gradient_or_fd().unwrap();
                let mut worst: f64 = 0.0;
                for i in 0..f.len() {
                    let x = f.point(i);
                    let r: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                    if r < 0.2 || r > 0.8 {
                        continue;
                    }
                    worst = worst.max((g[i * n] - 1.0).abs()).max((g[i * n + 1] - x[1]).abs());
                }
                worst
            };
            let (e1, e2) = (err(32, 16), err(64, 32));
            assert!(e2 < e1 && e2 < 0.05, "n={n}: {e1} {e2}");
        }
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u.csv");
        let f = SampledFunction::cartesian(&[0.0], &[1.0], &[10], &|x| x[0] * x[0]).unwrap().with_gradient(&|x| vec![2.0 * x[0]]);
        f.write_csv(&path).unwrap();
        let g = SampledFunction::read_csv(&path).unwrap();
        assert_eq!(g.grid(), f.grid());
        assert_eq!(g.values(), f.values());
        assert_eq!(g.gradient(), f.gradient());
    }

    #[test]
    fn scattered_without_gradient_errors() {
        let f = SampledFunction::scattered(1, vec![0.5], vec![1.0], vec![2.0], None).unwrap();
        assert!(matches!(f.gradient_magnitudes(), Err(Error::MissingGradient)));
    }
}
