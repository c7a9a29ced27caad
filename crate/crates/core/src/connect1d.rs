//! Heteroclinic connections between wells, their actions, and the degenerate
//! metric `d(z1, z2) = inf int sqrt(2 W(gamma)) |gamma'|`.

use std::io::Write;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::potential::{dist2, norm, Potential};

/// A discretized 1D connection `U(t_k)`, `t_k = -L + k dt`.
#[derive(Clone, Debug)]
pub struct ConnectionProfile {
    pub dim: usize,
    /// Row-major `n x m` samples.
    pub samples: Vec<f64>,
    pub step: f64,
    pub half_length: f64,
    pub endpoints: (usize, usize),
    pub action: f64,
    /// Action after every accepted Newton step, starting with the initial guess.
    pub action_trace: Vec<f64>,
    pub gradient_norm: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ConnectionSummary {
    pub i: usize,
    pub j: usize,
    pub action: f64,
    pub defect: f64,
    #[serde(rename = "L")]
    pub half_length: f64,
    pub n: usize,
}

impl ConnectionProfile {
    pub fn len(&self) -> usize {
        self.samples.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn node(&self, k: usize) -> &[f64] {
        &self.samples[k * self.dim..(k + 1) * self.dim]
    }

    pub fn time(&self, k: usize) -> f64 {
        -self.half_length + k as f64 * self.step
    }

    /// Linear interpolation of the profile at time `t`, clamped to `[-L, L]`.
    pub fn sample_at(&self, t: f64, out: &mut [f64]) {
        let n = self.len();
        let s = ((t + self.half_length) / self.step).clamp(0.0, (n - 1) as f64);
        let k = (s.floor() as usize).min(n - 2);
        let w = s - k as f64;
        let (a, b) = (self.node(k), self.node(k + 1));
        for (o, (x, y)) in out.iter_mut().zip(a.iter().zip(b)) {
            *o = (1.0 - w) * x + w * y;
        }
    }

    pub fn summary(&self, p: &Potential) -> ConnectionSummary {
        ConnectionSummary {
            i: self.endpoints.0,
            j: self.endpoints.1,
            action: self.action,
            defect: equipartition_defect(p, self),
            half_length: self.half_length,
            n: self.len(),
        }
    }

    /// CSV with columns `t, U_1..U_m`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let header: Vec<String> = std::iter::once("t".to_string())
            .chain((1..=self.dim).map(|c| format!("U_{c}")))
            .collect();
        writeln!(w, "{}", header.join(","))?;
        for k in 0..self.len() {
            write!(w, "{:.12e}", self.time(k))?;
            for x in self.node(k) {
                write!(w, ",{x:.12e}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Kinetic part on segments, potential part by the trapezoid rule on nodes.
pub fn discrete_action(p: &Potential, samples: &[f64], dim: usize, step: f64) -> f64 {
    let n = samples.len() / dim;
    let mut kinetic = 0.0;
    for k in 0..n - 1 {
        let a = &samples[k * dim..(k + 1) * dim];
        let b = &samples[(k + 1) * dim..(k + 2) * dim];
        kinetic += dist2(a, b);
    }
    let mut pot = 0.0;
    for k in 0..n {
        let w = if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
        pot += w * p.value(&samples[k * dim..(k + 1) * dim]);
    }
    0.5 * kinetic / step + step * pot
}

fn action_gradient(p: &Potential, u: &[f64], dim: usize, step: f64, out: &mut [f64]) {
    let n = u.len() / dim;
    let mut wu = vec![0.0; dim];
    out.iter_mut().for_each(|x| *x = 0.0);
    for k in 1..n - 1 {
        p.gradient(&u[k * dim..(k + 1) * dim], &mut wu);
        for c in 0..dim {
            let i = k * dim + c;
            out[i] = (2.0 * u[i] - u[i - dim] - u[i + dim]) / step + step * wu[c];
        }
    }
}

/// Solves `(H + shift I) x = rhs` for the block tridiagonal Hessian of the
/// discrete action over interior nodes. Returns `None` when the shifted
/// matrix is not positive definite.
fn solve_block_tridiagonal(
    p: &Potential,
    u: &[f64],
    dim: usize,
    step: f64,
    shift: f64,
    rhs: &[f64],
) -> Option<Vec<f64>> {
    let n = u.len() / dim;
    let inner = n - 2;
    let coupling = 1.0 / (step * step);
    let mut schur_inv: Vec<DMatrix<f64>> = Vec::with_capacity(inner);
    let mut y: Vec<nalgebra::DVector<f64>> = Vec::with_capacity(inner);
    for idx in 0..inner {
        let k = idx + 1;
        let mut d = p.hessian(&u[k * dim..(k + 1) * dim]) * step;
        for c in 0..dim {
            d[(c, c)] += 2.0 / step + shift;
        }
        let mut r = nalgebra::DVector::from_column_slice(&rhs[k * dim..(k + 1) * dim]);
        if let Some(prev) = schur_inv.last() {
            d -= prev * coupling;
            r += prev * y.last().unwrap() / step;
        }
        let inv = d.cholesky()?.inverse();
        schur_inv.push(inv);
        y.push(r);
    }
    let mut x = vec![0.0; u.len()];
    let mut next: Option<nalgebra::DVector<f64>> = None;
    for idx in (0..inner).rev() {
        let mut r = y[idx].clone();
        if let Some(nx) = &next {
            r += nx / step;
        }
        let xi = &schur_inv[idx] * r;
        let k = idx + 1;
        x[k * dim..(k + 1) * dim].copy_from_slice(xi.as_slice());
        next = Some(xi);
    }
    Some(x)
}

fn initial_guess(a: &[f64], b: &[f64], half_length: f64, n: usize) -> (Vec<f64>, f64) {
    let dim = a.len();
    let step = 2.0 * half_length / (n - 1) as f64;
    let sep = dist2(a, b).sqrt();
    // transverse direction in the first two coordinates, used to break symmetry
    let normal: Vec<f64> = if dim >= 2 {
        let mut v = vec![0.0; dim];
        v[0] = -(b[1] - a[1]) / sep;
        v[1] = (b[0] - a[0]) / sep;
        v
    } else {
        vec![0.0; dim]
    };
    let mut u = vec![0.0; n * dim];
    for k in 0..n {
        let t = -half_length + k as f64 * step;
        let s = 0.5 * (1.0 + t.tanh());
        let bump = 0.05 * sep / t.cosh();
        for c in 0..dim {
            u[k * dim + c] = a[c] + s * (b[c] - a[c]) + bump * normal[c];
        }
    }
    u[..dim].copy_from_slice(a);
    u[(n - 1) * dim..].copy_from_slice(b);
    (u, step)
}

/// Minimizes the discrete action between wells `i` and `j` on `[-L, L]` with
/// clamped endpoints, by damped Newton iteration with a Levenberg shift.
pub fn solve_connection(
    p: &Potential,
    i: usize,
    j: usize,
    half_length: f64,
    n: usize,
) -> Result<ConnectionProfile> {
    if i == j {
        return Err(Error::SameWell(i));
    }
    let a = p.well(i)?.to_vec();
    let b = p.well(j)?.to_vec();
    if !(half_length >= 5.0) {
        return Err(invalid("L", format!("must be >= 5, got {half_length}")));
    }
    if n < 200 {
        return Err(invalid("n", format!("must be >= 200, got {n}")));
    }
    let dim = p.dim();
    let (mut u, step) = initial_guess(&a, &b, half_length, n);
    let mut action = discrete_action(p, &u, dim, step);
    let mut trace = vec![action];
    let mut grad = vec![0.0; u.len()];
    let mut shift = 0.0f64;
    let max_iter = 300;
    for _ in 0..max_iter {
        action_gradient(p, &u, dim, step, &mut grad);
        let gnorm = norm(&grad);
        if gnorm < 1e-11 {
            break;
        }
        let rhs: Vec<f64> = grad.iter().map(|g| -g).collect();
        let dir = loop {
            match solve_block_tridiagonal(p, &u, dim, step, shift, &rhs) {
                Some(d) if crate::potential::dot(&d, &grad) < 0.0 => break d,
                _ => shift = (shift * 10.0).max(1e-3 * step),
            }
            if shift > 1e12 {
                return Err(Error::NoConvergence {
                    solver: "connection",
                    iterations: trace.len() - 1,
                    gradient_norm: gnorm,
                });
            }
        };
        let slope = crate::potential::dot(&dir, &grad);
        let mut alpha = 1.0;
        let mut trial = u.clone();
        let accepted = loop {
            for (t, (x, d)) in trial.iter_mut().zip(u.iter().zip(&dir)) {
                *t = x + alpha * d;
            }
            let s = discrete_action(p, &trial, dim, step);
            if s <= action + 1e-4 * alpha * slope {
                break Some(s);
            }
            alpha *= 0.5;
            if alpha < 1e-12 {
                break None;
            }
        };
        match accepted {
            Some(s) => {
                u.copy_from_slice(&trial);
                action = s;
                trace.push(s);
                if alpha == 1.0 {
                    shift *= 0.1;
                    if shift < 1e-14 {
                        shift = 0.0;
                    }
                }
            }
            None => {
                // Armijo cannot make progress: either converged to roundoff or stuck.
                if gnorm < 1e-8 {
                    break;
                }
                shift = (shift * 10.0).max(1e-3 * step);
            }
        }
    }
    action_gradient(p, &u, dim, step, &mut grad);
    let gnorm = norm(&grad);
    if gnorm >= 1e-8 {
        return Err(Error::NoConvergence {
            solver: "connection",
            iterations: trace.len() - 1,
            gradient_norm: gnorm,
        });
    }
    Ok(ConnectionProfile {
        dim,
        samples: u,
        step,
        half_length,
        endpoints: (i, j),
        action,
        action_trace: trace,
        gradient_norm: gnorm,
    })
}

/// `sup_k | |U'(t_k)|^2 / 2 - W(U(t_k)) |` with centered differences on interior nodes.
pub fn equipartition_defect(p: &Potential, c: &ConnectionProfile) -> f64 {
    let dim = c.dim;
    let n = c.len();
    let mut worst = 0.0f64;
    for k in 1..n.saturating_sub(1) {
        let a = c.node(k - 1);
        let b = c.node(k + 1);
        let kin = 0.5 * dist2(a, b) / (4.0 * c.step * c.step);
        let w = p.value(&c.samples[k * dim..(k + 1) * dim]);
        worst = worst.max((kin - w).abs());
    }
    worst
}

/// All pairwise connections `i < j`, each solved once; `(j, i)` is the reversal.
#[derive(Clone, Debug)]
pub struct ConnectionTable {
    profiles: Vec<ConnectionProfile>,
    num_wells: usize,
}

impl ConnectionTable {
    pub fn solve(p: &Potential, half_length: f64, n: usize) -> Result<Self> {
        let mut profiles = Vec::new();
        for i in 0..p.num_wells() {
            for j in i + 1..p.num_wells() {
                profiles.push(solve_connection(p, i, j, half_length, n)?);
            }
        }
        Ok(ConnectionTable {
            profiles,
            num_wells: p.num_wells(),
        })
    }

    /// The profile joining `i < j` and whether it must be traversed backwards.
    pub fn get(&self, i: usize, j: usize) -> Option<(&ConnectionProfile, bool)> {
        let (lo, hi, rev) = if i < j { (i, j, false) } else { (j, i, true) };
        self.profiles
            .iter()
            .find(|c| c.endpoints == (lo, hi))
            .map(|c| (c, rev))
    }

    pub fn sigma(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        self.get(i, j).map(|(c, _)| c.action).unwrap_or(f64::NAN)
    }

    pub fn profiles(&self) -> &[ConnectionProfile] {
        &self.profiles
    }

    pub fn num_wells(&self) -> usize {
        self.num_wells
    }

    /// Mean of the pairwise actions.
    pub fn mean_sigma(&self) -> f64 {
        self.profiles.iter().map(|c| c.action).sum::<f64>() / self.profiles.len() as f64
    }
}

/// A polyline `gamma(s_k)` with its weighted length.
#[derive(Clone, Debug)]
pub struct GeodesicPath {
    pub dim: usize,
    pub nodes: Vec<f64>,
    pub length: f64,
}

impl GeodesicPath {
    pub fn node(&self, k: usize) -> &[f64] {
        &self.nodes[k * self.dim..(k + 1) * self.dim]
    }

    pub fn len(&self) -> usize {
        self.nodes.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// `sum_k sqrt(2 W(midpoint_k)) |gamma_{k+1} - gamma_k|`.
pub fn weighted_length(p: &Potential, nodes: &[f64], dim: usize) -> f64 {
    let n = nodes.len() / dim;
    let mut mid = vec![0.0; dim];
    let mut total = 0.0;
    for k in 0..n - 1 {
        let a = &nodes[k * dim..(k + 1) * dim];
        let b = &nodes[(k + 1) * dim..(k + 2) * dim];
        for c in 0..dim {
            mid[c] = 0.5 * (a[c] + b[c]);
        }
        total += (2.0 * p.value(&mid)).sqrt() * dist2(a, b).sqrt();
    }
    total
}

/// Redistributes the nodes to equal Euclidean arclength along the polyline.
pub fn reparametrize(nodes: &[f64], dim: usize) -> Vec<f64> {
    let n = nodes.len() / dim;
    let mut cum = vec![0.0; n];
    for k in 1..n {
        cum[k] = cum[k - 1]
            + dist2(&nodes[(k - 1) * dim..k * dim], &nodes[k * dim..(k + 1) * dim]).sqrt();
    }
    let total = cum[n - 1];
    let mut out = vec![0.0; nodes.len()];
    out[..dim].copy_from_slice(&nodes[..dim]);
    out[(n - 1) * dim..].copy_from_slice(&nodes[(n - 1) * dim..]);
    if total == 0.0 {
        return nodes.to_vec();
    }
    let mut seg = 0;
    for k in 1..n - 1 {
        let target = total * k as f64 / (n - 1) as f64;
        while seg < n - 2 && cum[seg + 1] < target {
            seg += 1;
        }
        let span = cum[seg + 1] - cum[seg];
        let w = if span > 0.0 { (target - cum[seg]) / span } else { 0.0 };
        for c in 0..dim {
            out[k * dim + c] = (1.0 - w) * nodes[seg * dim + c] + w * nodes[(seg + 1) * dim + c];
        }
    }
    out
}

fn length_gradient(p: &Potential, nodes: &[f64], dim: usize, out: &mut [f64]) {
    let n = nodes.len() / dim;
    out.iter_mut().for_each(|x| *x = 0.0);
    let mut mid = vec![0.0; dim];
    let mut wu = vec![0.0; dim];
    for k in 0..n - 1 {
        let a = &nodes[k * dim..(k + 1) * dim];
        let b = &nodes[(k + 1) * dim..(k + 2) * dim];
        for c in 0..dim {
            mid[c] = 0.5 * (a[c] + b[c]);
        }
        let w = p.value_gradient(&mid, &mut wu);
        let f = (2.0 * w).sqrt();
        let len = dist2(a, b).sqrt();
        if len == 0.0 {
            continue;
        }
        // grad f = W_u / sqrt(2W)
        let inv_f = if f > 1e-300 { 1.0 / f } else { 0.0 };
        for c in 0..dim {
            let half_grad_f = 0.5 * wu[c] * inv_f * len;
            let tangent = f * (b[c] - a[c]) / len;
            out[k * dim + c] += half_grad_f - tangent;
            out[(k + 1) * dim + c] += half_grad_f + tangent;
        }
    }
    out[..dim].iter_mut().for_each(|x| *x = 0.0);
    out[(n - 1) * dim..].iter_mut().for_each(|x| *x = 0.0);
}

/// Minimal weighted-length path between two points (string method: normal
/// descent steps followed by equal-arclength reparametrization).
pub fn geodesic_distance(p: &Potential, z1: &[f64], z2: &[f64], nodes: usize) -> Result<GeodesicPath> {
    if nodes < 100 {
        return Err(invalid("K", format!("must be >= 100, got {nodes}")));
    }
    let dim = p.dim();
    if z1.len() != dim || z2.len() != dim {
        return Err(invalid("z", "endpoint dimension does not match the potential"));
    }
    let count = nodes + 1;
    let mut path = vec![0.0; count * dim];
    for k in 0..count {
        let s = k as f64 / nodes as f64;
        for c in 0..dim {
            path[k * dim + c] = (1.0 - s) * z1[c] + s * z2[c];
        }
    }
    if dist2(z1, z2) == 0.0 {
        return Ok(GeodesicPath { dim, nodes: path, length: 0.0 });
    }
    let mut length = weighted_length(p, &path, dim);
    if dim == 1 {
        return Ok(GeodesicPath { dim, nodes: path, length });
    }

    let mut grad = vec![0.0; path.len()];
    let mut dir = vec![0.0; path.len()];
    let mut weights = vec![0.0; count - 1];
    let mut quiet = 0;
    let max_iter = 20_000;
    let mut gmax = f64::INFINITY;
    for _ in 0..max_iter {
        length_gradient(p, &path, dim, &mut grad);
        remove_tangential(&path, dim, &mut grad);
        gmax = (1..count - 1)
            .map(|k| norm(&grad[k * dim..(k + 1) * dim]))
            .fold(0.0, f64::max);
        if gmax == 0.0 {
            break;
        }
        // Precondition with the normal stiffness of each segment, f(mid)/|segment|.
        let mut mid = vec![0.0; dim];
        for k in 0..count - 1 {
            let a = &path[k * dim..(k + 1) * dim];
            let b = &path[(k + 1) * dim..(k + 2) * dim];
            for c in 0..dim {
                mid[c] = 0.5 * (a[c] + b[c]);
            }
            weights[k] = (2.0 * p.value(&mid)).sqrt() / dist2(a, b).sqrt().max(1e-300);
        }
        let wmax = weights.iter().cloned().fold(0.0, f64::max);
        precondition(&weights, 1e-6 * wmax, &grad, dim, &mut dir);
        remove_tangential(&path, dim, &mut dir);

        let slope: f64 = dir.iter().zip(&grad).map(|(d, g)| d * g).sum();
        let mut alpha = 1.0;
        let mut accepted = false;
        while alpha > 1e-10 {
            let mut trial = path.clone();
            for (t, d) in trial.iter_mut().zip(&dir) {
                *t -= alpha * d;
            }
            let trial = reparametrize(&trial, dim);
            let trial_len = weighted_length(p, &trial, dim);
            if trial_len <= length {
                let rel = (length - trial_len) / length;
                path = trial;
                length = trial_len;
                accepted = true;
                quiet = if rel < 1e-13 { quiet + 1 } else { 0 };
                break;
            }
            alpha *= 0.5;
        }
        if !accepted || quiet >= 5 || slope <= 1e-28 {
            return Ok(GeodesicPath { dim, nodes: path, length });
        }
    }
    Err(Error::NoConvergence {
        solver: "geodesic",
        iterations: max_iter,
        gradient_norm: gmax,
    })
}

fn remove_tangential(path: &[f64], dim: usize, v: &mut [f64]) {
    let count = path.len() / dim;
    for k in 1..count - 1 {
        let t: Vec<f64> = (0..dim)
            .map(|c| path[(k + 1) * dim + c] - path[(k - 1) * dim + c])
            .collect();
        let tn2 = t.iter().map(|x| x * x).sum::<f64>();
        if tn2 > 0.0 {
            let g = &mut v[k * dim..(k + 1) * dim];
            let proj: f64 = g.iter().zip(&t).map(|(x, y)| x * y).sum::<f64>() / tn2;
            for c in 0..dim {
                g[c] -= proj * t[c];
            }
        }
    }
}

/// Solves the tridiagonal system `(P + shift) out = rhs` per coordinate, where
/// `P` is the weighted second difference over interior nodes.
fn precondition(weights: &[f64], shift: f64, rhs: &[f64], dim: usize, out: &mut [f64]) {
    let count = weights.len() + 1;
    let inner = count - 2;
    out.iter_mut().for_each(|x| *x = 0.0);
    let mut cp = vec![0.0; inner];
    let mut dp = vec![0.0; inner];
    for c in 0..dim {
        for idx in 0..inner {
            let k = idx + 1;
            let diag = weights[k - 1] + weights[k] + shift;
            let lower = if idx > 0 { -weights[k - 1] } else { 0.0 };
            let upper = -weights[k];
            let r = rhs[k * dim + c];
            let denom = diag - lower * if idx > 0 { cp[idx - 1] } else { 0.0 };
            cp[idx] = upper / denom;
            dp[idx] = (r - lower * if idx > 0 { dp[idx - 1] } else { 0.0 }) / denom;
        }
        let mut next = 0.0;
        for idx in (0..inner).rev() {
            let x = dp[idx] - cp[idx] * next;
            out[(idx + 1) * dim + c] = x;
            next = x;
        }
    }
}

/// Precomputed distances `phi_k(z) = d(z, a_k)`.
///
/// Well-to-well values come from the geodesic solver. Off-well values use the
/// exact line integral for scalar potentials and a fast-sweeping eikonal
/// solution `|grad phi| = sqrt(2W)` on a lattice for planar ones.
#[derive(Clone, Debug)]
pub struct PhiTable {
    wells: Vec<Vec<f64>>,
    well_dist: Vec<Vec<f64>>,
    lattice: Option<Lattice>,
    potential: Potential,
}

#[derive(Clone, Debug)]
struct Lattice {
    lo: f64,
    spacing: f64,
    n: usize,
    values: Vec<Vec<f64>>,
}

impl PhiTable {
    pub fn build(p: &Potential, lattice_nodes: usize) -> Result<Self> {
        let nw = p.num_wells();
        let mut well_dist = vec![vec![0.0; nw]; nw];
        for i in 0..nw {
            for j in i + 1..nw {
                let g = geodesic_distance(p, &p.wells()[i], &p.wells()[j], 200)?;
                well_dist[i][j] = g.length;
                well_dist[j][i] = g.length;
            }
        }
        let lattice = match p.dim() {
            1 => None,
            2 => Some(eikonal_lattice(p, lattice_nodes)),
            d => {
                return Err(invalid("dim", format!("phi tables support m <= 2, got {d}")));
            }
        };
        Ok(PhiTable {
            wells: p.wells().to_vec(),
            well_dist,
            lattice,
            potential: p.clone(),
        })
    }

    pub fn well_distance(&self, i: usize, j: usize) -> f64 {
        self.well_dist[i][j]
    }

    pub fn num_wells(&self) -> usize {
        self.wells.len()
    }

    pub fn phi(&self, u: &[f64], k: usize) -> f64 {
        for (j, a) in self.wells.iter().enumerate() {
            if dist2(a, u) < 1e-24 {
                return self.well_dist[j][k];
            }
        }
        match &self.lattice {
            None => line_integral(&self.potential, self.wells[k][0], u[0]),
            Some(l) => l.interpolate(k, u),
        }
    }
}

fn line_integral(p: &Potential, from: f64, to: f64) -> f64 {
    // split at the wells so each piece integrates a polynomial of fixed sign
    let (lo, hi) = if from < to { (from, to) } else { (to, from) };
    let mut cuts = vec![lo];
    let mut inner: Vec<f64> = p.wells().iter().map(|a| a[0]).filter(|&x| x > lo && x < hi).collect();
    inner.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.extend(inner);
    cuts.push(hi);
    // 5-point Gauss-Legendre, exact up to degree 9
    const X: [f64; 5] = [
        0.0,
        -0.538_469_310_105_683_1,
        0.538_469_310_105_683_1,
        -0.906_179_845_938_664,
        0.906_179_845_938_664,
    ];
    const W: [f64; 5] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
        0.236_926_885_056_189_1,
    ];
    let mut total = 0.0;
    for win in cuts.windows(2) {
        let (a, b) = (win[0], win[1]);
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        for (x, w) in X.iter().zip(&W) {
            total += w * h * (2.0 * p.value(&[c + h * x])).sqrt();
        }
    }
    total
}

/// First-order fast sweeping on two nested lattices, combined by Richardson
/// extrapolation on the coarse nodes.
fn eikonal_lattice(p: &Potential, n: usize) -> Lattice {
    let n = n.max(101);
    let coarse = sweep_lattice(p, n);
    let fine = sweep_lattice(p, 2 * n - 1);
    let nf = 2 * n - 1;
    let values = coarse
        .values
        .iter()
        .zip(&fine.values)
        .map(|(c, f)| {
            (0..n * n)
                .map(|k| {
                    let (i, j) = (k % n, k / n);
                    (2.0 * f[2 * j * nf + 2 * i] - c[k]).max(0.0)
                })
                .collect()
        })
        .collect();
    Lattice { values, ..coarse }
}

fn sweep_lattice(p: &Potential, n: usize) -> Lattice {
    let r = p.bound_m();
    let lo = -r;
    let spacing = 2.0 * r / (n - 1) as f64;
    let idx = |i: usize, j: usize| j * n + i;
    let mut speed = vec![0.0; n * n];
    for j in 0..n {
        for i in 0..n {
            let u = [lo + i as f64 * spacing, lo + j as f64 * spacing];
            speed[idx(i, j)] = (2.0 * p.value(&u)).sqrt() * spacing;
        }
    }
    let mut values = Vec::with_capacity(p.num_wells());
    for a in p.wells() {
        let h = p.hessian(a);
        let eig = nalgebra::SymmetricEigen::new(h);
        let sqrt_h = &eig.eigenvectors
            * DMatrix::from_diagonal(&eig.eigenvalues.map(|x| x.max(0.0).sqrt()))
            * eig.eigenvectors.transpose();
        let mut t = vec![f64::INFINITY; n * n];
        let mut fixed = vec![false; n * n];
        let seed_r = 3.0 * spacing;
        for j in 0..n {
            for i in 0..n {
                let q = [lo + i as f64 * spacing - a[0], lo + j as f64 * spacing - a[1]];
                if q[0] * q[0] + q[1] * q[1] <= seed_r * seed_r {
                    let hq0 = sqrt_h[(0, 0)] * q[0] + sqrt_h[(0, 1)] * q[1];
                    let hq1 = sqrt_h[(1, 0)] * q[0] + sqrt_h[(1, 1)] * q[1];
                    t[idx(i, j)] = 0.5 * (q[0] * hq0 + q[1] * hq1);
                    fixed[idx(i, j)] = true;
                }
            }
        }
        for _ in 0..100 {
            let mut change = 0.0f64;
            for order in 0..4 {
                for jj in 0..n {
                    let j = if order & 2 == 0 { jj } else { n - 1 - jj };
                    for ii in 0..n {
                        let i = if order & 1 == 0 { ii } else { n - 1 - ii };
                        let k = idx(i, j);
                        if fixed[k] {
                            continue;
                        }
                        let tx = f64::min(
                            if i > 0 { t[k - 1] } else { f64::INFINITY },
                            if i + 1 < n { t[k + 1] } else { f64::INFINITY },
                        );
                        let ty = f64::min(
                            if j > 0 { t[k - n] } else { f64::INFINITY },
                            if j + 1 < n { t[k + n] } else { f64::INFINITY },
                        );
                        let f = speed[k];
                        let cand = if (tx - ty).abs() >= f {
                            tx.min(ty) + f
                        } else {
                            0.5 * (tx + ty + (2.0 * f * f - (tx - ty) * (tx - ty)).sqrt())
                        };
                        if cand < t[k] {
                            let old = t[k];
                            t[k] = cand;
                            if old.is_finite() {
                                change = change.max(old - cand);
                            } else {
                                change = f64::INFINITY;
                            }
                        }
                    }
                }
            }
            if change < 1e-13 {
                break;
            }
        }
        values.push(t);
    }
    Lattice { lo, spacing, n, values }
}

impl Lattice {
    fn interpolate(&self, k: usize, u: &[f64]) -> f64 {
        let max = (self.n - 1) as f64;
        let x = ((u[0] - self.lo) / self.spacing).clamp(0.0, max);
        let y = ((u[1] - self.lo) / self.spacing).clamp(0.0, max);
        let i = (x.floor() as usize).min(self.n - 2);
        let j = (y.floor() as usize).min(self.n - 2);
        let (fx, fy) = (x - i as f64, y - j as f64);
        let v = &self.values[k];
        let at = |i: usize, j: usize| v[j * self.n + i];
        (1.0 - fx) * (1.0 - fy) * at(i, j)
            + fx * (1.0 - fy) * at(i + 1, j)
            + (1.0 - fx) * fy * at(i, j + 1)
            + fx * fy * at(i + 1, j + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{build_double_well, build_triple_well};

    #[test]
    fn double_well_action_is_four_thirds() {
        let p = build_double_well();
        let c = solve_connection(&p, 0, 1, 10.0, 2000).unwrap();
        assert!((c.action - 4.0 / 3.0).abs() < 1e-3, "{}", c.action);
        assert!(c.gradient_norm < 1e-8);
        assert!(equipartition_defect(&p, &c) < 5e-3);
    }

    #[test]
    fn action_recomputes_from_samples() {
        let p = build_triple_well(1.0).unwrap();
        let c = solve_connection(&p, 0, 2, 8.0, 400).unwrap();
        let again = discrete_action(&p, &c.samples, c.dim, c.step);
        assert!((again - c.action).abs() < 1e-12);
        assert!((norm(&sub(c.node(0), &p.wells()[0]))) < 1e-3);
        assert!((norm(&sub(c.node(c.len() - 1), &p.wells()[2]))) < 1e-3);
    }

    fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
        a.iter().zip(b).map(|(x, y)| x - y).collect()
    }

    #[test]
    fn action_trace_is_monotone() {
        let p = build_triple_well(1.0).unwrap();
        let c = solve_connection(&p, 1, 2, 10.0, 500).unwrap();
        for w in c.action_trace.windows(2) {
            assert!(w[1] <= w[0]);
        }
    }

    #[test]
    fn reversal_gives_same_action() {
        for p in [build_double_well(), build_triple_well(1.0).unwrap()] {
            let f = solve_connection(&p, 0, 1, 10.0, 600).unwrap();
            let b = solve_connection(&p, 1, 0, 10.0, 600).unwrap();
            assert!((f.action - b.action).abs() < 1e-10, "{} {}", f.action, b.action);
        }
    }

    #[test]
    fn triple_well_actions_agree() {
        let p = build_triple_well(1.0).unwrap();
        let t = ConnectionTable::solve(&p, 10.0, 2000).unwrap();
        let s: Vec<f64> = t.profiles().iter().map(|c| c.action).collect();
        let mean = t.mean_sigma();
        for x in &s {
            assert!(((x - mean) / mean).abs() < 1e-3, "{s:?}");
        }
        // strict triangle inequality between wells
        assert!(t.sigma(0, 2) < t.sigma(0, 1) + t.sigma(1, 2));
    }

    #[test]
    fn same_well_rejected() {
        let p = build_double_well();
        assert!(matches!(solve_connection(&p, 1, 1, 10.0, 300), Err(Error::SameWell(1))));
        assert!(solve_connection(&p, 0, 1, 4.0, 300).is_err());
        assert!(solve_connection(&p, 0, 1, 10.0, 100).is_err());
        assert!(solve_connection(&p, 0, 5, 10.0, 300).is_err());
    }

    #[test]
    fn exact_tanh_profile_has_small_defect() {
        let p = build_double_well();
        let n = 2001;
        let step = 20.0 / (n - 1) as f64;
        let samples: Vec<f64> = (0..n).map(|k| (-10.0 + k as f64 * step).tanh()).collect();
        let c = ConnectionProfile {
            dim: 1,
            action: discrete_action(&p, &samples, 1, step),
            samples,
            step,
            half_length: 10.0,
            endpoints: (0, 1),
            action_trace: vec![],
            gradient_norm: 0.0,
        };
        assert!(equipartition_defect(&p, &c) < 1e-3);
    }

    #[test]
    fn constant_profile_has_zero_defect() {
        let p = build_triple_well(1.0).unwrap();
        let a = p.wells()[0].clone();
        let samples: Vec<f64> = (0..300).flat_map(|_| a.clone()).collect();
        let c = ConnectionProfile {
            dim: 2,
            samples,
            step: 0.05,
            half_length: 7.475,
            endpoints: (0, 0),
            action: 0.0,
            action_trace: vec![],
            gradient_norm: 0.0,
        };
        assert_eq!(equipartition_defect(&p, &c), 0.0);
    }

    #[test]
    fn triple_well_defect_plateau() {
        let p = build_triple_well(1.0).unwrap();
        let c = solve_connection(&p, 0, 1, 10.0, 2000).unwrap();
        assert!(equipartition_defect(&p, &c) < 5e-3);
    }

    #[test]
    fn doubling_nodes_changes_action_little() {
        let p = build_triple_well(1.0).unwrap();
        let a = solve_connection(&p, 0, 1, 10.0, 2000).unwrap().action;
        let b = solve_connection(&p, 0, 1, 10.0, 4000).unwrap().action;
        assert!(((a - b) / a).abs() < 1e-4);
    }

    #[test]
    fn geodesic_trivial_cases() {
        let p = build_triple_well(1.0).unwrap();
        let z = [0.2, 0.1];
        assert_eq!(geodesic_distance(&p, &z, &z, 100).unwrap().length, 0.0);
        let a = geodesic_distance(&p, &[0.3, -0.4], &[-0.5, 0.6], 150).unwrap().length;
        let b = geodesic_distance(&p, &[-0.5, 0.6], &[0.3, -0.4], 150).unwrap().length;
        assert!((a - b).abs() < 1e-10 * a.max(1.0), "{a} {b}");
        assert!(geodesic_distance(&p, &z, &z, 50).is_err());
    }

    #[test]
    fn geodesic_matches_connection_action() {
        let p = build_double_well();
        let g = geodesic_distance(&p, &[-1.0], &[1.0], 200).unwrap();
        assert!(((g.length - 4.0 / 3.0) / (4.0 / 3.0)).abs() < 1e-3);
        let p = build_triple_well(1.0).unwrap();
        let s = solve_connection(&p, 0, 1, 10.0, 2000).unwrap().action;
        let g = geodesic_distance(&p, &p.wells()[0], &p.wells()[1], 200).unwrap();
        assert!(((g.length - s) / s).abs() < 1e-3, "{} vs {}", g.length, s);
    }

    #[test]
    fn geodesic_length_stable_under_resampling() {
        let p = build_triple_well(1.0).unwrap();
        let g = geodesic_distance(&p, &p.wells()[0], &p.wells()[2], 200).unwrap();
        let again = weighted_length(&p, &g.nodes, 2);
        assert!((again - g.length).abs() < 1e-12);
        // refine the polyline by inserting midpoints
        let mut fine = Vec::new();
        for k in 0..g.len() - 1 {
            let (a, b) = (g.node(k), g.node(k + 1));
            fine.extend_from_slice(a);
            fine.extend(a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)));
        }
        fine.extend_from_slice(g.node(g.len() - 1));
        let refined = weighted_length(&p, &fine, 2);
        assert!(((refined - g.length) / g.length).abs() < 1e-4);
    }

    #[test]
    fn phi_values() {
        let p = build_triple_well(1.0).unwrap();
        let t = PhiTable::build(&p, 401).unwrap();
        let a = p.wells().to_vec();
        assert_eq!(t.phi(&a[0], 0), 0.0);
        let s = t.well_distance(0, 1);
        assert_eq!(t.phi(&a[1], 0), s);
        assert_eq!(t.phi(&a[2], 1), t.well_distance(2, 1));
        // lattice agrees with the geodesic solver off the wells
        let z = [0.1, 0.2];
        let g = geodesic_distance(&p, &z, &a[0], 200).unwrap().length;
        assert!((t.phi(&z, 0) - g).abs() < 0.02 * g, "{} vs {g}", t.phi(&z, 0));
    }

    #[test]
    fn phi_monotone_along_geodesic() {
        let p = build_triple_well(1.0).unwrap();
        let t = PhiTable::build(&p, 401).unwrap();
        let g = geodesic_distance(&p, &[0.3, 0.3], &p.wells()[0], 200).unwrap();
        let vals: Vec<f64> = (0..g.len()).map(|k| t.phi(g.node(k), 0)).collect();
        for w in vals.windows(2) {
            assert!(w[1] <= w[0] + 1e-3, "{w:?}");
        }
    }

    #[test]
    fn scalar_phi_is_exact_integral() {
        let p = build_double_well();
        let t = PhiTable::build(&p, 0).unwrap();
        // int_{-1}^{0} (1 - s^2) ds = 2/3
        assert!((t.phi(&[0.0], 0) - 2.0 / 3.0).abs() < 1e-13);
        assert!((t.phi(&[0.0], 1) - 2.0 / 3.0).abs() < 1e-13);
    }
}
