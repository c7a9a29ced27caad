use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::clock::Stopwatch;
use crate::potential::Potential;

use super::field::{energy_and_gradient_raw, energy_raw, free_mask, mass, sup_norm, Field};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    /// Sup-norm residual tolerance; `None` means `1e-6 / eps`.
    pub tol: Option<f64>,
    pub max_iter: usize,
    pub accelerate: bool,
    pub stall_window: usize,
    pub stall_rel: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: None, max_iter: 200_000, accelerate: true, stall_window: 100, stall_rel: 1e-10 }
    }
}

impl SolverOptions {
    pub fn tolerance(&self, eps: f64) -> f64 {
        self.tol.unwrap_or(1e-6 / eps)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    Residual,
    Stalled,
    MaxIter,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolveReport {
    /// Energy of the start field followed by one entry per accepted step.
    pub energy_trace: Vec<f64>,
    pub final_residual: f64,
    pub iterations: usize,
    #[serde(skip)]
    pub wall_time: f64,
    pub converged: bool,
    pub stop_reason: StopReason,
    /// Largest node norm over all accepted iterates.
    pub max_sup_norm: f64,
    /// Largest `|int u - m|` over all iterates, mass-constrained solves only.
    pub max_mass_violation: Option<f64>,
    pub restarts: usize,
}

impl SolveReport {
    pub fn final_energy(&self) -> f64 {
        *self.energy_trace.last().unwrap()
    }

    pub fn is_monotone(&self) -> bool {
        self.energy_trace.windows(2).all(|w| w[1] <= w[0])
    }
}

struct MassConstraint {
    target: Vec<f64>,
    free_weight: f64,
}

/// Gradient descent in the lumped-mass metric (`r = g / w`), with Armijo
/// backtracking and optional restarted Nesterov momentum. One call to
/// [`Descent::step`] is one accepted iteration, which lets interactive
/// callers interleave rendering with the solve.
pub struct Descent {
    field: Field,
    p: Potential,
    opts: SolverOptions,
    free: Vec<bool>,
    mass: Option<MassConstraint>,
    tol: f64,
    tau0: f64,
    tau: f64,
    momentum: f64,
    x_old: Vec<f64>,
    y: Vec<f64>,
    trial: Vec<f64>,
    g: Vec<f64>,
    rx: Vec<f64>,
    ry: Vec<f64>,
    e_x: f64,
    e_y: f64,
    res_x: f64,
    trace: Vec<f64>,
    iterations: usize,
    restarts: usize,
    max_sup: f64,
    max_mass: f64,
    stop: Option<StopReason>,
}

impl Descent {
    pub fn new(field: Field, p: &Potential, opts: SolverOptions) -> Result<Self> {
        Self::build(field, p, opts, None)
    }

    pub fn with_mass(field: Field, p: &Potential, opts: SolverOptions, target: &[f64]) -> Result<Self> {
        Self::build(field, p, opts, Some(target.to_vec()))
    }

    fn build(mut field: Field, p: &Potential, opts: SolverOptions, target: Option<Vec<f64>>) -> Result<Self> {
        if field.dim != p.dim() {
            return Err(invalid("field", "dimension does not match the potential"));
        }
        field.apply_boundary();
        let dom = field.domain.clone();
        let free = free_mask(&dom, field.dirichlet.is_some());
        let mass_c = match target {
            None => None,
            Some(t) => {
                if t.len() != field.dim {
                    return Err(invalid("m_target", "length must equal the phase dimension"));
                }
                let free_weight: f64 = (0..dom.node_count()).filter(|&k| free[k]).map(|k| dom.node_weight[k]).sum();
                let fixed = mass_of_fixed(&field, &free);
                let area_free = free_weight;
                // attainable iff the free mean lies in the convex hull of the wells
                let mean: Vec<f64> = t.iter().zip(&fixed).map(|(a, b)| (a - b) / area_free).collect();
                if !in_hull(p.wells(), &mean) {
                    return Err(Error::UnattainableMass(format!(
                        "mean state {mean:?} lies outside the convex hull of the wells"
                    )));
                }
                Some(MassConstraint { target: t, free_weight })
            }
        };
        let eps = field.eps;
        let h = dom.h;
        let tau0 = (h * h / (8.0 * eps)).min(eps / p.hess_max());
        let n = field.u.len();
        let mut d = Descent {
            tol: opts.tolerance(eps),
            field,
            p: p.clone(),
            opts,
            free,
            mass: mass_c,
            tau0,
            tau: tau0,
            momentum: 1.0,
            x_old: vec![0.0; n],
            y: vec![0.0; n],
            trial: vec![0.0; n],
            g: vec![0.0; n],
            rx: vec![0.0; n],
            ry: vec![0.0; n],
            e_x: 0.0,
            e_y: 0.0,
            res_x: 0.0,
            trace: Vec::new(),
            iterations: 0,
            restarts: 0,
            max_sup: 0.0,
            max_mass: 0.0,
            stop: None,
        };
        if d.mass.is_some() {
            let mut u = std::mem::take(&mut d.field.u);
            d.project(&mut u);
            d.field.u = u;
        }
        let x = d.field.u.clone();
        let (e, res) = d.eval(&x);
        d.e_x = e;
        d.res_x = res;
        d.rx.copy_from_slice(&d.ry);
        d.y.copy_from_slice(&x);
        d.e_y = e;
        d.trace.push(e);
        d.max_sup = sup_norm(&d.field.domain, &x, d.field.dim);
        d.track_mass(&x);
        if res < d.tol {
            d.stop = Some(StopReason::Residual);
        }
        Ok(d)
    }

    /// Energy and residual at `u`; the residual lands in `self.ry`.
    fn eval(&mut self, u: &[f64]) -> (f64, f64) {
        let f = &self.field;
        let dom = &f.domain;
        let m = f.dim;
        let e = energy_and_gradient_raw(dom, &self.p, f.eps, m, &self.free, u, &mut self.g);
        for k in 0..dom.node_count() {
            let w = dom.node_weight[k];
            for c in 0..m {
                self.ry[k * m + c] = if self.free[k] { self.g[k * m + c] / w } else { 0.0 };
            }
        }
        if let Some(mc) = &self.mass {
            for c in 0..m {
                let s: f64 = (0..dom.node_count())
                    .filter(|&k| self.free[k])
                    .map(|k| dom.node_weight[k] * self.ry[k * m + c])
                    .sum();
                let shift = s / mc.free_weight;
                for k in 0..dom.node_count() {
                    if self.free[k] {
                        self.ry[k * m + c] -= shift;
                    }
                }
            }
        }
        let res = (0..dom.node_count())
            .filter(|&k| self.free[k])
            .map(|k| self.ry[k * m..(k + 1) * m].iter().map(|x| x * x).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        (e, res)
    }

    fn project(&self, u: &mut [f64]) {
        let Some(mc) = &self.mass else { return };
        let dom = &self.field.domain;
        let m = self.field.dim;
        let cur = mass(dom, u, m);
        for c in 0..m {
            let shift = (mc.target[c] - cur[c]) / mc.free_weight;
            for k in 0..dom.node_count() {
                if self.free[k] {
                    u[k * m + c] += shift;
                }
            }
        }
    }

    fn track_mass(&mut self, u: &[f64]) {
        if let Some(mc) = &self.mass {
            let cur = mass(&self.field.domain, u, self.field.dim);
            let v = cur.iter().zip(&mc.target).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            self.max_mass = self.max_mass.max(v);
        }
    }

    fn weighted_sq(&self, r: &[f64]) -> f64 {
        let dom = &self.field.domain;
        let m = self.field.dim;
        (0..dom.node_count())
            .filter(|&k| self.free[k])
            .map(|k| dom.node_weight[k] * r[k * m..(k + 1) * m].iter().map(|x| x * x).sum::<f64>())
            .sum()
    }

    pub fn stopped(&self) -> Option<StopReason> {
        self.stop
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn energy(&self) -> f64 {
        self.e_x
    }

    pub fn residual(&self) -> f64 {
        self.res_x
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// One accepted iteration. Returns the stop reason once the solve ends.
    pub fn step(&mut self) -> Option<StopReason> {
        if self.stop.is_some() {
            return self.stop;
        }
        if self.iterations >= self.opts.max_iter {
            self.stop = Some(StopReason::MaxIter);
            return self.stop;
        }
        let m = self.field.dim;
        let dom = self.field.domain.clone();
        loop {
            // backtracking from the extrapolated point y
            let decrease = self.weighted_sq(&self.ry);
            let mut ry = std::mem::take(&mut self.ry);
            let mut accepted = None;
            for _ in 0..60 {
                let tau = self.tau;
                let mut trial = std::mem::take(&mut self.trial);
                for i in 0..trial.len() {
                    trial[i] = self.y[i] - tau * ry[i];
                }
                self.project(&mut trial);
                let e = energy_raw(&dom, &self.p, self.field.eps, m, &trial);
                self.trial = trial;
                if e <= self.e_y - 0.5 * tau * decrease {
                    accepted = Some(e);
                    break;
                }
                self.tau *= 0.5;
            }
            std::mem::swap(&mut self.ry, &mut ry);
            let same_point = self.y == self.field.u;
            match accepted {
                Some(e) if e <= self.e_x => break,
                _ if !same_point => {
                    // momentum overshot: restart from the current iterate
                    self.restarts += 1;
                    self.momentum = 1.0;
                    self.y.copy_from_slice(&self.field.u);
                    self.ry.copy_from_slice(&self.rx);
                    self.e_y = self.e_x;
                    continue;
                }
                _ => {
                    // no descent possible from x at any step size: stationary to rounding
                    self.stop = Some(StopReason::Stalled);
                    return self.stop;
                }
            }
        }

        // accept the trial point
        std::mem::swap(&mut self.x_old, &mut self.field.u);
        std::mem::swap(&mut self.field.u, &mut self.trial);
        let x = std::mem::take(&mut self.field.u);
        let (e, res) = self.eval(&x);
        self.e_x = e;
        self.res_x = res;
        self.rx.copy_from_slice(&self.ry);
        self.iterations += 1;
        self.trace.push(e);
        self.max_sup = self.max_sup.max(sup_norm(&dom, &x, m));
        self.track_mass(&x);
        self.tau = (self.tau * 1.25).min(self.tau0);

        if self.opts.accelerate {
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * self.momentum * self.momentum).sqrt());
            let mut beta = (self.momentum - 1.0) / t_next;
            // gradient restart: the new residual points along the last move
            let along: f64 = (0..x.len()).map(|i| self.rx[i] * (x[i] - self.x_old[i])).sum();
            if along > 0.0 {
                beta = 0.0;
                self.momentum = 1.0;
                self.restarts += 1;
            } else {
                self.momentum = t_next;
            }
            if beta > 0.0 {
                for i in 0..x.len() {
                    self.y[i] = x[i] + beta * (x[i] - self.x_old[i]);
                }
                let mut y = std::mem::take(&mut self.y);
                self.project(&mut y);
                let (ey, _) = self.eval(&y);
                self.y = y;
                self.e_y = ey;
            } else {
                self.y.copy_from_slice(&x);
                self.ry.copy_from_slice(&self.rx);
                self.e_y = e;
            }
        } else {
            self.y.copy_from_slice(&x);
            self.ry.copy_from_slice(&self.rx);
            self.e_y = e;
        }
        self.field.u = x;

        if res < self.tol {
            self.stop = Some(StopReason::Residual);
        } else if self.trace.len() > self.opts.stall_window {
            let n = self.trace.len();
            let old = self.trace[n - 1 - self.opts.stall_window];
            if old - e <= self.opts.stall_rel * e.abs() {
                self.stop = Some(StopReason::Stalled);
            }
        }
        if self.stop.is_none() && self.iterations >= self.opts.max_iter {
            self.stop = Some(StopReason::MaxIter);
        }
        self.stop
    }

    /// Runs to completion.
    pub fn run(mut self) -> (Field, SolveReport) {
        let clock = Stopwatch::start();
        while self.step().is_none() {}
        let reason = self.stop.unwrap();
        let report = SolveReport {
            energy_trace: self.trace,
            final_residual: self.res_x,
            iterations: self.iterations,
            wall_time: clock.seconds(),
            converged: reason != StopReason::MaxIter,
            stop_reason: reason,
            max_sup_norm: self.max_sup,
            max_mass_violation: self.mass.as_ref().map(|_| self.max_mass),
            restarts: self.restarts,
        };
        (self.field, report)
    }
}

fn mass_of_fixed(f: &Field, free: &[bool]) -> Vec<f64> {
    let dom = &f.domain;
    let mut out = vec![0.0; f.dim];
    for k in 0..dom.node_count() {
        if !free[k] {
            for c in 0..f.dim {
                out[c] += dom.node_weight[k] * f.u[k * f.dim + c];
            }
        }
    }
    out
}

/// Membership in the convex hull of the wells, for phase dimensions 1 and 2.
fn in_hull(wells: &[Vec<f64>], q: &[f64]) -> bool {
    let tol = 1e-12;
    match q.len() {
        1 => {
            let lo = wells.iter().map(|a| a[0]).fold(f64::INFINITY, f64::min);
            let hi = wells.iter().map(|a| a[0]).fold(f64::NEG_INFINITY, f64::max);
            q[0] >= lo - tol && q[0] <= hi + tol
        }
        2 => {
            let hull = convex_hull(wells.iter().map(|a| [a[0], a[1]]).collect());
            if hull.len() < 3 {
                // degenerate hull: a point or a segment
                return hull.iter().any(|a| (a[0] - q[0]).hypot(a[1] - q[1]) < tol)
                    || (hull.len() == 2 && on_segment(hull[0], hull[1], [q[0], q[1]], tol));
            }
            (0..hull.len()).all(|i| {
                let (a, b) = (hull[i], hull[(i + 1) % hull.len()]);
                (b[0] - a[0]) * (q[1] - a[1]) - (b[1] - a[1]) * (q[0] - a[0]) >= -tol
            })
        }
        _ => true,
    }
}

fn on_segment(a: [f64; 2], b: [f64; 2], q: [f64; 2], tol: f64) -> bool {
    let cross = (b[0] - a[0]) * (q[1] - a[1]) - (b[1] - a[1]) * (q[0] - a[0]);
    let dot = (q[0] - a[0]) * (b[0] - a[0]) + (q[1] - a[1]) * (b[1] - a[1]);
    let len2 = (b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2);
    cross.abs() < tol && dot >= -tol && dot <= len2 + tol
}

/// Andrew's monotone chain, counterclockwise.
fn convex_hull(mut pts: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    let mut hull: Vec<[f64; 2]> = Vec::new();
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &[f64; 2]>> =
            if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

/// Minimizes the energy with the boundary values of `f0` held fixed.
pub fn minimize(f0: Field, p: &Potential, opts: &SolverOptions) -> Result<(Field, SolveReport)> {
    Ok(Descent::new(f0, p, opts.clone())?.run())
}

/// Minimizes subject to `sum_k w_k u_k = m_target`, projecting after every step.
pub fn minimize_mass_constrained(
    f0: Field,
    p: &Potential,
    m_target: &[f64],
    opts: &SolverOptions,
) -> Result<(Field, SolveReport)> {
    Ok(Descent::with_mass(f0, p, opts.clone(), m_target)?.run())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field2d::domain::Domain2D;
    use crate::potential::{build_double_well, build_triple_well};
    use std::sync::Arc;

    #[test]
    fn hull_membership() {
        let p = build_triple_well(1.0).unwrap();
        assert!(in_hull(p.wells(), &[0.0, 0.0]));
        assert!(in_hull(p.wells(), &[0.0, 0.99]));
        assert!(!in_hull(p.wells(), &[0.0, 1.01]));
        assert!(!in_hull(p.wells(), &[0.0, -0.51]));
        assert!(in_hull(&[vec![-1.0], vec![1.0]], &[0.3]));
    }

    #[test]
    fn minimizer_start_needs_no_iterations() {
        let p = build_triple_well(1.0).unwrap();
        let dom = Arc::new(Domain2D::disk([0.0, 0.0], 1.0, 33).unwrap());
        let mut f = Field::new(dom, 2, 0.2, None).unwrap();
        f.fill_inside(p.well(0).unwrap());
        let (_, rep) = minimize(f, &p, &SolverOptions::default()).unwrap();
        assert_eq!(rep.iterations, 0);
        assert_eq!(rep.final_energy(), 0.0);
        assert!(rep.converged);
    }

    #[test]
    fn mass_fixed_point() {
        let p = build_triple_well(1.0).unwrap();
        let dom = Arc::new(Domain2D::disk([0.0, 0.0], 1.0, 33).unwrap());
        let mut f = Field::new(dom.clone(), 2, 0.2, None).unwrap();
        f.fill_inside(p.well(2).unwrap());
        let target: Vec<f64> = p.well(2).unwrap().iter().map(|a| a * dom.area()).collect();
        let (_, rep) = minimize_mass_constrained(f, &p, &target, &SolverOptions::default()).unwrap();
        assert!(rep.final_energy() < 1e-20);
        assert!(rep.max_mass_violation.unwrap() < 1e-10);
    }

    #[test]
    fn unattainable_mass_rejected() {
        let p = build_triple_well(1.0).unwrap();
        let dom = Arc::new(Domain2D::disk([0.0, 0.0], 1.0, 33).unwrap());
        let f = Field::new(dom.clone(), 2, 0.2, None).unwrap();
        let target = [0.0, 2.0 * dom.area()];
        assert!(matches!(
            minimize_mass_constrained(f, &p, &target, &SolverOptions::default()),
            Err(Error::UnattainableMass(_))
        ));
    }

    #[test]
    fn scalar_stripe_from_edge_data() {
        use crate::connect1d::ConnectionTable;
        use crate::field2d::dirichlet::{make_dirichlet, ArcSpec, BoundaryArc};
        let p = build_double_well();
        let conn = ConnectionTable::solve(&p, 10.0, 400).unwrap();
        let dom = Arc::new(Domain2D::rectangle([0.0, 0.0], [1.0, 1.0], 101).unwrap());
        // bottom half-edge and right edge -> well 1, top and left -> well 0
        let spec = ArcSpec::new(vec![
            BoundaryArc { start: 0.0, end: 0.5, well: 0 },
            BoundaryArc { start: 0.5, end: 2.5, well: 1 },
            BoundaryArc { start: 2.5, end: 4.0, well: 0 },
        ]);
        let g = make_dirichlet(&dom, &spec, 0.05, &conn, &p, 3.0).unwrap();
        let mut f = Field::new(dom.clone(), 1, 0.05, Some(Arc::new(g))).unwrap();
        for k in 0..dom.node_count() {
            if dom.mask[k] == crate::field2d::domain::NodeKind::Interior {
                f.u[k] = if dom.position(k)[0] < 0.5 { -1.0 } else { 1.0 };
            }
        }
        let (f, rep) = minimize(f, &p, &SolverOptions::default()).unwrap();
        assert!(rep.converged && rep.is_monotone());
        let e = rep.final_energy();
        assert!((e - 4.0 / 3.0).abs() / (4.0 / 3.0) < 0.02, "energy {e}");
        // x-monotone along the middle row
        let j = dom.ny / 2;
        for i in 1..dom.nx - 1 {
            assert!(f.u[j * dom.nx + i + 1] >= f.u[j * dom.nx + i] - 1e-9);
        }
        assert!(rep.max_sup_norm <= p.bound_m());
    }
}
