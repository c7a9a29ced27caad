use std::f64::consts::TAU;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::connect1d::{equipartition_defect, geodesic_distance, ConnectionTable, PhiTable};
use crate::error::Result;
use crate::field2d::{
    energy, energy_gradient, initialize, make_dirichlet, minimize, ArcSpec, Domain2D, Field, InitialCondition,
    SolverOptions,
};
use crate::partition::{coarea_energy, extract, interface_length_contour, steiner_point};
use crate::potential::Potential;

use super::config::ExperimentConfig;
use super::report::{Check, Outcome};

pub const GRADIENT_TOL: f64 = 1e-6;
pub const GRADIENT_TRIALS: usize = 20;
pub const EQUIPARTITION_TOL: f64 = 5e-3;
pub const METRIC_TOL: f64 = 1e-3;
pub const STEINER_TRIALS: usize = 10;
pub const STEINER_GRID: usize = 2000;

#[derive(Clone, Copy, Debug, Default)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Scales the analytic gradient by `1 + 1e-3` before comparing, to show the
    /// gradient check can fail.
    pub corrupt_gradient: bool,
}

#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
    pub outcome: Outcome,
}

impl VerifyReport {
    pub fn table(&self) -> String {
        let mut s = format!("{:<34} {:>14} {:>3} {:>12}  result\n", "check", "measured", "", "tolerance");
        for c in &self.checks {
            s += &format!(
                "{:<34} {:>14.6e} {:>3} {:>12.3e}  {}\n",
                c.name,
                c.measured,
                c.relation,
                c.tolerance,
                if c.passed { "PASS" } else { "FAIL" }
            );
        }
        s
    }
}

/// `N` equal boundary arcs, one per well, on a disk.
fn equal_arcs(n: usize) -> ArcSpec {
    let breaks: Vec<f64> = (0..=n).map(|k| TAU * k as f64 / n as f64).collect();
    let wells: Vec<usize> = (0..n).collect();
    ArcSpec::from_breaks(&breaks, &wells)
}

/// Worst relative error of directional derivatives against a fourth-order
/// central difference, over `trials` random fields with Dirichlet data.
pub fn gradient_check(p: &Potential, conn: &ConnectionTable, seed: u64, trials: usize, corrupt: bool) -> Result<f64> {
    let dom = Arc::new(Domain2D::disk([0.0, 0.0], 1.0, 41)?);
    let eps = 0.2;
    let data = Arc::new(make_dirichlet(&dom, &equal_arcs(p.num_wells()), eps, conn, p, 3.0)?);
    let m = p.dim();
    let spread = 1.5 * p.wells().iter().map(|a| a.iter().map(|x| x * x).sum::<f64>().sqrt()).fold(0.0, f64::max);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let mut f = Field::new(dom.clone(), m, eps, Some(data.clone()))?;
        let free = f.free_mask();
        for k in 0..dom.node_count() {
            if free[k] {
                for c in 0..m {
                    f.u[k * m + c] = rng.gen_range(-spread..spread);
                }
            }
        }
        let v: Vec<f64> = (0..f.u.len()).map(|i| if free[i / m] { rng.gen_range(-1.0..1.0) } else { 0.0 }).collect();
        let mut g = energy_gradient(&f, p);
        if corrupt {
            g.iter_mut().for_each(|x| *x *= 1.0 + 1e-3);
        }
        let analytic: f64 = g.iter().zip(&v).map(|(a, b)| a * b).sum();
        let delta = 1e-3;
        let at = |s: f64| {
            let mut fs = f.clone();
            fs.u.iter_mut().zip(&v).for_each(|(x, d)| *x += s * d);
            energy(&fs, p)
        };
        let fd = (-at(2.0 * delta) + 8.0 * at(delta) - 8.0 * at(-delta) + at(-2.0 * delta)) / (12.0 * delta);
        worst = worst.max((fd - analytic).abs() / analytic.abs());
    }
    Ok(worst)
}

/// Worst distance, in grid spacings, between the Steiner point and the
/// minimizer of the distance sum over a `grid x grid` lattice covering the
/// triangle, plus the worst amount by which the lattice beats the Steiner sum.
pub fn steiner_brute_force(seed: u64, trials: usize, grid: usize) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut worst_pos, mut worst_gain) = (0.0f64, f64::NEG_INFINITY);
    for _ in 0..trials {
        let t: [[f64; 2]; 3] = std::array::from_fn(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]);
        let (x, len) = steiner_point(t[0], t[1], t[2]);
        let lo = [t.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min), t.iter().map(|p| p[1]).fold(f64::INFINITY, f64::min)];
        let hi = [t.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max), t.iter().map(|p| p[1]).fold(f64::NEG_INFINITY, f64::max)];
        let step = [(hi[0] - lo[0]) / (grid - 1) as f64, (hi[1] - lo[1]) / (grid - 1) as f64];
        let mut best = (f64::INFINITY, [0.0, 0.0]);
        for a in 0..grid {
            for b in 0..grid {
                let y = [lo[0] + a as f64 * step[0], lo[1] + b as f64 * step[1]];
                let s: f64 = t.iter().map(|p| (y[0] - p[0]).hypot(y[1] - p[1])).sum();
                if s < best.0 {
                    best = (s, y);
                }
            }
        }
        let spacing = step[0].hypot(step[1]);
        worst_pos = worst_pos.max((best.1[0] - x[0]).hypot(best.1[1] - x[1]) / spacing);
        worst_gain = worst_gain.max(len - best.0);
    }
    (worst_pos, worst_gain)
}

pub struct SmallSolve {
    pub coarea_rel_gap: f64,
    pub max_sup_norm: f64,
    pub monotone: bool,
    pub converged: bool,
}

/// Relaxes `N` equal boundary arcs on a coarse disk and compares the two
/// interface estimators.
pub fn small_solve(p: &Potential, conn: &ConnectionTable, phi: &PhiTable) -> Result<SmallSolve> {
    let dom = Arc::new(Domain2D::disk([0.0, 0.0], 1.0, 97)?);
    let eps = 0.1;
    let spec = equal_arcs(p.num_wells());
    let data = Arc::new(make_dirichlet(&dom, &spec, eps, conn, p, 3.0)?);
    let mut f = Field::new(dom, p.dim(), eps, Some(data))?;
    initialize(&mut f, &InitialCondition::Radial, p, Some(&spec))?;
    let (f, rep) = minimize(f, p, &SolverOptions::default())?;
    let pm = extract(&f, p);
    let contour: f64 = pm.interfaces.keys().map(|&(i, j)| conn.sigma(i, j) * interface_length_contour(&pm, i, j)).sum();
    let coarea = coarea_energy(&f, phi);
    Ok(SmallSolve {
        coarea_rel_gap: (coarea - contour).abs() / contour,
        max_sup_norm: rep.max_sup_norm,
        monotone: rep.is_monotone(),
        converged: rep.converged,
    })
}

/// Bundled invariant suite for the configured potential.
pub fn run_verify(cfg: &ExperimentConfig, opts: VerifyOptions) -> Result<VerifyReport> {
    let p = cfg.potential.build()?;
    let conn = ConnectionTable::solve(&p, cfg.connection.half_length, cfg.connection.nodes)?;
    let phi = PhiTable::build(&p, cfg.connection.phi_lattice)?;
    let mut checks = vec![Check::holds("potential-invariants", p.check_invariants().is_ok())];

    checks.push(Check::below(
        "gradient-vs-finite-differences",
        gradient_check(&p, &conn, opts.seed, GRADIENT_TRIALS, opts.corrupt_gradient)?,
        GRADIENT_TOL,
    ));

    let defect = conn.profiles().iter().map(|c| equipartition_defect(&p, c)).fold(0.0, f64::max);
    checks.push(Check::below("connection-equipartition", defect, EQUIPARTITION_TOL));

    let mut metric_gap: f64 = 0.0;
    for i in 0..p.num_wells() {
        for j in i + 1..p.num_wells() {
            let d = geodesic_distance(&p, &p.wells()[i], &p.wells()[j], 200)?.length;
            let s = conn.sigma(i, j);
            metric_gap = metric_gap.max((d - s).abs() / s);
        }
    }
    checks.push(Check::below("geodesic-vs-connection-action", metric_gap, METRIC_TOL));

    let solve = small_solve(&p, &conn, &phi)?;
    checks.push(Check::holds("small-solve-converged", solve.converged));
    checks.push(Check::holds("small-solve-energy-monotone", solve.monotone));
    checks.push(Check::at_most("small-solve-sup-norm", solve.max_sup_norm, p.bound_m()));
    checks.push(Check::below("small-solve-estimator-agreement", solve.coarea_rel_gap, 0.05));

    let (pos, gain) = steiner_brute_force(opts.seed, STEINER_TRIALS, STEINER_GRID);
    checks.push(Check::at_most("steiner-vs-grid-spacings", pos, 2.0));
    checks.push(Check::at_most("steiner-sum-minus-grid-min", gain, 1e-12));

    let outcome = if checks.iter().all(|c| c.passed) { Outcome::Pass } else { Outcome::CheckFailure };
    Ok(VerifyReport { checks, outcome })
}
