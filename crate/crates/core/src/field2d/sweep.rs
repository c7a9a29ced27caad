use std::sync::Arc;

use crate::connect1d::ConnectionTable;
use crate::error::{invalid, Error, Result};
use crate::potential::Potential;

use super::dirichlet::{make_dirichlet, ArcSpec, DirichletData};
use super::domain::Domain2D;
use super::field::Field;
use super::init::{initialize, InitialCondition};
use super::solver::{minimize, minimize_mass_constrained, SolveReport, SolverOptions};

/// Sharp boundary arcs plus what is needed to mollify them at each eps.
#[derive(Clone, Debug)]
pub struct BoundarySetup {
    pub spec: ArcSpec,
    pub connections: Arc<ConnectionTable>,
    pub transition: f64,
}

impl BoundarySetup {
    pub fn data(&self, dom: &Domain2D, eps: f64, p: &Potential) -> Result<DirichletData> {
        make_dirichlet(dom, &self.spec, eps, &self.connections, p, self.transition)
    }
}

#[derive(Clone, Debug)]
pub struct SweepSetup {
    pub domain: Arc<Domain2D>,
    pub boundary: Option<BoundarySetup>,
    pub init: InitialCondition,
    pub mass_target: Option<Vec<f64>>,
    pub solver: SolverOptions,
}

#[derive(Clone, Debug)]
pub struct SweepStep {
    pub eps: f64,
    pub field: Field,
    pub report: SolveReport,
    /// Weighted L1 distance to the previous minimizer.
    pub l1_to_previous: Option<f64>,
}

/// Smallest admissible eps on a grid of spacing `h`.
pub fn resolvability_floor(h: f64) -> f64 {
    4.0 * h
}

pub fn check_eps_list(eps_list: &[f64], h: f64) -> Result<()> {
    if eps_list.is_empty() {
        return Err(invalid("eps_list", "empty"));
    }
    if eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(invalid("eps_list", "must be strictly decreasing"));
    }
    let floor = resolvability_floor(h);
    for &eps in eps_list {
        // relative slack so that eps = 4h typed in decimal is not rejected by rounding
        if eps < floor * (1.0 - 1e-9) {
            return Err(Error::Unresolved { eps, floor });
        }
    }
    Ok(())
}

/// Minimizes at each eps in turn, warm-starting from the previous minimizer.
pub fn epsilon_sweep(setup: &SweepSetup, eps_list: &[f64], p: &Potential) -> Result<Vec<SweepStep>> {
    check_eps_list(eps_list, setup.domain.h)?;
    let mut steps: Vec<SweepStep> = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let data = match &setup.boundary {
            Some(b) => Some(Arc::new(b.data(&setup.domain, eps, p)?)),
            None => None,
        };
        let mut f0 = Field::new(setup.domain.clone(), p.dim(), eps, data)?;
        match steps.last() {
            Some(prev) => {
                f0.u.copy_from_slice(&prev.field.u);
                f0.apply_boundary();
            }
            None => initialize(&mut f0, &setup.init, p, setup.boundary.as_ref().map(|b| &b.spec))?,
        }
        let (field, report) = match &setup.mass_target {
            Some(m) => minimize_mass_constrained(f0, p, m, &setup.solver)?,
            None => minimize(f0, p, &setup.solver)?,
        };
        let l1_to_previous = steps.last().map(|prev| field.l1_distance(&prev.field));
        steps.push(SweepStep { eps, field, report, l1_to_previous });
    }
    Ok(steps)
}
