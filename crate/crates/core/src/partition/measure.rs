use serde::{Deserialize, Serialize};

use crate::connect1d::PhiTable;
use crate::field2d::{ArcSpec, Field};

use super::{total_interface_length, PartitionMap};

/// Per-cell gradient magnitudes of `phi_k o u` for every well `k`, from the
/// cell-averaged central differences.
fn cell_gradients(f: &Field, phi: &PhiTable, mut visit: impl FnMut(&[f64])) {
    let dom = &f.domain;
    let nk = phi.num_wells();
    let (nx, ny) = (dom.nx, dom.ny);
    // phi at every node, computed once
    let mut at = vec![0.0; dom.node_count() * nk];
    for k in 0..dom.node_count() {
        if dom.is_inside(k) {
            for w in 0..nk {
                at[k * nk + w] = phi.phi(f.node(k), w);
            }
        }
    }
    let mut g = vec![0.0; nk];
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            if !dom.cell(i, j) {
                continue;
            }
            let (k00, k10, k01, k11) = (j * nx + i, j * nx + i + 1, (j + 1) * nx + i, (j + 1) * nx + i + 1);
            for w in 0..nk {
                let v = |k: usize| at[k * nk + w];
                let gx = 0.5 * ((v(k10) - v(k00)) + (v(k11) - v(k01))) / dom.h;
                let gy = 0.5 * ((v(k01) - v(k00)) + (v(k11) - v(k10))) / dom.h;
                g[w] = gx.hypot(gy);
            }
            visit(&g);
        }
    }
}

/// Interface energy from the distance functions `phi_k = d(., a_k)`:
/// the cellwise supremum `sum_cells h^2 max_k |grad (phi_k o u)|`.
///
/// The supremum is exact on diffuse profiles too: along a connection the two
/// endpoint distances grow at the full rate `sqrt(2W)|U'|` while the others
/// cannot exceed it. Half the plain sum over `k` also counts the dip of the
/// third distance across the layer, see [`coarea_half_sum`].
pub fn coarea_energy(f: &Field, phi: &PhiTable) -> f64 {
    let h2 = f.domain.h * f.domain.h;
    let mut total = 0.0;
    cell_gradients(f, phi, |g| total += h2 * g.iter().copied().fold(0.0, f64::max));
    total
}

/// `1/2 sum_k TV(phi_k o u)`, the plain coarea sum, kept as a diagnostic.
pub fn coarea_half_sum(f: &Field, phi: &PhiTable) -> f64 {
    let h2 = f.domain.h * f.domain.h;
    let mut total = 0.0;
    cell_gradients(f, phi, |g| total += 0.5 * h2 * g.iter().sum::<f64>());
    total
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitEnergy {
    pub interior: f64,
    pub boundary: f64,
    pub total: f64,
}

/// Limiting energy of a partition: `sigma` times the interface length plus
/// `sigma` times the boundary length where the trace label differs from the
/// sharp data. Without sharp data there is no boundary term.
pub fn limiting_energy(pm: &PartitionMap, g0: Option<&ArcSpec>, sigma: f64) -> LimitEnergy {
    let interior = sigma * total_interface_length(pm);
    let boundary = match g0 {
        None => 0.0,
        Some(spec) => sigma * mismatch_length(pm, spec),
    };
    LimitEnergy { interior, boundary, total: interior + boundary }
}

/// Boundary arclength whose trace label disagrees with the sharp data. The
/// trace label of a boundary node is the nearest well to the mean of its
/// incident domain cells' centre values.
pub fn mismatch_length(pm: &PartitionMap, spec: &ArcSpec) -> f64 {
    let dom = &pm.domain;
    let (nx, m) = (dom.nx, pm.dim);
    let range = dom.param_range();
    let mut mean = vec![0.0; m];
    let mut total = 0.0;
    for b in &dom.boundary {
        let (i, j) = (b.index % nx, b.index / nx);
        mean.iter_mut().for_each(|x| *x = 0.0);
        let mut count = 0;
        for (ci, cj) in [(i.wrapping_sub(1), j.wrapping_sub(1)), (i, j.wrapping_sub(1)), (i.wrapping_sub(1), j), (i, j)] {
            if ci >= nx - 1 || cj >= dom.ny - 1 || !dom.cell(ci, cj) {
                continue;
            }
            for k in [cj * nx + ci, cj * nx + ci + 1, (cj + 1) * nx + ci, (cj + 1) * nx + ci + 1] {
                for c in 0..m {
                    mean[c] += 0.25 * pm.u[k * m + c];
                }
            }
            count += 1;
        }
        if count == 0 {
            continue;
        }
        mean.iter_mut().for_each(|x| *x /= count as f64);
        if super::nearest(&pm.wells, &mean) != spec.well_at(b.param, range) {
            total += b.ds;
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field2d::{Domain2D, Field};
    use crate::partition::extract;
    use crate::potential::build_double_well;
    use std::sync::Arc;

    fn square() -> Arc<Domain2D> {
        Arc::new(Domain2D::rectangle([0.0, 0.0], [1.0, 1.0], 101).unwrap())
    }

    #[test]
    fn constant_field_has_zero_coarea() {
        let p = build_double_well();
        let phi = PhiTable::build(&p, 0).unwrap();
        let mut f = Field::new(square(), 1, 0.05, None).unwrap();
        f.fill_inside(&[1.0]);
        assert_eq!(coarea_energy(&f, &phi), 0.0);
    }

    #[test]
    fn tanh_stripe_coarea_is_sigma() {
        let p = build_double_well();
        let phi = PhiTable::build(&p, 0).unwrap();
        let dom = square();
        let mut f = Field::new(dom.clone(), 1, 0.05, None).unwrap();
        for k in 0..dom.node_count() {
            f.u[k] = ((dom.position(k)[0] - 0.5) / 0.05).tanh();
        }
        let e = coarea_energy(&f, &phi);
        assert!((e - 4.0 / 3.0).abs() / (4.0 / 3.0) < 0.03, "{e}");
    }

    #[test]
    fn figure3a_constant_pays_one_side() {
        let p = build_double_well();
        let dom = square();
        let mut f = Field::new(dom.clone(), 1, 0.05, None).unwrap();
        f.fill_inside(&[-1.0]);
        let pm = extract(&f, &p);
        let spec = ArcSpec::from_breaks(&[0.0, 2.0, 3.0, 4.0], &[0, 1, 0]);
        let e = limiting_energy(&pm, Some(&spec), 4.0 / 3.0);
        assert_eq!(e.interior, 0.0);
        assert!((e.boundary - 4.0 / 3.0).abs() < 1e-12, "{}", e.boundary);
    }

    #[test]
    fn matching_constant_is_free() {
        let p = build_double_well();
        let dom = square();
        let mut f = Field::new(dom, 1, 0.05, None).unwrap();
        f.fill_inside(&[1.0]);
        let pm = extract(&f, &p);
        let e = limiting_energy(&pm, Some(&ArcSpec::constant(4.0, 1)), 4.0 / 3.0);
        assert_eq!(e.total, 0.0);
    }
}
