use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::potential::Potential;

use super::dirichlet::ArcSpec;
use super::field::Field;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InitialCondition {
    Constant { well: usize },
    /// Each node takes the sharp boundary well at the nearest boundary polar angle.
    Radial,
    /// Wells on angular sectors about the domain center; `breaks` are
    /// increasing angles and sector `k` spans `breaks[k]..breaks[k+1]` (cyclic).
    Sectors { breaks: Vec<f64>, wells: Vec<usize> },
    /// Random convex combinations of the wells on a coarse `cells x cells`
    /// lattice, bilinearly interpolated to the grid.
    Random { seed: u64, cells: usize },
}

/// Fills the free nodes of `f` according to `init`; boundary data is reapplied.
pub fn initialize(f: &mut Field, init: &InitialCondition, p: &Potential, spec: Option<&ArcSpec>) -> Result<()> {
    let dom = f.domain.clone();
    let c = dom.center();
    let polar = |k: usize| {
        let x = dom.position(k);
        (x[1] - c[1]).atan2(x[0] - c[0]).rem_euclid(TAU)
    };
    match init {
        InitialCondition::Constant { well } => f.fill_inside(p.well(*well)?),
        InitialCondition::Radial => {
            let spec = spec.ok_or_else(|| invalid("init", "radial extension needs boundary arcs"))?;
            let range = dom.param_range();
            let mut by_angle: Vec<(f64, usize)> = dom
                .boundary
                .iter()
                .map(|b| (polar(b.index), spec.well_at(b.param, range)))
                .collect();
            by_angle.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            let nearest = |theta: f64| {
                let i = by_angle.partition_point(|e| e.0 < theta);
                let a = &by_angle[i % by_angle.len()];
                let b = &by_angle[(i + by_angle.len() - 1) % by_angle.len()];
                let da = (a.0 - theta).rem_euclid(TAU).min((theta - a.0).rem_euclid(TAU));
                let db = (b.0 - theta).rem_euclid(TAU).min((theta - b.0).rem_euclid(TAU));
                if da <= db { a.1 } else { b.1 }
            };
            for k in 0..dom.node_count() {
                if dom.is_inside(k) {
                    let w = nearest(polar(k));
                    f.node_mut(k).copy_from_slice(p.well(w)?);
                }
            }
        }
        InitialCondition::Sectors { breaks, wells } => {
            if breaks.is_empty() || breaks.len() != wells.len() || breaks.windows(2).any(|w| w[1] <= w[0]) {
                return Err(invalid("sectors", "need increasing breaks, one well per sector"));
            }
            for k in 0..dom.node_count() {
                if !dom.is_inside(k) {
                    continue;
                }
                let t = polar(k);
                let s = breaks.iter().rposition(|&b| b <= t).unwrap_or(breaks.len() - 1);
                f.node_mut(k).copy_from_slice(p.well(wells[s])?);
            }
        }
        InitialCondition::Random { seed, cells } => {
            if *cells == 0 {
                return Err(invalid("cells", "must be positive"));
            }
            let n = p.num_wells();
            let m = p.dim();
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let lat = cells + 1;
            let mut coarse = vec![0.0; lat * lat * m];
            for q in 0..lat * lat {
                // uniform on the simplex via normalized exponentials
                let lam: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
                let s: f64 = lam.iter().sum();
                for (l, a) in lam.iter().zip(p.wells()) {
                    for c in 0..m {
                        coarse[q * m + c] += l / s * a[c];
                    }
                }
            }
            let span_x = (dom.nx - 1) as f64;
            let span_y = (dom.ny - 1) as f64;
            for k in 0..dom.node_count() {
                if !dom.is_inside(k) {
                    continue;
                }
                let gx = (k % dom.nx) as f64 / span_x * *cells as f64;
                let gy = (k / dom.nx) as f64 / span_y * *cells as f64;
                let (i0, j0) = ((gx.floor() as usize).min(cells - 1), (gy.floor() as usize).min(cells - 1));
                let (sx, sy) = (gx - i0 as f64, gy - j0 as f64);
                let at = |i: usize, j: usize, c: usize| coarse[(j * lat + i) * m + c];
                let out = f.node_mut(k);
                for c in 0..m {
                    out[c] = (1.0 - sx) * (1.0 - sy) * at(i0, j0, c)
                        + sx * (1.0 - sy) * at(i0 + 1, j0, c)
                        + (1.0 - sx) * sy * at(i0, j0 + 1, c)
                        + sx * sy * at(i0 + 1, j0 + 1, c);
                }
            }
        }
    }
    if f.dim != p.dim() {
        return Err(Error::InvalidParameter { name: "field", reason: "dimension mismatch".into() });
    }
    f.apply_boundary();
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field2d::domain::Domain2D;
    use crate::potential::build_triple_well;
    use std::sync::Arc;

    #[test]
    fn radial_extension_follows_arcs() {
        let p = build_triple_well(1.0).unwrap();
        let dom = Arc::new(Domain2D::disk([0.0, 0.0], 1.0, 65).unwrap());
        let spec = ArcSpec::from_breaks(&[0.0, TAU / 3.0, 2.0 * TAU / 3.0, TAU], &[0, 1, 2]);
        let mut f = Field::new(dom.clone(), 2, 0.1, None).unwrap();
        initialize(&mut f, &InitialCondition::Radial, &p, Some(&spec)).unwrap();
        let k = 32 * 65 + 50; // on the positive x axis
        assert_eq!(f.node(k), p.well(0).unwrap());
        let k = 32 * 65 + 10; // negative x axis, angle pi
        assert_eq!(f.node(k), p.well(1).unwrap());
    }

    #[test]
    fn random_init_is_seeded_and_bounded() {
        let p = build_triple_well(1.0).unwrap();
        let dom = Arc::new(Domain2D::disk([0.0, 0.0], 1.0, 33).unwrap());
        let init = InitialCondition::Random { seed: 9, cells: 6 };
        let mut a = Field::new(dom.clone(), 2, 0.1, None).unwrap();
        let mut b = a.clone();
        initialize(&mut a, &init, &p, None).unwrap();
        initialize(&mut b, &init, &p, None).unwrap();
        assert_eq!(a.u, b.u);
        assert!(a.sup_norm() <= 1.0 + 1e-12);
    }
}
