use serde::{Deserialize, Serialize};

use crate::connect1d::ConnectionTable;
use crate::error::{invalid, Error, Result};
use crate::potential::Potential;

use super::domain::Domain2D;

/// Default half-width of a transition, in units of eps.
pub const DEFAULT_TRANSITION: f64 = 3.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryArc {
    pub start: f64,
    pub end: f64,
    pub well: usize,
}

/// Piecewise-constant sharp boundary data: consecutive arcs over the
/// boundary parameter, wrapping around once.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArcSpec {
    pub arcs: Vec<BoundaryArc>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jump {
    pub param: f64,
    pub from: usize,
    pub to: usize,
}

impl ArcSpec {
    pub fn new(arcs: Vec<BoundaryArc>) -> Self {
        ArcSpec { arcs }
    }

    /// One arc per well, splitting `[start, start + range)` at the given points.
    pub fn from_breaks(breaks: &[f64], wells: &[usize]) -> Self {
        let arcs = breaks
            .windows(2)
            .zip(wells)
            .map(|(w, &well)| BoundaryArc { start: w[0], end: w[1], well })
            .collect();
        ArcSpec { arcs }
    }

    pub fn constant(range: f64, well: usize) -> Self {
        ArcSpec { arcs: vec![BoundaryArc { start: 0.0, end: range, well }] }
    }

    pub fn validate(&self, range: f64, num_wells: usize) -> Result<()> {
        let arcs = &self.arcs;
        if arcs.is_empty() {
            return Err(Error::BadArcs("no arcs".into()));
        }
        let tol = 1e-9 * range;
        for (k, a) in arcs.iter().enumerate() {
            if a.well >= num_wells {
                return Err(Error::WellIndex { index: a.well, count: num_wells });
            }
            if !(a.end > a.start) {
                return Err(Error::BadArcs(format!("arc {k} is empty or reversed")));
            }
            if k + 1 < arcs.len() && (arcs[k + 1].start - a.end).abs() > tol {
                return Err(Error::BadArcs(format!("gap or overlap between arcs {k} and {}", k + 1)));
            }
        }
        let span = arcs.last().unwrap().end - arcs[0].start;
        if (span - range).abs() > tol {
            return Err(Error::BadArcs(format!("arcs span {span}, boundary range is {range}")));
        }
        Ok(())
    }

    /// Well of the sharp data `g0` at `param`.
    pub fn well_at(&self, param: f64, range: f64) -> usize {
        let s0 = self.arcs[0].start;
        let s = s0 + (param - s0).rem_euclid(range);
        self.arcs
            .iter()
            .find(|a| s < a.end)
            .unwrap_or_else(|| self.arcs.last().unwrap())
            .well
    }

    /// Points where the well changes, in cyclic order.
    pub fn jumps(&self, range: f64) -> Vec<Jump> {
        let n = self.arcs.len();
        (0..n)
            .filter_map(|k| {
                let (a, b) = (&self.arcs[k], &self.arcs[(k + 1) % n]);
                (a.well != b.well).then(|| Jump { param: a.end.rem_euclid(range), from: a.well, to: b.well })
            })
            .collect()
    }
}

/// Boundary values `g_eps` at the boundary nodes, in sorted boundary order.
#[derive(Clone, Debug)]
pub struct DirichletData {
    pub dim: usize,
    pub values: Vec<f64>,
    pub eps: f64,
    pub spec: ArcSpec,
    pub transition: f64,
    /// Sharp-limit well per boundary node.
    pub g0: Vec<usize>,
}

fn cyclic_offset(s: f64, center: f64, range: f64) -> f64 {
    let d = (s - center).rem_euclid(range);
    if d > 0.5 * range {
        d - range
    } else {
        d
    }
}

pub fn make_dirichlet(
    dom: &Domain2D,
    spec: &ArcSpec,
    eps: f64,
    conn: &ConnectionTable,
    p: &Potential,
    transition: f64,
) -> Result<DirichletData> {
    if !(eps > 0.0) {
        return Err(invalid("eps", "must be positive"));
    }
    if !(transition > 0.0) {
        return Err(invalid("transition", "must be positive"));
    }
    let range = dom.param_range();
    spec.validate(range, p.num_wells())?;
    let jumps = spec.jumps(range);
    let half: Vec<f64> = jumps
        .iter()
        .map(|j| transition * eps / dom.param_density(j.param))
        .collect();
    let nj = jumps.len();
    for a in 0..nj {
        let b = (a + 1) % nj;
        if nj < 2 {
            break;
        }
        let gap = (jumps[b].param - jumps[a].param).rem_euclid(range);
        if gap <= half[a] + half[b] {
            return Err(Error::OverlappingTransitions { first: a, second: b, eps });
        }
    }

    let m = p.dim();
    let mut values = vec![0.0; dom.boundary.len() * m];
    let mut g0 = Vec::with_capacity(dom.boundary.len());
    for (slot, b) in dom.boundary.iter().enumerate() {
        let out = &mut values[slot * m..(slot + 1) * m];
        let well = spec.well_at(b.param, range);
        g0.push(well);
        let hit = jumps
            .iter()
            .zip(&half)
            .map(|(j, &hw)| (j, hw, cyclic_offset(b.param, j.param, range)))
            .find(|&(_, hw, d)| d.abs() <= hw);
        match hit {
            Some((j, _, d)) => {
                let t = d * dom.param_density(j.param) / eps;
                let (profile, reversed) = conn
                    .get(j.from, j.to)
                    .ok_or(Error::WellIndex { index: j.to, count: conn.num_wells() })?;
                profile.sample_at(if reversed { -t } else { t }, out);
            }
            None => out.copy_from_slice(p.well(well)?),
        }
    }
    Ok(DirichletData { dim: m, values, eps, spec: spec.clone(), transition, g0 })
}

impl DirichletData {
    pub fn value(&self, slot: usize) -> &[f64] {
        &self.values[slot * self.dim..(slot + 1) * self.dim]
    }

    /// Boundary L1 distance to the sharp data.
    pub fn l1_to_sharp(&self, dom: &Domain2D, p: &Potential) -> f64 {
        dom.boundary
            .iter()
            .enumerate()
            .map(|(slot, b)| {
                let a = &p.wells()[self.g0[slot]];
                let d: f64 = self.value(slot).iter().zip(a).map(|(x, y)| (x - y).powi(2)).sum();
                d.sqrt() * b.ds
            })
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::build_triple_well;
    use std::f64::consts::{PI, TAU};

    fn triod() -> (Domain2D, Potential, ConnectionTable, ArcSpec) {
        let p = build_triple_well(1.0).unwrap();
        let conn = ConnectionTable::solve(&p, 10.0, 400).unwrap();
        let dom = Domain2D::disk([0.0, 0.0], 1.0, 129).unwrap();
        let spec = ArcSpec::from_breaks(&[0.0, TAU / 3.0, 2.0 * TAU / 3.0, TAU], &[0, 1, 2]);
        (dom, p, conn, spec)
    }

    #[test]
    fn mid_arc_value_is_the_well() {
        let (dom, p, conn, spec) = triod();
        let g = make_dirichlet(&dom, &spec, 0.08, &conn, &p, DEFAULT_TRANSITION).unwrap();
        let (slot, _) = dom
            .boundary
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1.param - PI / 3.0).abs().partial_cmp(&(b.1.param - PI / 3.0).abs()).unwrap())
            .unwrap();
        assert_eq!(g.value(slot), p.well(0).unwrap());
    }

    #[test]
    fn sharp_distance_scales_with_eps() {
        let (dom, p, conn, spec) = triod();
        let d1 = make_dirichlet(&dom, &spec, 0.08, &conn, &p, 3.0).unwrap().l1_to_sharp(&dom, &p);
        let d2 = make_dirichlet(&dom, &spec, 0.04, &conn, &p, 3.0).unwrap().l1_to_sharp(&dom, &p);
        let ratio = d1 / d2;
        assert!((ratio - 2.0).abs() < 0.2, "ratio {ratio}");
    }

    #[test]
    fn single_arc_has_no_transitions() {
        let (dom, p, conn, _) = triod();
        let spec = ArcSpec::constant(TAU, 1);
        let g = make_dirichlet(&dom, &spec, 0.08, &conn, &p, 3.0).unwrap();
        assert!(spec.jumps(TAU).is_empty());
        for s in 0..dom.boundary.len() {
            assert_eq!(g.value(s), p.well(1).unwrap());
        }
    }

    #[test]
    fn overlapping_transitions_rejected() {
        let (dom, p, conn, spec) = triod();
        match make_dirichlet(&dom, &spec, 0.5, &conn, &p, 3.0) {
            Err(Error::OverlappingTransitions { .. }) => {}
            other => panic!("expected overlap error, got {other:?}"),
        }
    }

    fn polyline_distance(c: &crate::connect1d::ConnectionProfile, v: &[f64]) -> f64 {
        (0..c.len() - 1)
            .map(|k| {
                let (a, b) = (c.node(k), c.node(k + 1));
                let ab: Vec<f64> = a.iter().zip(b).map(|(x, y)| y - x).collect();
                let av: Vec<f64> = a.iter().zip(v).map(|(x, y)| y - x).collect();
                let len2: f64 = ab.iter().map(|x| x * x).sum();
                let t = if len2 > 0.0 { (ab.iter().zip(&av).map(|(x, y)| x * y).sum::<f64>() / len2).clamp(0.0, 1.0) } else { 0.0 };
                av.iter().zip(&ab).map(|(x, y)| (x - t * y).powi(2)).sum::<f64>().sqrt()
            })
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn transition_values_follow_the_connection() {
        let (dom, p, conn, spec) = triod();
        let g = make_dirichlet(&dom, &spec, 0.08, &conn, &p, 3.0).unwrap();
        for slot in 0..dom.boundary.len() {
            let v = g.value(slot);
            let d = conn.profiles().iter().map(|c| polyline_distance(c, v)).fold(f64::INFINITY, f64::min);
            assert!(d < 1e-6, "slot {slot} off the connection by {d}");
        }
    }

    #[test]
    fn arc_validation() {
        let bad = ArcSpec::from_breaks(&[0.0, 1.0, 3.0], &[0, 1]);
        assert!(bad.validate(TAU, 3).is_err());
        let bad_well = ArcSpec::constant(TAU, 5);
        assert!(bad_well.validate(TAU, 3).is_err());
    }
}
