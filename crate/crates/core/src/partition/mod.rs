//! Phase partitions extracted from minimizers: labels, interface contours,
//! junctions, interface energies and the Steiner reference geometry.

mod contour;
pub mod geometry;
pub mod junction;
pub mod measure;
pub mod raster;

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::field2d::{Domain2D, Field};
use crate::potential::Potential;

pub use geometry::{steiner_point, triod_reference, TriodReference};
pub use junction::{find_junctions, young_law_residual, JunctionReport};
pub use measure::{coarea_energy, coarea_half_sum, limiting_energy, LimitEnergy};
pub use raster::{rasterize, sector_labeler};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    pub points: Vec<[f64; 2]>,
    pub closed: bool,
}

impl Polyline {
    pub fn length(&self) -> f64 {
        let open: f64 = self.points.windows(2).map(|w| dist(w[0], w[1])).sum();
        if self.closed && self.points.len() > 1 {
            open + dist(self.points[0], *self.points.last().unwrap())
        } else {
            open
        }
    }
}

pub(crate) fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Per-cell labels of a field together with the interfaces between them.
#[derive(Clone, Debug)]
pub struct PartitionMap {
    pub domain: Arc<Domain2D>,
    pub dim: usize,
    pub wells: Vec<Vec<f64>>,
    /// The field the partition was extracted from.
    pub u: Vec<f64>,
    /// Well index per cell, `None` outside the domain.
    pub labels: Vec<Option<usize>>,
    pub areas: Vec<f64>,
    /// Interface chains per unordered pair `(i, j)`, `i < j`.
    pub interfaces: BTreeMap<(usize, usize), Vec<Polyline>>,
}

fn nearest(wells: &[Vec<f64>], v: &[f64]) -> usize {
    let mut best = (f64::INFINITY, 0);
    for (i, a) in wells.iter().enumerate() {
        let d: f64 = v.iter().zip(a).map(|(x, y)| (x - y) * (x - y)).sum();
        // strict comparison keeps the lowest index on ties
        if d < best.0 {
            best = (d, i);
        }
    }
    best.1
}

/// Labels every domain cell by the well nearest to the average of its four
/// corner values and traces the pairwise interfaces.
pub fn extract(f: &Field, p: &Potential) -> PartitionMap {
    let dom = f.domain.clone();
    let m = f.dim;
    let (nx, ny) = (dom.nx, dom.ny);
    let wells = p.wells().to_vec();
    let mut labels = vec![None; (nx - 1) * (ny - 1)];
    let mut areas = vec![0.0; wells.len()];
    let mut avg = vec![0.0; m];
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            if !dom.cell(i, j) {
                continue;
            }
            avg.iter_mut().for_each(|x| *x = 0.0);
            for k in [j * nx + i, j * nx + i + 1, (j + 1) * nx + i, (j + 1) * nx + i + 1] {
                for c in 0..m {
                    avg[c] += 0.25 * f.u[k * m + c];
                }
            }
            let l = nearest(&wells, &avg);
            labels[j * (nx - 1) + i] = Some(l);
            areas[l] += dom.h * dom.h;
        }
    }
    let mut pm = PartitionMap { domain: dom, dim: m, wells, u: f.u.clone(), labels, areas, interfaces: BTreeMap::new() };
    let n = pm.wells.len();
    for a in 0..n {
        for b in a + 1..n {
            if pm.areas[a] > 0.0 && pm.areas[b] > 0.0 {
                let chains = contour::trace_pair(&pm, a, b);
                if !chains.is_empty() {
                    pm.interfaces.insert((a, b), chains);
                }
            }
        }
    }
    pm
}

impl PartitionMap {
    pub fn label(&self, i: usize, j: usize) -> Option<usize> {
        self.labels[j * (self.domain.nx - 1) + i]
    }

    /// Label of the cell containing `x`, if it is a domain cell.
    pub fn label_at(&self, x: [f64; 2]) -> Option<usize> {
        let d = &self.domain;
        let gi = ((x[0] - d.origin[0]) / d.h).floor();
        let gj = ((x[1] - d.origin[1]) / d.h).floor();
        if gi < 0.0 || gj < 0.0 || gi >= (d.nx - 1) as f64 || gj >= (d.ny - 1) as f64 {
            return None;
        }
        self.label(gi as usize, gj as usize)
    }

    pub fn num_phases(&self) -> usize {
        self.wells.len()
    }

    /// Phases with at least one cell.
    pub fn present(&self) -> Vec<usize> {
        (0..self.wells.len()).filter(|&i| self.areas[i] > 0.0).collect()
    }

    pub fn total_area(&self) -> f64 {
        self.areas.iter().sum()
    }

    /// Field value at `x` by bilinear interpolation of the grid nodes.
    pub fn value_at(&self, x: [f64; 2], out: &mut [f64]) {
        let d = &self.domain;
        let m = self.dim;
        let gx = ((x[0] - d.origin[0]) / d.h).clamp(0.0, (d.nx - 1) as f64);
        let gy = ((x[1] - d.origin[1]) / d.h).clamp(0.0, (d.ny - 1) as f64);
        let i = (gx.floor() as usize).min(d.nx - 2);
        let j = (gy.floor() as usize).min(d.ny - 2);
        let (sx, sy) = (gx - i as f64, gy - j as f64);
        let k = j * d.nx + i;
        for c in 0..m {
            out[c] = (1.0 - sx) * (1.0 - sy) * self.u[k * m + c]
                + sx * (1.0 - sy) * self.u[(k + 1) * m + c]
                + (1.0 - sx) * sy * self.u[(k + d.nx) * m + c]
                + sx * sy * self.u[(k + d.nx + 1) * m + c];
        }
    }
}

/// Marching-squares length of the `(i, j)` interface; zero if either phase is absent.
pub fn interface_length_contour(pm: &PartitionMap, i: usize, j: usize) -> f64 {
    let key = if i < j { (i, j) } else { (j, i) };
    pm.interfaces
        .get(&key)
        .map(|chains| chains.iter().map(Polyline::length).sum())
        .unwrap_or(0.0)
}

/// Sum of the contour lengths over all pairs.
pub fn total_interface_length(pm: &PartitionMap) -> f64 {
    pm.interfaces.values().flatten().map(Polyline::length).sum()
}
