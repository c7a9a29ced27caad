//! Browser bindings: relax a three-phase partition on the unit disk one
//! descent step at a time, locate Steiner points, and sample connections.

use std::f64::consts::TAU;
use std::sync::Arc;

use allen_cahn::connect1d::ConnectionTable;
use allen_cahn::field2d::{
    check_eps_list, initialize, make_dirichlet, ArcSpec, Descent, Domain2D, Field, InitialCondition,
    SolverOptions,
};
use allen_cahn::partition::{extract, find_junctions, triod_reference};
use allen_cahn::potential::{build_double_well, build_triple_well, Potential};
use wasm_bindgen::prelude::*;

const PALETTE: [[f64; 3]; 3] = [[68.0, 119.0, 170.0], [238.0, 102.0, 119.0], [34.0, 136.0, 51.0]];

#[wasm_bindgen]
pub struct Relaxation {
    potential: Potential,
    descent: Descent,
    sigma: f64,
    reference: [f64; 3],
}

impl Relaxation {
    /// Three boundary jumps at the given polar angles; the arcs between them
    /// carry wells 0, 1, 2 counterclockwise.
    pub fn build(jump_angles: &[f64], n: usize, eps: f64) -> Result<Self, String> {
        if jump_angles.len() != 3 {
            return Err("need three jump angles".into());
        }
        let mut a: Vec<f64> = jump_angles.iter().map(|t| t.rem_euclid(TAU)).collect();
        a.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let spec = ArcSpec::from_breaks(&[a[0], a[1], a[2], a[0] + TAU], &[0, 1, 2]);
        let p = build_triple_well(1.0).map_err(|e| e.to_string())?;
        let conn = ConnectionTable::solve(&p, 10.0, 1000).map_err(|e| e.to_string())?;
        let dom = Arc::new(Domain2D::disk([0.0, 0.0], 1.0, n).map_err(|e| e.to_string())?);
        check_eps_list(&[eps], dom.h).map_err(|e| e.to_string())?;
        let data = make_dirichlet(&dom, &spec, eps, &conn, &p, 3.0).map_err(|e| e.to_string())?;
        let mut f = Field::new(dom, 2, eps, Some(Arc::new(data))).map_err(|e| e.to_string())?;
        initialize(&mut f, &InitialCondition::Radial, &p, Some(&spec)).map_err(|e| e.to_string())?;
        let pts = [0, 1, 2].map(|k| [a[k].cos(), a[k].sin()]);
        let sigma = conn.mean_sigma();
        let tr = triod_reference(pts, sigma).map_err(|e| e.to_string())?;
        let descent = Descent::new(f, &p, SolverOptions::default()).map_err(|e| e.to_string())?;
        Ok(Relaxation { potential: p, descent, sigma, reference: [tr.center[0], tr.center[1], tr.energy] })
    }
}

#[wasm_bindgen]
impl Relaxation {
    #[wasm_bindgen(constructor)]
    pub fn new(jump_angles: Vec<f64>, n: usize, eps: f64) -> Result<Relaxation, JsError> {
        Relaxation::build(&jump_angles, n, eps).map_err(|e| JsError::new(&e))
    }

    /// Up to `count` descent steps; returns how many were taken.
    pub fn step(&mut self, count: u32) -> u32 {
        let mut taken = 0;
        while taken < count && self.descent.stopped().is_none() {
            self.descent.step();
            taken += 1;
        }
        taken
    }

    pub fn finished(&self) -> bool {
        self.descent.stopped().is_some()
    }

    pub fn energy(&self) -> f64 {
        self.descent.energy()
    }

    pub fn iterations(&self) -> usize {
        self.descent.iterations()
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// `[x, y, energy]` of the Steiner triod joining the jump points.
    pub fn reference(&self) -> Vec<f64> {
        self.reference.to_vec()
    }

    /// Grid nodes per side; the image is `size x size`.
    pub fn size(&self) -> usize {
        self.descent.field().domain.nx
    }

    /// RGBA pixels, top row first. Each node blends the phase colours by
    /// closeness to the wells; outside the disk is transparent.
    pub fn render(&self) -> Vec<u8> {
        let f = self.descent.field();
        let d = &f.domain;
        let mut out = vec![0u8; d.nx * d.ny * 4];
        for j in 0..d.ny {
            for i in 0..d.nx {
                let k = j * d.nx + i;
                if !d.is_inside(k) {
                    continue;
                }
                let u = f.node(k);
                let w: Vec<f64> = self
                    .potential
                    .wells()
                    .iter()
                    .map(|a| (-((u[0] - a[0]).powi(2) + (u[1] - a[1]).powi(2)) / 0.15).exp())
                    .collect();
                let total: f64 = w.iter().sum::<f64>().max(1e-300);
                let px = ((d.ny - 1 - j) * d.nx + i) * 4;
                for c in 0..3 {
                    let v: f64 = (0..3).map(|q| w[q] * PALETTE[q][c]).sum::<f64>() / total;
                    out[px + c] = v.round().clamp(0.0, 255.0) as u8;
                }
                out[px + 3] = 255;
            }
        }
        out
    }

    /// Triple junctions of the current field, flattened `x, y` pairs.
    pub fn junctions(&self) -> Vec<f64> {
        let pm = extract(self.descent.field(), &self.potential);
        find_junctions(&pm).iter().flat_map(|j| j.location).collect()
    }
}

/// Fermat point of three points given as `[x1, y1, x2, y2, x3, y3]`;
/// returns `[x, y, total distance]`.
#[wasm_bindgen]
pub fn steiner(xy: Vec<f64>) -> Vec<f64> {
    if xy.len() != 6 {
        return Vec::new();
    }
    let (x, len) = allen_cahn::partition::steiner_point([xy[0], xy[1]], [xy[2], xy[3]], [xy[4], xy[5]]);
    vec![x[0], x[1], len]
}

/// Dimension, action and flattened `t, U` rows of the first connection.
pub fn sample_connection(kind: &str) -> Result<(usize, f64, Vec<f64>), String> {
    let p = match kind {
        "double-well" => build_double_well(),
        "triple-well" => build_triple_well(1.0).map_err(|e| e.to_string())?,
        other => return Err(format!("unknown potential {other}")),
    };
    let table = ConnectionTable::solve(&p, 10.0, 1000).map_err(|e| e.to_string())?;
    let c = &table.profiles()[0];
    let mut rows = Vec::with_capacity(c.len() * (c.dim + 1));
    for k in 0..c.len() {
        rows.push(c.time(k));
        rows.extend_from_slice(c.node(k));
    }
    Ok((c.dim, c.action, rows))
}

/// Connection from the first to the second well: rows `t, U_1 .. U_m`
/// flattened, preceded by `m` and the action.
#[wasm_bindgen]
pub fn connection_profile(kind: &str) -> Result<Vec<f64>, JsError> {
    let (m, action, rows) = sample_connection(kind).map_err(|e| JsError::new(&e))?;
    let mut out = vec![m as f64, action];
    out.extend(rows);
    Ok(out)
}
