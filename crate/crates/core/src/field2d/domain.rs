use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case")]
pub enum Shape {
    Disk { center: [f64; 2], radius: f64 },
    Rectangle { min: [f64; 2], max: [f64; 2] },
    /// Disk with the cap above the chord `y = center.y + cut` removed.
    TruncatedDisk { center: [f64; 2], radius: f64, cut: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeKind {
    Exterior,
    Boundary,
    Interior,
}

#[derive(Clone, Debug)]
pub struct BoundaryNode {
    pub index: usize,
    pub normal: [f64; 2],
    /// Polar angle in `[0, 2pi)` for disks, counterclockwise arclength from
    /// the lower-left corner for rectangles.
    pub param: f64,
    /// Arclength weight of the node.
    pub ds: f64,
}

/// Masked Cartesian grid over a planar domain.
#[derive(Clone, Debug)]
pub struct Domain2D {
    pub shape: Shape,
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    pub origin: [f64; 2],
    pub mask: Vec<NodeKind>,
    /// Sorted by `param`.
    pub boundary: Vec<BoundaryNode>,
    /// `(nx-1) x (ny-1)` flags: all four corners inside.
    pub cells: Vec<bool>,
    /// Weight of edge `(i,j)-(i+1,j)`, stored at `j*(nx-1)+i`: half the number of adjacent domain cells.
    pub edge_x: Vec<f64>,
    /// Weight of edge `(i,j)-(i,j+1)`, stored at `j*nx+i`.
    pub edge_y: Vec<f64>,
    /// `h^2 / 4` times the number of domain cells touching the node.
    pub node_weight: Vec<f64>,
    boundary_slot: Vec<usize>,
}

const NO_SLOT: usize = usize::MAX;

impl Domain2D {
    /// Disk sampled by an `n x n` grid whose outer nodes touch the circle.
    pub fn disk(center: [f64; 2], radius: f64, n: usize) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(invalid("radius", "must be positive"));
        }
        Self::check_n(n)?;
        let h = 2.0 * radius / (n - 1) as f64;
        let origin = [center[0] - radius, center[1] - radius];
        Self::build(Shape::Disk { center, radius }, n, n, h, origin)
    }

    /// Rectangle `[min, max]`; `n` nodes along x, the y count follows from `h`.
    pub fn rectangle(min: [f64; 2], max: [f64; 2], n: usize) -> Result<Self> {
        let (w, ht) = (max[0] - min[0], max[1] - min[1]);
        if !(w > 0.0 && ht > 0.0) {
            return Err(invalid("extents", "rectangle must have positive width and height"));
        }
        Self::check_n(n)?;
        let h = w / (n - 1) as f64;
        let ny_f = ht / h;
        let ny = ny_f.round() as usize + 1;
        if (ny_f - ny_f.round()).abs() > 1e-6 {
            return Err(invalid("extents", "height must be a multiple of the grid spacing"));
        }
        Self::build(Shape::Rectangle { min, max }, n, ny, h, min)
    }

    pub fn truncated_disk(center: [f64; 2], radius: f64, cut: f64, n: usize) -> Result<Self> {
        if !(radius > 0.0) || !(cut.abs() < radius) {
            return Err(invalid("cut", "chord must cross the disk"));
        }
        Self::check_n(n)?;
        let h = 2.0 * radius / (n - 1) as f64;
        let origin = [center[0] - radius, center[1] - radius];
        Self::build(Shape::TruncatedDisk { center, radius, cut }, n, n, h, origin)
    }

    fn check_n(n: usize) -> Result<()> {
        if n < 8 {
            return Err(invalid("n", format!("grid needs at least 8 nodes per side, got {n}")));
        }
        Ok(())
    }

    fn inside(shape: &Shape, x: f64, y: f64, h: f64) -> bool {
        let tol = 1e-9 * h;
        match *shape {
            Shape::Disk { center, radius } => {
                let (dx, dy) = (x - center[0], y - center[1]);
                (dx * dx + dy * dy).sqrt() <= radius + tol
            }
            Shape::Rectangle { min, max } => {
                x >= min[0] - tol && x <= max[0] + tol && y >= min[1] - tol && y <= max[1] + tol
            }
            Shape::TruncatedDisk { center, radius, cut } => {
                let (dx, dy) = (x - center[0], y - center[1]);
                (dx * dx + dy * dy).sqrt() <= radius + tol && dy <= cut + tol
            }
        }
    }

    fn build(shape: Shape, nx: usize, ny: usize, h: f64, origin: [f64; 2]) -> Result<Self> {
        let idx = |i: usize, j: usize| j * nx + i;
        let pos = |i: usize, j: usize| [origin[0] + i as f64 * h, origin[1] + j as f64 * h];
        let inside: Vec<bool> = (0..nx * ny)
            .map(|k| {
                let p = pos(k % nx, k / nx);
                Self::inside(&shape, p[0], p[1], h)
            })
            .collect();
        let mut mask = vec![NodeKind::Exterior; nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                let k = idx(i, j);
                if !inside[k] {
                    continue;
                }
                let edge = i == 0 || j == 0 || i == nx - 1 || j == ny - 1;
                let all_in = !edge
                    && inside[k - 1]
                    && inside[k + 1]
                    && inside[k - nx]
                    && inside[k + nx];
                mask[k] = if all_in { NodeKind::Interior } else { NodeKind::Boundary };
            }
        }

        let mut cells = vec![false; (nx - 1) * (ny - 1)];
        for j in 0..ny - 1 {
            for i in 0..nx - 1 {
                cells[j * (nx - 1) + i] = inside[idx(i, j)]
                    && inside[idx(i + 1, j)]
                    && inside[idx(i, j + 1)]
                    && inside[idx(i + 1, j + 1)];
            }
        }
        let cell = |i: isize, j: isize| -> bool {
            i >= 0
                && j >= 0
                && (i as usize) < nx - 1
                && (j as usize) < ny - 1
                && cells[j as usize * (nx - 1) + i as usize]
        };
        let mut edge_x = vec![0.0; (nx - 1) * ny];
        for j in 0..ny {
            for i in 0..nx - 1 {
                let c = cell(i as isize, j as isize - 1) as u8 + cell(i as isize, j as isize) as u8;
                edge_x[j * (nx - 1) + i] = 0.5 * c as f64;
            }
        }
        let mut edge_y = vec![0.0; nx * (ny - 1)];
        for j in 0..ny - 1 {
            for i in 0..nx {
                let c = cell(i as isize - 1, j as isize) as u8 + cell(i as isize, j as isize) as u8;
                edge_y[j * nx + i] = 0.5 * c as f64;
            }
        }
        let mut node_weight = vec![0.0; nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                let (ii, jj) = (i as isize, j as isize);
                let c = [(ii - 1, jj - 1), (ii, jj - 1), (ii - 1, jj), (ii, jj)]
                    .iter()
                    .filter(|&&(a, b)| cell(a, b))
                    .count();
                node_weight[idx(i, j)] = 0.25 * h * h * c as f64;
            }
        }

        let mut boundary: Vec<BoundaryNode> = (0..nx * ny)
            .filter(|&k| mask[k] == NodeKind::Boundary)
            .map(|k| {
                let p = pos(k % nx, k / nx);
                let (param, normal) = Self::param_normal(&shape, p);
                BoundaryNode { index: k, normal, param, ds: 0.0 }
            })
            .collect();
        boundary.sort_by(|a, b| a.param.partial_cmp(&b.param).unwrap().then(a.index.cmp(&b.index)));
        let range = Self::param_range_of(&shape);
        let nb = boundary.len();
        if nb < 3 {
            return Err(invalid("n", "grid too coarse to resolve the boundary"));
        }
        for b in 0..nb {
            let prev = boundary[(b + nb - 1) % nb].param;
            let next = boundary[(b + 1) % nb].param;
            let cur = boundary[b].param;
            let back = (cur - prev).rem_euclid(range);
            let fwd = (next - cur).rem_euclid(range);
            boundary[b].ds = 0.5 * (back + fwd) * Self::density_of(&shape, cur);
        }
        let mut boundary_slot = vec![NO_SLOT; nx * ny];
        for (s, b) in boundary.iter().enumerate() {
            boundary_slot[b.index] = s;
        }

        let dom = Domain2D {
            shape,
            nx,
            ny,
            h,
            origin,
            mask,
            boundary,
            cells,
            edge_x,
            edge_y,
            node_weight,
            boundary_slot,
        };
        debug_assert!(dom.interior_neighbors_ok());
        Ok(dom)
    }

    fn param_normal(shape: &Shape, p: [f64; 2]) -> (f64, [f64; 2]) {
        match *shape {
            Shape::Disk { center, .. } => {
                let (dx, dy) = (p[0] - center[0], p[1] - center[1]);
                let r = (dx * dx + dy * dy).sqrt().max(1e-300);
                (dy.atan2(dx).rem_euclid(TAU), [dx / r, dy / r])
            }
            Shape::TruncatedDisk { center, radius, cut } => {
                let (dx, dy) = (p[0] - center[0], p[1] - center[1]);
                let r = (dx * dx + dy * dy).sqrt().max(1e-300);
                let chord_half = (radius * radius - cut * cut).sqrt();
                let on_chord = dy > cut - 1e-9 * radius || (dy > 0.0 && dx.abs() < chord_half && r < radius * 0.999);
                let normal = if on_chord { [0.0, 1.0] } else { [dx / r, dy / r] };
                (dy.atan2(dx).rem_euclid(TAU), normal)
            }
            Shape::Rectangle { min, max } => {
                let (w, ht) = (max[0] - min[0], max[1] - min[1]);
                let tol = 1e-9 * (w + ht);
                let (x, y) = (p[0], p[1]);
                if (y - min[1]).abs() < tol && x < max[0] - tol {
                    (x - min[0], [0.0, -1.0])
                } else if (x - max[0]).abs() < tol && y < max[1] - tol {
                    (w + (y - min[1]), [1.0, 0.0])
                } else if (y - max[1]).abs() < tol && x > min[0] + tol {
                    (w + ht + (max[0] - x), [0.0, 1.0])
                } else {
                    (2.0 * w + ht + (max[1] - y), [-1.0, 0.0])
                }
            }
        }
    }

    fn param_range_of(shape: &Shape) -> f64 {
        match *shape {
            Shape::Disk { .. } | Shape::TruncatedDisk { .. } => TAU,
            Shape::Rectangle { min, max } => 2.0 * ((max[0] - min[0]) + (max[1] - min[1])),
        }
    }

    /// Arclength per unit boundary parameter at `param`.
    fn density_of(shape: &Shape, param: f64) -> f64 {
        match *shape {
            Shape::Disk { radius, .. } => radius,
            Shape::Rectangle { .. } => 1.0,
            Shape::TruncatedDisk { radius, cut, .. } => {
                let s = param.sin();
                if s > 0.0 && cut / s < radius {
                    cut / (s * s)
                } else {
                    radius
                }
            }
        }
    }

    pub fn param_range(&self) -> f64 {
        Self::param_range_of(&self.shape)
    }

    pub fn param_density(&self, param: f64) -> f64 {
        Self::density_of(&self.shape, param)
    }

    /// Length of the continuous boundary curve.
    pub fn perimeter(&self) -> f64 {
        match self.shape {
            Shape::Disk { radius, .. } => TAU * radius,
            Shape::Rectangle { min, max } => 2.0 * ((max[0] - min[0]) + (max[1] - min[1])),
            Shape::TruncatedDisk { radius, cut, .. } => {
                let half = (cut / radius).acos();
                radius * (TAU - 2.0 * half) + 2.0 * (radius * radius - cut * cut).sqrt()
            }
        }
    }

    /// Exact area of the continuous domain.
    pub fn exact_area(&self) -> f64 {
        match self.shape {
            Shape::Disk { radius, .. } => std::f64::consts::PI * radius * radius,
            Shape::Rectangle { min, max } => (max[0] - min[0]) * (max[1] - min[1]),
            Shape::TruncatedDisk { radius, cut, .. } => {
                let half = (cut / radius).acos();
                let cap = radius * radius * (half - half.sin() * half.cos());
                std::f64::consts::PI * radius * radius - cap
            }
        }
    }

    /// Area of the domain cells, `h^2` times their count.
    pub fn area(&self) -> f64 {
        self.cells.iter().filter(|&&c| c).count() as f64 * self.h * self.h
    }

    pub fn center(&self) -> [f64; 2] {
        match self.shape {
            Shape::Disk { center, .. } | Shape::TruncatedDisk { center, .. } => center,
            Shape::Rectangle { min, max } => [0.5 * (min[0] + max[0]), 0.5 * (min[1] + max[1])],
        }
    }

    pub fn position(&self, k: usize) -> [f64; 2] {
        [
            self.origin[0] + (k % self.nx) as f64 * self.h,
            self.origin[1] + (k / self.nx) as f64 * self.h,
        ]
    }

    pub fn node_count(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_inside(&self, k: usize) -> bool {
        self.mask[k] != NodeKind::Exterior
    }

    pub fn cell(&self, i: usize, j: usize) -> bool {
        self.cells[j * (self.nx - 1) + i]
    }

    /// Position of the boundary node in the sorted boundary list.
    pub fn boundary_slot(&self, k: usize) -> Option<usize> {
        match self.boundary_slot[k] {
            NO_SLOT => None,
            s => Some(s),
        }
    }

    /// Point on the continuous boundary with the given parameter.
    pub fn boundary_point(&self, param: f64) -> [f64; 2] {
        match self.shape {
            Shape::Disk { center, radius } => [center[0] + radius * param.cos(), center[1] + radius * param.sin()],
            Shape::TruncatedDisk { center, radius, cut } => {
                let (s, c) = param.sin_cos();
                let r = if s > 0.0 && cut / s < radius { cut / s } else { radius };
                [center[0] + r * c, center[1] + r * s]
            }
            Shape::Rectangle { min, max } => {
                let (w, ht) = (max[0] - min[0], max[1] - min[1]);
                let s = param.rem_euclid(2.0 * (w + ht));
                if s <= w {
                    [min[0] + s, min[1]]
                } else if s <= w + ht {
                    [max[0], min[1] + s - w]
                } else if s <= 2.0 * w + ht {
                    [max[0] - (s - w - ht), max[1]]
                } else {
                    [min[0], max[1] - (s - 2.0 * w - ht)]
                }
            }
        }
    }

    pub fn interior_neighbors_ok(&self) -> bool {
        let nx = self.nx;
        (0..self.node_count()).all(|k| {
            self.mask[k] != NodeKind::Interior
                || [k - 1, k + 1, k - nx, k + nx]
                    .iter()
                    .all(|&n| self.mask[n] != NodeKind::Exterior)
        })
    }
}
