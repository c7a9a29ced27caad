use std::io::{BufRead, Write};
use std::sync::Arc;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::potential::Potential;

use super::dirichlet::DirichletData;
use super::domain::{Domain2D, NodeKind};

/// Largest phase dimension the grid kernels support.
pub const MAX_DIM: usize = 8;

/// An m-component grid function on a masked domain. Values live on every
/// grid node; exterior nodes are kept at zero and never read.
#[derive(Clone, Debug)]
pub struct Field {
    pub dim: usize,
    pub u: Vec<f64>,
    pub eps: f64,
    pub domain: Arc<Domain2D>,
    pub dirichlet: Option<Arc<DirichletData>>,
}

impl Field {
    pub fn new(domain: Arc<Domain2D>, dim: usize, eps: f64, dirichlet: Option<Arc<DirichletData>>) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(invalid("dim", format!("must be in 1..={MAX_DIM}")));
        }
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(invalid("eps", "must be positive and finite"));
        }
        if let Some(g) = &dirichlet {
            if g.dim != dim || g.values.len() != domain.boundary.len() * dim {
                return Err(invalid("dirichlet", "boundary data does not match the domain"));
            }
        }
        let mut f = Field { dim, u: vec![0.0; domain.node_count() * dim], eps, domain, dirichlet };
        f.apply_boundary();
        Ok(f)
    }

    pub fn node(&self, k: usize) -> &[f64] {
        &self.u[k * self.dim..(k + 1) * self.dim]
    }

    pub fn node_mut(&mut self, k: usize) -> &mut [f64] {
        &mut self.u[k * self.dim..(k + 1) * self.dim]
    }

    /// Overwrites boundary nodes with the Dirichlet values, if any.
    pub fn apply_boundary(&mut self) {
        let Some(g) = self.dirichlet.clone() else { return };
        let m = self.dim;
        for (slot, b) in self.domain.boundary.iter().enumerate() {
            self.u[b.index * m..(b.index + 1) * m].copy_from_slice(g.value(slot));
        }
    }

    /// Nodes the minimizers may move.
    pub fn free_mask(&self) -> Vec<bool> {
        free_mask(&self.domain, self.dirichlet.is_some())
    }

    pub fn fill_inside(&mut self, value: &[f64]) {
        for k in 0..self.domain.node_count() {
            if self.domain.is_inside(k) {
                self.node_mut(k).copy_from_slice(value);
            }
        }
        self.apply_boundary();
    }

    pub fn sup_norm(&self) -> f64 {
        sup_norm(&self.domain, &self.u, self.dim)
    }

    /// `sum_k w_k u_k`, the discrete integral of each component.
    pub fn mass(&self) -> Vec<f64> {
        mass(&self.domain, &self.u, self.dim)
    }

    /// Weighted L1 distance `sum_k w_k |u_k - v_k|`.
    pub fn l1_distance(&self, other: &Field) -> f64 {
        let m = self.dim;
        (0..self.domain.node_count())
            .map(|k| {
                let d: f64 = (0..m).map(|c| (self.u[k * m + c] - other.u[k * m + c]).powi(2)).sum();
                self.domain.node_weight[k] * d.sqrt()
            })
            .sum()
    }

    /// Weighted L1 distance to a constant state.
    pub fn l1_to_constant(&self, value: &[f64]) -> f64 {
        (0..self.domain.node_count())
            .map(|k| {
                let d: f64 = self.node(k).iter().zip(value).map(|(x, y)| (x - y).powi(2)).sum();
                self.domain.node_weight[k] * d.sqrt()
            })
            .sum()
    }

    /// CSV snapshot: a header line `nx,ny,h,m,eps`, its values, then one
    /// line per node in row-major order.
    pub fn write_snapshot<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let d = &self.domain;
        writeln!(w, "nx,ny,h,m,eps")?;
        writeln!(w, "{},{},{:e},{},{:e}", d.nx, d.ny, d.h, self.dim, self.eps)?;
        for k in 0..d.node_count() {
            let line: Vec<String> = self.node(k).iter().map(|x| format!("{x:e}")).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    pub dim: usize,
    pub eps: f64,
    pub values: Vec<f64>,
}

pub fn read_snapshot<R: BufRead>(r: R) -> Result<Snapshot> {
    let bad = |msg: &str| Error::Snapshot(msg.to_string());
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| bad("empty file"))??;
    if header.trim() != "nx,ny,h,m,eps" {
        return Err(bad("unexpected header"));
    }
    let meta = lines.next().ok_or_else(|| bad("missing metadata line"))??;
    let f: Vec<&str> = meta.trim().split(',').collect();
    if f.len() != 5 {
        return Err(bad("metadata needs five fields"));
    }
    let parse_u = |s: &str| s.parse::<usize>().map_err(|_| bad("bad integer"));
    let parse_f = |s: &str| s.parse::<f64>().map_err(|_| bad("bad number"));
    let (nx, ny, h, dim, eps) = (parse_u(f[0])?, parse_u(f[1])?, parse_f(f[2])?, parse_u(f[3])?, parse_f(f[4])?);
    let mut values = Vec::with_capacity(nx * ny * dim);
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        for s in line.split(',') {
            values.push(parse_f(s.trim())?);
        }
    }
    if values.len() != nx * ny * dim {
        return Err(bad("value count does not match nx*ny*m"));
    }
    Ok(Snapshot { nx, ny, h, dim, eps, values })
}

pub(crate) fn free_mask(dom: &Domain2D, fixed_boundary: bool) -> Vec<bool> {
    (0..dom.node_count())
        .map(|k| match dom.mask[k] {
            NodeKind::Exterior => false,
            NodeKind::Boundary if fixed_boundary => false,
            _ => dom.node_weight[k] > 0.0,
        })
        .collect()
}

pub(crate) fn sup_norm(dom: &Domain2D, u: &[f64], m: usize) -> f64 {
    (0..dom.node_count())
        .filter(|&k| dom.is_inside(k))
        .map(|k| u[k * m..(k + 1) * m].iter().map(|x| x * x).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
}

pub(crate) fn mass(dom: &Domain2D, u: &[f64], m: usize) -> Vec<f64> {
    let mut out = vec![0.0; m];
    for k in 0..dom.node_count() {
        let w = dom.node_weight[k];
        if w > 0.0 {
            for c in 0..m {
                out[c] += w * u[k * m + c];
            }
        }
    }
    out
}

/// Discrete energy: `eps/2 sum_e c_e |du_e|^2 + 1/eps sum_k w_k W(u_k)`,
/// which is the cellwise rule with forward differences averaged over the
/// two parallel cell edges and `W` averaged over the four corners.
pub fn energy(f: &Field, p: &Potential) -> f64 {
    energy_raw(&f.domain, p, f.eps, f.dim, &f.u)
}

/// Gradient of [`energy`] with respect to the free node values; zero on
/// fixed and exterior nodes.
pub fn energy_gradient(f: &Field, p: &Potential) -> Vec<f64> {
    let mut g = vec![0.0; f.u.len()];
    let free = f.free_mask();
    energy_and_gradient_raw(&f.domain, p, f.eps, f.dim, &free, &f.u, &mut g);
    g
}

fn row_energy(dom: &Domain2D, p: &Potential, eps: f64, m: usize, u: &[f64], j: usize) -> f64 {
    let nx = dom.nx;
    let mut grad2 = 0.0;
    let mut pot = 0.0;
    for i in 0..nx {
        let k = j * nx + i;
        let uk = &u[k * m..(k + 1) * m];
        if i + 1 < nx {
            let c = dom.edge_x[j * (nx - 1) + i];
            if c > 0.0 {
                grad2 += c * diff2(uk, &u[(k + 1) * m..(k + 2) * m]);
            }
        }
        if j + 1 < dom.ny {
            let c = dom.edge_y[j * nx + i];
            if c > 0.0 {
                grad2 += c * diff2(uk, &u[(k + nx) * m..(k + nx + 1) * m]);
            }
        }
        let w = dom.node_weight[k];
        if w > 0.0 {
            pot += w * p.value(uk);
        }
    }
    0.5 * eps * grad2 + pot / eps
}

#[inline]
fn diff2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub(crate) fn energy_raw(dom: &Domain2D, p: &Potential, eps: f64, m: usize, u: &[f64]) -> f64 {
    // per-row partial sums, added in row order for a deterministic total
    #[cfg(feature = "parallel")]
    let rows: Vec<f64> = (0..dom.ny).into_par_iter().map(|j| row_energy(dom, p, eps, m, u, j)).collect();
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<f64> = (0..dom.ny).map(|j| row_energy(dom, p, eps, m, u, j)).collect();
    rows.iter().sum()
}

fn row_gradient(
    dom: &Domain2D,
    p: &Potential,
    eps: f64,
    m: usize,
    free: &[bool],
    u: &[f64],
    j: usize,
    out: &mut [f64],
) -> f64 {
    let nx = dom.nx;
    let mut wu = [0.0; MAX_DIM];
    for i in 0..nx {
        let k = j * nx + i;
        let o = &mut out[i * m..(i + 1) * m];
        o.iter_mut().for_each(|x| *x = 0.0);
        if !free[k] {
            continue;
        }
        let uk = &u[k * m..(k + 1) * m];
        let nb = |c: f64, n: usize, o: &mut [f64]| {
            if c > 0.0 {
                let un = &u[n * m..(n + 1) * m];
                for q in 0..m {
                    o[q] += eps * c * (uk[q] - un[q]);
                }
            }
        };
        if i > 0 {
            nb(dom.edge_x[j * (nx - 1) + i - 1], k - 1, o);
        }
        if i + 1 < nx {
            nb(dom.edge_x[j * (nx - 1) + i], k + 1, o);
        }
        if j > 0 {
            nb(dom.edge_y[(j - 1) * nx + i], k - nx, o);
        }
        if j + 1 < dom.ny {
            nb(dom.edge_y[j * nx + i], k + nx, o);
        }
        p.value_gradient(uk, &mut wu[..m]);
        let s = dom.node_weight[k] / eps;
        for q in 0..m {
            o[q] += s * wu[q];
        }
    }
    row_energy(dom, p, eps, m, u, j)
}

/// Writes the gradient into `g` and returns the energy.
pub(crate) fn energy_and_gradient_raw(
    dom: &Domain2D,
    p: &Potential,
    eps: f64,
    m: usize,
    free: &[bool],
    u: &[f64],
    g: &mut [f64],
) -> f64 {
    let row = dom.nx * m;
    #[cfg(feature = "parallel")]
    let rows: Vec<f64> = g
        .par_chunks_mut(row)
        .enumerate()
        .map(|(j, out)| row_gradient(dom, p, eps, m, free, u, j, out))
        .collect();
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<f64> = g
        .chunks_mut(row)
        .enumerate()
        .map(|(j, out)| row_gradient(dom, p, eps, m, free, u, j, out))
        .collect();
    rows.iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connect1d::ConnectionTable;
    use crate::field2d::dirichlet::{make_dirichlet, ArcSpec};
    use crate::potential::{build_double_well, build_triple_well};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(seed: u64) -> (Field, Potential) {
        let p = build_triple_well(1.0).unwrap();
        let conn = ConnectionTable::solve(&p, 10.0, 400).unwrap();
        let dom = Arc::new(Domain2D::disk([0.0, 0.0], 1.0, 41).unwrap());
        let spec = ArcSpec::from_breaks(&[0.0, 2.0, 4.0, std::f64::consts::TAU], &[0, 1, 2]);
        let g = make_dirichlet(&dom, &spec, 0.2, &conn, &p, 3.0).unwrap();
        let mut f = Field::new(dom.clone(), 2, 0.2, Some(Arc::new(g))).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let free = f.free_mask();
        for k in 0..dom.node_count() {
            if free[k] {
                for c in 0..2 {
                    f.u[k * 2 + c] = rng.gen_range(-1.0..1.0);
                }
            }
        }
        (f, p)
    }

    #[test]
    fn gradient_matches_finite_differences() {
        for seed in 0..5 {
            let (f, p) = random_field(seed);
            let g = energy_gradient(&f, &p);
            let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
            let free = f.free_mask();
            let v: Vec<f64> = (0..f.u.len())
                .map(|i| if free[i / 2] { rng.gen_range(-1.0..1.0) } else { 0.0 })
                .collect();
            let h = 1e-6;
            let mut fp = f.clone();
            let mut fm = f.clone();
            for i in 0..v.len() {
                fp.u[i] += h * v[i];
                fm.u[i] -= h * v[i];
            }
            let fd = (energy(&fp, &p) - energy(&fm, &p)) / (2.0 * h);
            let an: f64 = g.iter().zip(&v).map(|(a, b)| a * b).sum();
            assert!((fd - an).abs() / an.abs().max(1.0) < 1e-6, "fd {fd} an {an}");
        }
    }

    #[test]
    fn gradient_is_local() {
        let (mut f, p) = random_field(7);
        let g0 = energy_gradient(&f, &p);
        let nx = f.domain.nx;
        let center = (nx / 2) * nx + nx / 2;
        let far = (nx / 2) * nx + nx / 2 + 5;
        f.u[far * 2] += 0.3;
        let g1 = energy_gradient(&f, &p);
        assert_eq!(&g0[center * 2..center * 2 + 2], &g1[center * 2..center * 2 + 2]);
        // a direct neighbour does move
        f.u[(center + 1) * 2] += 0.3;
        let g2 = energy_gradient(&f, &p);
        assert_ne!(&g0[center * 2..center * 2 + 2], &g2[center * 2..center * 2 + 2]);
    }

    #[test]
    fn boundary_gradient_is_zero() {
        let (f, p) = random_field(3);
        let g = energy_gradient(&f, &p);
        for b in &f.domain.boundary {
            assert_eq!(&g[b.index * 2..b.index * 2 + 2], &[0.0, 0.0]);
        }
    }

    #[test]
    fn constant_well_has_zero_energy() {
        let p = build_triple_well(1.0).unwrap();
        let dom = Arc::new(Domain2D::disk([0.0, 0.0], 1.0, 33).unwrap());
        let mut f = Field::new(dom, 2, 0.1, None).unwrap();
        f.fill_inside(p.well(1).unwrap());
        assert!(energy(&f, &p).abs() < 1e-28);
        assert!(energy_gradient(&f, &p).iter().all(|x| x.abs() < 1e-14));
    }

    fn stripe(n: usize, eps: f64) -> (Field, Potential) {
        let p = build_double_well();
        let dom = Arc::new(Domain2D::rectangle([0.0, 0.0], [1.0, 1.0], n).unwrap());
        let mut f = Field::new(dom.clone(), 1, eps, None).unwrap();
        for k in 0..dom.node_count() {
            let x = dom.position(k)[0];
            f.u[k] = ((x - 0.5) / eps).tanh();
        }
        (f, p)
    }

    #[test]
    fn tanh_stripe_energy() {
        // tanh solves u' = 1 - u^2, the connection of (1 - u^2)^2 / 2 in time eps
        let (f, p) = stripe(201, 0.05);
        let e = energy(&f, &p);
        assert!((e - 4.0 / 3.0).abs() / (4.0 / 3.0) < 0.02, "{e}");
    }

    #[test]
    fn energy_is_additive_over_cells() {
        // splitting the square into two rectangles sharing a column of nodes
        let (f, p) = stripe(101, 0.05);
        let d = &f.domain;
        let left = Arc::new(Domain2D::rectangle([0.0, 0.0], [0.5, 1.0], 51).unwrap());
        let right = Arc::new(Domain2D::rectangle([0.5, 0.0], [1.0, 1.0], 51).unwrap());
        let pick = |sub: &Arc<Domain2D>, off: usize| {
            let mut g = Field::new(sub.clone(), 1, 0.05, None).unwrap();
            for j in 0..sub.ny {
                for i in 0..sub.nx {
                    g.u[j * sub.nx + i] = f.u[j * d.nx + i + off];
                }
            }
            g
        };
        let (l, r) = (pick(&left, 0), pick(&right, 50));
        let total = energy(&f, &p);
        let parts = energy(&l, &p) + energy(&r, &p);
        assert!((total - parts).abs() < 1e-12 * total, "{total} {parts}");
    }

    #[test]
    fn snapshot_round_trip() {
        let (f, _) = random_field(1);
        let mut buf = Vec::new();
        f.write_snapshot(&mut buf).unwrap();
        let s = read_snapshot(&buf[..]).unwrap();
        assert_eq!((s.nx, s.ny, s.dim), (f.domain.nx, f.domain.ny, 2));
        assert_eq!(s.values, f.u);
    }
}
