//! Multi-well potentials `W : R^m -> [0, inf)` with validated well structure.
//!
//! Every potential here has the product form
//!
//! ```text
//! W(u) = prod_i |u - a_i|^2 / (2 s^(2(N-1)))
//! ```
//!
//! where `s` is a length scale (the well radius for the symmetric triple well).
//! With wells `{-1, +1}` and `s = 1` this is the scalar `(1 - u^2)^2 / 2`.
//! The form is `C^2`, vanishes exactly on the wells, has nondegenerate Hessians
//! there and grows like `|u|^(2N)` at infinity.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PotentialKind {
    DoubleWell,
    TripleWell { radius: f64 },
    Custom,
}

/// An N-well potential. Immutable once built.
#[derive(Clone, Debug)]
pub struct Potential {
    kind: PotentialKind,
    dim: usize,
    wells: Vec<Vec<f64>>,
    norm: f64,
    bound_m: f64,
    conv_c: f64,
    hess_max: f64,
}

/// Value, gradient and Hessian at one point.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub hessian: DMatrix<f64>,
}

pub fn build_double_well() -> Potential {
    Potential::from_wells(PotentialKind::DoubleWell, vec![vec![-1.0], vec![1.0]], 1.0)
        .expect("double well satisfies its own invariants")
}

/// Three wells at angles 90, 210 and 330 degrees on a circle of the given radius.
pub fn build_triple_well(radius: f64) -> Result<Potential> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(invalid("radius", format!("must be positive, got {radius}")));
    }
    let wells = [90.0f64, 210.0, 330.0]
        .iter()
        .map(|deg| {
            let t = deg.to_radians();
            vec![radius * t.cos(), radius * t.sin()]
        })
        .collect();
    Potential::from_wells(PotentialKind::TripleWell { radius }, wells, radius)
}

/// Product potential over an explicit well list. The normalization scale is
/// the largest well norm (or 1 if all wells sit at the origin's unit scale).
pub fn build_from_wells(wells: Vec<Vec<f64>>) -> Result<Potential> {
    let scale = wells
        .iter()
        .map(|a| norm(a))
        .fold(0.0f64, f64::max);
    let scale = if scale > 0.0 { scale } else { 1.0 };
    Potential::from_wells(PotentialKind::Custom, wells, scale)
}

impl Potential {
    fn from_wells(kind: PotentialKind, wells: Vec<Vec<f64>>, scale: f64) -> Result<Self> {
        if wells.len() < 2 {
            return Err(invalid("wells", "need at least two wells"));
        }
        let dim = wells[0].len();
        if dim == 0 || wells.iter().any(|a| a.len() != dim) {
            return Err(invalid("wells", "all wells must share a nonzero dimension"));
        }
        if wells.iter().flatten().any(|x| !x.is_finite()) {
            return Err(invalid("wells", "non-finite coordinate"));
        }
        for i in 0..wells.len() {
            for j in 0..i {
                if dist2(&wells[i], &wells[j]) == 0.0 {
                    return Err(invalid("wells", format!("wells {j} and {i} coincide")));
                }
            }
        }
        let n = wells.len() as i32;
        let norm = 1.0 / (2.0 * scale.powi(2 * (n - 1)));
        let max_norm = wells.iter().map(|a| self::norm(a)).fold(0.0, f64::max);
        let mut p = Potential {
            kind,
            dim,
            wells,
            norm,
            bound_m: 2.0 * max_norm.max(scale),
            conv_c: 0.0,
            hess_max: 0.0,
        };

        let mut min_eig = f64::INFINITY;
        let mut max_eig = 0.0f64;
        for a in &p.wells {
            let eig = SymmetricEigen::new(p.hessian(a)).eigenvalues;
            min_eig = min_eig.min(eig.min());
            max_eig = max_eig.max(eig.max());
        }
        if !(min_eig > 0.0) {
            return Err(Error::PotentialCheck(format!(
                "well Hessian not positive definite (smallest eigenvalue {min_eig:e})"
            )));
        }
        p.conv_c = (min_eig / 2.0).sqrt();
        p.hess_max = max_eig;
        p.check_invariants()?;
        Ok(p)
    }

    /// Sampled checks of the well structure and the growth condition.
    pub fn check_invariants(&self) -> Result<()> {
        let mut g = vec![0.0; self.dim];
        for (i, a) in self.wells.iter().enumerate() {
            if self.value(a) != 0.0 {
                return Err(Error::PotentialCheck(format!("W(a_{i}) != 0")));
            }
            self.gradient(a, &mut g);
            if norm(&g) > 1e-12 {
                return Err(Error::PotentialCheck(format!("W_u(a_{i}) != 0")));
            }
        }

        for u in self.positivity_samples() {
            if self.wells.iter().any(|a| dist2(a, &u) < 1e-24) {
                continue;
            }
            if !(self.value(&u) > 0.0) {
                return Err(Error::PotentialCheck(format!("W vanishes off the wells at {u:?}")));
            }
        }

        let r = 1.1 * self.bound_m;
        for dir in self.sphere_samples() {
            let u: Vec<f64> = dir.iter().map(|x| r * x).collect();
            self.gradient(&u, &mut g);
            if dot(&g, &u) <= 0.0 {
                return Err(Error::PotentialCheck(format!(
                    "growth condition W_u(u).u > 0 fails at {u:?}"
                )));
            }
        }
        Ok(())
    }

    fn positivity_samples(&self) -> Vec<Vec<f64>> {
        let m = self.bound_m;
        match self.dim {
            1 => (0..=200).map(|k| vec![-m + 2.0 * m * k as f64 / 200.0]).collect(),
            2 => {
                let k = 60;
                let mut out = Vec::with_capacity((k + 1) * (k + 1));
                for i in 0..=k {
                    for j in 0..=k {
                        out.push(vec![
                            -m + 2.0 * m * i as f64 / k as f64,
                            -m + 2.0 * m * j as f64 / k as f64,
                        ]);
                    }
                }
                out
            }
            d => {
                let mut rng = ChaCha8Rng::seed_from_u64(7);
                (0..4000)
                    .map(|_| (0..d).map(|_| rng.gen_range(-m..m)).collect())
                    .collect()
            }
        }
    }

    fn sphere_samples(&self) -> Vec<Vec<f64>> {
        match self.dim {
            1 => vec![vec![1.0], vec![-1.0]],
            2 => (0..360)
                .map(|k| {
                    let t = k as f64 * std::f64::consts::TAU / 360.0;
                    vec![t.cos(), t.sin()]
                })
                .collect(),
            d => {
                let mut rng = ChaCha8Rng::seed_from_u64(11);
                (0..1000)
                    .map(|_| {
                        let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
                        let n = norm(&v).max(1e-12);
                        v.into_iter().map(|x| x / n).collect()
                    })
                    .collect()
            }
        }
    }

    pub fn kind(&self) -> &PotentialKind {
        &self.kind
    }

    /// Dimension `m` of the order parameter.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn wells(&self) -> &[Vec<f64>] {
        &self.wells
    }

    pub fn well(&self, i: usize) -> Result<&[f64]> {
        self.wells.get(i).map(Vec::as_slice).ok_or(Error::WellIndex {
            index: i,
            count: self.wells.len(),
        })
    }

    pub fn num_wells(&self) -> usize {
        self.wells.len()
    }

    /// Radius beyond which `W_u(u) . u > 0`.
    pub fn bound_m(&self) -> f64 {
        self.bound_m
    }

    /// Hessian lower bound constant: `lambda_min(W_uu(a_i)) >= 2 c^2`.
    pub fn conv_c(&self) -> f64 {
        self.conv_c
    }

    /// Largest Hessian eigenvalue over the wells.
    pub fn hess_max(&self) -> f64 {
        self.hess_max
    }

    pub fn value(&self, u: &[f64]) -> f64 {
        let mut p = self.norm;
        for a in &self.wells {
            p *= dist2(u, a);
        }
        p
    }

    /// Writes `W_u(u)` into `out` and returns `W(u)`.
    pub fn value_gradient(&self, u: &[f64], out: &mut [f64]) -> f64 {
        out.iter_mut().for_each(|x| *x = 0.0);
        let n = self.wells.len();
        // d_i = |u - a_i|^2; prefix/suffix products give prod_{j != i} d_j without division
        let mut d = [0.0f64; 8];
        let mut dv;
        let d: &mut [f64] = if n <= 8 {
            &mut d[..n]
        } else {
            dv = vec![0.0; n];
            &mut dv[..]
        };
        for (k, a) in self.wells.iter().enumerate() {
            d[k] = dist2(u, a);
        }
        let mut prefix = 1.0;
        for k in 0..n {
            let mut rest = prefix;
            for dj in &d[k + 1..] {
                rest *= dj;
            }
            let c = 2.0 * self.norm * rest;
            for (o, (x, y)) in out.iter_mut().zip(u.iter().zip(&self.wells[k])) {
                *o += c * (x - y);
            }
            prefix *= d[k];
        }
        self.norm * prefix
    }

    pub fn gradient(&self, u: &[f64], out: &mut [f64]) {
        self.value_gradient(u, out);
    }

    pub fn hessian(&self, u: &[f64]) -> DMatrix<f64> {
        let m = self.dim;
        let n = self.wells.len();
        let d: Vec<f64> = self.wells.iter().map(|a| dist2(u, a)).collect();
        let diff: Vec<Vec<f64>> = self
            .wells
            .iter()
            .map(|a| u.iter().zip(a).map(|(x, y)| x - y).collect())
            .collect();
        let prod_except = |skip: &[usize]| -> f64 {
            (0..n).filter(|k| !skip.contains(k)).map(|k| d[k]).product()
        };
        let mut h = DMatrix::zeros(m, m);
        for i in 0..n {
            let pi = prod_except(&[i]);
            for r in 0..m {
                h[(r, r)] += 2.0 * pi;
            }
            for k in 0..n {
                if k == i {
                    continue;
                }
                let pik = prod_except(&[i, k]);
                for r in 0..m {
                    for c in 0..m {
                        h[(r, c)] += 4.0 * pik * diff[i][r] * diff[k][c];
                    }
                }
            }
        }
        h * self.norm
    }

    pub fn eval_all(&self, u: &[f64]) -> Evaluation {
        let mut gradient = vec![0.0; self.dim];
        let value = self.value_gradient(u, &mut gradient);
        Evaluation {
            value,
            gradient,
            hessian: self.hessian(u),
        }
    }

    /// Index of the nearest well; ties go to the lowest index.
    pub fn nearest_well(&self, u: &[f64]) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (k, a) in self.wells.iter().enumerate() {
            let dk = dist2(u, a);
            if dk < best_d {
                best_d = dk;
                best = k;
            }
        }
        best
    }
}

pub(crate) fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn fd_grad(p: &Potential, u: &[f64], h: f64) -> Vec<f64> {
        (0..u.len())
            .map(|k| {
                let mut up = u.to_vec();
                let mut um = u.to_vec();
                up[k] += h;
                um[k] -= h;
                (p.value(&up) - p.value(&um)) / (2.0 * h)
            })
            .collect()
    }

    #[test]
    fn double_well_values() {
        let p = build_double_well();
        assert_eq!(p.value(&[-1.0]), 0.0);
        assert_eq!(p.value(&[1.0]), 0.0);
        assert_eq!(p.value(&[0.0]), 0.5);
        assert_eq!(p.wells(), &[vec![-1.0], vec![1.0]]);
    }

    #[test]
    fn double_well_gradient_matches_central_difference() {
        let p = build_double_well();
        let mut g = [0.0];
        p.gradient(&[0.5], &mut g);
        let fd = fd_grad(&p, &[0.5], 1e-5)[0];
        assert!(((g[0] - fd) / g[0]).abs() < 1e-8, "{} vs {}", g[0], fd);
    }

    #[test]
    fn double_well_eval_all_at_origin() {
        let p = build_double_well();
        let e = p.eval_all(&[0.0]);
        assert_eq!(e.value, 0.5);
        assert_eq!(e.gradient, vec![0.0]);
        assert!((e.hessian[(0, 0)] + 2.0).abs() < 1e-14);
    }

    #[test]
    fn eval_all_at_well_is_zero_with_pd_hessian() {
        let p = build_triple_well(1.0).unwrap();
        for a in p.wells() {
            let e = p.eval_all(a);
            assert_eq!(e.value, 0.0);
            assert!(norm(&e.gradient) < 1e-12);
            let eig = SymmetricEigen::new(e.hessian).eigenvalues;
            assert!(eig.min() > 0.0);
        }
    }

    #[test]
    fn triple_well_rotation_symmetry() {
        let p = build_triple_well(1.0).unwrap();
        let (s, c) = (2.0 * PI / 3.0).sin_cos();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let u = [rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)];
            let ru = [c * u[0] - s * u[1], s * u[0] + c * u[1]];
            worst = worst.max((p.value(&ru) - p.value(&u)).abs());
        }
        assert!(worst < 1e-12, "{worst}");
        assert_eq!(p.value(&p.wells()[1].clone()), 0.0);
    }

    #[test]
    fn triple_well_hessian_eigenvalue_matches_eigensolve() {
        // At a well the product form gives W_uu = prod_{j!=i} |a_i-a_j|^2 / r^4 * I = 9 I.
        let p = build_triple_well(1.0).unwrap();
        let h = p.hessian(&p.wells()[0].clone());
        let eig = SymmetricEigen::new(h).eigenvalues;
        assert!((eig.min() - 9.0).abs() < 1e-12);
        assert!((p.conv_c() - (4.5f64).sqrt()).abs() < 1e-12);
        assert!(eig.min() >= 2.0 * p.conv_c().powi(2) - 1e-12);
    }

    #[test]
    fn nonpositive_radius_rejected() {
        assert!(build_triple_well(0.0).is_err());
        assert!(build_triple_well(-1.0).is_err());
        assert!(build_triple_well(f64::NAN).is_err());
    }

    #[test]
    fn hessian_matches_gradient_differences() {
        let p = build_triple_well(0.8).unwrap();
        let u = [0.3, -0.2];
        let h = p.hessian(&u);
        let eps = 1e-6;
        for c in 0..2 {
            let mut up = u;
            let mut um = u;
            up[c] += eps;
            um[c] -= eps;
            let mut gp = [0.0; 2];
            let mut gm = [0.0; 2];
            p.gradient(&up, &mut gp);
            p.gradient(&um, &mut gm);
            for r in 0..2 {
                let fd = (gp[r] - gm[r]) / (2.0 * eps);
                assert!((fd - h[(r, c)]).abs() < 1e-6 * h[(r, c)].abs().max(1.0));
            }
        }
    }

    #[test]
    fn duplicate_wells_rejected() {
        assert!(build_from_wells(vec![vec![0.0, 1.0], vec![0.0, 1.0]]).is_err());
        assert!(build_from_wells(vec![vec![0.0]]).is_err());
    }

    #[test]
    fn nearest_well_breaks_ties_low() {
        let p = build_double_well();
        assert_eq!(p.nearest_well(&[0.0]), 0);
        assert_eq!(p.nearest_well(&[0.1]), 1);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn gradient_matches_finite_differences(x in -2.0f64..2.0, y in -2.0f64..2.0) {
                let p = build_triple_well(1.0).unwrap();
                let u = [x, y];
                let mut g = [0.0; 2];
                p.gradient(&u, &mut g);
                let fd = fd_grad(&p, &u, 1e-5);
                let scale = norm(&g).max(1.0);
                for k in 0..2 {
                    prop_assert!((g[k] - fd[k]).abs() / scale < 1e-6);
                }
            }

            #[test]
            fn directional_derivative_matches(x in -2.0f64..2.0, y in -2.0f64..2.0, t in 0.0f64..6.3) {
                let p = build_triple_well(1.0).unwrap();
                let u = [x, y];
                let v = [t.cos(), t.sin()];
                let e = p.eval_all(&u);
                let h = 1e-5;
                let fd = (p.value(&[x + h * v[0], y + h * v[1]]) - p.value(&[x - h * v[0], y - h * v[1]])) / (2.0 * h);
                let dd = dot(&e.gradient, &v);
                prop_assert!((dd - fd).abs() / dd.abs().max(1.0) < 1e-6);
                prop_assert!(e.value >= 0.0);
            }
        }
    }
}
