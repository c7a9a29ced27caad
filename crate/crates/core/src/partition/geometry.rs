use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

use super::dist;

fn angle_at(v: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let (u, w) = ([a[0] - v[0], a[1] - v[1]], [b[0] - v[0], b[1] - v[1]]);
    let c = (u[0] * w[0] + u[1] * w[1]) / (u[0].hypot(u[1]) * w[0].hypot(w[1]));
    c.clamp(-1.0, 1.0).acos()
}

fn total(x: [f64; 2], pts: &[[f64; 2]; 3]) -> f64 {
    pts.iter().map(|&p| dist(x, p)).sum()
}

/// Fermat point of three points and the minimal sum of distances to them.
///
/// A vertex whose angle is at least `2pi/3` is itself the minimizer.
/// Collinear input returns the middle point.
pub fn steiner_point(p1: [f64; 2], p2: [f64; 2], p3: [f64; 2]) -> ([f64; 2], f64) {
    let pts = [p1, p2, p3];
    let scale = dist(p1, p2).max(dist(p2, p3)).max(dist(p1, p3));
    if scale == 0.0 {
        return (p1, 0.0);
    }
    let cross = (p2[0] - p1[0]) * (p3[1] - p1[1]) - (p2[1] - p1[1]) * (p3[0] - p1[0]);
    if cross.abs() <= 1e-14 * scale * scale {
        // the middle point minimizes the sum on a line
        let d = [p2[0] - p1[0], p2[1] - p1[1]];
        let d = if d[0] == 0.0 && d[1] == 0.0 { [p3[0] - p1[0], p3[1] - p1[1]] } else { d };
        let mut order = pts;
        order.sort_by(|a, b| {
            let ta = a[0] * d[0] + a[1] * d[1];
            let tb = b[0] * d[0] + b[1] * d[1];
            ta.partial_cmp(&tb).unwrap()
        });
        return (order[1], total(order[1], &pts));
    }
    for k in 0..3 {
        let (a, b) = (pts[(k + 1) % 3], pts[(k + 2) % 3]);
        if angle_at(pts[k], a, b) >= 2.0 * PI / 3.0 {
            return (pts[k], total(pts[k], &pts));
        }
    }
    // Weiszfeld iteration from the centroid
    let mut x = [(p1[0] + p2[0] + p3[0]) / 3.0, (p1[1] + p2[1] + p3[1]) / 3.0];
    for _ in 0..100_000 {
        let (mut nx, mut ny, mut wsum) = (0.0, 0.0, 0.0);
        for p in &pts {
            let d = dist(x, *p).max(1e-300);
            nx += p[0] / d;
            ny += p[1] / d;
            wsum += 1.0 / d;
        }
        let next = [nx / wsum, ny / wsum];
        let step = dist(next, x);
        x = next;
        if step <= 1e-12 * scale {
            break;
        }
    }
    (x, total(x, &pts))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriodReference {
    pub center: [f64; 2],
    pub segments: Vec<[[f64; 2]; 2]>,
    /// Total segment length.
    pub length: f64,
    pub energy: f64,
}

/// Minimal network joining three boundary jump points: segments from their
/// Steiner point, with energy `sigma` times the total length.
pub fn triod_reference(jumps: [[f64; 2]; 3], sigma: f64) -> Result<TriodReference> {
    let scale = dist(jumps[0], jumps[1]).max(dist(jumps[1], jumps[2])).max(dist(jumps[0], jumps[2]));
    for a in 0..3 {
        for b in a + 1..3 {
            if dist(jumps[a], jumps[b]) <= 1e-12 * scale.max(1e-300) {
                return Err(invalid("jump_points", format!("points {a} and {b} coincide")));
            }
        }
    }
    let (center, length) = steiner_point(jumps[0], jumps[1], jumps[2]);
    let segments = jumps
        .iter()
        .filter(|&&j| dist(j, center) > 0.0)
        .map(|&j| [center, j])
        .collect();
    Ok(TriodReference { center, segments, length, energy: sigma * length })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn equilateral_gives_centroid() {
        let pts = [[1.0, 0.0], [-0.5, 3f64.sqrt() / 2.0], [-0.5, -(3f64.sqrt()) / 2.0]];
        let (x, len) = steiner_point(pts[0], pts[1], pts[2]);
        assert!(x[0].abs() < 1e-10 && x[1].abs() < 1e-10);
        assert!((len - 3.0).abs() < 1e-10);
    }

    #[test]
    fn obtuse_vertex_is_returned() {
        let (x, _) = steiner_point([0.0, 0.0], [1.0, 0.1], [-1.0, 0.1]);
        assert_eq!(x, [0.0, 0.0]);
    }

    #[test]
    fn collinear_returns_middle() {
        let (x, len) = steiner_point([0.0, 0.0], [3.0, 0.0], [1.0, 0.0]);
        assert_eq!(x, [1.0, 0.0]);
        assert!((len - 3.0).abs() < 1e-15);
    }

    #[test]
    fn sides_subtend_120_degrees() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut checked = 0;
        while checked < 20 {
            let p: Vec<[f64; 2]> = (0..3).map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).collect();
            let (x, _) = steiner_point(p[0], p[1], p[2]);
            if p.contains(&x) {
                continue;
            }
            for k in 0..3 {
                let a = angle_at(x, p[k], p[(k + 1) % 3]);
                assert!((a - 2.0 * PI / 3.0).abs() < 1e-6, "{a}");
            }
            checked += 1;
        }
    }

    #[test]
    fn symmetric_triod_reference() {
        let j: Vec<[f64; 2]> = (0..3).map(|k| {
            let t = 2.0 * PI * k as f64 / 3.0;
            [t.cos(), t.sin()]
        }).collect();
        let r = triod_reference([j[0], j[1], j[2]], 1.3).unwrap();
        assert!(r.center[0].abs() < 1e-10 && r.center[1].abs() < 1e-10);
        assert!((r.energy - 3.0 * 1.3).abs() < 1e-9);
    }

    #[test]
    fn wide_angle_reference_sits_on_a_jump() {
        // jump points spanning less than a third of the circle
        let j: Vec<[f64; 2]> = [0.0f64, 0.5, 1.0].iter().map(|t| [t.cos(), t.sin()]).collect();
        let r = triod_reference([j[0], j[1], j[2]], 1.0).unwrap();
        assert_eq!(r.center, j[1]);
    }

    #[test]
    fn rotated_jump_energy_bounds() {
        let t = [0.1, 2.0 * PI / 3.0, 4.0 * PI / 3.0];
        let j: Vec<[f64; 2]> = t.iter().map(|t| [t.cos(), t.sin()]).collect();
        let r = triod_reference([j[0], j[1], j[2]], 1.0).unwrap();
        assert!(r.energy > 3.0 * 0.9 && r.energy < 3.0 * 1.1);
        assert!(r.energy < 3.0);
    }

    #[test]
    fn coincident_jumps_rejected() {
        assert!(triod_reference([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]], 1.0).is_err());
    }
}
