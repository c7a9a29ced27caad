use std::f64::consts::TAU;
use std::sync::Arc;

use crate::error::Result;
use crate::field2d::{Domain2D, Field};
use crate::potential::Potential;

const SUPERSAMPLE: usize = 8;

/// Renders a sharp partition `x -> well` as a field: each node holds the mean
/// of the wells over an `8 x 8` sample of its dual cell, so the extracted
/// contours land on the partition's interfaces.
pub fn rasterize<F: Fn([f64; 2]) -> usize>(dom: Arc<Domain2D>, p: &Potential, labeler: F) -> Result<Field> {
    let mut f = Field::new(dom.clone(), p.dim(), dom.h, None)?;
    let m = p.dim();
    let step = dom.h / SUPERSAMPLE as f64;
    let w = 1.0 / (SUPERSAMPLE * SUPERSAMPLE) as f64;
    for k in 0..dom.node_count() {
        if !dom.is_inside(k) {
            continue;
        }
        let x = dom.position(k);
        let out = f.node_mut(k);
        out.iter_mut().for_each(|v| *v = 0.0);
        for a in 0..SUPERSAMPLE {
            for b in 0..SUPERSAMPLE {
                let s = [
                    x[0] - 0.5 * dom.h + (a as f64 + 0.5) * step,
                    x[1] - 0.5 * dom.h + (b as f64 + 0.5) * step,
                ];
                let well = &p.wells()[labeler(s)];
                for c in 0..m {
                    out[c] += w * well[c];
                }
            }
        }
    }
    Ok(f)
}

/// Angular sectors about `center`: `rays` holds `(angle, well)` and the
/// sector from each ray counterclockwise to the next carries its well.
pub fn sector_labeler(center: [f64; 2], mut rays: Vec<(f64, usize)>) -> impl Fn([f64; 2]) -> usize {
    for r in rays.iter_mut() {
        r.0 = r.0.rem_euclid(TAU);
    }
    rays.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    move |x: [f64; 2]| {
        let t = (x[1] - center[1]).atan2(x[0] - center[0]).rem_euclid(TAU);
        match rays.iter().rposition(|r| r.0 <= t) {
            Some(i) => rays[i].1,
            None => rays.last().unwrap().1,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::{extract, interface_length_contour};
    use crate::potential::build_triple_well;
    use std::f64::consts::PI;

    #[test]
    fn diameter_split_has_length_two() {
        let p = build_triple_well(1.0).unwrap();
        let dom = Arc::new(Domain2D::disk([0.0, 0.0], 1.0, 129).unwrap());
        let f = rasterize(dom.clone(), &p, sector_labeler([0.0, 0.0], vec![(0.3, 0), (0.3 + PI, 2)])).unwrap();
        let pm = extract(&f, &p);
        let len = interface_length_contour(&pm, 0, 2);
        assert!((len - 2.0).abs() < 2.0 * dom.h, "{len}");
        assert!((pm.areas[0] - pm.areas[2]).abs() < 4.0 * dom.h);
    }
}
