use std::collections::HashMap;

use super::{PartitionMap, Polyline};

struct Segment {
    ends: [[f64; 2]; 2],
    /// Grid edge each end lies on; `None` for ends created by clipping.
    keys: [Option<u64>; 2],
}

fn distances(pm: &PartitionMap, v: &[f64], out: &mut Vec<f64>) {
    out.clear();
    out.extend(pm.wells.iter().map(|a| v.iter().zip(a).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()));
}

/// Marching squares on `|u - a_i| - |u - a_j|` over the domain cells, keeping
/// only the parts where `a_i` and `a_j` are the two nearest wells.
pub(super) fn trace_pair(pm: &PartitionMap, a: usize, b: usize) -> Vec<Polyline> {
    let dom = &pm.domain;
    let (nx, ny, m) = (dom.nx, dom.ny, pm.dim);
    let sval = |k: usize| {
        let v = &pm.u[k * m..(k + 1) * m];
        let da: f64 = v.iter().zip(&pm.wells[a]).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
        let db: f64 = v.iter().zip(&pm.wells[b]).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
        da - db
    };
    let others = pm.wells.len() > 2;
    let mut vbuf = vec![0.0; m];
    let mut dbuf = Vec::new();
    let mut q = |x: [f64; 2]| -> f64 {
        pm.value_at(x, &mut vbuf);
        distances(pm, &vbuf, &mut dbuf);
        let pair = dbuf[a].min(dbuf[b]);
        let rest = dbuf.iter().enumerate().filter(|&(k, _)| k != a && k != b).map(|(_, d)| *d).fold(f64::INFINITY, f64::min);
        pair - rest
    };

    let mut segs: Vec<Segment> = Vec::new();
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            if !dom.cell(i, j) {
                continue;
            }
            let k = [j * nx + i, j * nx + i + 1, (j + 1) * nx + i + 1, (j + 1) * nx + i];
            let s = [sval(k[0]), sval(k[1]), sval(k[2]), sval(k[3])];
            let pos = k.map(|kk| dom.position(kk));
            // edges: bottom, right, top, left as (corner, corner, grid key)
            let edges = [
                (0, 1, 2 * k[0] as u64),
                (1, 2, 2 * k[1] as u64 + 1),
                (3, 2, 2 * k[3] as u64),
                (0, 3, 2 * k[0] as u64 + 1),
            ];
            let neg = s.map(|v| v < 0.0);
            let mut cross: [Option<([f64; 2], u64)>; 4] = [None; 4];
            for (e, &(c0, c1, key)) in edges.iter().enumerate() {
                if neg[c0] != neg[c1] {
                    let t = s[c0] / (s[c0] - s[c1]);
                    let p = [pos[c0][0] + t * (pos[c1][0] - pos[c0][0]), pos[c0][1] + t * (pos[c1][1] - pos[c0][1])];
                    cross[e] = Some((p, key));
                }
            }
            let hits: Vec<usize> = (0..4).filter(|&e| cross[e].is_some()).collect();
            let pairs: Vec<(usize, usize)> = match hits.len() {
                2 => vec![(hits[0], hits[1])],
                4 => {
                    let center = 0.25 * (s[0] + s[1] + s[2] + s[3]);
                    if (center < 0.0) == neg[0] {
                        vec![(0, 1), (2, 3)]
                    } else {
                        vec![(0, 3), (1, 2)]
                    }
                }
                _ => vec![],
            };
            for (e0, e1) in pairs {
                let (p0, k0) = cross[e0].unwrap();
                let (p1, k1) = cross[e1].unwrap();
                let mut seg = Segment { ends: [p0, p1], keys: [Some(k0), Some(k1)] };
                if others {
                    let (q0, q1) = (q(p0), q(p1));
                    if q0 > 0.0 && q1 > 0.0 {
                        continue;
                    }
                    if (q0 > 0.0) != (q1 > 0.0) {
                        // bisect for the point where a third well becomes nearer
                        let (mut lo, mut hi) = (0.0, 1.0);
                        for _ in 0..50 {
                            let mid = 0.5 * (lo + hi);
                            let x = [p0[0] + mid * (p1[0] - p0[0]), p0[1] + mid * (p1[1] - p0[1])];
                            if (q(x) > 0.0) == (q0 > 0.0) {
                                lo = mid;
                            } else {
                                hi = mid;
                            }
                        }
                        let t = 0.5 * (lo + hi);
                        let x = [p0[0] + t * (p1[0] - p0[0]), p0[1] + t * (p1[1] - p0[1])];
                        if q0 > 0.0 {
                            seg.ends[0] = x;
                            seg.keys[0] = None;
                        } else {
                            seg.ends[1] = x;
                            seg.keys[1] = None;
                        }
                    }
                }
                segs.push(seg);
            }
        }
    }
    stitch(segs)
}

fn stitch(segs: Vec<Segment>) -> Vec<Polyline> {
    let mut at: HashMap<u64, Vec<(usize, usize)>> = HashMap::new();
    for (s, seg) in segs.iter().enumerate() {
        for e in 0..2 {
            if let Some(key) = seg.keys[e] {
                at.entry(key).or_default().push((s, e));
            }
        }
    }
    let partner = |s: usize, e: usize| -> Option<(usize, usize)> {
        let key = segs[s].keys[e]?;
        at.get(&key)?.iter().copied().find(|&(t, _)| t != s)
    };
    let mut used = vec![false; segs.len()];
    let mut chains = Vec::new();
    // open chains first: start at ends without a partner, then loops
    let starts: Vec<(usize, usize)> = (0..segs.len())
        .flat_map(|s| [(s, 0), (s, 1)])
        .filter(|&(s, e)| partner(s, e).is_none())
        .chain((0..segs.len()).map(|s| (s, 0)))
        .collect();
    for (s0, e0) in starts {
        if used[s0] {
            continue;
        }
        let mut points = vec![segs[s0].ends[e0]];
        let (mut s, mut e) = (s0, e0);
        let mut closed = false;
        loop {
            used[s] = true;
            let out = 1 - e;
            points.push(segs[s].ends[out]);
            match partner(s, out) {
                Some((t, te)) if !used[t] => {
                    s = t;
                    e = te;
                }
                Some((t, _)) if t == s0 => {
                    closed = true;
                    break;
                }
                _ => break,
            }
        }
        if closed {
            points.pop();
        }
        chains.push(Polyline { points, closed });
    }
    chains
}
