use std::fmt::Write as _;
use std::io::Write;

use crate::partition::{JunctionReport, PartitionMap};

const PALETTE: [&str; 8] = ["#4477aa", "#ee6677", "#228833", "#ccbb44", "#66ccee", "#aa3377", "#bbbbbb", "#000000"];

/// Binary PGM of the cell labels, top row first. Outside cells are white and
/// labels spread evenly over the darker grays.
pub fn write_label_pgm<W: Write>(pm: &PartitionMap, mut w: W) -> std::io::Result<()> {
    let d = &pm.domain;
    let (cx, cy) = (d.nx - 1, d.ny - 1);
    let n = pm.wells.len().max(2);
    write!(w, "P5\n{cx} {cy}\n255\n")?;
    let mut row = vec![0u8; cx];
    for j in (0..cy).rev() {
        for (i, px) in row.iter_mut().enumerate() {
            *px = match pm.label(i, j) {
                None => 255,
                Some(k) => (k * 200 / (n - 1)) as u8,
            };
        }
        w.write_all(&row)?;
    }
    Ok(())
}

/// Static SVG: label regions as horizontal runs, interfaces as polylines and
/// junctions as circles. Drawn in domain coordinates with `y` up.
pub fn render_svg(pm: &PartitionMap, junctions: &[JunctionReport]) -> String {
    let d = &pm.domain;
    let (cx, cy) = (d.nx - 1, d.ny - 1);
    let (x0, y0) = (d.origin[0], d.origin[1]);
    let (wd, ht) = (cx as f64 * d.h, cy as f64 * d.h);
    let px = 640.0;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{px}" height="{:.0}" viewBox="{x0} {} {wd} {ht}">"#,
        px * ht / wd,
        -(y0 + ht)
    );
    let _ = writeln!(s, r#"<g transform="scale(1,-1)" shape-rendering="crispEdges">"#);
    for j in 0..cy {
        let mut i = 0;
        while i < cx {
            let Some(k) = pm.label(i, j) else {
                i += 1;
                continue;
            };
            let start = i;
            while i < cx && pm.label(i, j) == Some(k) {
                i += 1;
            }
            let _ = writeln!(
                s,
                r#"<rect x="{:.6}" y="{:.6}" width="{:.6}" height="{:.6}" fill="{}"/>"#,
                x0 + start as f64 * d.h,
                y0 + j as f64 * d.h,
                (i - start) as f64 * d.h,
                d.h,
                PALETTE[k % PALETTE.len()]
            );
        }
    }
    let _ = writeln!(s, "</g>");
    let stroke = 2.0 * d.h;
    let _ = writeln!(s, r#"<g transform="scale(1,-1)" fill="none" stroke="black" stroke-width="{stroke:.6}">"#);
    for chains in pm.interfaces.values() {
        for c in chains {
            let pts: Vec<String> = c.points.iter().map(|p| format!("{:.6},{:.6}", p[0], p[1])).collect();
            let tag = if c.closed { "polygon" } else { "polyline" };
            let _ = writeln!(s, r#"<{tag} points="{}"/>"#, pts.join(" "));
        }
    }
    for jr in junctions {
        let _ = writeln!(
            s,
            r#"<circle cx="{:.6}" cy="{:.6}" r="{:.6}" fill="red" stroke="none"/>"#,
            jr.location[0],
            jr.location[1],
            4.0 * d.h
        );
    }
    let _ = writeln!(s, "</g>\n</svg>");
    s
}
