//! Named scenarios. Each is a complete config in TOML; a user config passed
//! alongside a preset is layered on top of it.

use crate::error::{Error, Result};

use super::config::ExperimentConfig;

pub const TRIOD: &str = r#"
name = "triod"

[potential]
kind = "triple-well"
radius = 1.0

[domain]
shape = "disk"
n = 256

[boundary]
arcs = [
  { start = 0.0, end = 2.0943951023931957, well = 0 },
  { start = 2.0943951023931957, end = 4.1887902047863905, well = 1 },
  { start = 4.1887902047863905, end = 6.283185307179586, well = 2 },
]

[sweep]
eps = [0.16, 0.08, 0.04]
init = { kind = "radial" }

[checks]
kind = "triod"
equal_areas = true
"#;

/// Unit square; the top side carries `a_2`, the rest `a_1`. The rectangle
/// parameter runs counterclockwise from the lower-left corner, so the top
/// side is `[2, 3]`.
pub const FIGURE3A: &str = r#"
name = "figure3a"

[potential]
kind = "triple-well"
radius = 1.0

[domain]
shape = "rectangle"
min = [0.0, 0.0]
max = [1.0, 1.0]
n = 201

[boundary]
arcs = [
  { start = 0.0, end = 2.0, well = 0 },
  { start = 2.0, end = 3.0, well = 1 },
  { start = 3.0, end = 4.0, well = 0 },
]

[sweep]
eps = [0.16, 0.08, 0.04]
init = { kind = "constant", well = 0 }

[checks]
kind = "boundary-layer"
well = 0
"#;

/// Unit disk with the cap above `y = 0.7` cut off. The chord carries `a_2`;
/// in polar angle it spans `asin(0.7)..pi - asin(0.7)`.
pub const FIGURE3B: &str = r#"
name = "figure3b"

[potential]
kind = "triple-well"
radius = 1.0

[domain]
shape = "truncated-disk"
radius = 1.0
cut = 0.7
n = 256

[boundary]
arcs = [
  { start = 0.0, end = 0.775397496610753, well = 0 },
  { start = 0.775397496610753, end = 2.3661951569790403, well = 1 },
  { start = 2.3661951569790403, end = 6.283185307179586, well = 0 },
]

[sweep]
eps = [0.16, 0.08, 0.04]
init = { kind = "constant", well = 0 }

[checks]
kind = "boundary-layer"
well = 0
"#;

/// Arcs `(0, pi/2)`, `(pi/2, pi)`, `(pi, 2pi)`: the junction moves off the
/// centre to the Fermat point of the jump points.
pub const REMARK5: &str = r#"
name = "remark5"

[potential]
kind = "triple-well"
radius = 1.0

[domain]
shape = "disk"
n = 256

[boundary]
arcs = [
  { start = 0.0, end = 1.5707963267948966, well = 0 },
  { start = 1.5707963267948966, end = 3.141592653589793, well = 1 },
  { start = 3.141592653589793, end = 6.283185307179586, well = 2 },
]

[sweep]
eps = [0.16, 0.08, 0.04]
init = { kind = "radial" }

[checks]
kind = "triod"
"#;

/// No boundary data; the mass `(|B_1| / 3) sum a_i` forces equal areas.
/// Sectors start rotated so the solve has to move them.
pub const MASS_DISK: &str = r#"
name = "mass-disk"

[potential]
kind = "triple-well"
radius = 1.0

[domain]
shape = "disk"
n = 256

[sweep]
eps = [0.16, 0.08, 0.04]
init = { kind = "sectors", breaks = [0.3, 2.394395102393196, 4.48879020478639], wells = [0, 1, 2] }

[mass]
target = "equal-areas"

[checks]
kind = "equal-areas"
"#;

pub const DOUBLE_WELL: &str = r#"
name = "double-well"

[potential]
kind = "double-well"
"#;

pub const NAMES: [&str; 6] = ["triod", "figure3a", "figure3b", "remark5", "mass-disk", "double-well"];

pub fn preset_text(name: &str) -> Result<&'static str> {
    Ok(match name {
        "triod" => TRIOD,
        "figure3a" => FIGURE3A,
        "figure3b" => FIGURE3B,
        "remark5" => REMARK5,
        "mass-disk" => MASS_DISK,
        "double-well" => DOUBLE_WELL,
        other => {
            return Err(Error::Config(format!("unknown preset `{other}`; known: {}", NAMES.join(", "))));
        }
    })
}

pub fn preset(name: &str) -> Result<ExperimentConfig> {
    ExperimentConfig::from_toml(preset_text(name)?)
}

/// A preset, a user config, or a user config layered on a preset.
pub fn load(preset_name: Option<&str>, config_text: Option<&str>) -> Result<ExperimentConfig> {
    match (preset_name, config_text) {
        (Some(p), Some(c)) => ExperimentConfig::from_toml_layers(preset_text(p)?, c),
        (Some(p), None) => preset(p),
        (None, Some(c)) => ExperimentConfig::from_toml(c),
        (None, None) => Err(Error::Config("either a preset or a config file is required".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn all_presets_parse() {
        for name in NAMES {
            preset(name).unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }

    #[test]
    fn sweep_presets_resolve() {
        for name in ["triod", "figure3a", "figure3b", "remark5", "mass-disk"] {
            preset(name).unwrap().resolve().unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }

    #[test]
    fn chord_angles_match_the_cut() {
        let a = 0.7f64.asin();
        assert!((a - 0.775397496610753).abs() < 1e-14);
        assert!((PI - a - 2.3661951569790403).abs() < 1e-14);
    }

    #[test]
    fn mass_target_is_zero_for_symmetric_wells() {
        let r = preset("mass-disk").unwrap().resolve().unwrap();
        let m = r.mass_target.unwrap();
        assert!(m.iter().all(|x| x.abs() < 1e-12), "{m:?}");
    }
}
