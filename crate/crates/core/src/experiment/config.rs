use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field2d::{check_eps_list, ArcSpec, BoundaryArc, Domain2D, InitialCondition, SolverOptions, DEFAULT_TRANSITION};
use crate::potential::{build_double_well, build_from_wells, build_triple_well, Potential};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub potential: PotentialSpec,
    #[serde(default)]
    pub connection: ConnectionSpec,
    #[serde(default)]
    pub domain: Option<DomainSpec>,
    #[serde(default)]
    pub boundary: Option<BoundarySpec>,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub mass: Option<MassSpec>,
    #[serde(default)]
    pub checks: ChecksSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PotentialName {
    DoubleWell,
    TripleWell,
    Custom,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    pub kind: PotentialName,
    #[serde(default)]
    pub radius: Option<f64>,
    #[serde(default)]
    pub wells: Option<Vec<Vec<f64>>>,
}

impl PotentialSpec {
    pub fn build(&self) -> Result<Potential> {
        let p = match self.kind {
            PotentialName::DoubleWell => build_double_well(),
            PotentialName::TripleWell => build_triple_well(self.radius.unwrap_or(1.0))?,
            PotentialName::Custom => {
                let wells = self.wells.clone().ok_or_else(|| Error::Config("custom potential needs `wells`".into()))?;
                build_from_wells(wells)?
            }
        };
        Ok(p)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConnectionSpec {
    pub half_length: f64,
    pub nodes: usize,
    /// Lattice size of the distance-function table used by the coarea estimator.
    pub phi_lattice: usize,
}

impl Default for ConnectionSpec {
    fn default() -> Self {
        ConnectionSpec { half_length: 10.0, nodes: 2000, phi_lattice: 401 }
    }
}

fn origin() -> [f64; 2] {
    [0.0, 0.0]
}

fn unit() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DomainSpec {
    Disk {
        #[serde(default = "origin")]
        center: [f64; 2],
        #[serde(default = "unit")]
        radius: f64,
        n: usize,
    },
    Rectangle {
        min: [f64; 2],
        max: [f64; 2],
        n: usize,
    },
    TruncatedDisk {
        #[serde(default = "origin")]
        center: [f64; 2],
        #[serde(default = "unit")]
        radius: f64,
        cut: f64,
        n: usize,
    },
}

impl DomainSpec {
    pub fn build(&self) -> Result<Domain2D> {
        match *self {
            DomainSpec::Disk { center, radius, n } => Domain2D::disk(center, radius, n),
            DomainSpec::Rectangle { min, max, n } => Domain2D::rectangle(min, max, n),
            DomainSpec::TruncatedDisk { center, radius, cut, n } => Domain2D::truncated_disk(center, radius, cut, n),
        }
    }
}

fn default_transition() -> f64 {
    DEFAULT_TRANSITION
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundarySpec {
    pub arcs: Vec<BoundaryArc>,
    #[serde(default = "default_transition")]
    pub transition: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub eps: Vec<f64>,
    pub init: InitialCondition,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSpec {
    pub tol: Option<f64>,
    pub max_iter: usize,
    pub accelerate: bool,
    pub stall_window: usize,
    pub stall_rel: f64,
    pub seed: u64,
}

impl Default for SolverSpec {
    fn default() -> Self {
        let o = SolverOptions::default();
        SolverSpec {
            tol: o.tol,
            max_iter: o.max_iter,
            accelerate: o.accelerate,
            stall_window: o.stall_window,
            stall_rel: o.stall_rel,
            seed: 0,
        }
    }
}

impl SolverSpec {
    pub fn options(&self) -> SolverOptions {
        SolverOptions {
            tol: self.tol,
            max_iter: self.max_iter,
            accelerate: self.accelerate,
            stall_window: self.stall_window,
            stall_rel: self.stall_rel,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MassTarget {
    /// `"equal-areas"`: `|Omega| / N` times the sum of the wells.
    Named(String),
    Vector(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MassSpec {
    pub target: MassTarget,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    #[default]
    None,
    /// Three boundary jumps on a disk: compare against the Steiner triod.
    Triod,
    /// The minimizer should relax to a single well with a boundary layer.
    BoundaryLayer,
    /// Mass-constrained partition into equal areas.
    EqualAreas,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChecksSpec {
    pub kind: CheckKind,
    /// Also require equal phase areas (symmetric triod).
    pub equal_areas: bool,
    /// Well the boundary-layer minimizer relaxes to.
    pub well: usize,
}

impl Default for ChecksSpec {
    fn default() -> Self {
        ChecksSpec { kind: CheckKind::None, equal_areas: false, well: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: Option<String>,
    /// Write the final field as a CSV snapshot.
    pub snapshot: bool,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec { dir: None, snapshot: true }
    }
}

/// Everything a sweep needs, built and validated from a config.
pub struct Resolved {
    pub potential: Potential,
    pub domain: Arc<Domain2D>,
    pub arcs: Option<ArcSpec>,
    pub transition: f64,
    pub eps: Vec<f64>,
    pub init: InitialCondition,
    pub mass_target: Option<Vec<f64>>,
    pub solver: SolverOptions,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Parses `overlay` on top of `base`; tables merge key by key.
    pub fn from_toml_layers(base: &str, overlay: &str) -> Result<Self> {
        let parse = |s: &str| s.parse::<toml::Table>().map_err(|e| Error::Config(e.to_string()));
        let mut merged = parse(base)?;
        merge(&mut merged, parse(overlay)?);
        toml::Value::Table(merged).try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Replaces the random-initialization seed.
    pub fn set_seed(&mut self, seed: u64) {
        self.solver.seed = seed;
        if let Some(SweepSpec { init: InitialCondition::Random { seed: s, .. }, .. }) = &mut self.sweep {
            *s = seed;
        }
    }

    pub fn resolve(&self) -> Result<Resolved> {
        let potential = self.potential.build()?;
        let domain = Arc::new(
            self.domain
                .as_ref()
                .ok_or_else(|| Error::Config("missing [domain] section".into()))?
                .build()?,
        );
        let sweep = self.sweep.as_ref().ok_or_else(|| Error::Config("missing [sweep] section".into()))?;
        check_eps_list(&sweep.eps, domain.h)?;
        let (arcs, transition) = match &self.boundary {
            Some(b) => {
                let spec = ArcSpec::new(b.arcs.clone());
                spec.validate(domain.param_range(), potential.num_wells())?;
                (Some(spec), b.transition)
            }
            None => (None, DEFAULT_TRANSITION),
        };
        let mass_target = match &self.mass {
            None => None,
            Some(MassSpec { target: MassTarget::Vector(v) }) => Some(v.clone()),
            Some(MassSpec { target: MassTarget::Named(name) }) if name == "equal-areas" => {
                let n = potential.num_wells() as f64;
                let area = domain.area();
                Some((0..potential.dim()).map(|c| potential.wells().iter().map(|a| a[c]).sum::<f64>() * area / n).collect())
            }
            Some(MassSpec { target: MassTarget::Named(name) }) => {
                return Err(Error::Config(format!("unknown mass target `{name}`")));
            }
        };
        if mass_target.is_some() && arcs.is_some() {
            return Err(Error::Config("mass constraint is only supported without boundary data".into()));
        }
        let init = match &sweep.init {
            InitialCondition::Random { cells, .. } => InitialCondition::Random { seed: self.solver.seed, cells: *cells },
            other => other.clone(),
        };
        Ok(Resolved {
            potential,
            domain,
            arcs,
            transition,
            eps: sweep.eps.clone(),
            init,
            mass_target,
            solver: self.solver.options(),
        })
    }
}

fn merge(base: &mut toml::Table, overlay: toml::Table) {
    for (k, v) in overlay {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_kind_is_a_config_error() {
        let err = ExperimentConfig::from_toml("[potential]\nradius = 1.0\n").unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(ExperimentConfig::from_toml("[potential]\nkind = \"double-well\"\nfoo = 1\n").is_err());
    }

    #[test]
    fn layers_merge_tables() {
        let base = "[potential]\nkind = \"triple-well\"\n[domain]\nshape = \"disk\"\nn = 128\n";
        let over = "[domain]\nn = 64\n";
        let c = ExperimentConfig::from_toml_layers(base, over).unwrap();
        assert_eq!(c.domain, Some(DomainSpec::Disk { center: [0.0, 0.0], radius: 1.0, n: 64 }));
    }
}
