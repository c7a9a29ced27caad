use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::field2d::StopReason;
use crate::partition::{LimitEnergy, TriodReference};

use super::config::ExperimentConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Pass,
    CheckFailure,
    ConfigError,
    NonConvergence,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Pass => 0,
            Outcome::CheckFailure => 1,
            Outcome::ConfigError => 2,
            Outcome::NonConvergence => 3,
        }
    }

    pub fn from_error(e: &Error) -> Self {
        match e {
            Error::NoConvergence { .. } => Outcome::NonConvergence,
            _ => Outcome::ConfigError,
        }
    }
}

/// One acceptance check. `relation` reads `measured <relation> tolerance`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub relation: String,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: &str, measured: f64, tolerance: f64) -> Self {
        Check { name: name.into(), measured, relation: "<=".into(), tolerance, passed: measured <= tolerance }
    }

    pub fn below(name: &str, measured: f64, tolerance: f64) -> Self {
        Check { name: name.into(), measured, relation: "<".into(), tolerance, passed: measured < tolerance }
    }

    pub fn equals(name: &str, measured: f64, expected: f64) -> Self {
        Check { name: name.into(), measured, relation: "==".into(), tolerance: expected, passed: measured == expected }
    }

    /// Pass/fail property reported as `1` (holds) against `1`.
    pub fn holds(name: &str, ok: bool) -> Self {
        Check::equals(name, if ok { 1.0 } else { 0.0 }, 1.0)
    }

    pub fn line(&self) -> String {
        format!(
            "{} {}: measured {:.6e} {} {:.6e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            self.relation,
            self.tolerance
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SigmaEntry {
    pub i: usize,
    pub j: usize,
    pub sigma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepSummary {
    pub eps: f64,
    pub energy: f64,
    pub final_residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub stop_reason: StopReason,
    pub monotone: bool,
    pub max_sup_norm: f64,
    pub max_mass_violation: Option<f64>,
    pub restarts: usize,
    pub l1_to_previous: Option<f64>,
    pub energy_trace: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairLength {
    pub i: usize,
    pub j: usize,
    pub length: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JunctionSummary {
    pub x: f64,
    pub y: f64,
    /// Sector angles in radians, one per entry of `phases`.
    pub angles: [f64; 3],
    pub phases: [usize; 3],
    pub young_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionSummary {
    pub areas: Vec<f64>,
    pub lengths: Vec<PairLength>,
    pub total_length: f64,
    pub junctions: Vec<JunctionSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergySummary {
    /// Discrete energy at the smallest eps.
    pub final_energy: f64,
    pub coarea: f64,
    pub coarea_half_sum: f64,
    /// `sum sigma_ij * length_ij` over the contour interfaces.
    pub contour: f64,
    pub interior: f64,
    pub boundary: f64,
    pub total: f64,
    pub reference: Option<f64>,
}

impl EnergySummary {
    pub fn limit(&self) -> LimitEnergy {
        LimitEnergy { interior: self.interior, boundary: self.boundary, total: self.total }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Competitor {
    pub name: String,
    pub total: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub config: ExperimentConfig,
    pub h: f64,
    pub bound_m: f64,
    pub sigma: Vec<SigmaEntry>,
    pub steps: Vec<StepSummary>,
    pub partition: PartitionSummary,
    pub energies: EnergySummary,
    pub triod_reference: Option<TriodReference>,
    pub competitors: Vec<Competitor>,
    pub checks: Vec<Check>,
    pub figures: Vec<String>,
    pub outcome: Outcome,
}

impl ExperimentReport {
    pub fn passed(&self) -> bool {
        self.outcome == Outcome::Pass
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn summary(&self) -> String {
        let mut s = format!("{} (h = {:.5})\n", self.name, self.h);
        for st in &self.steps {
            s += &format!(
                "  eps {:<6} J {:.6} residual {:.2e} iterations {:>6} {:?}\n",
                st.eps, st.energy, st.final_residual, st.iterations, st.stop_reason
            );
        }
        let e = &self.energies;
        s += &format!(
            "  limiting energy {:.5} (interior {:.5}, boundary {:.5}); coarea {:.5}\n",
            e.total, e.interior, e.boundary, e.coarea
        );
        if let Some(r) = e.reference {
            s += &format!("  reference {r:.5}\n");
        }
        for j in &self.partition.junctions {
            let deg = j.angles.map(f64::to_degrees);
            s += &format!(
                "  junction ({:.5}, {:.5}) angles {:.2} {:.2} {:.2}\n",
                j.x, j.y, deg[0], deg[1], deg[2]
            );
        }
        for c in &self.checks {
            s += &format!("  {}\n", c.line());
        }
        s += &format!("  outcome: {:?}\n", self.outcome);
        s
    }
}

/// Wall-clock times, kept out of the report so that it stays reproducible.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Timing {
    pub connections: f64,
    pub steps: Vec<(f64, f64)>,
    pub measurement: f64,
}
