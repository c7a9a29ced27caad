//! Declarative experiments: TOML configs and presets, the connect / sweep /
//! verify pipelines, and their on-disk outputs.
//!
//! Output directory layout after a sweep:
//!
//! - `report.json`: [`ExperimentReport`], reproducible for a fixed config and seed
//! - `timing.json`: wall-clock times
//! - `labels.pgm`, `partition.svg`: the final partition
//! - `field.csv`: snapshot of the final field
//!
//! After `connect`: `sigma_table.json` and `connection_<i>_<j>.csv`, with wells
//! numbered from 1.

pub mod config;
pub mod figures;
pub mod presets;
pub mod report;
pub mod sweep;
pub mod verify;

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use serde::Serialize;

use crate::connect1d::{ConnectionSummary, ConnectionTable};
use crate::error::Result;
use crate::partition::find_junctions;
use crate::potential::Potential;

pub use config::{CheckKind, ExperimentConfig};
pub use presets::{load, preset};
pub use report::{Check, ExperimentReport, Outcome, Timing};
pub use sweep::{run_sweep, SweepRun};
pub use verify::{run_verify, VerifyOptions, VerifyReport};

pub const REPORT_FILE: &str = "report.json";
pub const TIMING_FILE: &str = "timing.json";
pub const LABELS_FILE: &str = "labels.pgm";
pub const SVG_FILE: &str = "partition.svg";
pub const SNAPSHOT_FILE: &str = "field.csv";
pub const SIGMA_FILE: &str = "sigma_table.json";

pub struct ConnectRun {
    pub potential: Potential,
    pub table: ConnectionTable,
}

impl ConnectRun {
    pub fn summaries(&self) -> Vec<ConnectionSummary> {
        self.table.profiles().iter().map(|c| c.summary(&self.potential)).collect()
    }
}

pub fn run_connect(cfg: &ExperimentConfig) -> Result<ConnectRun> {
    let potential = cfg.potential.build()?;
    let table = ConnectionTable::solve(&potential, cfg.connection.half_length, cfg.connection.nodes)?;
    Ok(ConnectRun { potential, table })
}

#[derive(Serialize)]
struct SigmaTable {
    wells: Vec<Vec<f64>>,
    /// Keyed `"i,j"` with wells numbered from 1.
    sigma: BTreeMap<String, f64>,
    connections: Vec<ConnectionSummary>,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn write_connect(run: &ConnectRun, dir: &Path) -> Result<Vec<String>> {
    fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    let mut sigma = BTreeMap::new();
    for c in run.table.profiles() {
        let (i, j) = (c.endpoints.0 + 1, c.endpoints.1 + 1);
        let name = format!("connection_{i}_{j}.csv");
        c.write_csv(BufWriter::new(File::create(dir.join(&name))?))?;
        files.push(name);
        sigma.insert(format!("{i},{j}"), c.action);
    }
    let table = SigmaTable { wells: run.potential.wells().to_vec(), sigma, connections: run.summaries() };
    write_json(&dir.join(SIGMA_FILE), &table)?;
    files.push(SIGMA_FILE.into());
    Ok(files)
}

/// Writes figures, the snapshot, `timing.json` and finally `report.json`,
/// whose `figures` list names the figure files written.
pub fn write_sweep(run: &mut SweepRun, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let pm = &run.partition;
    figures::write_label_pgm(pm, BufWriter::new(File::create(dir.join(LABELS_FILE))?))?;
    fs::write(dir.join(SVG_FILE), figures::render_svg(pm, &find_junctions(pm)))?;
    run.report.figures = vec![LABELS_FILE.into(), SVG_FILE.into()];
    if run.report.config.output.snapshot {
        run.final_step().field.write_snapshot(BufWriter::new(File::create(dir.join(SNAPSHOT_FILE))?))?;
    }
    write_json(&dir.join(TIMING_FILE), &run.timing)?;
    write_json(&dir.join(REPORT_FILE), &run.report)
}

pub fn read_report(dir: &Path) -> Result<ExperimentReport> {
    let text = fs::read_to_string(dir.join(REPORT_FILE))?;
    Ok(serde_json::from_str(&text)?)
}
