//! Ground-state tables: one relaxation per cell, cells run in parallel.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tdras::propagator::{initial_guess, relax};
use tdras::{dim_ras, RasEquations, RunFlags};

use crate::config::{ras_spec, GridConfig, IntegratorConfig, InteractionConfig, RelaxConfig, RunConfig, Task};
use crate::output::{float, write_json};
use crate::run::scheme_label;
use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cell {
    pub label: String,
    pub orbitals: usize,
    #[serde(default = "one")]
    pub m1: usize,
    #[serde(default = "full")]
    pub scheme: String,
}

fn one() -> usize {
    1
}

fn full() -> String {
    "full".into()
}

/// Settings shared by every cell, with the same defaults as a run configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableConfig {
    pub particles: usize,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default = "unit")]
    pub trap_omega: f64,
    #[serde(default)]
    pub interaction: InteractionConfig,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub relax: RelaxConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_noise")]
    pub noise: f64,
    #[serde(default = "default_density_eps")]
    pub density_eps: f64,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    #[serde(default)]
    pub cells: Vec<Cell>,
}

fn unit() -> f64 {
    1.0
}

fn default_noise() -> f64 {
    1e-6
}

fn default_density_eps() -> f64 {
    tdras::EomOptions::default().density_eps
}

fn default_output() -> PathBuf {
    PathBuf::from("tdras-table")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub label: String,
    pub orbitals: usize,
    pub m1: usize,
    pub scheme: String,
    pub dim: Option<u64>,
    pub energy: Option<f64>,
    pub converged: Option<bool>,
    pub flags: Option<RunFlags>,
    /// `ok` or the error that stopped this cell.
    pub status: String,
}

impl TableConfig {
    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let cfg: Self = serde_json::from_str(&text).map_err(|e| CliError::Config(e.to_string()))?;
        // Shared fields are validated through a run configuration with a single orbital.
        cfg.cell_config(&Cell {
            label: String::new(),
            orbitals: 1,
            m1: 1,
            scheme: "full".into(),
        })
        .validate()?;
        Ok(cfg)
    }

    fn cell_config(&self, cell: &Cell) -> RunConfig {
        RunConfig {
            particles: self.particles,
            orbitals: cell.orbitals,
            m1: cell.m1,
            scheme: cell.scheme.clone(),
            grid: self.grid.clone(),
            trap_omega: self.trap_omega,
            interaction: self.interaction.clone(),
            task: Task::Relax,
            integrator: self.integrator.clone(),
            relax: self.relax.clone(),
            seed: self.seed,
            noise: self.noise,
            density_eps: self.density_eps,
            output: self.output.clone(),
        }
    }

    fn run_cell(&self, cell: &Cell) -> Row {
        let mut row = Row {
            label: cell.label.clone(),
            orbitals: cell.orbitals,
            m1: cell.m1,
            scheme: cell.scheme.clone(),
            dim: None,
            energy: None,
            converged: None,
            flags: None,
            status: "ok".into(),
        };
        let cfg = self.cell_config(cell);
        let result = (|| -> Result<(), CliError> {
            cfg.validate()?;
            let spec = ras_spec(self.particles, cell.orbitals, cell.m1, &cell.scheme)?;
            row.scheme = scheme_label(&spec);
            row.m1 = spec.m1;
            row.dim = Some(dim_ras(&spec)?);
            let model = cfg.model()?;
            let eq = RasEquations::new(spec, cfg.eom_options())?;
            let init = initial_guess(&eq, &model, cfg.noise, cfg.seed)?;
            let out = relax(init, &model, &eq, cfg.integrator_spec(), &cfg.relax_options())?;
            row.energy = Some(out.energy);
            row.converged = Some(out.converged);
            row.flags = Some(out.flags);
            Ok(())
        })();
        if let Err(e) = result {
            row.status = e.to_string();
        }
        row
    }

    /// Relaxes every cell; rows keep the order of `cells`.
    pub fn run(&self) -> Vec<Row> {
        self.cells.par_iter().map(|c| self.run_cell(c)).collect()
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// `label,orbitals,m1,scheme,dim,energy,converged,status`.
pub fn table_csv(rows: &[Row]) -> String {
    let mut s = String::from("label,orbitals,m1,scheme,dim,energy,converged,status\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            csv_field(&r.label),
            r.orbitals,
            r.m1,
            r.scheme,
            r.dim.map(|d| d.to_string()).unwrap_or_default(),
            r.energy.map(float).unwrap_or_default(),
            r.converged.map(|c| c.to_string()).unwrap_or_default(),
            csv_field(&r.status),
        );
    }
    s
}

pub fn tables_file(config: &Path, out_override: Option<&Path>) -> Result<Vec<Row>, CliError> {
    let cfg = TableConfig::from_path(config)?;
    let out = out_override.map(Path::to_path_buf).unwrap_or_else(|| cfg.output.clone());
    let rows = cfg.run();
    fs::create_dir_all(&out)?;
    fs::write(out.join("table.csv"), table_csv(&rows))?;
    write_json(&out.join("table.json"), &rows)?;
    Ok(rows)
}
