//! Single runs described by a [`RunConfig`].

use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use tdras::fock::{cost_delta, operation_count_mctdhb, operation_count_ras};
use tdras::observables::{analytic_breathing_frequency, breathing_frequency, density_profile};
use tdras::propagator::{run_protocol, ProtocolOutput};
use tdras::{dim_fci, dim_ras, Protocol, ProtocolKind, RasEquations, RasSpec, RunFlags, Scheme};

use crate::config::{RunConfig, Task};
use crate::output::{density_csv, series_csv, write_json};
use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunSummary {
    pub task: String,
    pub particles: usize,
    pub orbitals: usize,
    pub m1: usize,
    pub scheme: String,
    pub dim: u64,
    pub dim_fci: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energy: Option<f64>,
    /// Ground-state energy before the quench.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relaxed_energy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relax_converged: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub natural_occupations_percent: Option<Vec<f64>>,
    /// Dominant angular frequency of `rho(0, t)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub breathing_frequency: Option<f64>,
    /// `2 sqrt(omega^2 + 2 N lambda_new)`, exact for the harmonic interaction.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analytic_breathing_frequency: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub operation_count_mctdhb: Option<i128>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub operation_count_ras: Option<i128>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cost_delta: Option<i128>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flags: Option<RunFlags>,
    pub wall_time_s: f64,
}

pub fn scheme_label(spec: &RasSpec) -> String {
    match spec.scheme {
        _ if spec.is_full() => "full".into(),
        Scheme::General(k) => format!("general:{k}"),
        Scheme::EvenOnly(k) => format!("even:{k}"),
        Scheme::Full => "full".into(),
    }
}

fn task_name(task: &Task) -> &'static str {
    match task {
        Task::Relax => "relax",
        Task::Propagate { .. } => "propagate",
        Task::Quench { .. } => "quench",
        Task::Dims => "dims",
        Task::Cost => "cost",
    }
}

/// Runs `cfg` and writes `summary.json` (plus `series.csv` and `density.csv` for
/// dynamical tasks) into `out_dir`.
pub fn execute(cfg: &RunConfig, out_dir: &Path) -> Result<RunSummary, CliError> {
    let start = Instant::now();
    let spec = cfg.spec()?;
    let n_orbitals = spec.n_orbitals();
    let mut summary = RunSummary {
        task: task_name(&cfg.task).into(),
        particles: spec.n_particles,
        orbitals: n_orbitals,
        m1: spec.m1,
        scheme: scheme_label(&spec),
        dim: dim_ras(&spec)?,
        dim_fci: dim_fci(spec.n_particles, n_orbitals)?,
        energy: None,
        relaxed_energy: None,
        relax_converged: None,
        rho0: None,
        natural_occupations_percent: None,
        breathing_frequency: None,
        analytic_breathing_frequency: None,
        operation_count_mctdhb: None,
        operation_count_ras: None,
        cost_delta: None,
        flags: None,
        wall_time_s: 0.0,
    };
    fs::create_dir_all(out_dir)?;

    let protocol = match &cfg.task {
        Task::Dims => None,
        Task::Cost => {
            let n_grid = cfg.grid.n_points;
            summary.operation_count_mctdhb = Some(operation_count_mctdhb(spec.n_particles, n_orbitals, n_grid)?);
            summary.operation_count_ras = Some(operation_count_ras(&spec, n_grid)?);
            summary.cost_delta = Some(if spec.is_full() {
                0
            } else {
                cost_delta(spec.n_particles, spec.m1, spec.m2, spec.scheme, n_grid)?
            });
            None
        }
        Task::Relax => Some(Protocol {
            kind: ProtocolKind::Relax,
            t_final: 0.0,
            sample_interval: 0.0,
            quench: None,
            noise: cfg.noise,
            seed: cfg.seed,
        }),
        Task::Propagate {
            t_final,
            sample_interval,
        } => Some(Protocol {
            kind: ProtocolKind::Propagate,
            t_final: *t_final,
            sample_interval: *sample_interval,
            quench: None,
            noise: cfg.noise,
            seed: cfg.seed,
        }),
        Task::Quench {
            lambda_new,
            t_final,
            sample_interval,
        } => Some(Protocol {
            noise: cfg.noise,
            seed: cfg.seed,
            ..Protocol::quench(cfg.interaction.to_interaction(*lambda_new), *t_final, *sample_interval)
        }),
    };

    if let Some(protocol) = protocol {
        let model = cfg.model()?;
        let eq = RasEquations::new(spec, cfg.eom_options())?;
        let out = run_protocol(&protocol, &model, &eq, cfg.integrator_spec(), &cfg.relax_options())?;
        fill_dynamics(&mut summary, &out, &eq, &model, out_dir)?;
        if let Task::Quench { lambda_new, .. } = cfg.task {
            let times: Vec<f64> = out.records.iter().map(|r| r.t).collect();
            let rho0: Vec<f64> = out.records.iter().map(|r| r.rho0).collect();
            summary.breathing_frequency = breathing_frequency(&times, &rho0).ok();
            summary.analytic_breathing_frequency = Some(analytic_breathing_frequency(
                1,
                spec.n_particles,
                lambda_new,
                cfg.trap_omega,
            ));
        }
    }
    summary.wall_time_s = start.elapsed().as_secs_f64();
    write_json(&out_dir.join("summary.json"), &summary)?;
    Ok(summary)
}

fn fill_dynamics(
    summary: &mut RunSummary,
    out: &ProtocolOutput,
    eq: &RasEquations,
    model: &tdras::Model,
    out_dir: &Path,
) -> Result<(), CliError> {
    let n = eq.spec().n_particles as f64;
    let last = out
        .records
        .last()
        .ok_or_else(|| CliError::Run {
            reason: "no records produced".into(),
            last_good_time: None,
        })?;
    summary.energy = Some(last.energy);
    summary.rho0 = Some(last.rho0);
    summary.natural_occupations_percent = Some(last.natural_occupations.iter().map(|x| 100.0 * x / n).collect());
    summary.relaxed_energy = out.relaxed_energy;
    summary.relax_converged = out.relax_converged;
    summary.flags = Some(out.flags);
    let dens = eq.tables().densities(&out.final_state.coefficients)?;
    let profile = density_profile(&out.final_state, &dens.rho1);
    fs::write(out_dir.join("series.csv"), series_csv(&out.records, eq.spec().n_orbitals()))?;
    fs::write(out_dir.join("density.csv"), density_csv(model.grid().points(), &profile))?;
    Ok(())
}

pub fn run_file(config: &Path, out_override: Option<&Path>) -> Result<RunSummary, CliError> {
    let cfg = RunConfig::from_path(config)?;
    let out = out_override.map(Path::to_path_buf).unwrap_or_else(|| cfg.output.clone());
    execute(&cfg, &out)
}
