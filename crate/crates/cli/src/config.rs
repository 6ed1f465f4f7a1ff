//! Run configuration documents.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tdras::{
    build_grid, EomOptions, IntegratorSpec, Interaction, InteractionKind, Method, Model, RasSpec, RelaxOptions,
    Scheme, Trap,
};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            x_min: -8.0,
            x_max: 8.0,
            n_points: 101,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InteractionConfig {
    pub kind: InteractionKind,
    pub lambda: f64,
}

impl Default for InteractionConfig {
    fn default() -> Self {
        Self {
            kind: InteractionKind::Contact,
            lambda: 0.0,
        }
    }
}

impl InteractionConfig {
    pub fn to_interaction(&self, lambda: f64) -> Interaction {
        Interaction { kind: self.kind, lambda }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorConfig {
    pub method: Method,
    pub dt: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_dt: f64,
    pub min_dt: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        let d = IntegratorSpec::default();
        Self {
            method: d.method,
            dt: d.dt,
            abs_tol: d.abs_tol,
            rel_tol: d.rel_tol,
            max_dt: d.max_dt,
            min_dt: d.min_dt,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RelaxConfig {
    pub tol_energy: f64,
    pub rate_window: f64,
    pub max_steps: usize,
}

impl Default for RelaxConfig {
    fn default() -> Self {
        let d = RelaxOptions::default();
        Self {
            tol_energy: d.tol_energy,
            rate_window: d.rate_window,
            max_steps: d.max_steps,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Task {
    Relax,
    Propagate {
        t_final: f64,
        sample_interval: f64,
    },
    Quench {
        lambda_new: f64,
        t_final: f64,
        sample_interval: f64,
    },
    Dims,
    Cost,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub particles: usize,
    /// Total number of orbitals `M`.
    pub orbitals: usize,
    /// Orbitals in the first block; ignored for `full`.
    #[serde(default = "one")]
    pub m1: usize,
    /// `full`, `general:<n_max>` or `even:<n_max>`.
    #[serde(default = "full")]
    pub scheme: String,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default = "unit")]
    pub trap_omega: f64,
    #[serde(default)]
    pub interaction: InteractionConfig,
    pub task: Task,
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
    /// Output directory, relative to the working directory.
    #[serde(default = "default_output")]
    pub output: PathBuf,
}

fn one() -> usize {
    1
}

fn full() -> String {
    "full".into()
}

fn unit() -> f64 {
    1.0
}

fn default_noise() -> f64 {
    1e-6
}

fn default_density_eps() -> f64 {
    EomOptions::default().density_eps
}

fn default_output() -> PathBuf {
    PathBuf::from("tdras-out")
}

fn invalid(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{field}: {msg}"))
}

/// Parses `full`, `general:<k>` or `even:<k>`.
pub fn parse_scheme(s: &str) -> Result<Scheme, String> {
    let s = s.trim();
    if s.eq_ignore_ascii_case("full") {
        return Ok(Scheme::Full);
    }
    let (kind, k) = s
        .split_once(':')
        .ok_or_else(|| format!("expected full, general:<n_max> or even:<n_max>, got {s:?}"))?;
    let k: usize = k.trim().parse().map_err(|_| format!("n_max in {s:?} is not a non-negative integer"))?;
    match kind.trim().to_ascii_lowercase().as_str() {
        "general" => Ok(Scheme::General(k)),
        "even" => Ok(Scheme::EvenOnly(k)),
        other => Err(format!("unknown scheme kind {other:?}")),
    }
}

pub fn ras_spec(particles: usize, orbitals: usize, m1: usize, scheme: &str) -> Result<RasSpec, CliError> {
    if orbitals == 0 {
        return Err(invalid("orbitals", "must be at least 1"));
    }
    let scheme = parse_scheme(scheme).map_err(|e| invalid("scheme", e))?;
    let spec = match scheme {
        Scheme::Full => RasSpec::full(particles, orbitals),
        other => {
            if m1 == 0 || m1 > orbitals {
                return Err(invalid("m1", format!("must lie in 1..={orbitals}")));
            }
            RasSpec::new(particles, m1, orbitals - m1, other)
        }
    };
    spec.map_err(|e| invalid("scheme", e))
}

fn positive(field: &str, x: f64) -> Result<(), CliError> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(invalid(field, format!("must be positive and finite, got {x}")))
    }
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_str(&text)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn from_str(text: &str) -> Result<Self, CliError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Field-level checks run before any computation.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.particles == 0 {
            return Err(invalid("particles", "must be at least 1"));
        }
        self.spec()?;
        if !(self.grid.x_min < self.grid.x_max) || !self.grid.x_min.is_finite() || !self.grid.x_max.is_finite() {
            return Err(invalid("grid", "x_min must be below x_max"));
        }
        if self.grid.n_points < 3 {
            return Err(invalid("grid.n_points", "must be at least 3"));
        }
        positive("trap_omega", self.trap_omega)?;
        if !self.interaction.lambda.is_finite() {
            return Err(invalid("interaction.lambda", "must be finite"));
        }
        self.integrator_spec()
            .validate()
            .map_err(|e| invalid("integrator", e))?;
        positive("relax.tol_energy", self.relax.tol_energy)?;
        positive("relax.rate_window", self.relax.rate_window)?;
        if !(self.noise.is_finite() && self.noise >= 0.0) {
            return Err(invalid("noise", "must be non-negative"));
        }
        positive("density_eps", self.density_eps)?;
        match &self.task {
            Task::Propagate {
                t_final,
                sample_interval,
            }
            | Task::Quench {
                t_final,
                sample_interval,
                ..
            } => {
                positive("task.t_final", *t_final)?;
                positive("task.sample_interval", *sample_interval)?;
                if sample_interval > t_final {
                    return Err(invalid("task.sample_interval", "exceeds t_final"));
                }
            }
            _ => {}
        }
        if let Task::Quench { lambda_new, .. } = &self.task {
            if !lambda_new.is_finite() {
                return Err(invalid("task.lambda_new", "must be finite"));
            }
        }
        Ok(())
    }

    pub fn spec(&self) -> Result<RasSpec, CliError> {
        ras_spec(self.particles, self.orbitals, self.m1, &self.scheme)
    }

    pub fn integrator_spec(&self) -> IntegratorSpec {
        let c = &self.integrator;
        IntegratorSpec {
            method: c.method,
            dt: c.dt,
            abs_tol: c.abs_tol,
            rel_tol: c.rel_tol,
            max_dt: c.max_dt,
            min_dt: c.min_dt,
        }
    }

    pub fn relax_options(&self) -> RelaxOptions {
        RelaxOptions {
            tol_energy: self.relax.tol_energy,
            rate_window: self.relax.rate_window,
            max_steps: self.relax.max_steps,
        }
    }

    pub fn eom_options(&self) -> EomOptions {
        EomOptions {
            density_eps: self.density_eps,
            ..EomOptions::default()
        }
    }

    pub fn model(&self) -> Result<Model, CliError> {
        let grid = build_grid(self.grid.x_min, self.grid.x_max, self.grid.n_points).map_err(|e| invalid("grid", e))?;
        Ok(Model::new(
            grid,
            Trap { omega: self.trap_omega },
            self.interaction.to_interaction(self.interaction.lambda),
        ))
    }
}
