//! Time integration in real and imaginary time, and the relax / quench protocols.

use std::collections::VecDeque;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dvr::{orthonormalize, trap_eigenstates, Interaction, OrbitalSet};
use crate::eom::{DerivativeDiagnostics, Model, RasEquations, TimeMode, WavefunctionState};
use crate::error::{Error, Result};
use crate::observables::{energy, record, ObservableRecord};
use crate::secondq::CoefficientVector;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Rk4,
    Rk45,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorSpec {
    pub method: Method,
    /// Initial step for RK45, fixed step for RK4.
    pub dt: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Upper bound on adaptive steps.
    pub max_dt: f64,
    /// Smallest admissible step before the run is declared failed.
    pub min_dt: f64,
}

impl Default for IntegratorSpec {
    fn default() -> Self {
        Self {
            method: Method::Rk45,
            dt: 1e-3,
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_dt: 0.1,
            min_dt: 1e-12,
        }
    }
}

impl IntegratorSpec {
    pub fn rk4(dt: f64) -> Self {
        Self {
            method: Method::Rk4,
            dt,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.dt > 0.0 && self.abs_tol > 0.0 && self.rel_tol > 0.0 && self.max_dt >= self.dt;
        if !ok || !self.min_dt.is_finite() || self.min_dt <= 0.0 {
            return Err(Error::InvalidArgument(format!("invalid integrator settings {self:?}")));
        }
        Ok(())
    }
}

/// Events accumulated over a run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunFlags {
    pub steps: usize,
    pub rejected_steps: usize,
    /// Derivative evaluations whose cross-block system needed a Tikhonov shift.
    pub regularized_solves: usize,
    pub max_eta_residual: f64,
    /// Imaginary-time steps whose energy rose by more than one part in `1e8`.
    pub non_monotone_steps: usize,
}

impl RunFlags {
    fn absorb(&mut self, d: &DerivativeDiagnostics) {
        if d.regularized_solve {
            self.regularized_solves += 1;
        }
        self.max_eta_residual = self.max_eta_residual.max(d.eta_residual);
    }

    pub fn merge(&mut self, other: &RunFlags) {
        self.steps += other.steps;
        self.rejected_steps += other.rejected_steps;
        self.regularized_solves += other.regularized_solves;
        self.max_eta_residual = self.max_eta_residual.max(other.max_eta_residual);
        self.non_monotone_steps += other.non_monotone_steps;
    }
}

/// Orbitals (column-major) followed by amplitudes.
fn pack(orbitals: &DMatrix<C64>, c: &[C64]) -> Vec<C64> {
    let mut y = Vec::with_capacity(orbitals.len() + c.len());
    y.extend_from_slice(orbitals.as_slice());
    y.extend_from_slice(c);
    y
}

fn unpack(y: &[C64], n_points: usize, m: usize, time: f64) -> WavefunctionState {
    let split = n_points * m;
    WavefunctionState {
        orbitals: OrbitalSet::new(DMatrix::from_column_slice(n_points, m, &y[..split])),
        coefficients: CoefficientVector::new(y[split..].to_vec()),
        time,
    }
}

fn axpy_into(out: &mut [C64], y: &[C64], terms: &[(f64, &[C64])], h: f64) {
    out.copy_from_slice(y);
    for (b, k) in terms {
        if *b == 0.0 {
            continue;
        }
        let f = h * b;
        for (o, x) in out.iter_mut().zip(k.iter()) {
            *o += x * f;
        }
    }
}

// Dormand-Prince 5(4) tableau
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
// fifth-order weights minus fourth-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates one state with a fixed set of equations and Hamiltonian.
pub struct Propagator<'a> {
    eq: &'a RasEquations,
    model: &'a Model,
    spec: IntegratorSpec,
    mode: TimeMode,
    dt: f64,
    fsal: Option<Vec<C64>>,
    flags: RunFlags,
}

impl<'a> Propagator<'a> {
    pub fn new(eq: &'a RasEquations, model: &'a Model, spec: IntegratorSpec, mode: TimeMode) -> Result<Self> {
        spec.validate()?;
        Ok(Self {
            eq,
            model,
            spec,
            mode,
            dt: spec.dt,
            fsal: None,
            flags: RunFlags::default(),
        })
    }

    pub fn flags(&self) -> &RunFlags {
        &self.flags
    }

    /// Step size proposed for the next step.
    pub fn current_dt(&self) -> f64 {
        self.dt
    }

    fn derivative(&mut self, y: &[C64], n_points: usize, m: usize, time: f64) -> Result<Vec<C64>> {
        let st = unpack(y, n_points, m, time);
        let (d, diag) = self.eq.state_derivative(&st, self.model, self.mode)?;
        self.flags.absorb(&diag);
        let out = pack(&d.orbital_dot, &d.c_dot);
        if out.iter().any(|x| !x.re.is_finite() || !x.im.is_finite()) {
            return Err(Error::PropagationFailure {
                time,
                reason: "non-finite derivative".into(),
            });
        }
        Ok(out)
    }

    /// Advances `state` by one accepted step no longer than `max_step`; returns the step taken.
    pub fn step(&mut self, state: &mut WavefunctionState, max_step: Option<f64>) -> Result<f64> {
        let h = match max_step {
            Some(cap) if cap < self.dt => cap,
            _ => self.dt,
        };
        let taken = match self.spec.method {
            Method::Rk4 => self.rk4(state, h)?,
            Method::Rk45 => self.rk45(state, h)?,
        };
        if self.mode == TimeMode::Imaginary {
            state.coefficients.normalize()?;
            state.orbitals = orthonormalize(&state.orbitals, self.model.grid())?;
            self.fsal = None;
        }
        self.flags.steps += 1;
        Ok(taken)
    }

    fn rk4(&mut self, state: &mut WavefunctionState, h: f64) -> Result<f64> {
        let (n, m) = (state.orbitals.n_points(), state.orbitals.n_orbitals());
        let t = state.time;
        let y = pack(state.orbitals.values(), &state.coefficients);
        let mut tmp = vec![C64::new(0.0, 0.0); y.len()];
        let k1 = self.derivative(&y, n, m, t)?;
        axpy_into(&mut tmp, &y, &[(0.5, &k1)], h);
        let k2 = self.derivative(&tmp, n, m, t + 0.5 * h)?;
        axpy_into(&mut tmp, &y, &[(0.5, &k2)], h);
        let k3 = self.derivative(&tmp, n, m, t + 0.5 * h)?;
        axpy_into(&mut tmp, &y, &[(1.0, &k3)], h);
        let k4 = self.derivative(&tmp, n, m, t + h)?;
        axpy_into(
            &mut tmp,
            &y,
            &[(1.0 / 6.0, &k1), (1.0 / 3.0, &k2), (1.0 / 3.0, &k3), (1.0 / 6.0, &k4)],
            h,
        );
        *state = unpack(&tmp, n, m, t + h);
        Ok(h)
    }

    fn rk45(&mut self, state: &mut WavefunctionState, mut h: f64) -> Result<f64> {
        let (n, m) = (state.orbitals.n_points(), state.orbitals.n_orbitals());
        let t = state.time;
        let y = pack(state.orbitals.values(), &state.coefficients);
        let k1 = match self.fsal.take() {
            Some(k) => k,
            None => self.derivative(&y, n, m, t)?,
        };
        let mut tmp = vec![C64::new(0.0, 0.0); y.len()];
        loop {
            if h < self.spec.min_dt {
                return Err(Error::PropagationFailure {
                    time: t,
                    reason: format!("step size {h:e} fell below {:e}", self.spec.min_dt),
                });
            }
            let mut ks: Vec<Vec<C64>> = vec![k1.clone()];
            for s in 0..6 {
                let terms: Vec<(f64, &[C64])> = (0..=s).map(|j| (A[s][j], ks[j].as_slice())).collect();
                axpy_into(&mut tmp, &y, &terms, h);
                let k = self.derivative(&tmp, n, m, t + C[s] * h)?;
                ks.push(k);
            }
            // tmp holds the fifth-order solution, evaluated at stage 7
            let mut acc = 0.0;
            for i in 0..y.len() {
                let mut e = C64::new(0.0, 0.0);
                for (j, k) in ks.iter().enumerate() {
                    if E[j] != 0.0 {
                        e += k[i] * E[j];
                    }
                }
                let scale = self.spec.abs_tol + self.spec.rel_tol * y[i].norm().max(tmp[i].norm());
                acc = f64::max(acc, e.norm() * h / scale);
            }
            let err = acc;
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if err <= 1.0 {
                *state = unpack(&tmp, n, m, t + h);
                self.dt = (h * factor).min(self.spec.max_dt);
                self.fsal = ks.pop();
                return Ok(h);
            }
            self.flags.rejected_steps += 1;
            h *= factor.min(1.0);
            self.dt = h;
        }
    }
}

/// Lowest `M` trap eigenfunctions with all particles in the first orbital and uniform noise
/// of amplitude `noise` on every other configuration.
pub fn initial_guess(eq: &RasEquations, model: &Model, noise: f64, seed: u64) -> Result<WavefunctionState> {
    let m = eq.spec().n_orbitals();
    let (orbitals, _) = trap_eigenstates(model.grid(), model.trap(), m)?;
    let space = eq.tables().space();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = CoefficientVector::zeros(space.dim());
    let n = eq.spec().n_particles as u32;
    for (pos, cfg) in space.configs().enumerate() {
        c[pos] = if cfg[0] == n {
            C64::new(1.0, 0.0)
        } else {
            C64::new(noise * rng.gen_range(-1.0..=1.0), 0.0)
        };
    }
    c.normalize()?;
    Ok(WavefunctionState {
        orbitals,
        coefficients: c,
        time: 0.0,
    })
}

#[derive(Clone, Debug)]
pub struct RelaxOptions {
    pub tol_energy: f64,
    /// Imaginary-time span over which the energy rate is measured.
    pub rate_window: f64,
    pub max_steps: usize,
}

impl Default for RelaxOptions {
    fn default() -> Self {
        Self {
            tol_energy: 1e-10,
            rate_window: 0.5,
            max_steps: 200_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RelaxOutcome {
    pub state: WavefunctionState,
    /// `(tau, E)` after every accepted step, starting with the initial state.
    pub energy_trace: Vec<(f64, f64)>,
    pub energy: f64,
    pub converged: bool,
    pub flags: RunFlags,
}

/// Imaginary-time propagation until `|E(tau) - E(tau - w)| / w < tol_energy`,
/// with `w` at least `rate_window`.
pub fn relax(
    initial: WavefunctionState,
    model: &Model,
    eq: &RasEquations,
    integrator: IntegratorSpec,
    opts: &RelaxOptions,
) -> Result<RelaxOutcome> {
    let mut prop = Propagator::new(eq, model, integrator, TimeMode::Imaginary)?;
    let mut state = initial;
    state.coefficients.normalize()?;
    state.orbitals = orthonormalize(&state.orbitals, model.grid())?;
    state.time = 0.0;
    let mut e = energy(&state, model, eq.tables())?;
    let mut trace = vec![(0.0, e)];
    let mut window: VecDeque<(f64, f64)> = VecDeque::from([(0.0, e)]);
    let mut non_monotone = 0;
    let mut converged = false;
    for _ in 0..opts.max_steps {
        prop.step(&mut state, None)?;
        let e_new = energy(&state, model, eq.tables())?;
        if e_new > e + 1e-8 * e.abs().max(1.0) {
            non_monotone += 1;
        }
        e = e_new;
        trace.push((state.time, e));
        window.push_back((state.time, e));
        while window.len() > 2 && state.time - window[1].0 >= opts.rate_window {
            window.pop_front();
        }
        let (t0, e0) = window[0];
        let span = state.time - t0;
        if span >= opts.rate_window && (e - e0).abs() / span < opts.tol_energy {
            converged = true;
            break;
        }
    }
    let mut flags = *prop.flags();
    flags.non_monotone_steps = non_monotone;
    Ok(RelaxOutcome {
        state,
        energy_trace: trace,
        energy: e,
        converged,
        flags,
    })
}

/// Real-time propagation to `t_final` with records every `sample_interval` (including `t = 0`).
pub fn propagate(
    initial: WavefunctionState,
    model: &Model,
    eq: &RasEquations,
    integrator: IntegratorSpec,
    t_final: f64,
    sample_interval: f64,
) -> Result<(WavefunctionState, Vec<ObservableRecord>, RunFlags)> {
    let mut prop = Propagator::new(eq, model, integrator, TimeMode::Real)?;
    let mut state = initial;
    let t_start = state.time;
    let n_samples = (t_final / sample_interval + 1e-9).floor() as usize;
    let mut records = vec![record(&state, model, eq.tables())?];
    for k in 1..=n_samples {
        let target = t_start + k as f64 * sample_interval;
        while target - state.time > 1e-12 * target.abs().max(1.0) {
            let remaining = target - state.time;
            prop.step(&mut state, Some(remaining)).map_err(|err| match err {
                Error::PropagationFailure { .. } => err,
                other => Error::PropagationFailure {
                    time: state.time,
                    reason: other.to_string(),
                },
            })?;
        }
        state.time = target;
        records.push(record(&state, model, eq.tables())?);
    }
    Ok((state, records, *prop.flags()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolKind {
    Relax,
    Propagate,
    QuenchThenPropagate,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Protocol {
    pub kind: ProtocolKind,
    pub t_final: f64,
    pub sample_interval: f64,
    /// Interaction switched on at `t = 0` for quenches.
    pub quench: Option<Interaction>,
    pub noise: f64,
    pub seed: u64,
}

impl Protocol {
    pub fn quench(to: Interaction, t_final: f64, sample_interval: f64) -> Self {
        Self {
            kind: ProtocolKind::QuenchThenPropagate,
            t_final,
            sample_interval,
            quench: Some(to),
            noise: 1e-6,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ProtocolOutput {
    pub records: Vec<ObservableRecord>,
    pub final_state: WavefunctionState,
    /// Energy at the end of the relaxation stage, if any.
    pub relaxed_energy: Option<f64>,
    pub relax_converged: Option<bool>,
    pub flags: RunFlags,
}

/// Runs a protocol from the default initial guess.
///
/// `Relax` relaxes under `model`. `Propagate` evolves the initial guess in real
/// time. `QuenchThenPropagate` relaxes under `model`, switches to the quench
/// interaction and evolves in real time from `t = 0`.
pub fn run_protocol(
    protocol: &Protocol,
    model: &Model,
    eq: &RasEquations,
    integrator: IntegratorSpec,
    relax_opts: &RelaxOptions,
) -> Result<ProtocolOutput> {
    let initial = initial_guess(eq, model, protocol.noise, protocol.seed)?;
    if protocol.kind != ProtocolKind::Relax && !(protocol.t_final > 0.0 && protocol.sample_interval > 0.0) {
        return Err(Error::InvalidArgument("t_final and sample_interval must be positive".into()));
    }
    match protocol.kind {
        ProtocolKind::Relax => {
            let out = relax(initial, model, eq, integrator, relax_opts)?;
            Ok(ProtocolOutput {
                records: vec![record(&out.state, model, eq.tables())?],
                relaxed_energy: Some(out.energy),
                relax_converged: Some(out.converged),
                final_state: out.state,
                flags: out.flags,
            })
        }
        ProtocolKind::Propagate => {
            let (state, records, flags) =
                propagate(initial, model, eq, integrator, protocol.t_final, protocol.sample_interval)?;
            Ok(ProtocolOutput {
                records,
                final_state: state,
                relaxed_energy: None,
                relax_converged: None,
                flags,
            })
        }
        ProtocolKind::QuenchThenPropagate => {
            let to = protocol
                .quench
                .ok_or_else(|| Error::InvalidArgument("quench protocol without target interaction".into()))?;
            let relaxed = relax(initial, model, eq, integrator, relax_opts)?;
            let quenched = model.with_interaction(to);
            let mut start = relaxed.state;
            start.time = 0.0;
            let (state, records, pflags) = propagate(
                start,
                &quenched,
                eq,
                integrator,
                protocol.t_final,
                protocol.sample_interval,
            )?;
            let mut flags = relaxed.flags;
            flags.merge(&pflags);
            Ok(ProtocolOutput {
                records,
                final_state: state,
                relaxed_energy: Some(relaxed.energy),
                relax_converged: Some(relaxed.converged),
                flags,
            })
        }
    }
}
