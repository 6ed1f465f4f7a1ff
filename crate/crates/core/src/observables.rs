//! Energies, densities, natural occupations, correlation diagnostics and
//! breathing-frequency extraction.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::dvr::Grid;
use crate::eom::{Model, WavefunctionState};
use crate::error::{Error, Result};
use crate::secondq::{DensityMatrices, OperatorTables};
use crate::tensor::Tensor4;

/// Snapshot of the observables recorded along a trajectory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableRecord {
    pub t: f64,
    pub energy: f64,
    pub norm: f64,
    pub rho0: f64,
    /// Descending eigenvalues of the one-body density matrix.
    pub natural_occupations: Vec<f64>,
}

/// `sum h[(p, q)] rho1[(p, q)] + 1/2 sum v[[p, r, q, s]] rho2[[p, r, q, s]]`.
pub fn energy_from_parts(h: &DMatrix<C64>, v: &Tensor4, dens: &DensityMatrices) -> Result<f64> {
    let one: C64 = h.iter().zip(dens.rho1.iter()).map(|(a, b)| a * b).sum();
    let two: C64 = v
        .as_slice()
        .iter()
        .zip(dens.rho2.as_slice())
        .map(|(a, b)| a * b)
        .sum();
    let e = one + two * 0.5;
    if e.im.abs() > 1e-8 * e.re.abs().max(1.0) {
        return Err(Error::InconsistentState(format!("complex energy {e}")));
    }
    Ok(e.re)
}

pub fn energy(state: &WavefunctionState, model: &Model, tables: &OperatorTables) -> Result<f64> {
    let h = model.one_body(&state.orbitals);
    let v = model.two_body(&state.orbitals);
    energy_from_parts(&h, &v, &tables.densities(&state.coefficients)?)
}

/// One-body density `rho(x_a) = sum rho1[(i, j)] conj(phi_i(x_a)) phi_j(x_a)`.
pub fn density_profile(state: &WavefunctionState, rho1: &DMatrix<C64>) -> Vec<f64> {
    let phi = state.orbitals.values();
    let m = phi.ncols();
    (0..phi.nrows())
        .map(|a| {
            let mut s = C64::new(0.0, 0.0);
            for i in 0..m {
                for j in 0..m {
                    s += rho1[(i, j)] * phi[(a, i)].conj() * phi[(a, j)];
                }
            }
            s.re
        })
        .collect()
}

/// Density at `x = 0`, interpolated linearly when the origin is not a grid point.
pub fn rho_at_origin(profile: &[f64], grid: &Grid) -> f64 {
    let x = grid.points();
    let pos = (0.0 - x[0]) / grid.dx();
    if pos <= 0.0 {
        return profile[0];
    }
    let lo = pos.floor() as usize;
    if lo + 1 >= x.len() {
        return profile[x.len() - 1];
    }
    let f = pos - lo as f64;
    if f < 1e-9 {
        return profile[lo];
    }
    profile[lo] * (1.0 - f) + profile[lo + 1] * f
}

/// Eigenvalues of `rho1` clipped to `[0, N]`, in descending order.
pub fn natural_occupations(rho1: &DMatrix<C64>, n_particles: usize) -> Vec<f64> {
    let n = n_particles as f64;
    let mut w: Vec<f64> = SymmetricEigen::new(rho1.clone())
        .eigenvalues
        .iter()
        .map(|x| x.clamp(0.0, n))
        .collect();
    w.sort_by(|a, b| b.total_cmp(a));
    w
}

pub fn record(state: &WavefunctionState, model: &Model, tables: &OperatorTables) -> Result<ObservableRecord> {
    let dens = tables.densities(&state.coefficients)?;
    let h = model.one_body(&state.orbitals);
    let v = model.two_body(&state.orbitals);
    let profile = density_profile(state, &dens.rho1);
    Ok(ObservableRecord {
        t: state.time,
        energy: energy_from_parts(&h, &v, &dens)?,
        norm: state.coefficients.norm(),
        rho0: rho_at_origin(&profile, model.grid()),
        natural_occupations: natural_occupations(&dens.rho1, tables.spec().n_particles),
    })
}

/// `E_corr = E_GP - E_method` and its ratio to the reference `E_GP - E_ref`.
pub fn correlation_energies(e_method: f64, e_gp: f64, e_ref: f64) -> Result<(f64, f64)> {
    let corr = e_gp - e_method;
    let denom = e_gp - e_ref;
    if denom == 0.0 {
        return Err(Error::UndefinedFraction);
    }
    Ok((corr, corr / denom))
}

/// `Omega_n = 2 n sqrt(omega^2 + 2 N lambda)` for the harmonic-interaction model.
pub fn analytic_breathing_frequency(order: usize, n_particles: usize, lambda: f64, omega: f64) -> f64 {
    2.0 * order as f64 * (omega * omega + 2.0 * n_particles as f64 * lambda).sqrt()
}

/// Dominant angular frequency of a uniformly sampled series.
///
/// The mean is removed, a Hann window applied and the series zero-padded before
/// the FFT; the peak bin is refined by fitting a parabola through it and its
/// neighbours.
pub fn breathing_frequency(times: &[f64], values: &[f64]) -> Result<f64> {
    let n = times.len();
    if n != values.len() || n < 4 {
        return Err(Error::InvalidArgument("need at least 4 samples of equal length".into()));
    }
    let dt = (times[n - 1] - times[0]) / (n - 1) as f64;
    if !(dt > 0.0) || times.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > 1e-6 * dt) {
        return Err(Error::InvalidArgument("samples must be uniformly spaced".into()));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
    if var < 1e-12 {
        return Err(Error::NoOscillation);
    }
    let padded = (n * 16).next_power_of_two();
    let mut buf: Vec<C64> = values
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let w = 0.5 - 0.5 * (2.0 * PI * k as f64 / (n - 1) as f64).cos();
            C64::new((v - mean) * w, 0.0)
        })
        .collect();
    buf.resize(padded, C64::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(padded).process(&mut buf);
    let mag: Vec<f64> = buf[..padded / 2].iter().map(|z| z.norm()).collect();
    let (k, _) = mag
        .iter()
        .enumerate()
        .skip(1)
        .fold((1, f64::MIN), |best, (i, &m)| if m > best.1 { (i, m) } else { best });
    let shift = if k + 1 < mag.len() {
        let (a, b, c) = (mag[k - 1], mag[k], mag[k + 1]);
        let d = a - 2.0 * b + c;
        if d != 0.0 { 0.5 * (a - c) / d } else { 0.0 }
    } else {
        0.0
    };
    Ok(2.0 * PI * (k as f64 + shift) / (padded as f64 * dt))
}
