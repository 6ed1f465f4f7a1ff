//! Equations of motion for orbitals and configuration amplitudes.
//!
//! The orbital derivative splits into a part inside the occupied span, fixed by
//! the rotation matrix `eta[(p, q)] = <phi_p|d phi_q/dt>`, and a part in its
//! orthogonal complement. `eta` vanishes inside each of the blocks `P1` and
//! `P2`; its cross blocks follow from an `m1 m2` linear system whose form depends
//! on the excitation scheme. Full spaces use `eta = 0`.
//!
//! In imaginary time the same linear system is solved and the solved block of
//! `eta` is multiplied by `-i`, keeping `eta` anti-Hermitian so that orbital
//! orthonormality is preserved to first order.

use nalgebra::{DMatrix, SymmetricEigen, SVD};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::dvr::{
    mean_field_operators, one_body_operator, project_one_body, two_body_tensor, Grid, Interaction, OrbitalSet,
    Trap,
};
use crate::error::{Error, Result};
use crate::fock::{RasSpec, Scheme};
use crate::secondq::{build_a_tensor, CoefficientVector, DensityMatrices, OperatorTables};
use crate::tensor::{DenseTensor, Tensor4};

const I: C64 = C64 { re: 0.0, im: 1.0 };
const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeMode {
    Real,
    Imaginary,
}

/// Hamiltonian of `N` bosons in a harmonic trap on a DVR grid.
#[derive(Clone, Debug)]
pub struct Model {
    grid: Grid,
    trap: Trap,
    interaction: Interaction,
    h_grid: DMatrix<C64>,
}

impl Model {
    pub fn new(grid: Grid, trap: Trap, interaction: Interaction) -> Self {
        let h_grid = one_body_operator(&grid, &trap).map(C64::from);
        Self {
            grid,
            trap,
            interaction,
            h_grid,
        }
    }

    /// Same grid and trap with a different two-body interaction.
    pub fn with_interaction(&self, interaction: Interaction) -> Self {
        Self {
            interaction,
            ..self.clone()
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn trap(&self) -> &Trap {
        &self.trap
    }

    pub fn interaction(&self) -> &Interaction {
        &self.interaction
    }

    /// One-body grid operator `-1/2 d^2/dx^2 + V`.
    pub fn h_grid(&self) -> &DMatrix<C64> {
        &self.h_grid
    }

    pub fn one_body(&self, orbitals: &OrbitalSet) -> DMatrix<C64> {
        project_one_body(orbitals, &self.grid, &self.h_grid)
    }

    pub fn two_body(&self, orbitals: &OrbitalSet) -> Tensor4 {
        two_body_tensor(orbitals, &self.grid, &self.interaction)
    }
}

/// Orbitals, amplitudes and time.
#[derive(Clone, Debug)]
pub struct WavefunctionState {
    pub orbitals: OrbitalSet,
    pub coefficients: CoefficientVector,
    pub time: f64,
}

/// Regularization constants.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EomOptions {
    /// `eps` in `rho + eps exp(-rho/eps)` applied to the eigenvalues of `rho1` before inversion.
    pub density_eps: f64,
    /// Tikhonov shift relative to the largest singular value of a singular `eta` system.
    pub linear_eps: f64,
    /// Absolute Tikhonov shift applied to every `eta` solve. Bounds the cross rotation
    /// when the top shell of a general scheme empties.
    pub eta_eps: f64,
    /// Condition number above which the `eta` system counts as singular.
    pub max_condition: f64,
}

impl Default for EomOptions {
    fn default() -> Self {
        Self {
            density_eps: 1e-8,
            linear_eps: 1e-12,
            eta_eps: 1e-8,
            max_condition: 1e12,
        }
    }
}

/// Rotation matrix `eta[(p, q)] = <phi_p| d phi_q / dt>` in the real-time convention.
#[derive(Clone, Debug, PartialEq)]
pub struct EtaMatrix {
    pub matrix: DMatrix<C64>,
}

impl EtaMatrix {
    pub fn zeros(m: usize) -> Self {
        Self {
            matrix: DMatrix::zeros(m, m),
        }
    }

    /// Fills the cross blocks from `eta[(k'', l')]` values given as an `m2 x m1` block.
    fn from_lower_block(m1: usize, lower: &DMatrix<C64>) -> Self {
        let m = m1 + lower.nrows();
        let mut eta = DMatrix::zeros(m, m);
        for k2 in 0..lower.nrows() {
            for l1 in 0..m1 {
                let x = lower[(k2, l1)];
                eta[(m1 + k2, l1)] = x;
                eta[(l1, m1 + k2)] = -x.conj();
            }
        }
        Self { matrix: eta }
    }

    /// Matrix used by the equations of motion in the given mode.
    ///
    /// Imaginary time multiplies the `P2 x P1` block by `-i` and completes the
    /// `P1 x P2` block by anti-Hermiticity.
    pub fn for_mode(&self, m1: usize, mode: TimeMode) -> DMatrix<C64> {
        match mode {
            TimeMode::Real => self.matrix.clone(),
            TimeMode::Imaginary => {
                let m = self.matrix.nrows();
                let lower = DMatrix::from_fn(m - m1, m1, |k, l| -I * self.matrix[(m1 + k, l)]);
                Self::from_lower_block(m1, &lower).matrix
            }
        }
    }

    /// Largest entry of `eta + eta^H`.
    pub fn anti_hermiticity_error(&self) -> f64 {
        (&self.matrix + self.matrix.adjoint()).camax()
    }
}

/// Solution of the cross-block linear system.
#[derive(Clone, Debug)]
pub struct EtaSolution {
    pub eta: EtaMatrix,
    /// True when the system was singular and a Tikhonov shift was applied.
    pub regularized: bool,
    /// `|A x - b| / (|A| |x| + |b|)`.
    pub residual: f64,
}

/// Row `(i', j'')` and column `(l', k'')` matrix of a `[m2, m1, m1, m2]` tensor.
fn cross_system(t: &DenseTensor, m1: usize, m2: usize) -> DMatrix<C64> {
    let n = m1 * m2;
    DMatrix::from_fn(n, n, |r, c| {
        let (i1, j2) = (r / m2, r % m2);
        let (l1, k2) = (c / m2, c % m2);
        t.get(&[k2, i1, l1, j2])
    })
}

struct LinearSolution {
    x: nalgebra::DVector<C64>,
    regularized: bool,
    residual: f64,
}

fn solve_regularized(a: &DMatrix<C64>, b: &nalgebra::DVector<C64>, opts: &EomOptions) -> LinearSolution {
    let svd = SVD::new(a.clone(), true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let singular = smax == 0.0 || smax > opts.max_condition * smin;
    let mu = if singular { opts.linear_eps * smax } else { 0.0 }.max(opts.eta_eps);
    let regularized = singular || smin < 1e3 * opts.eta_eps;
    let u = svd.u.as_ref().expect("u requested");
    let vt = svd.v_t.as_ref().expect("v_t requested");
    let utb = u.adjoint() * b;
    let mut y = utb.clone();
    for (k, s) in svd.singular_values.iter().enumerate() {
        let d = s * s + mu * mu;
        y[k] = if d > 0.0 { utb[k] * (*s / d) } else { ZERO };
    }
    let x = vt.adjoint() * y;
    let r = a * &x - b;
    let scale = smax * x.norm() + b.norm();
    let residual = if scale > 0.0 { r.norm() / scale } else { 0.0 };
    LinearSolution {
        x,
        regularized,
        residual,
    }
}

/// Cross-block rotation for even-only schemes.
///
/// Solves `sum_{l'k''} A[[k'', i', l', j'']] X(l', k'') = B(i', j'')` with
/// `B = -(sum v[[j'', m, k, l]] rho2[[i', m, k, l]] - sum v[[k, l, i', m]] rho2[[k, l, j'', m]])`
/// and sets `eta[(k'', l')] = i (X - h[(k'', l')])`.
pub fn solve_eta_even(
    h: &DMatrix<C64>,
    v: &Tensor4,
    dens: &DensityMatrices,
    m1: usize,
    opts: &EomOptions,
) -> EtaSolution {
    let m = h.nrows();
    let m2 = m - m1;
    if m2 == 0 {
        return EtaSolution {
            eta: EtaMatrix::zeros(m),
            regularized: false,
            residual: 0.0,
        };
    }
    let a = cross_system(&build_a_tensor(&dens.rho1, m1), m1, m2);
    let r2 = &dens.rho2;
    let b = nalgebra::DVector::from_fn(m1 * m2, |r, _| {
        let (i1, j2) = (r / m2, m1 + r % m2);
        let mut s = ZERO;
        for p in 0..m {
            for q in 0..m {
                for t in 0..m {
                    s += v[[j2, p, q, t]] * r2[[i1, p, q, t]] - v[[p, q, i1, t]] * r2[[p, q, j2, t]];
                }
            }
        }
        -s
    });
    let sol = solve_regularized(&a, &b, opts);
    let lower = DMatrix::from_fn(m2, m1, |k2, l1| I * (sol.x[l1 * m2 + k2] - h[(m1 + k2, l1)]));
    EtaSolution {
        eta: EtaMatrix::from_lower_block(m1, &lower),
        regularized: sol.regularized,
        residual: sol.residual,
    }
}

/// Cross-block rotation for general schemes with `n_max < N`.
///
/// Solves `sum_{l'k''} zeta4[[k'', i', l', j'']] X(l', k'') = 1/2 sum v[[k, m, l, n]] zeta6[[k, m, i', l, n, j'']]`
/// and sets `eta[(k'', l')] = -i (X + h[(k'', l')])`. For `n_max = N` the cross
/// blocks are left at zero.
pub fn solve_eta_general(
    h: &DMatrix<C64>,
    v: &Tensor4,
    c: &[C64],
    tables: &OperatorTables,
    opts: &EomOptions,
) -> Result<EtaSolution> {
    let spec = tables.spec();
    let m = spec.n_orbitals();
    let (m1, m2) = (spec.m1, spec.m2);
    if !matches!(spec.scheme, Scheme::General(_)) {
        return Err(Error::InvalidState(format!(
            "general solve called for scheme {:?}",
            spec.scheme
        )));
    }
    if tables.boundary_space().is_none() {
        return Ok(EtaSolution {
            eta: EtaMatrix::zeros(m),
            regularized: false,
            residual: 0.0,
        });
    }
    let a = cross_system(&tables.zeta4(c)?, m1, m2);
    let z6 = tables.zeta6(c)?;
    let b = nalgebra::DVector::from_fn(m1 * m2, |r, _| {
        let (i1, j2) = (r / m2, r % m2);
        let mut s = ZERO;
        for k in 0..m {
            for mm in 0..m {
                for l in 0..m {
                    for n in 0..m {
                        s += v[[k, mm, l, n]] * z6.get(&[k, mm, i1, l, n, j2]);
                    }
                }
            }
        }
        s * 0.5
    });
    let sol = solve_regularized(&a, &b, opts);
    let lower = DMatrix::from_fn(m2, m1, |k2, l1| -I * (sol.x[l1 * m2 + k2] + h[(m1 + k2, l1)]));
    Ok(EtaSolution {
        eta: EtaMatrix::from_lower_block(m1, &lower),
        regularized: sol.regularized,
        residual: sol.residual,
    })
}

/// Amplitude derivative.
///
/// Real time: `i dC/dt = sum (h - i eta)[(i, j)] <b_i† b_j> + 1/2 sum v <b_i† b_k† b_l b_j>`.
/// Imaginary time: `dC/dtau = -[sum (h + eta_tau) <b† b> + 1/2 sum v <b† b† b b>]`,
/// with `eta_tau = eta.for_mode(Imaginary)`.
pub fn amplitude_rhs(
    c: &[C64],
    h: &DMatrix<C64>,
    v: &Tensor4,
    eta: &EtaMatrix,
    tables: &OperatorTables,
    mode: TimeMode,
) -> Vec<C64> {
    let m1 = tables.space().m1();
    let g = match mode {
        TimeMode::Real => h - &eta.matrix * I,
        TimeMode::Imaginary => h + eta.for_mode(m1, mode),
    };
    let mut out = tables.apply_hamiltonian(&g, v, c);
    let f = match mode {
        TimeMode::Real => -I,
        TimeMode::Imaginary => C64::new(-1.0, 0.0),
    };
    out.iter_mut().for_each(|x| *x *= f);
    out
}

/// Inverse of `rho1` after replacing each eigenvalue `w` by `w + eps exp(-w/eps)`.
pub fn regularized_inverse(rho1: &DMatrix<C64>, eps: f64) -> DMatrix<C64> {
    let eig = SymmetricEigen::new(rho1.clone());
    let d = eig.eigenvalues.map(|w| {
        let reg = w + eps * (-w / eps).exp();
        C64::from(1.0 / reg)
    });
    &eig.eigenvectors * DMatrix::from_diagonal(&d) * eig.eigenvectors.adjoint()
}

/// Removes the component of each column of `f` inside the span of `orbitals`.
///
/// Uses the inverse overlap when the orbitals have drifted from orthonormality
/// by more than `1e-10`, so the projector stays idempotent.
pub fn project_out(orbitals: &OrbitalSet, grid: &Grid, f: &DMatrix<C64>) -> DMatrix<C64> {
    let phi = orbitals.values();
    let dx = C64::from(grid.dx());
    let mut coeff = phi.adjoint() * f * dx;
    if orbitals.orthonormality_error(grid) > 1e-10 {
        if let Some(sinv) = orbitals.overlap(grid).try_inverse() {
            coeff = sinv * coeff;
        }
    }
    f - phi * coeff
}

/// Complement part of the orbital derivative.
///
/// Returns `(1 - P) sum_m rinv[(i, m)] [sum_j rho1[(m, j)] h phi_j + sum_jkl rho2[[m, k, j, l]] W_l^k phi_j]`
/// multiplied by `-i` (real time) or `-1` (imaginary time). For invertible `rho1` this equals
/// `(1 - P)[h phi_i + sum_m rinv[(i, m)] ...]`; keeping `h` inside the regularized inverse
/// conserves the energy exactly.
pub fn qspace_rhs(
    orbitals: &OrbitalSet,
    model: &Model,
    dens: &DensityMatrices,
    opts: &EomOptions,
    mode: TimeMode,
) -> DMatrix<C64> {
    let grid = model.grid();
    let m = orbitals.n_orbitals();
    let n = grid.n_points();
    let phi = orbitals.values();
    let mut f = model.h_grid() * phi;
    if model.interaction().lambda != 0.0 {
        let w = mean_field_operators(orbitals, grid, model.interaction());
        let r2 = &dens.rho2;
        // t[(a, m)] = sum_kl W_kl(a) sum_j rho2[[m, k, j, l]] phi_j(a)
        let mut t = DMatrix::<C64>::zeros(n, m);
        for mm in 0..m {
            for k in 0..m {
                for l in 0..m {
                    let wkl = w.get(k, l);
                    for j in 0..m {
                        let r = r2[[mm, k, j, l]];
                        if r == ZERO {
                            continue;
                        }
                        for a in 0..n {
                            t[(a, mm)] += r * wkl[a] * phi[(a, j)];
                        }
                    }
                }
            }
        }
        let rinv = regularized_inverse(&dens.rho1, opts.density_eps);
        f = (&f * dens.rho1.transpose() + t) * rinv.transpose();
    }
    let q = project_out(orbitals, grid, &f);
    match mode {
        TimeMode::Real => q * -I,
        TimeMode::Imaginary => -q,
    }
}

/// Time derivative of the whole state.
#[derive(Clone, Debug)]
pub struct StateDerivative {
    pub c_dot: Vec<C64>,
    pub orbital_dot: DMatrix<C64>,
}

/// Diagnostics of one derivative evaluation.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DerivativeDiagnostics {
    pub regularized_solve: bool,
    pub eta_residual: f64,
}

/// Operator tables and options for one RAS space.
#[derive(Clone, Debug)]
pub struct RasEquations {
    tables: OperatorTables,
    options: EomOptions,
}

impl RasEquations {
    pub fn new(spec: RasSpec, options: EomOptions) -> Result<Self> {
        Ok(Self {
            tables: OperatorTables::new(spec)?,
            options,
        })
    }

    pub fn tables(&self) -> &OperatorTables {
        &self.tables
    }

    pub fn spec(&self) -> RasSpec {
        self.tables.spec()
    }

    pub fn options(&self) -> &EomOptions {
        &self.options
    }

    /// Cross-block rotation for the current state and orbital matrix elements.
    pub fn eta(&self, h: &DMatrix<C64>, v: &Tensor4, c: &[C64], dens: &DensityMatrices) -> Result<EtaSolution> {
        let spec = self.spec();
        let m = spec.n_orbitals();
        if spec.m2 == 0 || spec.is_full() {
            return Ok(EtaSolution {
                eta: EtaMatrix::zeros(m),
                regularized: false,
                residual: 0.0,
            });
        }
        match spec.scheme {
            Scheme::EvenOnly(_) => Ok(solve_eta_even(h, v, dens, spec.m1, &self.options)),
            Scheme::General(_) => solve_eta_general(h, v, c, &self.tables, &self.options),
            Scheme::Full => unreachable!("full spaces return above"),
        }
    }

    pub fn state_derivative(
        &self,
        state: &WavefunctionState,
        model: &Model,
        mode: TimeMode,
    ) -> Result<(StateDerivative, DerivativeDiagnostics)> {
        let spec = self.spec();
        if state.orbitals.n_orbitals() != spec.n_orbitals() || state.coefficients.len() != self.tables.dim() {
            return Err(Error::InconsistentState(format!(
                "state has {} orbitals and {} amplitudes, space needs {} and {}",
                state.orbitals.n_orbitals(),
                state.coefficients.len(),
                spec.n_orbitals(),
                self.tables.dim()
            )));
        }
        let c = &state.coefficients[..];
        let h = model.one_body(&state.orbitals);
        let v = model.two_body(&state.orbitals);
        let dens = self.tables.densities(c)?;
        let sol = self.eta(&h, &v, c, &dens)?;
        let c_dot = amplitude_rhs(c, &h, &v, &sol.eta, &self.tables, mode);
        let eta_mode = sol.eta.for_mode(spec.m1, mode);
        let orbital_dot = state.orbitals.values() * eta_mode
            + qspace_rhs(&state.orbitals, model, &dens, &self.options, mode);
        Ok((
            StateDerivative { c_dot, orbital_dot },
            DerivativeDiagnostics {
                regularized_solve: sol.regularized,
                eta_residual: sol.residual,
            },
        ))
    }
}
