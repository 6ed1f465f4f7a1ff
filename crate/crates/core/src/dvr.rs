//! Sine discrete variable representation on a hard-wall box.
//!
//! Orbitals are stored as grid values `phi_i(x_a)` and every inner product uses
//! the uniform quadrature weight `dx`. Lengths are in oscillator units of the
//! trap and energies in units of the trap quantum.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::Tensor4;

/// Uniform grid of interior points of `[x_min, x_max]` with the sine-DVR kinetic matrix.
#[derive(Clone, Debug)]
pub struct Grid {
    pub x_min: f64,
    pub x_max: f64,
    points: Vec<f64>,
    dx: f64,
    d2: DMatrix<f64>,
}

impl Grid {
    pub fn n_points(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Second-derivative matrix `d^2/dx^2` in the DVR basis.
    pub fn second_derivative(&self) -> &DMatrix<f64> {
        &self.d2
    }
}

/// Builds the grid `x_a = x_min + a dx`, `a = 1..n`, `dx = (x_max - x_min)/(n + 1)`,
/// and the exact sine-DVR second-derivative matrix.
pub fn build_grid(x_min: f64, x_max: f64, n_points: usize) -> Result<Grid> {
    if !(x_max > x_min) || !x_min.is_finite() || !x_max.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "invalid box [{x_min}, {x_max}]"
        )));
    }
    if n_points < 2 {
        return Err(Error::InvalidArgument(format!(
            "at least 2 grid points required, got {n_points}"
        )));
    }
    let len = x_max - x_min;
    let np1 = (n_points + 1) as f64;
    let dx = len / np1;
    let points = (1..=n_points).map(|a| x_min + a as f64 * dx).collect();

    // closed form of -U diag(k^2) U^T with k_n = n pi / L
    let pref = PI * PI / (2.0 * len * len);
    let mut d2 = DMatrix::zeros(n_points, n_points);
    for i in 1..=n_points {
        let si = (PI * i as f64 / np1).sin();
        d2[(i - 1, i - 1)] = -pref * ((2.0 * np1 * np1 + 1.0) / 3.0 - 1.0 / (si * si));
        for j in (i + 1)..=n_points {
            let sm = (PI * (i as f64 - j as f64) / (2.0 * np1)).sin();
            let sp = (PI * (i + j) as f64 / (2.0 * np1)).sin();
            let sign = if (j - i) % 2 == 0 { 1.0 } else { -1.0 };
            let val = -pref * sign * (1.0 / (sm * sm) - 1.0 / (sp * sp));
            d2[(i - 1, j - 1)] = val;
            d2[(j - 1, i - 1)] = val;
        }
    }
    Ok(Grid {
        x_min,
        x_max,
        points,
        dx,
        d2,
    })
}

/// Harmonic trap `V(x) = omega^2 x^2 / 2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trap {
    pub omega: f64,
}

impl Default for Trap {
    fn default() -> Self {
        Self { omega: 1.0 }
    }
}

impl Trap {
    pub fn potential(&self, x: f64) -> f64 {
        0.5 * self.omega * self.omega * x * x
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InteractionKind {
    /// `W(x, x') = lambda delta(x - x')`.
    Contact,
    /// `W(x, x') = lambda (x - x')^2`.
    #[serde(alias = "harmonicpair")]
    Harmonic,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interaction {
    pub kind: InteractionKind,
    pub lambda: f64,
}

impl Interaction {
    pub fn contact(lambda: f64) -> Self {
        Self {
            kind: InteractionKind::Contact,
            lambda,
        }
    }

    pub fn harmonic(lambda: f64) -> Self {
        Self {
            kind: InteractionKind::Harmonic,
            lambda,
        }
    }
}

/// `M` orbitals sampled on the grid, stored as the columns of an `n_points x M` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct OrbitalSet {
    values: DMatrix<C64>,
}

impl OrbitalSet {
    pub fn new(values: DMatrix<C64>) -> Self {
        Self { values }
    }

    pub fn n_orbitals(&self) -> usize {
        self.values.ncols()
    }

    pub fn n_points(&self) -> usize {
        self.values.nrows()
    }

    pub fn values(&self) -> &DMatrix<C64> {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut DMatrix<C64> {
        &mut self.values
    }

    pub fn into_values(self) -> DMatrix<C64> {
        self.values
    }

    /// Quadrature overlap `S[(i, j)] = dx sum_a conj(phi_i) phi_j`.
    pub fn overlap(&self, grid: &Grid) -> DMatrix<C64> {
        self.values.adjoint() * &self.values * C64::from(grid.dx())
    }

    /// Largest deviation of the overlap matrix from the identity.
    pub fn orthonormality_error(&self, grid: &Grid) -> f64 {
        let s = self.overlap(grid);
        let mut err: f64 = 0.0;
        for i in 0..s.nrows() {
            for j in 0..s.ncols() {
                let target = if i == j { 1.0 } else { 0.0 };
                err = err.max((s[(i, j)] - target).norm());
            }
        }
        err
    }
}

/// Grid matrix of `-1/2 d^2/dx^2 + V(x)`.
pub fn one_body_operator(grid: &Grid, trap: &Trap) -> DMatrix<f64> {
    let mut h = grid.second_derivative() * -0.5;
    for (a, &x) in grid.points().iter().enumerate() {
        h[(a, a)] += trap.potential(x);
    }
    h
}

/// Lowest `m` eigenfunctions of the trap Hamiltonian on the grid, with eigenvalues.
///
/// Each orbital is normalized under the quadrature and its sign fixed so that
/// the first entry above `1e-8` of its peak magnitude is positive.
pub fn trap_eigenstates(grid: &Grid, trap: &Trap, m: usize) -> Result<(OrbitalSet, Vec<f64>)> {
    let n = grid.n_points();
    if m > n {
        return Err(Error::InvalidArgument(format!(
            "requested {m} orbitals on a grid of {n} points"
        )));
    }
    let eig = SymmetricEigen::new(one_body_operator(grid, trap));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let scale = 1.0 / grid.dx().sqrt();
    let mut values = DMatrix::zeros(n, m);
    let mut energies = Vec::with_capacity(m);
    for (col, &k) in order.iter().take(m).enumerate() {
        let v = eig.eigenvectors.column(k);
        let peak = v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        let sign = v
            .iter()
            .find(|x| x.abs() > 1e-8 * peak)
            .map_or(1.0, |x| x.signum());
        for a in 0..n {
            values[(a, col)] = C64::new(sign * scale * v[a], 0.0);
        }
        energies.push(eig.eigenvalues[k]);
    }
    Ok((OrbitalSet::new(values), energies))
}

/// `h[(p, q)] = <phi_p| h |phi_q>` for a precomputed grid operator.
pub fn project_one_body(orbitals: &OrbitalSet, grid: &Grid, h_grid: &DMatrix<C64>) -> DMatrix<C64> {
    let phi = orbitals.values();
    phi.adjoint() * (h_grid * phi) * C64::from(grid.dx())
}

/// `h[(p, q)] = <phi_p| -1/2 d^2/dx^2 + V |phi_q>`.
pub fn one_body_matrix(orbitals: &OrbitalSet, grid: &Grid, trap: &Trap) -> DMatrix<C64> {
    let h = one_body_operator(grid, trap).map(C64::from);
    project_one_body(orbitals, grid, &h)
}

/// First and second moment matrices `<phi_p|x|phi_q>`, `<phi_p|x^2|phi_q>` and the overlap.
fn moments(orbitals: &OrbitalSet, grid: &Grid) -> (DMatrix<C64>, DMatrix<C64>, DMatrix<C64>) {
    let phi = orbitals.values();
    let x = grid.points();
    let mut xphi = phi.clone();
    let mut x2phi = phi.clone();
    for (a, &xa) in x.iter().enumerate() {
        for i in 0..phi.ncols() {
            xphi[(a, i)] *= xa;
            x2phi[(a, i)] *= xa * xa;
        }
    }
    let w = C64::from(grid.dx());
    (
        phi.adjoint() * phi * w,
        phi.adjoint() * xphi * w,
        phi.adjoint() * x2phi * w,
    )
}

/// Two-body elements `v[[p, r, q, s]] = <phi_p phi_r| W |phi_q phi_s>`.
///
/// The contact kernel collapses to a single quadrature sum. The harmonic kernel
/// is expanded into moment matrices; the computed overlap takes the place of the
/// Kronecker delta so that the tensor stays consistent with
/// [`mean_field_operators`] for any orbital set.
pub fn two_body_tensor(orbitals: &OrbitalSet, grid: &Grid, interaction: &Interaction) -> Tensor4 {
    let m = orbitals.n_orbitals();
    let lam = interaction.lambda;
    let mut v = Tensor4::zeros(m);
    if lam == 0.0 {
        return v;
    }
    match interaction.kind {
        InteractionKind::Contact => {
            let phi = orbitals.values();
            let n = grid.n_points();
            let mut prod = DMatrix::<C64>::zeros(n, m * m);
            for q in 0..m {
                for s in 0..m {
                    for a in 0..n {
                        prod[(a, q * m + s)] = phi[(a, q)] * phi[(a, s)];
                    }
                }
            }
            let g = prod.adjoint() * &prod * C64::from(lam * grid.dx());
            for p in 0..m {
                for r in 0..m {
                    for q in 0..m {
                        for s in 0..m {
                            v[[p, r, q, s]] = g[(p * m + r, q * m + s)];
                        }
                    }
                }
            }
        }
        InteractionKind::Harmonic => {
            let (s, x, x2) = moments(orbitals, grid);
            let lam = C64::from(lam);
            for p in 0..m {
                for r in 0..m {
                    for q in 0..m {
                        for t in 0..m {
                            v[[p, r, q, t]] = lam
                                * (x2[(p, q)] * s[(r, t)] - 2.0 * x[(p, q)] * x[(r, t)]
                                    + s[(p, q)] * x2[(r, t)]);
                        }
                    }
                }
            }
        }
    }
    v
}

/// Grid-diagonal mean-field potentials `W_l^k(x) = int conj(phi_k(x')) W(x, x') phi_l(x') dx'`.
#[derive(Clone, Debug)]
pub struct MeanField {
    m: usize,
    n: usize,
    values: Vec<C64>,
}

impl MeanField {
    /// Values of `W_l^k` on the grid.
    pub fn get(&self, k: usize, l: usize) -> &[C64] {
        let o = (k * self.m + l) * self.n;
        &self.values[o..o + self.n]
    }

    pub fn n_orbitals(&self) -> usize {
        self.m
    }
}

pub fn mean_field_operators(orbitals: &OrbitalSet, grid: &Grid, interaction: &Interaction) -> MeanField {
    let m = orbitals.n_orbitals();
    let n = grid.n_points();
    let lam = interaction.lambda;
    let mut values = vec![C64::new(0.0, 0.0); m * m * n];
    if lam != 0.0 {
        let phi = orbitals.values();
        match interaction.kind {
            InteractionKind::Contact => {
                for k in 0..m {
                    for l in 0..m {
                        let o = (k * m + l) * n;
                        for a in 0..n {
                            values[o + a] = phi[(a, k)].conj() * phi[(a, l)] * lam;
                        }
                    }
                }
            }
            InteractionKind::Harmonic => {
                let (s, x, x2) = moments(orbitals, grid);
                for k in 0..m {
                    for l in 0..m {
                        let o = (k * m + l) * n;
                        for (a, &xa) in grid.points().iter().enumerate() {
                            values[o + a] =
                                (s[(k, l)] * (xa * xa) - x[(k, l)] * (2.0 * xa) + x2[(k, l)]) * lam;
                        }
                    }
                }
            }
        }
    }
    MeanField { m, n, values }
}

/// Modified Gram-Schmidt under the grid quadrature.
pub fn orthonormalize(orbitals: &OrbitalSet, grid: &Grid) -> Result<OrbitalSet> {
    let mut v = orbitals.values().clone();
    let w = grid.dx();
    for i in 0..v.ncols() {
        for j in 0..i {
            let proj = v.column(j).dotc(&v.column(i)) * w;
            let cj = v.column(j).clone_owned();
            v.column_mut(i).axpy(-proj, &cj, C64::new(1.0, 0.0));
        }
        let norm = (v.column(i).norm_squared() * w).sqrt();
        if !(norm >= 1e-12) {
            return Err(Error::DegenerateBasis { index: i, norm });
        }
        v.column_mut(i).unscale_mut(norm);
    }
    Ok(OrbitalSet::new(v))
}
