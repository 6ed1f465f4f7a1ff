//! Dense brute-force references over the full Fock space of a fixed orbital set.
//!
//! Everything here is deliberately naive and shares no code with [`crate::fock`]
//! or [`crate::secondq`]: configurations are enumerated recursively, looked up
//! through a hash map, and operator strings are applied one ladder operator at a
//! time. Dimensions are capped at `10^4`.

use std::collections::HashMap;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::dvr::trap_eigenstates;
use crate::eom::Model;
use crate::error::{Error, Result};
use crate::tensor::Tensor4;

pub const DIMENSION_CAP: u64 = 10_000;

/// A single ladder operator acting on mode `.1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ladder {
    Create(usize),
    Annihilate(usize),
}

/// Applies `ops[0] ops[1] ... ops[last]` to `|occ>` (rightmost first).
pub fn apply_string(ops: &[Ladder], occ: &[u32]) -> Option<(Vec<u32>, f64)> {
    let mut cur = occ.to_vec();
    let mut amp = 1.0;
    for op in ops.iter().rev() {
        match *op {
            Ladder::Create(p) => {
                cur[p] += 1;
                amp *= f64::from(cur[p]).sqrt();
            }
            Ladder::Annihilate(p) => {
                if cur[p] == 0 {
                    return None;
                }
                amp *= f64::from(cur[p]).sqrt();
                cur[p] -= 1;
            }
        }
    }
    Some((cur, amp))
}

/// All configurations of `n` bosons in `m` modes with a lookup table.
#[derive(Clone, Debug)]
pub struct DenseBasis {
    pub n: usize,
    pub m: usize,
    pub configs: Vec<Vec<u32>>,
    index: HashMap<Vec<u32>, usize>,
}

impl DenseBasis {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("no modes".into()));
        }
        let mut configs = Vec::new();
        let mut cur = vec![0u32; m];
        rec(&mut cur, 0, n as u32, &mut configs);
        if configs.len() as u64 > DIMENSION_CAP {
            return Err(Error::DimensionCap {
                dim: configs.len() as u64,
                cap: DIMENSION_CAP,
            });
        }
        let index = configs.iter().enumerate().map(|(i, c)| (c.clone(), i)).collect();
        Ok(Self { n, m, configs, index })
    }

    pub fn dim(&self) -> usize {
        self.configs.len()
    }

    pub fn position(&self, occ: &[u32]) -> Option<usize> {
        self.index.get(occ).copied()
    }

    /// Places amplitudes given on an arbitrary configuration list into this basis.
    pub fn embed<'a>(&self, configs: impl IntoIterator<Item = &'a [u32]>, amps: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.dim()];
        for (cfg, a) in configs.into_iter().zip(amps) {
            let pos = self.position(cfg).expect("configuration belongs to the dense basis");
            out[pos] = *a;
        }
        out
    }

    /// `ops |psi>` for a vector in this basis (particle number must be conserved).
    pub fn apply(&self, ops: &[Ladder], psi: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.dim()];
        for (j, cfg) in self.configs.iter().enumerate() {
            if psi[j] == C64::new(0.0, 0.0) {
                continue;
            }
            if let Some((t, amp)) = apply_string(ops, cfg) {
                let i = self.position(&t).expect("number-conserving string");
                out[i] += psi[j] * amp;
            }
        }
        out
    }

    /// Matrix `<Phi_I| ops |Phi_J>`.
    pub fn operator_matrix(&self, ops: &[Ladder]) -> DMatrix<C64> {
        let mut mat = DMatrix::zeros(self.dim(), self.dim());
        for (j, cfg) in self.configs.iter().enumerate() {
            if let Some((t, amp)) = apply_string(ops, cfg) {
                if let Some(i) = self.position(&t) {
                    mat[(i, j)] += C64::from(amp);
                }
            }
        }
        mat
    }
}

fn rec(cur: &mut [u32], pos: usize, left: u32, out: &mut Vec<Vec<u32>>) {
    if pos + 1 == cur.len() {
        cur[pos] = left;
        out.push(cur.to_vec());
        return;
    }
    for k in (0..=left).rev() {
        cur[pos] = k;
        rec(cur, pos + 1, left - k, out);
    }
}

fn dotc(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// `<psi| ops |psi>` by explicit double loop over configurations.
pub fn dense_expectation(basis: &DenseBasis, psi: &[C64], ops: &[Ladder]) -> C64 {
    let mut s = C64::new(0.0, 0.0);
    for (j, cfg) in basis.configs.iter().enumerate() {
        if let Some((t, amp)) = apply_string(ops, cfg) {
            if let Some(i) = basis.position(&t) {
                s += psi[i].conj() * psi[j] * amp;
            }
        }
    }
    s
}

pub fn dense_rho1(basis: &DenseBasis, psi: &[C64]) -> DMatrix<C64> {
    let m = basis.m;
    DMatrix::from_fn(m, m, |i, j| {
        dense_expectation(basis, psi, &[Ladder::Create(i), Ladder::Annihilate(j)])
    })
}

pub fn dense_rho2(basis: &DenseBasis, psi: &[C64]) -> Tensor4 {
    let m = basis.m;
    let mut t = Tensor4::zeros(m);
    for i in 0..m {
        for k in 0..m {
            for j in 0..m {
                for l in 0..m {
                    t[[i, k, j, l]] = dense_expectation(
                        basis,
                        psi,
                        &[
                            Ladder::Create(i),
                            Ladder::Create(k),
                            Ladder::Annihilate(l),
                            Ladder::Annihilate(j),
                        ],
                    );
                }
            }
        }
    }
    t
}

/// `(1 - Pi) b_{j2}† b_{i1} |psi_top>` where `in_space` decides membership and `top` selects
/// the amplitudes of the highest shell.
pub fn dense_boundary_ket(
    basis: &DenseBasis,
    psi: &[C64],
    i1: usize,
    j2: usize,
    in_space: &dyn Fn(&[u32]) -> bool,
    top: &dyn Fn(&[u32]) -> bool,
) -> Vec<C64> {
    let masked: Vec<C64> = basis
        .configs
        .iter()
        .zip(psi)
        .map(|(c, a)| if top(c) { *a } else { C64::new(0.0, 0.0) })
        .collect();
    let mut k = basis.apply(&[Ladder::Create(j2), Ladder::Annihilate(i1)], &masked);
    for (c, a) in basis.configs.iter().zip(k.iter_mut()) {
        if in_space(c) {
            *a = C64::new(0.0, 0.0);
        }
    }
    k
}

/// `<K| ops |psi>` with `K` from [`dense_boundary_ket`].
pub fn dense_boundary_element(basis: &DenseBasis, ket: &[C64], ops: &[Ladder], psi: &[C64]) -> C64 {
    dotc(ket, &basis.apply(ops, psi))
}

/// Dense many-body operator over the full Fock space of a fixed orbital set.
#[derive(Clone, Debug)]
pub struct DenseManyBodyOperator {
    pub matrix: DMatrix<C64>,
    pub basis: DenseBasis,
}

impl DenseManyBodyOperator {
    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut w: Vec<f64> = SymmetricEigen::new(self.matrix.clone()).eigenvalues.iter().copied().collect();
        w.sort_by(f64::total_cmp);
        w
    }

    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues()[0]
    }
}

/// `sum h[(p, q)] b_p† b_q + 1/2 sum v[[p, r, q, s]] b_p† b_r† b_s b_q` as a dense matrix.
pub fn dense_hamiltonian(h: &DMatrix<C64>, v: &Tensor4, n: usize, m: usize) -> Result<DenseManyBodyOperator> {
    let basis = DenseBasis::new(n, m)?;
    let dim = basis.dim();
    let mut mat = DMatrix::<C64>::zeros(dim, dim);
    for (j, cfg) in basis.configs.iter().enumerate() {
        for p in 0..m {
            for q in 0..m {
                if h[(p, q)] == C64::new(0.0, 0.0) {
                    continue;
                }
                if let Some((t, amp)) = apply_string(&[Ladder::Create(p), Ladder::Annihilate(q)], cfg) {
                    let i = basis.position(&t).expect("closed basis");
                    mat[(i, j)] += h[(p, q)] * amp;
                }
            }
        }
        for p in 0..m {
            for r in 0..m {
                for q in 0..m {
                    for s in 0..m {
                        let x = v[[p, r, q, s]];
                        if x == C64::new(0.0, 0.0) {
                            continue;
                        }
                        let ops = [
                            Ladder::Create(p),
                            Ladder::Create(r),
                            Ladder::Annihilate(s),
                            Ladder::Annihilate(q),
                        ];
                        if let Some((t, amp)) = apply_string(&ops, cfg) {
                            let i = basis.position(&t).expect("closed basis");
                            mat[(i, j)] += x * (0.5 * amp);
                        }
                    }
                }
            }
        }
    }
    Ok(DenseManyBodyOperator { matrix: mat, basis })
}

/// Lowest eigenvalue of the Hamiltonian in the basis of the lowest `basis_size` trap eigenstates.
pub fn exact_ground_state(model: &Model, n: usize, basis_size: usize) -> Result<f64> {
    let (orb, _) = trap_eigenstates(model.grid(), model.trap(), basis_size)?;
    let h = model.one_body(&orb);
    let v = model.two_body(&orb);
    Ok(dense_hamiltonian(&h, &v, n, basis_size)?.ground_energy())
}
