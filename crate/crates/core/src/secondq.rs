//! Second-quantized operator algebra on RAS coefficient vectors.
//!
//! Every operator chain is factorized through spaces with one or two particles
//! removed. For a state `c` in a RAS space, the hole vectors `b_j c` and the
//! pair vectors `b_l b_j c` are formed first; densities are then Gram matrices of
//! these vectors and operator application recreates particles on the target
//! configurations. The removed-particle spaces consist of whole shells that
//! contain every image of the RAS space, so intermediate configurations outside
//! the RAS space are represented exactly.

use std::ops::{Deref, DerefMut};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{FockSpace, RasSpec, Scheme};
use crate::tensor::{n_pairs, pair_index, DenseTensor, Tensor4};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Amplitudes `C_I` indexed by position in a [`FockSpace`].
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientVector(Vec<C64>);

impl CoefficientVector {
    pub fn new(amplitudes: Vec<C64>) -> Self {
        Self(amplitudes)
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![ZERO; dim])
    }

    /// Unit amplitude on position `pos`.
    pub fn basis(dim: usize, pos: usize) -> Self {
        let mut c = Self::zeros(dim);
        c.0[pos] = C64::new(1.0, 0.0);
        c
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(C64::norm_sqr).sum::<f64>().sqrt()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::InconsistentState(format!("cannot normalize vector of norm {n}")));
        }
        self.0.iter_mut().for_each(|x| *x /= n);
        Ok(())
    }

    pub fn dot(&self, other: &[C64]) -> C64 {
        dot(&self.0, other)
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.0
    }
}

impl Deref for CoefficientVector {
    type Target = [C64];
    fn deref(&self) -> &[C64] {
        &self.0
    }
}

impl DerefMut for CoefficientVector {
    fn deref_mut(&mut self) -> &mut [C64] {
        &mut self.0
    }
}

/// `sum_I conj(a_I) b_I`.
pub fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).fold(ZERO, |acc, (x, y)| acc + x.conj() * y)
}

/// One- and two-body reduced density matrices.
#[derive(Clone, Debug)]
pub struct DensityMatrices {
    /// `rho1[(i, j)] = <b_i† b_j>`.
    pub rho1: DMatrix<C64>,
    /// `rho2[[i, k, j, l]] = <b_i† b_k† b_l b_j>`.
    pub rho2: Tensor4,
}

/// Sparse map between a space of `N` particles and a space with particles removed.
///
/// Entry `(target, source, factor)` encodes `<target| b† ... |source>` style
/// amplitudes: annihilating from configuration `target` of the larger space lands
/// on `source` of the smaller one with the given factor.
#[derive(Clone, Debug, Default)]
struct Links {
    target: Vec<u32>,
    source: Vec<u32>,
    factor: Vec<f64>,
}

impl Links {
    fn push(&mut self, t: usize, s: usize, f: f64) {
        self.target.push(t as u32);
        self.source.push(s as u32);
        self.factor.push(f);
    }

    fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.target
            .iter()
            .zip(&self.source)
            .zip(&self.factor)
            .map(|((&t, &s), &f)| (t as usize, s as usize, f))
    }
}

/// Single-mode annihilation links of every mode, from `big` into `small`.
fn single_links(big: &FockSpace, small: &FockSpace) -> Vec<Links> {
    let m = big.n_orbitals();
    let mut out = vec![Links::default(); m];
    let mut occ = vec![0u32; m];
    for (pos, cfg) in big.configs().enumerate() {
        occ.copy_from_slice(cfg);
        for j in 0..m {
            let n = occ[j];
            if n == 0 {
                continue;
            }
            occ[j] -= 1;
            if let Some(src) = small.position(&occ) {
                out[j].push(pos, src, f64::from(n).sqrt());
            }
            occ[j] += 1;
        }
    }
    out
}

/// Pair annihilation links `b_l b_k` for `k <= l`, from `big` into `small`.
fn pair_links(big: &FockSpace, small: &FockSpace) -> Vec<Links> {
    let m = big.n_orbitals();
    let mut out = vec![Links::default(); n_pairs(m)];
    let mut occ = vec![0u32; m];
    for (pos, cfg) in big.configs().enumerate() {
        occ.copy_from_slice(cfg);
        for k in 0..m {
            for l in k..m {
                let f = if k == l {
                    f64::from(occ[k]) * (f64::from(occ[k]) - 1.0)
                } else {
                    f64::from(occ[k]) * f64::from(occ[l])
                };
                if f <= 0.0 {
                    continue;
                }
                occ[k] -= 1;
                occ[l] -= 1;
                if let Some(src) = small.position(&occ) {
                    out[pair_index(k, l, m)].push(pos, src, f.sqrt());
                }
                occ[k] += 1;
                occ[l] += 1;
            }
        }
    }
    out
}

/// Shells of an `n`-particle space that hold every image of `shells` after removing `removed` particles.
fn removed_shells(shells: &[usize], removed: usize) -> Vec<usize> {
    let mut out: Vec<usize> = shells
        .iter()
        .flat_map(|&k| (0..=removed).filter_map(move |d| k.checked_sub(d)))
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Configurations with `n_max + 1` particles in `P2`, just outside a general RAS space.
#[derive(Clone, Debug)]
struct Boundary {
    space: FockSpace,
    single: Vec<Links>,
    pair: Vec<Links>,
}

/// Precomputed operator tables for one RAS space.
#[derive(Clone, Debug)]
pub struct OperatorTables {
    space: FockSpace,
    hole1: Option<FockSpace>,
    hole2: Option<FockSpace>,
    single: Vec<Links>,
    pair: Vec<Links>,
    boundary: Option<Boundary>,
    top_shell: Option<(usize, usize)>,
}

impl OperatorTables {
    pub fn new(spec: RasSpec) -> Result<Self> {
        let space = FockSpace::new(spec)?;
        let n = spec.n_particles;
        let (m1, m2) = (spec.m1, spec.m2);
        let shells = spec.allowed_shells();
        let hole1 = (n >= 1)
            .then(|| FockSpace::from_shells(n - 1, m1, m2, &removed_shells(&shells, 1)))
            .transpose()?;
        let hole2 = (n >= 2)
            .then(|| FockSpace::from_shells(n - 2, m1, m2, &removed_shells(&shells, 2)))
            .transpose()?;
        let single = hole1.as_ref().map_or_else(Vec::new, |h| single_links(&space, h));
        let pair = hole2.as_ref().map_or_else(Vec::new, |h| pair_links(&space, h));

        let mut boundary = None;
        let mut top_shell = None;
        if let Scheme::General(k) = spec.scheme {
            if k < n && m2 > 0 {
                if let Some(b) = space.block_of_shell(k) {
                    top_shell = Some((b.offset, b.offset + b.dim()));
                }
                let bspace = FockSpace::from_shells(n, m1, m2, &[k + 1])?;
                let bsingle = hole1.as_ref().map_or_else(Vec::new, |h| single_links(&bspace, h));
                let bpair = hole2.as_ref().map_or_else(Vec::new, |h| pair_links(&bspace, h));
                boundary = Some(Boundary {
                    space: bspace,
                    single: bsingle,
                    pair: bpair,
                });
            }
        }
        Ok(Self {
            space,
            hole1,
            hole2,
            single,
            pair,
            boundary,
            top_shell,
        })
    }

    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    pub fn spec(&self) -> RasSpec {
        *self.space.spec().expect("tables are built from a RAS spec")
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn n_orbitals(&self) -> usize {
        self.space.n_orbitals()
    }

    /// Configurations just outside the space, present for general schemes with `n_max < N`.
    pub fn boundary_space(&self) -> Option<&FockSpace> {
        self.boundary.as_ref().map(|b| &b.space)
    }

    fn check_len(&self, c: &[C64]) -> Result<()> {
        if c.len() != self.dim() {
            return Err(Error::InvalidArgument(format!(
                "coefficient vector has length {}, space dimension is {}",
                c.len(),
                self.dim()
            )));
        }
        Ok(())
    }

    /// Hole vectors `b_j c` as the columns of a `dim(hole1) x M` matrix.
    pub fn hole_vectors(&self, c: &[C64]) -> DMatrix<C64> {
        let m = self.n_orbitals();
        let Some(h1) = &self.hole1 else {
            return DMatrix::zeros(0, m);
        };
        let mut out = DMatrix::zeros(h1.dim(), m);
        for (j, links) in self.single.iter().enumerate() {
            let mut col = out.column_mut(j);
            for (t, s, f) in links.iter() {
                col[s] += c[t] * f;
            }
        }
        out
    }

    /// Pair vectors `b_l b_k c` for `k <= l` as the columns of a `dim(hole2) x M(M+1)/2` matrix.
    pub fn pair_vectors(&self, c: &[C64]) -> DMatrix<C64> {
        let np = n_pairs(self.n_orbitals());
        let Some(h2) = &self.hole2 else {
            return DMatrix::zeros(0, np);
        };
        let mut out = DMatrix::zeros(h2.dim(), np);
        for (p, links) in self.pair.iter().enumerate() {
            let mut col = out.column_mut(p);
            for (t, s, f) in links.iter() {
                col[s] += c[t] * f;
            }
        }
        out
    }

    /// `<b_i† b_j>` for every pair of orbitals.
    pub fn rho1(&self, c: &[C64]) -> Result<DMatrix<C64>> {
        self.check_len(c)?;
        let h = self.hole_vectors(c);
        Ok(h.adjoint() * h)
    }

    /// `<b_i† b_k† b_l b_j>` stored as `rho2[[i, k, j, l]]`.
    pub fn rho2(&self, c: &[C64]) -> Result<Tensor4> {
        self.check_len(c)?;
        let m = self.n_orbitals();
        let d = self.pair_vectors(c);
        // only the upper triangle of the Gram matrix is computed
        let np = n_pairs(m);
        let mut gram = DMatrix::<C64>::zeros(np, np);
        for a in 0..np {
            for b in a..np {
                let g = d.column(a).dotc(&d.column(b));
                gram[(a, b)] = g;
                gram[(b, a)] = g.conj();
            }
        }
        let mut r2 = Tensor4::zeros(m);
        for i in 0..m {
            for k in 0..m {
                let a = pair_index(i, k, m);
                for j in 0..m {
                    for l in 0..m {
                        r2[[i, k, j, l]] = gram[(a, pair_index(j, l, m))];
                    }
                }
            }
        }
        Ok(r2)
    }

    pub fn densities(&self, c: &[C64]) -> Result<DensityMatrices> {
        Ok(DensityMatrices {
            rho1: self.rho1(c)?,
            rho2: self.rho2(c)?,
        })
    }

    /// `c'_I = <Phi_I| b_i† b_j |c>` restricted to the space.
    pub fn apply_excitation(&self, c: &[C64], i: usize, j: usize) -> Result<Vec<C64>> {
        self.check_len(c)?;
        let m = self.n_orbitals();
        if i >= m || j >= m {
            return Err(Error::InvalidArgument(format!(
                "orbital index ({i}, {j}) out of range for M = {m}"
            )));
        }
        let mut g = DMatrix::zeros(m, m);
        g[(i, j)] = C64::new(1.0, 0.0);
        let mut out = vec![ZERO; self.dim()];
        self.add_one_body(&g, c, &mut out);
        Ok(out)
    }

    /// `out += sum_ij g[(i, j)] b_i† b_j c`.
    pub fn add_one_body(&self, g: &DMatrix<C64>, c: &[C64], out: &mut [C64]) {
        if self.hole1.is_none() {
            return;
        }
        let h = self.hole_vectors(c);
        let y = h * g.transpose();
        for (i, links) in self.single.iter().enumerate() {
            let col = y.column(i);
            for (t, s, f) in links.iter() {
                out[t] += col[s] * f;
            }
        }
    }

    /// Two-body operator contracted with the pair vectors, one column per unordered creation pair.
    fn contracted_pairs(&self, v: &Tensor4, d: &DMatrix<C64>) -> DMatrix<C64> {
        let m = self.n_orbitals();
        let np = n_pairs(m);
        let mut w = DMatrix::<C64>::zeros(np, np);
        for i in 0..m {
            for k in 0..m {
                let a = pair_index(i, k, m);
                for j in 0..m {
                    for l in 0..m {
                        w[(pair_index(j, l, m), a)] += v[[i, k, j, l]];
                    }
                }
            }
        }
        d * w
    }

    /// `out += 1/2 sum_ikjl v[[i, k, j, l]] b_i† b_k† b_l b_j c`.
    pub fn add_two_body(&self, v: &Tensor4, c: &[C64], out: &mut [C64]) {
        if self.hole2.is_none() {
            return;
        }
        let e = self.contracted_pairs(v, &self.pair_vectors(c));
        for (p, links) in self.pair.iter().enumerate() {
            let col = e.column(p);
            for (t, s, f) in links.iter() {
                out[t] += col[s] * (0.5 * f);
            }
        }
    }

    /// Full Hamiltonian-like action `sum g b†b c + 1/2 sum v b†b†bb c`.
    pub fn apply_hamiltonian(&self, g: &DMatrix<C64>, v: &Tensor4, c: &[C64]) -> Vec<C64> {
        let mut out = vec![ZERO; self.dim()];
        self.add_one_body(g, c, &mut out);
        self.add_two_body(v, c, &mut out);
        out
    }

    fn boundary(&self) -> Result<&Boundary> {
        self.boundary.as_ref().ok_or_else(|| {
            Error::InvalidState("boundary tensors require a general scheme with n_max < N".into())
        })
    }

    fn require_general(&self) -> Result<()> {
        match self.spec().scheme {
            Scheme::General(_) => Ok(()),
            other => Err(Error::InvalidState(format!(
                "boundary tensors are defined for general schemes only, got {other:?}"
            ))),
        }
    }

    /// Ket `b_{j2}† b_{i1} c_top` on the boundary shell; its conjugate is the bra
    /// `<Psi| b_{i1}† b_{j2} (1 - Pi)`. Empty when no boundary shell exists.
    pub fn boundary_bra(&self, c: &[C64], i1: usize, j2: usize) -> Result<Vec<C64>> {
        self.check_len(c)?;
        self.require_general()?;
        let (m1, m) = (self.space.m1(), self.n_orbitals());
        if i1 >= m1 || j2 < m1 || j2 >= m {
            return Err(Error::InvalidArgument(format!(
                "boundary bra needs i1 in P1 and j2 in P2, got ({i1}, {j2})"
            )));
        }
        if self.boundary.is_none() {
            return Ok(Vec::new());
        }
        Ok(self.boundary_kets(c)?.column(i1 * (m - m1) + (j2 - m1)).iter().copied().collect())
    }

    /// All boundary kets `K_{i'j''}` as columns ordered `i' * m2 + (j'' - m1)`.
    fn boundary_kets(&self, c: &[C64]) -> Result<DMatrix<C64>> {
        let b = self.boundary()?;
        let (m1, m2) = (self.space.m1(), self.space.m2());
        let (lo, hi) = self.top_shell.unwrap_or((0, 0));
        let mut top = vec![ZERO; c.len()];
        top[lo..hi].copy_from_slice(&c[lo..hi]);
        let h = self.hole_vectors(&top);
        let mut k = DMatrix::zeros(b.space.dim(), m1 * m2);
        for i in 0..m1 {
            for j in 0..m2 {
                let mut col = k.column_mut(i * m2 + j);
                for (t, s, f) in b.single[m1 + j].iter() {
                    col[t] += h[(s, i)] * f;
                }
            }
        }
        Ok(k)
    }

    /// `P_B b_p† b_q c` on the boundary shell for every `(p, q)`, columns ordered `p * M + q`.
    fn boundary_excitations(&self, c: &[C64]) -> Result<DMatrix<C64>> {
        let b = self.boundary()?;
        let m = self.n_orbitals();
        let h = self.hole_vectors(c);
        let mut out = DMatrix::zeros(b.space.dim(), m * m);
        for p in 0..m {
            for q in 0..m {
                let mut col = out.column_mut(p * m + q);
                for (t, s, f) in b.single[p].iter() {
                    col[t] += h[(s, q)] * f;
                }
            }
        }
        Ok(out)
    }

    /// `zeta4[[k'', i', l', j'']] = <Psi_{i'}^{j''}|(1 - Pi) b_{k''}† b_{l'} |Psi>`, shape `[m2, m1, m1, m2]`
    /// indexed by orbital positions relative to the start of each block.
    pub fn zeta4(&self, c: &[C64]) -> Result<DenseTensor> {
        self.check_len(c)?;
        self.require_general()?;
        let (m1, m2) = (self.space.m1(), self.space.m2());
        let mut z = DenseTensor::zeros(&[m2, m1, m1, m2]);
        if self.boundary.is_none() {
            return Ok(z);
        }
        let m = m1 + m2;
        let kets = self.boundary_kets(c)?;
        let exc = self.boundary_excitations(c)?;
        for k2 in 0..m2 {
            for i1 in 0..m1 {
                for l1 in 0..m1 {
                    for j2 in 0..m2 {
                        *z.get_mut(&[k2, i1, l1, j2]) = kets
                            .column(i1 * m2 + j2)
                            .dotc(&exc.column((m1 + k2) * m + l1));
                    }
                }
            }
        }
        Ok(z)
    }

    /// `zeta6[[k, m, i', l, n, j'']] = <Psi_{i'}^{j''}|(1 - Pi) b_k† b_m† b_n b_l |Psi>`, shape
    /// `[M, M, m1, M, M, m2]`; the `i'` and `j''` slots are relative to their blocks.
    pub fn zeta6(&self, c: &[C64]) -> Result<DenseTensor> {
        self.check_len(c)?;
        self.require_general()?;
        let (m1, m2) = (self.space.m1(), self.space.m2());
        let m = m1 + m2;
        let mut z = DenseTensor::zeros(&[m, m, m1, m, m, m2]);
        let Some(b) = &self.boundary else {
            return Ok(z);
        };
        if self.hole2.is_none() {
            return Ok(z);
        }
        let kets = self.boundary_kets(c)?;
        let d = self.pair_vectors(c);
        let np = n_pairs(m);
        // g[(u, w)] for bra pair u = (k, m) and ket pair w = (l, n), per (i', j'')
        for r in 0..m1 * m2 {
            let ket = kets.column(r);
            let mut g = DMatrix::<C64>::zeros(np, np);
            for (u, links) in b.pair.iter().enumerate() {
                for (t, s, f) in links.iter() {
                    let w = ket[t].conj() * f;
                    if w == ZERO {
                        continue;
                    }
                    for v in 0..np {
                        g[(u, v)] += w * d[(s, v)];
                    }
                }
            }
            let (i1, j2) = (r / m2, r % m2);
            for k in 0..m {
                for mm in 0..m {
                    let u = pair_index(k, mm, m);
                    for l in 0..m {
                        for n in 0..m {
                            *z.get_mut(&[k, mm, i1, l, n, j2]) = g[(u, pair_index(l, n, m))];
                        }
                    }
                }
            }
        }
        Ok(z)
    }
}

/// `A[[k'', i', l', j'']] = rho1[(i', l')] delta(k'', j'') - rho1[(k'', j'')] delta(i', l')`,
/// shape `[m2, m1, m1, m2]` with block-relative indices.
pub fn build_a_tensor(rho1: &DMatrix<C64>, m1: usize) -> DenseTensor {
    let m = rho1.nrows();
    let m2 = m - m1;
    let mut a = DenseTensor::zeros(&[m2, m1, m1, m2]);
    for k2 in 0..m2 {
        for i1 in 0..m1 {
            for l1 in 0..m1 {
                for j2 in 0..m2 {
                    let mut x = ZERO;
                    if k2 == j2 {
                        x += rho1[(i1, l1)];
                    }
                    if i1 == l1 {
                        x -= rho1[(m1 + k2, m1 + j2)];
                    }
                    *a.get_mut(&[k2, i1, l1, j2]) = x;
                }
            }
        }
    }
    a
}
