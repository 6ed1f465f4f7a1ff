//! Bosonic Fock-space combinatorics: counting, indexing and enumeration of
//! full and restricted-active-space (RAS) configuration spaces.
//!
//! Orbitals are split into a block `P1` (the first `m1` modes) and a block
//! `P2` (the remaining `m2` modes). A configuration belongs to shell `k` when
//! exactly `k` particles occupy `P2`. The coefficient vector of a
//! [`FockSpace`] is stored shell by shell, and within each shell the `P1`
//! sub-configuration index is the slow one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Occupation numbers `(n_1, ..., n_M)` of a single configuration.
pub type OccupationVector = Vec<u32>;

/// Binomial coefficient with the convention `C(a, b) = 0` for `a < b`, `a < 0` or `b < 0`.
pub fn binomial(a: i64, b: i64) -> Result<u64> {
    if a < 0 || b < 0 || a < b {
        return Ok(0);
    }
    let b = b.min(a - b) as u128;
    let mut acc: u128 = 1;
    for i in 0..b {
        // acc * (a - i) / (i + 1) stays an integer at every stage
        acc = acc
            .checked_mul((a as u128) - i)
            .ok_or(Error::Overflow("binomial"))?
            / (i + 1);
    }
    u64::try_from(acc).map_err(|_| Error::Overflow("binomial"))
}

/// Number of ways to place `n` bosons in `m` modes, with `count(0, 0) = 1`.
fn count(n: usize, m: usize) -> Result<u64> {
    if m == 0 {
        return Ok(u64::from(n == 0));
    }
    binomial((n + m - 1) as i64, n as i64)
}

/// Dimension of the full configuration space of `n` bosons in `m` orbitals.
pub fn dim_fci(n: usize, m: usize) -> Result<u64> {
    if m < 1 {
        return Err(Error::InvalidArgument(format!(
            "orbital count must be at least 1, got {m}"
        )));
    }
    count(n, m)
}

/// Excitation scheme restricting the `P2` occupancy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    /// Every shell `0..=N`; identical to `General(N)`.
    Full,
    /// Shells `0..=n_max`.
    General(usize),
    /// Even shells `0, 2, ..., 2*floor(n_max/2)`.
    EvenOnly(usize),
}

/// Orbital partition and excitation scheme of a RAS configuration space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RasSpec {
    pub n_particles: usize,
    pub m1: usize,
    pub m2: usize,
    pub scheme: Scheme,
}

impl RasSpec {
    pub fn new(n_particles: usize, m1: usize, m2: usize, scheme: Scheme) -> Result<Self> {
        let spec = Self {
            n_particles,
            m1,
            m2,
            scheme,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Single-block space with every configuration of `m` orbitals.
    pub fn full(n_particles: usize, m: usize) -> Result<Self> {
        Self::new(n_particles, m, 0, Scheme::Full)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m1 < 1 {
            return Err(Error::InvalidArgument("m1 must be at least 1".into()));
        }
        match self.scheme {
            Scheme::General(k) | Scheme::EvenOnly(k) if k > self.n_particles => {
                Err(Error::InvalidArgument(format!(
                    "n_max = {k} exceeds the particle number {}",
                    self.n_particles
                )))
            }
            _ => Ok(()),
        }
    }

    pub fn n_orbitals(&self) -> usize {
        self.m1 + self.m2
    }

    /// Highest `P2` occupancy allowed by the scheme.
    pub fn n_max(&self) -> usize {
        match self.scheme {
            Scheme::Full => self.n_particles,
            Scheme::General(k) => k,
            Scheme::EvenOnly(k) => k - k % 2,
        }
    }

    /// True when the space contains every configuration of `M` orbitals.
    pub fn is_full(&self) -> bool {
        match self.scheme {
            Scheme::Full => true,
            Scheme::General(k) => k >= self.n_particles || self.m2 == 0,
            Scheme::EvenOnly(_) => self.m2 == 0 || self.n_particles == 0,
        }
    }

    /// Allowed `P2` occupancies in ascending order.
    pub fn allowed_shells(&self) -> Vec<usize> {
        let top = self.n_max();
        match self.scheme {
            Scheme::EvenOnly(_) => (0..=top).step_by(2).collect(),
            _ => (0..=top).collect(),
        }
    }
}

/// Dimension of the RAS space defined by `spec`.
pub fn dim_ras(spec: &RasSpec) -> Result<u64> {
    spec.validate()?;
    let n = spec.n_particles;
    spec.allowed_shells().into_iter().try_fold(0u64, |acc, k| {
        let block = count(k, spec.m2)?
            .checked_mul(count(n - k, spec.m1)?)
            .ok_or(Error::Overflow("dim_ras"))?;
        acc.checked_add(block).ok_or(Error::Overflow("dim_ras"))
    })
}

/// One-based index `J` of `occ` among all configurations of `n` bosons in `m = occ.len()` modes.
///
/// Configurations are ordered lexicographically with larger leading occupations first,
/// so `|n, 0, ..., 0>` has index 1.
pub fn index_of(occ: &[u32], n: usize) -> Result<u64> {
    let m = occ.len();
    if m < 1 {
        return Err(Error::InvalidArgument("empty occupation vector".into()));
    }
    let total: u64 = occ.iter().map(|&x| u64::from(x)).sum();
    if total != n as u64 {
        return Err(Error::InvalidArgument(format!(
            "occupations sum to {total}, expected {n}"
        )));
    }
    let (n, m) = (n as i64, m as i64);
    let mut partial = 0i64;
    let mut j = 1u64;
    for (k, &nk) in (1..=m).zip(occ) {
        partial += i64::from(nk);
        j += binomial(n + m - 1 - k - partial, m - k)?;
    }
    Ok(j)
}

/// Precomputed binomial table used by the hot-path index arithmetic.
#[derive(Clone, Debug)]
struct BinomialTable {
    cols: usize,
    data: Vec<u64>,
}

impl BinomialTable {
    fn new(max_a: usize, max_b: usize) -> Result<Self> {
        let cols = max_b + 1;
        let mut data = vec![0; (max_a + 1) * cols];
        for a in 0..=max_a {
            for b in 0..=max_b {
                data[a * cols + b] = binomial(a as i64, b as i64)?;
            }
        }
        Ok(Self { cols, data })
    }

    #[inline]
    fn get(&self, a: i64, b: i64) -> u64 {
        if a < 0 || b < 0 || a < b {
            0
        } else {
            self.data[a as usize * self.cols + b as usize]
        }
    }

    /// Zero-based version of [`index_of`] without validation.
    #[inline]
    fn index0(&self, occ: &[u32], n: usize) -> usize {
        let m = occ.len() as i64;
        let n = n as i64;
        let mut partial = 0i64;
        let mut j = 0u64;
        for (k, &nk) in (1..=m).zip(occ) {
            partial += i64::from(nk);
            j += self.get(n + m - 1 - k - partial, m - k);
        }
        j as usize
    }
}

/// Position of a configuration inside a [`FockSpace`], split into its shell components.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RasIndex {
    pub j_p1: usize,
    pub j_p2: usize,
    pub n_exc: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ShellBlock {
    /// `P2` occupancy of the shell.
    pub n_exc: usize,
    /// First position of the shell in the flattened vector.
    pub offset: usize,
    pub dim_p1: usize,
    pub dim_p2: usize,
}

impl ShellBlock {
    pub fn dim(&self) -> usize {
        self.dim_p1 * self.dim_p2
    }
}

/// An enumerated configuration space made of whole shells.
///
/// Besides RAS spaces proper this also represents the particle-removed and
/// boundary spaces needed by the operator algebra, which is why it can be
/// built from an arbitrary shell list.
#[derive(Clone, Debug)]
pub struct FockSpace {
    n_particles: usize,
    m1: usize,
    m2: usize,
    spec: Option<RasSpec>,
    blocks: Vec<ShellBlock>,
    shell_lookup: Vec<Option<usize>>,
    configs: Vec<u32>,
    binom: BinomialTable,
}

impl FockSpace {
    /// Space of the RAS specification, enumerated in index order.
    pub fn new(spec: RasSpec) -> Result<Self> {
        spec.validate()?;
        let dim = dim_ras(&spec)?;
        if dim > u32::MAX as u64 {
            return Err(Error::Overflow("configuration space too large to enumerate"));
        }
        let mut space = Self::from_shells(spec.n_particles, spec.m1, spec.m2, &spec.allowed_shells())?;
        space.spec = Some(spec);
        Ok(space)
    }

    /// Space of `n` bosons containing the listed `P2` shells (out-of-range shells are ignored).
    pub fn from_shells(n: usize, m1: usize, m2: usize, shells: &[usize]) -> Result<Self> {
        let m = m1 + m2;
        if m < 1 {
            return Err(Error::InvalidArgument("no orbitals".into()));
        }
        let mut sorted: Vec<usize> = shells.iter().copied().filter(|&k| k <= n).collect();
        sorted.sort_unstable();
        sorted.dedup();
        let binom = BinomialTable::new(n + m, m)?;
        let mut blocks = Vec::new();
        let mut shell_lookup = vec![None; n + 1];
        let mut offset = 0usize;
        for k in sorted {
            let dim_p1 = count(n - k, m1)? as usize;
            let dim_p2 = count(k, m2)? as usize;
            if dim_p1 * dim_p2 == 0 {
                continue;
            }
            shell_lookup[k] = Some(blocks.len());
            blocks.push(ShellBlock {
                n_exc: k,
                offset,
                dim_p1,
                dim_p2,
            });
            offset = offset
                .checked_add(dim_p1 * dim_p2)
                .ok_or(Error::Overflow("space dimension"))?;
        }
        let mut configs = Vec::with_capacity(offset * m);
        for b in &blocks {
            let p1 = enumerate_modes(n - b.n_exc, m1);
            let p2 = enumerate_modes(b.n_exc, m2);
            for a in p1.chunks_exact(m1.max(1)) {
                if m2 == 0 {
                    configs.extend_from_slice(a);
                    continue;
                }
                for c in p2.chunks_exact(m2) {
                    configs.extend_from_slice(a);
                    configs.extend_from_slice(c);
                }
            }
        }
        Ok(Self {
            n_particles: n,
            m1,
            m2,
            spec: None,
            blocks,
            shell_lookup,
            configs,
            binom,
        })
    }

    pub fn spec(&self) -> Option<&RasSpec> {
        self.spec.as_ref()
    }

    pub fn n_particles(&self) -> usize {
        self.n_particles
    }

    pub fn m1(&self) -> usize {
        self.m1
    }

    pub fn m2(&self) -> usize {
        self.m2
    }

    pub fn n_orbitals(&self) -> usize {
        self.m1 + self.m2
    }

    pub fn dim(&self) -> usize {
        self.configs.len() / self.n_orbitals()
    }

    pub fn blocks(&self) -> &[ShellBlock] {
        &self.blocks
    }

    pub fn block_of_shell(&self, n_exc: usize) -> Option<&ShellBlock> {
        self.shell_lookup
            .get(n_exc)
            .copied()
            .flatten()
            .map(|b| &self.blocks[b])
    }

    /// Occupations of the configuration at position `pos`.
    pub fn config(&self, pos: usize) -> &[u32] {
        let m = self.n_orbitals();
        &self.configs[pos * m..(pos + 1) * m]
    }

    pub fn configs(&self) -> impl Iterator<Item = &[u32]> {
        self.configs.chunks_exact(self.n_orbitals())
    }

    /// Shell components of `occ`, or `None` when its shell is not part of the space.
    pub fn ras_index(&self, occ: &[u32]) -> Option<RasIndex> {
        if occ.len() != self.n_orbitals() {
            return None;
        }
        let n_exc: usize = occ[self.m1..].iter().map(|&x| x as usize).sum();
        let n_p1: usize = occ[..self.m1].iter().map(|&x| x as usize).sum();
        if n_exc + n_p1 != self.n_particles {
            return None;
        }
        self.block_of_shell(n_exc)?;
        let j_p2 = if self.m2 == 0 {
            0
        } else {
            self.binom.index0(&occ[self.m1..], n_exc)
        };
        Some(RasIndex {
            j_p1: self.binom.index0(&occ[..self.m1], n_p1),
            j_p2,
            n_exc,
        })
    }

    /// Zero-based position of `occ` in the coefficient vector, `None` when outside the space.
    #[inline]
    pub fn position(&self, occ: &[u32]) -> Option<usize> {
        let idx = self.ras_index(occ)?;
        let b = self.block_of_shell(idx.n_exc)?;
        Some(b.offset + idx.j_p1 * b.dim_p2 + idx.j_p2)
    }
}

/// Zero-based position of `occ` in `space`; `None` signals a configuration outside the space.
pub fn ras_index_of(occ: &[u32], space: &FockSpace) -> Option<usize> {
    space.position(occ)
}

/// All configurations of `space` in index order.
pub fn enumerate_space(space: &FockSpace) -> Vec<OccupationVector> {
    space.configs().map(<[u32]>::to_vec).collect()
}

/// Flattened configurations of `n` bosons in `m` modes, largest leading occupation first.
fn enumerate_modes(n: usize, m: usize) -> Vec<u32> {
    let mut out = Vec::new();
    if m == 0 {
        return out;
    }
    let mut cur = vec![0u32; m];
    fill(&mut cur, 0, n as u32, &mut out);
    out
}

fn fill(cur: &mut [u32], pos: usize, left: u32, out: &mut Vec<u32>) {
    if pos + 1 == cur.len() {
        cur[pos] = left;
        out.extend_from_slice(cur);
        return;
    }
    for k in (0..=left).rev() {
        cur[pos] = k;
        fill(cur, pos + 1, left - k, out);
    }
    cur[pos] = 0;
}

/// Leading-order operation counts of one derivative evaluation.
///
/// The grid term `2 M^4 n_grid^2` is common to every method.
pub fn operation_count_mctdhb(n: usize, m: usize, n_grid: usize) -> Result<i128> {
    let m4 = (m as i128).pow(4);
    Ok(2 * m4 * ((n_grid as i128).pow(2) + dim_fci(n, m)? as i128))
}

/// Operation count of the RAS method for the given partition and scheme.
pub fn operation_count_ras(spec: &RasSpec, n_grid: usize) -> Result<i128> {
    let m = spec.n_orbitals() as i128;
    let m4 = m.pow(4);
    let v = dim_ras(spec)? as i128;
    let grid = (n_grid as i128).pow(2);
    Ok(match spec.scheme {
        Scheme::Full => operation_count_mctdhb(spec.n_particles, spec.n_orbitals(), n_grid)?,
        Scheme::EvenOnly(_) => 2 * m4 * (grid + v) + m4,
        Scheme::General(k) => {
            let top = count(k, spec.m2)? as i128 * count(spec.n_particles - k, spec.m1)? as i128;
            2 * m4 * (grid + v) + m4 * m * m * top
        }
    })
}

/// Operation-count gain of the RAS method over MCTDHB with the same orbital number.
///
/// Even schemes: `2 M^4 (V_FCI - V - 1/2)`; the half term is `M^4`, so the
/// result is an exact integer (evaluating `4 M^4 (...)` and halving gives the
/// same value without rounding). General schemes:
/// `2 M^4 (V_FCI - V - M^2 V_top / 2)` with `V_top` the top-shell dimension.
/// `Full` returns 0.
pub fn cost_delta(n: usize, m1: usize, m2: usize, scheme: Scheme, n_grid: usize) -> Result<i128> {
    let spec = RasSpec::new(n, m1, m2, scheme)?;
    Ok(operation_count_mctdhb(n, m1 + m2, n_grid)? - operation_count_ras(&spec, n_grid)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_convention() {
        assert_eq!(binomial(5, 2).unwrap(), 10);
        assert_eq!(binomial(-1, 0).unwrap(), 0);
        assert_eq!(binomial(2, 3).unwrap(), 0);
        assert_eq!(binomial(0, 0).unwrap(), 1);
        assert!(binomial(200, 100).is_err());
    }

    #[test]
    fn fci_counts() {
        assert_eq!(dim_fci(100, 5).unwrap(), 4_598_126);
        assert_eq!(dim_fci(100, 3).unwrap(), 5151);
        assert_eq!(dim_fci(100, 2).unwrap(), 101);
        assert_eq!(dim_fci(37, 1).unwrap(), 1);
        assert!(dim_fci(3, 0).is_err());
    }

    #[test]
    fn ras_counts() {
        let d = |m1, m2, s| dim_ras(&RasSpec::new(100, m1, m2, s).unwrap()).unwrap();
        assert_eq!(d(1, 1, Scheme::General(2)), 3);
        assert_eq!(d(1, 4, Scheme::General(2)), 15);
        assert_eq!(d(1, 4, Scheme::General(8)), 495);
        assert_eq!(d(1, 4, Scheme::EvenOnly(8)), 295);
        assert_eq!(d(1, 1, Scheme::EvenOnly(2)), 2);
        assert_eq!(d(1, 2, Scheme::Full), 5151);
    }

    #[test]
    fn small_indices() {
        assert_eq!(index_of(&[2, 0], 2).unwrap(), 1);
        assert_eq!(index_of(&[1, 1], 2).unwrap(), 2);
        assert_eq!(index_of(&[0, 2], 2).unwrap(), 3);
        assert_eq!(index_of(&[7], 7).unwrap(), 1);
        assert!(index_of(&[1, 1], 3).is_err());
    }

    #[test]
    fn shell_order() {
        let s = FockSpace::new(RasSpec::new(2, 1, 1, Scheme::Full).unwrap()).unwrap();
        assert_eq!(enumerate_space(&s), vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
        let e = FockSpace::new(RasSpec::new(2, 1, 1, Scheme::EvenOnly(2)).unwrap()).unwrap();
        assert_eq!(enumerate_space(&e), vec![vec![2, 0], vec![0, 2]]);
    }

    #[test]
    fn excluded_shell_is_absent() {
        let s = FockSpace::new(RasSpec::new(100, 1, 4, Scheme::EvenOnly(2)).unwrap()).unwrap();
        assert!(ras_index_of(&[98, 2, 0, 0, 0], &s).is_some());
        assert!(ras_index_of(&[99, 1, 0, 0, 0], &s).is_none());
    }

    #[test]
    fn even_cost_gain_is_positive() {
        for m in 2..=8 {
            for n in [2, 10, 50] {
                for k in (0..n).step_by(2) {
                    let d = cost_delta(n, 1, m - 1, Scheme::EvenOnly(k), 101).unwrap();
                    assert!(d > 0, "n={n} m={m} k={k}");
                }
            }
        }
    }

    #[test]
    fn general_cost_changes_sign() {
        let signs: Vec<bool> = (0..=10)
            .map(|k| cost_delta(10, 1, 4, Scheme::General(k), 101).unwrap() > 0)
            .collect();
        assert!(signs[1]);
        assert!(!signs[9]);
    }

    #[test]
    fn degenerate_cost_formula() {
        let m4 = 1i128;
        let d = cost_delta(4, 1, 0, Scheme::General(0), 10).unwrap();
        // V_FCI = V = 1, so only the extra term remains.
        assert_eq!(d, -m4);
    }
}
