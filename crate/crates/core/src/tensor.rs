//! Small dense tensors over orbital indices.

use std::ops::{Index, IndexMut};

use num_complex::Complex64 as C64;

/// Rank-4 tensor with every index running over `0..m`, stored row-major.
///
/// The meaning of the slots follows the operator it represents:
/// for a two-body tensor `v[[p, r, q, s]]` is the element of `b_p† b_r† b_s b_q`,
/// and for a two-body density `rho2[[i, k, j, l]] = <b_i† b_k† b_l b_j>`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor4 {
    m: usize,
    data: Vec<C64>,
}

impl Tensor4 {
    pub fn zeros(m: usize) -> Self {
        Self {
            m,
            data: vec![C64::new(0.0, 0.0); m.pow(4)],
        }
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    #[inline]
    fn offset(&self, [a, b, c, d]: [usize; 4]) -> usize {
        ((a * self.m + b) * self.m + c) * self.m + d
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    /// Largest absolute entry difference.
    pub fn max_abs_diff(&self, other: &Tensor4) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Index<[usize; 4]> for Tensor4 {
    type Output = C64;
    #[inline]
    fn index(&self, idx: [usize; 4]) -> &C64 {
        &self.data[self.offset(idx)]
    }
}

impl IndexMut<[usize; 4]> for Tensor4 {
    #[inline]
    fn index_mut(&mut self, idx: [usize; 4]) -> &mut C64 {
        let o = self.offset(idx);
        &mut self.data[o]
    }
}

/// Dense tensor of arbitrary shape, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseTensor {
    shape: Vec<usize>,
    data: Vec<C64>,
}

impl DenseTensor {
    pub fn zeros(shape: &[usize]) -> Self {
        Self {
            shape: shape.to_vec(),
            data: vec![C64::new(0.0, 0.0); shape.iter().product()],
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    #[inline]
    fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.shape.len());
        idx.iter()
            .zip(&self.shape)
            .fold(0, |acc, (&i, &n)| {
                debug_assert!(i < n);
                acc * n + i
            })
    }

    pub fn get(&self, idx: &[usize]) -> C64 {
        self.data[self.offset(idx)]
    }

    pub fn get_mut(&mut self, idx: &[usize]) -> &mut C64 {
        let o = self.offset(idx);
        &mut self.data[o]
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }
}

/// Index of the unordered pair `(i, j)` with `i <= j` among `m` orbitals.
#[inline]
pub fn pair_index(i: usize, j: usize, m: usize) -> usize {
    let (a, b) = if i <= j { (i, j) } else { (j, i) };
    a * m - a * (a + 1) / 2 + b
}

pub fn n_pairs(m: usize) -> usize {
    m * (m + 1) / 2
}
