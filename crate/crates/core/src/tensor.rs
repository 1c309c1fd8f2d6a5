//! Dense coefficient tensors with rational-function entries.

use std::fmt;
use std::sync::Arc;

use crate::algebra::{RatFn, Vars};

#[derive(Clone, PartialEq, Eq)]
pub struct Tensor {
    dim: usize,
    rank: usize,
    data: Vec<RatFn>,
}

impl Tensor {
    pub fn zeros(vars: &Arc<Vars>, rank: usize) -> Self {
        let dim = vars.len();
        Tensor { dim, rank, data: vec![RatFn::zero(vars); dim.pow(rank as u32)] }
    }

    pub fn from_fn(vars: &Arc<Vars>, rank: usize, mut f: impl FnMut(&[usize]) -> RatFn) -> Self {
        let mut t = Tensor::zeros(vars, rank);
        let mut idx = vec![0; rank];
        for k in 0..t.data.len() {
            t.unflatten(k, &mut idx);
            t.data[k] = f(&idx);
        }
        t
    }

    pub fn from_matrix(m: &[Vec<RatFn>]) -> Self {
        let vars = m[0][0].vars().clone();
        Tensor::from_fn(&vars, 2, |i| m[i[0]][i[1]].clone())
    }

    pub fn to_matrix(&self) -> Vec<Vec<RatFn>> {
        assert_eq!(self.rank, 2);
        (0..self.dim).map(|i| (0..self.dim).map(|j| self.get(&[i, j]).clone()).collect()).collect()
    }

    fn unflatten(&self, mut k: usize, idx: &mut [usize]) {
        for slot in idx.iter_mut().rev() {
            *slot = k % self.dim;
            k /= self.dim;
        }
    }

    fn flat(&self, idx: &[usize]) -> usize {
        assert_eq!(idx.len(), self.rank, "tensor index arity");
        idx.iter().fold(0, |acc, &i| {
            assert!(i < self.dim, "tensor index out of range");
            acc * self.dim + i
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn get(&self, idx: &[usize]) -> &RatFn {
        &self.data[self.flat(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: RatFn) {
        let k = self.flat(idx);
        self.data[k] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(RatFn::is_zero)
    }

    /// All index tuples in row-major order.
    pub fn indices(&self) -> Vec<Vec<usize>> {
        let mut idx = vec![0; self.rank];
        (0..self.data.len())
            .map(|k| {
                self.unflatten(k, &mut idx);
                idx.clone()
            })
            .collect()
    }

    pub fn add(&self, other: &Tensor) -> Tensor {
        assert_eq!((self.dim, self.rank), (other.dim, other.rank));
        Tensor { dim: self.dim, rank: self.rank, data: self.data.iter().zip(&other.data).map(|(a, b)| a.add(b)).collect() }
    }

    pub fn sub(&self, other: &Tensor) -> Tensor {
        assert_eq!((self.dim, self.rank), (other.dim, other.rank));
        Tensor { dim: self.dim, rank: self.rank, data: self.data.iter().zip(&other.data).map(|(a, b)| a.sub(b)).collect() }
    }

    /// Checks `T[..] = sign · T[perm(..)]` for every index tuple.
    pub fn has_symmetry(&self, perm: &[usize], sign: i32) -> bool {
        self.indices().iter().all(|idx| {
            let p: Vec<usize> = perm.iter().map(|&k| idx[k]).collect();
            let other = self.get(&p);
            if sign > 0 {
                self.get(idx) == other
            } else {
                self.get(idx).add(other).is_zero()
            }
        })
    }

    /// Antisymmetric in every pair of indices.
    pub fn is_totally_skew(&self) -> bool {
        (0..self.rank).all(|a| {
            ((a + 1)..self.rank).all(|b| {
                let mut perm: Vec<usize> = (0..self.rank).collect();
                perm.swap(a, b);
                self.has_symmetry(&perm, -1)
            })
        })
    }

    /// Index tuples whose entries are nonzero.
    pub fn support(&self) -> Vec<(Vec<usize>, &RatFn)> {
        self.indices().into_iter().zip(&self.data).filter(|(_, v)| !v.is_zero()).collect()
    }
}

/// Sign of an index tuple read as a permutation: 0 when an index repeats,
/// otherwise ±1 by the parity of inversions.
pub fn permutation_sign(idx: &[usize]) -> i64 {
    let mut sign = 1;
    for a in 0..idx.len() {
        for b in (a + 1)..idx.len() {
            match idx[a].cmp(&idx[b]) {
                std::cmp::Ordering::Equal => return 0,
                std::cmp::Ordering::Greater => sign = -sign,
                std::cmp::Ordering::Less => {}
            }
        }
    }
    sign
}

impl fmt::Debug for Tensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut m = f.debug_map();
        for (idx, v) in self.support() {
            m.entry(&idx, &v.to_string());
        }
        m.finish()
    }
}
