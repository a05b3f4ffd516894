//! Sparse complex operators on single-site and L-fold tensor-product spaces.
//!
//! Basis convention for `(C^n)^{⊗L}`: site 1 is the most significant base-`n`
//! digit, so the index of `|i_1 … i_L⟩` (0-based digits) is
//! `i_1 n^{L-1} + … + i_L`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{QlabError, Result};

/// Entries with magnitude below this are never stored.
pub const DROP_TOL: f64 = 1e-14;

/// Sparse square complex matrix with deterministic (row, col) iteration order.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumOperator {
    dim: usize,
    entries: BTreeMap<(usize, usize), C64>,
}

impl QuantumOperator {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, entries: BTreeMap::new() }
    }

    pub fn identity(dim: usize) -> Self {
        let mut op = Self::zeros(dim);
        for i in 0..dim {
            op.entries.insert((i, i), C64::new(1.0, 0.0));
        }
        op
    }

    /// Matrix unit `e_ab` on `C^n`, with 1-based `a`, `b`.
    pub fn matrix_unit(n: usize, a: usize, b: usize) -> Self {
        assert!(a >= 1 && a <= n && b >= 1 && b <= n, "matrix unit index out of range");
        let mut op = Self::zeros(n);
        op.entries.insert((a - 1, b - 1), C64::new(1.0, 0.0));
        op
    }

    pub fn from_dense(m: &DMatrix<C64>) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "operator must be square");
        let mut op = Self::zeros(m.nrows());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                op.set(i, j, m[(i, j)]);
            }
        }
        op
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (&(i, j), &v) in &self.entries {
            m[(i, j)] = v;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.entries.get(&(i, j)).copied().unwrap_or_default()
    }

    /// Stores `v` at `(i, j)`, pruning it if it falls below [`DROP_TOL`].
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        assert!(i < self.dim && j < self.dim, "entry out of range");
        if v.norm() < DROP_TOL {
            self.entries.remove(&(i, j));
        } else {
            self.entries.insert((i, j), v);
        }
    }

    pub fn add_to(&mut self, i: usize, j: usize, v: C64) {
        let cur = self.get(i, j);
        self.set(i, j, cur + v);
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        self.entries.iter().map(|(&(i, j), &v)| (i, j, v))
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = Self::zeros(self.dim);
        for (i, j, v) in self.iter() {
            out.set(i, j, v * s);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch in add");
        let mut out = self.clone();
        for (i, j, v) in other.iter() {
            out.add_to(i, j, v);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch in mul");
        let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); other.dim];
        for (k, j, v) in other.iter() {
            rows[k].push((j, v));
        }
        let mut acc: BTreeMap<(usize, usize), C64> = BTreeMap::new();
        for (i, k, a) in self.iter() {
            for &(j, b) in &rows[k] {
                *acc.entry((i, j)).or_default() += a * b;
            }
        }
        let mut out = Self::zeros(self.dim);
        for ((i, j), v) in acc {
            out.set(i, j, v);
        }
        out
    }

    pub fn trace(&self) -> C64 {
        self.entries.iter().filter(|((i, j), _)| i == j).map(|(_, v)| *v).sum()
    }

    /// Largest entry magnitude (0 for the zero operator).
    pub fn max_abs(&self) -> f64 {
        self.entries.values().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.dim);
        let mut out = vec![C64::default(); self.dim];
        for (i, j, a) in self.iter() {
            out[i] += a * v[j];
        }
        out
    }
}

/// Kronecker product of a list of square operators, first factor most significant.
pub fn kron(ops: &[QuantumOperator]) -> Result<QuantumOperator> {
    let (first, rest) = ops
        .split_first()
        .ok_or_else(|| QlabError::Usage("kron of an empty operator list".into()))?;
    let mut acc = first.clone();
    for b in rest {
        let dim = acc.dim * b.dim;
        let mut out = QuantumOperator::zeros(dim);
        for (i, j, x) in acc.iter() {
            for (k, l, y) in b.iter() {
                out.set(i * b.dim + k, j * b.dim + l, x * y);
            }
        }
        acc = out;
    }
    Ok(acc)
}

/// Swap operator `P = Σ_ab e_ab ⊗ e_ba` on `C^n ⊗ C^n`.
pub fn permutation_op(n: usize) -> QuantumOperator {
    let mut p = QuantumOperator::zeros(n * n);
    for a in 0..n {
        for b in 0..n {
            p.set(a * n + b, b * n + a, C64::new(1.0, 0.0));
        }
    }
    p
}

/// Max-entry magnitude of `AB - BA`.
pub fn comm_norm(a: &QuantumOperator, b: &QuantumOperator) -> Result<f64> {
    if a.dim != b.dim {
        return Err(QlabError::Dimension { expected: a.dim, found: b.dim });
    }
    Ok(a.mul(b).sub(&b.mul(a)).max_abs())
}

/// Single-site operator `op` acting on site `site` (1-based) of an `L`-site chain.
pub fn site_operator(op: &QuantumOperator, site: usize, len: usize) -> QuantumOperator {
    assert!(site >= 1 && site <= len);
    let n = op.dim;
    let factors: Vec<QuantumOperator> = (1..=len)
        .map(|l| if l == site { op.clone() } else { QuantumOperator::identity(n) })
        .collect();
    kron(&factors).expect("non-empty factor list")
}

/// Decomposes a basis index of `(C^n)^{⊗L}` into 0-based site digits, site 1 first.
pub fn digits(mut index: usize, n: usize, len: usize) -> Vec<usize> {
    let mut d = vec![0; len];
    for slot in d.iter_mut().rev() {
        *slot = index % n;
        index /= n;
    }
    d
}

pub fn index_of(digits: &[usize], n: usize) -> usize {
    digits.iter().fold(0, |acc, &d| acc * n + d)
}
