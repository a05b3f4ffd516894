//! First-order Lax operators: evaluation, canonical (any index set), partonic.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_complex::Complex64 as C64;

use crate::error::{QlabError, Result};
use crate::glrep::{trivial_rep, CarrierOp, GlRep};
use crate::oscillator::{FockBasis, FockTruncation, Mode, ModeRegistry, NormalOrderedOp};
use crate::tensor::{permutation_op, QuantumOperator};

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Sorted subset of `{1, …, n}`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IndexSet {
    n: usize,
    elems: Vec<usize>,
}

impl IndexSet {
    pub fn new(n: usize, elems: &[usize]) -> Result<Self> {
        let set: BTreeSet<usize> = elems.iter().copied().collect();
        if set.len() != elems.len() {
            return Err(QlabError::Usage(format!("repeated index in {elems:?}")));
        }
        if let Some(&bad) = set.iter().find(|&&a| a == 0 || a > n) {
            return Err(QlabError::Usage(format!("index {bad} outside 1..={n}")));
        }
        Ok(Self { n, elems: set.into_iter().collect() })
    }

    pub fn empty(n: usize) -> Self {
        Self { n, elems: vec![] }
    }

    pub fn full(n: usize) -> Self {
        Self { n, elems: (1..=n).collect() }
    }

    pub fn singleton(n: usize, a: usize) -> Result<Self> {
        Self::new(n, &[a])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn elems(&self) -> &[usize] {
        &self.elems
    }

    pub fn contains(&self, a: usize) -> bool {
        self.elems.binary_search(&a).is_ok()
    }

    /// 1-based position of `a` inside the set.
    pub fn position(&self, a: usize) -> Option<usize> {
        self.elems.binary_search(&a).ok().map(|k| k + 1)
    }

    pub fn complement(&self) -> Vec<usize> {
        (1..=self.n).filter(|&a| !self.contains(a)).collect()
    }

    pub fn disjoint_union(&self, other: &Self) -> Result<Self> {
        if self.elems.iter().any(|&a| other.contains(a)) {
            return Err(QlabError::Overlap);
        }
        let mut all = self.elems.clone();
        all.extend_from_slice(&other.elems);
        Self::new(self.n, &all)
    }

    pub fn with(&self, a: usize) -> Result<Self> {
        self.disjoint_union(&Self::singleton(self.n, a)?)
    }

    /// All `2^n` subsets, ordered by size then lexicographically.
    pub fn all_subsets(n: usize) -> Vec<Self> {
        let mut out: Vec<Self> = (0u32..(1 << n))
            .map(|mask| Self { n, elems: (1..=n).filter(|&a| mask & (1 << (a - 1)) != 0).collect() })
            .collect();
        out.sort_by(|a, b| (a.len(), &a.elems).cmp(&(b.len(), &b.elems)));
        out
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.elems.iter().map(|a| a.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// `n × n` matrix with [`CarrierOp`] entries, row-major, 1-based accessors.
#[derive(Clone, Debug, PartialEq)]
pub struct OpMatrix {
    n: usize,
    d: usize,
    entries: Vec<CarrierOp>,
}

impl OpMatrix {
    pub fn zero(n: usize, d: usize) -> Self {
        Self { n, d, entries: vec![CarrierOp::zero(d); n * n] }
    }

    pub fn identity(n: usize, d: usize) -> Self {
        let mut m = Self::zero(n, d);
        for i in 1..=n {
            m.set(i, i, CarrierOp::identity(d));
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn carrier_dim(&self) -> usize {
        self.d
    }

    pub fn get(&self, i: usize, j: usize) -> &CarrierOp {
        &self.entries[(i - 1) * self.n + (j - 1)]
    }

    pub fn set(&mut self, i: usize, j: usize, x: CarrierOp) {
        assert_eq!(x.dim(), self.d, "carrier dimension mismatch");
        self.entries[(i - 1) * self.n + (j - 1)] = x;
    }

    /// Sets a `d = 1` entry from an oscillator polynomial.
    pub fn set_osc(&mut self, i: usize, j: usize, x: NormalOrderedOp) {
        let d = self.d;
        self.set(i, j, CarrierOp::from_osc(d, &x));
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &CarrierOp)> {
        let n = self.n;
        self.entries.iter().enumerate().map(move |(k, x)| (k / n + 1, k % n + 1, x))
    }

    pub fn add(&self, other: &Self) -> Self {
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a.add(b)).collect();
        Self { n: self.n, d: self.d, entries }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a.sub(b)).collect();
        Self { n: self.n, d: self.d, entries }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { n: self.n, d: self.d, entries: self.entries.iter().map(|a| a.scale(s)).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let mut out = Self::zero(self.n, self.d);
        for i in 1..=self.n {
            for j in 1..=self.n {
                let mut acc = CarrierOp::zero(self.d);
                for k in 1..=self.n {
                    let (a, b) = (self.get(i, k), other.get(k, j));
                    if !a.is_zero() && !b.is_zero() {
                        acc = acc.add(&a.mul(b));
                    }
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    pub fn max_coeff(&self) -> f64 {
        self.entries.iter().map(|x| x.max_coeff()).fold(0.0, f64::max)
    }

    pub fn modes(&self) -> Vec<Mode> {
        let set: BTreeSet<Mode> = self.entries.iter().flat_map(|x| x.modes()).collect();
        set.into_iter().collect()
    }

    pub fn lowering_degree(&self) -> u32 {
        self.entries.iter().map(|x| x.lowering_degree()).max().unwrap_or(0)
    }

    /// Matrix on `C^n ⊗ C^d ⊗ Fock(basis)`.
    pub fn matrix(&self, basis: &FockBasis) -> QuantumOperator {
        let inner = self.d * basis.len();
        let mut m = QuantumOperator::zeros(self.n * inner);
        for (i, j, x) in self.entries() {
            for (r, s, v) in x.matrix(basis).iter() {
                m.set((i - 1) * inner + r, (j - 1) * inner + s, v);
            }
        }
        m
    }
}

/// `L(z) = z·lead + konst`.
#[derive(Clone, Debug, PartialEq)]
pub struct LaxMatrix {
    pub lead: OpMatrix,
    pub konst: OpMatrix,
}

impl LaxMatrix {
    pub fn n(&self) -> usize {
        self.lead.n()
    }

    pub fn carrier_dim(&self) -> usize {
        self.lead.carrier_dim()
    }

    pub fn at(&self, z: C64) -> OpMatrix {
        self.lead.scale(z).add(&self.konst)
    }

    /// `L(z + s)` as a new Lax matrix.
    pub fn shifted(&self, s: C64) -> Self {
        Self { lead: self.lead.clone(), konst: self.at(s) }
    }

    pub fn modes(&self) -> Vec<Mode> {
        let mut m = self.lead.modes();
        m.extend(self.konst.modes());
        m.sort_unstable();
        m.dedup();
        m
    }

    /// Rank of the scalar part of the leading coefficient (exact for 0/1 patterns).
    pub fn lead_rank(&self) -> usize {
        let n = self.n();
        let mut m = nalgebra::DMatrix::<C64>::zeros(n, n);
        for (i, j, x) in self.lead.entries() {
            m[(i - 1, j - 1)] = x.get(0, 0).constant();
        }
        m.rank(1e-10)
    }
}

/// Data of a canonical Lax operator for the index set `I`: a gl(|I|) representation
/// (indexed by position inside `I`) and one oscillator per pair `(α ∈ I, ċ ∉ I)`.
///
/// The oscillator keyed `(α, ċ)` has creator `b†_{αċ}` and annihilator `b_{ċα}`.
#[derive(Clone, Debug)]
pub struct CanonicalData {
    pub set: IndexSet,
    pub rep: GlRep,
    pub osc: BTreeMap<(usize, usize), Mode>,
}

impl CanonicalData {
    /// Allocates the `p(n-p)` oscillators from `reg`; `tag` prefixes their labels.
    pub fn new(set: IndexSet, rep: GlRep, reg: &mut ModeRegistry, tag: &str) -> Result<Self> {
        if rep.p != set.len() {
            return Err(QlabError::Dimension { expected: set.len(), found: rep.p });
        }
        let mut osc = BTreeMap::new();
        for &a in set.elems() {
            for cd in set.complement() {
                osc.insert((a, cd), reg.alloc(format!("{tag}b[{a},{cd}]")));
            }
        }
        Ok(Self { set, rep, osc })
    }

    pub fn n(&self) -> usize {
        self.set.n()
    }

    pub fn cre(&self, a: usize, cd: usize) -> NormalOrderedOp {
        NormalOrderedOp::cre(self.osc[&(a, cd)])
    }

    /// `b_{ċα}`.
    pub fn ann(&self, cd: usize, a: usize) -> NormalOrderedOp {
        NormalOrderedOp::ann(self.osc[&(a, cd)])
    }

    /// All modes: representation modes then oscillators.
    pub fn modes(&self) -> Vec<Mode> {
        let mut m = self.rep.modes.clone();
        m.extend(self.osc.values().copied());
        m.sort_unstable();
        m
    }

    pub fn lax(&self) -> LaxMatrix {
        let n = self.n();
        let d = self.rep.d;
        let mut lead = OpMatrix::zero(n, d);
        let mut konst = OpMatrix::zero(n, d);
        let comp = self.set.complement();
        for &a in self.set.elems() {
            let pa = self.set.position(a).unwrap();
            lead.set(a, a, CarrierOp::identity(d));
            for &b in self.set.elems() {
                let pb = self.set.position(b).unwrap();
                let mut x = self.rep.gen_bar(pa, pb).clone();
                let mut bil = NormalOrderedOp::zero();
                for &cd in &comp {
                    bil = bil.add(&self.cre(a, cd).mul(&self.ann(cd, b)));
                    if a == b {
                        bil = bil.add(&NormalOrderedOp::scalar(c(0.5)));
                    }
                }
                x = x.sub(&CarrierOp::from_osc(d, &bil));
                konst.set(a, b, x);
            }
            for &bd in &comp {
                konst.set(a, bd, CarrierOp::from_osc(d, &self.cre(a, bd)));
                konst.set(bd, a, CarrierOp::from_osc(d, &self.ann(bd, a).scale(c(-1.0))));
            }
        }
        for &ad in &comp {
            konst.set(ad, ad, CarrierOp::identity(d));
        }
        LaxMatrix { lead, konst }
    }
}

/// `L_ij(z) = z δ_ij + J_ji` for a gl(n) representation.
pub fn eval_lax(rep: &GlRep) -> LaxMatrix {
    let data = CanonicalData { set: IndexSet::full(rep.p), rep: rep.clone(), osc: BTreeMap::new() };
    data.lax()
}

/// Canonical data of the partonic operator for index `a`: trivial gl(1) plus `n - 1` oscillators.
pub fn partonic_data(n: usize, a: usize, reg: &mut ModeRegistry, tag: &str) -> Result<CanonicalData> {
    CanonicalData::new(IndexSet::singleton(n, a)?, trivial_rep(1), reg, tag)
}

pub fn partonic_lax(n: usize, a: usize, reg: &mut ModeRegistry) -> Result<LaxMatrix> {
    Ok(partonic_data(n, a, reg, "")?.lax())
}

/// `F · L(z) · G`; entries of `F` and `G` must commute with every entry of `L`.
pub fn gl_transform(l: &LaxMatrix, f: &OpMatrix, g: &OpMatrix) -> Result<LaxMatrix> {
    for (_, _, x) in f.entries().chain(g.entries()) {
        for (_, _, y) in l.lead.entries().chain(l.konst.entries()) {
            if x.commutator(y).max_coeff() > 1e-13 {
                return Err(QlabError::Usage("transform entries do not commute with the Lax entries".into()));
            }
        }
    }
    Ok(LaxMatrix { lead: f.mul(&l.lead).mul(g), konst: f.mul(&l.konst).mul(g) })
}

/// Indices of `C^d ⊗ Fock(basis)` whose Fock level is at or below the safe level.
pub fn safe_indices(d: usize, basis: &FockBasis, trunc: FockTruncation) -> Vec<bool> {
    let nb = basis.len();
    (0..d * nb).map(|k| basis.level(k % nb) <= trunc.safe_level()).collect()
}

/// Max over buffered matrix elements of `R(z1-z2) L1(z1) L2(z2) - L2(z2) L1(z1) R(z1-z2)`,
/// built from truncated Fock matrices (two auxiliary spaces, auxiliary 1 most significant).
pub fn rll_residual(l: &LaxMatrix, z1: C64, z2: C64, trunc: FockTruncation) -> f64 {
    let n = l.n();
    let basis = FockBasis::new(&l.modes(), trunc.n_max);
    let inner = l.carrier_dim() * basis.len();
    let safe = safe_indices(l.carrier_dim(), &basis, trunc);
    let m1 = l.at(z1).matrix(&basis);
    let m2 = l.at(z2).matrix(&basis);
    // m1 is ordered (aux, carrier); lift to (aux1, aux2, carrier).
    let lift1 = lift(&m1, n, inner, true);
    let lift2 = lift(&m2, n, inner, false);
    let r = crate::tensor::kron(&[
        QuantumOperator::identity(n * n).scale(z1 - z2).add(&permutation_op(n)),
        QuantumOperator::identity(inner),
    ])
    .expect("non-empty");
    let lhs = r.mul(&lift1).mul(&lift2);
    let rhs = lift2.mul(&lift1).mul(&r);
    let diff = lhs.sub(&rhs);
    let mut worst: f64 = 0.0;
    for (i, j, v) in diff.iter() {
        if safe[i % inner] && safe[j % inner] {
            worst = worst.max(v.norm());
        }
    }
    worst
}

fn lift(m: &QuantumOperator, n: usize, inner: usize, first: bool) -> QuantumOperator {
    let mut out = QuantumOperator::zeros(n * n * inner);
    for (r, s, v) in m.iter() {
        let (i, x) = (r / inner, r % inner);
        let (j, y) = (s / inner, s % inner);
        for k in 0..n {
            let (row, col) = if first { ((i * n + k) * inner + x, (j * n + k) * inner + y) } else { ((k * n + i) * inner + x, (k * n + j) * inner + y) };
            out.set(row, col, v);
        }
    }
    out
}

/// Same relation evaluated in the exact oscillator algebra: largest coefficient of the difference.
pub fn rll_residual_exact(l: &LaxMatrix, z1: C64, z2: C64) -> f64 {
    let n = l.n();
    let (a, b) = (l.at(z1), l.at(z2));
    let u = z1 - z2;
    let mut worst: f64 = 0.0;
    // Entry ((i,k),(j,l)) of R A B - B A R, with A = L(z1)⊗1, B = 1⊗L(z2), R = u + P.
    for i in 1..=n {
        for k in 1..=n {
            for j in 1..=n {
                for ll in 1..=n {
                    // (A B)_{(i,k),(j,l)} = L1_ij L2_kl; (B A) = L2_kl L1_ij.
                    let ab = |i: usize, k: usize, j: usize, l: usize| a.get(i, j).mul(b.get(k, l));
                    let ba = |i: usize, k: usize, j: usize, l: usize| b.get(k, l).mul(a.get(i, j));
                    let lhs = ab(i, k, j, ll).scale(u).add(&ab(k, i, j, ll));
                    let rhs = ba(i, k, j, ll).scale(u).add(&ba(i, k, ll, j));
                    worst = worst.max(lhs.sub(&rhs).max_coeff());
                }
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::glrep::{fundamental_rep, verma_rep};
    use proptest::prelude::*;

    fn trunc(n_max: u32, buffer: u32) -> FockTruncation {
        FockTruncation::new(n_max, buffer).unwrap()
    }

    fn pairs() -> Vec<(C64, C64)> {
        vec![(c(0.3), c(-0.7)), (C64::new(1.1, 0.4), c(0.2)), (c(-2.3), C64::new(0.5, -1.0))]
    }

    #[test]
    fn partonic_layout_n2() {
        let mut reg = ModeRegistry::new();
        let l = partonic_lax(2, 1, &mut reg).unwrap();
        let b = NormalOrderedOp::ann(0);
        let bd = NormalOrderedOp::cre(0);
        let h = NormalOrderedOp::number(0).add(&NormalOrderedOp::scalar(c(0.5)));
        assert_eq!(l.konst.get(1, 1).get(0, 0), h.scale(c(-1.0)));
        assert_eq!(l.konst.get(1, 2).get(0, 0), bd);
        assert_eq!(l.konst.get(2, 1).get(0, 0), b.scale(c(-1.0)));
        assert_eq!(l.konst.get(2, 2).get(0, 0), NormalOrderedOp::one());
        assert_eq!(l.lead_rank(), 1);
    }

    #[test]
    fn partonic_layout_n3_a2() {
        let mut reg = ModeRegistry::new();
        let data = partonic_data(3, 2, &mut reg, "").unwrap();
        let l = data.lax();
        assert_eq!(l.konst.get(1, 2).get(0, 0), data.ann(1, 2).scale(c(-1.0)));
        assert_eq!(l.konst.get(3, 2).get(0, 0), data.ann(3, 2).scale(c(-1.0)));
        assert_eq!(l.konst.get(2, 1).get(0, 0), data.cre(2, 1));
        assert_eq!(l.konst.get(2, 3).get(0, 0), data.cre(2, 3));
        assert_eq!(l.konst.get(1, 3), &CarrierOp::zero(1));
    }

    #[test]
    fn eval_lax_of_fundamental_is_z_plus_p() {
        let l = eval_lax(&fundamental_rep(2));
        let m = l.at(c(0.6)).matrix(&FockBasis::new(&[], 0));
        let expected = QuantumOperator::identity(4).scale(c(0.6)).add(&permutation_op(2));
        assert!(m.sub(&expected).max_abs() < 1e-15);
    }

    #[test]
    fn eval_lax_of_su2_verma() {
        let mut reg = ModeRegistry::new();
        let rep = verma_rep(&[c(0.8), c(-0.8)], &mut reg).unwrap();
        let l = eval_lax(&rep);
        assert_eq!(l.konst.get(1, 2), rep.gen(2, 1));
        assert_eq!(l.konst.get(2, 1), rep.gen(1, 2));
    }

    #[test]
    fn rll_fundamental() {
        for n in 2..=3 {
            let l = eval_lax(&fundamental_rep(n));
            for (z1, z2) in pairs() {
                assert!(rll_residual(&l, z1, z2, trunc(1, 0)) < 1e-12);
            }
        }
    }

    #[test]
    fn rll_partonic_truncated() {
        let mut reg = ModeRegistry::new();
        let l = partonic_lax(2, 1, &mut reg).unwrap();
        for (z1, z2) in pairs() {
            assert!(rll_residual(&l, z1, z2, trunc(10, 3)) < 1e-12);
        }
    }

    #[test]
    fn rll_canonical_verma_n3() {
        let mut reg = ModeRegistry::new();
        let rep = verma_rep(&[C64::new(0.4, 0.2), c(-1.3)], &mut reg).unwrap();
        let data = CanonicalData::new(IndexSet::new(3, &[1, 2]).unwrap(), rep, &mut reg, "").unwrap();
        let l = data.lax();
        assert!(rll_residual(&l, c(0.3), c(-0.7), trunc(6, 3)) < 1e-12);
        assert!(rll_residual_exact(&l, c(0.3), c(-0.7)) < 1e-12);
        assert_eq!(l.lead_rank(), 2);
    }

    #[test]
    fn rll_detects_sign_flip() {
        let mut reg = ModeRegistry::new();
        let mut l = partonic_lax(2, 1, &mut reg).unwrap();
        let flipped = l.konst.get(1, 2).scale(c(-1.0));
        l.konst.set(1, 2, flipped);
        assert!(rll_residual(&l, c(0.3), c(-0.7), trunc(10, 3)) > 0.1);
    }

    #[test]
    fn canonical_full_set_is_eval() {
        let rep = fundamental_rep(3);
        let mut reg = ModeRegistry::new();
        let data = CanonicalData::new(IndexSet::full(3), rep.clone(), &mut reg, "").unwrap();
        assert_eq!(data.lax(), eval_lax(&rep));
        assert!(reg.is_empty());
    }

    #[test]
    fn offdiagonal_blocks_are_canonical_pairs() {
        // [B_{αβ̇}, C_{α̇β}] = δ_αβ δ_{α̇β̇} with C carrying the minus sign.
        let mut reg = ModeRegistry::new();
        let data = partonic_data(3, 1, &mut reg, "").unwrap();
        let l = data.lax();
        for bd in [2, 3] {
            for ad in [2, 3] {
                let comm = l.konst.get(1, bd).commutator(l.konst.get(ad, 1));
                let expected = if ad == bd { 1.0 } else { 0.0 };
                assert!((comm.get(0, 0).constant() - c(expected)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn central_shift_is_spectral_shift() {
        let mut reg = ModeRegistry::new();
        let rep = verma_rep(&[c(0.4), c(-0.3), c(1.2)], &mut reg).unwrap();
        let shifted = verma_rep(&[c(1.4), c(0.7), c(2.2)], &mut ModeRegistry::new()).unwrap();
        let a = eval_lax(&rep).at(c(1.3));
        let b = eval_lax(&shifted).at(c(0.3));
        assert!(a.sub(&b).max_coeff() < 1e-14);
    }

    #[test]
    fn identity_transform_is_noop() {
        let mut reg = ModeRegistry::new();
        let l = partonic_lax(3, 2, &mut reg).unwrap();
        let id = OpMatrix::identity(3, 1);
        assert_eq!(gl_transform(&l, &id, &id).unwrap(), l);
    }

    #[test]
    fn transform_with_noncommuting_entry_is_rejected() {
        let mut reg = ModeRegistry::new();
        let data = partonic_data(2, 1, &mut reg, "").unwrap();
        let l = data.lax();
        let mut f = OpMatrix::identity(2, 1);
        f.set_osc(1, 2, data.cre(1, 2));
        assert!(gl_transform(&l, &f, &OpMatrix::identity(2, 1)).is_err());
    }

    #[test]
    fn block_diagonal_conjugation_keeps_canonical_form() {
        // Constant F = diag(A, 1), G = F^{-1} on I = {1,2} of n = 3 keeps D = 1 and the z pattern.
        let mut reg = ModeRegistry::new();
        let rep = verma_rep(&[c(0.4), c(-0.3)], &mut reg).unwrap();
        let data = CanonicalData::new(IndexSet::new(3, &[1, 2]).unwrap(), rep, &mut reg, "").unwrap();
        let l = data.lax();
        let mut f = OpMatrix::identity(3, 1);
        let mut g = OpMatrix::identity(3, 1);
        f.set(1, 2, CarrierOp::scalar(1, c(0.7)));
        g.set(1, 2, CarrierOp::scalar(1, c(-0.7)));
        let t = gl_transform(&l, &f, &g).unwrap();
        assert_eq!(t.lead, l.lead);
        assert_eq!(t.konst.get(3, 3), &CarrierOp::identity(1));
        assert!(rll_residual_exact(&t, c(0.2), c(-1.1)) < 1e-12);
    }

    #[test]
    fn lead_normal_form_of_conjugated_example() {
        let mut reg = ModeRegistry::new();
        let data = CanonicalData::new(IndexSet::new(3, &[1, 3]).unwrap(), trivial_rep(2), &mut reg, "").unwrap();
        let l = data.lax();
        let mut f = OpMatrix::identity(3, 1);
        let mut g = OpMatrix::identity(3, 1);
        f.set(2, 1, CarrierOp::scalar(1, c(1.5)));
        g.set(2, 1, CarrierOp::scalar(1, c(-1.5)));
        let t = gl_transform(&l, &f, &g).unwrap();
        assert_eq!(t.lead_rank(), 2);
    }

    #[test]
    fn index_set_basics() {
        let i = IndexSet::new(4, &[3, 1]).unwrap();
        assert_eq!(i.elems(), &[1, 3]);
        assert_eq!(i.complement(), vec![2, 4]);
        assert_eq!(i.position(3), Some(2));
        assert!(i.disjoint_union(&IndexSet::new(4, &[3]).unwrap()).is_err());
        assert_eq!(IndexSet::all_subsets(3).len(), 8);
        assert_eq!(i.to_string(), "{1,3}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]
        #[test]
        fn rll_holds_for_every_parton(a in 1usize..=3, re1 in -2.0f64..2.0, re2 in -2.0f64..2.0) {
            let mut reg = ModeRegistry::new();
            let l = partonic_lax(3, a, &mut reg).unwrap();
            prop_assert!(rll_residual_exact(&l, c(re1), c(re2)) < 1e-12);
        }

        #[test]
        fn rll_holds_for_verma_eval(w1 in -2.0f64..2.0, w2 in -2.0f64..2.0, z in -2.0f64..2.0) {
            let mut reg = ModeRegistry::new();
            let rep = verma_rep(&[c(w1), c(w2)], &mut reg).unwrap();
            prop_assert!(rll_residual_exact(&eval_lax(&rep), c(z), c(0.37)) < 1e-12);
        }
    }
}
