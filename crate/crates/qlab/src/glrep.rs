//! Representations of gl(p) realized on a finite carrier times a set of oscillators.
//!
//! A [`CarrierOp`] is a `d × d` matrix whose entries are normal-ordered oscillator
//! polynomials. `d = 1` for pure oscillator realizations and `d = n` for the
//! defining representation.

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64 as C64;

use crate::error::{QlabError, Result};
use crate::oscillator::{fock_matrix, FockBasis, FockTruncation, Mode, ModeRegistry, NormalOrderedOp};
use crate::tensor::QuantumOperator;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// `d × d` matrix of oscillator polynomials, sparse in its blocks (0-based).
#[derive(Clone, Debug, PartialEq)]
pub struct CarrierOp {
    d: usize,
    blocks: BTreeMap<(usize, usize), NormalOrderedOp>,
}

impl CarrierOp {
    pub fn zero(d: usize) -> Self {
        Self { d, blocks: BTreeMap::new() }
    }

    pub fn scalar(d: usize, v: C64) -> Self {
        Self::from_osc(d, &NormalOrderedOp::scalar(v))
    }

    pub fn identity(d: usize) -> Self {
        Self::scalar(d, c(1.0))
    }

    /// `x ⊗ 1_d`.
    pub fn from_osc(d: usize, x: &NormalOrderedOp) -> Self {
        let mut out = Self::zero(d);
        for i in 0..d {
            out.set(i, i, x.clone());
        }
        out
    }

    /// Carrier matrix unit `e_ij` (0-based) times the oscillator identity.
    pub fn unit(d: usize, i: usize, j: usize) -> Self {
        let mut out = Self::zero(d);
        out.set(i, j, NormalOrderedOp::one());
        out
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn get(&self, i: usize, j: usize) -> NormalOrderedOp {
        self.blocks.get(&(i, j)).cloned().unwrap_or_else(NormalOrderedOp::zero)
    }

    pub fn block(&self, i: usize, j: usize) -> Option<&NormalOrderedOp> {
        self.blocks.get(&(i, j))
    }

    pub fn set(&mut self, i: usize, j: usize, x: NormalOrderedOp) {
        assert!(i < self.d && j < self.d, "carrier index out of range");
        if x.is_empty() {
            self.blocks.remove(&(i, j));
        } else {
            self.blocks.insert((i, j), x);
        }
    }

    pub fn blocks(&self) -> impl Iterator<Item = (usize, usize, &NormalOrderedOp)> {
        self.blocks.iter().map(|(&(i, j), x)| (i, j, x))
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = Self::zero(self.d);
        for (i, j, x) in self.blocks() {
            out.set(i, j, x.scale(s));
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.d, other.d, "carrier dimension mismatch");
        let mut out = self.clone();
        for (i, j, x) in other.blocks() {
            let cur = out.get(i, j);
            out.set(i, j, cur.add(x));
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(c(-1.0)))
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.d, other.d, "carrier dimension mismatch");
        let mut out = Self::zero(self.d);
        for (i, k, x) in self.blocks() {
            for j in 0..self.d {
                if let Some(y) = other.block(k, j) {
                    let cur = out.get(i, j);
                    out.set(i, j, cur.add(&x.mul(y)));
                }
            }
        }
        out
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    pub fn max_coeff(&self) -> f64 {
        self.blocks.values().map(|x| x.max_coeff()).fold(0.0, f64::max)
    }

    pub fn modes(&self) -> Vec<Mode> {
        let set: BTreeSet<Mode> = self.blocks.values().flat_map(|x| x.modes()).collect();
        set.into_iter().collect()
    }

    /// Largest number of annihilators in any monomial.
    pub fn lowering_degree(&self) -> u32 {
        self.blocks.values().map(|x| x.lowering_degree()).max().unwrap_or(0)
    }

    pub fn remap(&self, f: impl Fn(Mode) -> Mode + Copy) -> Self {
        let mut out = Self::zero(self.d);
        for (i, j, x) in self.blocks() {
            out.set(i, j, x.remap(f));
        }
        out
    }

    /// Matrix on `C^d ⊗ Fock(basis)`, carrier index most significant.
    pub fn matrix(&self, basis: &FockBasis) -> QuantumOperator {
        let nb = basis.len();
        let mut m = QuantumOperator::zeros(self.d * nb);
        for (i, j, x) in self.blocks() {
            for (r, s, v) in fock_matrix(x, basis).iter() {
                m.set(i * nb + r, j * nb + s, v);
            }
        }
        m
    }
}

/// Concrete gl(p) representation: generators `J_ab` (1-based, row-major storage).
#[derive(Clone, Debug)]
pub struct GlRep {
    pub p: usize,
    pub d: usize,
    gens: Vec<CarrierOp>,
    /// Highest weight, in the generator index order.
    pub weight: Vec<C64>,
    /// Oscillator modes the generators act on.
    pub modes: Vec<Mode>,
}

impl GlRep {
    pub fn new(p: usize, d: usize, gens: Vec<CarrierOp>, weight: Vec<C64>, modes: Vec<Mode>) -> Result<Self> {
        if gens.len() != p * p {
            return Err(QlabError::Dimension { expected: p * p, found: gens.len() });
        }
        if weight.len() != p {
            return Err(QlabError::Dimension { expected: p, found: weight.len() });
        }
        if let Some(g) = gens.iter().find(|g| g.dim() != d) {
            return Err(QlabError::Dimension { expected: d, found: g.dim() });
        }
        Ok(Self { p, d, gens, weight, modes })
    }

    /// `J_ab`, 1-based.
    pub fn gen(&self, a: usize, b: usize) -> &CarrierOp {
        &self.gens[(a - 1) * self.p + (b - 1)]
    }

    /// `J̄_ab = J_ba`.
    pub fn gen_bar(&self, a: usize, b: usize) -> &CarrierOp {
        self.gen(b, a)
    }

    /// Same representation with generator indices relabelled: new `J_ij = J_{perm[i] perm[j]}`.
    pub fn reindex(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.p);
        let mut gens = Vec::with_capacity(self.p * self.p);
        for i in 0..self.p {
            for j in 0..self.p {
                gens.push(self.gen(perm[i], perm[j]).clone());
            }
        }
        let weight = perm.iter().map(|&i| self.weight[i - 1]).collect();
        Self { p: self.p, d: self.d, gens, weight, modes: self.modes.clone() }
    }

    /// Central element `C_1 = Σ_a J_aa`.
    pub fn casimir1(&self) -> CarrierOp {
        (1..=self.p).fold(CarrierOp::zero(self.d), |acc, a| acc.add(self.gen(a, a)))
    }
}

/// Trivial representation of gl(p) (all generators zero), carried by `C^1`.
pub fn trivial_rep(p: usize) -> GlRep {
    GlRep { p, d: 1, gens: vec![CarrierOp::zero(1); p * p], weight: vec![c(0.0); p], modes: vec![] }
}

/// One-dimensional gl(1) representation `J_11 = λ`.
pub fn scalar_rep(lambda: C64) -> GlRep {
    GlRep { p: 1, d: 1, gens: vec![CarrierOp::scalar(1, lambda)], weight: vec![lambda], modes: vec![] }
}

/// Defining representation of gl(n) on `C^n`: `J_ab = e_ab`.
pub fn fundamental_rep(n: usize) -> GlRep {
    let mut gens = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            gens.push(CarrierOp::unit(n, a, b));
        }
    }
    let mut weight = vec![c(0.0); n];
    weight[0] = c(1.0);
    GlRep { p: n, d: n, gens, weight, modes: vec![] }
}

/// Fuses `rep1` (gl(p1)) and `rep2` (gl(p2)) into gl(p1+p2) with coupling `λ`.
///
/// `pair[(α-1) * p2 + (ȧ-1)]` is the oscillator with creator `b†_{αȧ}` and
/// annihilator `b_{ȧα}`. Generator indices of the result are `rep1` first. Both
/// inputs must be oscillator realizations (`d = 1`). The highest weight of the
/// result is `(weight1 + λ, weight2)`.
pub fn fuse_reps(rep1: &GlRep, rep2: &GlRep, lambda: C64, pair: &[Mode]) -> Result<GlRep> {
    let (p1, p2) = (rep1.p, rep2.p);
    if rep1.d != 1 || rep2.d != 1 {
        return Err(QlabError::Usage("fusion needs oscillator realizations on both sides".into()));
    }
    if pair.len() != p1 * p2 {
        return Err(QlabError::Dimension { expected: p1 * p2, found: pair.len() });
    }
    let p = p1 + p2;
    let osc = |x: NormalOrderedOp| CarrierOp::from_osc(1, &x);
    let g1 = |a: usize, b: usize| rep1.gen_bar(a, b).get(0, 0);
    let g2 = |a: usize, b: usize| rep2.gen_bar(a, b).get(0, 0);
    let cre = |a: usize, b: usize| NormalOrderedOp::cre(pair[(a - 1) * p2 + (b - 1)]);
    let ann = |b: usize, a: usize| NormalOrderedOp::ann(pair[(a - 1) * p2 + (b - 1)]);
    // Barred generators J̄_ij = J_ji; I-indices are 1..=p1, J-indices are p1+1..=p.
    let mut bar = vec![CarrierOp::zero(1); p * p];
    for a in 1..=p1 {
        for b in 1..=p1 {
            let mut x = g1(a, b);
            for cd in 1..=p2 {
                x = x.sub(&cre(a, cd).mul(&ann(cd, b)));
            }
            if a == b {
                x = x.add(&NormalOrderedOp::scalar(lambda));
            }
            bar[(a - 1) * p + (b - 1)] = osc(x);
        }
    }
    for ad in 1..=p2 {
        for bd in 1..=p2 {
            let mut x = g2(ad, bd);
            for cc in 1..=p1 {
                x = x.add(&cre(cc, bd).mul(&ann(ad, cc)));
            }
            bar[(p1 + ad - 1) * p + (p1 + bd - 1)] = osc(x);
        }
    }
    for ad in 1..=p2 {
        for b in 1..=p1 {
            bar[(p1 + ad - 1) * p + (b - 1)] = osc(ann(ad, b).scale(c(-1.0)));
        }
    }
    for a in 1..=p1 {
        for bd in 1..=p2 {
            let mut x = cre(a, bd).scale(-lambda);
            for cc in 1..=p1 {
                for cd in 1..=p2 {
                    x = x.add(&cre(cc, bd).mul(&cre(a, cd)).mul(&ann(cd, cc)));
                }
            }
            for cd in 1..=p2 {
                x = x.add(&g2(cd, bd).mul(&cre(a, cd)));
            }
            for cc in 1..=p1 {
                x = x.sub(&cre(cc, bd).mul(&g1(a, cc)));
            }
            bar[(a - 1) * p + (p1 + bd - 1)] = osc(x);
        }
    }
    let mut gens = vec![CarrierOp::zero(1); p * p];
    for i in 0..p {
        for j in 0..p {
            gens[i * p + j] = bar[j * p + i].clone();
        }
    }
    let mut weight: Vec<C64> = rep1.weight.iter().map(|w| w + lambda).collect();
    weight.extend(rep2.weight.iter().copied());
    let mut modes = rep1.modes.clone();
    modes.extend(rep2.modes.iter().copied());
    modes.extend(pair.iter().copied());
    GlRep::new(p, 1, gens, weight, modes)
}

/// Verma module of gl(p) with highest weight `weight`, realized on `p(p-1)/2`
/// oscillators allocated from `reg`.
///
/// Built by fusing the gl(1) scalar `λ_1` with the Verma module of `(λ_2, …, λ_p)`
/// at coupling zero, recursively.
pub fn verma_rep(weight: &[C64], reg: &mut ModeRegistry) -> Result<GlRep> {
    verma_rec(weight, 1, reg)
}

fn verma_rec(weight: &[C64], offset: usize, reg: &mut ModeRegistry) -> Result<GlRep> {
    match weight.len() {
        0 => Err(QlabError::Usage("Verma module of gl(0)".into())),
        1 => Ok(scalar_rep(weight[0])),
        p => {
            let inner = verma_rec(&weight[1..], offset + 1, reg)?;
            let pair: Vec<Mode> = (1..p).map(|b| reg.alloc(format!("a[{},{}]", offset, offset + b))).collect();
            fuse_reps(&scalar_rep(weight[0]), &inner, c(0.0), &pair)
        }
    }
}

/// Max coefficient of `[J_ij, J_kl] - δ_kj J_il + δ_il J_kj` over all index quadruples.
pub fn gl_relation_residual(rep: &GlRep) -> f64 {
    let p = rep.p;
    let mut worst: f64 = 0.0;
    for i in 1..=p {
        for j in 1..=p {
            for k in 1..=p {
                for l in 1..=p {
                    let mut r = rep.gen(i, j).commutator(rep.gen(k, l));
                    if k == j {
                        r = r.sub(rep.gen(i, l));
                    }
                    if i == l {
                        r = r.add(rep.gen(k, j));
                    }
                    worst = worst.max(r.max_coeff());
                }
            }
        }
    }
    worst
}

/// Same relations checked with truncated Fock matrices, on states at or below the safe level.
pub fn gl_relation_residual_truncated(rep: &GlRep, trunc: FockTruncation) -> f64 {
    let basis = FockBasis::new(&rep.modes, trunc.n_max);
    let nb = basis.len();
    let safe: Vec<bool> = (0..rep.d * nb).map(|i| basis.level(i % nb) <= trunc.safe_level()).collect();
    let mats: Vec<QuantumOperator> = (1..=rep.p)
        .flat_map(|i| (1..=rep.p).map(move |j| (i, j)))
        .map(|(i, j)| rep.gen(i, j).matrix(&basis))
        .collect();
    let m = |i: usize, j: usize| &mats[(i - 1) * rep.p + (j - 1)];
    let mut worst: f64 = 0.0;
    for i in 1..=rep.p {
        for j in 1..=rep.p {
            for k in 1..=rep.p {
                for l in 1..=rep.p {
                    let mut r = m(i, j).mul(m(k, l)).sub(&m(k, l).mul(m(i, j)));
                    if k == j {
                        r = r.sub(m(i, l));
                    }
                    if i == l {
                        r = r.add(m(k, j));
                    }
                    for (a, b, v) in r.iter() {
                        if safe[a] && safe[b] {
                            worst = worst.max(v.norm());
                        }
                    }
                }
            }
        }
    }
    worst
}

/// `λ'_a = λ_a + (n - 2a + 1)/2`, 1-based `a`.
pub fn shift_weight(weight: &[C64]) -> Vec<C64> {
    let n = weight.len() as f64;
    weight.iter().enumerate().map(|(i, w)| w + c((n - 2.0 * (i as f64 + 1.0) + 1.0) / 2.0)).collect()
}

/// `ρ_a = (n - 2a + 1)/2`.
pub fn rho(n: usize) -> Vec<C64> {
    shift_weight(&vec![c(0.0); n])
}

/// Inverse of [`shift_weight`].
pub fn unshift_weight(shifted: &[C64]) -> Vec<C64> {
    let r = rho(shifted.len());
    shifted.iter().zip(&r).map(|(s, r)| s - r).collect()
}

/// All permutations of `0..n` with their sign `(-1)^{inversions}`.
pub fn permutations_with_sign(n: usize) -> Vec<(Vec<usize>, i32)> {
    fn rec(cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<(Vec<usize>, i32)>) {
        let n = used.len();
        if cur.len() == n {
            let mut inv = 0;
            for i in 0..n {
                for j in i + 1..n {
                    if cur[i] > cur[j] {
                        inv += 1;
                    }
                }
            }
            out.push((cur.clone(), if inv % 2 == 0 { 1 } else { -1 }));
            return;
        }
        for k in 0..n {
            if !used[k] {
                used[k] = true;
                cur.push(k);
                rec(cur, used, out);
                cur.pop();
                used[k] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// Weights `σ(Λ + ρ) - ρ` for every permutation σ, with the sign of σ.
pub fn weyl_orbit(weight: &[C64]) -> Vec<(Vec<C64>, i32)> {
    let shifted = shift_weight(weight);
    permutations_with_sign(weight.len())
        .into_iter()
        .map(|(perm, sign)| {
            let permuted: Vec<C64> = perm.iter().map(|&k| shifted[k]).collect();
            (unshift_weight(&permuted), sign)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oscillator::{FockVector, apply_op};
    use proptest::prelude::*;

    fn verma(weight: &[f64]) -> (GlRep, ModeRegistry) {
        let mut reg = ModeRegistry::new();
        let w: Vec<C64> = weight.iter().map(|&x| c(x)).collect();
        (verma_rep(&w, &mut reg).unwrap(), reg)
    }

    #[test]
    fn fundamental_satisfies_gl_relations() {
        for n in 1..=4 {
            assert_eq!(gl_relation_residual(&fundamental_rep(n)), 0.0);
        }
    }

    #[test]
    fn su2_verma_is_holstein_primakoff() {
        let (rep, _) = verma(&[0.7, -0.7]);
        let m = rep.modes[0];
        let b = NormalOrderedOp::ann(m);
        let bd = NormalOrderedOp::cre(m);
        let n = NormalOrderedOp::number(m);
        assert_eq!(rep.gen(1, 2).get(0, 0), b.scale(c(-1.0)));
        let lowering = bd.mul(&n.sub(&NormalOrderedOp::scalar(c(1.4))));
        assert!(rep.gen(2, 1).get(0, 0).sub(&lowering).max_coeff() < 1e-15);
        assert!(rep.gen(1, 1).get(0, 0).sub(&NormalOrderedOp::scalar(c(0.7)).sub(&n)).max_coeff() < 1e-15);
    }

    #[test]
    fn verma_mode_count() {
        for p in 1..=4 {
            let (rep, reg) = verma(&vec![0.3; p]);
            assert_eq!(rep.modes.len(), p * (p - 1) / 2);
            assert_eq!(reg.len(), p * (p - 1) / 2);
        }
    }

    #[test]
    fn verma_gl3_truncated_relations() {
        let (rep, _) = verma(&[0.37, -1.21, 0.55]);
        let r = gl_relation_residual_truncated(&rep, FockTruncation::new(6, 2).unwrap());
        assert!(r < 1e-12, "residual {r}");
    }

    #[test]
    fn verma_vacuum_is_highest_weight() {
        let w = [0.37, -1.21, 0.55, 2.0];
        let (rep, reg) = verma(&w);
        let mut vac = FockVector::new();
        vac.insert(vec![0; reg.len()], c(1.0));
        for a in 1..=4 {
            let diag = apply_op(&rep.gen(a, a).get(0, 0), &vac, 10);
            assert!((diag[&vec![0; reg.len()]] - c(w[a - 1])).norm() < 1e-14);
            for b in a + 1..=4 {
                assert!(apply_op(&rep.gen(a, b).get(0, 0), &vac, 10).is_empty());
            }
        }
    }

    #[test]
    fn fusing_fundamental_like_reps_keeps_relations() {
        // gl(2) Verma fused with a gl(2) Verma at generic coupling: exercises every index placement.
        let mut reg = ModeRegistry::new();
        let r1 = verma_rep(&[c(0.4), c(-0.9)], &mut reg).unwrap();
        let r2 = verma_rep(&[c(1.3), c(0.2)], &mut reg).unwrap();
        let pair: Vec<Mode> = (0..4).map(|k| reg.alloc(format!("p{k}"))).collect();
        let f = fuse_reps(&r1, &r2, c(0.83), &pair).unwrap();
        assert!(gl_relation_residual(&f) < 1e-13);
    }

    #[test]
    fn weyl_orbit_of_gl2() {
        let orbit = weyl_orbit(&[c(1.0), c(0.0)]);
        assert_eq!(orbit.len(), 2);
        assert_eq!(orbit[0], (vec![c(1.0), c(0.0)], 1));
        assert_eq!(orbit[1], (vec![c(-1.0), c(2.0)], -1));
    }

    #[test]
    fn rho_values() {
        assert_eq!(rho(3), vec![c(1.0), c(0.0), c(-1.0)]);
    }

    proptest! {
        #[test]
        fn verma_relations_hold_for_random_weights(w in proptest::collection::vec(-3.0f64..3.0, 1..=4)) {
            let (rep, _) = verma(&w);
            prop_assert!(gl_relation_residual(&rep) < 1e-12);
        }

        #[test]
        fn casimir1_is_central(w in proptest::collection::vec(-3.0f64..3.0, 2..=3)) {
            let (rep, _) = verma(&w);
            let c1 = rep.casimir1();
            for a in 1..=rep.p {
                for b in 1..=rep.p {
                    prop_assert!(c1.commutator(rep.gen(a, b)).max_coeff() < 1e-12);
                }
            }
        }

        #[test]
        fn weyl_orbit_signs_sum_to_zero(w in proptest::collection::vec(-2.0f64..2.0, 2..=4)) {
            let wc: Vec<C64> = w.iter().map(|&x| c(x)).collect();
            let s: i32 = weyl_orbit(&wc).iter().map(|(_, s)| s).sum();
            prop_assert_eq!(s, 0);
        }
    }
}
