//! Exact multi-mode oscillator algebra.
//!
//! Elements are sums of normal-ordered monomials `Π_m (b†_m)^{j_m} (b_m)^{k_m}`
//! with `[b_m, b†_m] = 1`. Products are reduced with
//! `b^k b†^j = Σ_r C(k,r) C(j,r) r! b†^{j-r} b^{k-r}`, so they are exact.
//!
//! Fock states use the unnormalized convention `|k+1⟩ = b†|k⟩`, hence
//! `b|k⟩ = k|k-1⟩`.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;

use crate::error::{QlabError, Result};
use crate::tensor::QuantumOperator;

/// Oscillator mode identifier inside one mode universe.
pub type Mode = u32;

/// Normal-ordered monomial: sorted `(mode, creation power, annihilation power)`.
pub type Monomial = Vec<(Mode, u32, u32)>;

const PRUNE: f64 = 1e-15;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn binom(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

pub(crate) fn falling(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64)
}

fn factorial(k: u32) -> f64 {
    falling(k, k)
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct NormalOrderedOp {
    terms: BTreeMap<Monomial, C64>,
}

impl NormalOrderedOp {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn scalar(v: C64) -> Self {
        let mut op = Self::zero();
        op.add_term(Vec::new(), v);
        op
    }

    pub fn one() -> Self {
        Self::scalar(c(1.0))
    }

    pub fn monomial(m: Monomial, v: C64) -> Self {
        let mut op = Self::zero();
        op.add_term(m, v);
        op
    }

    /// `b†_m`.
    pub fn cre(m: Mode) -> Self {
        Self::monomial(vec![(m, 1, 0)], c(1.0))
    }

    /// `b_m`.
    pub fn ann(m: Mode) -> Self {
        Self::monomial(vec![(m, 0, 1)], c(1.0))
    }

    /// `b†_m b_m`.
    pub fn number(m: Mode) -> Self {
        Self::monomial(vec![(m, 1, 1)], c(1.0))
    }

    /// `h_m = b†_m b_m + 1/2`.
    pub fn h(m: Mode) -> Self {
        Self::number(m).add(&Self::scalar(c(0.5)))
    }

    pub fn add_term(&mut self, m: Monomial, v: C64) {
        let cur = self.terms.get(&m).copied().unwrap_or_default() + v;
        if cur.norm() < PRUNE {
            self.terms.remove(&m);
        } else {
            self.terms.insert(m, cur);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &C64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of the identity monomial.
    pub fn constant(&self) -> C64 {
        self.terms.get(&Vec::new()).copied().unwrap_or_default()
    }

    pub fn is_scalar(&self) -> bool {
        self.terms.keys().all(|m| m.is_empty())
    }

    pub fn max_coeff(&self) -> f64 {
        self.terms.values().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn modes(&self) -> Vec<Mode> {
        let mut ms: Vec<Mode> = self.terms.keys().flat_map(|m| m.iter().map(|t| t.0)).collect();
        ms.sort_unstable();
        ms.dedup();
        ms
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = Self::zero();
        for (m, v) in &self.terms {
            out.add_term(m.clone(), v * s);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, v) in &other.terms {
            out.add_term(m.clone(), *v);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, v) in &other.terms {
            out.add_term(m.clone(), -*v);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        no_multiply(self, other)
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::one(), |acc, _| acc.mul(self))
    }

    /// Renames modes; the map must be injective on the modes present.
    pub fn remap(&self, f: impl Fn(Mode) -> Mode) -> Self {
        let mut out = Self::zero();
        for (m, v) in &self.terms {
            let mut nm: Monomial = m.iter().map(|&(md, j, k)| (f(md), j, k)).collect();
            nm.sort_unstable_by_key(|t| t.0);
            out.add_term(nm, *v);
        }
        out
    }

    /// Net change of total excitation number for each monomial: `(min, max)`.
    pub fn excitation_shift(&self) -> Option<(i64, i64)> {
        let shifts = self.terms.keys().map(|m| m.iter().map(|&(_, j, k)| j as i64 - k as i64).sum::<i64>());
        shifts.fold(None, |acc, s| match acc {
            None => Some((s, s)),
            Some((lo, hi)) => Some((lo.min(s), hi.max(s))),
        })
    }

    /// Largest total annihilation degree over monomials.
    pub fn lowering_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.iter().map(|t| t.2).sum()).max().unwrap_or(0)
    }

    /// Largest total creation degree over monomials.
    pub fn raising_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.iter().map(|t| t.1).sum()).max().unwrap_or(0)
    }

    /// Image under the automorphism `b → -b†`, `b† → b` (so `h → -h`),
    /// which exchanges the Fock representations `F_+` and `F_-`.
    pub fn fock_minus_image(&self) -> Self {
        let mut out = Self::zero();
        for (m, v) in &self.terms {
            let mut term = Self::scalar(*v);
            for &(md, j, k) in m {
                let sign = if k % 2 == 1 { -1.0 } else { 1.0 };
                let piece = Self::ann(md).pow(j).mul(&Self::cre(md).pow(k)).scale(c(sign));
                term = term.mul(&piece);
            }
            out = out.add(&term);
        }
        out
    }
}

/// Normal-ordered product of one-mode monomials `(j1,k1)·(j2,k2)`.
fn mode_product(j1: u32, k1: u32, j2: u32, k2: u32) -> Vec<(u32, u32, f64)> {
    (0..=k1.min(j2))
        .map(|r| (j1 + j2 - r, k1 + k2 - r, binom(k1, r) * binom(j2, r) * factorial(r)))
        .collect()
}

/// Exact normal-ordered product `x · y`.
pub fn no_multiply(x: &NormalOrderedOp, y: &NormalOrderedOp) -> NormalOrderedOp {
    let mut acc: BTreeMap<Monomial, C64> = BTreeMap::new();
    for (mx, vx) in &x.terms {
        for (my, vy) in &y.terms {
            let mut partial: Vec<(Monomial, f64)> = vec![(Vec::new(), 1.0)];
            let (mut i, mut j) = (0, 0);
            while i < mx.len() || j < my.len() {
                let next_x = mx.get(i).map(|t| t.0);
                let next_y = my.get(j).map(|t| t.0);
                let (mode, a, b) = match (next_x, next_y) {
                    (Some(p), Some(q)) if p == q => {
                        i += 1;
                        j += 1;
                        (p, (mx[i - 1].1, mx[i - 1].2), (my[j - 1].1, my[j - 1].2))
                    }
                    (Some(p), Some(q)) if p < q => {
                        i += 1;
                        (p, (mx[i - 1].1, mx[i - 1].2), (0, 0))
                    }
                    (Some(p), None) => {
                        i += 1;
                        (p, (mx[i - 1].1, mx[i - 1].2), (0, 0))
                    }
                    (_, Some(q)) => {
                        j += 1;
                        (q, (0, 0), (my[j - 1].1, my[j - 1].2))
                    }
                    (None, None) => unreachable!(),
                };
                let expansion = mode_product(a.0, a.1, b.0, b.1);
                let mut next = Vec::with_capacity(partial.len() * expansion.len());
                for (mono, w) in &partial {
                    for &(jj, kk, f) in &expansion {
                        let mut m2 = mono.clone();
                        if jj > 0 || kk > 0 {
                            m2.push((mode, jj, kk));
                        }
                        next.push((m2, w * f));
                    }
                }
                partial = next;
            }
            for (mono, w) in partial {
                *acc.entry(mono).or_default() += vx * vy * w;
            }
        }
    }
    let mut out = NormalOrderedOp::zero();
    for (m, v) in acc {
        if v.norm() >= PRUNE {
            out.terms.insert(m, v);
        }
    }
    out
}

/// Conjugation `e^{Y} X e^{-Y} = Σ_k ad_Y^k(X)/k!`, exact when the series terminates.
pub fn conjugate_exp(y: &NormalOrderedOp, x: &NormalOrderedOp, max_order: u32) -> Result<NormalOrderedOp> {
    let mut total = x.clone();
    let mut term = x.clone();
    for k in 1..=max_order {
        term = y.commutator(&term).scale(c(1.0 / k as f64));
        if term.is_empty() {
            return Ok(total);
        }
        total = total.add(&term);
    }
    Err(QlabError::NotConverged(format!("ad-series did not terminate within {max_order} orders")))
}

/// Allocates mode ids and remembers a printable label for each.
#[derive(Clone, Debug, Default)]
pub struct ModeRegistry {
    labels: Vec<String>,
}

impl ModeRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn alloc(&mut self, label: impl Into<String>) -> Mode {
        self.labels.push(label.into());
        (self.labels.len() - 1) as Mode
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, m: Mode) -> &str {
        &self.labels[m as usize]
    }
}

/// Per-mode twist weights `q_m` entering `q^N`.
#[derive(Clone, Debug, Default)]
pub struct TwistWeights {
    q: BTreeMap<Mode, C64>,
    labels: BTreeMap<Mode, String>,
}

impl TwistWeights {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, mode: Mode, q: C64, label: impl Into<String>) {
        self.q.insert(mode, q);
        self.labels.insert(mode, label.into());
    }

    pub fn get(&self, mode: Mode) -> Option<C64> {
        self.q.get(&mode).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Mode, C64)> + '_ {
        self.q.iter().map(|(&m, &q)| (m, q))
    }

    pub fn label(&self, mode: Mode) -> String {
        self.labels.get(&mode).cloned().unwrap_or_else(|| format!("#{mode}"))
    }

    /// Multiplies every weight by `e^{-η}`.
    pub fn damped(&self, eta: f64) -> Self {
        let f = (-eta).exp();
        Self { q: self.q.iter().map(|(&m, &q)| (m, q * f)).collect(), labels: self.labels.clone() }
    }

    fn checked(&self, mode: Mode) -> Result<C64> {
        let q = self
            .get(mode)
            .ok_or_else(|| QlabError::Usage(format!("no twist weight for mode {}", self.label(mode))))?;
        if (q - c(1.0)).norm() < 1e-12 {
            return Err(QlabError::DegenerateTwist(self.label(mode)));
        }
        Ok(q)
    }
}

/// `Tr{q^N x} / Tr{q^N}` in closed form.
///
/// The `q^{1/2}` from `h = N + 1/2` cancels between numerator and denominator,
/// so the weight is taken as `q^N`.
pub fn normalized_trace(x: &NormalOrderedOp, q: &TwistWeights) -> Result<C64> {
    let mut total = C64::default();
    'terms: for (mono, v) in &x.terms {
        let mut w = *v;
        for &(m, j, k) in mono {
            let qm = q.checked(m)?;
            if j != k {
                continue 'terms;
            }
            let r = qm / (c(1.0) - qm);
            w *= r.powu(k) * factorial(k);
        }
        total += w;
    }
    Ok(total)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FockTruncation {
    pub n_max: u32,
    pub buffer: u32,
}

impl FockTruncation {
    pub fn new(n_max: u32, buffer: u32) -> Result<Self> {
        if buffer >= n_max {
            return Err(QlabError::Usage(format!("buffer {buffer} must be below N_max {n_max}")));
        }
        Ok(Self { n_max, buffer })
    }

    /// Highest total excitation of states on which results are exact.
    pub fn safe_level(&self) -> u32 {
        self.n_max - self.buffer
    }
}

/// Occupation-number basis of `modes` with total excitation at most `n_max`.
#[derive(Clone, Debug)]
pub struct FockBasis {
    pub modes: Vec<Mode>,
    pub states: Vec<Vec<u32>>,
    index: BTreeMap<Vec<u32>, usize>,
}

impl FockBasis {
    pub fn new(modes: &[Mode], n_max: u32) -> Self {
        let mut states = Vec::new();
        let mut cur = vec![0u32; modes.len()];
        fn rec(pos: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
            if pos == cur.len() {
                out.push(cur.clone());
                return;
            }
            for k in 0..=left {
                cur[pos] = k;
                rec(pos + 1, left - k, cur, out);
            }
            cur[pos] = 0;
        }
        rec(0, n_max, &mut cur, &mut states);
        states.sort_by_key(|s| (s.iter().sum::<u32>(), s.clone()));
        let index = states.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        Self { modes: modes.to_vec(), states, index }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index_of(&self, occ: &[u32]) -> Option<usize> {
        self.index.get(occ).copied()
    }

    pub fn level(&self, i: usize) -> u32 {
        self.states[i].iter().sum()
    }
}

/// Sparse Fock vector over a dense list of modes `0..M`.
pub type FockVector = BTreeMap<Vec<u32>, C64>;

/// Applies `x` to `v`, dropping components with total excitation above `n_max`.
pub fn apply_op(x: &NormalOrderedOp, v: &FockVector, n_max: u32) -> FockVector {
    let mut out = FockVector::new();
    for (occ, amp) in v {
        'terms: for (mono, coef) in &x.terms {
            let mut new = occ.clone();
            let mut w = *coef * *amp;
            for &(m, j, k) in mono {
                let slot = &mut new[m as usize];
                if *slot < k {
                    continue 'terms;
                }
                w *= falling(*slot, k);
                *slot = *slot - k + j;
            }
            if new.iter().sum::<u32>() <= n_max {
                *out.entry(new).or_default() += w;
            }
        }
    }
    out.retain(|_, a| a.norm() > 0.0);
    out
}

/// `e^{Y} v` for `Y` that strictly raises total excitation; the series ends at `n_max`.
pub fn apply_exp(y: &NormalOrderedOp, v: &FockVector, n_max: u32) -> Result<FockVector> {
    if let Some((lo, _)) = y.excitation_shift() {
        if lo < 1 {
            return Err(QlabError::Usage("exponent must strictly raise the excitation number".into()));
        }
    }
    let mut total = v.clone();
    let mut term = v.clone();
    for k in 1..=(n_max + 1) {
        term = apply_op(y, &term, n_max);
        if term.is_empty() {
            break;
        }
        let inv = 1.0 / k as f64;
        for a in term.values_mut() {
            *a *= inv;
        }
        for (s, a) in &term {
            *total.entry(s.clone()).or_default() += a;
        }
    }
    Ok(total)
}

/// Matrix of `x` on the truncated basis of `modes` (mode ids index the occupation vector).
pub fn fock_matrix(x: &NormalOrderedOp, basis: &FockBasis) -> QuantumOperator {
    let mut m = QuantumOperator::zeros(basis.len());
    let width = basis.modes.iter().map(|&md| md as usize + 1).max().unwrap_or(0);
    for (col, occ) in basis.states.iter().enumerate() {
        let mut full = vec![0u32; width];
        for (slot, &md) in basis.modes.iter().enumerate() {
            full[md as usize] = occ[slot];
        }
        let mut v = FockVector::new();
        v.insert(full, c(1.0));
        for (s, a) in apply_op(x, &v, u32::MAX) {
            let local: Vec<u32> = basis.modes.iter().map(|&md| s[md as usize]).collect();
            if let Some(row) = basis.index_of(&local) {
                m.add_to(row, col, a);
            }
        }
    }
    m
}

/// Truncated numeric trace `Σ_k (q e^{-η})^k ⟨k|x|k⟩ / Σ_k (q e^{-η})^k`,
/// with occupation of each mode cut at `trunc.n_max`.
pub fn damped_numeric_trace(x: &NormalOrderedOp, q: &TwistWeights, trunc: FockTruncation, eta: f64) -> Result<C64> {
    let qd = q.damped(eta);
    for (m, qm) in qd.iter() {
        if qm.norm() >= 1.0 {
            return Err(QlabError::NotConverged(format!("|q e^-η| >= 1 for mode {}", q.label(m))));
        }
        if qm.norm().powi(trunc.n_max as i32) > 1e-13 {
            return Err(QlabError::NotConverged(format!(
                "damped series for mode {} not converged at N_max = {}",
                q.label(m),
                trunc.n_max
            )));
        }
    }
    let mut total = C64::default();
    'terms: for (mono, v) in &x.terms {
        let mut w = *v;
        for &(m, j, k) in mono {
            if j != k {
                continue 'terms;
            }
            let qm = qd.get(m).ok_or_else(|| QlabError::Usage(format!("no twist weight for mode {}", q.label(m))))?;
            let (mut num, mut den, mut pw) = (C64::default(), C64::default(), c(1.0));
            for nn in 0..=trunc.n_max {
                num += pw * falling(nn, k);
                den += pw;
                pw *= qm;
            }
            w *= num / den;
        }
        total += w;
    }
    Ok(total)
}

/// Polynomial (Neville) extrapolation of samples `(η_i, f_i)` to `η = 0`.
pub fn richardson(etas: &[f64], values: &[C64]) -> C64 {
    assert_eq!(etas.len(), values.len());
    let mut p = values.to_vec();
    let n = p.len();
    for m in 1..n {
        for i in 0..n - m {
            let (xi, xj) = (etas[i], etas[i + m]);
            p[i] = (p[i + 1] * xi - p[i] * xj) / (xi - xj);
        }
    }
    p[0]
}

/// Damped traces at each `η` of `schedule`, extrapolated to `η → 0`.
pub fn extrapolated_trace(x: &NormalOrderedOp, q: &TwistWeights, trunc: FockTruncation, schedule: &[f64]) -> Result<C64> {
    let vals = schedule
        .iter()
        .map(|&eta| damped_numeric_trace(x, q, trunc, eta))
        .collect::<Result<Vec<_>>>()?;
    Ok(richardson(schedule, &vals))
}

/// Smallest per-mode cutoff making every damped series converge to ~1e-15.
pub fn cutoff_for(q: &TwistWeights, eta: f64) -> u32 {
    let worst = q.iter().map(|(_, qm)| qm.norm() * (-eta).exp()).fold(0.0, f64::max);
    if worst <= 0.0 {
        return 1;
    }
    ((1e-16f64).ln() / worst.ln()).ceil().max(1.0) as u32 + 40
}
