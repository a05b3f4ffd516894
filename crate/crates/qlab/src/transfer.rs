//! Twisted transfer matrices: boundary twists, monodromies and the traced
//! operator families `X_I`, `Q_I`, `T_Box`, `T⁺`.
//!
//! Quantum-space convention: the monodromy entry `(i⃗, j⃗)` is the auxiliary product
//! `L_{i1 j1}(z) L_{i2 j2}(z) ⋯ L_{iL jL}(z)`, site 1 leftmost, and the operator on
//! `(C^n)^{⊗L}` has matrix element `⟨i⃗| X |j⃗⟩` equal to its twisted trace.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{QlabError, Result};
use crate::glrep::{fundamental_rep, trivial_rep, verma_rep, weyl_orbit, CarrierOp, GlRep};
use crate::lax::{CanonicalData, IndexSet, LaxMatrix, OpMatrix};
use crate::oscillator::{falling, normalized_trace, Mode, ModeRegistry, NormalOrderedOp, TwistWeights};
use crate::tensor::{digits, index_of, QuantumOperator};

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Boundary fields `Φ_1..Φ_n` with `Σ Φ_a = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwistConfig {
    phi: Vec<C64>,
}

impl TwistConfig {
    pub fn new(phi: Vec<C64>) -> Result<Self> {
        if phi.len() < 2 {
            return Err(QlabError::Usage("at least two twist fields are required".into()));
        }
        let sum: C64 = phi.iter().sum();
        if sum.norm() > 1e-12 {
            return Err(QlabError::Usage(format!("twist fields must sum to zero, got {sum}")));
        }
        Ok(Self { phi })
    }

    pub fn real(phi: &[f64]) -> Result<Self> {
        Self::new(phi.iter().map(|&p| c(p)).collect())
    }

    /// Subtracts the mean; the flag tells whether anything changed.
    pub fn renormalized(phi: Vec<C64>) -> Result<(Self, bool)> {
        if phi.is_empty() {
            return Err(QlabError::Usage("empty twist".into()));
        }
        let mean = phi.iter().sum::<C64>() / phi.len() as f64;
        let changed = mean.norm() > 1e-12;
        Self::new(phi.into_iter().map(|p| p - mean).collect()).map(|t| (t, changed))
    }

    /// Default twist: evenly spread angles with a small irregular offset, so that
    /// every `|1 − e^{i(Φ_a − Φ_b)}|` stays of order one.
    pub fn generic(n: usize) -> Self {
        let jitter = [0.0, 0.07, -0.05, 0.03, -0.02, 0.01];
        let mut phi: Vec<C64> = (0..n)
            .map(|a| c(1.1 * (n as f64 - 1.0 - 2.0 * a as f64) / n as f64 + jitter[a % jitter.len()]))
            .collect();
        let mean = phi.iter().sum::<C64>() / n as f64;
        phi.iter_mut().for_each(|p| *p -= mean);
        Self { phi }
    }

    pub fn n(&self) -> usize {
        self.phi.len()
    }

    /// `Φ_a`, 1-based.
    pub fn phi(&self, a: usize) -> C64 {
        self.phi[a - 1]
    }

    pub fn values(&self) -> &[C64] {
        &self.phi
    }

    /// `Σ_{a∈I} Φ_a`.
    pub fn sum_over(&self, set: &IndexSet) -> C64 {
        set.elems().iter().map(|&a| self.phi(a)).sum()
    }
}

/// How the representation (gl-carrier) modes are traced.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TraceMethod {
    /// Closed-form geometric sums, analytically continued to `|q| = 1`.
    Exact,
    /// Weights damped by `e^{-η}` and summed numerically up to convergence.
    Damped { eta: f64 },
}

/// Diagonal data of `D_I = exp{i Σ_{a∈I} Φ_a J_aa − i Σ (Φ_a − Φ_ḃ) b†_{aḃ} b_{ḃa}}`.
///
/// On each carrier index `i` the representation part acts as
/// `phase_i · Π_m q_m^{N_m}` over the representation modes; the canonical
/// oscillators carry `q = e^{-i(Φ_a − Φ_ḃ)}`.
#[derive(Clone, Debug)]
pub struct TwistOperatorD {
    pub set: IndexSet,
    pub carrier_phase: Vec<C64>,
    /// Weights of the representation modes (standard trace).
    pub rep_weights: TwistWeights,
    /// Weights of the canonical oscillators (normalized trace).
    pub osc_weights: TwistWeights,
}

fn diagonal_exponent(x: &NormalOrderedOp) -> Result<(C64, Vec<(Mode, C64)>)> {
    let mut konst = C64::default();
    let mut lin = Vec::new();
    for (mono, &v) in x.terms() {
        match mono.as_slice() {
            [] => konst += v,
            [(m, 1, 1)] => lin.push((*m, v)),
            _ => return Err(QlabError::Numerical("twist exponent is not linear in number operators".into())),
        }
    }
    Ok((konst, lin))
}

/// Solves the twist condition for the canonical operator of `canon`.
pub fn build_twist_d(canon: &CanonicalData, twist: &TwistConfig) -> Result<TwistOperatorD> {
    if twist.n() != canon.n() {
        return Err(QlabError::Dimension { expected: canon.n(), found: twist.n() });
    }
    let rep = &canon.rep;
    let mut acc = vec![C64::default(); rep.d];
    let mut mode_acc: BTreeMap<Mode, C64> = rep.modes.iter().map(|&m| (m, C64::default())).collect();
    for (pos, &a) in canon.set.elems().iter().enumerate() {
        let phi = twist.phi(a);
        for (i, j, x) in rep.gen(pos + 1, pos + 1).blocks() {
            if i != j {
                return Err(QlabError::Numerical(format!("J_{a}{a} is not diagonal on the carrier")));
            }
            let (k, lin) = diagonal_exponent(x)?;
            acc[i] += phi * k;
            for (m, v) in lin {
                *mode_acc.entry(m).or_default() += phi * v;
            }
        }
    }
    let carrier_phase = acc.iter().map(|&e| (I * e).exp()).collect();
    let mut rep_weights = TwistWeights::new();
    for (m, e) in mode_acc {
        rep_weights.insert(m, (I * e).exp(), format!("rep mode {m}"));
    }
    let mut osc_weights = TwistWeights::new();
    for (&(a, cd), &m) in &canon.osc {
        let q = (-I * (twist.phi(a) - twist.phi(cd))).exp();
        osc_weights.insert(m, q, format!("b[{a},{cd}]"));
    }
    Ok(TwistOperatorD { set: canon.set.clone(), carrier_phase, rep_weights, osc_weights })
}

impl TwistOperatorD {
    fn weight_of(&self, m: Mode) -> Option<C64> {
        self.rep_weights.get(m).or_else(|| self.osc_weights.get(m))
    }

    /// Max over all terms of `|D x D⁻¹ − e^{i(Φ_b−Φ_a)} x|` for every Lax entry `x = L_ab`.
    pub fn conjugation_residual(&self, lax: &LaxMatrix, twist: &TwistConfig) -> Result<f64> {
        let mut worst = 0.0f64;
        for part in [&lax.lead, &lax.konst] {
            for (a, b, x) in part.entries() {
                let target = (I * (twist.phi(b) - twist.phi(a))).exp();
                for (i, j, blk) in x.blocks() {
                    let carrier = self.carrier_phase[i] / self.carrier_phase[j];
                    for (mono, v) in blk.terms() {
                        let mut f = carrier;
                        for &(m, cr, an) in mono {
                            let q = self
                                .weight_of(m)
                                .ok_or_else(|| QlabError::Usage(format!("mode {m} has no twist weight")))?;
                            f *= q.powi(cr as i32 - an as i32);
                        }
                        worst = worst.max(((f - target) * v).norm());
                    }
                }
            }
        }
        Ok(worst)
    }
}

/// Lax operator, its twist and how to trace its carrier.
#[derive(Clone, Debug)]
pub struct Auxiliary {
    pub canon: CanonicalData,
    pub lax: LaxMatrix,
    pub twist_d: TwistOperatorD,
    /// `Σ_{a∈I} Φ_a`, the exponent of the scalar prefactor.
    pub phase: C64,
}

/// Carrier of the `gl(p)` factor.
#[derive(Clone, Debug, PartialEq)]
pub enum AuxRep {
    /// Weight `(0, …, 0)`.
    Trivial,
    /// Defining representation of `gl(p)`.
    Fundamental,
    /// Highest-weight Verma module.
    Verma(Vec<C64>),
}

impl Auxiliary {
    pub fn new(set: &IndexSet, rep: &AuxRep, twist: &TwistConfig) -> Result<Self> {
        let mut reg = ModeRegistry::new();
        let p = set.len();
        let glrep: GlRep = match rep {
            AuxRep::Trivial => trivial_rep(p),
            AuxRep::Fundamental => fundamental_rep(p),
            AuxRep::Verma(w) => {
                if w.len() != p {
                    return Err(QlabError::Dimension { expected: p, found: w.len() });
                }
                verma_rep(w, &mut reg)?
            }
        };
        let canon = CanonicalData::new(set.clone(), glrep, &mut reg, "")?;
        Self::from_canonical(canon, twist)
    }

    /// Uses prebuilt canonical data, e.g. the output of a fusion.
    pub fn from_canonical(canon: CanonicalData, twist: &TwistConfig) -> Result<Self> {
        let lax = canon.lax();
        let twist_d = build_twist_d(&canon, twist)?;
        let phase = twist.sum_over(&canon.set);
        Ok(Self { canon, lax, twist_d, phase })
    }

    pub fn n(&self) -> usize {
        self.lax.n()
    }
}

/// Per-mode trace factors for one trace method, computed once.
struct Tracer<'a> {
    d: &'a TwistOperatorD,
    method: TraceMethod,
    /// `rep_table[m][k] = Σ_N q^N falling(N, k)` (standard, not normalized).
    rep_table: BTreeMap<Mode, Vec<C64>>,
}

impl<'a> Tracer<'a> {
    fn new(d: &'a TwistOperatorD, method: TraceMethod, k_max: u32) -> Result<Self> {
        let mut rep_table = BTreeMap::new();
        for (m, q) in d.rep_weights.iter() {
            let row = match method {
                TraceMethod::Exact => {
                    if (q - c(1.0)).norm() < 1e-12 {
                        return Err(QlabError::DegenerateTwist(d.rep_weights.label(m)));
                    }
                    // Σ_N q^N N!/(N-k)! = k! q^k / (1-q)^{k+1}
                    let mut row = Vec::new();
                    let mut fact = 1.0;
                    for k in 0..=k_max {
                        if k > 0 {
                            fact *= k as f64;
                        }
                        row.push(q.powu(k) * fact / (c(1.0) - q).powu(k + 1));
                    }
                    row
                }
                TraceMethod::Damped { eta } => {
                    let qd = q * (-eta).exp();
                    if qd.norm() >= 1.0 {
                        return Err(QlabError::NotConverged(format!("|q e^-η| >= 1 for {}", d.rep_weights.label(m))));
                    }
                    let cut = ((1e-17f64).ln() / qd.norm().ln()).ceil() as u32 + 4 * k_max + 40;
                    let mut row = vec![C64::default(); k_max as usize + 1];
                    let mut pw = c(1.0);
                    for nn in 0..=cut {
                        for (k, r) in row.iter_mut().enumerate() {
                            *r += pw * falling(nn, k as u32);
                        }
                        pw *= qd;
                    }
                    row
                }
            };
            rep_table.insert(m, row);
        }
        Ok(Self { d, method, rep_table })
    }

    fn trace(&self, x: &CarrierOp) -> Result<C64> {
        let mut total = C64::default();
        for i in 0..x.dim() {
            let Some(blk) = x.block(i, i) else { continue };
            let mut osc_part = NormalOrderedOp::zero();
            let mut acc = C64::default();
            'terms: for (mono, &v) in blk.terms() {
                let mut w = v;
                let mut rest = Vec::new();
                let mut seen = Vec::new();
                for &(m, j, k) in mono {
                    if j != k {
                        continue 'terms;
                    }
                    if let Some(row) = self.rep_table.get(&m) {
                        let f = row.get(k as usize).copied().ok_or_else(|| {
                            QlabError::Numerical(format!("trace table too short for power {k} ({:?})", self.method))
                        })?;
                        w *= f;
                        seen.push(m);
                    } else {
                        rest.push((m, j, k));
                    }
                }
                for (m, row) in &self.rep_table {
                    if !seen.contains(m) {
                        w *= row[0];
                    }
                }
                if rest.is_empty() {
                    acc += w;
                } else {
                    osc_part.add_term(rest, w);
                }
            }
            acc += normalized_trace(&osc_part, &self.d.osc_weights)?;
            total += self.d.carrier_phase[i] * acc;
        }
        Ok(total)
    }
}

/// Non-zero entries of the untwisted monodromy `L(z)⊗…⊗L(z)` keyed by
/// quantum-space (row, col) on `(C^n)^{⊗len}`.
pub fn build_monodromy(lax: &LaxMatrix, len: usize, z: C64) -> BTreeMap<(usize, usize), CarrierOp> {
    let n = lax.n();
    let at = lax.at(z);
    let mut out = BTreeMap::new();
    let mut stack: Vec<(usize, usize, usize, CarrierOp)> = vec![(0, 0, 0, CarrierOp::identity(lax.carrier_dim()))];
    while let Some((depth, row, col, acc)) = stack.pop() {
        if depth == len {
            out.insert((row, col), acc);
            continue;
        }
        for i in 1..=n {
            for j in 1..=n {
                let e = at.get(i, j);
                if e.is_zero() {
                    continue;
                }
                let next = acc.mul(e);
                if !next.is_zero() {
                    stack.push((depth + 1, row * n + i - 1, col * n + j - 1, next));
                }
            }
        }
    }
    out
}

fn traced_at(at: &OpMatrix, len: usize, tracer: &Tracer<'_>) -> Result<QuantumOperator> {
    if len == 0 {
        let v = tracer.trace(&CarrierOp::identity(at.carrier_dim()))?;
        return Ok(QuantumOperator::identity(1).scale(v));
    }
    let n = at.n();
    let dim = n.pow(len as u32);
    let firsts: Vec<(usize, usize)> =
        (1..=n).flat_map(|i| (1..=n).map(move |j| (i, j))).filter(|&(i, j)| !at.get(i, j).is_zero()).collect();
    let parts = firsts
        .par_iter()
        .map(|&(i, j)| -> Result<Vec<(usize, usize, C64)>> {
            let mut vals = Vec::new();
            let mut stack = vec![(1usize, i - 1, j - 1, at.get(i, j).clone())];
            while let Some((depth, row, col, acc)) = stack.pop() {
                if depth == len {
                    let v = tracer.trace(&acc)?;
                    vals.push((row, col, v));
                    continue;
                }
                for a in 1..=n {
                    for b in 1..=n {
                        let e = at.get(a, b);
                        if e.is_zero() {
                            continue;
                        }
                        let next = acc.mul(e);
                        if !next.is_zero() {
                            stack.push((depth + 1, row * n + a - 1, col * n + b - 1, next));
                        }
                    }
                }
            }
            Ok(vals)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut op = QuantumOperator::zeros(dim);
    for part in parts {
        for (r, cc, v) in part {
            op.set(r, cc, v);
        }
    }
    Ok(op)
}

/// `Tr{D m⊗…⊗m}` on `len` sites for a fixed (z-independent) matrix `m`, with an
/// exact trace. Used for the `G`-chains produced by fusion.
pub fn trace_chain(m: &OpMatrix, len: usize, d: &TwistOperatorD) -> Result<QuantumOperator> {
    let tracer = Tracer::new(d, TraceMethod::Exact, 2 * len as u32 + 1)?;
    traced_at(m, len, &tracer)
}

/// Polynomial in `z` with operator coefficients times the prefactor `e^{i z phase}`.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorPolynomial {
    pub phase: C64,
    pub coeffs: Vec<QuantumOperator>,
}

impl OperatorPolynomial {
    pub fn constant(phase: C64, op: QuantumOperator) -> Self {
        Self { phase, coeffs: vec![op] }
    }

    pub fn dim(&self) -> usize {
        self.coeffs[0].dim()
    }

    /// Highest power with a non-zero coefficient (0 for the zero polynomial).
    pub fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|c| c.nnz() > 0).unwrap_or(0)
    }

    pub fn prefactor(&self, z: C64) -> C64 {
        (I * z * self.phase).exp()
    }

    /// Polynomial part only.
    pub fn eval_poly(&self, z: C64) -> QuantumOperator {
        let mut acc = QuantumOperator::zeros(self.dim());
        for coef in self.coeffs.iter().rev() {
            acc = acc.scale(z).add(coef);
        }
        acc
    }

    /// Full value including the prefactor.
    pub fn eval(&self, z: C64) -> QuantumOperator {
        self.eval_poly(z).scale(self.prefactor(z))
    }

    /// Matrix element `(i, j)` of the polynomial part as a coefficient list.
    pub fn entry_coeffs(&self, i: usize, j: usize) -> Vec<C64> {
        self.coeffs.iter().map(|c| c.get(i, j)).collect()
    }
}

/// `len + 1` Chebyshev points on `[-2, 2]`.
fn sample_points(len: usize) -> Vec<C64> {
    let m = len + 1;
    (0..m).map(|k| c(2.0 * (std::f64::consts::PI * (2 * k + 1) as f64 / (2 * m) as f64).cos())).collect()
}

fn fit(points: &[C64], values: &[QuantumOperator], phase: C64) -> Result<OperatorPolynomial> {
    let m = points.len();
    let vander = DMatrix::from_fn(m, m, |r, k| points[r].powu(k as u32));
    let inv = vander.try_inverse().ok_or_else(|| QlabError::Numerical("singular Vandermonde system".into()))?;
    let dim = values[0].dim();
    let mut coeffs = vec![QuantumOperator::zeros(dim); m];
    let mut keys: Vec<(usize, usize)> = values.iter().flat_map(|v| v.iter().map(|(i, j, _)| (i, j))).collect();
    keys.sort_unstable();
    keys.dedup();
    for (i, j) in keys {
        for (k, coef) in coeffs.iter_mut().enumerate() {
            let v: C64 = (0..m).map(|r| inv[(k, r)] * values[r].get(i, j)).sum();
            coef.set(i, j, v);
        }
    }
    Ok(OperatorPolynomial { phase, coeffs })
}

/// Degree bound of the representation powers that can occur in a length-`len` product.
fn power_bound(aux: &Auxiliary, len: usize) -> u32 {
    let per_site = aux
        .lax
        .konst
        .entries()
        .flat_map(|(_, _, x)| x.blocks().map(|(_, _, b)| b.terms().map(|(m, _)| m.iter().map(|t| t.1.max(t.2)).max().unwrap_or(0)).max().unwrap_or(0)).collect::<Vec<_>>())
        .max()
        .unwrap_or(0);
    per_site * len as u32 + 1
}

/// `X_I(z)` for the auxiliary `aux` on a chain of `len` sites.
pub fn build_x_with(aux: &Auxiliary, len: usize, method: TraceMethod) -> Result<OperatorPolynomial> {
    if len == 0 {
        let tracer = Tracer::new(&aux.twist_d, method, 1)?;
        let v = tracer.trace(&CarrierOp::identity(aux.lax.carrier_dim()))?;
        return Ok(OperatorPolynomial::constant(aux.phase, QuantumOperator::identity(1).scale(v)));
    }
    let tracer = Tracer::new(&aux.twist_d, method, power_bound(aux, len))?;
    let points = sample_points(len);
    let values = points
        .par_iter()
        .map(|&z| traced_at(&aux.lax.at(z), len, &tracer))
        .collect::<Result<Vec<_>>>()?;
    fit(&points, &values, aux.phase)
}

/// `X_I(z, rep)` with the exact trace.
pub fn build_x(set: &IndexSet, rep: &AuxRep, twist: &TwistConfig, len: usize) -> Result<OperatorPolynomial> {
    build_x_with(&Auxiliary::new(set, rep, twist)?, len, TraceMethod::Exact)
}

/// `Q_I(z)`: trivial `gl(|I|)` weight, exact oscillator traces. `Q_∅ = 1`.
pub fn build_q(set: &IndexSet, twist: &TwistConfig, len: usize) -> Result<OperatorPolynomial> {
    let n = twist.n();
    if set.n() != n {
        return Err(QlabError::Dimension { expected: n, found: set.n() });
    }
    if set.is_empty() {
        return Ok(OperatorPolynomial::constant(c(0.0), QuantumOperator::identity(n.pow(len as u32))));
    }
    build_x(set, &AuxRep::Trivial, twist, len)
}

/// Transfer matrix in the defining representation.
pub fn build_t_box(twist: &TwistConfig, len: usize) -> Result<OperatorPolynomial> {
    build_x(&IndexSet::full(twist.n()), &AuxRep::Fundamental, twist, len)
}

/// All `2^n` Q-operators keyed by index set.
pub fn build_q_family(twist: &TwistConfig, len: usize) -> Result<BTreeMap<IndexSet, OperatorPolynomial>> {
    IndexSet::all_subsets(twist.n())
        .into_par_iter()
        .map(|s| build_q(&s, twist, len).map(|q| (s, q)))
        .collect::<Result<Vec<_>>>()
        .map(|v| v.into_iter().collect())
}

/// Conserved occupation numbers `m_a` of a basis state.
pub fn occupations(index: usize, n: usize, len: usize) -> Vec<usize> {
    let mut m = vec![0; n];
    for d in digits(index, n, len) {
        m[d] += 1;
    }
    m
}

/// Max `|[N_a, X]|` over all coefficients: zero iff `X` is block-diagonal in sectors.
pub fn sector_violation(op: &QuantumOperator, n: usize, len: usize) -> f64 {
    op.iter()
        .filter(|&(i, j, _)| occupations(i, n, len) != occupations(j, n, len))
        .map(|(_, _, v)| v.norm())
        .fold(0.0, f64::max)
}

/// Quantum-space basis index of a digit string (0-based digits).
pub fn basis_index(d: &[usize], n: usize) -> usize {
    index_of(d, n)
}

/// Damping schedule used when none is supplied.
pub const DEFAULT_ETA_SCHEDULE: [f64; 6] = [0.2, 0.1, 0.05, 0.025, 0.0125, 0.00625];

/// Outcome of the alternating Verma sum check.
#[derive(Clone, Debug)]
pub struct BggReport {
    /// Max over samples and entries of `|T_Λ − Σ ±T⁺|` after extrapolation.
    pub operator_residual: f64,
    /// Max over samples of the eigenvalue mismatch, in the eigenbasis of `T_Λ`.
    pub eigen_residual: f64,
    /// Same sum computed with analytically continued traces.
    pub exact_residual: f64,
}

fn finite_t(weight: &[i64], twist: &TwistConfig, len: usize) -> Result<OperatorPolynomial> {
    let n = twist.n();
    let full = IndexSet::full(n);
    if weight.iter().all(|&w| w == 0) {
        build_x(&full, &AuxRep::Trivial, twist, len)
    } else if weight[0] == 1 && weight[1..].iter().all(|&w| w == 0) {
        build_x(&full, &AuxRep::Fundamental, twist, len)
    } else {
        Err(QlabError::Usage("finite-dimensional transfer matrices exist for weights (0,…) and (1,0,…) only".into()))
    }
}

/// `T_Λ(z) − Σ_σ (−1)^{l(σ)} T⁺_{σ(Λ+ρ)−ρ}(z)` at the sample points, with the Verma
/// traces damped at each `η` of `schedule` and Richardson-extrapolated to `η = 0`.
pub fn bgg_eigen_check(weight: &[i64], twist: &TwistConfig, len: usize, zs: &[C64], schedule: &[f64]) -> Result<BggReport> {
    let n = twist.n();
    if weight.len() != n {
        return Err(QlabError::Dimension { expected: n, found: weight.len() });
    }
    let full = IndexSet::full(n);
    let t_fin = finite_t(weight, twist, len)?;
    let wc: Vec<C64> = weight.iter().map(|&w| c(w as f64)).collect();
    let orbit = weyl_orbit(&wc);
    let mut damped_sums: Vec<Vec<QuantumOperator>> = Vec::new();
    let mut exact_sums = vec![QuantumOperator::zeros(n.pow(len as u32)); zs.len()];
    for &eta in schedule {
        damped_sums.push(vec![QuantumOperator::zeros(n.pow(len as u32)); zs.len()]);
        let _ = eta;
    }
    for (w, sign) in &orbit {
        let aux = Auxiliary::new(&full, &AuxRep::Verma(w.clone()), twist)?;
        let s = c(*sign as f64);
        let ex = build_x_with(&aux, len, TraceMethod::Exact)?;
        for (k, &z) in zs.iter().enumerate() {
            exact_sums[k] = exact_sums[k].add(&ex.eval(z).scale(s));
        }
        let damped = schedule
            .par_iter()
            .map(|&eta| build_x_with(&aux, len, TraceMethod::Damped { eta }))
            .collect::<Result<Vec<_>>>()?;
        for (e, poly) in damped.iter().enumerate() {
            for (k, &z) in zs.iter().enumerate() {
                damped_sums[e][k] = damped_sums[e][k].add(&poly.eval(z).scale(s));
            }
        }
    }
    let mut operator_residual = 0.0f64;
    let mut eigen_residual = 0.0f64;
    let mut exact_residual = 0.0f64;
    for (k, &z) in zs.iter().enumerate() {
        let target = t_fin.eval(z);
        let dim = target.dim();
        let mut extrap = QuantumOperator::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                let vals: Vec<C64> = damped_sums.iter().map(|s| s[k].get(i, j)).collect();
                extrap.set(i, j, crate::oscillator::richardson(schedule, &vals));
            }
        }
        operator_residual = operator_residual.max(target.sub(&extrap).max_abs());
        exact_residual = exact_residual.max(target.sub(&exact_sums[k]).max_abs());
        eigen_residual = eigen_residual.max(eigen_mismatch(&target, &extrap)?);
    }
    Ok(BggReport { operator_residual, eigen_residual, exact_residual })
}

/// Max `|(V⁻¹ B V)_ii − λ_i|` where `A = V diag(λ) V⁻¹`.
fn eigen_mismatch(a: &QuantumOperator, b: &QuantumOperator) -> Result<f64> {
    let (vals, vecs) = crate::spectral::eigen_decompose(&a.to_dense())?;
    let inv = vecs.clone().try_inverse().ok_or_else(|| QlabError::Numerical("defective eigenbasis".into()))?;
    let rot = &inv * b.to_dense() * &vecs;
    Ok((0..vals.len()).map(|i| (rot[(i, i)] - vals[i]).norm()).fold(0.0, f64::max))
}
