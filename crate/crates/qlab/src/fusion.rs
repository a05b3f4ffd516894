//! Fusion of canonical Lax operators and the factorization of parton products.
//!
//! Identities of the form `LHS(z) = S · X(z) · S⁻¹` are checked in two ways: on
//! buffered Fock states with the sparse vector engine, and (where the
//! conjugation series terminates) symbolically in the oscillator algebra.

use num_complex::Complex64 as C64;

use crate::error::{QlabError, Result};
use crate::glrep::{fuse_reps, scalar_rep, trivial_rep, verma_rep, GlRep};
use crate::lax::{partonic_data, CanonicalData, IndexSet, LaxMatrix, OpMatrix};
use crate::oscillator::{apply_exp, apply_op, conjugate_exp, FockBasis, FockTruncation, FockVector, Mode, ModeRegistry, NormalOrderedOp};

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Series cap for symbolic conjugations.
const MAX_AD_ORDER: u32 = 40;

/// `S = e^{Y_0} e^{Y_1} ⋯ e^{Y_m}` with every `Y_k` strictly raising the excitation number.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Similarity {
    exps: Vec<NormalOrderedOp>,
}

impl Similarity {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn from_exponents(exps: Vec<NormalOrderedOp>) -> Self {
        Self { exps: exps.into_iter().filter(|y| !y.is_empty()).collect() }
    }

    pub fn exponents(&self) -> &[NormalOrderedOp] {
        &self.exps
    }

    /// `self · other`.
    pub fn then(&self, other: &Self) -> Self {
        let mut exps = self.exps.clone();
        exps.extend(other.exps.iter().cloned());
        Self { exps }
    }

    pub fn apply(&self, v: &FockVector, n_max: u32) -> Result<FockVector> {
        let mut out = v.clone();
        for y in self.exps.iter().rev() {
            out = apply_exp(y, &out, n_max)?;
        }
        Ok(out)
    }

    pub fn apply_inv(&self, v: &FockVector, n_max: u32) -> Result<FockVector> {
        let mut out = v.clone();
        for y in &self.exps {
            out = apply_exp(&y.scale(c(-1.0)), &out, n_max)?;
        }
        Ok(out)
    }

    /// `S X S⁻¹`.
    pub fn conjugate(&self, x: &NormalOrderedOp) -> Result<NormalOrderedOp> {
        let mut out = x.clone();
        for y in self.exps.iter().rev() {
            out = conjugate_exp(y, &out, MAX_AD_ORDER)?;
        }
        Ok(out)
    }

    /// `S⁻¹ X S`.
    pub fn conjugate_inv(&self, x: &NormalOrderedOp) -> Result<NormalOrderedOp> {
        let mut out = x.clone();
        for y in &self.exps {
            out = conjugate_exp(&y.scale(c(-1.0)), &out, MAX_AD_ORDER)?;
        }
        Ok(out)
    }

    pub fn conjugate_matrix(&self, m: &OpMatrix) -> Result<OpMatrix> {
        map_osc(m, |x| self.conjugate(x))
    }

    pub fn conjugate_inv_matrix(&self, m: &OpMatrix) -> Result<OpMatrix> {
        map_osc(m, |x| self.conjugate_inv(x))
    }
}

fn map_osc(m: &OpMatrix, f: impl Fn(&NormalOrderedOp) -> Result<NormalOrderedOp>) -> Result<OpMatrix> {
    if m.carrier_dim() != 1 {
        return Err(QlabError::Usage("oscillator-only matrices expected".into()));
    }
    let mut out = OpMatrix::zero(m.n(), 1);
    for (i, j, x) in m.entries() {
        out.set_osc(i, j, f(&x.get(0, 0))?);
    }
    Ok(out)
}

/// Max over buffered basis states `|k⟩` and entries `(i, j)` of
/// `| ⟨r| lhs_ij |k⟩ - ⟨r| S inner_ij S⁻¹ |k⟩ |`, both levels at or below the safe level.
///
/// `width` is the size of the mode universe; `modes` spans the basis.
pub fn similarity_residual(lhs: &OpMatrix, inner: &OpMatrix, s: &Similarity, modes: &[Mode], width: usize, trunc: FockTruncation) -> Result<f64> {
    if lhs.carrier_dim() != 1 || inner.carrier_dim() != 1 {
        return Err(QlabError::Usage("oscillator-only matrices expected".into()));
    }
    let need = inner.lowering_degree();
    if trunc.buffer < need {
        return Err(QlabError::Usage(format!("carrier too small: buffer {} below lowering degree {need}", trunc.buffer)));
    }
    let safe = trunc.safe_level();
    let basis = FockBasis::new(modes, safe);
    let level = |occ: &Vec<u32>| occ.iter().sum::<u32>();
    let mut worst: f64 = 0.0;
    for occ in &basis.states {
        let mut full = vec![0u32; width];
        for (slot, &m) in modes.iter().enumerate() {
            full[m as usize] = occ[slot];
        }
        let mut k = FockVector::new();
        k.insert(full, c(1.0));
        let u = s.apply_inv(&k, trunc.n_max)?;
        for (i, j, x) in inner.entries() {
            let w = apply_op(&x.get(0, 0), &u, trunc.n_max);
            let rhs = s.apply(&w, trunc.n_max)?;
            let lhs_v = apply_op(&lhs.get(i, j).get(0, 0), &k, u32::MAX);
            let mut diff = FockVector::new();
            for (st, a) in rhs.into_iter().filter(|(st, _)| level(st) <= safe) {
                *diff.entry(st).or_default() += a;
            }
            for (st, a) in lhs_v.into_iter().filter(|(st, _)| level(st) <= safe) {
                *diff.entry(st).or_default() -= a;
            }
            worst = diff.values().fold(worst, |w, a| w.max(a.norm()));
        }
    }
    Ok(worst)
}

/// Largest coefficient of `S⁻¹ · lhs · S - inner`, computed in the oscillator algebra.
pub fn similarity_residual_exact(lhs: &OpMatrix, inner: &OpMatrix, s: &Similarity) -> Result<f64> {
    Ok(s.conjugate_inv_matrix(lhs)?.sub(inner).max_coeff())
}

/// Exponent of `S_1`: `Σ_{c∈I, ċ∈J} b†[1]_{cċ} b†[2]_{ċc}`.
pub fn build_s1(left: &CanonicalData, right: &CanonicalData) -> Result<NormalOrderedOp> {
    left.set.disjoint_union(&right.set)?;
    let mut y = NormalOrderedOp::zero();
    for &cc in left.set.elems() {
        for &cd in right.set.elems() {
            y = y.add(&left.cre(cc, cd).mul(&right.cre(cd, cc)));
        }
    }
    Ok(y)
}

/// Exponent of `S_2`: `Σ_{c∈I, ċ∈J, c̈∉I∪J} b†[1]_{cċ} b†[2]_{ċc̈} b[1]_{c̈c}`.
pub fn build_s2(left: &CanonicalData, right: &CanonicalData) -> Result<NormalOrderedOp> {
    let union = left.set.disjoint_union(&right.set)?;
    let mut y = NormalOrderedOp::zero();
    for &cc in left.set.elems() {
        for &cd in right.set.elems() {
            for cdd in union.complement() {
                y = y.add(&left.cre(cc, cd).mul(&right.cre(cd, cdd)).mul(&left.ann(cdd, cc)));
            }
        }
    }
    Ok(y)
}

/// Result of fusing `L[1]_I(z + λ + p2/2) · L[2]_J(z - p1/2) = S (L_{I∪J}(z) G) S⁻¹`.
#[derive(Clone, Debug)]
pub struct FusionResult {
    pub left: CanonicalData,
    pub right: CanonicalData,
    pub lambda: C64,
    pub fused: CanonicalData,
    pub g: OpMatrix,
    pub s: Similarity,
}

impl FusionResult {
    pub fn shift1(&self) -> C64 {
        self.lambda + c(self.right.set.len() as f64 / 2.0)
    }

    pub fn shift2(&self) -> C64 {
        c(-(self.left.set.len() as f64) / 2.0)
    }

    pub fn lhs(&self, z: C64) -> OpMatrix {
        self.left.lax().at(z + self.shift1()).mul(&self.right.lax().at(z + self.shift2()))
    }

    pub fn inner(&self, z: C64) -> OpMatrix {
        self.fused.lax().at(z).mul(&self.g)
    }

    /// Buffered residual, max over the sample points.
    pub fn residual(&self, zs: &[C64], width: usize, trunc: FockTruncation) -> Result<f64> {
        let modes = self.modes();
        let mut worst: f64 = 0.0;
        for &z in zs {
            worst = worst.max(similarity_residual(&self.lhs(z), &self.inner(z), &self.s, &modes, width, trunc)?);
        }
        Ok(worst)
    }

    pub fn residual_exact(&self, zs: &[C64]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for &z in zs {
            worst = worst.max(similarity_residual_exact(&self.lhs(z), &self.inner(z), &self.s)?);
        }
        Ok(worst)
    }

    /// Largest coefficient among commutators of `G` entries with each other and with the fused Lax entries.
    pub fn g_commutator_norm(&self) -> f64 {
        let l = self.fused.lax();
        let mut worst: f64 = 0.0;
        for (_, _, x) in self.g.entries() {
            for (_, _, y) in self.g.entries().chain(l.lead.entries()).chain(l.konst.entries()) {
                worst = worst.max(x.commutator(y).max_coeff());
            }
        }
        worst
    }

    pub fn modes(&self) -> Vec<Mode> {
        let mut m = self.left.modes();
        m.extend(self.right.modes());
        m.sort_unstable();
        m.dedup();
        m
    }
}

/// Fuses two canonical operators with disjoint index sets and oscillator realizations.
pub fn fuse(left: &CanonicalData, right: &CanonicalData, lambda: C64) -> Result<FusionResult> {
    let union = left.set.disjoint_union(&right.set)?;
    let n = left.n();
    if left.rep.d != 1 || right.rep.d != 1 {
        return Err(QlabError::Usage("fusion needs oscillator realizations".into()));
    }
    let (iset, jset) = (left.set.elems(), right.set.elems());
    let pair: Vec<Mode> = iset.iter().flat_map(|&a| jset.iter().map(move |&ad| (a, ad))).map(|k| left.osc[&k]).collect();
    let joint = fuse_reps(&left.rep, &right.rep, lambda, &pair)?;
    // Generator indices of `joint` are I then J; the canonical form wants sorted order.
    let order: Vec<usize> = iset.iter().chain(jset).copied().collect();
    let perm: Vec<usize> = union.elems().iter().map(|u| order.iter().position(|x| x == u).unwrap() + 1).collect();
    let rep = joint.reindex(&perm);
    let mut osc = std::collections::BTreeMap::new();
    for &a in union.elems() {
        for cd in union.complement() {
            let src = if left.set.contains(a) { left } else { right };
            osc.insert((a, cd), src.osc[&(a, cd)]);
        }
    }
    let fused = CanonicalData { set: union, rep, osc };
    let mut g = OpMatrix::identity(n, 1);
    for &a in iset {
        for &bd in jset {
            g.set_osc(a, bd, right.ann(a, bd).scale(c(-1.0)));
        }
    }
    let s = Similarity::from_exponents(vec![build_s1(left, right)?, build_s2(left, right)?]);
    Ok(FusionResult { left: left.clone(), right: right.clone(), lambda, fused, g, s })
}

/// Parton oscillators of an n-site product: mode `(a, c)` has creator `b†_{ac}` and annihilator `b_{ca}`.
#[derive(Clone, Debug)]
pub struct Partons {
    pub n: usize,
    pub data: Vec<CanonicalData>,
    pub width: usize,
}

impl Partons {
    pub fn new(n: usize, reg: &mut ModeRegistry) -> Result<Self> {
        let data = (1..=n).map(|a| partonic_data(n, a, reg, "")).collect::<Result<Vec<_>>>()?;
        Ok(Self { n, data, width: reg.len() })
    }

    pub fn get(&self, a: usize) -> &CanonicalData {
        &self.data[a - 1]
    }

    /// `b†_{xy}`.
    pub fn bd(&self, x: usize, y: usize) -> NormalOrderedOp {
        self.get(x).cre(x, y)
    }

    /// `b_{xy}` (annihilator of mode `(y, x)`).
    pub fn b(&self, x: usize, y: usize) -> NormalOrderedOp {
        self.get(y).ann(x, y)
    }

    pub fn modes(&self) -> Vec<Mode> {
        self.data.iter().flat_map(|d| d.modes()).collect()
    }

    /// `Π_k L_{order[k]}(z + shifts[k])`.
    pub fn product(&self, order: &[usize], shifts: &[C64], z: C64) -> OpMatrix {
        let mut acc = OpMatrix::identity(self.n, 1);
        for (&a, &s) in order.iter().zip(shifts) {
            acc = acc.mul(&self.get(a).lax().at(z + s));
        }
        acc
    }
}

fn strict_nilpotent_inverse(n: usize, nil: &OpMatrix, sign: f64) -> OpMatrix {
    // (I - sign·N)⁻¹ = Σ_k (sign·N)^k for strictly triangular N.
    let step = nil.scale(c(sign));
    let mut acc = OpMatrix::identity(n, 1);
    let mut pow = OpMatrix::identity(n, 1);
    for _ in 1..n {
        pow = pow.mul(&step);
        acc = acc.add(&pow);
    }
    acc
}

/// Factorized objects of the ordered parton product `L_1(z+λ'_1) ⋯ L_n(z+λ'_n)`.
#[derive(Clone, Debug)]
pub struct PartonFactorization {
    pub partons: Partons,
    pub weight: Vec<C64>,
    pub shifts: Vec<C64>,
    pub order: Vec<usize>,
    pub s: Similarity,
    pub g: OpMatrix,
    /// `𝓛⁺(z) = lead·z + konst`.
    pub l_plus: LaxMatrix,
    /// gl(n) representation carried by `𝓛⁺`, when built by fusion.
    pub rep: Option<GlRep>,
}

impl PartonFactorization {
    pub fn lhs(&self, z: C64) -> OpMatrix {
        self.partons.product(&self.order, &self.shifts, z)
    }

    pub fn inner(&self, z: C64) -> OpMatrix {
        self.l_plus.at(z).mul(&self.g)
    }

    pub fn residual(&self, zs: &[C64], trunc: FockTruncation) -> Result<f64> {
        let modes = self.partons.modes();
        let mut worst: f64 = 0.0;
        for &z in zs {
            worst = worst.max(similarity_residual(&self.lhs(z), &self.inner(z), &self.s, &modes, self.partons.width, trunc)?);
        }
        Ok(worst)
    }

    /// Buffered max difference of `S X S⁻¹` between two factorizations of the same product.
    pub fn compare(&self, other: &Self, zs: &[C64], trunc: FockTruncation) -> Result<f64> {
        let modes = self.partons.modes();
        let width = self.partons.width;
        let safe = trunc.safe_level();
        let basis = FockBasis::new(&modes, safe);
        let mut worst: f64 = 0.0;
        for &z in zs {
            let (a, b) = (self.inner(z), other.inner(z));
            for occ in &basis.states {
                let mut full = vec![0u32; width];
                for (slot, &m) in modes.iter().enumerate() {
                    full[m as usize] = occ[slot];
                }
                let mut k = FockVector::new();
                k.insert(full, c(1.0));
                let (ua, ub) = (self.s.apply_inv(&k, trunc.n_max)?, other.s.apply_inv(&k, trunc.n_max)?);
                for (i, j, x) in a.entries() {
                    let ra = self.s.apply(&apply_op(&x.get(0, 0), &ua, trunc.n_max), trunc.n_max)?;
                    let rb = other.s.apply(&apply_op(&b.get(i, j).get(0, 0), &ub, trunc.n_max), trunc.n_max)?;
                    let mut diff = FockVector::new();
                    for (st, v) in ra {
                        *diff.entry(st).or_default() += v;
                    }
                    for (st, v) in rb {
                        *diff.entry(st).or_default() -= v;
                    }
                    for (st, v) in diff {
                        if st.iter().sum::<u32>() <= safe {
                            worst = worst.max(v.norm());
                        }
                    }
                }
            }
        }
        Ok(worst)
    }
}

/// Objects of the explicit triangular decomposition of the identity-ordered parton product.
#[derive(Clone, Debug)]
pub struct TriangularDecomposition {
    pub n: usize,
    /// `U_1, …, U_{n+1}` and their inverses.
    pub u: Vec<OpMatrix>,
    pub u_inv: Vec<OpMatrix>,
    /// Exponents `Y_1, …, Y_n` of `S_a = e^{Y_a}`.
    pub y: Vec<NormalOrderedOp>,
}

impl TriangularDecomposition {
    pub fn new(p: &Partons) -> Self {
        let n = p.n;
        let mut u = Vec::new();
        let mut u_inv = Vec::new();
        for a in 1..=n + 1 {
            let mut n1 = OpMatrix::zero(n, 1);
            let mut n2 = OpMatrix::zero(n, 1);
            let mut n3 = OpMatrix::zero(n, 1);
            for b in 1..=n {
                for cc in b + 1..=n {
                    if cc < a {
                        n1.set_osc(b, cc, p.b(b, cc));
                    }
                    if b < a && a <= cc {
                        n2.set_osc(cc, b, p.bd(cc, b));
                    }
                    if a <= b {
                        n3.set_osc(b, cc, p.bd(b, cc));
                    }
                }
            }
            let id = OpMatrix::identity(n, 1);
            let f1 = id.add(&n1);
            let f1_inv = strict_nilpotent_inverse(n, &n1, -1.0);
            let f2 = id.sub(&n2);
            let f2_inv = id.add(&n2);
            let f3 = id.sub(&n3);
            let f3_inv = strict_nilpotent_inverse(n, &n3, 1.0);
            u.push(f1_inv.mul(&f2).mul(&f3));
            u_inv.push(f3_inv.mul(&f2_inv).mul(&f1));
        }
        let mut y = Vec::new();
        for a in 1..=n {
            let mut ya = NormalOrderedOp::zero();
            for b in 1..a {
                let mut inner = p.bd(b, a);
                for cc in b + 1..a {
                    inner = inner.add(&p.bd(cc, a).mul(&p.b(b, cc)));
                }
                ya = ya.add(&inner.mul(&p.bd(a, b)));
            }
            y.push(ya);
        }
        Self { n, u, u_inv, y }
    }

    pub fn u(&self, a: usize) -> &OpMatrix {
        &self.u[a - 1]
    }

    pub fn u_inv(&self, a: usize) -> &OpMatrix {
        &self.u_inv[a - 1]
    }

    /// `D̃_ab = b†_ab - b_ab + Σ_{c<b} b†_ac b_cb + Σ_{c>a} b†_ac b_cb`.
    pub fn d_tilde(p: &Partons, a: usize, b: usize) -> NormalOrderedOp {
        let mut x = p.bd(a, b).sub(&p.b(a, b));
        for cc in (1..b).chain(a + 1..=p.n) {
            x = x.add(&p.bd(a, cc).mul(&p.b(cc, b)));
        }
        x
    }

    /// `D_ab = -b_ab + Σ_{c>a} b†_ac b_cb`.
    pub fn d(p: &Partons, a: usize, b: usize) -> NormalOrderedOp {
        let mut x = p.b(a, b).scale(c(-1.0));
        for cc in a + 1..=p.n {
            x = x.add(&p.bd(a, cc).mul(&p.b(cc, b)));
        }
        x
    }

    /// Middle factor of the single-parton decomposition.
    pub fn parton_middle(p: &Partons, a: usize, za: C64) -> OpMatrix {
        let n = p.n;
        let mut m = OpMatrix::identity(n, 1);
        m.set_osc(a, a, NormalOrderedOp::scalar(za - c((n as f64 - 1.0) / 2.0)));
        for cc in a + 1..=n {
            m.set_osc(cc, a, Self::d_tilde(p, cc, a));
        }
        m
    }

    /// Lower-triangular middle factor with entries `D̃` (`tilde = true`) or `D`.
    pub fn lower(p: &Partons, zs: &[C64], tilde: bool) -> OpMatrix {
        let n = p.n;
        let mut m = OpMatrix::zero(n, 1);
        for a in 1..=n {
            m.set_osc(a, a, NormalOrderedOp::scalar(zs[a - 1] - c((n as f64 - 1.0) / 2.0)));
            for b in 1..a {
                m.set_osc(a, b, if tilde { Self::d_tilde(p, a, b) } else { Self::d(p, a, b) });
            }
        }
        m
    }

    /// `S_𝓛 = S_n ⋯ S_1`.
    pub fn similarity(&self) -> Similarity {
        Similarity::from_exponents(self.y.iter().rev().cloned().collect())
    }
}

/// Factorization through the explicit triangular decomposition (identity ordering only).
pub fn factorize_triangular(weight: &[C64], reg: &mut ModeRegistry) -> Result<PartonFactorization> {
    let n = weight.len();
    let partons = Partons::new(n, reg)?;
    let shifts = crate::glrep::shift_weight(weight);
    let tri = TriangularDecomposition::new(&partons);
    // 𝓛⁺(z) = U_1⁻¹ · lower(z + λ') · U_1; its leading coefficient is the identity.
    let konst_lower = TriangularDecomposition::lower(&partons, &shifts, false);
    let konst = tri.u_inv(1).mul(&konst_lower).mul(tri.u(1));
    let l_plus = LaxMatrix { lead: OpMatrix::identity(n, 1), konst };
    Ok(PartonFactorization {
        g: tri.u(n + 1).clone(),
        s: tri.similarity(),
        l_plus,
        rep: None,
        shifts,
        order: (1..=n).collect(),
        weight: weight.to_vec(),
        partons,
    })
}

/// Factorization of `L_{σ_1}(z+λ'_1) ⋯ L_{σ_n}(z+λ'_n)` by fusing from the right.
pub fn factorize_by_fusion(weight: &[C64], order: &[usize], reg: &mut ModeRegistry) -> Result<PartonFactorization> {
    let n = weight.len();
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    if sorted != (1..=n).collect::<Vec<_>>() {
        return Err(QlabError::Usage(format!("{order:?} is not a permutation of 1..={n}")));
    }
    let partons = Partons::new(n, reg)?;
    let mut last = partons.get(order[n - 1]).clone();
    last.rep = scalar_rep(weight[n - 1]);
    let mut acc = last;
    let mut s = Similarity::identity();
    let mut g = OpMatrix::identity(n, 1);
    for k in (0..n - 1).rev() {
        let f = fuse(partons.get(order[k]), &acc, weight[k])?;
        s = s.then(&f.s);
        g = f.g.mul(&g);
        acc = f.fused;
    }
    Ok(PartonFactorization {
        l_plus: acc.lax(),
        rep: Some(acc.rep.clone()),
        s,
        g,
        shifts: crate::glrep::shift_weight(weight),
        order: order.to_vec(),
        weight: weight.to_vec(),
        partons,
    })
}

/// Verma realization of gl(n) with highest weight `weight` on `n(n-1)/2` oscillators.
pub fn fused_verma(weight: &[C64], reg: &mut ModeRegistry) -> Result<GlRep> {
    verma_rep(weight, reg)
}

/// Canonical data over `set` with a Verma module of the given weight.
pub fn verma_canonical(set: IndexSet, weight: &[C64], reg: &mut ModeRegistry, tag: &str) -> Result<CanonicalData> {
    let rep = if weight.is_empty() { trivial_rep(0) } else { fused_verma(weight, reg)? };
    CanonicalData::new(set, rep, reg, tag)
}
