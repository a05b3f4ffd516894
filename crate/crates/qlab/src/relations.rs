//! Functional relations among the traced operators: Δ factors, QQ (Hirota)
//! relations, determinant formulas, fusion of `X⁺`, the `G`-chain trace,
//! Plücker ratios and Hasse-diagram combinatorics.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;

use crate::error::{QlabError, Result};
use crate::fusion::{fuse, verma_canonical};
use crate::glrep::{permutations_with_sign, shift_weight};
use crate::lax::IndexSet;
use crate::oscillator::{ModeRegistry, TwistWeights};
use crate::spectral::{poly_eval, HassePath, JointEigenstate};
use crate::tensor::QuantumOperator;
use crate::transfer::{
    build_twist_d, build_x, build_x_with, trace_chain, AuxRep, Auxiliary, OperatorPolynomial, TraceMethod, TwistConfig,
    TwistOperatorD,
};

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// `Δ_{a,b} = 2i sin((Φ_a − Φ_b)/2)`.
pub fn delta_pair(twist: &TwistConfig, a: usize, b: usize) -> C64 {
    I * 2.0 * ((twist.phi(a) - twist.phi(b)) / 2.0).sin()
}

/// `Δ_I = Π_{i<j} Δ_{a_i, a_j}`; 1 for sets with fewer than two elements.
pub fn delta(set: &IndexSet, twist: &TwistConfig) -> C64 {
    delta_ordered(set.elems(), twist)
}

/// `Π_{i<j} Δ_{e_i, e_j}` for an arbitrary ordering of distinct indices.
pub fn delta_ordered(e: &[usize], twist: &TwistConfig) -> C64 {
    let mut d = c(1.0);
    for i in 0..e.len() {
        for j in i + 1..e.len() {
            d *= delta_pair(twist, e[i], e[j]);
        }
    }
    d
}

fn q_of<'a>(qs: &'a BTreeMap<IndexSet, OperatorPolynomial>, set: &IndexSet) -> Result<&'a OperatorPolynomial> {
    qs.get(set).ok_or_else(|| QlabError::Usage(format!("Q{set} missing from the family")))
}

/// Max over `zs` of `‖Δ_{ab} Q_{I∪a∪b}(z) Q_I(z) − Q_{I∪a}(z+½) Q_{I∪b}(z−½) + Q_{I∪b}(z+½) Q_{I∪a}(z−½)‖`.
///
/// This orientation is the one compatible with [`qasdet_residual`] at `I = ∅`.
pub fn hirota_residual(
    qs: &BTreeMap<IndexSet, OperatorPolynomial>,
    set: &IndexSet,
    a: usize,
    b: usize,
    twist: &TwistConfig,
    zs: &[C64],
) -> Result<f64> {
    if a == b || set.contains(a) || set.contains(b) {
        return Err(QlabError::Usage(format!("need distinct a, b outside {set}")));
    }
    let d = delta_pair(twist, a, b);
    if d.norm() < 1e-12 {
        return Err(QlabError::DegenerateTwist(format!("Δ[{a},{b}] = 0")));
    }
    let (ia, ib) = (set.with(a)?, set.with(b)?);
    let iab = ia.with(b)?;
    let (q0, qa, qb, qab) = (q_of(qs, set)?, q_of(qs, &ia)?, q_of(qs, &ib)?, q_of(qs, &iab)?);
    let h = c(0.5);
    let mut worst = 0.0f64;
    for &z in zs {
        let lhs = qab.eval(z).mul(&q0.eval(z)).scale(d);
        let rhs = qa.eval(z + h).mul(&qb.eval(z - h)).sub(&qb.eval(z + h).mul(&qa.eval(z - h)));
        worst = worst.max(lhs.sub(&rhs).max_abs());
    }
    Ok(worst)
}

/// Determinant of a square array of mutually commuting operators by permutation expansion.
pub fn det_operator(m: &[Vec<QuantumOperator>]) -> Result<QuantumOperator> {
    let p = m.len();
    if p == 0 {
        return Err(QlabError::Usage("empty determinant".into()));
    }
    let dim = m[0][0].dim();
    let mut acc = QuantumOperator::zeros(dim);
    for (perm, sign) in permutations_with_sign(p) {
        let mut term = QuantumOperator::identity(dim);
        for (i, &j) in perm.iter().enumerate() {
            term = term.mul(&m[i][j]);
        }
        acc = acc.add(&term.scale(c(sign as f64)));
    }
    Ok(acc)
}

/// `det‖Q_{a_i}(z + shifts_j)‖` for `I = {a_1 < … < a_p}`.
pub fn det_q(qs: &BTreeMap<IndexSet, OperatorPolynomial>, set: &IndexSet, shifts: &[C64], z: C64) -> Result<QuantumOperator> {
    let n = set.n();
    let rows = set
        .elems()
        .iter()
        .map(|&a| {
            let q = q_of(qs, &IndexSet::singleton(n, a)?)?;
            Ok(shifts.iter().map(|&s| q.eval(z + s)).collect())
        })
        .collect::<Result<Vec<Vec<QuantumOperator>>>>()?;
    det_operator(&rows)
}

/// Max over `zs` of `‖Δ_I Q_I(z) − det‖Q_{a_i}(z − j + (p+1)/2)‖‖`.
pub fn qasdet_residual(qs: &BTreeMap<IndexSet, OperatorPolynomial>, set: &IndexSet, twist: &TwistConfig, zs: &[C64]) -> Result<f64> {
    let p = set.len();
    let shifts: Vec<C64> = (1..=p).map(|j| c((p as f64 + 1.0) / 2.0 - j as f64)).collect();
    let d = delta(set, twist);
    let qi = q_of(qs, set)?;
    let mut worst = 0.0f64;
    for &z in zs {
        let rhs = det_q(qs, set, &shifts, z)?;
        worst = worst.max(qi.eval(z).scale(d).sub(&rhs).max_abs());
    }
    Ok(worst)
}

/// Max over `zs` of `‖Δ_I X_I(z, □) − det‖Q_{a_i}(z + λ'_j)‖‖` with `X_I(z, □)` traced over
/// the defining representation of `gl(|I|)` and `λ' ` the shifted weight of `(1, 0, …, 0)`.
/// For `I = {1..n}` this is the determinant formula for `T_Box`.
pub fn xasdet_residual(
    qs: &BTreeMap<IndexSet, OperatorPolynomial>,
    set: &IndexSet,
    twist: &TwistConfig,
    len: usize,
    zs: &[C64],
) -> Result<f64> {
    let p = set.len();
    if p == 0 {
        return Err(QlabError::Usage("the defining representation needs a non-empty set".into()));
    }
    let mut w = vec![c(0.0); p];
    w[0] = c(1.0);
    let shifts = shift_weight(&w);
    let x = build_x(set, &AuxRep::Fundamental, twist, len)?;
    let d = delta(set, twist);
    let mut worst = 0.0f64;
    for &z in zs {
        let rhs = det_q(qs, set, &shifts, z)?;
        worst = worst.max(x.eval(z).scale(d).sub(&rhs).max_abs());
    }
    Ok(worst)
}

/// Max over `zs` of `‖Δ_I X⁺_I(z, Λ) − Π_i Q_{a_i}(z + λ'_i)‖` (exact traces).
pub fn verma_product_residual(
    qs: &BTreeMap<IndexSet, OperatorPolynomial>,
    set: &IndexSet,
    weight: &[C64],
    twist: &TwistConfig,
    len: usize,
    zs: &[C64],
) -> Result<f64> {
    let x = build_x(set, &AuxRep::Verma(weight.to_vec()), twist, len)?;
    let shifts = shift_weight(weight);
    let d = delta(set, twist);
    let n = set.n();
    let mut worst = 0.0f64;
    for &z in zs {
        let mut rhs = QuantumOperator::identity(x.dim());
        for (i, &a) in set.elems().iter().enumerate() {
            rhs = rhs.mul(&q_of(qs, &IndexSet::singleton(n, a)?)?.eval(z + shifts[i]));
        }
        worst = worst.max(x.eval(z).scale(d).sub(&rhs).max_abs());
    }
    Ok(worst)
}

/// Max over `zs` of
/// `‖Δ_I X⁺_I(z + λ + p₂/2, Λ₁) Δ_J X⁺_J(z − p₁/2, Λ₂) − Δ_{I∪J} X⁺_{I∪J}(z, Λ₁₂)‖`,
/// where the right-hand side is traced over the fused representation with
/// `Λ₁₂ = (Λ₁ + λ, Λ₂)`. `Δ_{I∪J}` is taken in the fusion order (`I` first, then `J`),
/// so interleaved and reversed index sets are allowed.
#[allow(clippy::too_many_arguments)]
pub fn fusion_x_residual(
    iset: &IndexSet,
    w1: &[C64],
    jset: &IndexSet,
    w2: &[C64],
    lambda: C64,
    twist: &TwistConfig,
    len: usize,
    zs: &[C64],
) -> Result<f64> {
    let mut reg = ModeRegistry::new();
    let left = verma_canonical(iset.clone(), w1, &mut reg, "l")?;
    let right = verma_canonical(jset.clone(), w2, &mut reg, "r")?;
    let fr = fuse(&left, &right, lambda)?;
    let xl = build_x_with(&Auxiliary::from_canonical(left, twist)?, len, TraceMethod::Exact)?;
    let xr = build_x_with(&Auxiliary::from_canonical(right, twist)?, len, TraceMethod::Exact)?;
    let order: Vec<usize> = iset.elems().iter().chain(jset.elems()).copied().collect();
    let xu = build_x_with(&Auxiliary::from_canonical(fr.fused, twist)?, len, TraceMethod::Exact)?;
    let (p1, p2) = (iset.len() as f64, jset.len() as f64);
    let (di, dj, du) = (delta(iset, twist), delta(jset, twist), delta_ordered(&order, twist));
    let mut worst = 0.0f64;
    for &z in zs {
        let lhs = xl.eval(z + lambda + p2 / 2.0).mul(&xr.eval(z - p1 / 2.0)).scale(di * dj);
        worst = worst.max(lhs.sub(&xu.eval(z).scale(du)).max_abs());
    }
    Ok(worst)
}

/// `‖ntr{D_G G⊗…⊗G} − 1‖` for the `G` matrix of fusing trivial-weight operators on `I` and `J`.
pub fn t_g_residual(iset: &IndexSet, jset: &IndexSet, twist: &TwistConfig, len: usize) -> Result<f64> {
    let mut reg = ModeRegistry::new();
    let left = verma_canonical(iset.clone(), &vec![c(0.0); iset.len()], &mut reg, "l")?;
    let right = verma_canonical(jset.clone(), &vec![c(0.0); jset.len()], &mut reg, "r")?;
    let fr = fuse(&left, &right, c(0.0))?;
    let dj = build_twist_d(&fr.right, twist)?;
    let g_modes = fr.g.modes();
    let mut osc = TwistWeights::new();
    for (m, q) in dj.osc_weights.iter() {
        if g_modes.contains(&m) {
            osc.insert(m, q, dj.osc_weights.label(m));
        }
    }
    let d = TwistOperatorD { set: fr.fused.set.clone(), carrier_phase: vec![c(1.0)], rep_weights: TwistWeights::new(), osc_weights: osc };
    let t = trace_chain(&fr.g, len, &d)?;
    Ok(t.sub(&QuantumOperator::identity(t.dim())).max_abs())
}

/// Eigenvalue of `Q_I(z)` on a joint eigenstate, prefactor included.
pub fn q_eigenvalue(state: &JointEigenstate, set: &IndexSet, twist: &TwistConfig, z: C64) -> C64 {
    (I * z * twist.sum_over(set)).exp() * poly_eval(&state.q_polys[set], z)
}

/// `X_{I_k}(z_1, …, z_k) = det‖Q_{a_i}(z_j)‖ / Δ_{I_k}` on an eigenstate; zero when the
/// number of arguments differs from `k`.
fn x_minor(state: &JointEigenstate, path: &HassePath, twist: &TwistConfig, k: usize, args: &[C64]) -> C64 {
    if args.len() != k {
        return C64::default();
    }
    if k == 0 {
        return c(1.0);
    }
    let n = path.n();
    let mut det = C64::default();
    for (perm, sign) in permutations_with_sign(k) {
        let mut term = c(sign as f64);
        for (i, &j) in perm.iter().enumerate() {
            term *= q_eigenvalue(state, &IndexSet::singleton(n, path.0[i]).unwrap(), twist, args[j]);
        }
        det += term;
    }
    det / delta(&path.level_set(k), twist)
}

/// Relative mismatch of the three-term ratio identity
/// `X_k(z₀,z₂…z_k)/X_k(z₁…z_k) = X_k(z₀…z_{k−1})/X_k(z₁…z_k) · X_{k−1}(z₂…z_k)/X_{k−1}(z₁…z_{k−1})
///  + X_{k−1}(z₀,z₂…z_{k−1})/X_{k−1}(z₁…z_{k−1})` on one eigenstate, `zs = [z₀, …, z_k]`,
/// scaled by the largest of the three terms (and at least 1).
pub fn plucker_residual(state: &JointEigenstate, path: &HassePath, twist: &TwistConfig, k: usize, zs: &[C64]) -> Result<f64> {
    if k == 0 || k > path.n() || zs.len() != k + 1 {
        return Err(QlabError::Usage(format!("need 1 <= k <= n and k + 1 arguments (k = {k})")));
    }
    let x = |level: usize, idx: &[usize]| -> C64 {
        let args: Vec<C64> = idx.iter().map(|&i| zs[i]).collect();
        x_minor(state, path, twist, level, &args)
    };
    let r = |from: usize, to: usize| -> Vec<usize> { (from..=to).collect() };
    let mut a02k = vec![0];
    a02k.extend(r(2, k));
    let mut a02km1 = vec![0];
    if k >= 2 {
        a02km1.extend(r(2, k - 1));
    }
    let den_k = x(k, &r(1, k));
    let den_km1 = x(k - 1, &r(1, k - 1));
    if den_k.norm() < 1e-14 || den_km1.norm() < 1e-14 {
        return Err(QlabError::Numerical("vanishing denominator in the ratio identity".into()));
    }
    let lhs = x(k, &a02k) / den_k;
    let t1 = x(k, &r(0, k - 1)) / den_k * x(k - 1, &r(2, k)) / den_km1;
    let t2 = x(k - 1, &a02km1) / den_km1;
    let scale = lhs.norm().max(t1.norm()).max(t2.norm()).max(1.0);
    Ok((lhs - t1 - t2).norm() / scale)
}

/// Relative mismatch of
/// `T(z + s)/Q_{I_n}(z) = Σ_{k=0}^{n−1} Q_{I_{n−k}}(z+1+k/2)/Q_{I_{n−k}}(z+k/2) · Q_{I_{n−k−1}}(z−½+k/2)/Q_{I_{n−k−1}}(z+½+k/2)`
/// on one eigenstate, with `T` the `T_Box` eigenvalue.
pub fn tbox_expansion_residual(state: &JointEigenstate, path: &HassePath, twist: &TwistConfig, shift: C64, z: C64) -> Result<f64> {
    let n = path.n();
    let q = |k: usize, w: C64| q_eigenvalue(state, &path.level_set(k), twist, w);
    let t = poly_eval(&state.t_poly, z + shift);
    let qn = q(n, z);
    if qn.norm() < 1e-14 {
        return Err(QlabError::Numerical("Q_{1..n} vanishes at the sample point".into()));
    }
    let lhs = t / qn;
    let mut rhs = C64::default();
    for k in 0..n {
        let kk = k as f64 / 2.0;
        rhs += q(n - k, z + 1.0 + kk) / q(n - k, z + kk) * q(n - k - 1, z - 0.5 + kk) / q(n - k - 1, z + 0.5 + kk);
    }
    Ok((lhs - rhs).norm() / lhs.norm().max(1.0))
}

/// Inclusion lattice of subsets of `{1..n}`.
#[derive(Clone, Debug)]
pub struct HasseDiagram {
    pub n: usize,
    pub nodes: Vec<IndexSet>,
    /// Covering pairs `(I, I ∪ {a})`.
    pub edges: Vec<(IndexSet, IndexSet)>,
    /// `(I, a, b)` with `a < b`, both outside `I`.
    pub quadrilaterals: Vec<(IndexSet, usize, usize)>,
    /// Maximal chains as orderings `(a_1, …, a_n)`.
    pub chains: Vec<HassePath>,
}

pub const MAX_HASSE_N: usize = 6;

pub fn enumerate_hasse(n: usize) -> Result<HasseDiagram> {
    if n == 0 || n > MAX_HASSE_N {
        return Err(QlabError::Usage(format!("Hasse diagrams are enumerated for 1 <= n <= {MAX_HASSE_N}")));
    }
    let nodes = IndexSet::all_subsets(n);
    let mut edges = Vec::new();
    let mut quadrilaterals = Vec::new();
    for s in &nodes {
        let comp = s.complement();
        for &a in &comp {
            edges.push((s.clone(), s.with(a)?));
        }
        for (i, &a) in comp.iter().enumerate() {
            for &b in &comp[i + 1..] {
                quadrilaterals.push((s.clone(), a, b));
            }
        }
    }
    let chains = crate::spectral::all_paths(n);
    Ok(HasseDiagram { n, nodes, edges, quadrilaterals, chains })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use crate::spectral::{joint_diagonalize, Family, HassePath};
    use crate::transfer::{build_q_family, build_t_box};

    fn tw3() -> TwistConfig {
        TwistConfig::real(&[0.7, -0.4, -0.3]).unwrap()
    }

    fn zs() -> Vec<C64> {
        vec![c(0.31), C64::new(-0.4, 0.25), C64::new(1.2, -0.6), c(-0.9), C64::new(0.05, 0.7)]
    }

    #[test]
    fn delta_values() {
        let tw = tw3();
        assert_eq!(delta(&IndexSet::empty(3), &tw), c(1.0));
        assert_eq!(delta(&IndexSet::singleton(3, 2).unwrap(), &tw), c(1.0));
        let d12 = delta_pair(&tw, 1, 2);
        assert!((d12 - I * 2.0 * (0.55f64).sin()).norm() < 1e-15);
        assert!((delta_pair(&tw, 2, 1) + d12).norm() < 1e-15);
        let full = delta(&IndexSet::full(3), &tw);
        assert!((full - d12 * delta_pair(&tw, 1, 3) * delta_pair(&tw, 2, 3)).norm() < 1e-15);
    }

    #[test]
    fn hirota_all_quadrilaterals() {
        for (tw, len) in [(TwistConfig::real(&[0.45, -0.45]).unwrap(), 1), (tw3(), 2)] {
            let qs = build_q_family(&tw, len).unwrap();
            let hd = enumerate_hasse(tw.n()).unwrap();
            for (s, a, b) in &hd.quadrilaterals {
                let r = hirota_residual(&qs, s, *a, *b, &tw, &zs()).unwrap();
                assert!(r < 1e-10, "{s} {a} {b}: {r}");
                let swapped = hirota_residual(&qs, s, *b, *a, &tw, &zs()).unwrap();
                assert!((swapped - r).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn determinant_formulas() {
        let tw = tw3();
        let qs = build_q_family(&tw, 2).unwrap();
        for s in IndexSet::all_subsets(3).into_iter().filter(|s| !s.is_empty()) {
            assert!(qasdet_residual(&qs, &s, &tw, &zs()).unwrap() < 1e-10, "{s}");
            assert!(xasdet_residual(&qs, &s, &tw, 2, &zs()).unwrap() < 1e-10, "{s}");
        }
        let t = build_t_box(&tw, 2).unwrap();
        let x = build_x(&IndexSet::full(3), &AuxRep::Fundamental, &tw, 2).unwrap();
        assert!(t.eval(c(0.3)).sub(&x.eval(c(0.3))).max_abs() < 1e-14);
    }

    #[test]
    fn verma_trace_factorizes_into_q() {
        let tw = tw3();
        let qs = build_q_family(&tw, 2).unwrap();
        let w = [C64::new(0.3, 0.2), c(-0.7), c(1.1)];
        assert!(verma_product_residual(&qs, &IndexSet::full(3), &w, &tw, 2, &zs()).unwrap() < 1e-10);
        let s = IndexSet::new(3, &[1, 3]).unwrap();
        assert!(verma_product_residual(&qs, &s, &w[..2], &tw, 2, &zs()).unwrap() < 1e-10);
    }

    #[test]
    fn fusion_of_x_plus() {
        let tw = tw3();
        let i1 = IndexSet::singleton(3, 1).unwrap();
        let j23 = IndexSet::new(3, &[2, 3]).unwrap();
        let r = fusion_x_residual(&i1, &[c(0.4)], &j23, &[c(-0.2), C64::new(0.1, 0.3)], c(0.6), &tw, 2, &zs()).unwrap();
        assert!(r < 1e-10, "{r}");
        let j2 = IndexSet::singleton(3, 2).unwrap();
        let r = fusion_x_residual(&j2, &[c(0.0)], &i1, &[c(0.0)], c(-0.3), &tw, 2, &zs()).unwrap();
        assert!(r < 1e-10, "{r}");
        let i13 = IndexSet::new(3, &[1, 3]).unwrap();
        let r = fusion_x_residual(&i13, &[c(0.2), c(0.5)], &j2, &[c(-0.1)], c(0.25), &tw, 1, &zs()).unwrap();
        assert!(r < 1e-10, "{r}");
    }

    #[test]
    fn g_chain_trace_is_identity() {
        let tw = tw3();
        let i1 = IndexSet::singleton(3, 1).unwrap();
        let j = IndexSet::new(3, &[2, 3]).unwrap();
        assert!(t_g_residual(&i1, &j, &tw, 2).unwrap() < 1e-13);
    }

    #[test]
    fn hasse_counts() {
        let h2 = enumerate_hasse(2).unwrap();
        assert_eq!((h2.nodes.len(), h2.quadrilaterals.len(), h2.chains.len()), (4, 1, 2));
        let h3 = enumerate_hasse(3).unwrap();
        assert_eq!((h3.nodes.len(), h3.quadrilaterals.len(), h3.chains.len()), (8, 6, 6));
        assert_eq!(h3.edges.len(), 12);
        let h4 = enumerate_hasse(4).unwrap();
        assert_eq!((h4.nodes.len(), h4.chains.len()), (16, 24));
        assert!(enumerate_hasse(7).is_err());
    }

    #[test]
    fn plucker_and_tbox_expansion() {
        let tw = tw3();
        let fam = Family::build(&tw, 2).unwrap();
        let data = joint_diagonalize(&fam, 5).unwrap();
        let zs = [c(0.3), C64::new(-0.2, 0.4), c(1.3), C64::new(0.7, -0.5)];
        for st in &data.states {
            for path in crate::spectral::all_paths(3) {
                for k in 1..=3 {
                    let r = plucker_residual(st, &path, &tw, k, &zs[..=k]).unwrap();
                    assert!(r < 1e-10, "k = {k}: {r}");
                }
                let r = tbox_expansion_residual(st, &path, &tw, c(0.0), c(0.37)).unwrap();
                assert!(r < 1e-10, "{r}");
                // the shift 1/n does not reproduce the expansion
                assert!(tbox_expansion_residual(st, &path, &tw, c(1.0 / 3.0), c(0.37)).unwrap() > 1e-3);
            }
        }
    }

    #[test]
    fn empty_chain_residuals_vanish() {
        let tw = tw3();
        let qs = build_q_family(&tw, 0).unwrap();
        for (s, a, b) in &enumerate_hasse(3).unwrap().quadrilaterals {
            assert_eq!(hirota_residual(&qs, s, *a, *b, &tw, &zs()).unwrap(), 0.0, "{s} {a} {b}");
        }
        for s in IndexSet::all_subsets(3).into_iter().filter(|s| s.len() >= 2) {
            assert_eq!(qasdet_residual(&qs, &s, &tw, &zs()).unwrap(), 0.0, "{s}");
        }
        assert_eq!(xasdet_residual(&qs, &IndexSet::full(3), &tw, 0, &zs()).unwrap(), 0.0);
        let i1 = IndexSet::singleton(3, 1).unwrap();
        let j = IndexSet::new(3, &[2, 3]).unwrap();
        assert_eq!(t_g_residual(&i1, &j, &tw, 0).unwrap(), 0.0);
    }

    #[test]
    fn determinant_rows_permute_coherently() {
        let tw = tw3();
        let qs = build_q_family(&tw, 2).unwrap();
        let z = C64::new(0.2, -0.35);
        let shifts = [c(0.5), c(-0.5)];
        let s12 = IndexSet::new(3, &[1, 2]).unwrap();
        let d12 = det_q(&qs, &s12, &shifts, z).unwrap();
        // Swapping the rows by hand flips the determinant, as Δ flips under a transposition.
        let q1 = &qs[&IndexSet::singleton(3, 1).unwrap()];
        let q2 = &qs[&IndexSet::singleton(3, 2).unwrap()];
        let swapped = det_operator(&[
            vec![q2.eval(z + shifts[0]), q2.eval(z + shifts[1])],
            vec![q1.eval(z + shifts[0]), q1.eval(z + shifts[1])],
        ])
        .unwrap();
        assert!(d12.add(&swapped).max_abs() < 1e-12);
        assert!((delta_ordered(&[2, 1], &tw) + delta_ordered(&[1, 2], &tw)).norm() < 1e-15);
    }

    #[test]
    fn verma_factorization_n2() {
        let tw = TwistConfig::real(&[0.45, -0.45]).unwrap();
        for len in 1..=3 {
            let qs = build_q_family(&tw, len).unwrap();
            let w = [C64::new(0.6, 0.1), c(-0.25)];
            assert!(verma_product_residual(&qs, &IndexSet::full(2), &w, &tw, len, &zs()).unwrap() < 1e-10);
        }
    }

    #[test]
    fn plucker_n2_and_shift_invariance() {
        let tw = TwistConfig::real(&[0.45, -0.45]).unwrap();
        let fam = Family::build(&tw, 3).unwrap();
        let data = joint_diagonalize(&fam, 2).unwrap();
        let zs = [c(0.3), C64::new(-0.2, 0.4), c(1.3)];
        let path = HassePath::identity(2);
        for st in &data.states {
            let r = plucker_residual(st, &path, &tw, 2, &zs).unwrap();
            assert!(r < 1e-10, "{r}");
            let shifted: Vec<C64> = zs.iter().map(|z| z + C64::new(0.17, -0.05)).collect();
            let rs = plucker_residual(st, &path, &tw, 2, &shifted).unwrap();
            assert!(rs < 1e-10, "{rs}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn delta_is_an_alternating_product(p1 in -1.5f64..1.5, p2 in -1.5f64..1.5) {
            let tw = TwistConfig::real(&[p1, p2, -p1 - p2]).unwrap();
            let full = IndexSet::full(3);
            let prod = delta_pair(&tw, 1, 2) * delta_pair(&tw, 1, 3) * delta_pair(&tw, 2, 3);
            prop_assert!((delta(&full, &tw) - prod).norm() < 1e-14);
            prop_assert!((delta_ordered(&[1, 2, 3], &tw) - prod).norm() < 1e-14);
            prop_assert!((delta_ordered(&[2, 1, 3], &tw) + prod).norm() < 1e-14);
            prop_assert!((delta_pair(&tw, 1, 2) - C64::new(0.0, 2.0 * ((p1 - p2) / 2.0).sin())).norm() < 1e-14);
        }

        #[test]
        fn hasse_invariants(n in 1usize..=5) {
            let h = enumerate_hasse(n).unwrap();
            prop_assert_eq!(h.nodes.len(), 1 << n);
            prop_assert_eq!(h.chains.len(), (1..=n).product::<usize>());
            for (s, a, b) in &h.quadrilaterals {
                prop_assert!(a < b && !s.contains(*a) && !s.contains(*b));
            }
        }
    }

}
