//! Hamiltonian, magnon sectors, joint diagonalization of the commuting family,
//! Bethe roots and the three energy evaluations.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex64 as C64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;

use crate::error::{QlabError, Result};
use crate::lax::IndexSet;
use crate::tensor::{site_operator, QuantumOperator};
use crate::transfer::{build_q_family, build_t_box, occupations, sector_violation, OperatorPolynomial, TwistConfig};

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Iteration cap for the complex Schur decomposition.
const SCHUR_MAX_ITER: usize = 10_000;

/// Roots closer than this count as a collision.
pub const ROOT_COLLISION_TOL: f64 = 1e-9;

/// `H = 2 Σ_l (1 − Σ_ab e_ab^{(l)} e_ba^{(l+1)})` with the twisted wrap
/// `e_ab^{(L)} e_ba^{(L+1)} = e^{i(Φ_a−Φ_b)} e_ab^{(L)} e_ba^{(1)}`.
///
/// This is the wrap phase under which `H` commutes with the traced transfer
/// matrices. For `len = 1` the single bond wraps onto the same site, where the
/// order matters: the site-1 factor stands on the left.
pub fn build_hamiltonian(n: usize, len: usize, twist: &TwistConfig) -> Result<QuantumOperator> {
    if twist.n() != n {
        return Err(QlabError::Dimension { expected: n, found: twist.n() });
    }
    if len == 0 {
        return Err(QlabError::Usage("chain length must be positive".into()));
    }
    let dim = n.pow(len as u32);
    let mut h = QuantumOperator::identity(dim).scale(c(2.0 * len as f64));
    let units: Vec<Vec<QuantumOperator>> =
        (1..=n).map(|a| (1..=n).map(|b| QuantumOperator::matrix_unit(n, a, b)).collect()).collect();
    for l in 1..=len {
        let next = if l == len { 1 } else { l + 1 };
        for a in 1..=n {
            for b in 1..=n {
                let w = if l == len { (I * (twist.phi(a) - twist.phi(b))).exp() } else { c(1.0) };
                let left = site_operator(&units[a - 1][b - 1], l, len);
                let right = site_operator(&units[b - 1][a - 1], next, len);
                h = h.sub(&right.mul(&left).scale(w * 2.0));
            }
        }
    }
    Ok(h)
}

/// All occupation vectors `(m_1, …, m_n)` with `Σ m_a = len`, lexicographically descending.
pub fn sectors(n: usize, len: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, left: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n - 1 {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for k in (0..=left).rev() {
            prefix.push(k);
            rec(n, left - k, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, len, &mut Vec::new(), &mut out);
    out
}

/// Basis indices of the sector `m`, ascending.
pub fn sector_basis(m: &[usize], len: usize) -> Vec<usize> {
    let n = m.len();
    (0..n.pow(len as u32)).filter(|&i| occupations(i, n, len) == m).collect()
}

/// Restriction of `op` to the sector `m`; errors if `op` mixes sectors.
pub fn sector_project(op: &QuantumOperator, m: &[usize], len: usize) -> Result<DMatrix<C64>> {
    let n = m.len();
    let v = sector_violation(op, n, len);
    if v > 1e-10 * op.max_abs().max(1.0) {
        return Err(QlabError::Numerical(format!("operator mixes magnon sectors (|[N,X]| = {v:e})")));
    }
    let basis = sector_basis(m, len);
    Ok(DMatrix::from_fn(basis.len(), basis.len(), |r, s| op.get(basis[r], basis[s])))
}

/// Eigenvalues and unit eigenvectors (columns) from the complex Schur form.
pub fn eigen_decompose(a: &DMatrix<C64>) -> Result<(Vec<C64>, DMatrix<C64>)> {
    let m = a.nrows();
    if m == 0 {
        return Ok((vec![], DMatrix::zeros(0, 0)));
    }
    let (q, t) = Schur::try_new(a.clone(), f64::EPSILON, SCHUR_MAX_ITER)
        .ok_or_else(|| QlabError::Numerical("Schur iteration did not converge".into()))?
        .unpack();
    let scale = t.iter().map(|x| x.norm()).fold(0.0, f64::max).max(1e-300);
    let vals: Vec<C64> = (0..m).map(|k| t[(k, k)]).collect();
    let mut y = DMatrix::<C64>::zeros(m, m);
    for k in 0..m {
        y[(k, k)] = c(1.0);
        for i in (0..k).rev() {
            let s: C64 = (i + 1..=k).map(|j| t[(i, j)] * y[(j, k)]).sum();
            let mut den = t[(i, i)] - vals[k];
            if den.norm() < 1e-14 * scale {
                den = c(1e-14 * scale);
            }
            y[(i, k)] = -s / den;
        }
    }
    let mut v = q * y;
    for k in 0..m {
        let nrm = v.column(k).norm();
        if nrm == 0.0 || !nrm.is_finite() {
            return Err(QlabError::Numerical("eigenvector back-substitution failed".into()));
        }
        v.column_mut(k).unscale_mut(nrm);
    }
    Ok((vals, v))
}

/// Evaluates `Σ c_k z^k` (ascending coefficients).
pub fn poly_eval(coeffs: &[C64], z: C64) -> C64 {
    coeffs.iter().rev().fold(C64::default(), |acc, &k| acc * z + k)
}

fn poly_deriv(coeffs: &[C64]) -> Vec<C64> {
    coeffs.iter().enumerate().skip(1).map(|(k, &v)| v * k as f64).collect()
}

/// Roots of `Σ c_k z^k`: exact zero roots split off, the rest from the companion matrix
/// (Durand–Kerner if the Schur iteration stalls), polished by Newton steps.
pub fn poly_roots(coeffs: &[C64]) -> Result<Vec<C64>> {
    let deg = coeffs.iter().rposition(|v| v.norm() > 0.0).unwrap_or(0);
    if deg == 0 {
        return Ok(vec![]);
    }
    let zeros = coeffs.iter().position(|v| v.norm() > 0.0).unwrap_or(0);
    let p = &coeffs[zeros..=deg];
    let rest = p.len() - 1;
    let mut roots = vec![C64::default(); zeros];
    if rest > 0 {
        let lead = p[rest];
        let mut comp = DMatrix::<C64>::zeros(rest, rest);
        for i in 1..rest {
            comp[(i, i - 1)] = c(1.0);
        }
        for i in 0..rest {
            comp[(i, rest - 1)] = -p[i] / lead;
        }
        let mut found = match eigen_decompose(&comp) {
            Ok((vals, _)) => vals,
            Err(_) => durand_kerner(p)?,
        };
        let dp = poly_deriv(p);
        for r in found.iter_mut() {
            for _ in 0..4 {
                let d = poly_eval(&dp, *r);
                if d.norm() < 1e-300 {
                    break;
                }
                let step = poly_eval(p, *r) / d;
                *r -= step;
                if step.norm() < 1e-16 * r.norm().max(1.0) {
                    break;
                }
            }
        }
        roots.extend(found);
    }
    roots.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
    Ok(roots)
}

fn durand_kerner(p: &[C64]) -> Result<Vec<C64>> {
    let deg = p.len() - 1;
    let monic: Vec<C64> = p.iter().map(|v| v / p[deg]).collect();
    let radius = 1.0 + monic[..deg].iter().map(|v| v.norm()).fold(0.0, f64::max);
    let seed = C64::from_polar(0.4, 0.9);
    let mut z: Vec<C64> = (0..deg).map(|k| seed.powu(k as u32) * radius).collect();
    for _ in 0..2000 {
        let mut worst = 0.0f64;
        for i in 0..deg {
            let den: C64 = (0..deg).filter(|&j| j != i).map(|j| z[i] - z[j]).product();
            if den.norm() == 0.0 {
                z[i] += C64::new(1e-8, 1e-8);
                continue;
            }
            let step = poly_eval(&monic, z[i]) / den;
            z[i] -= step;
            worst = worst.max(step.norm() / z[i].norm().max(1.0));
        }
        if worst < 1e-15 {
            return Ok(z);
        }
    }
    Err(QlabError::Numerical("polynomial root iteration did not converge".into()))
}

/// One joint eigenstate of `{H, T_Box, Q_I}` inside a magnon sector.
#[derive(Clone, Debug)]
pub struct JointEigenstate {
    pub sector: Vec<usize>,
    pub index: usize,
    pub energy_direct: C64,
    /// Eigenvalue polynomial of `Q_I` without the exponential prefactor (ascending).
    pub q_polys: BTreeMap<IndexSet, Vec<C64>>,
    /// Eigenvalue polynomial of `T_Box` without its prefactor (ascending).
    pub t_poly: Vec<C64>,
}

impl JointEigenstate {
    /// Degree of `Q_I` predicted by the occupation numbers.
    pub fn expected_degree(&self, set: &IndexSet) -> usize {
        set.elems().iter().map(|&a| self.sector[a - 1]).sum()
    }

    /// Zeros of the `Q_I` eigenvalue.
    pub fn q_roots(&self, set: &IndexSet) -> Result<Vec<C64>> {
        let deg = self.expected_degree(set);
        let poly = &self.q_polys[set];
        poly_roots(&poly[..=deg.min(poly.len() - 1)])
    }
}

/// Family operators, built once per `(n, L, Φ)`.
#[derive(Clone, Debug)]
pub struct Family {
    pub n: usize,
    pub len: usize,
    pub twist: TwistConfig,
    pub hamiltonian: QuantumOperator,
    pub t_box: OperatorPolynomial,
    pub q: BTreeMap<IndexSet, OperatorPolynomial>,
}

impl Family {
    pub fn build(twist: &TwistConfig, len: usize) -> Result<Self> {
        let n = twist.n();
        Ok(Self {
            n,
            len,
            twist: twist.clone(),
            hamiltonian: build_hamiltonian(n, len, twist)?,
            t_box: build_t_box(twist, len)?,
            q: build_q_family(twist, len)?,
        })
    }
}

/// Joint diagonalization output.
#[derive(Clone, Debug)]
pub struct SpectralData {
    pub states: Vec<JointEigenstate>,
    /// Largest off-diagonal element of any family member in the joint eigenbasis,
    /// relative to that member's largest element.
    pub max_offdiag: f64,
}

fn rotate(inv: &DMatrix<C64>, v: &DMatrix<C64>, m: &DMatrix<C64>) -> DMatrix<C64> {
    inv * m * v
}

fn offdiag(m: &DMatrix<C64>) -> f64 {
    let scale = m.iter().map(|x| x.norm()).fold(0.0, f64::max).max(1.0);
    let mut w = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if i != j {
                w = w.max(m[(i, j)].norm());
            }
        }
    }
    w / scale
}

/// Diagonalizes a random combination of the family in every sector and reads off
/// each member's eigenvalues (polynomials for `Q_I` and `T_Box`).
pub fn joint_diagonalize(fam: &Family, seed: u64) -> Result<SpectralData> {
    let secs = sectors(fam.n, fam.len);
    let results = secs
        .par_iter()
        .enumerate()
        .map(|(k, m)| -> Result<(Vec<JointEigenstate>, f64)> {
            let mut rng = StdRng::seed_from_u64(seed.wrapping_add(k as u64));
            let mut rnd = || C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let h = sector_project(&fam.hamiltonian, m, fam.len)?;
            let mut combo = h.clone();
            let q_blocks: BTreeMap<&IndexSet, Vec<DMatrix<C64>>> = fam
                .q
                .iter()
                .map(|(s, q)| Ok((s, q.coeffs.iter().map(|cf| sector_project(cf, m, fam.len)).collect::<Result<Vec<_>>>()?)))
                .collect::<Result<_>>()?;
            let t_blocks = fam.t_box.coeffs.iter().map(|cf| sector_project(cf, m, fam.len)).collect::<Result<Vec<_>>>()?;
            for blocks in q_blocks.values().chain(std::iter::once(&t_blocks)) {
                let w = rnd();
                let z = rnd();
                let mut val = DMatrix::<C64>::zeros(h.nrows(), h.ncols());
                for b in blocks.iter().rev() {
                    val = val * z + b;
                }
                combo += val * w;
            }
            let (_, v) = eigen_decompose(&combo)?;
            let inv = v.clone().try_inverse().ok_or_else(|| QlabError::Numerical("joint eigenbasis is singular".into()))?;
            let mut worst = 0.0f64;
            let hd = rotate(&inv, &v, &h);
            worst = worst.max(offdiag(&hd));
            let mut q_rot: BTreeMap<&IndexSet, Vec<DMatrix<C64>>> = BTreeMap::new();
            for (s, blocks) in &q_blocks {
                let r: Vec<DMatrix<C64>> = blocks.iter().map(|b| rotate(&inv, &v, b)).collect();
                worst = r.iter().map(offdiag).fold(worst, f64::max);
                q_rot.insert(s, r);
            }
            let t_rot: Vec<DMatrix<C64>> = t_blocks.iter().map(|b| rotate(&inv, &v, b)).collect();
            worst = t_rot.iter().map(offdiag).fold(worst, f64::max);
            let mut states = Vec::new();
            for i in 0..h.nrows() {
                let q_polys = q_rot.iter().map(|(s, r)| ((*s).clone(), r.iter().map(|b| b[(i, i)]).collect())).collect();
                states.push(JointEigenstate {
                    sector: m.clone(),
                    index: i,
                    energy_direct: hd[(i, i)],
                    q_polys,
                    t_poly: t_rot.iter().map(|b| b[(i, i)]).collect(),
                });
            }
            states.sort_by(|a, b| (a.energy_direct.re, a.energy_direct.im).partial_cmp(&(b.energy_direct.re, b.energy_direct.im)).unwrap());
            for (i, s) in states.iter_mut().enumerate() {
                s.index = i;
            }
            Ok((states, worst))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut states = Vec::new();
    let mut max_offdiag = 0.0f64;
    for (s, w) in results {
        states.extend(s);
        max_offdiag = max_offdiag.max(w);
    }
    Ok(SpectralData { states, max_offdiag })
}

/// `E = 2 Σ_k 1/(1/4 − z_k²)` over the top-level roots.
pub fn energy_from_roots(top_roots: &[C64]) -> Result<C64> {
    let mut e = C64::default();
    for &z in top_roots {
        let den = c(0.25) - z * z;
        if den.norm() < 1e-12 {
            return Err(QlabError::Numerical(format!("root {z} sits at ±1/2")));
        }
        e += c(2.0) / den;
    }
    Ok(e)
}

/// `E = 2L − 2 d/dz log T(z)` at `z = 0`, where the fundamental Lax operator is the
/// permutation. `t_poly` excludes the prefactor `e^{i z phase}`, whose log-derivative
/// `i·phase` is added analytically.
pub fn energy_from_tbox(t_poly: &[C64], phase: C64, len: usize) -> Result<C64> {
    let t0 = poly_eval(t_poly, C64::default());
    if t0.norm() < 1e-14 {
        return Err(QlabError::Numerical("T_Box eigenvalue vanishes at the evaluation point".into()));
    }
    let dt = t_poly.get(1).copied().unwrap_or_default();
    Ok(c(2.0 * len as f64) - (dt / t0 + I * phase) * 2.0)
}

/// Maximal Hasse chain `(a_1, …, a_n)`: `I_k = {a_1, …, a_k}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HassePath(pub Vec<usize>);

impl HassePath {
    pub fn identity(n: usize) -> Self {
        Self((1..=n).collect())
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn level_set(&self, k: usize) -> IndexSet {
        IndexSet::new(self.n(), &self.0[..k]).expect("path is a permutation")
    }

    pub fn validate(&self) -> Result<()> {
        let mut s = self.0.clone();
        s.sort_unstable();
        if s != (1..=self.n()).collect::<Vec<_>>() {
            return Err(QlabError::Usage(format!("{:?} is not a permutation", self.0)));
        }
        Ok(())
    }
}

/// Roots per level along a path, with equation residuals and energy.
#[derive(Clone, Debug)]
pub struct BetheSolution {
    pub path: HassePath,
    pub sector: Vec<usize>,
    /// `roots[i-1]` are the zeros of `Q_{I_i}`, `i = 1..n-1`.
    pub roots: Vec<Vec<C64>>,
    /// `residuals[i-1][l]` is `|LHS/RHS − 1|` of the level-`i` equation at root `l`.
    pub residuals: Vec<Vec<f64>>,
    pub energy: C64,
}

impl BetheSolution {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().flatten().copied().fold(0.0, f64::max)
    }
}

/// Right-hand side over left-hand side of the level-`i` nested Bethe equation at root `l`:
/// `e^{i(Φ_{a_{i+1}} − Φ_{a_i})} = Π_k (z_l−w_k−½)/(z_l−w_k+½) · Π_{k≠l} (z_l−z_k+1)/(z_l−z_k−1) · Π_k (z_l−u_k−½)/(z_l−u_k+½)`
/// with `w` the roots one level below and `u` one level above (`L` zeros at the top).
fn bethe_ratio(path: &HassePath, twist: &TwistConfig, len: usize, levels: &[Vec<C64>], i: usize, l: usize) -> Result<C64> {
    let n = path.n();
    let z = levels[i][l];
    let lhs = (I * (twist.phi(path.0[i + 1]) - twist.phi(path.0[i]))).exp();
    let mut rhs = c(1.0);
    let below: &[C64] = if i == 0 { &[] } else { &levels[i - 1] };
    let top = vec![C64::default(); len];
    let above: &[C64] = if i + 1 == n - 1 { &top } else { &levels[i + 1] };
    for &w in below.iter().chain(above.iter()) {
        let den = z - w + 0.5;
        if den.norm() < ROOT_COLLISION_TOL {
            return Err(QlabError::Numerical(format!("vanishing factor at root {z}")));
        }
        rhs *= (z - w - 0.5) / den;
    }
    for (k, &zk) in levels[i].iter().enumerate() {
        if k == l {
            continue;
        }
        let den = z - zk - 1.0;
        if (z - zk).norm() < ROOT_COLLISION_TOL || den.norm() < ROOT_COLLISION_TOL {
            return Err(QlabError::Numerical(format!("root collision at {z}")));
        }
        rhs *= (z - zk + 1.0) / den;
    }
    Ok(lhs / rhs)
}

/// `|LHS/RHS − 1|` for every root of every level.
pub fn bethe_residuals(path: &HassePath, twist: &TwistConfig, len: usize, levels: &[Vec<C64>]) -> Result<Vec<Vec<f64>>> {
    (0..levels.len())
        .map(|i| (0..levels[i].len()).map(|l| bethe_ratio(path, twist, len, levels, i, l).map(|r| (r - 1.0).norm())).collect())
        .collect()
}

/// Bethe roots of one joint eigenstate along `path`, read off its `Q` eigenvalues.
pub fn bethe_from_state(state: &JointEigenstate, path: &HassePath, twist: &TwistConfig, len: usize) -> Result<BetheSolution> {
    path.validate()?;
    let n = path.n();
    let roots = (1..n).map(|k| state.q_roots(&path.level_set(k))).collect::<Result<Vec<_>>>()?;
    let residuals = bethe_residuals(path, twist, len, &roots)?;
    let energy = energy_from_roots(&roots[n - 2])?;
    Ok(BetheSolution { path: path.clone(), sector: state.sector.clone(), roots, residuals, energy })
}

/// Newton iteration on the nested Bethe system starting from `seed`.
///
/// Unknowns are all roots of all levels; equations are `RHS/LHS − 1 = 0`, and the
/// Jacobian is formed by complex finite differences.
pub fn solve_bethe_newton(path: &HassePath, twist: &TwistConfig, len: usize, seed: &BetheSolution, max_iter: usize) -> Result<(BetheSolution, usize)> {
    let shape: Vec<usize> = seed.roots.iter().map(Vec::len).collect();
    let flatten = |lv: &[Vec<C64>]| -> Vec<C64> { lv.iter().flatten().copied().collect() };
    let unflatten = |x: &[C64]| -> Vec<Vec<C64>> {
        let mut out = Vec::new();
        let mut k = 0;
        for &s in &shape {
            out.push(x[k..k + s].to_vec());
            k += s;
        }
        out
    };
    let eval = |x: &[C64]| -> Result<Vec<C64>> {
        let lv = unflatten(x);
        let mut f = Vec::with_capacity(x.len());
        for i in 0..lv.len() {
            for l in 0..lv[i].len() {
                f.push(c(1.0) / bethe_ratio(path, twist, len, &lv, i, l)? - 1.0);
            }
        }
        Ok(f)
    };
    let mut x = flatten(&seed.roots);
    let m = x.len();
    let mut iters = 0;
    if m > 0 {
        loop {
            let f = eval(&x)?;
            let fmax = f.iter().map(|v| v.norm()).fold(0.0, f64::max);
            if fmax < 1e-13 || iters >= max_iter {
                break;
            }
            let mut jac = DMatrix::<C64>::zeros(m, m);
            for j in 0..m {
                let h = 1e-7 * x[j].norm().max(1.0);
                let mut xp = x.clone();
                xp[j] += h;
                let mut xm = x.clone();
                xm[j] -= h;
                let (fp, fm) = (eval(&xp)?, eval(&xm)?);
                for i in 0..m {
                    jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
                }
            }
            let rhs = DVector::from_iterator(m, f.iter().map(|v| -v));
            let step = jac.lu().solve(&rhs).ok_or_else(|| QlabError::Numerical("singular Bethe Jacobian".into()))?;
            for j in 0..m {
                x[j] += step[j];
            }
            iters += 1;
        }
    }
    let roots = unflatten(&x);
    let residuals = bethe_residuals(path, twist, len, &roots)?;
    let energy = energy_from_roots(&roots[roots.len() - 1])?;
    let sol = BetheSolution { path: path.clone(), sector: seed.sector.clone(), roots, residuals, energy };
    if sol.max_residual() > 1e-10 {
        return Err(QlabError::NotConverged(format!("Bethe residual {:e} after {iters} iterations", sol.max_residual())));
    }
    Ok((sol, iters))
}

/// Greedy nearest-neighbour matching of two multisets; returns the worst distance.
pub fn multiset_distance(a: &[C64], b: &[C64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    for &x in a {
        let (k, d) = b
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, &y)| (k, (x - y).norm()))
            .min_by(|p, q| p.1.partial_cmp(&q.1).unwrap())
            .expect("equal lengths");
        used[k] = true;
        worst = worst.max(d);
    }
    worst
}

/// Every permutation of `1..=n` as a Hasse path, lexicographic.
pub fn all_paths(n: usize) -> Vec<HassePath> {
    crate::glrep::permutations_with_sign(n)
        .into_iter()
        .map(|(p, _)| HassePath(p.into_iter().map(|a| a + 1).collect()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{prop_assert_eq, proptest, ProptestConfig, TestCaseError};
    use crate::tensor::comm_norm;

    fn tw3() -> TwistConfig {
        TwistConfig::real(&[0.7, -0.4, -0.3]).unwrap()
    }

    #[test]
    fn untwisted_two_site_spectrum() {
        let tw = TwistConfig::real(&[0.0, 0.0]).unwrap();
        let h = build_hamiltonian(2, 2, &tw).unwrap();
        let (mut vals, _) = eigen_decompose(&h.to_dense()).unwrap();
        vals.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        let expect = [0.0, 0.0, 0.0, 8.0];
        for (v, e) in vals.iter().zip(expect) {
            assert!((v - c(e)).norm() < 1e-12);
        }
    }

    #[test]
    fn hamiltonian_conserves_occupations() {
        let h = build_hamiltonian(3, 3, &tw3()).unwrap();
        assert_eq!(sector_violation(&h, 3, 3), 0.0);
    }

    #[test]
    fn sector_counts() {
        let s = sectors(2, 2);
        assert_eq!(s, vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
        let dims: Vec<usize> = s.iter().map(|m| sector_basis(m, 2).len()).collect();
        assert_eq!(dims, vec![1, 2, 1]);
        assert_eq!(sectors(3, 3).len(), 10);
    }

    #[test]
    fn sector_traces_add_up() {
        let h = build_hamiltonian(3, 2, &tw3()).unwrap();
        let total: C64 = sectors(3, 2).iter().map(|m| sector_project(&h, m, 2).unwrap().trace()).sum();
        assert!((total - h.trace()).norm() < 1e-12);
    }

    #[test]
    fn eigen_decompose_reconstructs() {
        let mut rng = StdRng::seed_from_u64(3);
        let a = DMatrix::from_fn(6, 6, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let (vals, v) = eigen_decompose(&a).unwrap();
        for k in 0..6 {
            let r = &a * v.column(k) - v.column(k) * vals[k];
            assert!(r.norm() < 1e-10);
        }
    }

    #[test]
    fn pure_power_and_stalling_companions() {
        for k in 1..=6 {
            let mut p = vec![C64::default(); k + 1];
            p[k] = c(1.0);
            assert_eq!(poly_roots(&p).unwrap(), vec![C64::default(); k]);
        }
        let p = [c(0.0), c(0.0), c(-2.0), c(0.0), c(1.0)];
        let r = poly_roots(&p).unwrap();
        assert_eq!(r.len(), 4);
        for z in &r {
            assert!(poly_eval(&p, *z).norm() < 1e-12);
        }
        let dk = durand_kerner(&[c(-6.0), c(11.0), c(-6.0), c(1.0)]).unwrap();
        let mut re: Vec<f64> = dk.iter().map(|z| z.re).collect();
        re.sort_by(f64::total_cmp);
        for (a, b) in re.iter().zip([1.0, 2.0, 3.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn companion_roots() {
        // (z - 1)(z + 2)(z - i)
        let roots = [c(1.0), c(-2.0), I];
        let mut p = vec![c(1.0)];
        for r in roots {
            let mut next = vec![C64::default(); p.len() + 1];
            for (k, &v) in p.iter().enumerate() {
                next[k + 1] += v;
                next[k] -= v * r;
            }
            p = next;
        }
        let got = poly_roots(&p).unwrap();
        assert!(multiset_distance(&got, &roots) < 1e-13);
        assert!(poly_roots(&[c(2.0)]).unwrap().is_empty());
    }

    #[test]
    fn one_site_root_satisfies_top_equation() {
        let tw = TwistConfig::real(&[0.45, -0.45]).unwrap();
        let fam = Family::build(&tw, 1).unwrap();
        let data = joint_diagonalize(&fam, 1).unwrap();
        let q = (-I * (tw.phi(1) - tw.phi(2))).exp();
        let st = data.states.iter().find(|s| s.sector == vec![1, 0]).unwrap();
        let roots = st.q_roots(&IndexSet::singleton(2, 1).unwrap()).unwrap();
        assert_eq!(roots.len(), 1);
        assert!((roots[0] - (c(0.5) + q / (c(1.0) - q))).norm() < 1e-12);
        let sol = bethe_from_state(st, &HassePath::identity(2), &tw, 1).unwrap();
        assert!(sol.max_residual() < 1e-12);
    }

    #[test]
    fn energies_agree_n2_l3() {
        let tw = TwistConfig::real(&[0.45, -0.45]).unwrap();
        let fam = Family::build(&tw, 3).unwrap();
        let data = joint_diagonalize(&fam, 7).unwrap();
        assert!(data.max_offdiag < 1e-9);
        for st in &data.states {
            let sol = bethe_from_state(st, &HassePath::identity(2), &tw, 3).unwrap();
            let et = energy_from_tbox(&st.t_poly, fam.t_box.phase, 3).unwrap();
            assert!((sol.energy - st.energy_direct).norm() < 1e-8, "{:?}", st.sector);
            assert!((et - st.energy_direct).norm() < 1e-8);
            assert!(sol.max_residual() < 1e-8);
        }
    }

    #[test]
    fn perturbed_root_fails_and_newton_repairs() {
        let tw = tw3();
        let fam = Family::build(&tw, 3).unwrap();
        let data = joint_diagonalize(&fam, 11).unwrap();
        let path = HassePath::identity(3);
        let st = data.states.iter().find(|s| s.sector == vec![1, 1, 1]).unwrap();
        let sol = bethe_from_state(st, &path, &tw, 3).unwrap();
        let mut bad = sol.clone();
        bad.roots[1][0] += 0.01;
        let res = bethe_residuals(&path, &tw, 3, &bad.roots).unwrap();
        assert!(res.iter().flatten().cloned().fold(0.0, f64::max) > 1e-3);
        let (fixed, iters) = solve_bethe_newton(&path, &tw, 3, &sol, 20).unwrap();
        assert!(iters <= 2);
        assert!((fixed.energy - st.energy_direct).norm() < 1e-8);
        let (again, _) = solve_bethe_newton(&path, &tw, 3, &bad, 30).unwrap();
        assert!((again.energy - st.energy_direct).norm() < 1e-8);
    }

    #[test]
    fn family_commutes_with_hamiltonian() {
        let tw = tw3();
        let fam = Family::build(&tw, 2).unwrap();
        for q in fam.q.values() {
            assert!(comm_norm(&q.eval(c(0.4)), &fam.hamiltonian).unwrap() < 1e-10);
        }
        assert!(comm_norm(&fam.t_box.eval(c(-0.3)), &fam.hamiltonian).unwrap() < 1e-10);
    }

    #[test]
    fn single_site_energy_matches_transfer_matrix() {
        let tw = tw3();
        let h = build_hamiltonian(3, 1, &tw).unwrap();
        for a in 1..=3 {
            let s: C64 = (1..=3).map(|b| (I * (tw.phi(b) - tw.phi(a))).exp()).sum();
            assert!((h.get(a - 1, a - 1) - (c(2.0) - s * 2.0)).norm() < 1e-14);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn random_twist_keeps_sectors(p1 in -1.5f64..1.5, p2 in -1.5f64..1.5, len in 1usize..=4) {
            let tw = TwistConfig::real(&[p1, p2, -p1 - p2]).unwrap();
            let h = build_hamiltonian(3, len, &tw).unwrap();
            prop_assert_eq!(crate::transfer::sector_violation(&h, 3, len), 0.0);
        }

        #[test]
        fn sector_dimensions_sum_to_hilbert_space(n in 2usize..=4, len in 1usize..=5) {
            let total: usize = sectors(n, len).iter().map(|m| {
                prop_assert_eq!(m.iter().sum::<usize>(), len);
                Ok(sector_basis(m, len).len())
            }).sum::<std::result::Result<usize, TestCaseError>>()?;
            prop_assert_eq!(total, n.pow(len as u32));
        }
    }

}
