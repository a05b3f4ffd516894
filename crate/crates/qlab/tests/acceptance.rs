//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64 as C64;
use qlab::fusion::{factorize_by_fusion, factorize_triangular, fuse, verma_canonical};
use qlab::glrep::{fundamental_rep, gl_relation_residual, verma_rep};
use qlab::lax::{eval_lax, partonic_lax, rll_residual, IndexSet, LaxMatrix};
use qlab::oscillator::{FockTruncation, ModeRegistry};
use qlab::relations::{enumerate_hasse, hirota_residual, qasdet_residual, xasdet_residual};
use qlab::spectral::{all_paths, bethe_from_state, energy_from_roots, energy_from_tbox, joint_diagonalize, multiset_distance, Family, HassePath};
use qlab::tensor::comm_norm;
use qlab::transfer::{bgg_eigen_check, build_q, build_q_family, TwistConfig, DEFAULT_ETA_SCHEDULE};
use qlab::cli::trace_method_gap;
use qlab::Result;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn points(seed: u64, count: usize) -> Vec<C64> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..count).map(|_| C64::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.0..1.0))).collect()
}

fn weight(rng: &mut StdRng, p: usize) -> Vec<C64> {
    (0..p).map(|_| C64::new(rng.gen_range(-1.2..1.2), rng.gen_range(-0.4..0.4))).collect()
}

fn twists(n: usize) -> Vec<TwistConfig> {
    let other = match n {
        2 => TwistConfig::real(&[0.37, -0.37]),
        _ => TwistConfig::real(&[0.95, -0.15, -0.8]),
    };
    vec![TwistConfig::generic(n), other.expect("valid twist")]
}

fn trunc() -> FockTruncation {
    FockTruncation::new(8, 4).expect("valid truncation")
}

fn max_of(it: impl IntoIterator<Item = Result<f64>>) -> Result<f64> {
    it.into_iter().try_fold(0.0f64, |acc, r| r.map(|v| acc.max(v)))
}

/// Trivial Q anchors: `Q_∅ = 1`, `Q_{1..n}(z) = z^L`.
fn anchors() -> Result<f64> {
    let zs = points(1, 4);
    let mut worst = 0.0f64;
    for n in 2..=3 {
        let tw = TwistConfig::generic(n);
        for len in 1..=3 {
            let empty = build_q(&IndexSet::new(n, &[])?, &tw, len)?;
            let full = build_q(&IndexSet::full(n), &tw, len)?;
            for &z in &zs {
                let one = empty.eval(z);
                worst = worst.max(one.sub(&qlab::tensor::QuantumOperator::identity(one.dim())).max_abs());
                let zl = full.eval(z);
                let expect = qlab::tensor::QuantumOperator::identity(zl.dim()).scale(z.powu(len as u32));
                worst = worst.max(zl.sub(&expect).max_abs());
            }
        }
    }
    Ok(worst)
}

fn rll() -> Result<f64> {
    let zs = points(2, 10);
    let mut rng = StdRng::seed_from_u64(20);
    let mut worst = 0.0f64;
    for n in 2..=3 {
        let mut cases: Vec<(LaxMatrix, FockTruncation)> = vec![(eval_lax(&fundamental_rep(n)), FockTruncation::new(1, 0)?)];
        cases.push((eval_lax(&verma_rep(&weight(&mut rng, n), &mut ModeRegistry::new())?), trunc()));
        for a in 1..=n {
            cases.push((partonic_lax(n, a, &mut ModeRegistry::new())?, trunc()));
        }
        for set in IndexSet::all_subsets(n).into_iter().filter(|s| !s.is_empty() && s.len() < n) {
            let w = weight(&mut rng, set.len());
            cases.push((verma_canonical(set, &w, &mut ModeRegistry::new(), "")?.lax(), trunc()));
        }
        for (l, t) in &cases {
            for p in zs.chunks(2) {
                worst = worst.max(rll_residual(l, p[0], p[1], *t));
            }
        }
    }
    Ok(worst)
}

fn factorization() -> Result<f64> {
    let zs = points(3, 3);
    let mut rng = StdRng::seed_from_u64(30);
    let mut worst = 0.0f64;
    for n in 2..=3 {
        let w = weight(&mut rng, n);
        let order: Vec<usize> = (1..=n).collect();
        let tri = factorize_triangular(&w, &mut ModeRegistry::new())?;
        let fus = factorize_by_fusion(&w, &order, &mut ModeRegistry::new())?;
        worst = worst.max(tri.residual(&zs, trunc())?);
        worst = worst.max(fus.residual(&zs, trunc())?);
        worst = worst.max(tri.compare(&fus, &zs, trunc())?);
    }
    Ok(worst)
}

fn fusion() -> Result<f64> {
    let zs = points(4, 3);
    let mut rng = StdRng::seed_from_u64(40);
    let mut worst = 0.0f64;
    for (i, j) in [(vec![1], vec![2]), (vec![1], vec![2, 3])] {
        let (iset, jset) = (IndexSet::new(3, &i)?, IndexSet::new(3, &j)?);
        let mut reg = ModeRegistry::new();
        let l = verma_canonical(iset.clone(), &weight(&mut rng, iset.len()), &mut reg, "1:")?;
        let r = verma_canonical(jset.clone(), &weight(&mut rng, jset.len()), &mut reg, "2:")?;
        let fr = fuse(&l, &r, C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-0.3..0.3)))?;
        worst = worst.max(fr.residual(&zs, reg.len(), trunc())?);
        worst = worst.max(gl_relation_residual(&fr.fused.rep));
    }
    Ok(worst)
}

fn hirota() -> Result<f64> {
    let mut worst = 0.0f64;
    for n in 2..=3 {
        let hd = enumerate_hasse(n)?;
        for tw in twists(n) {
            for len in 1..=3 {
                let zs = points(50 + len as u64, len + 2);
                let qs = build_q_family(&tw, len)?;
                worst = worst.max(max_of(hd.quadrilaterals.iter().map(|(s, a, b)| hirota_residual(&qs, s, *a, *b, &tw, &zs)))?);
            }
        }
    }
    Ok(worst)
}

fn determinants() -> Result<f64> {
    let mut worst = 0.0f64;
    for tw in twists(3) {
        for len in 1..=3 {
            let zs = points(60 + len as u64, len + 2);
            let qs = build_q_family(&tw, len)?;
            worst = worst.max(xasdet_residual(&qs, &IndexSet::full(3), &tw, len, &zs)?);
            for s in IndexSet::all_subsets(3).into_iter().filter(|s| s.len() == 2) {
                worst = worst.max(qasdet_residual(&qs, &s, &tw, &zs)?);
            }
        }
    }
    Ok(worst)
}

fn commuting() -> Result<f64> {
    let zs = points(7, 3);
    let mut worst = 0.0f64;
    for n in 2..=3 {
        for len in 1..=3 {
            let fam = Family::build(&TwistConfig::generic(n), len)?;
            let mut ops = vec![fam.hamiltonian.clone(), fam.t_box.eval(zs[0]), fam.t_box.eval(zs[1])];
            ops.extend(fam.q.values().map(|q| q.eval(zs[2])));
            for i in 0..ops.len() {
                for j in i + 1..ops.len() {
                    let scale = ops[i].max_abs().max(1.0) * ops[j].max_abs().max(1.0);
                    worst = worst.max(comm_norm(&ops[i], &ops[j])? / scale);
                }
            }
        }
    }
    Ok(worst)
}

/// Returns the worst energy gap and, separately, the L = 1 root-formula gap.
fn energies() -> Result<(f64, f64)> {
    let mut worst = 0.0f64;
    let mut single_site = 0.0f64;
    for (n, lens) in [(2usize, 1..=4usize), (3, 1..=3)] {
        let tw = TwistConfig::generic(n);
        let path = HassePath::identity(n);
        for len in lens {
            let fam = Family::build(&tw, len)?;
            let data = joint_diagonalize(&fam, 1)?;
            for st in &data.states {
                let e_t = energy_from_tbox(&st.t_poly, fam.t_box.phase, len)?;
                worst = worst.max((e_t - st.energy_direct).norm());
                let e_r = energy_from_roots(&st.q_roots(&path.level_set(n - 1))?)?;
                let gap = (e_r - st.energy_direct).norm();
                if len == 1 {
                    single_site = single_site.max(gap);
                } else {
                    worst = worst.max(gap);
                }
            }
        }
    }
    Ok((worst, single_site))
}

fn bethe_and_paths() -> Result<(f64, f64)> {
    let tw = TwistConfig::generic(3);
    let fam = Family::build(&tw, 3)?;
    let data = joint_diagonalize(&fam, 1)?;
    let paths = all_paths(3);
    let mut worst = 0.0f64;
    let mut energies = Vec::new();
    for path in &paths {
        let mut es = Vec::new();
        for st in &data.states {
            let sol = bethe_from_state(st, path, &tw, 3)?;
            worst = worst.max(sol.max_residual());
            es.push(sol.energy);
        }
        energies.push(es);
    }
    let spread = energies.iter().skip(1).map(|e| multiset_distance(&energies[0], e)).fold(0.0, f64::max);
    Ok((worst, spread))
}

fn bgg() -> Result<f64> {
    let tw = TwistConfig::generic(2);
    let mut worst = 0.0f64;
    for len in 1..=2 {
        let r = bgg_eigen_check(&[1, 0], &tw, len, &points(12, 2), &DEFAULT_ETA_SCHEDULE)?;
        worst = worst.max(r.eigen_residual);
    }
    Ok(worst)
}

struct Outcome {
    failed: usize,
}

impl Outcome {
    fn line(&mut self, id: usize, name: &str, tol: f64, value: Result<f64>, start: Instant) {
        let secs = start.elapsed().as_secs_f64();
        match value {
            Ok(v) if v < tol => println!("PASS {id:>2} {name:<28} residual {v:.3e} < {tol:.0e}  ({secs:.1}s)"),
            Ok(v) => {
                self.failed += 1;
                println!("FAIL {id:>2} {name:<28} residual {v:.3e} >= {tol:.0e}  ({secs:.1}s)");
            }
            Err(e) => {
                self.failed += 1;
                println!("FAIL {id:>2} {name:<28} error: {e}  ({secs:.1}s)");
            }
        }
    }
}

fn main() -> ExitCode {
    let mut out = Outcome { failed: 0 };
    let t = Instant::now();
    out.line(1, "trivial Q anchors", 1e-13, anchors(), t);
    let t = Instant::now();
    out.line(2, "RLL relation", 1e-12, rll(), t);
    let t = Instant::now();
    out.line(3, "Verma factorization", 1e-12, factorization(), t);
    let t = Instant::now();
    out.line(4, "Lax fusion", 1e-12, fusion(), t);
    let t = Instant::now();
    out.line(5, "Hirota QQ relations", 1e-10, hirota(), t);
    let t = Instant::now();
    out.line(6, "determinant formulas", 1e-10, determinants(), t);
    let t = Instant::now();
    out.line(7, "commuting family", 1e-10, commuting(), t);
    let t = Instant::now();
    match energies() {
        Ok((w, l1)) => {
            out.line(8, "energy agreement", 1e-8, Ok(w), t);
            println!("     L = 1 root-sum energy gap {l1:.3e} (informational, formula needs L >= 2)");
        }
        Err(e) => out.line(8, "energy agreement", 1e-8, Err(e), t),
    }
    let t = Instant::now();
    match bethe_and_paths() {
        Ok((b, p)) => {
            out.line(9, "nested Bethe equations", 1e-8, Ok(b), t);
            out.line(10, "Hasse path equivalence", 1e-8, Ok(p), t);
        }
        Err(e) => {
            let msg = e.to_string();
            out.line(9, "nested Bethe equations", 1e-8, Err(e), t);
            out.line(10, "Hasse path equivalence", 1e-8, Err(qlab::QlabError::Numerical(msg)), t);
        }
    }
    let t = Instant::now();
    out.line(11, "exact vs damped traces", 1e-6, trace_method_gap(11, 50, &DEFAULT_ETA_SCHEDULE), t);
    let t = Instant::now();
    out.line(12, "BGG alternating sum", 1e-6, bgg(), t);
    println!("{} of 12 criteria passed", 12 - out.failed);
    if out.failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
