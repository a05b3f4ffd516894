//! Command-line front end: configuration, verification suites and reports.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{QlabError, Result};
use crate::fusion::{factorize_by_fusion, factorize_triangular, fuse, verma_canonical};
use crate::glrep::{fundamental_rep, gl_relation_residual, verma_rep};
use crate::lax::{eval_lax, partonic_lax, rll_residual, IndexSet};
use crate::oscillator::{cutoff_for, extrapolated_trace, normalized_trace, FockTruncation, ModeRegistry, NormalOrderedOp, TwistWeights};
use crate::relations::{
    enumerate_hasse, fusion_x_residual, hirota_residual, plucker_residual, qasdet_residual, t_g_residual, tbox_expansion_residual,
    xasdet_residual,
};
use crate::spectral::{
    all_paths, bethe_from_state, energy_from_roots, energy_from_tbox, joint_diagonalize, multiset_distance, solve_bethe_newton, Family,
    HassePath, SpectralData,
};
use crate::tensor::comm_norm;
use crate::transfer::{bgg_eigen_check, TwistConfig, DEFAULT_ETA_SCHEDULE};

pub const MAX_N: usize = 4;
pub const MAX_LEN: usize = 5;

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Parser, Debug)]
#[command(name = "qlab", version, about = "Q-operators, fusion and Bethe-ansatz checks for twisted gl(n) spin chains")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Opts,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Run the identity suites; exit 1 if any residual exceeds its tolerance.
    Verify,
    /// Per-sector eigenvalues, Q roots and the three energy evaluations.
    Spectrum,
    /// Bethe roots along every Hasse chain, with equation residuals.
    Bethe,
    /// Nodes, edges, quadrilaterals and maximal chains of the subset lattice.
    Hasse,
    /// Everything above in one report.
    Report,
}

#[derive(Args, Debug, Default, Clone)]
pub struct Opts {
    /// JSON file with flat keys mirroring the flags; flags win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Chain length.
    #[arg(long = "L", global = true)]
    pub len: Option<usize>,
    /// Twist angles, comma separated.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub phi: Option<Vec<f64>>,
    /// Per-mode Fock cutoff for truncated checks.
    #[arg(long, global = true)]
    pub nmax: Option<u32>,
    /// Excitation levels below the cutoff excluded from truncated residuals.
    #[arg(long, global = true)]
    pub buffer: Option<u32>,
    /// Override every suite tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Suites to run, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    pub suite: Option<Vec<String>>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

/// Config-file contents. Keys match the long flag names.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub n: Option<usize>,
    #[serde(rename = "L")]
    pub len: Option<usize>,
    pub phi: Option<Vec<f64>>,
    pub nmax: Option<u32>,
    pub buffer: Option<u32>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub suite: Option<Vec<String>>,
    pub eta: Option<Vec<f64>>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| QlabError::Usage(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| QlabError::Usage(format!("bad config {}: {e}", path.display())))
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Suite {
    Rll,
    Fusion,
    Factorization,
    Hirota,
    Determinant,
    Plucker,
    Bgg,
    Commuting,
    Trace,
    Spectral,
    Bethe,
}

impl Suite {
    pub const ALL: [Suite; 11] = [
        Suite::Rll,
        Suite::Fusion,
        Suite::Factorization,
        Suite::Hirota,
        Suite::Determinant,
        Suite::Plucker,
        Suite::Bgg,
        Suite::Commuting,
        Suite::Trace,
        Suite::Spectral,
        Suite::Bethe,
    ];

    /// Suites run by `verify` when none are selected.
    pub const VERIFY_DEFAULT: [Suite; 9] = [
        Suite::Rll,
        Suite::Fusion,
        Suite::Factorization,
        Suite::Hirota,
        Suite::Determinant,
        Suite::Plucker,
        Suite::Bgg,
        Suite::Commuting,
        Suite::Trace,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Rll => "rll",
            Suite::Fusion => "fusion",
            Suite::Factorization => "factorization",
            Suite::Hirota => "hirota",
            Suite::Determinant => "determinant",
            Suite::Plucker => "plucker",
            Suite::Bgg => "bgg",
            Suite::Commuting => "commuting",
            Suite::Trace => "trace",
            Suite::Spectral => "spectral",
            Suite::Bethe => "bethe",
        }
    }

    pub fn default_tolerance(self) -> f64 {
        match self {
            Suite::Rll | Suite::Fusion | Suite::Factorization => 1e-12,
            Suite::Hirota | Suite::Determinant | Suite::Plucker | Suite::Commuting => 1e-10,
            Suite::Spectral | Suite::Bethe => 1e-8,
            Suite::Bgg | Suite::Trace => 1e-6,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = QlabError;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .iter()
            .copied()
            .find(|x| x.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| QlabError::Usage(format!("unknown suite {s:?}")))
    }
}

/// Validated run parameters.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub n: usize,
    pub len: usize,
    pub phi: Vec<f64>,
    pub twist: TwistConfig,
    pub trunc: FockTruncation,
    pub eta_schedule: Vec<f64>,
    pub tol: Option<f64>,
    pub seed: u64,
    pub suites: Vec<Suite>,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub warnings: Vec<String>,
}

impl RunConfig {
    /// Reads `--config` if present, then applies flags on top.
    pub fn resolve(opts: &Opts) -> Result<Self> {
        let file = match &opts.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        Self::from_parts(file, opts)
    }

    pub fn from_parts(file: FileConfig, opts: &Opts) -> Result<Self> {
        let mut warnings = Vec::new();
        let n = opts.n.or(file.n).unwrap_or(2);
        let len = opts.len.or(file.len).unwrap_or(2);
        if !(2..=MAX_N).contains(&n) {
            return Err(QlabError::Usage(format!("n = {n} outside 2..={MAX_N}")));
        }
        if !(1..=MAX_LEN).contains(&len) {
            return Err(QlabError::Usage(format!("L = {len} outside 1..={MAX_LEN}")));
        }
        let mut phi = match opts.phi.clone().or(file.phi) {
            Some(p) => p,
            None => TwistConfig::generic(n).values().iter().map(|v| v.re).collect(),
        };
        if phi.len() != n {
            return Err(QlabError::Usage(format!("{} twist angles given for n = {n}", phi.len())));
        }
        if phi.iter().any(|p| !p.is_finite()) {
            return Err(QlabError::Usage("twist angles must be finite".into()));
        }
        let sum: f64 = phi.iter().sum();
        if sum.abs() > 1e-12 {
            let mean = sum / n as f64;
            phi.iter_mut().for_each(|p| *p -= mean);
            warnings.push(format!("twist angles summed to {sum}; shifted by {mean} each to make the sum zero"));
        }
        for a in 0..n {
            for b in a + 1..n {
                if ((phi[a] - phi[b]) / 2.0).sin().abs() < 1e-8 {
                    return Err(QlabError::Usage(format!("twist angles {} and {} coincide modulo 2π", a + 1, b + 1)));
                }
            }
        }
        let twist = TwistConfig::real(&phi)?;
        let trunc = FockTruncation::new(opts.nmax.or(file.nmax).unwrap_or(8), opts.buffer.or(file.buffer).unwrap_or(4))?;
        let eta_schedule = file.eta.unwrap_or_else(|| DEFAULT_ETA_SCHEDULE.to_vec());
        if eta_schedule.len() < 2 || eta_schedule.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
            return Err(QlabError::Usage("eta schedule needs at least two positive values".into()));
        }
        let tol = opts.tol.or(file.tol);
        if let Some(t) = tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(QlabError::Usage(format!("tolerance {t} must be positive")));
            }
        }
        let suites = match opts.suite.clone().or(file.suite) {
            Some(names) => {
                let mut s = names.iter().map(|x| x.parse()).collect::<Result<Vec<Suite>>>()?;
                s.sort();
                s.dedup();
                s
            }
            None => Suite::VERIFY_DEFAULT.to_vec(),
        };
        Ok(Self {
            n,
            len,
            phi,
            twist,
            trunc,
            eta_schedule,
            tol,
            seed: opts.seed.or(file.seed).unwrap_or(1),
            suites,
            out: opts.out.clone().or(file.out),
            format: opts.format.or(file.format).unwrap_or_default(),
            warnings,
        })
    }

    pub fn tolerance(&self, suite: Suite) -> f64 {
        self.tol.unwrap_or_else(|| suite.default_tolerance())
    }

    fn rng(&self, stream: u64) -> StdRng {
        StdRng::seed_from_u64(self.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(stream))
    }

    /// Seeded complex sample points.
    pub fn sample_points(&self, stream: u64, count: usize) -> Vec<C64> {
        let mut rng = self.rng(stream);
        (0..count).map(|_| C64::new(rng.gen_range(-1.5..1.5), rng.gen_range(-0.7..0.7))).collect()
    }

    fn summary(&self) -> ConfigSummary {
        ConfigSummary {
            n: self.n,
            len: self.len,
            phi: self.phi.clone(),
            nmax: self.trunc.n_max,
            buffer: self.trunc.buffer,
            eta: self.eta_schedule.clone(),
            tol: self.tol,
            seed: self.seed,
            suites: self.suites.iter().map(|s| s.name().to_string()).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigSummary {
    pub n: usize,
    #[serde(rename = "L")]
    pub len: usize,
    pub phi: Vec<f64>,
    pub nmax: u32,
    pub buffer: u32,
    pub eta: Vec<f64>,
    pub tol: Option<f64>,
    pub seed: u64,
    pub suites: Vec<String>,
}

/// One checked identity instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub suite: String,
    /// Name of the identity, e.g. `hirota` or `qasdet`.
    pub identity: String,
    pub params: String,
    /// `None` when the evaluation itself failed; see `error`.
    pub residual: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    pub wall_ms: f64,
    pub error: Option<String>,
}

impl Record {
    /// Same record with the wall time zeroed, for comparing runs.
    pub fn untimed(&self) -> Self {
        Self { wall_ms: 0.0, ..self.clone() }
    }
}

/// Row of the spectrum table; also the CSV schema.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub sector: String,
    #[serde(rename = "state-index")]
    pub state_index: usize,
    #[serde(rename = "E_direct")]
    pub e_direct: f64,
    #[serde(rename = "E_roots")]
    pub e_roots: Option<f64>,
    #[serde(rename = "E_TBox")]
    pub e_tbox: f64,
    pub max_bethe_residual: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateDetail {
    pub sector: String,
    pub state_index: usize,
    /// Roots of every `Q_I`, as `[re, im]` pairs, keyed by the index set.
    pub q_roots: BTreeMap<String, Vec<[f64; 2]>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetheRecord {
    pub sector: String,
    #[serde(rename = "state-index")]
    pub state_index: usize,
    pub path: String,
    pub energy: f64,
    pub max_residual: f64,
    pub newton_iterations: usize,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub roots: Vec<Vec<[f64; 2]>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quadrilateral {
    pub base: String,
    pub a: usize,
    pub b: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HasseDump {
    pub n: usize,
    pub nodes: Vec<String>,
    pub edges: Vec<[String; 2]>,
    pub quadrilaterals: Vec<Quadrilateral>,
    pub chains: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub command: String,
    pub config: ConfigSummary,
    pub warnings: Vec<String>,
    pub records: Vec<Record>,
    #[serde(default)]
    pub spectrum: Vec<SpectrumRow>,
    #[serde(default)]
    pub states: Vec<StateDetail>,
    #[serde(default)]
    pub bethe: Vec<BetheRecord>,
    pub hasse: Option<HasseDump>,
    pub passed: bool,
}

impl VerificationReport {
    fn new(command: Command, cfg: &RunConfig) -> Self {
        Self {
            command: format!("{command:?}").to_lowercase(),
            config: cfg.summary(),
            warnings: cfg.warnings.clone(),
            records: Vec::new(),
            spectrum: Vec::new(),
            states: Vec::new(),
            bethe: Vec::new(),
            hasse: None,
            passed: true,
        }
    }

    fn finish(mut self) -> Self {
        self.passed = self.records.iter().all(|r| r.pass);
        self
    }

    pub fn failures(&self) -> impl Iterator<Item = &Record> {
        self.records.iter().filter(|r| !r.pass)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Reads a report previously written with `--format json`.
pub fn read_report(path: &Path) -> Result<VerificationReport> {
    VerificationReport::from_json(&std::fs::read_to_string(path)?)
}

fn fmt_sector(m: &[usize]) -> String {
    let parts: Vec<String> = m.iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(","))
}

fn fmt_path(p: &HassePath) -> String {
    p.0.iter().map(|a| a.to_string()).collect::<Vec<_>>().join("")
}

fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

/// Collects records for one suite.
struct Recorder {
    suite: Suite,
    tol: f64,
    /// Set when the user overrides every tolerance.
    forced: bool,
    records: Vec<Record>,
}

impl Recorder {
    fn new(suite: Suite, cfg: &RunConfig) -> Self {
        Self { suite, tol: cfg.tolerance(suite), forced: cfg.tol.is_some(), records: Vec::new() }
    }

    fn check(&mut self, identity: &str, params: String, f: impl FnOnce() -> Result<f64>) {
        let start = Instant::now();
        let out = f();
        self.push(identity, params, out, start.elapsed().as_secs_f64() * 1e3, self.tol);
    }

    /// Like `check` but with a suite-specific default tolerance for this identity.
    fn check_tol(&mut self, identity: &str, params: String, tol: f64, f: impl FnOnce() -> Result<f64>) {
        let start = Instant::now();
        let out = f();
        let tol = if self.forced { self.tol } else { tol };
        self.push(identity, params, out, start.elapsed().as_secs_f64() * 1e3, tol);
    }

    fn push(&mut self, identity: &str, params: String, out: Result<f64>, wall_ms: f64, tol: f64) {
        let (residual, error) = match out {
            Ok(r) if r.is_finite() => (Some(r), None),
            Ok(r) => (None, Some(format!("non-finite residual {r}"))),
            Err(e) => (None, Some(e.to_string())),
        };
        let pass = residual.is_some_and(|r| r < tol);
        self.records.push(Record {
            suite: self.suite.name().to_string(),
            identity: identity.to_string(),
            params,
            residual,
            tolerance: tol,
            pass,
            wall_ms,
            error,
        });
    }

    fn fail(&mut self, identity: &str, params: String, e: QlabError) {
        let tol = self.tol;
        self.push(identity, params, Err(e), 0.0, tol);
    }
}

fn random_weight(rng: &mut StdRng, p: usize) -> Vec<C64> {
    (0..p).map(|_| C64::new(rng.gen_range(-1.2..1.2), rng.gen_range(-0.4..0.4))).collect()
}

fn suite_rll(cfg: &RunConfig) -> Vec<Record> {
    let mut rec = Recorder::new(Suite::Rll, cfg);
    let n = cfg.n;
    let zs = cfg.sample_points(11, 10);
    let pairs: Vec<(C64, C64)> = zs.chunks(2).map(|p| (p[0], p[1])).collect();
    let mut rng = cfg.rng(12);
    let mut cases = vec![("eval_fundamental".to_string(), eval_lax(&fundamental_rep(n)), FockTruncation::new(1, 0).expect("valid"))];
    let mut reg = ModeRegistry::new();
    match verma_rep(&random_weight(&mut rng, n), &mut reg) {
        Ok(rep) => cases.push(("eval_verma".into(), eval_lax(&rep), cfg.trunc)),
        Err(e) => rec.fail("rll", "eval_verma".into(), e),
    }
    for a in 1..=n {
        match partonic_lax(n, a, &mut ModeRegistry::new()) {
            Ok(l) => cases.push((format!("partonic a={a}"), l, cfg.trunc)),
            Err(e) => rec.fail("rll", format!("partonic a={a}"), e),
        }
    }
    for set in IndexSet::all_subsets(n).into_iter().filter(|s| !s.is_empty() && s.len() < n) {
        let w = random_weight(&mut rng, set.len());
        match verma_canonical(set.clone(), &w, &mut ModeRegistry::new(), "") {
            Ok(cd) => cases.push((format!("canonical I={set}"), cd.lax(), cfg.trunc)),
            Err(e) => rec.fail("rll", format!("canonical I={set}"), e),
        }
    }
    let results: Vec<(f64, f64)> = cases
        .par_iter()
        .map(|(_, l, trunc)| {
            let start = Instant::now();
            let r = pairs.iter().map(|&(a, b)| rll_residual(l, a, b, *trunc)).fold(0.0, f64::max);
            (r, start.elapsed().as_secs_f64() * 1e3)
        })
        .collect();
    for ((name, _, _), (r, ms)) in cases.iter().zip(results) {
        let tol = rec.tol;
        rec.push("rll", name.clone(), Ok(r), ms, tol);
    }
    rec.records
}

fn fusion_cases(n: usize) -> Vec<(Vec<usize>, Vec<usize>)> {
    let mut v = vec![(vec![1], vec![2])];
    if n >= 3 {
        v.push((vec![1], vec![2, 3]));
        v.push((vec![2], vec![1, 3]));
    }
    v
}

fn suite_fusion(cfg: &RunConfig) -> Vec<Record> {
    let mut rec = Recorder::new(Suite::Fusion, cfg);
    let n = cfg.n;
    let zs = cfg.sample_points(21, 3);
    let trace_zs = cfg.sample_points(22, cfg.len + 2);
    let mut rng = cfg.rng(23);
    for (i, j) in fusion_cases(n) {
        let (iset, jset) = match (IndexSet::new(n, &i), IndexSet::new(n, &j)) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(e), _) | (_, Err(e)) => {
                rec.fail("fusion", format!("{i:?} {j:?}"), e);
                continue;
            }
        };
        let w1 = random_weight(&mut rng, iset.len());
        let w2 = random_weight(&mut rng, jset.len());
        let lambda = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-0.3..0.3));
        let params = format!("I={iset} J={jset}");
        let mut reg = ModeRegistry::new();
        let fr = verma_canonical(iset.clone(), &w1, &mut reg, "1:")
            .and_then(|l| verma_canonical(jset.clone(), &w2, &mut reg, "2:").map(|r| (l, r)))
            .and_then(|(l, r)| fuse(&l, &r, lambda));
        match fr {
            Ok(fr) => {
                rec.check("lax_fusion", params.clone(), || fr.residual(&zs, reg.len(), cfg.trunc));
                rec.check("fused_gl_relations", params.clone(), || Ok(gl_relation_residual(&fr.fused.rep)));
                rec.check("g_entries_commute", params.clone(), || Ok(fr.g_commutator_norm()));
            }
            Err(e) => rec.fail("lax_fusion", params.clone(), e),
        }
        rec.check_tol("x_plus_fusion", format!("{params} L={}", cfg.len), Suite::Hirota.default_tolerance(), || {
            fusion_x_residual(&iset, &w1, &jset, &w2, lambda, &cfg.twist, cfg.len, &trace_zs)
        });
        rec.check_tol("g_chain_trace", format!("{params} L={}", cfg.len), Suite::Hirota.default_tolerance(), || {
            t_g_residual(&iset, &jset, &cfg.twist, cfg.len)
        });
    }
    rec.records
}

fn suite_factorization(cfg: &RunConfig) -> Vec<Record> {
    let mut rec = Recorder::new(Suite::Factorization, cfg);
    let zs = cfg.sample_points(31, 3);
    let w = random_weight(&mut cfg.rng(32), cfg.n);
    let order: Vec<usize> = (1..=cfg.n).collect();
    let params = format!("n={}", cfg.n);
    let tri = factorize_triangular(&w, &mut ModeRegistry::new());
    let fus = factorize_by_fusion(&w, &order, &mut ModeRegistry::new());
    match &tri {
        Ok(t) => rec.check("triangular", params.clone(), || t.residual(&zs, cfg.trunc)),
        Err(e) => rec.fail("triangular", params.clone(), QlabError::Numerical(e.to_string())),
    }
    match &fus {
        Ok(f) => rec.check("iterated_fusion", params.clone(), || f.residual(&zs, cfg.trunc)),
        Err(e) => rec.fail("iterated_fusion", params.clone(), QlabError::Numerical(e.to_string())),
    }
    if let (Ok(t), Ok(f)) = (&tri, &fus) {
        rec.check("paths_agree", params, || t.compare(f, &zs, cfg.trunc));
    }
    rec.records
}

fn suite_hirota(cfg: &RunConfig) -> Vec<Record> {
    let mut rec = Recorder::new(Suite::Hirota, cfg);
    let zs = cfg.sample_points(41, cfg.len + 2);
    let qs = match crate::transfer::build_q_family(&cfg.twist, cfg.len) {
        Ok(q) => q,
        Err(e) => {
            rec.fail("hirota", "family".into(), e);
            return rec.records;
        }
    };
    let hd = match enumerate_hasse(cfg.n) {
        Ok(h) => h,
        Err(e) => {
            rec.fail("hirota", "hasse".into(), e);
            return rec.records;
        }
    };
    for (s, a, b) in &hd.quadrilaterals {
        rec.check("hirota", format!("I={s} a={a} b={b} L={}", cfg.len), || hirota_residual(&qs, s, *a, *b, &cfg.twist, &zs));
    }
    rec.records
}

fn suite_determinant(cfg: &RunConfig) -> Vec<Record> {
    let mut rec = Recorder::new(Suite::Determinant, cfg);
    let zs = cfg.sample_points(51, cfg.len + 2);
    let qs = match crate::transfer::build_q_family(&cfg.twist, cfg.len) {
        Ok(q) => q,
        Err(e) => {
            rec.fail("determinant", "family".into(), e);
            return rec.records;
        }
    };
    let full = IndexSet::full(cfg.n);
    rec.check("t_box_det", format!("L={}", cfg.len), || xasdet_residual(&qs, &full, &cfg.twist, cfg.len, &zs));
    for s in IndexSet::all_subsets(cfg.n).into_iter().filter(|s| s.len() >= 2) {
        rec.check("qasdet", format!("I={s} L={}", cfg.len), || qasdet_residual(&qs, &s, &cfg.twist, &zs));
    }
    rec.records
}

fn spectral_data(cfg: &RunConfig) -> Result<(Family, SpectralData)> {
    let fam = Family::build(&cfg.twist, cfg.len)?;
    let data = joint_diagonalize(&fam, cfg.seed)?;
    Ok((fam, data))
}

fn suite_plucker(cfg: &RunConfig, spec: &Result<(Family, SpectralData)>) -> Vec<Record> {
    let mut rec = Recorder::new(Suite::Plucker, cfg);
    let (_, data) = match spec {
        Ok(s) => s,
        Err(e) => {
            rec.fail("plucker", "spectrum".into(), QlabError::Numerical(e.to_string()));
            return rec.records;
        }
    };
    let zs = cfg.sample_points(61, cfg.n + 1);
    let z0 = cfg.sample_points(62, 1)[0];
    for path in all_paths(cfg.n) {
        for k in 1..=cfg.n {
            rec.check("plucker", format!("path={} k={k}", fmt_path(&path)), || {
                data.states
                    .iter()
                    .map(|st| plucker_residual(st, &path, &cfg.twist, k, &zs[..=k]))
                    .try_fold(0.0f64, |acc, r| r.map(|v| acc.max(v)))
            });
        }
        rec.check("t_box_expansion", format!("path={}", fmt_path(&path)), || {
            data.states
                .iter()
                .map(|st| tbox_expansion_residual(st, &path, &cfg.twist, C64::default(), z0))
                .try_fold(0.0f64, |acc, r| r.map(|v| acc.max(v)))
        });
    }
    rec.records
}

fn suite_bgg(cfg: &RunConfig) -> Vec<Record> {
    let mut rec = Recorder::new(Suite::Bgg, cfg);
    let zs = cfg.sample_points(71, 2);
    let mut weight = vec![0i64; cfg.n];
    weight[0] = 1;
    let params = format!("weight={weight:?} L={}", cfg.len);
    let start = Instant::now();
    let out = bgg_eigen_check(&weight, &cfg.twist, cfg.len, &zs, &cfg.eta_schedule);
    let ms = start.elapsed().as_secs_f64() * 1e3;
    match out {
        Ok(r) => {
            let tol = rec.tol;
            rec.push("bgg_eigenvalues", params.clone(), Ok(r.eigen_residual), ms, tol);
            rec.push("bgg_operator", params.clone(), Ok(r.operator_residual), ms, tol);
            let tol = if rec.forced { tol } else { Suite::Hirota.default_tolerance() };
            rec.push("bgg_continued", params, Ok(r.exact_residual), ms, tol);
        }
        Err(e) => rec.fail("bgg_eigenvalues", params, e),
    }
    rec.records
}

fn suite_commuting(cfg: &RunConfig, spec: &Result<(Family, SpectralData)>) -> Vec<Record> {
    let mut rec = Recorder::new(Suite::Commuting, cfg);
    let (fam, _) = match spec {
        Ok(s) => s,
        Err(e) => {
            rec.fail("commuting", "family".into(), QlabError::Numerical(e.to_string()));
            return rec.records;
        }
    };
    let zs = cfg.sample_points(81, 2);
    let mut ops = vec![("H".to_string(), fam.hamiltonian.clone())];
    for (k, &z) in zs.iter().enumerate() {
        ops.push((format!("T(z{k})"), fam.t_box.eval(z)));
    }
    for (s, q) in &fam.q {
        ops.push((format!("Q{s}(w)"), q.eval(zs[1] * 0.7 + 0.1)));
    }
    rec.check("commuting_family", format!("{} operators L={}", ops.len(), cfg.len), || {
        let mut worst = 0.0f64;
        for i in 0..ops.len() {
            for j in i + 1..ops.len() {
                let scale = ops[i].1.max_abs().max(1.0) * ops[j].1.max_abs().max(1.0);
                worst = worst.max(comm_norm(&ops[i].1, &ops[j].1)? / scale);
            }
        }
        Ok(worst)
    });
    rec.records
}

/// Random normal-ordered monomial on up to three modes with twist weights on the unit circle.
pub fn random_trace_case(rng: &mut StdRng) -> (NormalOrderedOp, TwistWeights) {
    let modes = rng.gen_range(1..=3u32);
    let mut q = TwistWeights::new();
    let mut mono = Vec::new();
    for m in 0..modes {
        let theta = rng.gen_range(0.6..(2.0 * std::f64::consts::PI - 0.6));
        q.insert(m, C64::from_polar(1.0, theta), format!("m{m}"));
        let k = rng.gen_range(0..=2u32);
        let j = if rng.gen_bool(0.8) { k } else { rng.gen_range(0..=2u32) };
        if j + k > 0 {
            mono.push((m, j, k));
        }
    }
    let coeff = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    (NormalOrderedOp::monomial(mono, coeff), q)
}

/// Max over `count` random monomials of `|exact − extrapolated damped trace|`.
pub fn trace_method_gap(seed: u64, count: usize, schedule: &[f64]) -> Result<f64> {
    let mut rng = StdRng::seed_from_u64(seed);
    let eta_min = schedule.iter().copied().fold(f64::INFINITY, f64::min);
    let mut worst = 0.0f64;
    for _ in 0..count {
        let (x, q) = random_trace_case(&mut rng);
        let exact = normalized_trace(&x, &q)?;
        let trunc = FockTruncation::new(cutoff_for(&q, eta_min), 1)?;
        let approx = extrapolated_trace(&x, &q, trunc, schedule)?;
        worst = worst.max((exact - approx).norm());
    }
    Ok(worst)
}

fn suite_trace(cfg: &RunConfig) -> Vec<Record> {
    let mut rec = Recorder::new(Suite::Trace, cfg);
    rec.check("exact_vs_damped", format!("50 monomials, {} damping values", cfg.eta_schedule.len()), || {
        trace_method_gap(cfg.seed, 50, &cfg.eta_schedule)
    });
    rec.records
}

/// Spectrum table, energy records and per-state roots.
fn spectrum_section(cfg: &RunConfig, spec: &Result<(Family, SpectralData)>, report: &mut VerificationReport) {
    let mut rec = Recorder::new(Suite::Spectral, cfg);
    let (fam, data) = match spec {
        Ok(s) => s,
        Err(e) => {
            rec.fail("spectrum", "family".into(), QlabError::Numerical(e.to_string()));
            report.records.extend(rec.records);
            return;
        }
    };
    rec.check("joint_offdiagonal", format!("L={}", cfg.len), || Ok(data.max_offdiag));
    let path = HassePath::identity(cfg.n);
    if cfg.len == 1 {
        report.warnings.push("L = 1: the root-sum energy formula is listed but not compared".into());
    }
    for st in &data.states {
        let sector = fmt_sector(&st.sector);
        let params = format!("sector={sector} state={}", st.index);
        let bethe = bethe_from_state(st, &path, &cfg.twist, cfg.len);
        let e_roots = bethe.as_ref().ok().map(|b| b.energy).or_else(|| st.q_roots(&path.level_set(cfg.n - 1)).ok().and_then(|r| energy_from_roots(&r).ok()));
        let e_tbox = energy_from_tbox(&st.t_poly, fam.t_box.phase, cfg.len);
        match &e_tbox {
            Ok(e) => rec.check("energy_tbox", params.clone(), || Ok((e - st.energy_direct).norm())),
            Err(e) => rec.fail("energy_tbox", params.clone(), QlabError::Numerical(e.to_string())),
        }
        if cfg.len >= 2 {
            match e_roots {
                Some(e) => rec.check("energy_roots", params.clone(), || Ok((e - st.energy_direct).norm())),
                None => rec.fail("energy_roots", params.clone(), QlabError::Numerical("no roots".into())),
            }
        }
        report.spectrum.push(SpectrumRow {
            sector: sector.clone(),
            state_index: st.index,
            e_direct: st.energy_direct.re,
            e_roots: e_roots.map(|e| e.re),
            e_tbox: e_tbox.as_ref().map(|e| e.re).unwrap_or(f64::NAN),
            max_bethe_residual: bethe.as_ref().ok().map(|b| b.max_residual()),
        });
        let mut q_roots = BTreeMap::new();
        for s in st.q_polys.keys() {
            if let Ok(r) = st.q_roots(s) {
                q_roots.insert(s.to_string(), r.into_iter().map(pair).collect());
            }
        }
        report.states.push(StateDetail { sector, state_index: st.index, q_roots });
    }
    report.records.extend(rec.records);
}

/// Bethe roots for every state along every Hasse chain, Newton-polished, plus
/// path-independence of the spectrum.
fn bethe_section(cfg: &RunConfig, spec: &Result<(Family, SpectralData)>, report: &mut VerificationReport, keep_roots: bool) {
    let mut rec = Recorder::new(Suite::Bethe, cfg);
    let (_, data) = match spec {
        Ok(s) => s,
        Err(e) => {
            rec.fail("bethe", "spectrum".into(), QlabError::Numerical(e.to_string()));
            report.records.extend(rec.records);
            return;
        }
    };
    let paths = all_paths(cfg.n);
    let mut energies: Vec<Vec<C64>> = vec![Vec::new(); paths.len()];
    for (pi, path) in paths.iter().enumerate() {
        let mut worst: Result<f64> = Ok(0.0);
        for st in &data.states {
            match bethe_from_state(st, path, &cfg.twist, cfg.len) {
                Ok(sol) => {
                    let iters = solve_bethe_newton(path, &cfg.twist, cfg.len, &sol, 20).map(|(_, it)| it).unwrap_or(usize::MAX);
                    energies[pi].push(sol.energy);
                    if let Ok(w) = worst.as_mut() {
                        *w = w.max(sol.max_residual());
                    }
                    report.bethe.push(BetheRecord {
                        sector: fmt_sector(&st.sector),
                        state_index: st.index,
                        path: fmt_path(path),
                        energy: sol.energy.re,
                        max_residual: sol.max_residual(),
                        newton_iterations: iters,
                        roots: if keep_roots { sol.roots.iter().map(|l| l.iter().copied().map(pair).collect()).collect() } else { Vec::new() },
                    });
                }
                Err(e) => worst = Err(e),
            }
        }
        rec.check("bethe_equations", format!("path={} L={}", fmt_path(path), cfg.len), || worst);
    }
    if cfg.len >= 2 {
        for (pi, path) in paths.iter().enumerate().skip(1) {
            let d = multiset_distance(&energies[0], &energies[pi]);
            rec.check("path_equivalence", format!("path={} vs {}", fmt_path(path), fmt_path(&paths[0])), || Ok(d));
        }
    }
    report.records.extend(rec.records);
}

fn hasse_dump(n: usize) -> Result<HasseDump> {
    let h = enumerate_hasse(n)?;
    Ok(HasseDump {
        n,
        nodes: h.nodes.iter().map(|s| s.to_string()).collect(),
        edges: h.edges.iter().map(|(a, b)| [a.to_string(), b.to_string()]).collect(),
        quadrilaterals: h.quadrilaterals.iter().map(|(s, a, b)| Quadrilateral { base: s.to_string(), a: *a, b: *b }).collect(),
        chains: h.chains.iter().map(|p| p.0.clone()).collect(),
    })
}

/// Runs the selected suites and returns their records in suite order.
pub fn run_suites(cfg: &RunConfig) -> Vec<Record> {
    let mut report = VerificationReport::new(Command::Verify, cfg);
    let needs_spec = cfg.suites.iter().any(|s| matches!(s, Suite::Plucker | Suite::Commuting | Suite::Spectral | Suite::Bethe));
    let spec = if needs_spec { spectral_data(cfg) } else { Err(QlabError::Usage("not built".into())) };
    for &s in &cfg.suites {
        let recs = match s {
            Suite::Rll => suite_rll(cfg),
            Suite::Fusion => suite_fusion(cfg),
            Suite::Factorization => suite_factorization(cfg),
            Suite::Hirota => suite_hirota(cfg),
            Suite::Determinant => suite_determinant(cfg),
            Suite::Plucker => suite_plucker(cfg, &spec),
            Suite::Bgg => suite_bgg(cfg),
            Suite::Commuting => suite_commuting(cfg, &spec),
            Suite::Trace => suite_trace(cfg),
            Suite::Spectral => {
                spectrum_section(cfg, &spec, &mut report);
                std::mem::take(&mut report.records)
            }
            Suite::Bethe => {
                bethe_section(cfg, &spec, &mut report, false);
                std::mem::take(&mut report.records)
            }
        };
        report.records.extend(recs);
    }
    report.records
}

pub fn cmd_verify(cfg: &RunConfig) -> VerificationReport {
    let mut report = VerificationReport::new(Command::Verify, cfg);
    report.records = run_suites(cfg);
    report.finish()
}

pub fn cmd_spectrum(cfg: &RunConfig) -> VerificationReport {
    let mut report = VerificationReport::new(Command::Spectrum, cfg);
    report.config.suites = vec![Suite::Spectral.name().into()];
    let spec = spectral_data(cfg);
    spectrum_section(cfg, &spec, &mut report);
    report.finish()
}

pub fn cmd_bethe(cfg: &RunConfig) -> VerificationReport {
    let mut report = VerificationReport::new(Command::Bethe, cfg);
    report.config.suites = vec![Suite::Bethe.name().into()];
    let spec = spectral_data(cfg);
    bethe_section(cfg, &spec, &mut report, true);
    report.finish()
}

pub fn cmd_hasse(cfg: &RunConfig) -> Result<VerificationReport> {
    let mut report = VerificationReport::new(Command::Hasse, cfg);
    report.config.suites = Vec::new();
    report.hasse = Some(hasse_dump(cfg.n)?);
    Ok(report.finish())
}

pub fn cmd_report(cfg: &RunConfig) -> Result<VerificationReport> {
    let mut report = VerificationReport::new(Command::Report, cfg);
    report.records = run_suites(cfg);
    let spec = spectral_data(cfg);
    spectrum_section(cfg, &spec, &mut report);
    bethe_section(cfg, &spec, &mut report, true);
    report.hasse = Some(hasse_dump(cfg.n)?);
    Ok(report.finish())
}

fn csv_of<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| QlabError::Numerical(format!("csv: {e}")))?;
    }
    let bytes = w.into_inner().map_err(|e| QlabError::Numerical(format!("csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| QlabError::Numerical(format!("csv: {e}")))
}

#[derive(Serialize)]
struct EdgeRow<'a> {
    from: &'a str,
    to: &'a str,
}

/// CSV view of a report: the spectrum table when present, otherwise Bethe rows,
/// Hasse edges or the identity records.
pub fn report_csv(report: &VerificationReport, command: Command) -> Result<String> {
    match command {
        Command::Spectrum | Command::Report => csv_of(&report.spectrum),
        Command::Bethe => csv_of(&report.bethe.iter().map(|b| BetheRecord { roots: Vec::new(), ..b.clone() }).collect::<Vec<_>>()),
        Command::Hasse => {
            let h = report.hasse.as_ref().ok_or_else(|| QlabError::Usage("no Hasse data".into()))?;
            csv_of(&h.edges.iter().map(|[a, b]| EdgeRow { from: a, to: b }).collect::<Vec<_>>())
        }
        Command::Verify => csv_of(&report.records),
    }
}

/// Caps the rayon pool at `QLAB_THREADS` when set.
pub fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("QLAB_THREADS") {
        let t: usize = v.trim().parse().map_err(|_| QlabError::Usage(format!("QLAB_THREADS={v:?} is not a thread count")))?;
        if t == 0 {
            return Err(QlabError::Usage("QLAB_THREADS must be positive".into()));
        }
        // A pool that is already initialised keeps its size.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    Ok(())
}

/// Full CLI entry point; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(passed) => {
            if passed {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("qlab: {e}");
            2
        }
    }
}

fn execute(cli: &Cli) -> Result<bool> {
    configure_threads()?;
    let cfg = RunConfig::resolve(&cli.opts)?;
    for w in &cfg.warnings {
        eprintln!("warning: {w}");
    }
    let report = match cli.command {
        Command::Verify => cmd_verify(&cfg),
        Command::Spectrum => cmd_spectrum(&cfg),
        Command::Bethe => cmd_bethe(&cfg),
        Command::Hasse => cmd_hasse(&cfg)?,
        Command::Report => cmd_report(&cfg)?,
    };
    for r in report.failures() {
        eprintln!("FAIL {} {} [{}] residual={:?} tol={:e}{}", r.suite, r.identity, r.params, r.residual, r.tolerance, r.error.as_ref().map(|e| format!(" ({e})")).unwrap_or_default());
    }
    let text = match cfg.format {
        Format::Json => report.to_json()?,
        Format::Csv => report_csv(&report, cli.command)?,
    };
    match cfg.out.as_deref().filter(|p| *p != Path::new("-")) {
        Some(p) => std::fs::write(p, text)?,
        None => {
            let mut out = std::io::stdout().lock();
            let written = out.write_all(text.as_bytes()).and_then(|_| if text.ends_with('\n') { Ok(()) } else { out.write_all(b"\n") });
            match written {
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
                other => other?,
            }
        }
    }
    Ok(report.passed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(args: &[&str]) -> Opts {
        let mut v = vec!["qlab", "verify"];
        v.extend_from_slice(args);
        Cli::try_parse_from(v).unwrap().opts
    }

    #[test]
    fn flags_parse_and_defaults() {
        let o = opts(&["--n", "3", "--L", "2", "--phi", "-0.4,0.1,0.3", "--suite", "hirota,rll", "--format", "csv"]);
        let cfg = RunConfig::from_parts(FileConfig::default(), &o).unwrap();
        assert_eq!((cfg.n, cfg.len), (3, 2));
        assert_eq!(cfg.suites, vec![Suite::Rll, Suite::Hirota]);
        assert_eq!(cfg.format, Format::Csv);
        assert_eq!(cfg.trunc, FockTruncation::new(8, 4).unwrap());
        assert!(cfg.warnings.is_empty());
    }

    #[test]
    fn twist_sum_is_renormalized_with_warning() {
        let cfg = RunConfig::from_parts(FileConfig::default(), &opts(&["--phi", "0.5,0.1"])).unwrap();
        assert!((cfg.phi[0] - 0.2).abs() < 1e-15 && (cfg.phi[1] + 0.2).abs() < 1e-15);
        assert_eq!(cfg.warnings.len(), 1);
    }

    #[test]
    fn guard_rails() {
        for a in [&["--n", "5"][..], &["--L", "6"], &["--L", "0"], &["--n", "1"], &["--phi", "0.1,0.2,-0.3"], &["--nmax", "4", "--buffer", "4"], &["--tol=-1"], &["--suite", "nope"]] {
            assert!(matches!(RunConfig::from_parts(FileConfig::default(), &opts(a)), Err(QlabError::Usage(_))), "{a:?}");
        }
        assert!(RunConfig::from_parts(FileConfig::default(), &opts(&["--phi", "0.3,0.3"])).is_err());
    }

    #[test]
    fn flags_override_file() {
        let file: FileConfig = serde_json::from_str(r#"{"n": 3, "L": 1, "tol": 1e-3, "seed": 9, "eta": [0.2, 0.1, 0.05]}"#).unwrap();
        let cfg = RunConfig::from_parts(file, &opts(&["--L", "2"])).unwrap();
        assert_eq!((cfg.n, cfg.len, cfg.seed, cfg.tol), (3, 2, 9, Some(1e-3)));
        assert_eq!(cfg.eta_schedule, vec![0.2, 0.1, 0.05]);
        assert!(serde_json::from_str::<FileConfig>(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn hirota_suite_counts_quadrilaterals() {
        let cfg = RunConfig::from_parts(FileConfig::default(), &opts(&["--n", "3", "--L", "1", "--suite", "hirota"])).unwrap();
        let report = cmd_verify(&cfg);
        assert_eq!(report.records.len(), 6);
        assert!(report.passed);
    }

    #[test]
    fn impossible_tolerance_fails() {
        let cfg = RunConfig::from_parts(FileConfig::default(), &opts(&["--n", "2", "--L", "1", "--suite", "trace", "--tol", "1e-30"])).unwrap();
        let report = cmd_verify(&cfg);
        assert!(!report.passed);
        assert!(report.failures().count() > 0);
    }

    #[test]
    fn spectrum_n2_l2_table_and_round_trip() {
        let cfg = RunConfig::from_parts(FileConfig::default(), &opts(&["--n", "2", "--L", "2"])).unwrap();
        let report = cmd_spectrum(&cfg);
        assert!(report.passed, "{:?}", report.failures().collect::<Vec<_>>());
        assert_eq!(report.spectrum.len(), 4);
        let back = VerificationReport::from_json(&report.to_json().unwrap()).unwrap();
        assert_eq!(back, report);
        let csv = report_csv(&report, Command::Spectrum).unwrap();
        assert_eq!(csv.lines().next().unwrap(), "sector,state-index,E_direct,E_roots,E_TBox,max_bethe_residual");
        assert_eq!(csv.lines().count(), 5);
    }

    #[test]
    fn reports_are_deterministic() {
        let cfg = RunConfig::from_parts(FileConfig::default(), &opts(&["--n", "2", "--L", "2", "--suite", "hirota,determinant,plucker"])).unwrap();
        let strip = |r: VerificationReport| VerificationReport { records: r.records.iter().map(Record::untimed).collect(), ..r };
        let a = strip(cmd_verify(&cfg)).to_json().unwrap();
        let b = strip(cmd_verify(&cfg)).to_json().unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn hasse_dump_counts() {
        for (n, nodes, edges, quads, chains) in [(2, 4, 4, 1, 2), (3, 8, 12, 6, 6), (4, 16, 32, 24, 24)] {
            let h = hasse_dump(n).unwrap();
            assert_eq!((h.nodes.len(), h.edges.len(), h.quadrilaterals.len(), h.chains.len()), (nodes, edges, quads, chains));
        }
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run(["qlab", "hasse", "--n", "2", "--out", "/dev/null"]), 0);
        assert_eq!(run(["qlab", "verify", "--n", "9"]), 2);
        assert_eq!(run(["qlab", "frobnicate"]), 2);
        assert_eq!(run(["qlab", "verify", "--n", "2", "--L", "1", "--suite", "trace", "--tol", "1e-30", "--out", "/dev/null"]), 1);
    }
}
