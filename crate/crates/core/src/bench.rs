//! Random instance families, timing, and CSV output.

use std::io::Write;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::canon_baseline::{butler_portugal_traced, BaselineError, BaselineOptions};
use crate::canon_fast::{canonicalize_traced, FastError, FastOptions};
use crate::oracle;
use crate::signed_perm::Sign;
use crate::tensor_frontend::{
    build_problem, CanonProblem, Factor, FrontendError, IndexToken, Registry, TensorDecl,
    TensorMonomial,
};
use crate::{CanonResult, Engine};

/// Recorded in the CSV header so runs can be reproduced.
pub const PRNG_ID: &str = "ChaCha8 (rand_chacha 0.3), seeded with seed_from_u64";

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("unknown family `{0}`")]
    UnknownFamily(String),
    #[error("family {family} needs size >= {min}")]
    BadSize { family: &'static str, min: usize },
    #[error("engines disagree on {family} size {size} seed {seed}: {detail}")]
    Disagreement {
        family: &'static str,
        size: usize,
        seed: u64,
        detail: String,
    },
    #[error(transparent)]
    Frontend(#[from] FrontendError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    SymFrees,
    NosymDummies,
    CyclicDummies,
    Riemann,
    TotalsymFrustrated,
    TotalsymRandom,
    PairwiseFrustrated,
    PairwiseRandom,
}

impl Family {
    pub const ALL: [Family; 8] = [
        Family::SymFrees,
        Family::NosymDummies,
        Family::CyclicDummies,
        Family::Riemann,
        Family::TotalsymFrustrated,
        Family::TotalsymRandom,
        Family::PairwiseFrustrated,
        Family::PairwiseRandom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::SymFrees => "sym-frees",
            Family::NosymDummies => "nosym-dummies",
            Family::CyclicDummies => "cyclic-dummies",
            Family::Riemann => "riemann",
            Family::TotalsymFrustrated => "totalsym-frustrated",
            Family::TotalsymRandom => "totalsym-random",
            Family::PairwiseFrustrated => "pairwise-frustrated",
            Family::PairwiseRandom => "pairwise-random",
        }
    }

    /// Slots used by an instance of the given size.
    pub fn slots(self, size: usize) -> usize {
        match self {
            Family::SymFrees => size,
            Family::NosymDummies
            | Family::CyclicDummies
            | Family::TotalsymFrustrated
            | Family::TotalsymRandom => 2 * size,
            Family::Riemann | Family::PairwiseFrustrated | Family::PairwiseRandom => 4 * size,
        }
    }
}

impl std::str::FromStr for Family {
    type Err = BenchError;
    fn from_str(s: &str) -> Result<Family, BenchError> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| BenchError::UnknownFamily(s.to_string()))
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone)]
pub struct BenchCase {
    pub family: Family,
    pub size: usize,
    pub seed: u64,
    pub registry: Registry,
    pub monomial: TensorMonomial,
    pub problem: CanonProblem,
}

fn free(k: usize) -> String {
    format!("i{k:03}")
}

fn dummy(k: usize) -> String {
    format!("d{k:03}")
}

fn tok(name: String, up: bool) -> IndexToken {
    IndexToken { name, up }
}

fn factor(tensor: &str, indices: Vec<IndexToken>) -> Factor {
    Factor {
        tensor: tensor.to_string(),
        indices,
    }
}

/// Fills `slots` with dummy pairs drawn from a uniform random perfect
/// matching, each pair with a random choice of upper leg.
fn random_matching(slots: usize, rng: &mut ChaCha8Rng) -> Vec<IndexToken> {
    let mut order: Vec<usize> = (0..slots).collect();
    order.shuffle(rng);
    let mut out: Vec<Option<IndexToken>> = vec![None; slots];
    for (k, pair) in order.chunks(2).enumerate() {
        let up_first = rng.gen_bool(0.5);
        out[pair[0]] = Some(tok(dummy(k + 1), up_first));
        out[pair[1]] = Some(tok(dummy(k + 1), !up_first));
    }
    out.into_iter()
        .map(|t| t.expect("even slot count"))
        .collect()
}

fn pairwise_decl(name: &str, pairs: usize) -> TensorDecl {
    let mut d = TensorDecl::new(name, 2 * pairs);
    for k in 1..pairs {
        let (a, b) = (2 * k - 1, 2 * k);
        d = d
            .with_cycles(&format!("+({},{})({},{})", a, a + 2, b, b + 2))
            .expect("valid cycles");
    }
    d
}

/// Builds one instance. Regenerating from the same arguments gives the
/// same problem.
pub fn generate(family: Family, size: usize, seed: u64) -> Result<BenchCase, BenchError> {
    if size == 0 {
        return Err(BenchError::BadSize {
            family: family.name(),
            min: 1,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut reg = Registry::new();
    let factors = match family {
        Family::SymFrees => {
            reg.add_tensor(
                TensorDecl::new("T", size)
                    .with_range(1, size, Sign::Plus)
                    .expect("range"),
            )?;
            let mut names: Vec<String> = (1..=size).map(free).collect();
            names.shuffle(&mut rng);
            vec![factor(
                "T",
                names.into_iter().map(|n| tok(n, false)).collect(),
            )]
        }
        Family::NosymDummies => {
            reg.add_tensor(TensorDecl::new("T", 2 * size))?;
            vec![factor("T", random_matching(2 * size, &mut rng))]
        }
        Family::CyclicDummies => {
            let cycle: Vec<String> = (1..=size).map(|k| k.to_string()).collect();
            let gen = format!("+({})", cycle.join(","));
            for name in ["T", "U"] {
                let mut d = TensorDecl::new(name, size);
                if size > 1 {
                    d = d.with_cycles(&gen).expect("cycle");
                }
                reg.add_tensor(d)?;
            }
            let mut p1: Vec<usize> = (1..=size).collect();
            let mut p2 = p1.clone();
            p1.shuffle(&mut rng);
            p2.shuffle(&mut rng);
            vec![
                factor("T", p1.into_iter().map(|k| tok(dummy(k), false)).collect()),
                factor("U", p2.into_iter().map(|k| tok(dummy(k), true)).collect()),
            ]
        }
        Family::Riemann => {
            reg.add_tensor(
                TensorDecl::new("R", 4)
                    .with_cycles("-(1,2)")
                    .and_then(|d| d.with_cycles("+(1,3)(2,4)"))
                    .and_then(|d| d.with_cycles("-(3,4)"))
                    .expect("riemann generators"),
            )?;
            let all = random_matching(4 * size, &mut rng);
            all.chunks(4).map(|c| factor("R", c.to_vec())).collect()
        }
        Family::TotalsymFrustrated | Family::TotalsymRandom => {
            for name in ["T", "U"] {
                reg.add_tensor(
                    TensorDecl::new(name, size)
                        .with_range(1, size, Sign::Plus)
                        .expect("range"),
                )?;
            }
            if family == Family::TotalsymFrustrated {
                let mut p: Vec<usize> = (1..=size).collect();
                p.shuffle(&mut rng);
                vec![
                    factor("T", (1..=size).map(|k| tok(dummy(k), false)).collect()),
                    factor("U", p.into_iter().map(|k| tok(dummy(k), true)).collect()),
                ]
            } else {
                let all = random_matching(2 * size, &mut rng);
                vec![
                    factor("T", all[..size].to_vec()),
                    factor("U", all[size..].to_vec()),
                ]
            }
        }
        Family::PairwiseFrustrated | Family::PairwiseRandom => {
            reg.add_tensor(pairwise_decl("T", size))?;
            reg.add_tensor(pairwise_decl("U", size))?;
            let r = 2 * size;
            if family == Family::PairwiseFrustrated {
                let mut p: Vec<usize> = (1..=r).collect();
                p.shuffle(&mut rng);
                vec![
                    factor("T", (1..=r).map(|k| tok(dummy(k), false)).collect()),
                    factor("U", p.into_iter().map(|k| tok(dummy(k), true)).collect()),
                ]
            } else {
                let all = random_matching(2 * r, &mut rng);
                vec![
                    factor("T", all[..r].to_vec()),
                    factor("U", all[r..].to_vec()),
                ]
            }
        }
    };
    let monomial = TensorMonomial {
        sign: Sign::Plus,
        factors,
    };
    let problem = build_problem(&monomial, &reg)?;
    Ok(BenchCase {
        family,
        size,
        seed,
        registry: reg,
        monomial,
        problem,
    })
}

/// Seed of one trial, fixed by family, size and trial number.
pub fn trial_seed(family: Family, size: usize, trial: usize) -> u64 {
    let f = Family::ALL
        .iter()
        .position(|&x| x == family)
        .expect("listed") as u64;
    (f << 48) ^ ((size as u64) << 24) ^ trial as u64
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EngineFailure {
    Timeout,
    Budget,
    Internal(String),
}

/// Result of one engine run.
#[derive(Debug, Clone)]
pub struct EngineRun {
    pub result: CanonResult,
    pub max_configs: usize,
    pub elapsed: Duration,
}

pub fn run_engine(
    problem: &CanonProblem,
    engine: Engine,
    budget: Option<Duration>,
) -> Result<EngineRun, EngineFailure> {
    let start = Instant::now();
    let deadline = budget.map(|b| start + b);
    let p = problem;
    let (result, max_configs) = match engine {
        Engine::Fast => {
            let opts = FastOptions {
                deadline,
                ..FastOptions::default()
            };
            match canonicalize_traced(&p.g_init, &p.slot_group, &p.ctx, &p.subsets, opts) {
                Ok((r, t)) => (r, t.max_configs()),
                Err(FastError::Deadline { .. }) => return Err(EngineFailure::Timeout),
                Err(FastError::Budget { .. }) => return Err(EngineFailure::Budget),
                Err(e) => return Err(EngineFailure::Internal(e.to_string())),
            }
        }
        Engine::Baseline => {
            let opts = BaselineOptions {
                deadline,
                max_configs: None,
            };
            match butler_portugal_traced(&p.g_init, &p.slot_group, &p.ctx, opts) {
                Ok((r, t)) => (r, t.max_configs()),
                Err(BaselineError::Deadline { .. }) => return Err(EngineFailure::Timeout),
                Err(BaselineError::Budget { .. }) => return Err(EngineFailure::Budget),
                Err(e) => return Err(EngineFailure::Internal(e.to_string())),
            }
        }
    };
    Ok(EngineRun {
        result,
        max_configs,
        elapsed: start.elapsed(),
    })
}

/// Short stable fingerprint of a result.
pub fn digest(result: &CanonResult) -> String {
    match result {
        CanonResult::Zero => "zero".to_string(),
        CanonResult::Canonical(g) => {
            let h = Sha256::digest(g.to_string().as_bytes());
            h.iter().take(8).map(|b| format!("{b:02x}")).collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub family: Family,
    pub n: usize,
    pub trial: usize,
    pub seed: u64,
    pub engine: Engine,
    pub is_zero: Option<bool>,
    /// `zero`, a hash of the canonical configuration, or `timeout`.
    pub result_digest: String,
    pub elapsed_us: f64,
    pub max_configs: usize,
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub families: Vec<Family>,
    pub sizes: Vec<usize>,
    pub trials: usize,
    pub engines: Vec<Engine>,
    /// Oracle runs when |S| |L| (or |S| alone, see [`oracle::oracle_canonicalize`])
    /// stays under this cap. Zero disables it.
    pub oracle_cap: usize,
    pub budget: Duration,
}

impl Default for BenchConfig {
    fn default() -> BenchConfig {
        BenchConfig {
            families: Family::ALL.to_vec(),
            sizes: vec![2, 4, 6],
            trials: 3,
            engines: vec![Engine::Fast, Engine::Baseline],
            oracle_cap: 100_000,
            budget: Duration::from_secs(10),
        }
    }
}

/// Runs every engine on every case and cross-checks the results. An engine
/// that times out at some size is skipped for larger sizes of that family.
pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<BenchRecord>, BenchError> {
    let mut out = Vec::new();
    for &family in &cfg.families {
        let mut gave_up: Vec<Engine> = Vec::new();
        for &size in &cfg.sizes {
            for trial in 0..cfg.trials {
                let seed = trial_seed(family, size, trial);
                let case = generate(family, size, seed)?;
                let mut seen: Option<(Engine, String)> = None;
                for &engine in &cfg.engines {
                    let mut rec = BenchRecord {
                        family,
                        n: size,
                        trial,
                        seed,
                        engine,
                        is_zero: None,
                        result_digest: "skipped".into(),
                        elapsed_us: 0.0,
                        max_configs: 0,
                    };
                    if !gave_up.contains(&engine) {
                        match run_engine(&case.problem, engine, Some(cfg.budget)) {
                            Ok(run) => {
                                rec.is_zero = Some(run.result.is_zero());
                                rec.result_digest = digest(&run.result);
                                rec.elapsed_us = run.elapsed.as_secs_f64() * 1e6;
                                rec.max_configs = run.max_configs;
                                match &seen {
                                    Some((other, d)) if *d != rec.result_digest => {
                                        return Err(BenchError::Disagreement {
                                            family: family.name(),
                                            size,
                                            seed,
                                            detail: format!(
                                                "{} gives {d}, {} gives {}",
                                                other.name(),
                                                engine.name(),
                                                rec.result_digest
                                            ),
                                        })
                                    }
                                    Some(_) => {}
                                    None => seen = Some((engine, rec.result_digest.clone())),
                                }
                            }
                            Err(EngineFailure::Timeout) | Err(EngineFailure::Budget) => {
                                rec.result_digest = "timeout".into();
                                rec.elapsed_us = cfg.budget.as_secs_f64() * 1e6;
                                gave_up.push(engine);
                            }
                            Err(EngineFailure::Internal(e)) => {
                                return Err(BenchError::Disagreement {
                                    family: family.name(),
                                    size,
                                    seed,
                                    detail: format!("{} failed: {e}", engine.name()),
                                })
                            }
                        }
                    }
                    out.push(rec);
                }
                if cfg.oracle_cap > 0 {
                    if let Some((engine, d)) = &seen {
                        let p = &case.problem;
                        if let Ok(r) = oracle::oracle_canonicalize(
                            &p.g_init,
                            &p.slot_group,
                            &p.ctx,
                            cfg.oracle_cap,
                        ) {
                            if digest(&r) != *d {
                                return Err(BenchError::Disagreement {
                                    family: family.name(),
                                    size,
                                    seed,
                                    detail: format!(
                                        "{} gives {d}, oracle gives {}",
                                        engine.name(),
                                        digest(&r)
                                    ),
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

pub const CSV_COLUMNS: [&str; 9] = [
    "family",
    "n",
    "trial",
    "seed",
    "engine",
    "is_zero",
    "result_digest",
    "elapsed_us",
    "max_configs",
];

/// Writes records as CSV, preceded by `#` comment lines naming the random
/// generator and the riemann contraction rule.
pub fn write_csv<W: Write>(mut w: W, records: &[BenchRecord]) -> Result<(), BenchError> {
    writeln!(w, "# prng: {PRNG_ID}")?;
    writeln!(
        w,
        "# riemann: uniform random perfect matching over all slots, random leg variance"
    )?;
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(CSV_COLUMNS)?;
    for r in records {
        csv.write_record([
            r.family.name().to_string(),
            r.n.to_string(),
            r.trial.to_string(),
            r.seed.to_string(),
            r.engine.name().to_string(),
            r.is_zero.map_or(String::new(), |z| z.to_string()),
            r.result_digest.clone(),
            format!("{:.3}", r.elapsed_us),
            r.max_configs.to_string(),
        ])?;
    }
    csv.flush()?;
    Ok(())
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    match v.len() {
        0 => f64::NAN,
        n if n % 2 == 1 => v[n / 2],
        n => 0.5 * (v[n / 2 - 1] + v[n / 2]),
    }
}

/// Least-squares slope of log(time) against log(size) over the larger half
/// of the sizes, so start-up overhead at small sizes does not bias it.
pub fn fit_exponent(points: &[(f64, f64)]) -> f64 {
    let mut pts: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|&(x, y)| x > 0.0 && y > 0.0)
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let pts = &pts[pts.len() / 2..];
    let k = pts.len() as f64;
    let (xs, ys): (Vec<f64>, Vec<f64>) = pts.iter().map(|&(x, y)| (x.ln(), y.ln())).unzip();
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Median wall time per call, running enough repetitions that each sample
/// lasts at least `min_sample`.
pub fn time_engine(
    problem: &CanonProblem,
    engine: Engine,
    samples: usize,
    min_sample: Duration,
) -> f64 {
    let once = |p: &CanonProblem| run_engine(p, engine, None).expect("unlimited run");
    let t0 = Instant::now();
    once(problem);
    let single = t0.elapsed().max(Duration::from_nanos(100));
    let reps = (min_sample.as_secs_f64() / single.as_secs_f64())
        .ceil()
        .max(1.0) as usize;
    let mut times = Vec::with_capacity(samples);
    for _ in 0..samples {
        let t = Instant::now();
        for _ in 0..reps {
            once(problem);
        }
        times.push(t.elapsed().as_secs_f64() * 1e6 / reps as f64);
    }
    median(&times)
}

/// Per (family, engine, size) median elapsed time, for summaries.
pub fn medians(records: &[BenchRecord]) -> Vec<(Family, Engine, usize, f64)> {
    let mut keys: Vec<(Family, &'static str, usize)> = records
        .iter()
        .filter(|r| r.is_zero.is_some())
        .map(|r| (r.family, r.engine.name(), r.n))
        .collect();
    keys.sort();
    keys.dedup();
    keys.into_iter()
        .map(|(f, e, n)| {
            let xs: Vec<f64> = records
                .iter()
                .filter(|r| {
                    r.family == f && r.engine.name() == e && r.n == n && r.is_zero.is_some()
                })
                .map(|r| r.elapsed_us)
                .collect();
            let engine = e.parse().expect("engine name");
            (f, engine, n, median(&xs))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_deterministic() {
        for f in Family::ALL {
            let a = generate(f, 3, 11).unwrap();
            let b = generate(f, 3, 11).unwrap();
            assert_eq!(a.monomial, b.monomial, "{f}");
            assert_eq!(a.problem.g_init, b.problem.g_init);
            assert_eq!(a.problem.slot_count(), f.slots(3));
        }
    }

    #[test]
    fn family_shapes() {
        let c = generate(Family::TotalsymFrustrated, 6, 1).unwrap();
        let mut want = vec![1; 6];
        want.extend(vec![2; 6]);
        assert_eq!(c.problem.subsets.entries, want);
        let c = generate(Family::Riemann, 3, 7).unwrap();
        assert_eq!(c.problem.slot_count(), 12);
        assert_eq!(c.problem.slot_group.order().to_string(), "512");
        let c = generate(Family::SymFrees, 1, 5).unwrap();
        assert_eq!(c.problem.slot_count(), 1);
        let c = generate(Family::PairwiseFrustrated, 3, 5).unwrap();
        assert_eq!(c.problem.slot_group.order().to_string(), "36");
        assert!(c.problem.subsets.entries.iter().all(|&x| x == 0));
    }

    #[test]
    fn fit_recovers_power_law() {
        let pts: Vec<(f64, f64)> = (1..=8)
            .map(|k| (k as f64, 3.0 * (k as f64).powf(2.5)))
            .collect();
        assert!((fit_exponent(&pts) - 2.5).abs() < 1e-9);
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn csv_has_exact_columns() {
        let recs = run_bench(&BenchConfig {
            families: vec![Family::NosymDummies],
            sizes: vec![2],
            trials: 1,
            ..BenchConfig::default()
        })
        .unwrap();
        let mut buf = Vec::new();
        write_csv(&mut buf, &recs).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
        assert_eq!(
            header,
            "family,n,trial,seed,engine,is_zero,result_digest,elapsed_us,max_configs"
        );
        assert_eq!(text.lines().count(), 3 + 2);
    }
}
