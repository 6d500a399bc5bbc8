use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use tensor_canon::bench::{self, BenchConfig, Family};
use tensor_canon::canon_baseline::{butler_portugal_traced, BaselineOptions};
use tensor_canon::canon_fast::{canonicalize_traced, FastOptions};
use tensor_canon::oracle::oracle_canonicalize;
use tensor_canon::tensor_frontend::render_config;
use tensor_canon::{build_problem, render, Engine, Registry, TensorMonomial};

#[derive(Parser)]
#[command(
    name = "tcanon",
    version,
    about = "Canonical forms of tensor monomials"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Canonicalize one monomial and print it, or `0` when it vanishes.
    Canon {
        /// Declaration file (tensors and bundles).
        #[arg(long)]
        decls: Option<PathBuf>,
        #[arg(long, default_value = "fast")]
        engine: Engine,
        /// Print per-slot configuration counts to stderr.
        #[arg(long)]
        trace: bool,
        /// The monomial; read from stdin when absent or `-`.
        expr: Option<String>,
    },
    /// Time both engines on generated families and write CSV.
    Bench {
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "sym-frees,nosym-dummies,cyclic-dummies,riemann,totalsym-frustrated,totalsym-random,pairwise-frustrated,pairwise-random"
        )]
        families: Vec<Family>,
        #[arg(long, value_delimiter = ',', default_value = "2,4,6")]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 3)]
        trials: usize,
        #[arg(long, value_delimiter = ',', default_value = "fast,baseline")]
        engines: Vec<Engine>,
        /// Largest search space the oracle may enumerate; 0 disables it.
        #[arg(long, default_value_t = 100_000)]
        oracle_cap: usize,
        /// Per-run time budget in seconds.
        #[arg(long, default_value_t = 10.0)]
        budget: f64,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare both engines against enumeration on small generated cases.
    OracleCheck {
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "sym-frees,nosym-dummies,cyclic-dummies,riemann,totalsym-frustrated,totalsym-random,pairwise-frustrated,pairwise-random"
        )]
        families: Vec<Family>,
        #[arg(long, default_value_t = 10)]
        max_slots: usize,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = tensor_canon::oracle::DEFAULT_CAP)]
        cap: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = match cli.command {
        Command::Canon {
            decls,
            engine,
            trace,
            expr,
        } => canon(decls, engine, trace, expr),
        Command::Bench {
            families,
            sizes,
            trials,
            engines,
            oracle_cap,
            budget,
            out,
        } => run_bench(
            BenchConfig {
                families,
                sizes,
                trials,
                engines,
                oracle_cap,
                budget: Duration::from_secs_f64(budget),
            },
            out,
        ),
        Command::OracleCheck {
            families,
            max_slots,
            trials,
            cap,
        } => oracle_check(&families, max_slots, trials, cap),
    };
    match run {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn canon(
    decls: Option<PathBuf>,
    engine: Engine,
    trace: bool,
    expr: Option<String>,
) -> Result<ExitCode> {
    let registry = match &decls {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            Registry::parse_decls(&text).with_context(|| format!("in {}", path.display()))?
        }
        None => Registry::new(),
    };
    let expr = match expr.as_deref() {
        None | Some("-") => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s)?;
            s
        }
        Some(e) => e.to_string(),
    };
    let m = TensorMonomial::parse(expr.trim(), &registry)?;
    let problem = build_problem(&m, &registry)?;
    let p = &problem;
    let (result, sizes) = match engine {
        Engine::Fast => {
            let (r, t) = canonicalize_traced(
                &p.g_init,
                &p.slot_group,
                &p.ctx,
                &p.subsets,
                FastOptions::default(),
            )?;
            (r, t.sizes_after)
        }
        Engine::Baseline => {
            let (r, t) = butler_portugal_traced(
                &p.g_init,
                &p.slot_group,
                &p.ctx,
                BaselineOptions::default(),
            )?;
            (r, t.sizes_after)
        }
    };
    if trace {
        for (i, k) in sizes.iter().enumerate() {
            eprintln!("slot {}: {k} configurations", i + 1);
        }
    }
    println!("{}", render(&result, p));
    Ok(ExitCode::SUCCESS)
}

fn run_bench(cfg: BenchConfig, out: Option<PathBuf>) -> Result<ExitCode> {
    for &f in &cfg.families {
        for &size in &cfg.sizes {
            if size == 0 {
                bail!("size 0 is not valid for {f}");
            }
        }
    }
    let records = bench::run_bench(&cfg)?;
    match out {
        Some(path) => {
            let file = std::fs::File::create(&path)
                .with_context(|| format!("creating {}", path.display()))?;
            bench::write_csv(std::io::BufWriter::new(file), &records)?;
        }
        None => bench::write_csv(std::io::stdout().lock(), &records)?,
    }
    for (family, engine, size, us) in bench::medians(&records) {
        eprintln!("{family} {} n={size}: median {us:.1} us", engine.name());
    }
    Ok(ExitCode::SUCCESS)
}

fn oracle_check(
    families: &[Family],
    max_slots: usize,
    trials: usize,
    cap: usize,
) -> Result<ExitCode> {
    let (mut checked, mut skipped, mut bad) = (0usize, 0usize, 0usize);
    for &f in families {
        for size in (1..).take_while(|&k| f.slots(k) <= max_slots) {
            for trial in 0..trials {
                let case = bench::generate(f, size, bench::trial_seed(f, size, trial))?;
                let p = &case.problem;
                let Ok(want) = oracle_canonicalize(&p.g_init, &p.slot_group, &p.ctx, cap) else {
                    skipped += 1;
                    continue;
                };
                checked += 1;
                let fast = canonicalize_traced(
                    &p.g_init,
                    &p.slot_group,
                    &p.ctx,
                    &p.subsets,
                    FastOptions::default(),
                )?
                .0;
                let base = butler_portugal_traced(
                    &p.g_init,
                    &p.slot_group,
                    &p.ctx,
                    BaselineOptions::default(),
                )?
                .0;
                if fast != want || base != want {
                    bad += 1;
                    println!(
                        "MISMATCH {f} size={size} seed={}: {}\n  oracle   {}\n  fast     {}\n  baseline {}",
                        case.seed,
                        render_config(&p.g_init, p),
                        render(&want, p),
                        render(&fast, p),
                        render(&base, p)
                    );
                }
            }
        }
    }
    println!("checked {checked}, skipped {skipped} over the cap, mismatches {bad}");
    Ok(if bad == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}
