use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use gaugefactor::dfjp::f_squared_partial;
use gaugefactor::{a_bar, c_constant, f_of_a, CheckOptions, ConvexBody, DfjpParams, DfjpSpace, FunctionSpace};
use gaugefactor_cli::generate::{parse_list, parse_range};
use gaugefactor_cli::run::{factor_report, run_check, run_gen, write_json};
use gaugefactor_cli::{AValue, MeasureFile, NormChoice, RunConfig};
use serde_json::json;

#[derive(Parser)]
#[command(name = "gaugefactor", version, about = "Interpolation-space factorization of vector measures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    L1,
    Linf,
    Both,
}

#[derive(clap::Args)]
struct Corpus {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// Dimension range, `lo..hi` inclusive.
    #[arg(long, default_value = "1..4")]
    dims: String,
    /// Atom count range, `lo..hi` inclusive.
    #[arg(long, default_value = "1..5")]
    atoms: String,
    /// Comma-separated subset of l1, linf, custom.
    #[arg(long, default_value = "l1,linf,custom")]
    norms: String,
    #[arg(long)]
    out: PathBuf,
}

impl Corpus {
    fn config(&self) -> Result<RunConfig> {
        Ok(RunConfig {
            seed: self.seed,
            trials: self.trials,
            dims: parse_range(&self.dims).context("--dims")?,
            atoms: parse_range(&self.atoms).context("--atoms")?,
            norm_pool: parse_list::<NormChoice>(&self.norms).context("--norms")?,
            output: self.out.clone(),
            ..RunConfig::default()
        })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve f(a) = 1 and print the root with C(a).
    Abar {
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Write seeded random measure files.
    Gen {
        #[command(flatten)]
        corpus: Corpus,
    },
    /// Evaluate the norm, the gauge of the atoms' hull and ||x||_K at a point.
    Gauge {
        #[arg(long)]
        measure: PathBuf,
        /// Comma-separated coordinates.
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, default_value = "abar")]
        a: String,
        /// Also evaluate the gauge of K_n.
        #[arg(long)]
        n: Option<usize>,
    },
    /// Factor one measure and run every check on it.
    Factor {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long, value_enum, default_value = "both")]
        which: Which,
        #[arg(long, default_value = "abar")]
        a: String,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Report path; printed to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a corpus, factor every instance and check every claim.
    Check {
        #[command(flatten)]
        corpus: Corpus,
        /// Comma-separated values of a; `abar` is the isometric tuning.
        #[arg(long, default_value = "abar")]
        a: String,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// `Ok(false)` when some claim failed.
fn execute(command: Command) -> Result<bool> {
    match command {
        Command::Abar { tol } => {
            let root = a_bar(tol)?;
            let f = f_of_a(root.value, (tol * 0.01).max(1e-15))?;
            // Re-evaluate with twice the series length.
            let residual = (f_squared_partial(root.value, 2 * f.terms).sqrt() - 1.0).abs();
            let out = json!({
                "a_bar": root.value,
                "bracket": [root.bracket.0, root.bracket.1],
                "residual": residual,
                "series_terms": 2 * f.terms,
                "c": c_constant(root.value),
            });
            println!("{}", serde_json::to_string_pretty(&out)?);
            Ok(true)
        }
        Command::Gen { corpus } => {
            let cfg = corpus.config()?;
            let paths = run_gen(&cfg)?;
            eprintln!("wrote {} instances to {}", paths.len(), cfg.output.display());
            Ok(true)
        }
        Command::Gauge { measure, x, a, n } => {
            let m = MeasureFile::read(&measure)?.build()?;
            let x: Vec<f64> = x
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .context("--x: expected comma-separated numbers")?;
            anyhow::ensure!(x.len() == m.dim(), "--x: expected {} coordinates, found {}", m.dim(), x.len());
            let a = a.parse::<AValue>()?.value();
            let space = m.codomain().clone();
            let atoms: Vec<Vec<f64>> = m.non_null_atoms().iter().map(|&i| m.atoms()[i].clone()).collect();
            let body = Arc::new(ConvexBody::new(space.clone(), atoms)?);
            let gauge = body.in_span(&x)?.then(|| body.gauge(&x)).transpose()?;
            let gauge_n = n.map(|n| body.gauge_n(a, n, &x)).transpose()?;
            let k_norm = match DfjpSpace::new(body, DfjpParams::with_a(a)?) {
                Ok(k) => Some(k.norm(&x)?),
                Err(_) => None,
            };
            let out = json!({
                "a": a,
                "norm": space.norm(&x)?,
                "gauge": gauge,
                "n": n,
                "gauge_n": gauge_n,
                "k_norm": k_norm,
            });
            println!("{}", serde_json::to_string_pretty(&out)?);
            Ok(true)
        }
        Command::Factor {
            measure,
            which,
            a,
            tol,
            samples,
            seed,
            out,
        } => {
            let m = MeasureFile::read(&measure)?.build()?;
            let which = match which {
                Which::L1 => vec![FunctionSpace::L1],
                Which::Linf => vec![FunctionSpace::Linf],
                Which::Both => vec![FunctionSpace::Linf, FunctionSpace::L1],
            };
            let params = DfjpParams::with_a(a.parse::<AValue>()?.value())?;
            let opts = CheckOptions {
                tol,
                sample_size: samples,
                seed,
            };
            let report = factor_report(&m, &which, params, &opts)?;
            match out {
                Some(path) => write_json(&path, &report)?,
                None => println!("{}", serde_json::to_string_pretty(&report)?),
            }
            for r in report.normalized.iter().chain(&report.raw) {
                for c in r.failures() {
                    eprintln!("FAIL {} {} worst slack {:?}", r.check, c.name, c.worst_slack);
                }
            }
            Ok(report.passed)
        }
        Command::Check { corpus, a, tol, samples } => {
            let mut cfg = corpus.config()?;
            cfg.a_values = parse_list::<AValue>(&a).context("--a")?;
            cfg.tol = tol;
            cfg.sample_size = samples;
            let summary = run_check(&cfg)?;
            eprintln!(
                "{}/{} trials passed in {:.1} s",
                summary.passed_trials, summary.trials, summary.runtime_seconds
            );
            for t in &summary.failed_trials {
                eprintln!("trial {t} failed");
            }
            Ok(summary.passed())
        }
    }
}
