//! Factorization runs, check suites and their reports.

use std::fs;
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use gaugefactor::dfjp::FactorNorms;
use gaugefactor::factor::{normalize, run_checks};
use gaugefactor::{
    factor_im, factor_iinfty, CheckOptions, CheckReport, DfjpParams, FactoredMeasure, FunctionSpace, MeasureChecks,
    Scope, Semivariation, Status, VectorMeasure,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::generate::RunConfig;
use crate::schema::MeasureFile;

/// Environment variable capping the number of worker threads.
pub const THREADS_VAR: &str = "GAUGEFACTOR_THREADS";

#[derive(Clone, Debug, Serialize)]
pub struct FactorizationRecord {
    pub which: FunctionSpace,
    pub a: f64,
    pub series_tol: f64,
    pub norms: FactorNorms,
    /// Generators of `K`, one per `+-` pair.
    pub k_body: Vec<Vec<f64>>,
    /// Orthonormal basis of `span(K)`, one vector per entry.
    pub basis: Vec<Vec<f64>>,
    /// `||m~||(Omega)` measured in `X_K`.
    pub tilde_total_semivariation: f64,
}

impl FactorizationRecord {
    pub fn new(fm: &FactoredMeasure) -> Result<Self> {
        let f = fm.factorization();
        let basis = f.k_body().basis();
        let params = f.space.params();
        Ok(FactorizationRecord {
            which: fm.which(),
            a: params.a,
            series_tol: params.series_tol,
            norms: f.norms.clone(),
            k_body: f.k_body().generators().to_vec(),
            basis: basis.column_iter().map(|c| c.iter().copied().collect()).collect(),
            tilde_total_semivariation: fm.m_tilde().semivariation(fm.m_tilde().full_set())?,
        })
    }
}

/// Everything `factor` reports for one measure and one `a`.
#[derive(Clone, Debug, Serialize)]
pub struct FactorReport {
    pub measure: MeasureFile,
    pub a: f64,
    pub isometric: bool,
    pub c_a: f64,
    /// `||m||(Omega)`; the checks run on `m / ||m||(Omega)` and on `m`.
    pub scale: f64,
    /// Factorizations of the normalized measure.
    pub factorizations: Vec<FactorizationRecord>,
    pub normalized: Vec<CheckReport>,
    pub raw: Vec<CheckReport>,
    pub passed: bool,
}

pub fn factor_report(
    m: &VectorMeasure,
    which: &[FunctionSpace],
    params: DfjpParams,
    opts: &CheckOptions,
) -> Result<FactorReport> {
    let (unit, scale) = normalize(m)?;
    let mut factorizations = Vec::new();
    let mut normalized = Vec::new();
    let mut raw = Vec::new();
    for &w in which {
        let fm = match w {
            FunctionSpace::Linf => factor_iinfty(&unit, params)?,
            FunctionSpace::L1 => factor_im(&unit, params)?,
        };
        factorizations.push(FactorizationRecord::new(&fm)?);
        normalized.extend(run_checks(&fm, opts)?);
        raw.extend(run_checks(&fm.rescaled(scale)?, opts)?);
    }
    let passed = normalized.iter().chain(&raw).all(CheckReport::passed);
    Ok(FactorReport {
        measure: MeasureFile::from_measure(m),
        a: params.a,
        isometric: params.is_lno(),
        c_a: gaugefactor::c_constant(params.a),
        scale,
        factorizations,
        normalized,
        raw,
        passed,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ARun {
    pub a: f64,
    pub checks: MeasureChecks,
}

#[derive(Clone, Debug, Serialize)]
pub struct TrialReport {
    pub trial: usize,
    pub seed: u64,
    pub measure: Option<MeasureFile>,
    pub runs: Vec<ARun>,
    /// Set when the instance could not be generated or checked.
    pub error: Option<String>,
    pub passed: bool,
}

pub fn run_trial(cfg: &RunConfig, trial: usize) -> TrialReport {
    let seed = cfg.trial_seed(trial);
    let mut report = TrialReport {
        trial,
        seed,
        measure: None,
        runs: Vec::new(),
        error: None,
        passed: false,
    };
    let outcome = (|| -> Result<()> {
        let m = cfg.instance(trial)?;
        report.measure = Some(MeasureFile::from_measure(&m));
        let opts = CheckOptions {
            tol: cfg.tol,
            sample_size: cfg.sample_size,
            seed,
        };
        let both = [FunctionSpace::Linf, FunctionSpace::L1];
        for a in &cfg.a_values {
            let params = DfjpParams::with_a(a.value())?;
            let checks = gaugefactor::check_measure(&m, &both, params, &opts)?;
            report.runs.push(ARun { a: params.a, checks });
        }
        Ok(())
    })();
    match outcome {
        Ok(()) => report.passed = report.runs.iter().all(|r| r.checks.passed()),
        Err(e) => report.error = Some(format!("{e:#}")),
    }
    report
}

/// One CSV row: one claim of one check in one trial.
#[derive(Clone, Debug, Serialize)]
pub struct ClaimRow {
    pub trial: usize,
    pub seed: u64,
    pub a: f64,
    pub scaling: &'static str,
    pub check: String,
    pub claim: String,
    pub scope: Option<Scope>,
    pub status: Status,
    pub worst_slack: Option<f64>,
    pub tolerance: Option<f64>,
    pub cases: usize,
    pub observed: Option<f64>,
}

impl TrialReport {
    pub fn rows(&self) -> Vec<ClaimRow> {
        let mut rows = Vec::new();
        if let Some(e) = &self.error {
            rows.push(ClaimRow {
                trial: self.trial,
                seed: self.seed,
                a: f64::NAN,
                scaling: "none",
                check: "error".into(),
                claim: e.clone(),
                scope: None,
                status: Status::Fail,
                worst_slack: None,
                tolerance: None,
                cases: 0,
                observed: None,
            });
        }
        for run in &self.runs {
            for (scaling, reports) in [("normalized", &run.checks.normalized), ("raw", &run.checks.raw)] {
                for r in reports {
                    for c in &r.claims {
                        rows.push(ClaimRow {
                            trial: self.trial,
                            seed: self.seed,
                            a: run.a,
                            scaling,
                            check: r.check.clone(),
                            claim: c.name.clone(),
                            scope: Some(c.scope),
                            status: c.status,
                            worst_slack: c.worst_slack,
                            tolerance: Some(c.tolerance),
                            cases: c.cases,
                            observed: c.observed,
                        });
                    }
                }
            }
        }
        rows
    }
}

/// Pass counts and the tightest margin of one claim across all trials.
#[derive(Clone, Debug, Serialize)]
pub struct ClaimSummary {
    pub a: f64,
    pub scaling: &'static str,
    pub check: String,
    pub claim: String,
    pub scope: Option<Scope>,
    pub pass: usize,
    pub fail: usize,
    pub skipped: usize,
    pub worst_slack: Option<f64>,
    pub worst_trial: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub seed: u64,
    pub trials: usize,
    pub dims: (usize, usize),
    pub atoms: (usize, usize),
    pub norms: Vec<crate::generate::NormChoice>,
    pub a_values: Vec<f64>,
    pub tol: f64,
    pub sample_size: usize,
    pub passed_trials: usize,
    pub failed_trials: Vec<usize>,
    pub claims: Vec<ClaimSummary>,
    pub runtime_seconds: f64,
}

impl Summary {
    pub fn passed(&self) -> bool {
        self.failed_trials.is_empty()
    }
}

pub fn summarize(cfg: &RunConfig, trials: &[TrialReport], runtime_seconds: f64) -> Summary {
    let mut claims: Vec<ClaimSummary> = Vec::new();
    for t in trials {
        for row in t.rows() {
            let idx = claims.iter().position(|c| {
                c.a.to_bits() == row.a.to_bits()
                    && c.scaling == row.scaling
                    && c.check == row.check
                    && c.claim == row.claim
            });
            let idx = idx.unwrap_or_else(|| {
                claims.push(ClaimSummary {
                    a: row.a,
                    scaling: row.scaling,
                    check: row.check.clone(),
                    claim: row.claim.clone(),
                    scope: row.scope,
                    pass: 0,
                    fail: 0,
                    skipped: 0,
                    worst_slack: None,
                    worst_trial: None,
                });
                claims.len() - 1
            });
            let c = &mut claims[idx];
            match row.status {
                Status::Pass => c.pass += 1,
                Status::Fail => c.fail += 1,
                Status::Skipped => c.skipped += 1,
            }
            if row.status != Status::Skipped {
                if let Some(w) = row.worst_slack {
                    if c.worst_slack.is_none_or(|cw| w < cw) {
                        c.worst_slack = Some(w);
                        c.worst_trial = Some(t.trial);
                    }
                }
            }
        }
    }
    Summary {
        seed: cfg.seed,
        trials: cfg.trials,
        dims: (*cfg.dims.start(), *cfg.dims.end()),
        atoms: (*cfg.atoms.start(), *cfg.atoms.end()),
        norms: cfg.norm_pool.clone(),
        a_values: cfg.a_values.iter().map(|a| a.value()).collect(),
        tol: cfg.tol,
        sample_size: cfg.sample_size,
        passed_trials: trials.iter().filter(|t| t.passed).count(),
        failed_trials: trials.iter().filter(|t| !t.passed).map(|t| t.trial).collect(),
        claims,
        runtime_seconds,
    }
}

/// Runs every trial on a pool sized by [`THREADS_VAR`] and returns the
/// reports in trial order.
pub fn run_trials(cfg: &RunConfig) -> Result<Vec<TrialReport>> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_VAR) {
        let n: usize = v
            .trim()
            .parse()
            .with_context(|| format!("{THREADS_VAR}: expected a thread count, found {v:?}"))?;
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder.build().context("building the worker pool")?;
    Ok(pool.install(|| (0..cfg.trials).into_par_iter().map(|t| run_trial(cfg, t)).collect()))
}

pub fn write_csv(path: &Path, trials: &[TrialReport]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    for t in trials {
        for row in t.rows() {
            w.serialize(row)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

/// Runs the suite and writes `summary.json`, `claims.csv` and
/// `trials/trial_XXXX.json` under the configured output directory.
pub fn run_check(cfg: &RunConfig) -> Result<Summary> {
    cfg.validate()?;
    let start = Instant::now();
    let trials = run_trials(cfg)?;
    let runtime = start.elapsed().as_secs_f64();
    let dir = &cfg.output;
    let trial_dir = dir.join("trials");
    fs::create_dir_all(&trial_dir).with_context(|| format!("creating {}", trial_dir.display()))?;
    for t in &trials {
        write_json(&trial_dir.join(format!("trial_{:04}.json", t.trial)), t)?;
    }
    write_csv(&dir.join("claims.csv"), &trials)?;
    let summary = summarize(cfg, &trials, runtime);
    write_json(&dir.join("summary.json"), &summary)?;
    Ok(summary)
}

/// Writes the instances of `cfg` as `instance_XXXX.json`.
pub fn run_gen(cfg: &RunConfig) -> Result<Vec<std::path::PathBuf>> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.output).with_context(|| format!("creating {}", cfg.output.display()))?;
    let mut paths = Vec::new();
    for t in 0..cfg.trials {
        let m = cfg.instance(t)?;
        let path = cfg.output.join(format!("instance_{t:04}.json"));
        write_json(&path, &MeasureFile::from_measure(&m))?;
        paths.push(path);
    }
    Ok(paths)
}
