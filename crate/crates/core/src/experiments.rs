//! Seeded Monte-Carlo experiments with flat-file output.
//!
//! Every run writes `manifest.json`, `replicates.csv` and `summary.json` into
//! its output directory, plus experiment-specific tables. Outputs depend only
//! on the configuration and the master seed: replicates run in parallel but
//! are collected in index order before anything is written or summarized.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::asymptotics::{theorem2_statistic, LimitCriterion, PsiMoments};
use crate::error::{Error, Result};
use crate::grid::GridSample;
use crate::likelihood::{fit, FitOptions};
use crate::params::{Interval, MaternParams, ParamBox, PhiRange};
use crate::prediction::{blup_coeffs, expected_ise_exact, ise_empirical};
use crate::sampling::{
    deterministic_grid_exact, evaluate_grid, sample_grid_with_spectrum, sample_path_truncated, SeedSpec,
};
use crate::special::integral_vartheta;
use crate::spectrum::eigen_spectrum;
use crate::stats::{covariance, ks_standard_normal, loglog_slope, mean, median, variance};

pub const VERSION: &str = concat!("v", env!("CARGO_PKG_VERSION"));

const ISE_REL_TOL: f64 = 1e-12;
const LIMIT_REL_TOL: f64 = 1e-9;

/// Largest grid size accepted by [`run`].
pub const MAX_N: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Thm1Rates,
    Thm2Normality,
    Thm3IseFixed,
    Thm4IseEstimated,
    Prop2Excursion,
    Prop3BoundedPhi,
    Fig1Criterion,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::Thm1Rates,
        ExperimentKind::Thm2Normality,
        ExperimentKind::Thm3IseFixed,
        ExperimentKind::Thm4IseEstimated,
        ExperimentKind::Prop2Excursion,
        ExperimentKind::Prop3BoundedPhi,
        ExperimentKind::Fig1Criterion,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Thm1Rates => "thm1_rates",
            ExperimentKind::Thm2Normality => "thm2_normality",
            ExperimentKind::Thm3IseFixed => "thm3_ise_fixed",
            ExperimentKind::Thm4IseEstimated => "thm4_ise_estimated",
            ExperimentKind::Prop2Excursion => "prop2_excursion",
            ExperimentKind::Prop3BoundedPhi => "prop3_bounded_phi",
            ExperimentKind::Fig1Criterion => "fig1_criterion",
        }
    }

    /// Experiments on a sample path of the process, as opposed to a fixed
    /// deterministic function.
    pub fn is_stochastic(&self) -> bool {
        matches!(
            self,
            ExperimentKind::Thm1Rates
                | ExperimentKind::Thm2Normality
                | ExperimentKind::Thm3IseFixed
                | ExperimentKind::Thm4IseEstimated
        )
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Self::ALL.iter().map(|k| k.name()).collect();
            Error::Config(format!("unknown experiment '{s}', expected one of {}", names.join(", ")))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Threads {
    #[default]
    Auto,
    Count(usize),
}

impl FromStr for Threads {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(Threads::Auto);
        }
        match s.parse::<usize>() {
            Ok(k) if k >= 1 => Ok(Threads::Count(k)),
            _ => Err(Error::Config(format!("threads must be 'auto' or a positive integer, got '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub theta0: Option<MaternParams>,
    pub nu0f: Option<f64>,
    pub n_list: Vec<usize>,
    pub replicates: usize,
    pub master_seed: u64,
    pub param_box: ParamBox,
    pub output_dir: PathBuf,
    pub threads: Threads,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::Config("replicates must be at least 1".into()));
        }
        if self.experiment != ExperimentKind::Fig1Criterion {
            if self.n_list.is_empty() {
                return Err(Error::Config("n list must not be empty".into()));
            }
            if self.n_list.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Config("n list must be strictly increasing".into()));
            }
            if self.n_list[0] < 3 {
                return Err(Error::Config("grid sizes must be at least 3".into()));
            }
            if *self.n_list.last().expect("non-empty") > MAX_N {
                return Err(Error::Config(format!("grid sizes above {MAX_N} are not supported")));
            }
        }
        if self.experiment.is_stochastic() && self.theta0.is_none() {
            return Err(Error::Config(format!("{} needs the model truth (nu0, phi0, alpha0)", self.experiment)));
        }
        if !self.experiment.is_stochastic() && self.nu0f.is_none() {
            return Err(Error::Config(format!("{} needs the smoothness nu0f", self.experiment)));
        }
        self.param_box.phi_range.validate()
    }

    /// Everything that determines the results; thread count and output
    /// location are left out so that manifests compare equal across runs.
    fn manifest(&self) -> Value {
        json!({
            "version": VERSION,
            "experiment": self.experiment.name(),
            "theta0": self.theta0,
            "nu0f": self.nu0f,
            "n_list": self.n_list,
            "replicates": self.replicates,
            "box": self.param_box,
            "seeds": {
                "master_seed": self.master_seed,
                "replicate_index": [0, self.replicates - 1],
            },
        })
    }
}

/// One row of `replicates.csv`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ReplicateRow {
    pub n: usize,
    pub rep: usize,
    pub nu_hat: Option<f64>,
    pub phi_hat: Option<f64>,
    pub alpha_hat: Option<f64>,
    pub criterion: Option<f64>,
    pub ise: Option<f64>,
    pub stat1: Option<f64>,
    pub stat2: Option<f64>,
}

pub const CSV_HEADER: &str = "n,rep,nu_hat,phi_hat,alpha_hat,criterion,ise,stat1,stat2";

impl ReplicateRow {
    fn csv_line(&self) -> String {
        let f = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.n,
            self.rep,
            f(self.nu_hat),
            f(self.phi_hat),
            f(self.alpha_hat),
            f(self.criterion),
            f(self.ise),
            f(self.stat1),
            f(self.stat2)
        )
    }

    pub fn parse_csv_line(line: &str) -> Result<Self> {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 9 {
            return Err(Error::Config(format!("expected 9 fields, got {}", fields.len())));
        }
        let int = |s: &str| s.parse::<usize>().map_err(|_| Error::Config(format!("bad integer '{s}'")));
        let opt = |s: &str| -> Result<Option<f64>> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse().map(Some).map_err(|_| Error::Config(format!("bad number '{s}'")))
            }
        };
        Ok(Self {
            n: int(fields[0])?,
            rep: int(fields[1])?,
            nu_hat: opt(fields[2])?,
            phi_hat: opt(fields[3])?,
            alpha_hat: opt(fields[4])?,
            criterion: opt(fields[5])?,
            ise: opt(fields[6])?,
            stat1: opt(fields[7])?,
            stat2: opt(fields[8])?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub n: usize,
    pub rep: usize,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub rows: Vec<ReplicateRow>,
    pub failures: Vec<Failure>,
    pub summary: Value,
    pub output_dir: PathBuf,
}

/// The three amplitude ranges compared for a deterministic function.
pub fn phi_modes() -> [PhiRange; 3] {
    [PhiRange::Unbounded, PhiRange::Fixed { value: 1.0 }, PhiRange::Bounded { lo: 0.5, hi: 2.0 }]
}

/// Truncation of sample paths used for ISE experiments.
pub fn ise_truncation(n: usize) -> usize {
    (8 * n).max(1 << 14)
}

type Task = (usize, usize);
type Outcome = std::result::Result<ReplicateRow, String>;

pub fn run(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let dir = &config.output_dir;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let pool = {
        let builder = rayon::ThreadPoolBuilder::new();
        let builder = match config.threads {
            Threads::Auto => builder,
            Threads::Count(k) => builder.num_threads(k),
        };
        builder.build().map_err(|e| Error::Config(format!("thread pool: {e}")))?
    };

    let (rows, failures, summary) = pool.install(|| match config.experiment {
        ExperimentKind::Fig1Criterion => fig1(config),
        ExperimentKind::Prop2Excursion | ExperimentKind::Prop3BoundedPhi => deterministic(config),
        _ => stochastic(config),
    })?;

    let mut summary = summary;
    summary["failures"] = json!(failures.len());
    write_text(&dir.join("manifest.json"), &pretty(&config.manifest())?)?;
    write_rows(&dir.join("replicates.csv"), &rows)?;
    if !failures.is_empty() {
        let mut text = String::from("n,rep,message\n");
        for f in &failures {
            text.push_str(&format!("{},{},\"{}\"\n", f.n, f.rep, f.message.replace('"', "'")));
        }
        write_text(&dir.join("failures.csv"), &text)?;
    }
    write_text(&dir.join("summary.json"), &pretty(&summary)?)?;
    Ok(ExperimentReport { rows, failures, summary, output_dir: dir.clone() })
}

fn pretty(v: &Value) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_rows(path: &Path, rows: &[ReplicateRow]) -> Result<()> {
    let mut out = Vec::new();
    writeln!(out, "{CSV_HEADER}").map_err(|e| Error::io(path, e))?;
    for r in rows {
        writeln!(out, "{}", r.csv_line()).map_err(|e| Error::io(path, e))?;
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

fn split(outcomes: Vec<(Task, Outcome)>) -> (Vec<ReplicateRow>, Vec<Failure>) {
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for ((n, rep), o) in outcomes {
        match o {
            Ok(r) => rows.push(r),
            Err(message) => failures.push(Failure { n, rep, message }),
        }
    }
    (rows, failures)
}

/// Seed of replicate `rep` at grid size number `i`; each n gets its own block
/// of replicate indices so that samples at different n are independent.
fn seed_for(config: &ExperimentConfig, i: usize, rep: usize) -> SeedSpec {
    SeedSpec::new(config.master_seed, (i * config.replicates + rep) as u64)
}

fn rows_at(rows: &[ReplicateRow], n: usize) -> impl Iterator<Item = &ReplicateRow> {
    rows.iter().filter(move |r| r.n == n)
}

fn collect(rows: &[ReplicateRow], n: usize, field: impl Fn(&ReplicateRow) -> Option<f64>) -> Vec<f64> {
    rows_at(rows, n).filter_map(field).collect()
}

fn stochastic(config: &ExperimentConfig) -> Result<(Vec<ReplicateRow>, Vec<Failure>, Value)> {
    let theta0 = config.theta0.expect("validated");
    let kind = config.experiment;
    let opts = FitOptions::default();
    let moments =
        if kind == ExperimentKind::Thm2Normality { Some(PsiMoments::new(theta0.nu, LIMIT_REL_TOL)?) } else { None };

    let mut outcomes = Vec::new();
    let mut per_n = Vec::new();
    for (i, &n) in config.n_list.iter().enumerate() {
        let tasks: Vec<Task> = (0..config.replicates).map(|rep| (n, rep)).collect();
        let batch: Vec<(Task, Outcome)> = match kind {
            ExperimentKind::Thm1Rates | ExperimentKind::Thm2Normality => {
                let spectrum = eigen_spectrum(theta0.nu, theta0.alpha, n, 1e-13)?;
                tasks
                    .par_iter()
                    .map(|&(n, rep)| {
                        let outcome = (|| -> Result<ReplicateRow> {
                            let z = sample_grid_with_spectrum(theta0.phi, &spectrum, seed_for(config, i, rep))?;
                            let r = fit(&z, &config.param_box, &opts)?;
                            let stats =
                                moments.map(|m| theorem2_statistic(r.nu_hat, r.phi_hat, n, theta0.nu, theta0.phi, &m));
                            Ok(ReplicateRow {
                                n,
                                rep,
                                nu_hat: Some(r.nu_hat),
                                phi_hat: Some(r.phi_hat),
                                alpha_hat: Some(r.alpha_hat),
                                criterion: Some(r.criterion),
                                ise: None,
                                stat1: stats.map(|s| s.0),
                                stat2: stats.map(|s| s.1),
                            })
                        })();
                        ((n, rep), outcome.map_err(|e| e.to_string()))
                    })
                    .collect()
            }
            _ => {
                let estimated = kind == ExperimentKind::Thm4IseEstimated;
                tasks
                    .par_iter()
                    .map(|&(n, rep)| {
                        let outcome = (|| -> Result<ReplicateRow> {
                            let path = sample_path_truncated(&theta0, ise_truncation(n), seed_for(config, i, rep))?;
                            let z = evaluate_grid(&path, n)?;
                            let mut row = ReplicateRow { n, rep, ..Default::default() };
                            let (nu, alpha) = if estimated {
                                let r = fit(&z, &config.param_box, &opts)?;
                                row.nu_hat = Some(r.nu_hat);
                                row.phi_hat = Some(r.phi_hat);
                                row.alpha_hat = Some(r.alpha_hat);
                                row.criterion = Some(r.criterion);
                                (r.nu_hat, r.alpha_hat)
                            } else {
                                (theta0.nu, theta0.alpha)
                            };
                            let pred = blup_coeffs(&z, nu, alpha, path.j_max(), ISE_REL_TOL)?;
                            row.ise = Some(ise_empirical(&path, &pred)?.total);
                            Ok(row)
                        })();
                        ((n, rep), outcome.map_err(|e| e.to_string()))
                    })
                    .collect()
            }
        };
        let (rows, _) = split(batch.clone());
        per_n.push(summarize_n(config, &theta0, n, &rows)?);
        outcomes.extend(batch);
    }
    let (rows, failures) = split(outcomes);
    let mut summary = json!({ "experiment": kind.name(), "per_n": per_n });
    add_slopes(config, &theta0, &rows, &mut summary);
    Ok((rows, failures, summary))
}

fn summarize_n(config: &ExperimentConfig, theta0: &MaternParams, n: usize, rows: &[ReplicateRow]) -> Result<Value> {
    let ln_n = (n as f64).ln();
    let mut s = json!({ "n": n, "count": rows.len() });
    match config.experiment {
        ExperimentKind::Thm1Rates | ExperimentKind::Thm2Normality => {
            let nu_err: Vec<f64> = collect(rows, n, |r| r.nu_hat.map(|v| (v - theta0.nu).abs()));
            let phi_err: Vec<f64> = collect(rows, n, |r| r.phi_hat.map(|v| (v - theta0.phi).abs() / ln_n));
            s["median_abs_nu_err"] = json!(median(&nu_err));
            s["median_abs_phi_err_over_ln_n"] = json!(median(&phi_err));
            s["mean_nu_hat"] = json!(mean(&collect(rows, n, |r| r.nu_hat)));
            if config.experiment == ExperimentKind::Thm2Normality {
                let a = collect(rows, n, |r| r.stat1);
                let b = collect(rows, n, |r| r.stat2);
                s["stat1"] = json!({ "mean": mean(&a), "variance": variance(&a), "ks": ks_standard_normal(&a) });
                s["stat2"] = json!({ "mean": mean(&b), "variance": variance(&b), "ks": ks_standard_normal(&b) });
                s["covariance"] = json!([[variance(&a), covariance(&a, &b)], [covariance(&a, &b), variance(&b)]]);
            }
        }
        ExperimentKind::Thm3IseFixed | ExperimentKind::Thm4IseEstimated => {
            let ise = collect(rows, n, |r| r.ise);
            let expected = expected_ise_exact(theta0, theta0.nu, theta0.alpha, n, ISE_REL_TOL)?.value;
            let m = mean(&ise);
            s["mean_ise"] = json!(m);
            s["mc_std_error"] = json!((variance(&ise) / ise.len() as f64).sqrt());
            s["expected_ise_nu0"] = json!(expected);
            s["ratio_to_expected"] = json!(m / expected);
            s["scaled_expected"] = json!(expected * (n as f64).powf(2.0 * theta0.nu));
        }
        _ => {}
    }
    Ok(s)
}

fn add_slopes(config: &ExperimentConfig, theta0: &MaternParams, rows: &[ReplicateRow], summary: &mut Value) {
    if config.n_list.len() < 2 {
        return;
    }
    let ns: Vec<f64> = config.n_list.iter().map(|&n| n as f64).collect();
    match config.experiment {
        ExperimentKind::Thm1Rates | ExperimentKind::Thm2Normality => {
            let med: Vec<f64> = config
                .n_list
                .iter()
                .map(|&n| median(&collect(rows, n, |r| r.nu_hat.map(|v| (v - theta0.nu).abs()))))
                .collect();
            summary["loglog_slope_median_abs_nu_err"] = json!(loglog_slope(&ns, &med));
        }
        ExperimentKind::Thm3IseFixed | ExperimentKind::Thm4IseEstimated => {
            let m: Vec<f64> = config.n_list.iter().map(|&n| mean(&collect(rows, n, |r| r.ise))).collect();
            summary["loglog_slope_mean_ise"] = json!(loglog_slope(&ns, &m));
            if let Ok(c) = integral_vartheta(theta0.nu, theta0.nu, LIMIT_REL_TOL) {
                summary["limit_constant"] = json!(theta0.phi * c);
            }
        }
        _ => {}
    }
}

/// Fits to the grid values of the deterministic function. Replicates only
/// repeat the same computation, so each `(n, mode)` pair is fitted once and
/// the `rep` column holds the index of the amplitude mode.
fn deterministic(config: &ExperimentConfig) -> Result<(Vec<ReplicateRow>, Vec<Failure>, Value)> {
    let nu0f = config.nu0f.expect("validated");
    let modes: Vec<PhiRange> = match config.experiment {
        ExperimentKind::Prop2Excursion => phi_modes().to_vec(),
        _ => vec![config.param_box.phi_range],
    };
    let grids: Vec<GridSample> =
        config.n_list.par_iter().map(|&n| deterministic_grid_exact(nu0f, n)).collect::<Result<_>>()?;
    let tasks: Vec<(usize, usize)> =
        (0..config.n_list.len()).flat_map(|i| (0..modes.len()).map(move |k| (i, k))).collect();
    let outcomes: Vec<(Task, Outcome)> = tasks
        .par_iter()
        .map(|&(i, k)| {
            let n = config.n_list[i];
            let b = ParamBox { phi_range: modes[k], ..config.param_box };
            let outcome = fit(&grids[i], &b, &FitOptions::default())
                .map(|r| ReplicateRow {
                    n,
                    rep: k,
                    nu_hat: Some(r.nu_hat),
                    phi_hat: Some(r.phi_hat),
                    alpha_hat: Some(r.alpha_hat),
                    criterion: Some(r.criterion),
                    ..Default::default()
                })
                .map_err(|e| e.to_string());
            ((n, k), outcome)
        })
        .collect();
    let (rows, failures) = split(outcomes);
    let per_n: Vec<Value> = config
        .n_list
        .iter()
        .map(|&n| {
            let nu: Vec<f64> = collect(&rows, n, |r| r.nu_hat);
            json!({
                "n": n,
                "nu_hat_by_mode": nu,
                "min_nu_hat": nu.iter().cloned().fold(f64::INFINITY, f64::min),
            })
        })
        .collect();
    let modes: Vec<String> = modes.iter().map(|m| m.to_string()).collect();
    let summary = json!({
        "experiment": config.experiment.name(),
        "nu0f": nu0f,
        "phi_modes": modes,
        "fixed_phi_target": nu0f + 0.5,
        "per_n": per_n,
    });
    Ok((rows, failures, summary))
}

fn fig1(config: &ExperimentConfig) -> Result<(Vec<ReplicateRow>, Vec<Failure>, Value)> {
    let nu0f = config.nu0f.expect("validated");
    let hi = config.param_box.nu_range.hi.max(nu0f + 1.0);
    let c = LimitCriterion::deterministic(nu0f, hi, 129, LIMIT_REL_TOL)?;
    let path = config.output_dir.join("criterion.csv");
    let mut out = Vec::new();
    c.write_csv(&mut out).map_err(|e| Error::io(&path, e))?;
    write_text(&path, &String::from_utf8(out).expect("ascii"))?;
    let summary = json!({
        "experiment": config.experiment.name(),
        "nu0f": nu0f,
        "argmin": c.argmin.0,
        "min_value": c.argmin.1,
        "grid_argmin": c.grid_argmin.0,
        "uncertainty": c.uncertainty,
        "fixed_phi_target": nu0f + 0.5,
    });
    Ok((Vec::new(), Vec::new(), summary))
}

/// The default search box: `ν ∈ [0.5, 3]`, α fixed, φ free.
pub fn default_box(alpha: f64) -> Result<ParamBox> {
    ParamBox::new(Interval::new(0.5, 3.0)?, Interval::singleton(alpha)?, PhiRange::Unbounded)
}
