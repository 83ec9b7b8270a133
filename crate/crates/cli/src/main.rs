use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{error::ErrorKind, Args, CommandFactory, Parser, Subcommand, ValueEnum};
use matern_circle::asymptotics::LimitCriterion;
use matern_circle::experiments::{run, ExperimentConfig, ExperimentKind, Threads};
use matern_circle::likelihood::{fit, FitOptions};
use matern_circle::prediction::{blup_coeffs, expected_ise_exact, ise_empirical, write_per_band_csv};
use matern_circle::sampling::{
    deterministic_grid_exact, evaluate_grid, sample_grid_exact, sample_path_truncated, SeedSpec,
};
use matern_circle::stats::{mean, variance};
use matern_circle::{Error, GridSample, Interval, MaternParams, ParamBox, PhiRange};
use serde_json::{json, Value};

/// Gaussian-process interpolation on the circle with periodized Matérn
/// covariances.
#[derive(Debug, Parser)]
#[command(name = "matern-circle", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw grid observations of the process, or of the deterministic test
    /// function when --nu0f is given.
    Sample(Common),
    /// Maximum-likelihood fit to observations read from --input or sampled.
    Fit(Common),
    /// Closed-form expected integrated squared error of the predictor.
    IseExact(Common),
    /// Monte-Carlo integrated squared error of the predictor.
    IseMc(Common),
    /// Tabulate a large-sample limit of the normalized profile likelihood.
    LimitCriterion(Common),
    /// Run a named experiment and write its result files.
    Experiment {
        #[arg(value_parser = parse_kind)]
        name: ExperimentKind,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
struct Common {
    /// Grid sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    /// Regularity of the true process.
    #[arg(long)]
    nu0: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    phi0: f64,
    #[arg(long, default_value_t = 1.0)]
    alpha0: f64,
    /// Smoothness of the deterministic test function.
    #[arg(long)]
    nu0f: Option<f64>,
    /// Regularity of the predictor kernel; defaults to --nu0.
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long, default_value_t = 1)]
    replicates: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.5)]
    nu_min: f64,
    #[arg(long, default_value_t = 3.0)]
    nu_max: f64,
    /// Fixed inverse range used for fitting and prediction; defaults to --alpha0.
    #[arg(long)]
    alpha: Option<f64>,
    /// free, fixed:<v> or box:<lo>,<hi>.
    #[arg(long, default_value = "free", value_parser = parse_phi_mode)]
    phi_mode: PhiRange,
    /// Output file, or output directory for `experiment`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads: a positive integer or `auto`.
    #[arg(long, default_value = "auto", value_parser = parse_threads)]
    threads: Threads,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Observations for `fit`, one value per line.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Number of grid nodes for `limit-criterion`.
    #[arg(long, default_value_t = 129)]
    points: usize,
    /// Directory receiving per-band error tables from `ise-exact`.
    #[arg(long)]
    per_band: Option<PathBuf>,
}

fn parse_kind(s: &str) -> Result<ExperimentKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_phi_mode(s: &str) -> Result<PhiRange, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_threads(s: &str) -> Result<Threads, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Failure of a command: bad usage exits with 2, anything else with 1.
enum Failure {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::InvalidBox(_) => Failure::Usage(e.to_string()),
            e => Failure::Runtime(e.into()),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

type CmdResult<T> = Result<T, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

impl Common {
    fn theta0(&self) -> CmdResult<Option<MaternParams>> {
        self.nu0.map(|nu0| MaternParams::new(nu0, self.phi0, self.alpha0).map_err(|e| usage(e.to_string()))).transpose()
    }

    fn require_theta0(&self, what: &str) -> CmdResult<MaternParams> {
        self.theta0()?.ok_or_else(|| usage(format!("{what} requires --nu0")))
    }

    fn require_n(&self) -> CmdResult<&[usize]> {
        if self.n.is_empty() {
            return Err(usage("--n is required"));
        }
        Ok(&self.n)
    }

    fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(self.alpha0)
    }

    fn param_box(&self) -> CmdResult<ParamBox> {
        let nu = Interval::new(self.nu_min, self.nu_max).map_err(|e| usage(e.to_string()))?;
        let alpha = Interval::singleton(self.alpha()).map_err(|e| usage(e.to_string()))?;
        ParamBox::new(nu, alpha, self.phi_mode).map_err(|e| usage(e.to_string()))
    }

    fn install_threads(&self) -> CmdResult<()> {
        if let Threads::Count(k) = self.threads {
            rayon::ThreadPoolBuilder::new().num_threads(k).build_global().map_err(|e| Failure::Runtime(e.into()))?;
        }
        Ok(())
    }

    /// Observations at grid size `n` for replicate `rep`.
    fn observations(&self, n: usize, rep: usize) -> CmdResult<GridSample> {
        if let Some(nu0f) = self.nu0f {
            return Ok(deterministic_grid_exact(nu0f, n)?);
        }
        let theta0 = self.require_theta0("sampling")?;
        Ok(sample_grid_exact(&theta0, n, SeedSpec::new(self.seed, rep as u64))?)
    }

    fn emit(&self, text: &str) -> CmdResult<()> {
        match &self.out {
            Some(path) => {
                fs::write(path, text).map_err(|e| Failure::Runtime(anyhow::anyhow!("writing {}: {e}", path.display())))
            }
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

fn json_text(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

fn sample(c: &Common) -> CmdResult<()> {
    let ns = c.require_n()?.to_vec();
    if c.nu0.is_none() && c.nu0f.is_none() {
        return Err(usage("sample requires --nu0 or --nu0f"));
    }
    let reps = if c.nu0f.is_some() { 1 } else { c.replicates };
    let mut csv = String::from("n,rep,k,value\n");
    let mut records = Vec::new();
    for &n in &ns {
        for rep in 0..reps {
            let z = c.observations(n, rep)?;
            for (k, v) in z.values().iter().enumerate() {
                writeln!(csv, "{n},{rep},{k},{v}").expect("string write");
            }
            records.push(json!({ "n": n, "rep": rep, "values": z.values() }));
        }
    }
    match c.format {
        Format::Csv => c.emit(&csv),
        Format::Json => c.emit(&json_text(&json!(records))),
    }
}

fn read_input(path: &PathBuf) -> CmdResult<GridSample> {
    let text =
        fs::read_to_string(path).map_err(|e| Failure::Runtime(anyhow::anyhow!("reading {}: {e}", path.display())))?;
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let field = line.split(',').next_back().unwrap_or("").trim();
        if field.is_empty() {
            continue;
        }
        match field.parse::<f64>() {
            Ok(v) => values.push(v),
            // a header line is allowed
            Err(_) if i == 0 => {}
            Err(_) => return Err(usage(format!("{}:{}: not a number: '{field}'", path.display(), i + 1))),
        }
    }
    GridSample::new(values).map_err(|e| usage(e.to_string()))
}

fn fit_cmd(c: &Common) -> CmdResult<()> {
    let bounds = c.param_box()?;
    let mut samples = Vec::new();
    if let Some(path) = &c.input {
        samples.push((0usize, read_input(path)?));
    } else {
        let reps = if c.nu0f.is_some() { 1 } else { c.replicates };
        for &n in c.require_n()? {
            for rep in 0..reps {
                samples.push((rep, c.observations(n, rep)?));
            }
        }
    }
    let mut csv = String::from("n,rep,nu_hat,phi_hat,alpha_hat,criterion,n_evals,converged\n");
    let mut records = Vec::new();
    for (rep, z) in &samples {
        let r = fit(z, &bounds, &FitOptions::default())?;
        writeln!(
            csv,
            "{},{rep},{},{},{},{},{},{}",
            z.n(),
            r.nu_hat,
            r.phi_hat,
            r.alpha_hat,
            r.criterion,
            r.n_evals,
            r.converged
        )
        .expect("string write");
        let mut v = serde_json::to_value(&r).map_err(|e| Failure::Runtime(e.into()))?;
        v["n"] = json!(z.n());
        v["rep"] = json!(rep);
        records.push(v);
    }
    match c.format {
        Format::Csv => c.emit(&csv),
        Format::Json => c.emit(&json_text(&json!(records))),
    }
}

fn ise_exact(c: &Common) -> CmdResult<()> {
    let theta0 = c.require_theta0("ise-exact")?;
    let ns = c.require_n()?.to_vec();
    let nu = c.nu.unwrap_or(theta0.nu);
    let mut csv = String::from("n,expected_ise,scaled_expected_ise,truncation_bound\n");
    let mut records = Vec::new();
    for &n in &ns {
        let e = expected_ise_exact(&theta0, nu, c.alpha(), n, 1e-12)?;
        let scaled = e.value * (n as f64).powf(2.0 * theta0.nu);
        writeln!(csv, "{n},{:e},{scaled},{:e}", e.value, e.bound).expect("string write");
        records.push(
            json!({ "n": n, "expected_ise": e.value, "scaled_expected_ise": scaled, "truncation_bound": e.bound }),
        );
        if let Some(dir) = &c.per_band {
            let path = dir.join(format!("per_band_n{n}.csv"));
            let run = || -> std::io::Result<()> {
                fs::create_dir_all(dir)?;
                write_per_band_csv(&e.per_band, fs::File::create(&path)?)
            };
            run().map_err(|err| Failure::Runtime(anyhow::anyhow!("writing {}: {err}", path.display())))?;
        }
    }
    match c.format {
        Format::Csv => c.emit(&csv),
        Format::Json => c.emit(&json_text(&json!(records))),
    }
}

fn ise_mc(c: &Common) -> CmdResult<()> {
    use rayon::prelude::*;

    let theta0 = c.require_theta0("ise-mc")?;
    let ns = c.require_n()?.to_vec();
    let nu = c.nu.unwrap_or(theta0.nu);
    let alpha = c.alpha();
    c.install_threads()?;
    let mut csv = String::from("n,replicates,mean_ise,std_error,expected_ise\n");
    let mut records = Vec::new();
    for (i, &n) in ns.iter().enumerate() {
        let jm = matern_circle::experiments::ise_truncation(n);
        let ise = (0..c.replicates)
            .into_par_iter()
            .map(|rep| -> matern_circle::Result<f64> {
                let seed = SeedSpec::new(c.seed, (i * c.replicates + rep) as u64);
                let f = sample_path_truncated(&theta0, jm, seed)?;
                let pred = blup_coeffs(&evaluate_grid(&f, n)?, nu, alpha, jm, 1e-12)?;
                Ok(ise_empirical(&f, &pred)?.total)
            })
            .collect::<matern_circle::Result<Vec<f64>>>()?;
        let m = mean(&ise);
        let se = if ise.len() > 1 { (variance(&ise) / ise.len() as f64).sqrt() } else { f64::NAN };
        let expected = expected_ise_exact(&theta0, nu, alpha, n, 1e-12)?.value;
        writeln!(csv, "{n},{},{m},{se},{expected}", c.replicates).expect("string write");
        records.push(
            json!({ "n": n, "replicates": c.replicates, "mean_ise": m, "std_error": se, "expected_ise": expected }),
        );
    }
    match c.format {
        Format::Csv => c.emit(&csv),
        Format::Json => c.emit(&json_text(&json!(records))),
    }
}

fn limit_criterion(c: &Common) -> CmdResult<()> {
    let table = match (c.nu0, c.nu0f) {
        (Some(nu0), None) => {
            // U is defined only above ν₀ − 1/2
            let lo = c.nu_min.max(nu0 - 0.5 + 1e-3);
            LimitCriterion::stochastic(nu0, lo, c.nu_max, c.points, 1e-9)?
        }
        (None, Some(nu0f)) => LimitCriterion::deterministic(nu0f, c.nu_max, c.points, 1e-9)?,
        _ => return Err(usage("limit-criterion requires exactly one of --nu0 and --nu0f")),
    };
    match c.format {
        Format::Csv => {
            let mut out = Vec::new();
            table.write_csv(&mut out).expect("in-memory write");
            c.emit(&String::from_utf8(out).expect("ascii"))
        }
        Format::Json => c.emit(&json_text(&serde_json::to_value(&table).map_err(|e| Failure::Runtime(e.into()))?)),
    }
}

fn experiment(kind: ExperimentKind, c: &Common) -> CmdResult<()> {
    let theta0 = c.theta0()?;
    if kind.is_stochastic() && theta0.is_none() {
        return Err(usage(format!("experiment {kind} requires --nu0")));
    }
    if !kind.is_stochastic() && c.nu0f.is_none() {
        return Err(usage(format!("experiment {kind} requires --nu0f")));
    }
    let config = ExperimentConfig {
        experiment: kind,
        theta0,
        nu0f: c.nu0f,
        n_list: c.n.clone(),
        replicates: c.replicates,
        master_seed: c.seed,
        param_box: c.param_box()?,
        output_dir: c.out.clone().unwrap_or_else(|| PathBuf::from("results").join(kind.name())),
        threads: c.threads,
    };
    let report = run(&config)?;
    print!("{}", json_text(&report.summary));
    eprintln!(
        "wrote {} rows ({} failures) to {}",
        report.rows.len(),
        report.failures.len(),
        report.output_dir.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Sample(c) => sample(c),
        Command::Fit(c) => fit_cmd(c),
        Command::IseExact(c) => ise_exact(c),
        Command::IseMc(c) => ise_mc(c),
        Command::LimitCriterion(c) => limit_criterion(c),
        Command::Experiment { name, common } => experiment(*name, common),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => Cli::command().error(ErrorKind::ValueValidation, msg).exit(),
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
