mod config;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bgw::bayes::{ge_estimate, run_mcmc, McmcOptions, PriorConfig};
use bgw::copula::{
    blest_b, dependence_series_control, dependence_sweep, footrule_phi, kendall_tau_formula, kendall_tau_monte_carlo,
    kendall_tau_quadrature, regression_dependence_r, spearman_rho, tail_dependence, write_sweep_csv,
};
use bgw::data::FOOTBALL_SCALE;
use bgw::distribution::{density_grid, write_grid_csv};
use bgw::harness::{real_data_pipeline, run_experiment, write_rows_csv};
use bgw::mle::{fit_ew, fit_mle, ks_test_ew, FitOptions};
use bgw::sampling::sample_n;
use bgw::{BgwError, BgwParams, BivariateSample, EwParams, RngHandle};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "bgw", version, about = "Bivariate generalized Weibull toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw pairs and write CSV with header x,y.
    Sample(SampleArgs),
    /// Maximum-likelihood fit of a CSV sample.
    Fit(FitArgs),
    /// Metropolis-Hastings posterior and general-entropy estimates.
    Bayes(BayesArgs),
    /// Copula dependence measures at one theta, or a CSV sweep.
    Dependence(DependenceArgs),
    /// Bias/MSE Monte Carlo experiment from a config file.
    Simulate(SimulateArgs),
    /// Descriptives, dependence, marginal and model fits for a data set.
    Analyze(AnalyzeArgs),
    /// Kolmogorov-Smirnov fit of the exponentiated Weibull margins.
    Gof(GofArgs),
    /// Joint cdf and pdf on a regular grid, as CSV.
    DensityGrid(GridArgs),
}

#[derive(Args)]
struct SampleArgs {
    /// a,b1,b2,theta
    #[arg(long)]
    params: String,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Write here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    data: PathBuf,
    /// Hold the shape at this value (1 gives BGE, 2 gives BGR).
    #[arg(long)]
    fix_a: Option<f64>,
    #[arg(long, default_value_t = 5)]
    starts: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct BayesArgs {
    #[arg(long)]
    data: PathBuf,
    /// d1,z1,d2,z2,d3,z3,d4,z4
    #[arg(long, default_value = "1.5,1.5,1.5,1.5,1.5,1.5,1.5,1.5")]
    prior: String,
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    c: f64,
    #[arg(long, default_value_t = 10_000)]
    iters: usize,
    #[arg(long, default_value_t = 2_000)]
    burnin: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Trace CSV destination.
    #[arg(long, default_value = "trace.csv")]
    trace: PathBuf,
}

#[derive(Args)]
struct DependenceArgs {
    #[arg(long, required_unless_present = "sweep")]
    theta: Option<f64>,
    /// Write the theta grid sweep as CSV instead.
    #[arg(long)]
    sweep: bool,
    /// Pairs used for the Monte Carlo tau.
    #[arg(long, default_value_t = 200_000)]
    mc_pairs: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct SimulateArgs {
    /// JSON or key=value experiment description.
    #[arg(long)]
    config: PathBuf,
    /// Replications per sample size; overrides the config file.
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// CSV with x,y columns; the bundled football data when omitted.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Factor applied before model fitting.
    #[arg(long, default_value_t = FOOTBALL_SCALE)]
    scale: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GofArgs {
    #[arg(long)]
    data: PathBuf,
    /// Test X against a,b,theta instead of the fitted margin.
    #[arg(long)]
    x_params: Option<String>,
    #[arg(long)]
    y_params: Option<String>,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long)]
    params: String,
    #[arg(long, default_value_t = 3.0)]
    x_max: f64,
    #[arg(long, default_value_t = 3.0)]
    y_max: f64,
    #[arg(long, default_value_t = 50)]
    steps: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Library(#[from] BgwError),
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Library(e.into())
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Library(e) => match e {
                BgwError::InvalidParameter(_) | BgwError::Domain(_) => 1,
                BgwError::Data(_) | BgwError::Io(_) | BgwError::Csv(_) => 2,
                BgwError::NonConvergence { .. } | BgwError::Numerical(_) => 3,
            },
        }
    }
}

type CliResult = Result<(), CliError>;

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn print_json<T: Serialize>(value: &T, path: Option<&Path>) -> CliResult {
    let mut out = output(path)?;
    serde_json::to_writer_pretty(&mut out, value).map_err(io::Error::from)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn ew_params(s: &str) -> Result<EwParams, CliError> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Usage(format!("cannot parse '{s}' as a,b,theta")))?;
    match v.as_slice() {
        [a, b, t] => Ok(EwParams::new(*a, *b, *t)?),
        _ => Err(CliError::Usage(format!("expected three values a,b,theta, got '{s}'"))),
    }
}

fn sample(args: SampleArgs) -> CliResult {
    let p = BgwParams::parse(&args.params)?;
    if args.n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    let data = sample_n(&p, args.n, &mut RngHandle::new(args.seed))?;
    let mut out = output(args.out.as_deref())?;
    data.write_csv(&mut out)?;
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct FitJson {
    a: f64,
    b1: f64,
    b2: f64,
    theta: f64,
    loglik: f64,
    aic: f64,
    bic: f64,
    converged: bool,
    n_iter: usize,
}

fn fit(args: FitArgs) -> CliResult {
    let data = BivariateSample::from_csv_path(&args.data)?;
    if args.starts == 0 {
        return Err(CliError::Usage("--starts must be at least 1".into()));
    }
    let opts = FitOptions { fix_a: args.fix_a, starts: args.starts, seed: args.seed };
    let f = fit_mle(&data, None, &opts)?;
    print_json(
        &FitJson {
            a: f.params.a(),
            b1: f.params.b1(),
            b2: f.params.b2(),
            theta: f.params.theta(),
            loglik: f.log_lik,
            aic: f.aic,
            bic: f.bic,
            converged: f.converged,
            n_iter: f.n_iter,
        },
        None,
    )
}

#[derive(Serialize)]
struct BayesJson {
    a: f64,
    b1: f64,
    b2: f64,
    theta: f64,
    c: f64,
    iterations: usize,
    burn_in: usize,
    acceptance_rates: [f64; 4],
    warning: Option<String>,
    trace: PathBuf,
}

fn bayes(args: BayesArgs) -> CliResult {
    let data = BivariateSample::from_csv_path(&args.data)?;
    let prior = PriorConfig::parse(&args.prior)?;
    let opts = McmcOptions { iterations: args.iters, burn_in: args.burnin, seed: args.seed, ..Default::default() };
    let chain = run_mcmc(&data, &prior, &opts)?;
    let est = ge_estimate(&chain, args.c)?;
    chain.write_csv(BufWriter::new(File::create(&args.trace)?))?;
    if let Some(w) = &chain.warning {
        eprintln!("warning: {w}");
    }
    print_json(
        &BayesJson {
            a: est[0],
            b1: est[1],
            b2: est[2],
            theta: est[3],
            c: args.c,
            iterations: args.iters,
            burn_in: args.burnin,
            acceptance_rates: chain.acceptance_rates,
            warning: chain.warning.clone(),
            trace: args.trace,
        },
        None,
    )
}

#[derive(Serialize)]
struct DependenceJson {
    theta: f64,
    rho: f64,
    tau_formula: f64,
    tau_monte_carlo: f64,
    tau_quadrature: f64,
    phi: f64,
    blest: f64,
    r: f64,
    tail_lower: f64,
    tail_upper: f64,
}

fn dependence(args: DependenceArgs) -> CliResult {
    let ctrl = dependence_series_control();
    if args.sweep {
        let mut out = output(None)?;
        write_sweep_csv(&dependence_sweep(&ctrl)?, &mut out)?;
        out.flush()?;
        return Ok(());
    }
    let theta = args.theta.ok_or_else(|| CliError::Usage("--theta is required".into()))?;
    let (tail_lower, tail_upper) = tail_dependence(theta)?;
    print_json(
        &DependenceJson {
            theta,
            rho: spearman_rho(theta, &ctrl)?,
            tau_formula: kendall_tau_formula(theta)?,
            tau_monte_carlo: kendall_tau_monte_carlo(theta, args.mc_pairs, &mut RngHandle::new(args.seed))?,
            tau_quadrature: kendall_tau_quadrature(theta)?,
            phi: footrule_phi(theta, &ctrl)?,
            blest: blest_b(theta, &ctrl)?,
            r: regression_dependence_r(theta, &ctrl)?,
            tail_lower,
            tail_upper,
        },
        None,
    )
}

fn simulate(args: SimulateArgs) -> CliResult {
    let text = std::fs::read_to_string(&args.config)?;
    let mut cfg = config::parse_config(&text)?;
    if let Some(r) = args.reps {
        cfg.replications = r;
    }
    let rows = run_experiment(&cfg)?;
    for r in &rows {
        if r.failed > 0 {
            eprintln!("n={}: {} of {} fits failed and were excluded", r.n, r.failed, r.failed + r.succeeded);
        }
    }
    let mut out = output(args.out.as_deref())?;
    write_rows_csv(&rows, &mut out)?;
    out.flush()?;
    Ok(())
}

fn analyze(args: AnalyzeArgs) -> CliResult {
    let data = match &args.data {
        Some(p) => BivariateSample::from_csv_path(p)?,
        None => BivariateSample::football(),
    };
    let report = real_data_pipeline(&data, args.scale, args.seed)?;
    print_json(&report, args.out.as_deref())
}

#[derive(Serialize)]
struct MarginGof {
    a: f64,
    b: f64,
    theta: f64,
    fitted: bool,
    ks_distance: f64,
    p_value: f64,
}

fn margin_gof(values: &[f64], given: Option<&str>) -> Result<MarginGof, CliError> {
    let (e, fitted) = match given {
        Some(s) => (ew_params(s)?, false),
        None => (fit_ew(values)?.params, true),
    };
    let ks = ks_test_ew(values, &e)?;
    Ok(MarginGof { a: e.a(), b: e.b(), theta: e.theta(), fitted, ks_distance: ks.distance, p_value: ks.p_value })
}

fn gof(args: GofArgs) -> CliResult {
    #[derive(Serialize)]
    struct Both {
        x: MarginGof,
        y: MarginGof,
    }
    let data = BivariateSample::from_csv_path(&args.data)?;
    print_json(
        &Both {
            x: margin_gof(&data.xs(), args.x_params.as_deref())?,
            y: margin_gof(&data.ys(), args.y_params.as_deref())?,
        },
        None,
    )
}

fn grid(args: GridArgs) -> CliResult {
    let p = BgwParams::parse(&args.params)?;
    let rows = density_grid(&p, args.x_max, args.y_max, args.steps)?;
    let mut out = output(args.out.as_deref())?;
    write_grid_csv(&rows, &mut out)?;
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Sample(a) => sample(a),
        Command::Fit(a) => fit(a),
        Command::Bayes(a) => bayes(a),
        Command::Dependence(a) => dependence(a),
        Command::Simulate(a) => simulate(a),
        Command::Analyze(a) => analyze(a),
        Command::Gof(a) => gof(a),
        Command::DensityGrid(a) => grid(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
