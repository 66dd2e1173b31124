use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use relu_ipm::balancing::{att_balanced, BalanceIpm};
use relu_ipm::config::{parse_config_str, RunConfig};
use relu_ipm::fairness::{audit_representation, dp_gap, sdp_gap, FairFunction};
use relu_ipm::io::{load_causal_csv, load_matrix_csv, load_scores_csv};
use relu_ipm::ipm::{
    estimate_holder_nn_ipm, estimate_relu_ipm, estimate_sigmoid_ipm, exact_relu_ipm_1d,
    grid_relu_ipm, mmd_squared, KernelSpec, NormalizationMap, SampleSet,
};
use relu_ipm::numerics::RngStream;
use relu_ipm::report::{benchmark_report, rate_report, Report, ReportFormat};
use relu_ipm::simulation::{BenchmarkConfig, Method};
use relu_ipm::{Error, Result};

/// ReLU-IPM toolkit: discrepancy estimation, covariate balancing,
/// simulation benchmarks, and fairness audits over CSV files.
#[derive(Parser)]
#[command(name = "relu-ipm", version)]
struct Cli {
    /// Flat `key = value` config file; omitted keys take documented defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads for replication-parallel runs.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[arg(long, global = true, default_value = "csv")]
    format: ReportFormatArg,

    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum ReportFormatArg {
    Csv,
    Json,
}

impl From<ReportFormatArg> for ReportFormat {
    fn from(f: ReportFormatArg) -> ReportFormat {
        match f {
            ReportFormatArg::Csv => ReportFormat::Csv,
            ReportFormatArg::Json => ReportFormat::Json,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the configured discrepancy between two CSV sample files.
    Ipm { sample_p: PathBuf, sample_q: PathBuf },
    /// Weighted ATT on a causal dataset (treatment/outcome/covariate columns).
    Balance { data: PathBuf },
    /// Kang-Schafer misspecification benchmark across estimators.
    SimulateKs {
        /// Full-scale run (1000 replications, every balancing variant).
        #[arg(long)]
        full: bool,
    },
    /// Empirical convergence rate of the estimator under P = Q on a ball.
    Convergence,
    /// Demographic-parity measures of grouped scores in [0,1].
    Fairness { scores: PathBuf },
    /// Representation-level fairness bound from two per-group feature files.
    Audit { features_0: PathBuf, features_1: PathBuf },
    /// Self-check of the estimator against the exact 1-D and grid oracles.
    OracleCheck,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    let cfg = match &cli.config {
        Some(path) => parse_config_str(&std::fs::read_to_string(path)?)?,
        None => parse_config_str("")?,
    };
    let threads = cli
        .threads
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
        .max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::NonConvergence(format!("thread pool: {e}")))?;

    let report = pool.install(|| match &cli.command {
        Command::Ipm { sample_p, sample_q } => cmd_ipm(&cfg, sample_p, sample_q),
        Command::Balance { data } => cmd_balance(&cfg, data),
        Command::SimulateKs { full } => cmd_simulate(&cfg, *full),
        Command::Convergence => cmd_convergence(&cfg),
        Command::Fairness { scores } => cmd_fairness(&cfg, scores),
        Command::Audit { features_0, features_1 } => cmd_audit(&cfg, features_0, features_1),
        Command::OracleCheck => cmd_oracle_check(&cfg),
    })?;

    let rendered = report.render(cli.format.into());
    match &cli.out {
        Some(path) => std::fs::write(path, rendered)?,
        None => print!("{rendered}"),
    }
    Ok(())
}

/// Both samples share one map fitted on the pooled rows, so the discrepancy
/// is computed on a common embedding into the unit ball.
fn normalized_pair(raw_p: Vec<Vec<f64>>, raw_q: Vec<Vec<f64>>) -> Result<(SampleSet, SampleSet)> {
    let pooled: Vec<Vec<f64>> = raw_p.iter().chain(raw_q.iter()).cloned().collect();
    let map = NormalizationMap::fit(&pooled)?;
    Ok((
        SampleSet::uniform(map.apply_all(&raw_p))?,
        SampleSet::uniform(map.apply_all(&raw_q))?,
    ))
}

fn cmd_ipm(cfg: &RunConfig, path_p: &PathBuf, path_q: &PathBuf) -> Result<Report> {
    let (p, q) = normalized_pair(load_matrix_csv(path_p, cfg)?, load_matrix_csv(path_q, cfg)?)?;
    let est = cfg.estimator_config();
    let (name, value) = match cfg.ipm {
        BalanceIpm::Relu => ("relu-ipm", estimate_relu_ipm(&p, &q, &est)?.value),
        BalanceIpm::Sigmoid => ("sigmoid-ipm", estimate_sigmoid_ipm(&p, &q, &est)?.value),
        BalanceIpm::HolderNn => ("holder-nn-ipm", estimate_holder_nn_ipm(&p, &q, &est)?.value),
        BalanceIpm::MmdRbf { sigma } => (
            "mmd-rbf",
            mmd_squared(&p, &q, KernelSpec::Rbf { sigma })?.max(0.0).sqrt(),
        ),
        BalanceIpm::MmdSobolev => (
            "mmd-sobolev",
            mmd_squared(&p, &q, KernelSpec::Sobolev)?.max(0.0).sqrt(),
        ),
    };
    let mut report = Report::new("ipm", p.len() + q.len(), 1, cfg.echo());
    report.push(name, "value", value);
    Ok(report)
}

fn cmd_balance(cfg: &RunConfig, data: &PathBuf) -> Result<Report> {
    let dataset = load_causal_csv(data, cfg)?;
    let est = att_balanced(&dataset, &cfg.balance_config())?;
    let mut report = Report::new("balance", dataset.len(), 1, cfg.echo());
    report.push(&est.method, "att", est.value);
    report.push(&est.method, "final_ipm", est.final_ipm);
    let controls = dataset.control_indices();
    report.arrays.push((
        "weights".into(),
        controls.iter().map(|&i| est.weights.w[i]).collect(),
    ));
    Ok(report)
}

fn cmd_simulate(cfg: &RunConfig, full: bool) -> Result<Report> {
    let mut methods = vec![
        Method::Balanced(cfg.balance_config()),
        Method::SipwGlm,
        Method::EntropyBalancing,
    ];
    if full {
        for ipm in [
            BalanceIpm::Sigmoid,
            BalanceIpm::MmdRbf { sigma: 10.0 },
            BalanceIpm::MmdSobolev,
        ] {
            methods.push(Method::Balanced(
                relu_ipm::balancing::BalanceConfig::defaults_for(ipm, cfg.rng()),
            ));
        }
        methods.push(Method::OracleZero);
    }
    let bench = BenchmarkConfig {
        model: cfg.kang_schafer_config(),
        replications: if full { 1000 } else { cfg.replications },
        methods,
    };
    let result = relu_ipm::simulation::run_benchmark(&bench)?;
    Ok(benchmark_report(&result, cfg.echo(), cfg.n))
}

fn cmd_convergence(cfg: &RunConfig) -> Result<Report> {
    let study = cfg.rate_study_config(cfg.estimator_config());
    let result = relu_ipm::simulation::convergence_study(&study)?;
    Ok(rate_report(&result, cfg.echo(), cfg.reps))
}

fn cmd_fairness(cfg: &RunConfig, scores: &PathBuf) -> Result<Report> {
    let grouped = load_scores_csv(scores, cfg)?;
    let n = grouped.scores0().len() + grouped.scores1().len();
    let mut report = Report::new("fairness", n, 1, cfg.echo());
    report.push("dp", "threshold_0.5", dp_gap(&grouped, FairFunction::Threshold(0.5))?);
    report.push("dp", "identity", dp_gap(&grouped, FairFunction::Identity)?);
    report.push("dp", "hinge", dp_gap(&grouped, FairFunction::Hinge)?);
    report.push("dp", "sigmoid", dp_gap(&grouped, FairFunction::Sigmoid)?);
    report.push("sdp", "value", sdp_gap(&grouped)?);
    Ok(report)
}

fn cmd_audit(cfg: &RunConfig, path0: &PathBuf, path1: &PathBuf) -> Result<Report> {
    let (z0, z1) = normalized_pair(load_matrix_csv(path0, cfg)?, load_matrix_csv(path1, cfg)?)?;
    let audit_cfg = cfg.audit_config(z0.dim());
    let audit = audit_representation(&z0, &z1, &audit_cfg)?;
    let mut report = Report::new("audit", z0.len() + z1.len(), 1, cfg.echo());
    report.push("audit", "ipm", audit.ipm_value);
    report.push("audit", "exponent", audit.exponent);
    report.push("audit", "bound_surrogate", audit.bound_surrogate);
    Ok(report)
}

/// Seeded random pairs against the exact 1-D oracle and a d=2 grid oracle;
/// reports the worst absolute deviation per suite.
fn cmd_oracle_check(cfg: &RunConfig) -> Result<Report> {
    let est = cfg.estimator_config();
    let mut rng = cfg.rng().substream(0x0c);

    let mut max_dev_1d: f64 = 0.0;
    for _ in 0..20 {
        let n = 5 + (rng.next_u64() % 26) as usize;
        let (p, q) = random_pair(&mut rng, 1, n)?;
        let exact = exact_relu_ipm_1d(&p, &q)?.0;
        let approx = estimate_relu_ipm(&p, &q, &est)?.value;
        max_dev_1d = max_dev_1d.max((exact - approx).abs());
    }

    let mut max_dev_2d: f64 = 0.0;
    for _ in 0..5 {
        let (p, q) = random_pair(&mut rng, 2, 30)?;
        let grid = grid_relu_ipm(&p, &q, 1024)?;
        let approx = estimate_relu_ipm(&p, &q, &est)?.value;
        max_dev_2d = max_dev_2d.max((grid - approx).abs());
    }

    let mut report = Report::new("oracle-check", 0, 25, cfg.echo());
    report.push("oracle", "max_dev_1d", max_dev_1d);
    report.push("oracle", "max_dev_2d", max_dev_2d);
    Ok(report)
}

/// Uniform points in [-s, s]^d with s = 1/sqrt(d) so every row lies in the
/// unit ball.
fn random_pair(rng: &mut RngStream, dim: usize, n: usize) -> Result<(SampleSet, SampleSet)> {
    let s = 1.0 / (dim as f64).sqrt();
    let draw = |rng: &mut RngStream| -> Vec<Vec<f64>> {
        (0..n)
            .map(|_| (0..dim).map(|_| rng.uniform_in(-s, s)).collect())
            .collect()
    };
    Ok((SampleSet::uniform(draw(rng))?, SampleSet::uniform(draw(rng))?))
}
