//! Kang–Schafer benchmark generation, replication studies, and the
//! empirical convergence-rate harness.

use rayon::prelude::*;

use crate::balancing::{
    att_balanced, att_entropy_balancing, att_sipw_glm, BalanceConfig, CausalDataset,
};
use crate::error::{Error, Result};
use crate::ipm::{estimate_relu_ipm, EstimatorConfig, SampleSet};
use crate::numerics::RngStream;

/// One Kang–Schafer draw: four observed covariates built from nonlinear
/// transforms of a latent `Z ~ N(0, I_4)`, a linear-in-Z outcome, and a
/// logistic-in-Z treatment. The true ATT is 0 by construction.
#[derive(Debug, Clone)]
pub struct KangSchaferConfig {
    /// Propensity scale: 1 gives moderate overlap, 10 near-deterministic
    /// assignment for many units.
    pub tau: f64,
    pub n: usize,
    pub seed: RngStream,
}

impl KangSchaferConfig {
    fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.n < 2 {
            problems.push(format!("n = {} must be >= 2", self.n));
        }
        if !(self.tau > 0.0) {
            problems.push(format!("tau = {} must be > 0", self.tau));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::ValidationError(problems))
        }
    }
}

fn expit(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Observed covariates from the latent vector.
fn ks_covariates(z: &[f64; 4]) -> [f64; 4] {
    [
        (z[0] / 2.0).exp(),
        z[1] / (1.0 + z[0].exp()) + 10.0,
        (z[0] * z[2] / 25.0 + 0.6).powi(3),
        (z[1] + z[3] + 20.0).powi(2),
    ]
}

/// Treatment probability; the latent score is squashed through the logistic
/// link so `tau` only sharpens assignment.
fn ks_propensity(tau: f64, z: &[f64; 4]) -> f64 {
    expit(tau * (-z[0] + 0.5 * z[1] - 0.25 * z[2] - 0.1 * z[3]))
}

fn ks_outcome(z: &[f64; 4], eps: f64) -> f64 {
    210.0 + 27.4 * z[0] + 13.7 * (z[1] + z[2] + z[3]) + eps
}

/// Draws one dataset. A draw that leaves either treatment group empty is
/// retried on a fresh sub-stream, up to 100 attempts.
pub fn ks_generate(cfg: &KangSchaferConfig) -> Result<CausalDataset> {
    cfg.validate()?;
    const MAX_ATTEMPTS: u32 = 100;
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = cfg.seed.substream(attempt as u64);
        let mut covariates = Vec::with_capacity(cfg.n);
        let mut treatment = Vec::with_capacity(cfg.n);
        let mut outcome = Vec::with_capacity(cfg.n);
        for _ in 0..cfg.n {
            let z = [
                rng.next_normal(),
                rng.next_normal(),
                rng.next_normal(),
                rng.next_normal(),
            ];
            let eps = rng.next_normal();
            let u = rng.next_f64();
            covariates.push(ks_covariates(&z).to_vec());
            treatment.push(u < ks_propensity(cfg.tau, &z));
            outcome.push(ks_outcome(&z, eps));
        }
        if treatment.iter().any(|&t| t) && treatment.iter().any(|&t| !t) {
            return CausalDataset::new(covariates, treatment, outcome);
        }
    }
    Err(Error::DegenerateDraw(MAX_ATTEMPTS))
}

/// An ATT estimator entered into a benchmark run.
#[derive(Debug, Clone)]
pub enum Method {
    /// Covariate balancing under the configured discrepancy; the embedded
    /// seed is re-derived per replication.
    Balanced(BalanceConfig),
    SipwGlm,
    EntropyBalancing,
    /// Always returns 0 (the true ATT); calibration aid for the harness.
    OracleZero,
}

impl Method {
    pub fn name(&self) -> String {
        match self {
            Method::Balanced(cfg) => format!("{:?}-cb", cfg.ipm).to_lowercase(),
            Method::SipwGlm => "sipw-glm".into(),
            Method::EntropyBalancing => "entropy".into(),
            Method::OracleZero => "oracle-zero".into(),
        }
    }

    fn estimate(&self, dataset: &CausalDataset, replication: u64) -> Result<f64> {
        match self {
            Method::Balanced(cfg) => {
                let mut cfg = cfg.clone();
                cfg.seed = cfg.seed.substream(replication);
                att_balanced(dataset, &cfg).map(|e| e.value)
            }
            Method::SipwGlm => att_sipw_glm(dataset).map(|e| e.value),
            Method::EntropyBalancing => att_entropy_balancing(dataset).map(|e| e.value),
            Method::OracleZero => Ok(0.0),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchmarkConfig {
    /// Template; replication `r` redraws on stream id `r`.
    pub model: KangSchaferConfig,
    pub replications: usize,
    pub methods: Vec<Method>,
}

#[derive(Debug, Clone)]
pub struct MethodSummary {
    pub method: String,
    /// Mean estimate minus the true ATT of 0. NaN when every replication failed.
    pub bias: f64,
    /// Root mean squared estimate, so `rmse >= |bias|` always.
    pub rmse: f64,
    pub failures: usize,
}

#[derive(Debug, Clone)]
pub struct BenchmarkReport {
    pub replications: usize,
    pub methods: Vec<MethodSummary>,
}

/// All methods see the same dataset within a replication (paired design);
/// replications run in parallel but aggregate in index order, so the report
/// does not depend on thread count.
pub fn run_benchmark(cfg: &BenchmarkConfig) -> Result<BenchmarkReport> {
    cfg.model.validate()?;
    if cfg.replications == 0 {
        return Err(Error::ValidationError(vec![
            "replications must be >= 1".into()
        ]));
    }
    let per_rep: Vec<Vec<Option<f64>>> = (1..=cfg.replications as u64)
        .into_par_iter()
        .map(|r| {
            let model = KangSchaferConfig {
                seed: RngStream::new(cfg.model.seed.seed(), r),
                ..cfg.model.clone()
            };
            match ks_generate(&model) {
                Ok(ds) => cfg
                    .methods
                    .iter()
                    .map(|m| m.estimate(&ds, r).ok())
                    .collect(),
                // a degenerate draw fails the whole replication
                Err(_) => vec![None; cfg.methods.len()],
            }
        })
        .collect();

    let methods = cfg
        .methods
        .iter()
        .enumerate()
        .map(|(j, m)| {
            let estimates: Vec<f64> = per_rep.iter().filter_map(|row| row[j]).collect();
            let k = estimates.len();
            let (bias, rmse) = if k == 0 {
                (f64::NAN, f64::NAN)
            } else {
                let mean = estimates.iter().sum::<f64>() / k as f64;
                let msq = estimates.iter().map(|e| e * e).sum::<f64>() / k as f64;
                (mean, msq.sqrt())
            };
            MethodSummary {
                method: m.name(),
                bias,
                rmse,
                failures: cfg.replications - k,
            }
        })
        .collect();

    Ok(BenchmarkReport {
        replications: cfg.replications,
        methods,
    })
}

#[derive(Debug, Clone)]
pub struct RateStudyConfig {
    /// Ambient dimension; both samples are uniform on the unit ball `B^dim`,
    /// so the population discrepancy is 0 and the estimate should decay.
    pub dim: usize,
    pub n_grid: Vec<usize>,
    pub reps: usize,
    pub estimator: EstimatorConfig,
    pub seed: RngStream,
}

#[derive(Debug, Clone)]
pub struct RateStudyReport {
    pub n_grid: Vec<usize>,
    pub mean_ipm: Vec<f64>,
    pub slope: f64,
    pub slope_se: f64,
}

fn sample_ball(rng: &mut RngStream, n: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| loop {
            let dir: Vec<f64> = (0..dim).map(|_| rng.next_normal()).collect();
            let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm < 1e-12 {
                continue;
            }
            let radius = rng.next_f64().powf(1.0 / dim as f64);
            return dir.into_iter().map(|x| x * radius / norm).collect();
        })
        .collect()
}

/// Least-squares fit of `log(mean)` on `log(n)`; returns (slope, slope SE).
pub fn fit_log_log(n_grid: &[usize], means: &[f64]) -> Result<(f64, f64)> {
    if n_grid.len() != means.len() || n_grid.len() < 3 {
        return Err(Error::ValidationError(vec![
            "rate fit needs at least 3 matched (n, mean) points".into(),
        ]));
    }
    if means.iter().any(|&m| !(m > 0.0)) {
        return Err(Error::NonConvergence(
            "rate fit requires strictly positive mean discrepancies".into(),
        ));
    }
    let x: Vec<f64> = n_grid.iter().map(|&n| (n as f64).ln()).collect();
    let y: Vec<f64> = means.iter().map(|m| m.ln()).collect();
    let k = x.len() as f64;
    let xbar = x.iter().sum::<f64>() / k;
    let ybar = y.iter().sum::<f64>() / k;
    let sxx: f64 = x.iter().map(|xi| (xi - xbar) * (xi - xbar)).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(xi, yi)| (xi - xbar) * (yi - ybar)).sum();
    if sxx <= 0.0 {
        return Err(Error::ValidationError(vec![
            "rate fit needs at least 2 distinct n values".into(),
        ]));
    }
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let sse: f64 = x
        .iter()
        .zip(&y)
        .map(|(xi, yi)| {
            let r = yi - intercept - slope * xi;
            r * r
        })
        .sum();
    let se = (sse / (k - 2.0) / sxx).sqrt();
    Ok((slope, se))
}

/// Estimates the decay rate of the two-sample discrepancy when `P = Q`:
/// draws fresh paired samples at each grid size, averages the estimated
/// value over `reps`, and fits a log-log regression.
pub fn convergence_study(cfg: &RateStudyConfig) -> Result<RateStudyReport> {
    let mut problems = Vec::new();
    if cfg.dim == 0 {
        problems.push("dim must be >= 1".into());
    }
    if cfg.reps == 0 {
        problems.push("reps must be >= 1".into());
    }
    if cfg.n_grid.len() < 3 || cfg.n_grid.windows(2).any(|w| w[0] >= w[1]) {
        problems.push("n grid must hold >= 3 strictly ascending sizes".into());
    }
    if !problems.is_empty() {
        return Err(Error::ValidationError(problems));
    }

    let cells: Vec<(usize, usize)> = (0..cfg.n_grid.len())
        .flat_map(|g| (0..cfg.reps).map(move |r| (g, r)))
        .collect();
    let values: Vec<f64> = cells
        .par_iter()
        .map(|&(g, r)| {
            let cell = cfg.seed.substream((g * cfg.reps + r) as u64);
            let mut data_rng = cell.substream(0);
            let n = cfg.n_grid[g];
            let p = SampleSet::uniform(sample_ball(&mut data_rng, n, cfg.dim))?;
            let q = SampleSet::uniform(sample_ball(&mut data_rng, n, cfg.dim))?;
            let est = EstimatorConfig {
                seed: cell.substream(1),
                ..cfg.estimator.clone()
            };
            estimate_relu_ipm(&p, &q, &est).map(|r| r.value)
        })
        .collect::<Result<_>>()?;

    let mean_ipm: Vec<f64> = (0..cfg.n_grid.len())
        .map(|g| values[g * cfg.reps..(g + 1) * cfg.reps].iter().sum::<f64>() / cfg.reps as f64)
        .collect();
    let (slope, slope_se) = fit_log_log(&cfg.n_grid, &mean_ipm)?;
    Ok(RateStudyReport {
        n_grid: cfg.n_grid.clone(),
        mean_ipm,
        slope,
        slope_se,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::balancing::{balance_residual_ipm, initial_weights, BalanceIpm};

    #[test]
    fn covariates_at_zero_latent() {
        let x = ks_covariates(&[0.0; 4]);
        assert_eq!(x[0], 1.0);
        assert_eq!(x[1], 10.0);
        assert!((x[2] - 0.216).abs() < 1e-15);
        assert_eq!(x[3], 400.0);
        assert_eq!(ks_propensity(1.0, &[0.0; 4]), 0.5);
        assert_eq!(ks_outcome(&[0.0; 4], 0.25), 210.25);
    }

    #[test]
    fn generate_rejects_bad_config() {
        let cfg = KangSchaferConfig {
            tau: 0.0,
            n: 1,
            seed: RngStream::new(1, 0),
        };
        match ks_generate(&cfg) {
            Err(Error::ValidationError(problems)) => assert_eq!(problems.len(), 2),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn generate_is_deterministic() {
        let cfg = KangSchaferConfig {
            tau: 1.0,
            n: 50,
            seed: RngStream::new(42, 3),
        };
        let a = ks_generate(&cfg).unwrap();
        let b = ks_generate(&cfg).unwrap();
        assert_eq!(a.covariates, b.covariates);
        assert_eq!(a.treatment, b.treatment);
        assert_eq!(a.outcome, b.outcome);
    }

    #[test]
    fn marginal_means_at_scale() {
        let cfg = KangSchaferConfig {
            tau: 1.0,
            n: 100_000,
            seed: RngStream::new(7, 0),
        };
        let ds = ks_generate(&cfg).unwrap();
        let n = ds.len() as f64;
        let x2_mean: f64 = ds.covariates.iter().map(|row| row[1]).sum::<f64>() / n;
        let y_mean: f64 = ds.outcome.iter().sum::<f64>() / n;
        assert!((x2_mean - 10.0).abs() < 0.05, "x2 mean {x2_mean}");
        assert!((y_mean - 210.0).abs() < 0.3, "y mean {y_mean}");
    }

    #[test]
    fn larger_tau_gives_more_extreme_propensities() {
        // independent check on latent draws, not on ks_generate internals
        let mut rng = RngStream::new(11, 0);
        let mut outside = [0usize; 2];
        let n = 100_000;
        for _ in 0..n {
            let z = [
                rng.next_normal(),
                rng.next_normal(),
                rng.next_normal(),
                rng.next_normal(),
            ];
            for (slot, tau) in [(0, 1.0), (1, 10.0)] {
                let p = ks_propensity(tau, &z);
                if !(0.1..=0.9).contains(&p) {
                    outside[slot] += 1;
                }
            }
        }
        assert!(outside[1] > outside[0], "outside counts {outside:?}");
    }

    #[test]
    fn benchmark_oracle_zero_is_exact() {
        let cfg = BenchmarkConfig {
            model: KangSchaferConfig {
                tau: 1.0,
                n: 40,
                seed: RngStream::new(5, 0),
            },
            replications: 4,
            methods: vec![Method::OracleZero],
        };
        let report = run_benchmark(&cfg).unwrap();
        assert_eq!(report.methods[0].bias, 0.0);
        assert_eq!(report.methods[0].rmse, 0.0);
        assert_eq!(report.methods[0].failures, 0);
    }

    #[test]
    fn benchmark_single_replication_collapses() {
        let cfg = BenchmarkConfig {
            model: KangSchaferConfig {
                tau: 1.0,
                n: 200,
                seed: RngStream::new(9, 0),
            },
            replications: 1,
            methods: vec![Method::SipwGlm, Method::EntropyBalancing],
        };
        let report = run_benchmark(&cfg).unwrap();
        for m in &report.methods {
            assert_eq!(m.rmse, m.bias.abs(), "{}", m.method);
        }
    }

    #[test]
    fn benchmark_reruns_identically() {
        let cfg = BenchmarkConfig {
            model: KangSchaferConfig {
                tau: 1.0,
                n: 120,
                seed: RngStream::new(21, 0),
            },
            replications: 6,
            methods: vec![Method::SipwGlm, Method::OracleZero],
        };
        let a = run_benchmark(&cfg).unwrap();
        let b = run_benchmark(&cfg).unwrap();
        for (ma, mb) in a.methods.iter().zip(&b.methods) {
            assert_eq!(ma.bias.to_bits(), mb.bias.to_bits());
            assert_eq!(ma.rmse.to_bits(), mb.rmse.to_bits());
        }
    }

    #[test]
    fn rmse_dominates_bias() {
        let cfg = BenchmarkConfig {
            model: KangSchaferConfig {
                tau: 1.0,
                n: 200,
                seed: RngStream::new(31, 0),
            },
            replications: 5,
            methods: vec![Method::SipwGlm, Method::EntropyBalancing],
        };
        let report = run_benchmark(&cfg).unwrap();
        for m in &report.methods {
            assert!(m.rmse >= m.bias.abs() - 1e-12, "{}", m.method);
        }
    }

    #[test]
    fn balancing_improves_on_uniform_weights() {
        let ds = ks_generate(&KangSchaferConfig {
            tau: 1.0,
            n: 1000,
            seed: RngStream::new(17, 1),
        })
        .unwrap();
        let mut cfg = BalanceConfig::defaults_for(BalanceIpm::Relu, RngStream::new(17, 2));
        cfg.ensemble = 20;
        cfg.epochs = 100;
        let uniform = initial_weights(&ds, cfg.k_cap).unwrap();
        let before = balance_residual_ipm(&ds, &uniform, &cfg).unwrap();
        let est = att_balanced(&ds, &cfg).unwrap();
        assert!(
            est.final_ipm <= before + 1e-6,
            "before {before} after {}",
            est.final_ipm
        );
    }

    #[test]
    fn power_law_fit_recovers_exponent() {
        let ns = [100, 400, 1600, 6400];
        let means: Vec<f64> = ns.iter().map(|&n| 3.2 / (n as f64).sqrt()).collect();
        let (slope, se) = fit_log_log(&ns, &means).unwrap();
        assert!((slope + 0.5).abs() < 1e-9, "slope {slope}");
        assert!(se < 1e-9, "se {se}");
    }

    #[test]
    fn fit_rejects_short_or_flat_input() {
        assert!(fit_log_log(&[10, 20], &[1.0, 0.5]).is_err());
        assert!(fit_log_log(&[10, 20, 30], &[1.0, 0.0, 0.5]).is_err());
    }

    #[test]
    fn convergence_study_runs_and_decays() {
        let cfg = RateStudyConfig {
            dim: 2,
            n_grid: vec![50, 100, 200],
            reps: 4,
            estimator: EstimatorConfig {
                starts: 8,
                epochs: 120,
                ..EstimatorConfig::with_seed(RngStream::new(0, 0))
            },
            seed: RngStream::new(23, 0),
        };
        let report = convergence_study(&cfg).unwrap();
        assert!(report.mean_ipm.iter().all(|&m| m >= 0.0));
        assert!(report.slope < 0.0, "slope {}", report.slope);
        assert!(report.slope_se.is_finite());
    }

    #[test]
    fn convergence_study_validates_grid() {
        let cfg = RateStudyConfig {
            dim: 2,
            n_grid: vec![100, 50, 200],
            reps: 2,
            estimator: EstimatorConfig::with_seed(RngStream::new(0, 0)),
            seed: RngStream::new(1, 0),
        };
        assert!(matches!(
            convergence_study(&cfg),
            Err(Error::ValidationError(_))
        ));
    }
}
