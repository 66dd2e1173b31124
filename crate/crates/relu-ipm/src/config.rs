//! Flat `key = value` run configuration shared by every CLI subcommand.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::balancing::{BalanceConfig, BalanceIpm};
use crate::error::{Error, Result};
use crate::fairness::AuditConfig;
use crate::ipm::EstimatorConfig;
use crate::numerics::RngStream;
use crate::simulation::{KangSchaferConfig, RateStudyConfig};

const KNOWN_KEYS: &[&str] = &[
    "seed",
    "stream",
    "ipm",
    "sigma",
    "k_cap",
    "ensemble",
    "epochs",
    "adv_steps",
    "lr",
    "lr_adv",
    "starts",
    "est_epochs",
    "tau",
    "n",
    "replications",
    "beta",
    "dim",
    "n_grid",
    "reps",
    "delimiter",
    "covariates",
    "treatment",
    "outcome",
    "group",
    "score",
];

/// Parsed and validated run parameters with every default resolved. The
/// per-discrepancy balancing defaults mirror `BalanceConfig::defaults_for`;
/// keys set in the file override them.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub stream: u64,
    pub ipm: BalanceIpm,
    pub k_cap: f64,
    pub ensemble: usize,
    pub epochs: usize,
    pub adv_steps: usize,
    pub lr: f64,
    pub lr_adv: f64,
    /// Multi-start count for direct discrepancy estimation.
    pub starts: usize,
    pub est_epochs: usize,
    pub tau: f64,
    pub n: usize,
    pub replications: usize,
    pub beta: f64,
    /// 0 means "infer from the data file".
    pub dim: usize,
    pub n_grid: Vec<usize>,
    pub reps: usize,
    pub delimiter: u8,
    /// None means "every column not otherwise claimed".
    pub covariates: Option<Vec<String>>,
    pub treatment: String,
    pub outcome: String,
    pub group: String,
    pub score: String,
}

pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<RunConfig> {
    let mut map: BTreeMap<String, String> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::ParseError(format!(
                "line {}: expected `key = value`, got {raw:?}",
                idx + 1
            )));
        };
        let key = key.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(Error::ParseError(format!(
                "line {}: unknown key {key:?}",
                idx + 1
            )));
        }
        if map.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(Error::ParseError(format!(
                "line {}: duplicate key {key:?}",
                idx + 1
            )));
        }
    }
    build(&map)
}

fn parse_as<T: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<T>> {
    match map.get(key) {
        None => Ok(None),
        Some(raw) => raw
            .parse::<T>()
            .map(Some)
            .map_err(|_| Error::ParseError(format!("key {key:?}: cannot parse value {raw:?}"))),
    }
}

fn build(map: &BTreeMap<String, String>) -> Result<RunConfig> {
    let ipm = match map.get("ipm").map(String::as_str) {
        None | Some("relu") => BalanceIpm::Relu,
        Some("sigmoid") => BalanceIpm::Sigmoid,
        Some("holder-nn") => BalanceIpm::HolderNn,
        Some("mmd-rbf") => BalanceIpm::MmdRbf {
            sigma: parse_as::<f64>(map, "sigma")?.unwrap_or(10.0),
        },
        Some("mmd-sobolev") => BalanceIpm::MmdSobolev,
        Some(other) => {
            return Err(Error::ParseError(format!(
                "key \"ipm\": unknown discrepancy {other:?}"
            )))
        }
    };
    let kind_defaults = BalanceConfig::defaults_for(ipm, RngStream::new(0, 0));

    let delimiter = match map.get("delimiter").map(String::as_str) {
        None => b',',
        Some(s) if s.len() == 1 && s.is_ascii() => s.as_bytes()[0],
        Some(s) => {
            return Err(Error::ParseError(format!(
                "key \"delimiter\": need one ascii character, got {s:?}"
            )))
        }
    };
    let n_grid = match map.get("n_grid") {
        None => vec![100, 316, 1000, 3162, 10000],
        Some(raw) => raw
            .split(',')
            .map(|p| {
                p.trim().parse::<usize>().map_err(|_| {
                    Error::ParseError(format!("key \"n_grid\": bad entry {:?}", p.trim()))
                })
            })
            .collect::<Result<Vec<_>>>()?,
    };
    let covariates = map.get("covariates").map(|raw| {
        raw.split(',')
            .map(|p| p.trim().to_string())
            .filter(|p| !p.is_empty())
            .collect::<Vec<_>>()
    });

    let cfg = RunConfig {
        seed: parse_as(map, "seed")?.unwrap_or(0),
        stream: parse_as(map, "stream")?.unwrap_or(0),
        ipm,
        k_cap: parse_as(map, "k_cap")?.unwrap_or(kind_defaults.k_cap),
        ensemble: parse_as(map, "ensemble")?.unwrap_or(kind_defaults.ensemble),
        epochs: parse_as(map, "epochs")?.unwrap_or(kind_defaults.epochs),
        adv_steps: parse_as(map, "adv_steps")?.unwrap_or(kind_defaults.adv_steps),
        lr: parse_as(map, "lr")?.unwrap_or(kind_defaults.descent_lr),
        lr_adv: parse_as(map, "lr_adv")?.unwrap_or(kind_defaults.ascent_lr),
        starts: parse_as(map, "starts")?.unwrap_or(100),
        est_epochs: parse_as(map, "est_epochs")?.unwrap_or(1000),
        tau: parse_as(map, "tau")?.unwrap_or(1.0),
        n: parse_as(map, "n")?.unwrap_or(1000),
        replications: parse_as(map, "replications")?.unwrap_or(100),
        beta: parse_as(map, "beta")?.unwrap_or(1.0),
        dim: parse_as(map, "dim")?.unwrap_or(0),
        n_grid,
        reps: parse_as(map, "reps")?.unwrap_or(50),
        delimiter,
        covariates,
        treatment: map.get("treatment").cloned().unwrap_or_else(|| "t".into()),
        outcome: map.get("outcome").cloned().unwrap_or_else(|| "y".into()),
        group: map.get("group").cloned().unwrap_or_else(|| "s".into()),
        score: map.get("score").cloned().unwrap_or_else(|| "score".into()),
    };
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        let positive = [
            ("k_cap", self.k_cap),
            ("lr", self.lr),
            ("tau", self.tau),
            ("beta", self.beta),
        ];
        for (key, value) in positive {
            if !(value > 0.0) {
                problems.push(format!("{key} = {value} must be > 0"));
            }
        }
        // mmd variants run pure descent; lr_adv is unused there
        let adversarial = !matches!(self.ipm, BalanceIpm::MmdRbf { .. } | BalanceIpm::MmdSobolev);
        if adversarial && !(self.lr_adv > 0.0) {
            problems.push(format!("lr_adv = {} must be > 0", self.lr_adv));
        }
        if adversarial && self.adv_steps == 0 {
            problems.push("adv_steps must be >= 1".into());
        }
        let counts = [
            ("ensemble", self.ensemble),
            ("epochs", self.epochs),
            ("starts", self.starts),
            ("est_epochs", self.est_epochs),
            ("replications", self.replications),
            ("reps", self.reps),
        ];
        for (key, value) in counts {
            if value == 0 {
                problems.push(format!("{key} must be >= 1"));
            }
        }
        if self.n < 2 {
            problems.push(format!("n = {} must be >= 2", self.n));
        }
        if self.n_grid.len() < 3 || self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            problems.push("n_grid must hold >= 3 strictly ascending sizes".into());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::ValidationError(problems))
        }
    }

    pub fn rng(&self) -> RngStream {
        RngStream::new(self.seed, self.stream)
    }

    pub fn balance_config(&self) -> BalanceConfig {
        BalanceConfig {
            ipm: self.ipm,
            k_cap: self.k_cap,
            ensemble: self.ensemble,
            epochs: self.epochs,
            adv_steps: self.adv_steps,
            descent_lr: self.lr,
            ascent_lr: self.lr_adv,
            seed: self.rng(),
        }
    }

    pub fn estimator_config(&self) -> EstimatorConfig {
        EstimatorConfig {
            starts: self.starts,
            epochs: self.est_epochs,
            ..EstimatorConfig::with_seed(self.rng())
        }
    }

    pub fn kang_schafer_config(&self) -> KangSchaferConfig {
        KangSchaferConfig {
            tau: self.tau,
            n: self.n,
            seed: self.rng(),
        }
    }

    pub fn rate_study_config(&self, estimator: EstimatorConfig) -> RateStudyConfig {
        RateStudyConfig {
            dim: if self.dim == 0 { 3 } else { self.dim },
            n_grid: self.n_grid.clone(),
            reps: self.reps,
            estimator,
            seed: self.rng().substream(0xc0),
        }
    }

    pub fn audit_config(&self, dim: usize) -> AuditConfig {
        AuditConfig {
            beta: self.beta,
            dim,
            estimator: self.estimator_config(),
        }
    }

    /// Fully resolved `key = value` text; parsing it reproduces `self`.
    pub fn echo(&self) -> String {
        let mut out = String::new();
        let ipm = match self.ipm {
            BalanceIpm::Relu => "relu",
            BalanceIpm::Sigmoid => "sigmoid",
            BalanceIpm::HolderNn => "holder-nn",
            BalanceIpm::MmdRbf { .. } => "mmd-rbf",
            BalanceIpm::MmdSobolev => "mmd-sobolev",
        };
        let _ = writeln!(out, "seed = {}", self.seed);
        let _ = writeln!(out, "stream = {}", self.stream);
        let _ = writeln!(out, "ipm = {ipm}");
        if let BalanceIpm::MmdRbf { sigma } = self.ipm {
            let _ = writeln!(out, "sigma = {sigma}");
        }
        let _ = writeln!(out, "k_cap = {}", self.k_cap);
        let _ = writeln!(out, "ensemble = {}", self.ensemble);
        let _ = writeln!(out, "epochs = {}", self.epochs);
        let _ = writeln!(out, "adv_steps = {}", self.adv_steps);
        let _ = writeln!(out, "lr = {}", self.lr);
        let _ = writeln!(out, "lr_adv = {}", self.lr_adv);
        let _ = writeln!(out, "starts = {}", self.starts);
        let _ = writeln!(out, "est_epochs = {}", self.est_epochs);
        let _ = writeln!(out, "tau = {}", self.tau);
        let _ = writeln!(out, "n = {}", self.n);
        let _ = writeln!(out, "replications = {}", self.replications);
        let _ = writeln!(out, "beta = {}", self.beta);
        let _ = writeln!(out, "dim = {}", self.dim);
        let grid: Vec<String> = self.n_grid.iter().map(|n| n.to_string()).collect();
        let _ = writeln!(out, "n_grid = {}", grid.join(","));
        let _ = writeln!(out, "reps = {}", self.reps);
        let _ = writeln!(out, "delimiter = {}", self.delimiter as char);
        if let Some(cols) = &self.covariates {
            let _ = writeln!(out, "covariates = {}", cols.join(","));
        }
        let _ = writeln!(out, "treatment = {}", self.treatment);
        let _ = writeln!(out, "outcome = {}", self.outcome);
        let _ = writeln!(out, "group = {}", self.group);
        let _ = writeln!(out, "score = {}", self.score);
        out
    }
}
