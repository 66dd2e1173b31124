//! Group-fairness gaps over classifier scores and the representation audit
//! bound surrogate.

use crate::error::{Error, Result};
use crate::ipm::{estimate_relu_ipm, EstimatorConfig, SampleSet};

/// Scores split by the sensitive attribute.
#[derive(Debug, Clone)]
pub struct GroupedScores {
    scores0: Vec<f64>,
    scores1: Vec<f64>,
}

impl GroupedScores {
    pub fn new(scores0: Vec<f64>, scores1: Vec<f64>) -> Result<Self> {
        if scores0.is_empty() {
            return Err(Error::EmptyGroup("s=0".into()));
        }
        if scores1.is_empty() {
            return Err(Error::EmptyGroup("s=1".into()));
        }
        Ok(GroupedScores { scores0, scores1 })
    }

    pub fn scores0(&self) -> &[f64] {
        &self.scores0
    }

    pub fn scores1(&self) -> &[f64] {
        &self.scores1
    }

    /// Threshold-family measures integrate over [0,1]; scores outside it
    /// have no place under that parametrization.
    fn require_unit_interval(&self) -> Result<()> {
        for &s in self.scores0.iter().chain(&self.scores1) {
            if !(0.0..=1.0).contains(&s) {
                return Err(Error::ScoreOutOfRange(s));
            }
        }
        Ok(())
    }
}

/// The post-processing `phi` applied to scores before comparing group means.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FairFunction {
    /// `I(t >= tau)`; `tau = 0.5` gives the demographic-parity gap.
    Threshold(f64),
    Identity,
    /// `(1 - t)_+`.
    Hinge,
    Sigmoid,
}

impl FairFunction {
    pub fn apply(&self, t: f64) -> f64 {
        match *self {
            FairFunction::Threshold(tau) => {
                if t >= tau {
                    1.0
                } else {
                    0.0
                }
            }
            FairFunction::Identity => t,
            FairFunction::Hinge => (1.0 - t).max(0.0),
            FairFunction::Sigmoid => 1.0 / (1.0 + (-t).exp()),
        }
    }
}

/// `|E(phi(s) | S=0) - E(phi(s) | S=1)|`.
pub fn dp_gap(g: &GroupedScores, phi: FairFunction) -> Result<f64> {
    if let FairFunction::Threshold(tau) = phi {
        if !(0.0..=1.0).contains(&tau) {
            return Err(Error::ValidationError(vec![format!(
                "threshold tau = {tau} must lie in [0, 1]"
            )]));
        }
        g.require_unit_interval()?;
    }
    let mean = |scores: &[f64]| {
        scores.iter().map(|&s| phi.apply(s)).sum::<f64>() / scores.len() as f64
    };
    Ok((mean(&g.scores0) - mean(&g.scores1)).abs())
}

/// `∫₀¹ |P(s₀ ≥ τ) − P(s₁ ≥ τ)| dτ`, the threshold gap averaged over a
/// uniform threshold. Between consecutive distinct attained scores the
/// integrand is constant, so the integral is a finite sum.
pub fn sdp_gap(g: &GroupedScores) -> Result<f64> {
    g.require_unit_interval()?;
    let mut cuts: Vec<f64> = g
        .scores0
        .iter()
        .chain(&g.scores1)
        .cloned()
        .chain([0.0, 1.0])
        .collect();
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup();
    let tail = |scores: &[f64], t: f64| {
        scores.iter().filter(|&&s| s >= t).count() as f64 / scores.len() as f64
    };
    let mut total = 0.0;
    for pair in cuts.windows(2) {
        // for tau in (t_j, t_{j+1}] the survival functions equal their
        // values at t_{j+1}
        let t_next = pair[1];
        total += (t_next - pair[0]) * (tail(&g.scores0, t_next) - tail(&g.scores1, t_next)).abs();
    }
    Ok(total)
}

/// Declared head smoothness plus the estimator that measures the
/// representation discrepancy. `beta` cannot be checked from data; it is the
/// auditor's assumption.
#[derive(Debug, Clone)]
pub struct AuditConfig {
    pub beta: f64,
    pub dim: usize,
    pub estimator: EstimatorConfig,
}

#[derive(Debug, Clone)]
pub struct AuditReport {
    pub ipm_value: f64,
    /// `min(1, 2*beta/(d+3))`.
    pub exponent: f64,
    /// `ipm_value^exponent`; the unknown multiplicative constant is left
    /// symbolic, so consumers must read this as "x c".
    pub bound_surrogate: f64,
}

/// Exponent of the fairness bound for head smoothness `beta` in dimension
/// `d`; the boundary `beta = (d+3)/2` is excluded.
pub fn bound_exponent(beta: f64, dim: usize) -> Result<f64> {
    let boundary = (dim as f64 + 3.0) / 2.0;
    if !(beta > 0.0) {
        return Err(Error::ValidationError(vec![format!(
            "beta = {beta} must be > 0"
        )]));
    }
    if beta == boundary {
        return Err(Error::ValidationError(vec![format!(
            "beta = {beta} sits on the excluded boundary (d+3)/2"
        )]));
    }
    Ok(if beta > boundary {
        1.0
    } else {
        2.0 * beta / (dim as f64 + 3.0)
    })
}

/// Estimates the representation discrepancy between the groups and reports
/// the fairness-bound surrogate `ipm^exponent` (up to the theorem's
/// unspecified constant).
pub fn audit_representation(
    z0: &SampleSet,
    z1: &SampleSet,
    cfg: &AuditConfig,
) -> Result<AuditReport> {
    if z0.dim() != cfg.dim || z1.dim() != cfg.dim {
        return Err(Error::DimensionMismatch(format!(
            "audit dim {} vs samples {} / {}",
            cfg.dim,
            z0.dim(),
            z1.dim()
        )));
    }
    let exponent = bound_exponent(cfg.beta, cfg.dim)?;
    let ipm_value = estimate_relu_ipm(z0, z1, &cfg.estimator)?.value;
    Ok(AuditReport {
        ipm_value,
        exponent,
        bound_surrogate: ipm_value.powf(exponent),
    })
}
