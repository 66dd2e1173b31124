use crate::error::{Error, Result};
use crate::ipm::discriminator::{DiscFamily, DiscParams, HolderFamily, ReluFamily, SigmoidFamily};
use crate::ipm::SampleSet;
use crate::numerics::{Direction, OptimizerKind, OptimizerState, RngStream};

/// Multi-start ascent configuration for the IPM estimators.
#[derive(Debug, Clone)]
pub struct EstimatorConfig {
    /// Number of random starts (the ensemble size K).
    pub starts: usize,
    pub epochs: usize,
    pub ascent: OptimizerKind,
    pub ascent_lr: f64,
    pub seed: RngStream,
}

impl EstimatorConfig {
    pub fn with_seed(seed: RngStream) -> Self {
        EstimatorConfig {
            starts: 100,
            epochs: 1000,
            ascent: OptimizerKind::PlainSgd,
            ascent_lr: 1.0,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.starts == 0 || self.epochs == 0 {
            return Err(Error::Infeasible("starts and epochs must be >= 1".into()));
        }
        if self.ascent_lr <= 0.0 {
            return Err(Error::Infeasible("ascent_lr must be positive".into()));
        }
        Ok(())
    }
}

/// Estimated discrepancy plus the maximizing discriminator and per-start
/// diagnostics. `value` is the max of `start_values`, which hold each
/// start's best |gap|.
#[derive(Debug, Clone)]
pub struct IpmResult {
    pub value: f64,
    pub best_params: DiscParams,
    pub start_values: Vec<f64>,
    pub epochs_run: usize,
}

/// Empirical ReLU-IPM by projected multi-start gradient ascent on the
/// squared-gap objective. Each start ascends independently; after every step
/// theta is normalized to the sphere and mu clipped to [-1, 1]. Each start
/// tracks the best |gap| it visited, and the estimate is the max over starts.
pub fn estimate_relu_ipm(p: &SampleSet, q: &SampleSet, cfg: &EstimatorConfig) -> Result<IpmResult> {
    estimate_ipm::<ReluFamily>(p, q, cfg)
}

/// Same multi-start structure with sigmoid-unit discriminators and
/// unconstrained parameters (no projection).
pub fn estimate_sigmoid_ipm(
    p: &SampleSet,
    q: &SampleSet,
    cfg: &EstimatorConfig,
) -> Result<IpmResult> {
    estimate_ipm::<SigmoidFamily>(p, q, cfg)
}

/// Same multi-start structure with a clipped one-hidden-layer ReLU network
/// discriminator; all weights and biases are clipped to [-sqrt(d), sqrt(d)]
/// after every step.
pub fn estimate_holder_nn_ipm(
    p: &SampleSet,
    q: &SampleSet,
    cfg: &EstimatorConfig,
) -> Result<IpmResult> {
    estimate_ipm::<HolderFamily>(p, q, cfg)
}

fn estimate_ipm<F: DiscFamily>(
    p: &SampleSet,
    q: &SampleSet,
    cfg: &EstimatorConfig,
) -> Result<IpmResult> {
    cfg.validate()?;
    if p.is_empty() || q.is_empty() {
        return Err(Error::EmptySample);
    }
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch(format!(
            "sample dims {} vs {}",
            p.dim(),
            q.dim()
        )));
    }
    let dim = p.dim();
    let plen = F::param_len(dim);

    let mut best_value = f64::NEG_INFINITY;
    let mut best_params: Option<Vec<f64>> = None;
    let mut start_values = Vec::with_capacity(cfg.starts);

    for k in 0..cfg.starts {
        let mut rng = cfg.seed.substream(k as u64);
        let mut params = F::init(&mut rng, dim);
        let mut opt = match cfg.ascent {
            OptimizerKind::PlainSgd => OptimizerState::sgd(cfg.ascent_lr),
            OptimizerKind::AdaptiveMoment => OptimizerState::adam(cfg.ascent_lr, plen),
        };

        let mut start_best = f64::NEG_INFINITY;
        let mut start_best_params = params.clone();
        let mut grad = vec![0.0; plen];
        for _ in 0..cfg.epochs {
            let gap = weighted_gap::<F>(&params, dim, p, q);
            if gap.abs() > start_best {
                start_best = gap.abs();
                start_best_params.copy_from_slice(&params);
            }
            // d/dv of gap^2 = 2 * gap * d(gap)/dv
            grad.iter_mut().for_each(|g| *g = 0.0);
            for (x, w) in p.iter() {
                F::grad(&params, dim, x, 2.0 * gap * w, &mut grad);
            }
            for (y, w) in q.iter() {
                F::grad(&params, dim, y, -2.0 * gap * w, &mut grad);
            }
            opt.step(&mut params, &grad, Direction::Ascent)?;
            F::project(&mut params, dim, &mut rng);
        }
        let final_gap = weighted_gap::<F>(&params, dim, p, q).abs();
        if final_gap > start_best {
            start_best = final_gap;
            start_best_params.copy_from_slice(&params);
        }

        start_values.push(start_best);
        if start_best > best_value {
            best_value = start_best;
            best_params = Some(start_best_params);
        }
    }

    Ok(IpmResult {
        value: best_value,
        best_params: F::to_disc(&best_params.expect("starts >= 1"), dim),
        start_values,
        epochs_run: cfg.epochs,
    })
}

fn weighted_gap<F: DiscFamily>(params: &[f64], dim: usize, p: &SampleSet, q: &SampleSet) -> f64 {
    let mut mp = 0.0;
    for (x, w) in p.iter() {
        mp += w * F::eval(params, dim, x);
    }
    let mut mq = 0.0;
    for (y, w) in q.iter() {
        mq += w * F::eval(params, dim, y);
    }
    mp - mq
}
