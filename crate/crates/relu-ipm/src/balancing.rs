//! Covariate-balancing weight solvers over the capped weight set and ATT
//! estimators, including GLM/SIPW and entropy-balancing baselines.

use crate::error::{Error, Result};
use crate::ipm::{
    kernel_eval, DiscFamily, HolderFamily, KernelSpec, NormalizationMap, ReluFamily, SampleSet,
    SigmoidFamily,
};
use crate::numerics::{
    project_capped_simplex, solve_linear_system, Direction, OptimizerState, RngStream,
};

/// Observational rows `(X_i, T_i, Y_i)` for ATT estimation.
#[derive(Debug, Clone)]
pub struct CausalDataset {
    pub covariates: Vec<Vec<f64>>,
    pub treatment: Vec<bool>,
    pub outcome: Vec<f64>,
}

impl CausalDataset {
    pub fn new(covariates: Vec<Vec<f64>>, treatment: Vec<bool>, outcome: Vec<f64>) -> Result<Self> {
        let n = covariates.len();
        if treatment.len() != n || outcome.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} covariate rows, {} treatments, {} outcomes",
                n,
                treatment.len(),
                outcome.len()
            )));
        }
        let ds = CausalDataset { covariates, treatment, outcome };
        if ds.treated_indices().is_empty() {
            return Err(Error::EmptyGroup("treated".into()));
        }
        if ds.control_indices().is_empty() {
            return Err(Error::EmptyGroup("control".into()));
        }
        Ok(ds)
    }

    pub fn len(&self) -> usize {
        self.treatment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.treatment.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.covariates.first().map_or(0, |r| r.len())
    }

    pub fn control_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| !self.treatment[i]).collect()
    }

    pub fn treated_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.treatment[i]).collect()
    }
}

/// Balancing weights: zero on treated units, nonnegative on controls,
/// summing to one, each bounded by `cap`.
#[derive(Debug, Clone)]
pub struct WeightVector {
    pub w: Vec<f64>,
    pub cap: f64,
}

impl WeightVector {
    pub fn validate(&self, dataset: &CausalDataset) -> Result<()> {
        if self.w.len() != dataset.len() {
            return Err(Error::DimensionMismatch("weight length".into()));
        }
        let mut control_sum = 0.0;
        for i in 0..self.w.len() {
            let wi = self.w[i];
            if dataset.treatment[i] {
                if wi != 0.0 {
                    return Err(Error::Infeasible("nonzero weight on a treated unit".into()));
                }
            } else {
                if wi < 0.0 || wi > self.cap + 1e-12 {
                    return Err(Error::Infeasible(format!("weight {wi} outside [0, cap]")));
                }
                control_sum += wi;
            }
        }
        if (control_sum - 1.0).abs() > 1e-9 {
            return Err(Error::Infeasible(format!("control weights sum to {control_sum}")));
        }
        Ok(())
    }
}

/// Which discrepancy drives the balancing descent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BalanceIpm {
    Relu,
    Sigmoid,
    HolderNn,
    MmdRbf { sigma: f64 },
    MmdSobolev,
}

/// Solver configuration; defaults per IPM follow the estimator's reference
/// hyperparameters.
#[derive(Debug, Clone)]
pub struct BalanceConfig {
    pub ipm: BalanceIpm,
    /// The K of the weight cap `K / n_0`.
    pub k_cap: f64,
    /// Discriminator ensemble size.
    pub ensemble: usize,
    /// Outer descent rounds.
    pub epochs: usize,
    /// Ascent steps per descent round.
    pub adv_steps: usize,
    pub descent_lr: f64,
    pub ascent_lr: f64,
    pub seed: RngStream,
}

impl BalanceConfig {
    pub fn defaults_for(ipm: BalanceIpm, seed: RngStream) -> Self {
        let (adv_steps, descent_lr, ascent_lr) = match ipm {
            BalanceIpm::Relu => (1, 0.05, 1.0),
            BalanceIpm::Sigmoid => (3, 0.1, 1.0),
            BalanceIpm::HolderNn => (1, 0.01, 0.01),
            BalanceIpm::MmdRbf { .. } | BalanceIpm::MmdSobolev => (0, 0.03, 0.0),
        };
        BalanceConfig {
            ipm,
            k_cap: 100.0,
            ensemble: 100,
            epochs: 1000,
            adv_steps,
            descent_lr,
            ascent_lr,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.k_cap < 1.0 {
            // with cap K/n0 the control simplex needs n0 * cap = K >= 1
            return Err(Error::Infeasible(format!("k_cap {} < 1", self.k_cap)));
        }
        if self.epochs == 0 {
            problems.push("epochs must be >= 1".to_string());
        }
        if self.ensemble == 0 {
            problems.push("ensemble must be >= 1".to_string());
        }
        if self.descent_lr <= 0.0 {
            problems.push("descent_lr must be positive".to_string());
        }
        if !problems.is_empty() {
            return Err(Error::ValidationError(problems));
        }
        Ok(())
    }
}

/// Weighted ATT estimate together with the weights that produced it.
#[derive(Debug, Clone)]
pub struct AttEstimate {
    pub value: f64,
    pub weights: WeightVector,
    pub final_ipm: f64,
    pub method: String,
}

/// Uniform `1/n_0` on controls, zero on treated.
pub fn initial_weights(dataset: &CausalDataset, k_cap: f64) -> Result<WeightVector> {
    let controls = dataset.control_indices();
    if controls.is_empty() {
        return Err(Error::EmptyGroup("control".into()));
    }
    let n0 = controls.len() as f64;
    let mut w = vec![0.0; dataset.len()];
    for &i in &controls {
        w[i] = 1.0 / n0;
    }
    Ok(WeightVector { w, cap: k_cap / n0 })
}

/// Treated mean outcome minus the weighted control outcome sum.
pub fn att_weighted(weights: &WeightVector, dataset: &CausalDataset) -> f64 {
    let treated = dataset.treated_indices();
    let n1 = treated.len() as f64;
    let treated_mean: f64 = treated.iter().map(|&i| dataset.outcome[i]).sum::<f64>() / n1;
    let control_term: f64 = dataset
        .control_indices()
        .iter()
        .map(|&i| weights.w[i] * dataset.outcome[i])
        .sum();
    treated_mean - control_term
}

/// Normalized covariates for the control (weighted) and treated (uniform)
/// groups, sharing one map fitted on the pooled raw covariates.
fn normalized_groups(dataset: &CausalDataset) -> Result<(NormalizationMap, Vec<Vec<f64>>, SampleSet)> {
    let map = NormalizationMap::fit(&dataset.covariates)?;
    let control_rows: Vec<Vec<f64>> = dataset
        .control_indices()
        .iter()
        .map(|&i| map.apply(&dataset.covariates[i]))
        .collect();
    let treated_rows: Vec<Vec<f64>> = dataset
        .treated_indices()
        .iter()
        .map(|&i| map.apply(&dataset.covariates[i]))
        .collect();
    let treated = SampleSet::uniform(treated_rows)?;
    Ok((map, control_rows, treated))
}

/// Minimize the chosen discrepancy between the weighted control measure and
/// the uniform treated measure over the capped control simplex.
///
/// Adversarial IPMs alternate `adv_steps` SGD ascent steps on a persistent
/// discriminator ensemble with one adaptive-moment descent step on the
/// control weights, followed by projection onto the capped simplex. MMD
/// variants descend on the closed-form squared MMD with no ascent loop.
pub fn solve_balance(dataset: &CausalDataset, cfg: &BalanceConfig) -> Result<WeightVector> {
    cfg.validate()?;
    let controls = dataset.control_indices();
    let n0 = controls.len();
    if n0 == 0 {
        return Err(Error::EmptyGroup("control".into()));
    }
    if dataset.treated_indices().is_empty() {
        return Err(Error::EmptyGroup("treated".into()));
    }
    let cap = cfg.k_cap / n0 as f64;

    let (_, control_rows, treated) = normalized_groups(dataset)?;

    let mut wc = vec![1.0 / n0 as f64; n0]; // weights on control rows
    let mut opt = OptimizerState::adam(cfg.descent_lr, n0);

    match cfg.ipm {
        BalanceIpm::MmdRbf { .. } | BalanceIpm::MmdSobolev => {
            let spec = match cfg.ipm {
                BalanceIpm::MmdRbf { sigma } => KernelSpec::Rbf { sigma },
                _ => KernelSpec::Sobolev,
            };
            descend_mmd(&control_rows, &treated, spec, cap, cfg, &mut wc, &mut opt)?;
        }
        BalanceIpm::Relu => {
            descend_adversarial::<ReluFamily>(&control_rows, &treated, cap, cfg, &mut wc, &mut opt)?
        }
        BalanceIpm::Sigmoid => {
            descend_adversarial::<SigmoidFamily>(&control_rows, &treated, cap, cfg, &mut wc, &mut opt)?
        }
        BalanceIpm::HolderNn => {
            descend_adversarial::<HolderFamily>(&control_rows, &treated, cap, cfg, &mut wc, &mut opt)?
        }
    }

    let mut w = vec![0.0; dataset.len()];
    for (slot, &i) in controls.iter().enumerate() {
        w[i] = wc[slot];
    }
    Ok(WeightVector { w, cap })
}

fn descend_adversarial<F: DiscFamily>(
    control_rows: &[Vec<f64>],
    treated: &SampleSet,
    cap: f64,
    cfg: &BalanceConfig,
    wc: &mut Vec<f64>,
    opt: &mut OptimizerState,
) -> Result<()> {
    let dim = treated.dim();
    let n0 = control_rows.len();
    let plen = F::param_len(dim);

    // persistent ensemble, warm-started across rounds
    let mut ensemble: Vec<Vec<f64>> = Vec::with_capacity(cfg.ensemble);
    let mut streams: Vec<RngStream> = Vec::with_capacity(cfg.ensemble);
    for k in 0..cfg.ensemble {
        let mut rng = cfg.seed.substream(k as u64);
        ensemble.push(F::init(&mut rng, dim));
        streams.push(rng);
    }

    // treated means are fixed; control evaluations change with the ensemble
    let mut fvals = vec![0.0; n0]; // f_k over control rows, reused per k
    let mut grad_params = vec![0.0; plen];
    let mut grad_w = vec![0.0; n0];

    // the descent-ascent game limit-cycles at step-size amplitude; the
    // tail-averaged iterate (a convex combination of feasible points, hence
    // feasible) is the saddle-point extractor
    let tail_start = cfg.epochs / 2;
    let mut tail_sum = vec![0.0; n0];
    let mut tail_count = 0usize;

    for epoch in 0..cfg.epochs {
        // ascent on each discriminator's squared gap
        for _ in 0..cfg.adv_steps {
            for k in 0..cfg.ensemble {
                let params = &mut ensemble[k];
                let gap = ensemble_gap::<F>(params, dim, control_rows, wc, treated);
                grad_params.iter_mut().for_each(|g| *g = 0.0);
                for (x, wt) in treated.iter() {
                    F::grad(params, dim, x, 2.0 * gap * wt, &mut grad_params);
                }
                for (row, &wi) in control_rows.iter().zip(wc.iter()) {
                    F::grad(params, dim, row, -2.0 * gap * wi, &mut grad_params);
                }
                for (p, g) in params.iter_mut().zip(&grad_params) {
                    *p += cfg.ascent_lr * g;
                }
                F::project(params, dim, &mut streams[k]);
            }
        }

        // one descent step on w against the strongest discriminator: the
        // objective is the ensemble max of the squared gaps, so its
        // w-gradient is taken at the argmax only
        let mut best_gap = 0.0;
        let mut best_k = 0;
        for (k, params) in ensemble.iter().enumerate() {
            let gap = ensemble_gap::<F>(params, dim, control_rows, wc, treated);
            if gap * gap > best_gap * best_gap {
                best_gap = gap;
                best_k = k;
            }
        }
        let best = &ensemble[best_k];
        for (slot, row) in control_rows.iter().enumerate() {
            fvals[slot] = F::eval(best, dim, row);
        }
        for slot in 0..n0 {
            grad_w[slot] = -2.0 * best_gap * fvals[slot];
        }
        opt.step(wc, &grad_w, Direction::Descent)?;
        *wc = project_capped_simplex(wc, cap)?;
        if epoch >= tail_start {
            for (acc, &wi) in tail_sum.iter_mut().zip(wc.iter()) {
                *acc += wi;
            }
            tail_count += 1;
        }
    }
    if tail_count > 0 {
        for (wi, &acc) in wc.iter_mut().zip(&tail_sum) {
            *wi = acc / tail_count as f64;
        }
    }
    Ok(())
}

fn ensemble_gap<F: DiscFamily>(
    params: &[f64],
    dim: usize,
    control_rows: &[Vec<f64>],
    wc: &[f64],
    treated: &SampleSet,
) -> f64 {
    let mut treated_mean = 0.0;
    for (x, wt) in treated.iter() {
        treated_mean += wt * F::eval(params, dim, x);
    }
    let mut control_mean = 0.0;
    for (row, &wi) in control_rows.iter().zip(wc) {
        control_mean += wi * F::eval(params, dim, row);
    }
    treated_mean - control_mean
}

fn descend_mmd(
    control_rows: &[Vec<f64>],
    treated: &SampleSet,
    spec: KernelSpec,
    cap: f64,
    cfg: &BalanceConfig,
    wc: &mut Vec<f64>,
    opt: &mut OptimizerState,
) -> Result<()> {
    let n0 = control_rows.len();
    let n1 = treated.len();
    // mmd^2(w) = w' K00 w - 2 w' K01 q + const; grad = 2 K00 w - 2 K01 q
    let mut k00 = vec![0.0; n0 * n0];
    for i in 0..n0 {
        for j in 0..n0 {
            k00[i * n0 + j] = kernel_eval(spec, &control_rows[i], &control_rows[j])?;
        }
    }
    let mut k01q = vec![0.0; n0];
    for i in 0..n0 {
        let mut acc = 0.0;
        for (y, wt) in treated.iter() {
            acc += wt * kernel_eval(spec, &control_rows[i], y)?;
        }
        k01q[i] = acc;
    }
    let _ = n1;

    let mut grad = vec![0.0; n0];
    for _ in 0..cfg.epochs {
        for i in 0..n0 {
            let mut acc = 0.0;
            for j in 0..n0 {
                acc += k00[i * n0 + j] * wc[j];
            }
            grad[i] = 2.0 * acc - 2.0 * k01q[i];
        }
        opt.step(wc, &grad, Direction::Descent)?;
        *wc = project_capped_simplex(wc, cap)?;
    }
    Ok(())
}

/// Max |gap| over a fresh discriminator ensemble at the given weights; the
/// reported residual discrepancy for an `AttEstimate`.
pub fn balance_residual_ipm(dataset: &CausalDataset, weights: &WeightVector, cfg: &BalanceConfig) -> Result<f64> {
    let (_, control_rows, treated) = normalized_groups(dataset)?;
    let controls = dataset.control_indices();
    let wc: Vec<f64> = controls.iter().map(|&i| weights.w[i]).collect();
    let weighted_controls = SampleSet::weighted(control_rows, wc)?;
    let est_cfg = crate::ipm::EstimatorConfig {
        starts: cfg.ensemble,
        epochs: 200,
        ..crate::ipm::EstimatorConfig::with_seed(cfg.seed.substream(0x5eed))
    };
    Ok(crate::ipm::estimate_relu_ipm(&weighted_controls, &treated, &est_cfg)?.value)
}

/// ReLU-CB (or sibling IPM) ATT estimate: solve for weights, then weight the
/// outcomes.
pub fn att_balanced(dataset: &CausalDataset, cfg: &BalanceConfig) -> Result<AttEstimate> {
    let weights = solve_balance(dataset, cfg)?;
    let value = att_weighted(&weights, dataset);
    let final_ipm = balance_residual_ipm(dataset, &weights, cfg)?;
    let method = match cfg.ipm {
        BalanceIpm::Relu => "relu-cb",
        BalanceIpm::Sigmoid => "sipm-cb",
        BalanceIpm::HolderNn => "holder-cb",
        BalanceIpm::MmdRbf { .. } => "mmd-rbf-cb",
        BalanceIpm::MmdSobolev => "mmd-sobolev-cb",
    };
    Ok(AttEstimate { value, weights, final_ipm, method: method.to_string() })
}

/// Logistic regression MLE by iteratively reweighted least squares. The
/// design gets an explicit leading intercept column.
pub fn fit_logistic(x: &[Vec<f64>], t: &[bool], max_iter: usize, tol: f64) -> Result<Vec<f64>> {
    let n = x.len();
    if n == 0 || t.len() != n {
        return Err(Error::DimensionMismatch("logistic design".into()));
    }
    if t.iter().all(|&ti| ti) || t.iter().all(|&ti| !ti) {
        return Err(Error::Separation("all treatment labels identical".into()));
    }
    let d = x[0].len() + 1;
    let design: Vec<Vec<f64>> = x
        .iter()
        .map(|row| {
            let mut r = Vec::with_capacity(d);
            r.push(1.0);
            r.extend_from_slice(row);
            r
        })
        .collect();

    let mut beta = vec![0.0; d];
    for _ in 0..max_iter {
        // gradient of the log-likelihood and expected Hessian
        let mut grad = vec![0.0; d];
        let mut hess = vec![vec![0.0; d]; d];
        for i in 0..n {
            let eta: f64 = design[i].iter().zip(&beta).map(|(a, b)| a * b).sum();
            let p = 1.0 / (1.0 + (-eta).exp());
            let resid = (t[i] as u8 as f64) - p;
            let wgt = (p * (1.0 - p)).max(1e-12);
            for a in 0..d {
                grad[a] += design[i][a] * resid;
                for b in 0..d {
                    hess[a][b] += wgt * design[i][a] * design[i][b];
                }
            }
        }
        let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if gnorm < tol {
            return Ok(beta);
        }
        let step = solve_linear_system(hess, grad)?;
        for a in 0..d {
            beta[a] += step[a];
        }
        if beta.iter().any(|b| !b.is_finite()) {
            return Err(Error::Separation("diverging coefficients".into()));
        }
    }
    // accept a slightly loose solution, reject a clearly unconverged one
    let mut grad = vec![0.0; d];
    for i in 0..n {
        let eta: f64 = design[i].iter().zip(&beta).map(|(a, b)| a * b).sum();
        let p = 1.0 / (1.0 + (-eta).exp());
        for a in 0..d {
            grad[a] += design[i][a] * ((t[i] as u8 as f64) - p);
        }
    }
    let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
    if gnorm > 1e-4 {
        return Err(Error::NonConvergence(format!(
            "logistic IRLS gradient norm {gnorm} after {max_iter} iterations"
        )));
    }
    Ok(beta)
}

/// Stabilized IPW with a linear-logistic propensity: control weights
/// proportional to the odds `pi / (1 - pi)`, normalized to sum one.
pub fn att_sipw_glm(dataset: &CausalDataset) -> Result<AttEstimate> {
    let beta = fit_logistic(&dataset.covariates, &dataset.treatment, 100, 1e-8)?;
    let controls = dataset.control_indices();
    let n0 = controls.len();
    let mut odds = Vec::with_capacity(n0);
    for &i in &controls {
        let mut eta = beta[0];
        for (j, xij) in dataset.covariates[i].iter().enumerate() {
            eta += beta[j + 1] * xij;
        }
        let p = 1.0 / (1.0 + (-eta).exp());
        odds.push(p / (1.0 - p).max(1e-300));
    }
    let total: f64 = odds.iter().sum();
    let mut w = vec![0.0; dataset.len()];
    for (slot, &i) in controls.iter().enumerate() {
        w[i] = odds[slot] / total;
    }
    let weights = WeightVector { w, cap: 1.0 };
    let value = att_weighted(&weights, dataset);
    Ok(AttEstimate {
        value,
        weights,
        final_ipm: f64::NAN,
        method: "sipw-glm".to_string(),
    })
}

/// Entropy balancing: minimize `sum w log w` over controls subject to exact
/// first-moment matching of the treated covariates, solved in the dual by
/// Newton iteration with backtracking halving.
pub fn entropy_balancing(dataset: &CausalDataset) -> Result<WeightVector> {
    let controls = dataset.control_indices();
    let treated = dataset.treated_indices();
    let n0 = controls.len();
    if n0 == 0 {
        return Err(Error::EmptyGroup("control".into()));
    }
    let d = dataset.dim();

    let mut w_full = vec![0.0; dataset.len()];
    if n0 == 1 {
        // the simplex is a point; moments are whatever they are
        w_full[controls[0]] = 1.0;
        return Ok(WeightVector { w: w_full, cap: 1.0 });
    }

    let mut target = vec![0.0; d];
    for &i in &treated {
        for j in 0..d {
            target[j] += dataset.covariates[i][j] / treated.len() as f64;
        }
    }
    let xs: Vec<&Vec<f64>> = controls.iter().map(|&i| &dataset.covariates[i]).collect();

    let weights_for = |lambda: &[f64]| -> Vec<f64> {
        // exp normalized with a max-shift
        let logits: Vec<f64> = xs
            .iter()
            .map(|x| x.iter().zip(lambda).map(|(a, b)| a * b).sum::<f64>())
            .collect();
        let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = logits.iter().map(|l| (l - m).exp()).collect();
        let s: f64 = exps.iter().sum();
        exps.iter().map(|e| e / s).collect()
    };
    let residual = |w: &[f64]| -> Vec<f64> {
        let mut r = vec![0.0; d];
        for (x, &wi) in xs.iter().zip(w) {
            for j in 0..d {
                r[j] += wi * x[j];
            }
        }
        for j in 0..d {
            r[j] -= target[j];
        }
        r
    };
    let inf_norm = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));

    let mut lambda = vec![0.0; d];
    let mut w = weights_for(&lambda);
    let mut r = residual(&w);
    for _ in 0..500 {
        if inf_norm(&r) < 1e-6 {
            for (slot, &i) in controls.iter().enumerate() {
                w_full[i] = w[slot];
            }
            return Ok(WeightVector { w: w_full, cap: 1.0 });
        }
        let lnorm = lambda.iter().map(|l| l * l).sum::<f64>().sqrt();
        if lnorm > 1e6 {
            return Err(Error::HullViolation);
        }
        // Jacobian: weighted covariance of the control covariates
        let mut mean = vec![0.0; d];
        for (x, &wi) in xs.iter().zip(&w) {
            for j in 0..d {
                mean[j] += wi * x[j];
            }
        }
        let mut jac = vec![vec![0.0; d]; d];
        for (x, &wi) in xs.iter().zip(&w) {
            for a in 0..d {
                for b in 0..d {
                    jac[a][b] += wi * (x[a] - mean[a]) * (x[b] - mean[b]);
                }
            }
        }
        let step = match solve_linear_system(jac, r.clone()) {
            Ok(s) => s,
            Err(_) => return Err(Error::HullViolation),
        };
        // backtracking halving on the residual norm
        let base = inf_norm(&r);
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let cand: Vec<f64> = lambda.iter().zip(&step).map(|(l, s)| l - scale * s).collect();
            let wc = weights_for(&cand);
            let rc = residual(&wc);
            if inf_norm(&rc) < base {
                lambda = cand;
                w = wc;
                r = rc;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if !accepted {
            // residual cannot improve: target outside the attainable hull
            return Err(Error::HullViolation);
        }
    }
    Err(Error::NonConvergence(
        "entropy balancing dual Newton exceeded 500 iterations".into(),
    ))
}

/// ATT estimate from entropy-balancing weights.
pub fn att_entropy_balancing(dataset: &CausalDataset) -> Result<AttEstimate> {
    let weights = entropy_balancing(dataset)?;
    let value = att_weighted(&weights, dataset);
    Ok(AttEstimate {
        value,
        weights,
        final_ipm: f64::NAN,
        method: "entropy-balancing".to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_dataset() -> CausalDataset {
        // controls and treated share the same covariate point set
        CausalDataset::new(
            vec![vec![0.0, 1.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0]],
            vec![false, false, true, true],
            vec![1.0, 2.0, 1.5, 2.5],
        )
        .unwrap()
    }

    #[test]
    fn initial_weights_uniform_on_controls() {
        let ds = CausalDataset::new(
            vec![vec![0.0]; 5],
            vec![false, false, false, false, true],
            vec![0.0; 5],
        )
        .unwrap();
        let w = initial_weights(&ds, 100.0).unwrap();
        w.validate(&ds).unwrap();
        assert_eq!(&w.w[..4], &[0.25; 4]);
        assert_eq!(w.w[4], 0.0);

        let ds1 = CausalDataset::new(vec![vec![0.0]; 2], vec![false, true], vec![0.0; 2]).unwrap();
        let w1 = initial_weights(&ds1, 100.0).unwrap();
        assert_eq!(w1.w[0], 1.0);
    }

    #[test]
    fn dataset_requires_both_groups() {
        assert!(matches!(
            CausalDataset::new(vec![vec![0.0]], vec![true], vec![0.0]),
            Err(Error::EmptyGroup(_))
        ));
    }

    #[test]
    fn att_weighted_hand_cases() {
        // two controls Y = (0, 2) at w = 0.5 each, one treated Y = 3
        let ds = CausalDataset::new(
            vec![vec![0.0], vec![1.0], vec![0.5]],
            vec![false, false, true],
            vec![0.0, 2.0, 3.0],
        )
        .unwrap();
        let w = initial_weights(&ds, 100.0).unwrap();
        assert_eq!(att_weighted(&w, &ds), 2.0);

        // constant outcomes cancel for any feasible weights
        let ds_const = CausalDataset::new(
            vec![vec![0.0], vec![1.0], vec![0.5]],
            vec![false, false, true],
            vec![7.0, 7.0, 7.0],
        )
        .unwrap();
        let w2 = WeightVector { w: vec![0.3, 0.7, 0.0], cap: 1.0 };
        assert!(att_weighted(&w2, &ds_const).abs() < 1e-12);
    }

    #[test]
    fn att_weighted_linear_in_outcome() {
        let ds = toy_dataset();
        let w = initial_weights(&ds, 100.0).unwrap();
        let base = att_weighted(&w, &ds);
        let mut scaled = ds.clone();
        for y in &mut scaled.outcome {
            *y = 3.0 * *y + 11.0;
        }
        assert!((att_weighted(&w, &scaled) - 3.0 * base).abs() < 1e-9);
    }

    #[test]
    fn solve_balance_identical_groups_stays_balanced() {
        let ds = toy_dataset();
        let mut cfg = BalanceConfig::defaults_for(BalanceIpm::Relu, RngStream::new(1, 0));
        cfg.ensemble = 20;
        cfg.epochs = 50;
        let w = solve_balance(&ds, &cfg).unwrap();
        w.validate(&ds).unwrap();
        let res = balance_residual_ipm(&ds, &w, &cfg).unwrap();
        assert!(res <= 1e-3, "residual {res}");
    }

    #[test]
    fn solve_balance_mmd_variants_run() {
        let ds = toy_dataset();
        for ipm in [BalanceIpm::MmdRbf { sigma: 10.0 }, BalanceIpm::MmdSobolev] {
            let mut cfg = BalanceConfig::defaults_for(ipm, RngStream::new(2, 0));
            cfg.epochs = 100;
            let w = solve_balance(&ds, &cfg).unwrap();
            w.validate(&ds).unwrap();
        }
    }

    #[test]
    fn solve_balance_rejects_low_cap() {
        let ds = toy_dataset();
        let mut cfg = BalanceConfig::defaults_for(BalanceIpm::Relu, RngStream::new(3, 0));
        cfg.k_cap = 0.5;
        assert!(matches!(solve_balance(&ds, &cfg), Err(Error::Infeasible(_))));
    }

    #[test]
    fn logistic_degenerate_labels() {
        let x = vec![vec![0.1], vec![0.2]];
        assert!(matches!(
            fit_logistic(&x, &[true, true], 100, 1e-8),
            Err(Error::Separation(_))
        ));
    }

    #[test]
    fn logistic_symmetric_data_zero_intercept() {
        let mut x = Vec::new();
        let mut t = Vec::new();
        for v in [0.3, 0.9, 1.7, 2.4] {
            x.push(vec![v]);
            t.push(true);
            x.push(vec![-v]);
            t.push(false);
        }
        let beta = fit_logistic(&x, &t, 100, 1e-10).unwrap();
        assert!(beta[0].abs() < 1e-6, "intercept {}", beta[0]);
    }

    #[test]
    fn logistic_recovers_truth_at_scale() {
        // simulate from the model and verify consistency within 3 SE
        let mut rng = RngStream::new(7, 0);
        let n = 5000;
        let (b0, b1) = (-0.3, 0.8);
        let mut x = Vec::with_capacity(n);
        let mut t = Vec::with_capacity(n);
        for _ in 0..n {
            let xi = rng.next_normal();
            let p = 1.0 / (1.0 + (-(b0 + b1 * xi)).exp());
            t.push(rng.next_f64() < p);
            x.push(vec![xi]);
        }
        let beta = fit_logistic(&x, &t, 100, 1e-10).unwrap();
        // rough SE bound: sqrt(4/n) covers both coefficients here
        let se = (4.0 / n as f64).sqrt();
        assert!((beta[0] - b0).abs() < 3.0 * se, "b0 {}", beta[0]);
        assert!((beta[1] - b1).abs() < 3.0 * se, "b1 {}", beta[1]);
    }

    #[test]
    fn sipw_uniform_when_odds_constant() {
        // identical covariates make the fitted propensity constant
        let ds = CausalDataset::new(
            vec![vec![0.5]; 6],
            vec![false, false, false, true, true, true],
            vec![1.0, 2.0, 3.0, 1.0, 2.0, 3.0],
        )
        .unwrap();
        let est = att_sipw_glm(&ds).unwrap();
        for i in ds.control_indices() {
            assert!((est.weights.w[i] - 1.0 / 3.0).abs() < 1e-9);
        }
        assert!(est.value.abs() < 1e-9);
    }

    #[test]
    fn sipw_permutation_equivariant() {
        let ds = CausalDataset::new(
            vec![vec![0.1], vec![0.9], vec![0.4], vec![0.7]],
            vec![false, false, true, true],
            vec![1.0, 2.0, 3.0, 4.0],
        )
        .unwrap();
        let est = att_sipw_glm(&ds).unwrap();
        let swapped = CausalDataset::new(
            vec![vec![0.9], vec![0.1], vec![0.4], vec![0.7]],
            vec![false, false, true, true],
            vec![2.0, 1.0, 3.0, 4.0],
        )
        .unwrap();
        let est2 = att_sipw_glm(&swapped).unwrap();
        assert!((est.weights.w[0] - est2.weights.w[1]).abs() < 1e-9);
        assert!((est.value - est2.value).abs() < 1e-9);
    }

    #[test]
    fn entropy_balancing_single_control() {
        let ds = CausalDataset::new(
            vec![vec![0.4], vec![0.9]],
            vec![false, true],
            vec![1.0, 2.0],
        )
        .unwrap();
        let w = entropy_balancing(&ds).unwrap();
        assert_eq!(w.w[0], 1.0);
    }

    #[test]
    fn entropy_balancing_matched_means_gives_uniform() {
        // treated mean equals the control mean: KKT at lambda = 0
        let ds = CausalDataset::new(
            vec![vec![-1.0], vec![1.0], vec![0.0]],
            vec![false, false, true],
            vec![0.0; 3],
        )
        .unwrap();
        let w = entropy_balancing(&ds).unwrap();
        assert!((w.w[0] - 0.5).abs() < 1e-6 && (w.w[1] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn entropy_balancing_moment_match_and_optimality() {
        let mut rng = RngStream::new(13, 0);
        let n0 = 30;
        let d = 2;
        let controls: Vec<Vec<f64>> = (0..n0)
            .map(|_| (0..d).map(|_| rng.next_normal()).collect())
            .collect();
        // a treated mean strictly inside the hull: convex combination
        let mut covs = controls.clone();
        covs.push(vec![0.1, -0.2]);
        let mut t = vec![false; n0];
        t.push(true);
        let ds = CausalDataset::new(covs, t, vec![0.0; n0 + 1]).unwrap();
        let w = entropy_balancing(&ds).unwrap();

        let mut moments = vec![0.0; d];
        for i in 0..n0 {
            for j in 0..d {
                moments[j] += w.w[i] * ds.covariates[i][j];
            }
        }
        assert!((moments[0] - 0.1).abs() < 1e-6);
        assert!((moments[1] + 0.2).abs() < 1e-6);

        // entropy optimality spot-check: perturb along the constraint null
        // space (orthogonal to the all-ones row and each coordinate row) so
        // every candidate satisfies the sum and moment constraints exactly
        let obj: f64 = (0..n0)
            .filter(|&i| w.w[i] > 0.0)
            .map(|i| w.w[i] * w.w[i].ln())
            .sum();
        let mut constraint_rows: Vec<Vec<f64>> = vec![vec![1.0; n0]];
        for j in 0..d {
            let mut row: Vec<f64> = (0..n0).map(|i| ds.covariates[i][j]).collect();
            // orthogonalize against earlier rows so sequential projection is exact
            for prev in &constraint_rows {
                let dot: f64 = row.iter().zip(prev).map(|(a, b)| a * b).sum();
                let nsq: f64 = prev.iter().map(|r| r * r).sum();
                for (ri, pi) in row.iter_mut().zip(prev) {
                    *ri -= dot / nsq * pi;
                }
            }
            constraint_rows.push(row);
        }
        for _ in 0..100 {
            let mut v: Vec<f64> = (0..n0).map(|_| rng.next_normal()).collect();
            for row in &constraint_rows {
                let dot: f64 = v.iter().zip(row).map(|(a, b)| a * b).sum();
                let nsq: f64 = row.iter().map(|r| r * r).sum();
                for (vi, ri) in v.iter_mut().zip(row) {
                    *vi -= dot / nsq * ri;
                }
            }
            let vnorm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if vnorm < 1e-9 {
                continue;
            }
            // step small enough to keep every weight strictly positive
            let wmin = w.w[..n0].iter().cloned().fold(f64::INFINITY, f64::min);
            let eps = 0.5 * wmin / vnorm.max(1e-300);
            let cand: Vec<f64> = (0..n0).map(|i| w.w[i] + eps * v[i]).collect();
            let cand_obj: f64 = cand
                .iter()
                .filter(|&&wi| wi > 0.0)
                .map(|&wi| wi * wi.ln())
                .sum();
            assert!(obj <= cand_obj + 1e-9, "obj {obj} cand {cand_obj}");
        }
    }

    #[test]
    fn entropy_balancing_hull_violation() {
        // treated mean 2.0 sits outside the control range [0, 1]
        let ds = CausalDataset::new(
            vec![vec![0.0], vec![1.0], vec![2.0]],
            vec![false, false, true],
            vec![0.0; 3],
        )
        .unwrap();
        assert!(matches!(entropy_balancing(&ds), Err(Error::HullViolation)));
    }
}
