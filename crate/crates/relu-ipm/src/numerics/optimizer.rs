use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Ascent,
    Descent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizerKind {
    AdaptiveMoment,
    PlainSgd,
}

/// First-order optimizer state for one parameter vector.
///
/// `AdaptiveMoment` is the standard bias-corrected first/second moment
/// update with beta1 = 0.9, beta2 = 0.999, epsilon = 1e-8.
#[derive(Debug, Clone)]
pub struct OptimizerState {
    kind: OptimizerKind,
    learning_rate: f64,
    step_count: u64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
    first_moment: Vec<f64>,
    second_moment: Vec<f64>,
}

impl OptimizerState {
    pub fn sgd(learning_rate: f64) -> Self {
        assert!(learning_rate > 0.0);
        OptimizerState {
            kind: OptimizerKind::PlainSgd,
            learning_rate,
            step_count: 0,
            beta1: 0.0,
            beta2: 0.0,
            epsilon: 0.0,
            first_moment: Vec::new(),
            second_moment: Vec::new(),
        }
    }

    pub fn adam(learning_rate: f64, dim: usize) -> Self {
        assert!(learning_rate > 0.0);
        OptimizerState {
            kind: OptimizerKind::AdaptiveMoment,
            learning_rate,
            step_count: 0,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            first_moment: vec![0.0; dim],
            second_moment: vec![0.0; dim],
        }
    }

    pub fn kind(&self) -> OptimizerKind {
        self.kind
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    /// One in-place update of `params` along `grad`.
    pub fn step(&mut self, params: &mut [f64], grad: &[f64], direction: Direction) -> Result<()> {
        if params.len() != grad.len() {
            return Err(Error::DimensionMismatch(format!(
                "params len {} vs grad len {}",
                params.len(),
                grad.len()
            )));
        }
        let sign = match direction {
            Direction::Ascent => 1.0,
            Direction::Descent => -1.0,
        };
        match self.kind {
            OptimizerKind::PlainSgd => {
                for (p, g) in params.iter_mut().zip(grad) {
                    *p += sign * self.learning_rate * g;
                }
            }
            OptimizerKind::AdaptiveMoment => {
                if self.first_moment.len() != params.len() {
                    return Err(Error::DimensionMismatch(format!(
                        "optimizer dim {} vs params len {}",
                        self.first_moment.len(),
                        params.len()
                    )));
                }
                let t = (self.step_count + 1) as i32;
                let bc1 = 1.0 - self.beta1.powi(t);
                let bc2 = 1.0 - self.beta2.powi(t);
                for i in 0..params.len() {
                    let g = grad[i];
                    self.first_moment[i] = self.beta1 * self.first_moment[i] + (1.0 - self.beta1) * g;
                    self.second_moment[i] =
                        self.beta2 * self.second_moment[i] + (1.0 - self.beta2) * g * g;
                    let m_hat = self.first_moment[i] / bc1;
                    let v_hat = self.second_moment[i] / bc2;
                    params[i] += sign * self.learning_rate * m_hat / (v_hat.sqrt() + self.epsilon);
                }
            }
        }
        self.step_count += 1;
        Ok(())
    }
}
