use crate::error::{Error, Result};
use crate::ipm::SampleSet;
use crate::numerics::{clip_interval, project_sphere, RngStream};

/// Single ReLU unit `z -> (theta . z + mu)_+` with `theta` on the unit
/// sphere and `mu` in [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct ReluParams {
    pub theta: Vec<f64>,
    pub mu: f64,
}

impl ReluParams {
    pub fn new(theta: Vec<f64>, mu: f64) -> Result<Self> {
        let norm: f64 = theta.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::Infeasible(format!("theta norm {norm} != 1")));
        }
        if !(-1.0..=1.0).contains(&mu) {
            return Err(Error::Infeasible(format!("mu {mu} outside [-1, 1]")));
        }
        Ok(ReluParams { theta, mu })
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        relu_disc_eval(self, x)
    }
}

/// `(theta . x + mu)_+`; on the unit ball the value lies in [0, 2].
pub fn relu_disc_eval(p: &ReluParams, x: &[f64]) -> f64 {
    let pre = dot(&p.theta, x) + p.mu;
    pre.max(0.0)
}

/// Single sigmoid unit `z -> sig(theta . z + mu)`, both parameters
/// unconstrained.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmoidParams {
    pub theta: Vec<f64>,
    pub mu: f64,
}

impl SigmoidParams {
    pub fn eval(&self, x: &[f64]) -> f64 {
        sigmoid(dot(&self.theta, x) + self.mu)
    }
}

pub fn sigmoid(t: f64) -> f64 {
    1.0 / (1.0 + (-t).exp())
}

/// One-hidden-layer ReLU network with `d` hidden units, output clipped to
/// [-1, 1] and every weight/bias clipped to [-sqrt(d), sqrt(d)].
#[derive(Debug, Clone, PartialEq)]
pub struct HolderNetParams {
    /// row-major d x d
    pub hidden_weights: Vec<f64>,
    pub hidden_bias: Vec<f64>,
    pub output_weights: Vec<f64>,
    pub output_bias: f64,
}

impl HolderNetParams {
    pub fn dim(&self) -> usize {
        self.hidden_bias.len()
    }

    /// Pre-clip network output.
    pub fn raw_output(&self, x: &[f64]) -> f64 {
        let d = self.dim();
        let mut out = self.output_bias;
        for j in 0..d {
            let pre = dot(&self.hidden_weights[j * d..(j + 1) * d], x) + self.hidden_bias[j];
            if pre > 0.0 {
                out += self.output_weights[j] * pre;
            }
        }
        out
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        clip_interval(self.raw_output(x), -1.0, 1.0)
    }
}

/// Parameters of whichever discriminator family an estimator maximized over.
#[derive(Debug, Clone, PartialEq)]
pub enum DiscParams {
    Relu(ReluParams),
    Sigmoid(SigmoidParams),
    HolderNet(HolderNetParams),
}

impl DiscParams {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            DiscParams::Relu(p) => p.eval(x),
            DiscParams::Sigmoid(p) => p.eval(x),
            DiscParams::HolderNet(p) => p.eval(x),
        }
    }
}

/// Signed weighted mean difference `sum_i p_i f(x_i) - sum_j q_j f(y_j)`.
pub fn mean_gap<F: Fn(&[f64]) -> f64>(f: F, p: &SampleSet, q: &SampleSet) -> Result<f64> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch(format!(
            "sample dims {} vs {}",
            p.dim(),
            q.dim()
        )));
    }
    let mut mp = 0.0;
    for (x, w) in p.iter() {
        mp += w * f(x);
    }
    let mut mq = 0.0;
    for (y, w) in q.iter() {
        mq += w * f(y);
    }
    Ok(mp - mq)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Flat-parameter view of a discriminator family, used by the multi-start
/// ascent loop. `grad` accumulates `coeff * d f(x) / d params` into `acc`;
/// the ReLU subgradient at exactly zero is taken as zero.
pub(crate) trait DiscFamily {
    fn param_len(dim: usize) -> usize;
    fn init(rng: &mut RngStream, dim: usize) -> Vec<f64>;
    fn eval(params: &[f64], dim: usize, x: &[f64]) -> f64;
    fn grad(params: &[f64], dim: usize, x: &[f64], coeff: f64, acc: &mut [f64]);
    /// Pull parameters back into the feasible set after an ascent step.
    fn project(params: &mut [f64], dim: usize, rng: &mut RngStream);
    fn to_disc(params: &[f64], dim: usize) -> DiscParams;
}

/// Layout: [theta(0..d), mu].
pub(crate) struct ReluFamily;

impl DiscFamily for ReluFamily {
    fn param_len(dim: usize) -> usize {
        dim + 1
    }

    fn init(rng: &mut RngStream, dim: usize) -> Vec<f64> {
        let mut p = random_unit_vector(rng, dim);
        p.push(rng.uniform_in(-1.0, 1.0));
        p
    }

    fn eval(params: &[f64], dim: usize, x: &[f64]) -> f64 {
        (dot(&params[..dim], x) + params[dim]).max(0.0)
    }

    fn grad(params: &[f64], dim: usize, x: &[f64], coeff: f64, acc: &mut [f64]) {
        let pre = dot(&params[..dim], x) + params[dim];
        if pre > 0.0 {
            for j in 0..dim {
                acc[j] += coeff * x[j];
            }
            acc[dim] += coeff;
        }
    }

    fn project(params: &mut [f64], dim: usize, rng: &mut RngStream) {
        match project_sphere(&params[..dim]) {
            Ok(theta) => params[..dim].copy_from_slice(&theta),
            Err(_) => {
                let theta = random_unit_vector(rng, dim);
                params[..dim].copy_from_slice(&theta);
            }
        }
        params[dim] = clip_interval(params[dim], -1.0, 1.0);
    }

    fn to_disc(params: &[f64], dim: usize) -> DiscParams {
        DiscParams::Relu(ReluParams {
            theta: params[..dim].to_vec(),
            mu: params[dim],
        })
    }
}

/// Layout: [theta(0..d), mu]; unconstrained, no projection.
pub(crate) struct SigmoidFamily;

impl DiscFamily for SigmoidFamily {
    fn param_len(dim: usize) -> usize {
        dim + 1
    }

    fn init(rng: &mut RngStream, dim: usize) -> Vec<f64> {
        let mut p = random_unit_vector(rng, dim);
        p.push(rng.uniform_in(-1.0, 1.0));
        p
    }

    fn eval(params: &[f64], dim: usize, x: &[f64]) -> f64 {
        sigmoid(dot(&params[..dim], x) + params[dim])
    }

    fn grad(params: &[f64], dim: usize, x: &[f64], coeff: f64, acc: &mut [f64]) {
        let s = sigmoid(dot(&params[..dim], x) + params[dim]);
        let ds = coeff * s * (1.0 - s);
        for j in 0..dim {
            acc[j] += ds * x[j];
        }
        acc[dim] += ds;
    }

    fn project(_params: &mut [f64], _dim: usize, _rng: &mut RngStream) {}

    fn to_disc(params: &[f64], dim: usize) -> DiscParams {
        DiscParams::Sigmoid(SigmoidParams {
            theta: params[..dim].to_vec(),
            mu: params[dim],
        })
    }
}

/// Layout: [W(0..d*d), b(d*d..d*d+d), v(..+d), c].
pub(crate) struct HolderFamily;

impl HolderFamily {
    fn split(params: &[f64], dim: usize) -> (&[f64], &[f64], &[f64], f64) {
        let dd = dim * dim;
        (
            &params[..dd],
            &params[dd..dd + dim],
            &params[dd + dim..dd + 2 * dim],
            params[dd + 2 * dim],
        )
    }
}

impl DiscFamily for HolderFamily {
    fn param_len(dim: usize) -> usize {
        dim * dim + 2 * dim + 1
    }

    fn init(rng: &mut RngStream, dim: usize) -> Vec<f64> {
        (0..Self::param_len(dim))
            .map(|_| rng.uniform_in(-1.0, 1.0))
            .collect()
    }

    fn eval(params: &[f64], dim: usize, x: &[f64]) -> f64 {
        let (w, b, v, c) = Self::split(params, dim);
        let mut out = c;
        for j in 0..dim {
            let pre = dot(&w[j * dim..(j + 1) * dim], x) + b[j];
            if pre > 0.0 {
                out += v[j] * pre;
            }
        }
        clip_interval(out, -1.0, 1.0)
    }

    fn grad(params: &[f64], dim: usize, x: &[f64], coeff: f64, acc: &mut [f64]) {
        let (w, b, v, c) = Self::split(params, dim);
        let mut out = c;
        let mut pres = vec![0.0; dim];
        for j in 0..dim {
            let pre = dot(&w[j * dim..(j + 1) * dim], x) + b[j];
            pres[j] = pre;
            if pre > 0.0 {
                out += v[j] * pre;
            }
        }
        // output clip saturates the gradient
        if out.abs() >= 1.0 {
            return;
        }
        let dd = dim * dim;
        for j in 0..dim {
            if pres[j] > 0.0 {
                for l in 0..dim {
                    acc[j * dim + l] += coeff * v[j] * x[l];
                }
                acc[dd + j] += coeff * v[j];
                acc[dd + dim + j] += coeff * pres[j];
            }
        }
        acc[dd + 2 * dim] += coeff;
    }

    fn project(params: &mut [f64], dim: usize, _rng: &mut RngStream) {
        let bound = (dim as f64).sqrt();
        for p in params.iter_mut() {
            *p = clip_interval(*p, -bound, bound);
        }
    }

    fn to_disc(params: &[f64], dim: usize) -> DiscParams {
        let (w, b, v, c) = Self::split(params, dim);
        DiscParams::HolderNet(HolderNetParams {
            hidden_weights: w.to_vec(),
            hidden_bias: b.to_vec(),
            output_weights: v.to_vec(),
            output_bias: c,
        })
    }
}

/// Uniform draw on the unit sphere via normalized standard normals.
pub(crate) fn random_unit_vector(rng: &mut RngStream, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.next_normal()).collect();
        if let Ok(u) = project_sphere(&v) {
            return u;
        }
    }
}
