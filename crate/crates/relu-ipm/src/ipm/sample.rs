use crate::error::{Error, Result};

/// A weighted point cloud in the unit ball of `R^d`.
///
/// Rows are the support points; `weights` are nonnegative and sum to one,
/// so the pair represents a discrete probability measure.
#[derive(Debug, Clone)]
pub struct SampleSet {
    points: Vec<f64>, // row-major n x d
    weights: Vec<f64>,
    n: usize,
    dim: usize,
}

impl SampleSet {
    /// Uniformly weighted sample. Rows must already lie in the unit ball.
    pub fn uniform(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        Self::weighted(rows, vec![1.0 / n as f64; n])
    }

    pub fn weighted(rows: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::EmptySample);
        }
        let dim = rows[0].len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        if weights.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} weights for {} rows",
                weights.len(),
                n
            )));
        }
        let wsum: f64 = weights.iter().sum();
        if (wsum - 1.0).abs() > 1e-9 || weights.iter().any(|&w| w < 0.0) {
            return Err(Error::Infeasible(format!(
                "weights must be nonnegative and sum to 1 (sum = {wsum})"
            )));
        }
        let mut points = Vec::with_capacity(n * dim);
        for r in &rows {
            let norm: f64 = r.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1.0 + 1e-9 {
                return Err(Error::Infeasible(format!(
                    "row norm {norm} exceeds the unit ball; normalize first"
                )));
            }
            points.extend_from_slice(r);
        }
        Ok(SampleSet { points, weights, n, dim })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        (0..self.n).map(move |i| (self.point(i), self.weights[i]))
    }

    /// Same support, new weights.
    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self> {
        let rows = (0..self.n).map(|i| self.point(i).to_vec()).collect();
        Self::weighted(rows, weights)
    }
}

/// Affine map taking raw covariates into the unit ball: midrange centering
/// followed by max-norm scaling, fitted once on pooled data so both samples
/// share one map.
#[derive(Debug, Clone)]
pub struct NormalizationMap {
    center: Vec<f64>,
    scale: Vec<f64>,
}

impl NormalizationMap {
    /// Fit on the pooled raw rows. `center` is the per-feature midpoint of
    /// min and max; `scale[j]` is the feature's half-range times `sqrt(d)`
    /// (1 if the range is 0), which puts every mapped feature in
    /// `[-1/sqrt(d), 1/sqrt(d)]` and hence every row in the unit ball.
    /// Per-feature scaling keeps narrow features visible to discriminators
    /// next to wide ones; a single pooled norm scale would let one wide
    /// feature swallow the rest.
    pub fn fit(pooled: &[Vec<f64>]) -> Result<Self> {
        if pooled.is_empty() {
            return Err(Error::EmptySample);
        }
        let dim = pooled[0].len();
        if pooled.iter().any(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for row in pooled {
            for j in 0..dim {
                lo[j] = lo[j].min(row[j]);
                hi[j] = hi[j].max(row[j]);
            }
        }
        let center: Vec<f64> = (0..dim).map(|j| 0.5 * (lo[j] + hi[j])).collect();
        let root_d = (dim as f64).sqrt();
        let scale: Vec<f64> = (0..dim)
            .map(|j| {
                let half_range = 0.5 * (hi[j] - lo[j]);
                if half_range == 0.0 {
                    1.0
                } else {
                    half_range * root_d
                }
            })
            .collect();
        Ok(NormalizationMap { center, scale })
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn scale(&self) -> &[f64] {
        &self.scale
    }

    pub fn apply(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.center.iter().zip(&self.scale))
            .map(|(x, (c, s))| (x - c) / s)
            .collect()
    }

    pub fn apply_all(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| self.apply(r)).collect()
    }
}
