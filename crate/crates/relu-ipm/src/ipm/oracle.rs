use crate::error::{Error, Result};
use crate::ipm::discriminator::ReluParams;
use crate::ipm::SampleSet;

/// Exact empirical ReLU-IPM in one dimension.
///
/// For fixed theta in {-1, +1} the gap is piecewise linear in mu, so its
/// absolute value attains its maximum over [-1, 1] at a breakpoint
/// `mu = clip(-theta x, -1, 1)` of some sample point or at an endpoint.
/// Scanning all of them is exact up to floating point.
pub fn exact_relu_ipm_1d(p: &SampleSet, q: &SampleSet) -> Result<(f64, ReluParams)> {
    if p.dim() != 1 || q.dim() != 1 {
        return Err(Error::DimensionMismatch(format!(
            "exact oracle needs d = 1, got {} and {}",
            p.dim(),
            q.dim()
        )));
    }
    let mut best = f64::NEG_INFINITY;
    let mut best_params = (1.0, -1.0);
    for theta in [-1.0, 1.0] {
        let mut mus: Vec<f64> = vec![-1.0, 1.0];
        for (x, _) in p.iter().chain(q.iter()) {
            mus.push((-theta * x[0]).clamp(-1.0, 1.0));
        }
        for mu in mus {
            let gap = gap_1d(theta, mu, p, q);
            if gap.abs() > best {
                best = gap.abs();
                best_params = (theta, mu);
            }
        }
    }
    Ok((
        best,
        ReluParams::new(vec![best_params.0], best_params.1)?,
    ))
}

fn gap_1d(theta: f64, mu: f64, p: &SampleSet, q: &SampleSet) -> f64 {
    let mut mp = 0.0;
    for (x, w) in p.iter() {
        mp += w * (theta * x[0] + mu).max(0.0);
    }
    let mut mq = 0.0;
    for (y, w) in q.iter() {
        mq += w * (theta * y[0] + mu).max(0.0);
    }
    mp - mq
}

/// Approximate ReLU-IPM oracle for d >= 2: a deterministic low-discrepancy
/// sequence of directions on the sphere, with the mu-maximization solved
/// exactly on each projected 1-D instance. The value is a lower bound on the
/// empirical ReLU-IPM, monotone nondecreasing in the number of directions.
pub fn grid_relu_ipm(p: &SampleSet, q: &SampleSet, directions: usize) -> Result<f64> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch(format!(
            "sample dims {} vs {}",
            p.dim(),
            q.dim()
        )));
    }
    let dim = p.dim();
    if dim < 2 {
        return Err(Error::DimensionMismatch("grid oracle needs d >= 2".into()));
    }
    let mut best: f64 = 0.0;
    let mut proj_p: Vec<(f64, f64)> = Vec::with_capacity(p.len());
    let mut proj_q: Vec<(f64, f64)> = Vec::with_capacity(q.len());
    for i in 0..directions {
        let theta = direction(i, dim);
        for sign in [1.0, -1.0] {
            proj_p.clear();
            proj_q.clear();
            for (x, w) in p.iter() {
                proj_p.push((sign * dotp(&theta, x), w));
            }
            for (y, w) in q.iter() {
                proj_q.push((sign * dotp(&theta, y), w));
            }
            best = best.max(best_abs_gap_over_mu(&proj_p, &proj_q));
        }
    }
    Ok(best)
}

/// Max over mu in [-1, 1] of |gap| for projected 1-D values, by breakpoint
/// scan with theta fixed at +1.
fn best_abs_gap_over_mu(p: &[(f64, f64)], q: &[(f64, f64)]) -> f64 {
    let mut best: f64 = 0.0;
    let mut scan = |mu: f64| {
        let mut mp = 0.0;
        for &(z, w) in p {
            mp += w * (z + mu).max(0.0);
        }
        let mut mq = 0.0;
        for &(z, w) in q {
            mq += w * (z + mu).max(0.0);
        }
        best = best.max((mp - mq).abs());
    };
    scan(-1.0);
    scan(1.0);
    for &(z, _) in p.iter().chain(q.iter()) {
        scan((-z).clamp(-1.0, 1.0));
    }
    best
}

fn dotp(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// i-th direction of the deterministic sequence. In d = 2 the angle follows
/// the base-2 van der Corput sequence, so every power-of-two prefix is an
/// exactly uniform grid on the circle. In higher dimensions, Halton points
/// are pushed through Box-Muller pairs and normalized.
fn direction(i: usize, dim: usize) -> Vec<f64> {
    if dim == 2 {
        let angle = 2.0 * std::f64::consts::PI * van_der_corput(i as u64, 2);
        return vec![angle.cos(), angle.sin()];
    }
    const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];
    assert!(dim <= 2 * PRIMES.len(), "direction dim too large");
    let pairs = dim.div_ceil(2);
    let mut raw = Vec::with_capacity(2 * pairs);
    for pair in 0..pairs {
        // i + 1: skip the all-zero Halton point
        let u1 = van_der_corput(i as u64 + 1, PRIMES[2 * pair]);
        let u2 = van_der_corput(i as u64 + 1, PRIMES[2 * pair + 1]);
        let r = (-2.0 * (1.0 - u1).ln()).sqrt();
        let phi = 2.0 * std::f64::consts::PI * u2;
        raw.push(r * phi.cos());
        raw.push(r * phi.sin());
    }
    raw.truncate(dim);
    let norm: f64 = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm < 1e-12 {
        let mut e = vec![0.0; dim];
        e[0] = 1.0;
        return e;
    }
    raw.iter().map(|x| x / norm).collect()
}

fn van_der_corput(mut i: u64, base: u64) -> f64 {
    let mut denom = 1.0;
    let mut out = 0.0;
    while i > 0 {
        denom *= base as f64;
        out += (i % base) as f64 / denom;
        i /= base;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::RngStream;

    fn random_sample_1d(rng: &mut RngStream, n: usize) -> SampleSet {
        let rows = (0..n).map(|_| vec![rng.uniform_in(-1.0, 1.0)]).collect();
        SampleSet::uniform(rows).unwrap()
    }

    #[test]
    fn exact_identical_is_zero() {
        let mut rng = RngStream::new(1, 0);
        let p = random_sample_1d(&mut rng, 20);
        let (v, _) = exact_relu_ipm_1d(&p, &p).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn exact_two_point_hand_case() {
        let p = SampleSet::uniform(vec![vec![0.5]]).unwrap();
        let q = SampleSet::uniform(vec![vec![-0.5]]).unwrap();
        let (v, params) = exact_relu_ipm_1d(&p, &q).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
        // theta = 1, mu >= 0.5 attains the max (theta = -1, mu = 1 ties)
        let gap = params.eval(&[0.5]) - params.eval(&[-0.5]);
        assert!((gap.abs() - v).abs() < 1e-15);
    }

    #[test]
    fn exact_shift_lower_bound() {
        // interior points shifted by delta: value >= delta * min-mass, seen
        // at theta = 1, mu = 1 where the discriminator is linear
        let p = SampleSet::uniform(vec![vec![0.2], vec![-0.1]]).unwrap();
        let delta = 0.15;
        let q = SampleSet::uniform(vec![vec![0.2 - delta], vec![-0.1 - delta]]).unwrap();
        let (v, _) = exact_relu_ipm_1d(&p, &q).unwrap();
        assert!(v >= delta * 0.5 - 1e-12);
    }

    #[test]
    fn exact_rejects_wrong_dim() {
        let p = SampleSet::uniform(vec![vec![0.1, 0.2]]).unwrap();
        assert!(exact_relu_ipm_1d(&p, &p).is_err());
    }

    #[test]
    fn grid_identical_is_zero() {
        let p = SampleSet::uniform(vec![vec![0.1, 0.2], vec![-0.4, 0.3]]).unwrap();
        assert_eq!(grid_relu_ipm(&p, &p, 64).unwrap(), 0.0);
    }

    #[test]
    fn grid_monotone_in_direction_count() {
        let mut rng = RngStream::new(3, 0);
        let rows_p: Vec<Vec<f64>> = (0..15)
            .map(|_| {
                let v = vec![rng.uniform_in(-0.7, 0.7), rng.uniform_in(-0.7, 0.7)];
                v
            })
            .collect();
        let rows_q: Vec<Vec<f64>> = (0..15)
            .map(|_| vec![rng.uniform_in(-0.3, 0.7), rng.uniform_in(-0.6, 0.3)])
            .collect();
        let p = SampleSet::uniform(rows_p).unwrap();
        let q = SampleSet::uniform(rows_q).unwrap();
        let mut prev = 0.0;
        for m in [8, 32, 128, 512] {
            let v = grid_relu_ipm(&p, &q, m).unwrap();
            assert!(v + 1e-12 >= prev);
            prev = v;
        }
    }

    #[test]
    fn grid_matches_rotated_1d_instance() {
        // rotate the two-point 1-D instance by 30 degrees into d = 2
        let angle: f64 = 30f64.to_radians();
        let rot = |x: f64| vec![x * angle.cos(), x * angle.sin()];
        let p = SampleSet::uniform(vec![rot(0.5)]).unwrap();
        let q = SampleSet::uniform(vec![rot(-0.5)]).unwrap();
        let v = grid_relu_ipm(&p, &q, 4096).unwrap();
        assert!((v - 1.0).abs() < 1e-3, "value {v}");
    }
}
