use crate::error::{Error, Result};

/// Normalize `v` to unit Euclidean norm.
///
/// Returns `ZeroVector` when the norm is below 1e-300; the caller owns the
/// re-draw policy for degenerate initializations.
pub fn project_sphere(v: &[f64]) -> Result<Vec<f64>> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm < 1e-300 {
        return Err(Error::ZeroVector);
    }
    Ok(v.iter().map(|x| x / norm).collect())
}

pub fn clip_interval(x: f64, lo: f64, hi: f64) -> f64 {
    debug_assert!(lo <= hi);
    x.clamp(lo, hi)
}

/// Euclidean projection onto `{w : 0 <= w_i <= cap, sum w_i = 1}`.
///
/// Bisection on the shift `lambda` in `w_i = clip(v_i - lambda, 0, cap)`;
/// the sum is continuous and nonincreasing in `lambda`, so bisection pins
/// `|sum w - 1|` below 1e-10.
pub fn project_capped_simplex(v: &[f64], cap: f64) -> Result<Vec<f64>> {
    let k = v.len();
    if (k as f64) * cap < 1.0 {
        return Err(Error::Infeasible(format!(
            "k*cap = {} < 1: capped simplex is empty",
            k as f64 * cap
        )));
    }
    // A feasible point projects to itself; returning it unchanged keeps
    // exactly-balanced weights a fixed point of iterative schemes.
    if v.iter().all(|&x| (0.0..=cap).contains(&x)) && v.iter().sum::<f64>() == 1.0 {
        return Ok(v.to_vec());
    }
    let sum_at = |lam: f64| -> f64 { v.iter().map(|&x| (x - lam).clamp(0.0, cap)).sum() };

    let vmax = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let vmin = v.iter().cloned().fold(f64::INFINITY, f64::min);
    // sum_at(vmin - cap) = k*cap >= 1, sum_at(vmax) = 0 <= 1
    let mut lo = vmin - cap;
    let mut hi = vmax;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let s = sum_at(mid);
        if (s - 1.0).abs() < 1e-12 {
            lo = mid;
            hi = mid;
            break;
        }
        if s > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-16 * (1.0 + vmax.abs()) {
            break;
        }
    }
    let lam = 0.5 * (lo + hi);
    Ok(v.iter().map(|&x| (x - lam).clamp(0.0, cap)).collect())
}
