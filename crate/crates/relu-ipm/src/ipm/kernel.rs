use crate::error::{Error, Result};
use crate::ipm::SampleSet;

/// Kernel choices for the closed-form MMD.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelSpec {
    /// `exp(-||x - y||^2 / sigma^2)`
    Rbf { sigma: f64 },
    /// Product Sobolev kernel built from scaled Bernoulli polynomials
    /// `k1(t) = t - 0.5`, `k2(t) = (k1(t)^2 - 1/12)/2`,
    /// `k4(t) = (k1(t)^4 - k1(t)^2/2 + 7/240)/24`.
    Sobolev,
}

fn k1(t: f64) -> f64 {
    t - 0.5
}

fn k2(t: f64) -> f64 {
    (k1(t) * k1(t) - 1.0 / 12.0) / 2.0
}

fn k4(t: f64) -> f64 {
    let a = k1(t);
    (a.powi(4) - a * a / 2.0 + 7.0 / 240.0) / 24.0
}

pub fn kernel_eval(spec: KernelSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch(format!(
            "kernel inputs {} vs {}",
            x.len(),
            y.len()
        )));
    }
    Ok(match spec {
        KernelSpec::Rbf { sigma } => {
            assert!(sigma > 0.0);
            let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
            (-d2 / (sigma * sigma)).exp()
        }
        KernelSpec::Sobolev => x
            .iter()
            .zip(y)
            .map(|(&a, &b)| 1.0 + k1(a) * k1(b) + k2(a) * k2(b) - k4((a - b).abs()))
            .product(),
    })
}

/// Squared MMD of two weighted samples as a V-statistic:
/// `sum p_i p_j k(x_i, x_j) - 2 sum p_i q_j k(x_i, y_j) + sum q_i q_j k(y_i, y_j)`.
///
/// Full double sums including the diagonal (V-statistic); tiny negative
/// rounding is clamped to zero.
pub fn mmd_squared(p: &SampleSet, q: &SampleSet, spec: KernelSpec) -> Result<f64> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch(format!(
            "sample dims {} vs {}",
            p.dim(),
            q.dim()
        )));
    }
    let mut pp = 0.0;
    for (xi, wi) in p.iter() {
        for (xj, wj) in p.iter() {
            pp += wi * wj * kernel_eval(spec, xi, xj)?;
        }
    }
    let mut pq = 0.0;
    for (xi, wi) in p.iter() {
        for (yj, wj) in q.iter() {
            pq += wi * wj * kernel_eval(spec, xi, yj)?;
        }
    }
    let mut qq = 0.0;
    for (yi, wi) in q.iter() {
        for (yj, wj) in q.iter() {
            qq += wi * wj * kernel_eval(spec, yi, yj)?;
        }
    }
    Ok((pp - 2.0 * pq + qq).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::RngStream;

    #[test]
    fn rbf_hand_cases() {
        assert_eq!(kernel_eval(KernelSpec::Rbf { sigma: 1.0 }, &[0.3, 0.4], &[0.3, 0.4]).unwrap(), 1.0);
        // sigma = 10, ||x - y|| = 10 -> e^{-1}
        let v = kernel_eval(KernelSpec::Rbf { sigma: 10.0 }, &[0.0], &[10.0]).unwrap();
        assert!((v - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn sobolev_hand_case() {
        // d = 1, x = y = 0.5: k1 = 0, k2 = -1/24, k4(0) = -1/720
        let v = kernel_eval(KernelSpec::Sobolev, &[0.5], &[0.5]).unwrap();
        let expected = 1.0 + (1.0f64 / 24.0).powi(2) + 1.0 / 720.0;
        assert!((v - expected).abs() < 1e-15, "{v} vs {expected}");
    }

    #[test]
    fn kernel_dim_mismatch() {
        assert!(kernel_eval(KernelSpec::Sobolev, &[0.1], &[0.1, 0.2]).is_err());
    }

    #[test]
    fn mmd_identical_sets_vanish() {
        let p = SampleSet::weighted(
            vec![vec![0.1, 0.2], vec![-0.3, 0.4], vec![0.0, -0.5]],
            vec![0.2, 0.5, 0.3],
        )
        .unwrap();
        for spec in [KernelSpec::Rbf { sigma: 10.0 }, KernelSpec::Sobolev] {
            assert!(mmd_squared(&p, &p, spec).unwrap() < 1e-12);
        }
    }

    #[test]
    fn mmd_single_point_sets_collapse() {
        let p = SampleSet::uniform(vec![vec![0.2]]).unwrap();
        let q = SampleSet::uniform(vec![vec![-0.4]]).unwrap();
        for spec in [KernelSpec::Rbf { sigma: 2.0 }, KernelSpec::Sobolev] {
            let v = mmd_squared(&p, &q, spec).unwrap();
            let expected = kernel_eval(spec, &[0.2], &[0.2]).unwrap()
                - 2.0 * kernel_eval(spec, &[0.2], &[-0.4]).unwrap()
                + kernel_eval(spec, &[-0.4], &[-0.4]).unwrap();
            assert!((v - expected.max(0.0)).abs() < 1e-15);
        }
    }

    // independent triple-loop oracle
    fn mmd_brute(p: &SampleSet, q: &SampleSet, spec: KernelSpec) -> f64 {
        let mut pp = 0.0;
        for (xi, wi) in p.iter() {
            for (xj, wj) in p.iter() {
                pp += wi * wj * kernel_eval(spec, xi, xj).unwrap();
            }
        }
        let mut pq = 0.0;
        for (xi, wi) in p.iter() {
            for (yj, wj) in q.iter() {
                pq += wi * wj * kernel_eval(spec, xi, yj).unwrap();
            }
        }
        let mut qq = 0.0;
        for (yi, wi) in q.iter() {
            for (yj, wj) in q.iter() {
                qq += wi * wj * kernel_eval(spec, yi, yj).unwrap();
            }
        }
        pp - 2.0 * pq + qq
    }

    fn random_weighted(rng: &mut RngStream, n: usize, d: usize) -> SampleSet {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                let v: Vec<f64> = (0..d).map(|_| rng.uniform_in(-0.7, 0.7)).collect();
                let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm > 1.0 {
                    v.iter().map(|x| x / norm).collect()
                } else {
                    v
                }
            })
            .collect();
        let raw: Vec<f64> = (0..n).map(|_| rng.uniform_in(0.1, 1.0)).collect();
        let s: f64 = raw.iter().sum();
        SampleSet::weighted(rows, raw.iter().map(|w| w / s).collect()).unwrap()
    }

    #[test]
    fn mmd_matches_brute_force() {
        let mut rng = RngStream::new(17, 0);
        for trial in 0..50 {
            let p = random_weighted(&mut rng, 20, 2);
            let q = random_weighted(&mut rng, 20, 2);
            for spec in [KernelSpec::Rbf { sigma: 10.0 }, KernelSpec::Sobolev] {
                let fast = mmd_squared(&p, &q, spec).unwrap();
                let brute = mmd_brute(&p, &q, spec);
                let scale = fast.abs().max(brute.abs()).max(1e-30);
                assert!(
                    (fast - brute.max(0.0)).abs() / scale < 1e-12,
                    "trial {trial}: {fast} vs {brute}"
                );
            }
        }
    }
}
