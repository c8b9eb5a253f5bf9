//! Statistical tests used to check simulated data against models.

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Two-sided Kolmogorov-Smirnov statistic of `samples` against `cdf`.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("samples"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    Ok(sorted.iter().enumerate().fold(0.0, |d, (i, &x)| {
        let f = cdf(x);
        d.max(f - i as f64 / n).max((i + 1) as f64 / n - f)
    }))
}

/// Asymptotic p-value of a KS statistic `d` from `n` samples, with the
/// Stephens small-sample correction.
pub fn ks_p_value(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = 2.0 * (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    sum.clamp(0.0, 1.0)
}

/// Result of a one-sided paired t-test of `mean(a - b) < 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairedTest {
    pub mean_difference: f64,
    pub t: f64,
    pub p_value: f64,
}

pub fn paired_t_less(a: &[f64], b: &[f64]) -> Result<PairedTest> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: format!("{} pairs", a.len()),
            actual: b.len().to_string(),
        });
    }
    if a.len() < 2 {
        return Err(Error::EmptyInput("need at least two pairs"));
    }
    let n = a.len() as f64;
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = diff.iter().sum::<f64>() / n;
    let var = diff.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let se = (var / n).sqrt();
    let t = if se > 0.0 {
        mean / se
    } else if mean < 0.0 {
        f64::NEG_INFINITY
    } else if mean > 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    let dist = StudentsT::new(0.0, 1.0, n - 1.0).expect("valid degrees of freedom");
    Ok(PairedTest {
        mean_difference: mean,
        t,
        p_value: dist.cdf(t),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Stream};
    use approx::assert_relative_eq;
    use rand::Rng;

    #[test]
    fn ks_accepts_uniform_and_rejects_shifted() {
        let mut rng = stream(1, Stream::Custom(7));
        let xs: Vec<f64> = (0..5000).map(|_| rng.random::<f64>()).collect();
        let d = ks_statistic(&xs, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!(ks_p_value(d, xs.len()) > 0.01);
        let shifted: Vec<f64> = xs.iter().map(|x| x * 0.9).collect();
        let d = ks_statistic(&shifted, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!(ks_p_value(d, xs.len()) < 1e-6);
    }

    #[test]
    fn ks_single_point() {
        let d = ks_statistic(&[0.5], |x| x).unwrap();
        assert_eq!(d, 0.5);
        assert!(ks_statistic(&[], |x| x).is_err());
    }

    #[test]
    fn kolmogorov_tail_reference_value() {
        // Q(1.36) is close to 0.05 for the limiting distribution
        let n = 1_000_000;
        let d = 1.36 / (n as f64).sqrt();
        assert_relative_eq!(ks_p_value(d, n), 0.0494, max_relative = 0.01);
    }

    #[test]
    fn paired_test_direction() {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0];
        let b = [2.0, 2.5, 4.5, 5.0, 6.2];
        let t = paired_t_less(&a, &b).unwrap();
        assert!(t.mean_difference < 0.0);
        assert!(t.p_value < 0.05);
        let r = paired_t_less(&b, &a).unwrap();
        assert!(r.p_value > 0.95);
        assert_relative_eq!(t.p_value + r.p_value, 1.0, max_relative = 1e-12);
        assert!(paired_t_less(&a, &b[..3]).is_err());
    }
}
