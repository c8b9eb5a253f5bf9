//! Rice and Rayleigh magnitude densities with per-component noise
//! variance `sigma2` (the I/Q variance of the underlying complex Gaussian).

use super::bessel::log_i0;
use crate::error::{invalid, Result};

fn check(z: f64, nu: f64, sigma2: f64) -> Result<()> {
    if !(z.is_finite() && nu.is_finite() && sigma2.is_finite()) {
        return Err(invalid("density", "non-finite input"));
    }
    if z < 0.0 || nu < 0.0 || sigma2 <= 0.0 {
        return Err(invalid("density", "need z >= 0, nu >= 0, sigma2 > 0"));
    }
    Ok(())
}

/// `ln[(z / s) exp(-(z^2 + nu^2) / 2s) I0(z nu / s)]`.
pub fn ricean_log_pdf(z: f64, nu: f64, sigma2: f64) -> Result<f64> {
    check(z, nu, sigma2)?;
    Ok(z.ln() - sigma2.ln() - (z * z + nu * nu) / (2.0 * sigma2) + log_i0(z * nu / sigma2))
}

pub fn ricean_pdf(z: f64, nu: f64, sigma2: f64) -> Result<f64> {
    Ok(ricean_log_pdf(z, nu, sigma2)?.exp())
}

/// `ln[(z / s) exp(-z^2 / 2s)]`.
pub fn rayleigh_log_pdf(z: f64, sigma2: f64) -> Result<f64> {
    check(z, 0.0, sigma2)?;
    Ok(z.ln() - sigma2.ln() - z * z / (2.0 * sigma2))
}

pub fn rayleigh_pdf(z: f64, sigma2: f64) -> Result<f64> {
    Ok(rayleigh_log_pdf(z, sigma2)?.exp())
}

/// Rayleigh CDF `1 - exp(-z^2 / 2s)`.
pub fn rayleigh_cdf(z: f64, sigma2: f64) -> f64 {
    if z <= 0.0 {
        0.0
    } else {
        -(-z * z / (2.0 * sigma2)).exp_m1()
    }
}

/// Log of the Rice/Rayleigh density ratio at one bin,
/// `-nu^2 / 2s + ln I0(z nu / s)`. Finite at `z = 0`.
#[inline]
pub fn log_ratio(z: f64, nu: f64, sigma2: f64) -> f64 {
    let base = -nu * nu / (2.0 * sigma2);
    if z == 0.0 || nu == 0.0 {
        base
    } else {
        base + log_i0(z * nu / sigma2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn zero_noncentrality_is_rayleigh() {
        for i in 0..200 {
            let z = 0.01 + i as f64 * 0.05;
            assert_relative_eq!(
                ricean_pdf(z, 0.0, 1.7).unwrap(),
                rayleigh_pdf(z, 1.7).unwrap(),
                max_relative = 1e-14
            );
        }
    }

    #[test]
    fn ricean_integrates_to_one() {
        for &sigma2 in &[0.01, 0.5, 2.0] {
            for &nu in &[0.0, 0.1, 1.0, 5.0] {
                let s = f64::sqrt(sigma2);
                let upper = nu + 12.0 * s;
                let total = simpson(|z| if z == 0.0 { 0.0 } else { ricean_pdf(z, nu, sigma2).unwrap() }, 0.0, upper, 20_000);
                assert!((total - 1.0).abs() < 1e-6, "nu={nu} s2={sigma2}: {total}");
            }
        }
    }

    #[test]
    fn rayleigh_mode_at_sigma() {
        // d/dz [z exp(-z^2 / 2s)] = 0  =>  z = sqrt(s)
        let s2: f64 = 0.8;
        let mode = s2.sqrt();
        let f = |z: f64| rayleigh_pdf(z, s2).unwrap();
        assert!(f(mode) > f(mode * 0.999));
        assert!(f(mode) > f(mode * 1.001));
    }

    #[test]
    fn ratio_at_zero_magnitude() {
        // I0(0) exp(-nu^2 / 2s)
        assert_relative_eq!(log_ratio(0.0, 0.3, 0.05).exp(), (-0.09f64 / 0.1).exp(), max_relative = 1e-15);
    }

    #[test]
    fn ratio_agrees_with_densities() {
        for &(z, nu, s) in &[(0.3, 0.2, 0.1), (5.0, 4.5, 0.5), (0.01, 2.0, 0.02)] {
            let direct = ricean_log_pdf(z, nu, s).unwrap() - rayleigh_log_pdf(z, s).unwrap();
            assert_relative_eq!(log_ratio(z, nu, s), direct, max_relative = 1e-12, epsilon = 1e-12);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(ricean_pdf(-1.0, 0.0, 1.0).is_err());
        assert!(ricean_pdf(1.0, 0.0, 0.0).is_err());
        assert!(rayleigh_pdf(f64::NAN, 1.0).is_err());
    }
}
