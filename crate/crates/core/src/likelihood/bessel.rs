//! Modified Bessel function of the first kind, order zero, in log form.

const SERIES_LIMIT: f64 = 30.0;

/// `ln I0(x)`. Power series below 30, Hankel asymptotic expansion above;
/// both are accurate to a few ulp in their ranges and never overflow.
pub fn log_i0(x: f64) -> f64 {
    let x = x.abs();
    if x <= SERIES_LIMIT {
        series(x).ln()
    } else {
        x - 0.5 * (2.0 * std::f64::consts::PI * x).ln() + asymptotic_tail(x).ln()
    }
}

/// `I0(x)`; overflows to infinity past about 713.
pub fn i0(x: f64) -> f64 {
    let x = x.abs();
    if x <= SERIES_LIMIT {
        series(x)
    } else {
        log_i0(x).exp()
    }
}

/// Exponentially scaled `exp(-|x|) I0(x)`.
pub fn i0e(x: f64) -> f64 {
    (log_i0(x) - x.abs()).exp()
}

fn series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        term *= q / (k * k);
        sum += term;
        if term < sum * 1e-17 {
            return sum;
        }
        k += 1.0;
    }
}

// 1 + sum_k ((2k-1)!!)^2 / (k! (8x)^k)
fn asymptotic_tail(x: f64) -> f64 {
    let inv = 1.0 / (8.0 * x);
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..64 {
        let odd = (2 * k - 1) as f64;
        let next = term * odd * odd * inv / k as f64;
        if next.abs() > term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// exp(-x) I0(x) = (1/pi) int_0^pi exp(x (cos t - 1)) dt; the integrand
    /// is smooth and periodic, so the trapezoid rule converges spectrally.
    fn i0e_quadrature(x: f64) -> f64 {
        let n = 40_000;
        let h = PI / n as f64;
        let f = |t: f64| (x * (t.cos() - 1.0)).exp();
        let inner: f64 = (1..n).map(|i| f(i as f64 * h)).sum();
        (inner + 0.5 * (f(0.0) + f(PI))) * h / PI
    }

    #[test]
    fn small_arguments() {
        assert_eq!(i0(0.0), 1.0);
        assert_eq!(log_i0(0.0), 0.0);
        assert!((i0(1.0) - 1.266_065_877_752_008_4).abs() < 1e-15);
        assert!((i0(-2.5) - i0(2.5)).abs() == 0.0);
    }

    #[test]
    fn matches_quadrature_over_range() {
        let mut x = 0.0;
        while x <= 500.0 {
            let a = i0e(x);
            let b = i0e_quadrature(x);
            assert!(((a - b) / b).abs() < 1e-10, "x={x}: {a} vs {b}");
            x += if x < 40.0 { 0.37 } else { 3.1 };
        }
    }

    #[test]
    fn continuous_across_switch() {
        let below = log_i0(SERIES_LIMIT);
        let above = SERIES_LIMIT - 0.5 * (2.0 * PI * SERIES_LIMIT).ln() + asymptotic_tail(SERIES_LIMIT).ln();
        assert!(((below - above) / below).abs() < 1e-14);
    }

    #[test]
    fn large_arguments_stay_finite() {
        assert!(log_i0(1e6).is_finite());
        assert!((log_i0(1e6) - (1e6 - 0.5 * (2.0 * PI * 1e6).ln())).abs() < 1e-6);
    }
}
