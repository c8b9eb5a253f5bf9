use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Tapering window applied to each STFT frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowKind {
    Rectangular,
    Hamming,
    Blackman,
    #[serde(rename = "blackman_harris4")]
    BlackmanHarris4,
}

impl WindowKind {
    /// Main-lobe width in bins.
    pub fn main_lobe_bins(self) -> usize {
        match self {
            WindowKind::Rectangular => 2,
            WindowKind::Hamming => 4,
            WindowKind::Blackman => 6,
            WindowKind::BlackmanHarris4 => 8,
        }
    }

    fn cosine_terms(self) -> &'static [f64] {
        match self {
            WindowKind::Rectangular => &[1.0],
            WindowKind::Hamming => &[0.54, 0.46],
            WindowKind::Blackman => &[0.42, 0.5, 0.08],
            // -92 dB side lobes
            WindowKind::BlackmanHarris4 => &[0.35875, 0.48829, 0.14128, 0.01168],
        }
    }
}

impl fmt::Display for WindowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            WindowKind::Rectangular => "rectangular",
            WindowKind::Hamming => "hamming",
            WindowKind::Blackman => "blackman",
            WindowKind::BlackmanHarris4 => "blackman_harris4",
        };
        f.write_str(s)
    }
}

impl FromStr for WindowKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "rectangular" | "rect" => Ok(WindowKind::Rectangular),
            "hamming" => Ok(WindowKind::Hamming),
            "blackman" => Ok(WindowKind::Blackman),
            "blackman_harris4" | "blackman_harris" | "bh4" => Ok(WindowKind::BlackmanHarris4),
            _ => Err(Error::UnsupportedWindow(s.to_owned())),
        }
    }
}

/// Window coefficients together with the derived quantities the likelihood
/// needs.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub kind: WindowKind,
    pub coeffs: Vec<f64>,
    /// Main-lobe width in bins (`N_m`).
    pub main_lobe_bins: usize,
    /// `sum w[n]^2`.
    pub energy: f64,
}

impl Window {
    pub fn new(kind: WindowKind, width: usize) -> Result<Self> {
        if width < 2 {
            return Err(invalid("window_width", format!("need at least 2 samples, got {width}")));
        }
        let denom = (width - 1) as f64;
        let terms = kind.cosine_terms();
        let coeffs: Vec<f64> = (0..width)
            .map(|n| {
                let x = 2.0 * PI * n as f64 / denom;
                terms
                    .iter()
                    .enumerate()
                    .map(|(k, a)| {
                        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                        sign * a * (k as f64 * x).cos()
                    })
                    .sum()
            })
            .collect();
        let energy = coeffs.iter().map(|w| w * w).sum();
        Ok(Self {
            kind,
            coeffs,
            main_lobe_bins: kind.main_lobe_bins(),
            energy,
        })
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.coeffs.iter().sum()
    }

    /// Window transform `W` at a (possibly fractional) bin offset `delta`
    /// for an `fft_len`-point grid: `sum_n w[n] exp(-j 2 pi delta n / L)`.
    pub fn transform(&self, delta: f64, fft_len: usize) -> Complex64 {
        let step = -2.0 * PI * delta / fft_len as f64;
        self.coeffs
            .iter()
            .enumerate()
            .map(|(n, &w)| Complex64::from_polar(w, step * n as f64))
            .sum()
    }
}

/// Coefficients, main-lobe width and energy for `kind` at width `n_w`.
pub fn window_coefficients(kind: WindowKind, n_w: usize) -> Result<(Vec<f64>, usize, f64)> {
    let w = Window::new(kind, n_w)?;
    Ok((w.coeffs, w.main_lobe_bins, w.energy))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rectangular_four() {
        let (w, nm, e) = window_coefficients(WindowKind::Rectangular, 4).unwrap();
        assert_eq!(w, vec![1.0; 4]);
        assert_eq!(nm, 2);
        assert_eq!(e, 4.0);
    }

    #[test]
    fn main_lobe_table() {
        assert_eq!(WindowKind::Hamming.main_lobe_bins(), 4);
        assert_eq!(WindowKind::Blackman.main_lobe_bins(), 6);
        assert_eq!(Window::new(WindowKind::BlackmanHarris4, 256).unwrap().main_lobe_bins, 8);
    }

    #[test]
    fn hamming_energy_matches_direct_sum() {
        let n = 256;
        let oracle: f64 = (0..n)
            .map(|i| {
                let w = 0.54 - 0.46 * (2.0 * PI * i as f64 / (n - 1) as f64).cos();
                w * w
            })
            .sum();
        let win = Window::new(WindowKind::Hamming, n).unwrap();
        assert_relative_eq!(win.energy, oracle, max_relative = 1e-12);
    }

    #[test]
    fn blackman_harris_is_symmetric_and_near_zero_at_edges() {
        let w = Window::new(WindowKind::BlackmanHarris4, 64).unwrap();
        for i in 0..32 {
            assert_relative_eq!(w.coeffs[i], w.coeffs[63 - i], epsilon = 1e-15);
        }
        assert!(w.coeffs[0].abs() < 1e-4);
    }

    #[test]
    fn transform_at_zero_is_coefficient_sum() {
        let w = Window::new(WindowKind::Hamming, 100).unwrap();
        assert_relative_eq!(w.transform(0.0, 128).re, w.sum(), max_relative = 1e-12);
    }

    #[test]
    fn rejects_degenerate_width_and_unknown_names() {
        assert!(Window::new(WindowKind::Rectangular, 1).is_err());
        assert!(matches!("kaiser".parse::<WindowKind>(), Err(Error::UnsupportedWindow(_))));
        assert_eq!("blackman-harris4".parse::<WindowKind>().unwrap(), WindowKind::BlackmanHarris4);
    }
}
