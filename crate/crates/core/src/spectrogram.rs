use crate::error::{Error, Result};

/// Magnitude measurement of one interval: a row-major `M x L` matrix of
/// non-negative values.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    frames: usize,
    bins: usize,
    mag: Vec<f64>,
    interval: u32,
}

impl Spectrogram {
    pub fn new(frames: usize, bins: usize, mag: Vec<f64>, interval: u32) -> Result<Self> {
        if mag.len() != frames * bins {
            return Err(Error::DimensionMismatch {
                expected: format!("{frames}x{bins} = {} values", frames * bins),
                actual: mag.len().to_string(),
            });
        }
        if let Some(v) = mag.iter().find(|v| !(**v >= 0.0)) {
            return Err(Error::InvalidParameter {
                name: "spectrogram",
                reason: format!("entry {v} is negative or NaN"),
            });
        }
        Ok(Self {
            frames,
            bins,
            mag,
            interval,
        })
    }

    pub fn zeros(frames: usize, bins: usize, interval: u32) -> Self {
        Self {
            frames,
            bins,
            mag: vec![0.0; frames * bins],
            interval,
        }
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn interval(&self) -> u32 {
        self.interval
    }

    pub fn get(&self, m: usize, l: usize) -> f64 {
        self.mag[m * self.bins + l]
    }

    /// Sets one entry; negative values are clamped to zero.
    pub fn set(&mut self, m: usize, l: usize, value: f64) {
        self.mag[m * self.bins + l] = value.max(0.0);
    }

    pub fn values(&self) -> &[f64] {
        &self.mag
    }

    pub fn row(&self, m: usize) -> &[f64] {
        &self.mag[m * self.bins..(m + 1) * self.bins]
    }
}
