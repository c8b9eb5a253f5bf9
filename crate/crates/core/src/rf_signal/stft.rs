use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::ReceiverParams;
use crate::error::{Error, Result};
use crate::spectrogram::Spectrogram;

/// Complex STFT output, row-major `frames x bins`.
#[derive(Debug, Clone, PartialEq)]
pub struct StftMatrix {
    pub frames: usize,
    pub bins: usize,
    pub data: Vec<Complex64>,
}

impl StftMatrix {
    pub fn get(&self, m: usize, l: usize) -> Complex64 {
        self.data[m * self.bins + l]
    }

    pub fn magnitude(&self, interval: u32) -> Spectrogram {
        Spectrogram::new(
            self.frames,
            self.bins,
            self.data.iter().map(|c| c.norm()).collect(),
            interval,
        )
        .expect("dimensions are consistent by construction")
    }
}

fn transform_frames<'a>(
    frames: impl Iterator<Item = &'a [Complex64]>,
    rx: &ReceiverParams,
) -> Result<StftMatrix> {
    let window = rx.window()?;
    let l = rx.fft_len;
    let fft = FftPlanner::new().plan_fft_forward(l);
    let mut data = Vec::with_capacity(rx.frames * l);
    let mut buf = vec![Complex64::new(0.0, 0.0); l];
    for (m, frame) in frames.enumerate() {
        buf.iter_mut().for_each(|b| *b = Complex64::new(0.0, 0.0));
        // e^{-j n 2 pi l / L} is L-periodic in n, so longer windows fold.
        for (n, (&y, &w)) in frame.iter().zip(&window.coeffs).enumerate() {
            buf[n % l] += y * w;
        }
        fft.process(&mut buf);
        let shift = (m * rx.hop) % l;
        for (k, v) in buf.iter().enumerate() {
            let rot = -2.0 * PI * ((shift * k) % l) as f64 / l as f64;
            data.push(v * Complex64::from_polar(1.0, rot));
        }
    }
    Ok(StftMatrix {
        frames: rx.frames,
        bins: l,
        data,
    })
}

/// `L`-point STFT of one measurement interval:
/// `Y[m][l] = sum_n y[mR + n] w[n] exp(-j (n + mR) 2 pi l / L)`.
pub fn stft(samples: &[Complex64], rx: &ReceiverParams) -> Result<StftMatrix> {
    let need = rx.required_samples();
    if samples.len() < need {
        return Err(Error::DimensionMismatch {
            expected: format!("at least {need} samples"),
            actual: samples.len().to_string(),
        });
    }
    let nw = rx.window_width;
    transform_frames((0..rx.frames).map(|m| &samples[m * rx.hop..m * rx.hop + nw]), rx)
}

/// STFT of pre-framed samples as produced by
/// [`synth_frames`](super::synth_frames).
pub fn stft_frames(frames: &[Complex64], rx: &ReceiverParams) -> Result<StftMatrix> {
    let need = rx.frames * rx.window_width;
    if frames.len() != need {
        return Err(Error::DimensionMismatch {
            expected: format!("{need} framed samples"),
            actual: frames.len().to_string(),
        });
    }
    transform_frames(frames.chunks(rx.window_width), rx)
}

/// Magnitude spectrogram `z[m][l] = |Y[m][l]|` of one interval.
pub fn spectrogram(samples: &[Complex64], rx: &ReceiverParams, interval: u32) -> Result<Spectrogram> {
    Ok(stft(samples, rx)?.magnitude(interval))
}

pub fn spectrogram_from_frames(
    frames: &[Complex64],
    rx: &ReceiverParams,
    interval: u32,
) -> Result<Spectrogram> {
    Ok(stft_frames(frames, rx)?.magnitude(interval))
}
