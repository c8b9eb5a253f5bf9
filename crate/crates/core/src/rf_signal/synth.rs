use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{received_magnitude, received_phase, samples_per_interval, ReceiverParams, TxTable};
use crate::error::{invalid, Error, Result};
use crate::types::{ObjectState, UavState};

struct Tone {
    amplitude: f64,
    phase: f64,
    /// Radians per sample.
    omega: f64,
    tau: f64,
    period: f64,
    width: f64,
}

impl Tone {
    fn active(&self, t: f64) -> bool {
        (t - self.tau).rem_euclid(self.period) < self.width
    }

    fn sample(&self, n: usize) -> Complex64 {
        Complex64::from_polar(self.amplitude, self.phase + self.omega * n as f64)
    }
}

fn tones(
    objects: &[ObjectState],
    uav: &UavState,
    rx: &ReceiverParams,
    tx_table: &TxTable,
) -> Result<Vec<Tone>> {
    objects
        .iter()
        .map(|obj| {
            let tx = tx_table.get(&obj.label).ok_or(Error::UnknownLabel(obj.label))?;
            if !obj.kin.iter().all(|v| v.is_finite()) || !obj.tau.is_finite() {
                return Err(invalid("object", "non-finite state"));
            }
            Ok(Tone {
                amplitude: received_magnitude(obj, uav, rx, tx)?,
                phase: received_phase(obj, uav, rx, tx),
                omega: 2.0 * PI * tx.baseband_freq / rx.sample_rate,
                tau: obj.tau,
                period: tx.pulse_period,
                width: tx.pulse_width,
            })
        })
        .collect()
}

fn noise<R: Rng + ?Sized>(rng: &mut R, std: f64) -> Complex64 {
    if std == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let i: f64 = rng.sample(StandardNormal);
    let q: f64 = rng.sample(StandardNormal);
    Complex64::new(std * i, std * q)
}

fn sample_at<R: Rng + ?Sized>(tones: &[Tone], n: usize, fs: f64, std: f64, rng: &mut R) -> Complex64 {
    let t = n as f64 / fs;
    let signal: Complex64 = tones.iter().filter(|tone| tone.active(t)).map(|tone| tone.sample(n)).sum();
    signal + noise(rng, std)
}

/// Synthesizes the complex baseband samples of one measurement interval of
/// length `interval` seconds: the on-off keyed tones of all `objects` as
/// seen from `uav`, plus circular Gaussian noise with per-component
/// variance `Sigma_eta / 2`.
pub fn synth_baseband<R: Rng + ?Sized>(
    objects: &[ObjectState],
    uav: &UavState,
    interval: f64,
    rx: &ReceiverParams,
    tx_table: &TxTable,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    if !(interval > 0.0 && interval.is_finite()) {
        return Err(invalid("interval", "must be a positive duration"));
    }
    let tones = tones(objects, uav, rx, tx_table)?;
    let std = (rx.noise_cov / 2.0).sqrt();
    let n = samples_per_interval(interval, rx.sample_rate);
    Ok((0..n)
        .map(|i| sample_at(&tones, i, rx.sample_rate, std, rng))
        .collect())
}

/// Synthesizes only the samples that fall inside STFT frames, frame-major
/// (`frames * window_width` values). Frames never overlap, so the result
/// has the same distribution as framing the output of [`synth_baseband`].
pub fn synth_frames<R: Rng + ?Sized>(
    objects: &[ObjectState],
    uav: &UavState,
    rx: &ReceiverParams,
    tx_table: &TxTable,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    let tones = tones(objects, uav, rx, tx_table)?;
    let std = (rx.noise_cov / 2.0).sqrt();
    let mut out = Vec::with_capacity(rx.frames * rx.window_width);
    for m in 0..rx.frames {
        let base = m * rx.hop;
        for i in 0..rx.window_width {
            out.push(sample_at(&tones, base + i, rx.sample_rate, std, rng));
        }
    }
    Ok(out)
}
