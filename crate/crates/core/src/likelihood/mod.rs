//! Separable track-before-detect likelihood.
//!
//! Each object only influences the two frames inside its pulse and the
//! main-lobe bins around its tone. When those influence regions are disjoint
//! the multi-object likelihood factorizes into per-object Rice/Rayleigh
//! ratios over the object's own region.

mod bessel;
mod rice;

use std::collections::BTreeMap;

pub use bessel::{i0, i0e, log_i0};
pub use rice::{log_ratio, rayleigh_cdf, rayleigh_log_pdf, rayleigh_pdf, ricean_log_pdf, ricean_pdf};

use crate::error::{Error, Result};
use crate::rf_signal::{received_magnitude, time_frame, ReceiverParams, TransmitterParams, TxTable, Window};
use crate::spectrogram::Spectrogram;
use crate::types::{Label, ObjectState, Particle, UavState};

/// Time-frequency cells to which an object contributes signal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InfluenceRegion {
    /// `{m_tau, m_tau + 1}`, minus frames past the end of the interval.
    pub frames: Vec<usize>,
    pub bins: Vec<usize>,
}

impl InfluenceRegion {
    pub fn is_empty(&self) -> bool {
        self.frames.is_empty() || self.bins.is_empty()
    }

    pub fn contains(&self, m: usize, l: usize) -> bool {
        self.frames.contains(&m) && self.bins.contains(&l)
    }

    pub fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.frames
            .iter()
            .flat_map(move |&m| self.bins.iter().map(move |&l| (m, l)))
    }

    pub fn overlaps(&self, other: &InfluenceRegion) -> bool {
        self.frames.iter().any(|m| other.frames.contains(m))
            && self.bins.iter().any(|l| other.bins.contains(l))
    }
}

/// Frequency-domain noise covariance `E_w Sigma_eta / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseFreqCov(pub f64);

impl NoiseFreqCov {
    pub fn new(window: &Window, noise_cov: f64) -> Self {
        NoiseFreqCov(window.energy * noise_cov / 2.0)
    }
}

#[derive(Debug, Clone)]
struct LabelSpectrum {
    tx: TransmitterParams,
    bins: Vec<usize>,
    /// `|W(l - L f / f_s)|` for each entry of `bins`.
    window_gain: Vec<f64>,
}

/// `N_m` bins nearest the tone's fractional bin `L f / f_s`, wrapped modulo
/// `L`. Empty for a tone outside `[0, f_s)`.
fn tone_bins(tx: &TransmitterParams, rx: &ReceiverParams, window: &Window) -> (Vec<usize>, Vec<f64>) {
    if !(tx.baseband_freq >= 0.0 && tx.baseband_freq < rx.sample_rate) {
        return (Vec::new(), Vec::new());
    }
    let l = rx.fft_len as i64;
    let centre = rx.fft_len as f64 * tx.baseband_freq / rx.sample_rate;
    let width = window.main_lobe_bins.min(rx.fft_len);
    let start = (centre - (width as f64 - 1.0) / 2.0).round() as i64;
    (start..start + width as i64)
        .map(|b| {
            let bin = b.rem_euclid(l) as usize;
            (bin, window.transform(b as f64 - centre, rx.fft_len).norm())
        })
        .unzip()
}

/// Precomputed measurement model for a fixed receiver and transmitter table.
#[derive(Debug, Clone)]
pub struct LikelihoodModel {
    rx: ReceiverParams,
    window: Window,
    noise: NoiseFreqCov,
    labels: BTreeMap<Label, LabelSpectrum>,
}

impl LikelihoodModel {
    pub fn new(rx: &ReceiverParams, tx_table: &TxTable) -> Result<Self> {
        rx.validate()?;
        let window = rx.window()?;
        let noise = NoiseFreqCov::new(&window, rx.noise_cov);
        let labels = tx_table
            .iter()
            .map(|(&label, tx)| {
                tx.validate()?;
                let (bins, window_gain) = tone_bins(tx, rx, &window);
                Ok((
                    label,
                    LabelSpectrum {
                        tx: *tx,
                        bins,
                        window_gain,
                    },
                ))
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            rx: rx.clone(),
            window,
            noise,
            labels,
        })
    }

    pub fn receiver(&self) -> &ReceiverParams {
        &self.rx
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn noise(&self) -> NoiseFreqCov {
        self.noise
    }

    pub fn labels(&self) -> impl Iterator<Item = Label> + '_ {
        self.labels.keys().copied()
    }

    pub fn transmitter(&self, label: Label) -> Result<&TransmitterParams> {
        self.spectrum(label).map(|s| &s.tx)
    }

    fn spectrum(&self, label: Label) -> Result<&LabelSpectrum> {
        self.labels.get(&label).ok_or(Error::UnknownLabel(label))
    }

    /// Frames `{m_tau, m_tau + 1}` that lie inside the interval; the count
    /// is below two only when the pulse runs past the last frame.
    fn frames_for(&self, tau: f64, period: f64) -> Result<([usize; 2], usize)> {
        let m = time_frame(tau, period, &self.rx)?;
        let n = [m, m + 1].iter().filter(|&&f| f < self.rx.frames).count();
        Ok(([m, m + 1], n))
    }

    pub fn influence_region(&self, x: &ObjectState) -> Result<InfluenceRegion> {
        let spec = self.spectrum(x.label)?;
        let (frames, n) = self.frames_for(x.tau, spec.tx.pulse_period)?;
        Ok(InfluenceRegion {
            frames: frames[..n].to_vec(),
            bins: spec.bins.clone(),
        })
    }

    /// `|G(m, l)(x)|`: `gamma |W(l - l_lambda)|` inside the influence region,
    /// zero elsewhere.
    pub fn expected_bin_magnitude(&self, x: &ObjectState, uav: &UavState, m: usize, l: usize) -> Result<f64> {
        let spec = self.spectrum(x.label)?;
        let (frames, n) = self.frames_for(x.tau, spec.tx.pulse_period)?;
        if !frames[..n].contains(&m) {
            return Ok(0.0);
        }
        match spec.bins.iter().position(|&b| b == l) {
            Some(i) => Ok(received_magnitude(x, uav, &self.rx, &spec.tx)? * spec.window_gain[i]),
            None => Ok(0.0),
        }
    }

    fn check_dims(&self, z: &Spectrogram) -> Result<()> {
        if z.frames() != self.rx.frames || z.bins() != self.rx.fft_len {
            return Err(Error::DimensionMismatch {
                expected: format!("{}x{}", self.rx.frames, self.rx.fft_len),
                actual: format!("{}x{}", z.frames(), z.bins()),
            });
        }
        Ok(())
    }

    /// `ln g_z(x)`: sum over the influence region of the log Rice/Rayleigh
    /// ratio.
    pub fn log_likelihood(&self, x: &ObjectState, z: &Spectrogram, uav: &UavState) -> Result<f64> {
        self.check_dims(z)?;
        self.particle_log_likelihood(x.label, &x.particle(), z, uav)
    }

    /// Same as [`log_likelihood`](Self::log_likelihood) for an unlabeled
    /// particle; `z` must already match the receiver layout.
    pub fn particle_log_likelihood(
        &self,
        label: Label,
        p: &Particle,
        z: &Spectrogram,
        uav: &UavState,
    ) -> Result<f64> {
        let spec = self.spectrum(label)?;
        if spec.bins.is_empty() {
            return Ok(0.0);
        }
        let (frames, n) = self.frames_for(p.tau, spec.tx.pulse_period)?;
        if n == 0 {
            return Ok(0.0);
        }
        let gamma = received_magnitude(&ObjectState::from_particle(p, label), uav, &self.rx, &spec.tx)?;
        let s = self.noise.0;
        let mut acc = 0.0;
        for &m in &frames[..n] {
            let row = z.row(m);
            for (&l, &wg) in spec.bins.iter().zip(&spec.window_gain) {
                acc += log_ratio(row[l], gamma * wg, s);
            }
        }
        Ok(acc)
    }

    /// `ln g(z | X)` up to the `X`-independent Rayleigh normalizer. Fails if
    /// two influence regions share a cell.
    pub fn multi_object_log_likelihood(&self, xs: &[ObjectState], z: &Spectrogram, uav: &UavState) -> Result<f64> {
        self.check_dims(z)?;
        let regions = xs
            .iter()
            .map(|x| self.influence_region(x))
            .collect::<Result<Vec<_>>>()?;
        for i in 0..regions.len() {
            for j in i + 1..regions.len() {
                if regions[i].overlaps(&regions[j]) {
                    return Err(Error::OverlappingRegions(xs[i].label, xs[j].label));
                }
            }
        }
        xs.iter().map(|x| self.log_likelihood(x, z, uav)).sum()
    }

    /// Noise-free magnitude measurement generated by `xs` at `uav`.
    pub fn ideal_measurement(&self, xs: &[ObjectState], uav: &UavState, interval: u32) -> Result<Spectrogram> {
        let mut z = Spectrogram::zeros(self.rx.frames, self.rx.fft_len, interval);
        for x in xs {
            let spec = self.spectrum(x.label)?;
            let (frames, n) = self.frames_for(x.tau, spec.tx.pulse_period)?;
            let gamma = received_magnitude(x, uav, &self.rx, &spec.tx)?;
            for &m in &frames[..n] {
                for (&l, &wg) in spec.bins.iter().zip(&spec.window_gain) {
                    let v = z.get(m, l) + gamma * wg;
                    z.set(m, l, v);
                }
            }
        }
        Ok(z)
    }
}

/// `|G(m, l)(x)|` for a single transmitter.
pub fn expected_bin_magnitude(
    x: &ObjectState,
    uav: &UavState,
    cell: (usize, usize),
    rx: &ReceiverParams,
    tx: &TransmitterParams,
) -> Result<f64> {
    let table = TxTable::from([(x.label, *tx)]);
    LikelihoodModel::new(rx, &table)?.expected_bin_magnitude(x, uav, cell.0, cell.1)
}

/// `ln g_z(x)` for a single transmitter.
pub fn single_object_log_likelihood(
    x: &ObjectState,
    z: &Spectrogram,
    uav: &UavState,
    rx: &ReceiverParams,
    tx: &TransmitterParams,
) -> Result<f64> {
    let table = TxTable::from([(x.label, *tx)]);
    LikelihoodModel::new(rx, &table)?.log_likelihood(x, z, uav)
}

#[cfg(test)]
mod tests;
