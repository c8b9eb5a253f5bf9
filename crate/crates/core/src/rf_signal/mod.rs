//! Received-signal synthesis and time-frequency measurement.
//!
//! Objects emit on-off keyed tones; the UAV receives their sum plus complex
//! Gaussian noise at baseband and converts each measurement interval into an
//! `M x L` magnitude spectrogram via an STFT.

mod antenna;
mod io;
mod stft;
mod synth;
mod window;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use antenna::{antenna_gain, relative_bearing, AntennaPattern};
pub use io::{read_spectrogram, write_spectrogram, write_spectrogram_csv};
pub use stft::{spectrogram, spectrogram_from_frames, stft, stft_frames, StftMatrix};
pub use synth::{synth_baseband, synth_frames};
pub use window::{window_coefficients, Window, WindowKind};

use crate::error::{invalid, Error, Result};
use crate::types::{Label, ObjectState, UavState};

/// Propagation speed used for the received phase.
pub const SPEED_OF_LIGHT: f64 = 3.0e8;

/// Converts a gain in decibels to a linear factor (`10^(dB/10)`).
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// On-off keyed transmitter attached to one object.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransmitterParams {
    /// Signal amplitude at the reference distance (V).
    pub amplitude: f64,
    /// Baseband frequency (Hz).
    pub baseband_freq: f64,
    /// Initial phase (rad).
    #[serde(default)]
    pub phase: f64,
    /// Pulse period `T0` (s).
    pub pulse_period: f64,
    /// Pulse width `Pw` (s).
    pub pulse_width: f64,
    /// Nominal pulse offset within the period (s).
    #[serde(default)]
    pub offset: f64,
}

impl TransmitterParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude > 0.0 && self.amplitude.is_finite()) {
            return Err(invalid("amplitude", "must be positive"));
        }
        if !(self.pulse_width > 0.0 && self.pulse_width < self.pulse_period) {
            return Err(invalid("pulse_width", "need 0 < Pw < T0"));
        }
        if !(self.offset >= 0.0 && self.offset < self.pulse_period) {
            return Err(invalid("offset", "need 0 <= tau < T0"));
        }
        if !self.baseband_freq.is_finite() || !self.phase.is_finite() {
            return Err(invalid("baseband_freq", "must be finite"));
        }
        Ok(())
    }
}

/// Transmitters keyed by their frequency label.
pub type TxTable = BTreeMap<Label, TransmitterParams>;

/// Receiver chain: gain, propagation, noise and STFT layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReceiverParams {
    pub center_freq: f64,
    pub sample_rate: f64,
    /// Linear receiver gain `G_r`.
    pub receiver_gain: f64,
    pub ref_distance: f64,
    pub path_loss: f64,
    /// Complex baseband noise covariance `Sigma_eta` (V^2).
    pub noise_cov: f64,
    pub window_kind: WindowKind,
    pub window_width: usize,
    pub fft_len: usize,
    pub hop: usize,
    /// Number of STFT frames per measurement interval (`M`).
    pub frames: usize,
    /// Height of the transmitters above ground (m).
    pub target_height: f64,
    pub antenna: AntennaPattern,
}

impl ReceiverParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.sample_rate > 0.0) {
            return Err(invalid("sample_rate", "must be positive"));
        }
        if !(self.receiver_gain > 0.0) {
            return Err(invalid("receiver_gain", "must be positive"));
        }
        if !(self.ref_distance > 0.0) {
            return Err(invalid("ref_distance", "must be positive"));
        }
        if !(2.0..=4.0).contains(&self.path_loss) {
            return Err(invalid("path_loss", format!("{} outside [2, 4]", self.path_loss)));
        }
        if !(self.noise_cov >= 0.0 && self.noise_cov.is_finite()) {
            return Err(invalid("noise_cov", "must be non-negative"));
        }
        if self.window_width < 2 || self.fft_len == 0 || self.hop == 0 || self.frames == 0 {
            return Err(invalid("stft", "window width, FFT length, hop and frame count must be positive"));
        }
        if self.window_width >= self.hop {
            return Err(invalid(
                "window_width",
                format!("N_w = {} must be below the hop R = {}", self.window_width, self.hop),
            ));
        }
        self.antenna.validate()
    }

    /// Minimum number of samples the STFT layout consumes.
    pub fn required_samples(&self) -> usize {
        (self.frames - 1) * self.hop + self.window_width
    }

    pub fn window(&self) -> Result<Window> {
        Window::new(self.window_kind, self.window_width)
    }

    /// Receiver noise covariance in the frequency domain, `E_w * Sigma_eta / 2`.
    pub fn noise_freq_cov(&self) -> Result<f64> {
        Ok(self.window()?.energy * self.noise_cov / 2.0)
    }
}

/// Hop size that places two whole frames inside every pulse: `Pw * f_s / 2`.
pub fn hop_for_pulse_width(pulse_width: f64, sample_rate: f64) -> usize {
    (pulse_width * sample_rate / 2.0).floor() as usize
}

/// Samples in one measurement interval, `ceil(T0 * f_s)`.
pub fn samples_per_interval(pulse_period: f64, sample_rate: f64) -> usize {
    (pulse_period * sample_rate).ceil() as usize
}

/// Number of complete STFT frames inside one interval.
pub fn frame_count(pulse_period: f64, sample_rate: f64, window_width: usize, hop: usize) -> usize {
    let n = samples_per_interval(pulse_period, sample_rate);
    if n < window_width {
        0
    } else {
        (n - window_width) / hop + 1
    }
}

/// Frequency bin `floor(L f / f_s)` of a baseband tone.
pub fn freq_bin(freq: f64, rx: &ReceiverParams) -> Result<usize> {
    if !(freq >= 0.0 && freq < rx.sample_rate) {
        return Err(Error::OutOfRange {
            value: freq,
            min: 0.0,
            max: rx.sample_rate,
        });
    }
    Ok((rx.fft_len as f64 * freq / rx.sample_rate).floor() as usize)
}

/// Frame index `ceil(tau f_s / R)` of the first frame inside a pulse.
pub fn time_frame(tau: f64, pulse_period: f64, rx: &ReceiverParams) -> Result<usize> {
    if !(tau >= 0.0 && tau < pulse_period) {
        return Err(Error::OutOfRange {
            value: tau,
            min: 0.0,
            max: pulse_period,
        });
    }
    Ok((tau * rx.sample_rate / rx.hop as f64).ceil() as usize)
}

fn slant_range(object: &ObjectState, uav: &UavState, target_height: f64) -> f64 {
    let dx = object.kin[0] - uav.position[0];
    let dy = object.kin[2] - uav.position[1];
    let dz = target_height - uav.position[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// Received magnitude `A G_r G_a (d0 / d)^kappa`.
pub fn received_magnitude(
    object: &ObjectState,
    uav: &UavState,
    rx: &ReceiverParams,
    tx: &TransmitterParams,
) -> Result<f64> {
    let d = slant_range(object, uav, rx.target_height);
    if d < rx.ref_distance {
        return Err(Error::InsideReferenceDistance {
            distance: d,
            reference: rx.ref_distance,
        });
    }
    let ga = antenna_gain(&rx.antenna, object.position(), rx.target_height, uav)?;
    Ok(tx.amplitude * rx.receiver_gain * ga * (rx.ref_distance / d).powf(rx.path_loss))
}

/// Received phase `phi - (f_c + f) d / c`.
pub fn received_phase(
    object: &ObjectState,
    uav: &UavState,
    rx: &ReceiverParams,
    tx: &TransmitterParams,
) -> f64 {
    let d = slant_range(object, uav, rx.target_height);
    tx.phase - (rx.center_freq + tx.baseband_freq) * d / SPEED_OF_LIGHT
}

/// Main-lobe width in Hz, `N_m f_s / N_w`.
pub fn main_lobe_width_hz(main_lobe_bins: usize, sample_rate: f64, window_width: usize) -> f64 {
    main_lobe_bins as f64 * sample_rate / window_width as f64
}

/// One line of a resolvability diagnostic.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvabilityCheck {
    pub name: &'static str,
    pub passed: bool,
    /// Slack of the condition; negative when violated.
    pub margin: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvabilityReport {
    pub checks: Vec<ResolvabilityCheck>,
    /// Smallest pairwise frequency separation (Hz); infinite for a single
    /// transmitter.
    pub min_separation: f64,
    /// Smallest window width satisfying the main-lobe criterion.
    pub required_window_width: Option<usize>,
}

impl ResolvabilityReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&ResolvabilityCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Checks the conditions under which per-object influence regions stay
/// disjoint and every pulse contains two whole frames.
pub fn check_resolvability(tx_table: &TxTable, rx: &ReceiverParams) -> ResolvabilityReport {
    let fs = rx.sample_rate;
    let nm = rx.window_kind.main_lobe_bins();
    let freqs: Vec<f64> = tx_table.values().map(|t| t.baseband_freq).collect();
    let mut checks = Vec::new();

    let f_max = freqs.iter().cloned().fold(0.0, f64::max);
    checks.push(ResolvabilityCheck {
        name: "sample_rate",
        passed: fs > 2.0 * f_max,
        margin: fs - 2.0 * f_max,
        detail: format!("f_s = {fs} Hz vs 2 max f = {} Hz", 2.0 * f_max),
    });

    checks.push(ResolvabilityCheck {
        name: "window_below_hop",
        passed: rx.window_width < rx.hop,
        margin: rx.hop as f64 - rx.window_width as f64,
        detail: format!("N_w = {} vs R = {}", rx.window_width, rx.hop),
    });

    for (label, tx) in tx_table {
        let half_pulse = tx.pulse_width * fs / 2.0;
        checks.push(ResolvabilityCheck {
            name: "hop_within_half_pulse",
            passed: rx.hop as f64 <= half_pulse + 1e-9,
            margin: half_pulse - rx.hop as f64,
            detail: format!("label {label}: R = {} vs Pw f_s / 2 = {half_pulse}", rx.hop),
        });
        let cycle = if tx.baseband_freq > 0.0 {
            fs / tx.baseband_freq
        } else {
            f64::INFINITY
        };
        checks.push(ResolvabilityCheck {
            name: "carrier_cycle",
            passed: cycle <= rx.window_width as f64,
            margin: rx.window_width as f64 - cycle,
            detail: format!("label {label}: f_s / f = {cycle:.3} samples vs N_w = {}", rx.window_width),
        });
    }

    let mut sorted = freqs.clone();
    sorted.sort_by(f64::total_cmp);
    let min_separation = sorted
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    let width_hz = main_lobe_width_hz(nm, fs, rx.window_width);
    let required_window_width = min_separation
        .is_finite()
        .then(|| (nm as f64 * fs / min_separation).ceil() as usize);
    checks.push(ResolvabilityCheck {
        name: "main_lobe_separation",
        passed: width_hz <= min_separation,
        margin: min_separation - width_hz,
        detail: format!(
            "main-lobe width {width_hz:.2} Hz vs min separation {min_separation:.2} Hz (need N_w >= {})",
            required_window_width.map_or_else(|| "-".to_string(), |n| n.to_string())
        ),
    });

    ResolvabilityReport {
        checks,
        min_separation,
        required_window_width,
    }
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;

    /// Receiver of the reference experiment (72 dB gain, 2 MHz, BH4 x 256).
    pub fn reference_receiver() -> ReceiverParams {
        let hop = hop_for_pulse_width(0.018, 2.0e6);
        ReceiverParams {
            center_freq: 150.0e6,
            sample_rate: 2.0e6,
            receiver_gain: db_to_linear(72.0),
            ref_distance: 1.0,
            path_loss: 3.1068,
            noise_cov: 0.025 * 0.025,
            window_kind: WindowKind::BlackmanHarris4,
            window_width: 256,
            fft_len: 256,
            hop,
            frames: frame_count(1.0, 2.0e6, 256, hop),
            target_height: 1.0,
            antenna: AntennaPattern::Isotropic,
        }
    }

    pub fn reference_table() -> TxTable {
        [131e3, 201e3, 401e3, 841e3]
            .iter()
            .zip([0.1, 0.2, 0.3, 0.4])
            .enumerate()
            .map(|(i, (&f, tau))| {
                (
                    Label(i as u32),
                    TransmitterParams {
                        amplitude: 0.0059,
                        baseband_freq: f,
                        phase: 0.0,
                        pulse_period: 1.0,
                        pulse_width: 0.018,
                        offset: tau,
                    },
                )
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::test_support::*;
    use super::*;
    use crate::types::{Kinematics, Mode};
    use approx::assert_relative_eq;

    fn at(x: f64, y: f64) -> ObjectState {
        ObjectState::new(Kinematics::new(x, 0.0, y, 0.0), Mode::Wandering, 0.1, Label(0))
    }

    fn plain_rx() -> ReceiverParams {
        ReceiverParams {
            receiver_gain: 1.0,
            target_height: 0.0,
            ..reference_receiver()
        }
    }

    fn tx(a: f64) -> TransmitterParams {
        TransmitterParams {
            amplitude: a,
            ..reference_table()[&Label(0)]
        }
    }

    #[test]
    fn magnitude_at_reference_distance_is_amplitude() {
        let uav = UavState::new(0.0, 0.0, 0.0, 0.0);
        let g = received_magnitude(&at(1.0, 0.0), &uav, &plain_rx(), &tx(0.5)).unwrap();
        assert_relative_eq!(g, 0.5, max_relative = 1e-15);
    }

    #[test]
    fn inverse_square_at_twice_reference() {
        let uav = UavState::new(0.0, 0.0, 0.0, 0.0);
        let rx = ReceiverParams {
            path_loss: 2.0,
            ..plain_rx()
        };
        let g = received_magnitude(&at(2.0, 0.0), &uav, &rx, &tx(1.0)).unwrap();
        assert_relative_eq!(g, 0.25, max_relative = 1e-15);
    }

    #[test]
    fn reference_values_match_scalar_formula() {
        let uav = UavState::new(0.0, 0.0, 0.0, 0.0);
        let rx = ReceiverParams {
            receiver_gain: 3981.071705534973,
            ..plain_rx()
        };
        let g = received_magnitude(&at(120.0, 0.0), &uav, &rx, &tx(0.0059)).unwrap();
        // 0.0059 * 3981.0717 * 120^-3.1068
        let oracle = 0.0059 * 3981.071705534973 * (-3.1068 * 120f64.ln()).exp();
        assert_relative_eq!(g, oracle, max_relative = 1e-12);
        assert_relative_eq!(g, 8.1518e-6, max_relative = 1e-4);
    }

    #[test]
    fn inside_reference_distance_errors() {
        let uav = UavState::new(0.0, 0.0, 0.0, 0.0);
        let rx = ReceiverParams {
            ref_distance: 5.0,
            ..plain_rx()
        };
        assert!(matches!(
            received_magnitude(&at(3.0, 0.0), &uav, &rx, &tx(1.0)),
            Err(Error::InsideReferenceDistance { .. })
        ));
    }

    #[test]
    fn magnitude_decreases_with_distance() {
        let uav = UavState::new(0.0, 0.0, 30.0, 0.7);
        let rx = ReceiverParams {
            antenna: AntennaPattern::default(),
            ..reference_receiver()
        };
        let mut prev = f64::INFINITY;
        for i in 1..200 {
            let r = 5.0 * i as f64;
            let g = received_magnitude(&at(r * 0.7f64.cos(), r * 0.7f64.sin()), &uav, &rx, &tx(0.0059)).unwrap();
            assert!(g < prev);
            prev = g;
        }
    }

    #[test]
    fn bin_and_frame_indices() {
        let rx = reference_receiver();
        assert_eq!(freq_bin(131e3, &rx).unwrap(), 16);
        assert_eq!(time_frame(0.0, 1.0, &rx).unwrap(), 0);
        assert_eq!(hop_for_pulse_width(0.018, 2.0e6), 18000);
        assert_eq!(rx.hop, 18000);
        assert!(freq_bin(2.0e6, &rx).is_err());
        assert!(freq_bin(-1.0, &rx).is_err());
        assert!(time_frame(1.0, 1.0, &rx).is_err());
    }

    #[test]
    fn frame_count_uses_whole_frames() {
        // floor((2e6 - 256) / 18000) + 1
        assert_eq!(frame_count(1.0, 2.0e6, 256, 18000), 112);
        let rx = reference_receiver();
        assert!(rx.required_samples() <= samples_per_interval(1.0, 2.0e6));
    }

    fn fig_rx(n_w: usize) -> ReceiverParams {
        ReceiverParams {
            sample_rate: 1000.0,
            window_width: n_w,
            fft_len: 256,
            hop: 175,
            frames: 4,
            ..reference_receiver()
        }
    }

    fn fig_table() -> TxTable {
        let base = reference_table()[&Label(0)];
        [(Label(0), 100.0), (Label(1), 160.0)]
            .into_iter()
            .map(|(l, f)| {
                (
                    l,
                    TransmitterParams {
                        baseband_freq: f,
                        pulse_width: 0.35,
                        ..base
                    },
                )
            })
            .collect()
    }

    #[test]
    fn main_lobe_criterion_passes_with_wide_window() {
        let report = check_resolvability(&fig_table(), &fig_rx(150));
        let c = report.check("main_lobe_separation").unwrap();
        assert!(c.passed);
        assert_relative_eq!(main_lobe_width_hz(8, 1000.0, 150), 53.333333, max_relative = 1e-6);
        assert_relative_eq!(c.margin, 60.0 - 53.333333333, max_relative = 1e-6);
    }

    #[test]
    fn main_lobe_criterion_fails_with_narrow_window() {
        let report = check_resolvability(&fig_table(), &fig_rx(42));
        let c = report.check("main_lobe_separation").unwrap();
        assert!(!c.passed);
        assert_relative_eq!(main_lobe_width_hz(8, 1000.0, 42), 190.476190, max_relative = 1e-6);
        assert!(!report.passed());
    }

    #[test]
    fn reference_configuration_is_resolvable() {
        let report = check_resolvability(&reference_table(), &reference_receiver());
        assert_eq!(report.min_separation, 70e3);
        assert_eq!(report.required_window_width, Some(229));
        assert!(report.passed(), "{report:#?}");
    }
}
