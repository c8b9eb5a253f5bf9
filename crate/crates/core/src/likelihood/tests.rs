use super::*;
use crate::rf_signal::test_support::{reference_receiver, reference_table};
use crate::rf_signal::{spectrogram_from_frames, stft_frames, synth_frames, AntennaPattern, WindowKind};
use crate::rng::{stream, Stream};
use crate::types::{Kinematics, Mode};
use approx::assert_relative_eq;
use rand::Rng;

fn small_rx() -> ReceiverParams {
    ReceiverParams {
        center_freq: 150e6,
        sample_rate: 3200.0,
        receiver_gain: 1.0,
        ref_distance: 1.0,
        path_loss: 2.0,
        noise_cov: 0.02,
        window_kind: WindowKind::BlackmanHarris4,
        window_width: 32,
        fft_len: 32,
        hop: 390,
        frames: 8,
        target_height: 0.0,
        antenna: AntennaPattern::Isotropic,
    }
}

fn small_table() -> TxTable {
    let base = TransmitterParams {
        amplitude: 40.0,
        baseband_freq: 500.0,
        phase: 0.0,
        pulse_period: 1.0,
        pulse_width: 2.0 * 390.0 / 3200.0,
        offset: 0.0,
    };
    TxTable::from([
        (Label(0), base),
        (
            Label(1),
            TransmitterParams {
                baseband_freq: 1700.0,
                ..base
            },
        ),
    ])
}

fn obj(label: u32, x: f64, y: f64, tau: f64) -> ObjectState {
    ObjectState::new(Kinematics::new(x, 0.0, y, 0.0), Mode::Wandering, tau, Label(label))
}

fn noise_spectrogram(rx: &ReceiverParams, seed: u64) -> Spectrogram {
    let mut rng = stream(seed, Stream::Custom(5));
    let s = (NoiseFreqCov::new(&rx.window().unwrap(), rx.noise_cov).0).sqrt();
    let mag = (0..rx.frames * rx.fft_len)
        .map(|_| {
            let i: f64 = rng.sample(rand_distr::StandardNormal);
            let q: f64 = rng.sample(rand_distr::StandardNormal);
            s * i.hypot(q)
        })
        .collect();
    Spectrogram::new(rx.frames, rx.fft_len, mag, 0).unwrap()
}

#[test]
fn out_of_band_object_is_neutral() {
    let rx = small_rx();
    let mut table = small_table();
    table.get_mut(&Label(0)).unwrap().baseband_freq = 5000.0;
    let model = LikelihoodModel::new(&rx, &table).unwrap();
    let z = noise_spectrogram(&rx, 1);
    let uav = UavState::new(0.0, 0.0, 0.0, 0.0);
    let x = obj(0, 3.0, 4.0, 0.2);
    assert_eq!(model.log_likelihood(&x, &z, &uav).unwrap(), 0.0);
    assert!(model.influence_region(&x).unwrap().is_empty());
}

#[test]
fn outside_region_cells_are_zero() {
    let model = LikelihoodModel::new(&small_rx(), &small_table()).unwrap();
    let uav = UavState::new(0.0, 0.0, 0.0, 0.0);
    let x = obj(0, 3.0, 4.0, 0.2);
    let region = model.influence_region(&x).unwrap();
    assert_eq!(region.frames.len(), 2);
    assert_eq!(region.bins.len(), 8);
    for m in 0..8 {
        for l in 0..32 {
            let g = model.expected_bin_magnitude(&x, &uav, m, l).unwrap();
            assert_eq!(g > 0.0, region.contains(m, l), "({m},{l})");
        }
    }
}

#[test]
fn bin_centred_rectangular_peak() {
    let rx = ReceiverParams {
        window_kind: WindowKind::Rectangular,
        ..small_rx()
    };
    let model = LikelihoodModel::new(&rx, &small_table()).unwrap();
    let uav = UavState::new(0.0, 0.0, 0.0, 0.0);
    let x = obj(0, 3.0, 4.0, 0.2);
    // 500 Hz on a 100 Hz grid is bin 5 exactly
    let gamma = 40.0 / 25.0;
    let m = model.influence_region(&x).unwrap().frames[0];
    assert_relative_eq!(model.expected_bin_magnitude(&x, &uav, m, 5).unwrap(), gamma * 32.0, max_relative = 1e-12);
}

#[test]
fn expected_magnitude_matches_noiseless_stft() {
    let rx = ReceiverParams {
        noise_cov: 0.0,
        antenna: AntennaPattern::default(),
        ..reference_receiver()
    };
    let table = reference_table();
    let model = LikelihoodModel::new(&rx, &table).unwrap();
    let uav = UavState::new(10.0, -20.0, 30.0, 0.3);
    // offsets with both frames inside the pulse
    for (label, tau) in [(0u32, 0.1), (1, 0.2), (3, 0.4031)] {
        let x = obj(label, 150.0, 90.0, tau);
        let frames = synth_frames(&[x], &uav, &rx, &table, &mut stream(0, Stream::Custom(0))).unwrap();
        let y = stft_frames(&frames, &rx).unwrap();
        for (m, l) in model.influence_region(&x).unwrap().cells() {
            let want = y.get(m, l).norm();
            let got = model.expected_bin_magnitude(&x, &uav, m, l).unwrap();
            assert_relative_eq!(got, want, max_relative = 0.02, epsilon = 1e-12);
        }
    }
}

#[test]
fn zero_measurement_single_bin_ratio() {
    let rx = small_rx();
    let model = LikelihoodModel::new(&rx, &small_table()).unwrap();
    let uav = UavState::new(0.0, 0.0, 0.0, 0.0);
    let x = obj(0, 3.0, 4.0, 0.2);
    let z = Spectrogram::zeros(8, 32, 0);
    let s = model.noise().0;
    let expected: f64 = model
        .influence_region(&x)
        .unwrap()
        .cells()
        .map(|(m, l)| {
            let nu = model.expected_bin_magnitude(&x, &uav, m, l).unwrap();
            -nu * nu / (2.0 * s)
        })
        .sum();
    assert_relative_eq!(model.log_likelihood(&x, &z, &uav).unwrap(), expected, max_relative = 1e-14);
}

#[test]
fn log_domain_matches_direct_product() {
    let rx = small_rx();
    let model = LikelihoodModel::new(&rx, &small_table()).unwrap();
    let uav = UavState::new(0.0, 0.0, 0.0, 0.0);
    let z = noise_spectrogram(&rx, 4);
    let x = obj(1, 6.0, -2.0, 0.33);
    let s = model.noise().0;
    let mut product = 1.0;
    for (m, l) in model.influence_region(&x).unwrap().cells() {
        let nu = model.expected_bin_magnitude(&x, &uav, m, l).unwrap();
        product *= ricean_pdf(z.get(m, l), nu, s).unwrap() / rayleigh_pdf(z.get(m, l), s).unwrap();
    }
    let lg = model.log_likelihood(&x, &z, &uav).unwrap();
    assert_relative_eq!(lg.exp(), product, max_relative = 1e-12);
}

#[test]
fn multi_object_cases() {
    let rx = small_rx();
    let model = LikelihoodModel::new(&rx, &small_table()).unwrap();
    let uav = UavState::new(0.0, 0.0, 0.0, 0.0);
    let z = noise_spectrogram(&rx, 2);
    assert_eq!(model.multi_object_log_likelihood(&[], &z, &uav).unwrap(), 0.0);

    let a = obj(0, 3.0, 4.0, 0.2);
    let b = obj(1, -5.0, 1.0, 0.6);
    let sum = model.log_likelihood(&a, &z, &uav).unwrap() + model.log_likelihood(&b, &z, &uav).unwrap();
    assert_relative_eq!(model.multi_object_log_likelihood(&[a, b], &z, &uav).unwrap(), sum, max_relative = 1e-14);

    let clash = obj(0, 8.0, 8.0, 0.2);
    assert!(matches!(
        model.multi_object_log_likelihood(&[a, clash], &z, &uav),
        Err(Error::OverlappingRegions(..))
    ));
}

#[test]
fn insensitive_to_cells_outside_region() {
    let rx = small_rx();
    let model = LikelihoodModel::new(&rx, &small_table()).unwrap();
    let uav = UavState::new(0.0, 0.0, 0.0, 0.0);
    let x = obj(0, 3.0, 4.0, 0.2);
    let z = noise_spectrogram(&rx, 3);
    let base = model.log_likelihood(&x, &z, &uav).unwrap();
    let region = model.influence_region(&x).unwrap();
    let mut perturbed = z.clone();
    for m in 0..8 {
        for l in 0..32 {
            if !region.contains(m, l) {
                perturbed.set(m, l, z.get(m, l) * 3.0 + 1.0);
            }
        }
    }
    assert_eq!(model.log_likelihood(&x, &perturbed, &uav).unwrap(), base);
}

#[test]
fn dimension_mismatch_rejected() {
    let model = LikelihoodModel::new(&small_rx(), &small_table()).unwrap();
    let uav = UavState::new(0.0, 0.0, 0.0, 0.0);
    let z = Spectrogram::zeros(7, 32, 0);
    assert!(matches!(
        model.log_likelihood(&obj(0, 1.0, 1.0, 0.1), &z, &uav),
        Err(Error::DimensionMismatch { .. })
    ));
}

#[test]
fn likelihood_ratio_positive_at_truth_in_expectation() {
    let rx = reference_receiver();
    let table = reference_table();
    let model = LikelihoodModel::new(&rx, &table).unwrap();
    let uav = UavState::new(0.0, 0.0, 30.0, 0.0);
    let x = obj(0, 250.0, 100.0, 0.1);
    let mut rng = stream(11, Stream::Custom(3));
    let mut total = 0.0;
    for k in 0..100 {
        let frames = synth_frames(&[x], &uav, &rx, &table, &mut rng).unwrap();
        let z = spectrogram_from_frames(&frames, &rx, k).unwrap();
        total += model.log_likelihood(&x, &z, &uav).unwrap();
    }
    assert!(total / 100.0 > 0.0, "mean log-likelihood {}", total / 100.0);
}

#[test]
fn ideal_measurement_places_expected_magnitudes() {
    let rx = small_rx();
    let model = LikelihoodModel::new(&rx, &small_table()).unwrap();
    let uav = UavState::new(0.0, 0.0, 0.0, 0.0);
    let xs = [obj(0, 3.0, 4.0, 0.2), obj(1, -5.0, 1.0, 0.6)];
    let z = model.ideal_measurement(&xs, &uav, 0).unwrap();
    for m in 0..8 {
        for l in 0..32 {
            let want: f64 = xs.iter().map(|x| model.expected_bin_magnitude(x, &uav, m, l).unwrap()).sum();
            assert_eq!(z.get(m, l), want);
        }
    }
}

#[test]
fn influence_bins_are_nearest_to_fractional_bin() {
    let rx = reference_receiver();
    let model = LikelihoodModel::new(&rx, &reference_table()).unwrap();
    for (label, f) in [(0, 131e3), (1, 201e3), (2, 401e3), (3, 841e3)] {
        let centre = 256.0 * f / 2e6;
        let bins = model.influence_region(&obj(label, 50.0, 50.0, 0.1)).unwrap().bins;
        let worst = bins.iter().map(|&b| (b as f64 - centre).abs()).fold(0.0, f64::max);
        let outside = (0..256)
            .filter(|b| !bins.contains(b))
            .map(|b| (b as f64 - centre).abs())
            .fold(f64::INFINITY, f64::min);
        assert!(worst < outside, "{f}: {bins:?}");
    }
    // 401 kHz sits at bin 51.33, so bins 48..=55
    let bins = model.influence_region(&obj(2, 50.0, 50.0, 0.1)).unwrap().bins;
    assert_eq!(bins, (48..56).collect::<Vec<_>>());
}
