//! Shared fixtures for the benchmarks: the four-object scenario after a few
//! filter steps, so every stage runs on a realistic belief.

use rftrack_core::dynamics::JmsModel;
use rftrack_core::likelihood::LikelihoodModel;
use rftrack_core::rf_signal::{spectrogram_from_frames, synth_frames, ReceiverParams, TxTable};
use rftrack_core::rng::{stream, SimRng, Stream};
use rftrack_core::sim::{simulate_truth, GroundTruth, ScenarioConfig};
use rftrack_core::tbd_lmb::LmbFilter;
use rftrack_core::{Spectrogram, UavState};

pub struct Fixture {
    pub cfg: ScenarioConfig,
    pub rx: ReceiverParams,
    pub tx: TxTable,
    pub model: LikelihoodModel,
    pub dynamics: JmsModel,
    pub truth: GroundTruth,
    pub filter: LmbFilter,
    pub uav: UavState,
    pub z: Spectrogram,
    pub rng: SimRng,
}

impl Fixture {
    /// Four-object scenario with `particles` per component, advanced `steps`
    /// intervals with the UAV parked at its start.
    pub fn new(particles: usize, steps: usize) -> Self {
        let mut cfg = ScenarioConfig::four_objects().truncated(100.0);
        cfg.filter.particles = particles;
        let rx = cfg.receiver_params();
        let tx = cfg.tx_table();
        let model = LikelihoodModel::new(&rx, &tx).expect("model");
        let dynamics = JmsModel::new(&cfg.filter.dynamics).expect("dynamics");
        let truth = simulate_truth(&cfg, &mut stream(1, Stream::Truth)).expect("truth");
        let mut filter =
            LmbFilter::new(dynamics.clone(), cfg.birth_model().expect("births"), cfg.filter_params()).expect("filter");
        let uav = cfg.uav.initial_state();
        let mut rng = stream(1, Stream::Filter);
        let mut meas = stream(1, Stream::Measurement);
        let mut z = Spectrogram::zeros(rx.frames, rx.fft_len, 0);
        for k in 1..=steps {
            let frames = synth_frames(&truth.objects_at(k), &uav, &rx, &tx, &mut meas).expect("synth");
            z = spectrogram_from_frames(&frames, &rx, k as u32).expect("stft");
            filter.step(&z, &uav, &model, &mut rng).expect("step");
        }
        Self {
            cfg,
            rx,
            tx,
            model,
            dynamics,
            truth,
            filter,
            uav,
            z,
            rng,
        }
    }
}
