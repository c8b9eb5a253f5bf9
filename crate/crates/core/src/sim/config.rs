//! Scenario configuration, mirrored one-to-one by the JSON config file.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynamics::{BirthModel, BirthSpec, DynamicsParams, JmsModel};
use crate::error::{Error, Result};
use crate::metrics::OspaParams;
use crate::planner::{Divergence, PimsSource, PlannerConfig};
use crate::rf_signal::{
    check_resolvability, db_to_linear, frame_count, hop_for_pulse_width, AntennaPattern, ReceiverParams,
    ResolvabilityReport, TransmitterParams, TxTable, WindowKind,
};
use crate::tbd_lmb::FilterParams;
use crate::types::{Label, Mode, Region, UavState};

/// Receiver antenna as written in the config file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AntennaConfig {
    Isotropic,
    Directional { g_max_db: f64, g_back: f64, exponent: f64 },
}

impl Default for AntennaConfig {
    fn default() -> Self {
        AntennaConfig::Directional {
            g_max_db: 5.0,
            g_back: 0.1,
            exponent: 2.0,
        }
    }
}

impl AntennaConfig {
    pub fn pattern(&self) -> AntennaPattern {
        match *self {
            AntennaConfig::Isotropic => AntennaPattern::Isotropic,
            AntennaConfig::Directional {
                g_max_db,
                g_back,
                exponent,
            } => AntennaPattern::Directional {
                g_max: db_to_linear(g_max_db),
                g_back,
                exponent,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReceiverConfig {
    pub center_freq: f64,
    pub sample_rate: f64,
    pub receiver_gain_db: f64,
    pub ref_distance: f64,
    pub path_loss: f64,
    /// Complex baseband noise covariance (V^2).
    pub noise_cov: f64,
    pub window: WindowKind,
    pub window_width: usize,
    pub fft_len: usize,
    /// STFT hop; derived from the shortest pulse width when absent.
    pub hop: Option<usize>,
    /// Frames per interval; derived from the pulse period when absent.
    pub frames: Option<usize>,
    pub target_height: f64,
    pub antenna: AntennaConfig,
}

impl Default for ReceiverConfig {
    fn default() -> Self {
        Self {
            center_freq: 150e6,
            sample_rate: 2e6,
            receiver_gain_db: 72.0,
            ref_distance: 1.0,
            path_loss: 3.1068,
            noise_cov: 0.025 * 0.025,
            window: WindowKind::BlackmanHarris4,
            window_width: 256,
            fft_len: 256,
            hop: None,
            frames: None,
            target_height: 1.0,
            antenna: AntennaConfig::default(),
        }
    }
}

/// How an object's true mode evolves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModeSchedule {
    /// Fixed switches at `(time since birth, new mode)`.
    Scripted { initial: Mode, switches: Vec<(f64, Mode)> },
    /// Mode drawn from the dynamics' Markov chain every interval.
    Markov { initial: Mode },
}

impl ModeSchedule {
    pub fn initial(&self) -> Mode {
        match self {
            ModeSchedule::Scripted { initial, .. } | ModeSchedule::Markov { initial } => *initial,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectConfig {
    pub label: Label,
    pub birth: f64,
    pub death: f64,
    /// `[p_x, v_x, p_y, v_y]` at birth.
    pub initial: [f64; 4],
    pub modes: ModeSchedule,
    pub transmitter: TransmitterParams,
    /// Filter birth prior mean; defaults to the initial position at rest.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub birth_mean: Option<[f64; 4]>,
}

impl ObjectConfig {
    pub fn birth_mean(&self) -> [f64; 4] {
        self.birth_mean
            .unwrap_or([self.initial[0], 0.0, self.initial[2], 0.0])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct UavConfig {
    /// `[x, y, z]` (m).
    pub position: [f64; 3],
    pub heading: f64,
    pub speed: f64,
    /// Maximum turning rate (rad/s).
    pub max_turn_rate: f64,
}

impl Default for UavConfig {
    fn default() -> Self {
        Self {
            position: [0.0, 0.0, 30.0],
            heading: PI / 4.0,
            speed: 20.0,
            max_turn_rate: PI / 3.0,
        }
    }
}

impl UavConfig {
    pub fn initial_state(&self) -> UavState {
        UavState::new(self.position[0], self.position[1], self.position[2], self.heading)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlannerVariant {
    Renyi,
    Cauchy,
    /// Diagonal back-and-forth without planning.
    Straight,
}

impl PlannerVariant {
    pub fn name(self) -> &'static str {
        match self {
            PlannerVariant::Renyi => "renyi",
            PlannerVariant::Cauchy => "cauchy",
            PlannerVariant::Straight => "straight",
        }
    }
}

impl std::str::FromStr for PlannerVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "renyi" => Ok(PlannerVariant::Renyi),
            "cauchy" | "cauchy_schwarz" | "cs" => Ok(PlannerVariant::Cauchy),
            "straight" => Ok(PlannerVariant::Straight),
            other => Err(Error::InvalidScenario(format!("unknown planner variant `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlannerSettings {
    pub variant: PlannerVariant,
    pub alpha: f64,
    pub cs_volume: f64,
    pub horizon: usize,
    pub planning_interval: f64,
    pub discount: f64,
    pub void_threshold: f64,
    pub r_min: f64,
    pub grid_size: usize,
    pub rollout_particles: usize,
    pub pims_source: PimsSource,
}

impl Default for PlannerSettings {
    fn default() -> Self {
        let p = PlannerConfig::default();
        Self {
            variant: PlannerVariant::Renyi,
            alpha: 0.5,
            cs_volume: 1.0,
            horizon: p.horizon,
            planning_interval: p.planning_interval,
            discount: p.discount,
            void_threshold: p.void_threshold,
            r_min: p.r_min,
            grid_size: p.grid_size,
            rollout_particles: p.rollout_particles,
            pims_source: p.pims_source,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FilterConfig {
    pub particles: usize,
    pub ess_fraction: f64,
    pub extract_threshold: f64,
    pub prune_threshold: f64,
    pub regularization: f64,
    pub jitter_floor: [f64; 4],
    pub birth_refresh: bool,
    pub birth_existence: f64,
    pub birth_cov_diag: [f64; 4],
    pub mode_prior: [f64; 2],
    pub dynamics: DynamicsParams,
}

impl Default for FilterConfig {
    fn default() -> Self {
        let f = FilterParams::default();
        Self {
            particles: f.particles,
            ess_fraction: f.ess_fraction,
            extract_threshold: f.extract_threshold,
            prune_threshold: f.prune_threshold,
            regularization: f.regularization,
            jitter_floor: f.jitter_floor,
            birth_refresh: f.birth_refresh,
            birth_existence: 1e-6,
            birth_cov_diag: [100.0, 4.0, 100.0, 4.0],
            mode_prior: [0.5, 0.5],
            dynamics: DynamicsParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TruthConfig {
    /// Process noise of the true objects; when false they move noiselessly.
    pub process_noise: bool,
    pub dynamics: DynamicsParams,
}

impl Default for TruthConfig {
    fn default() -> Self {
        Self {
            process_noise: true,
            dynamics: DynamicsParams::default(),
        }
    }
}

/// Complete description of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    pub name: String,
    pub seed: u64,
    /// Simulated time (s).
    pub duration: f64,
    pub region: Region,
    pub uav: UavConfig,
    pub receiver: ReceiverConfig,
    pub objects: Vec<ObjectConfig>,
    pub filter: FilterConfig,
    pub planner: PlannerSettings,
    pub truth: TruthConfig,
    pub ospa: OspaParams,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self::four_objects()
    }
}

fn default_transmitter(freq: f64, offset: f64) -> TransmitterParams {
    TransmitterParams {
        amplitude: 0.0059,
        baseband_freq: freq,
        phase: 0.0,
        pulse_period: 1.0,
        pulse_width: 0.018,
        offset,
    }
}

impl ScenarioConfig {
    /// Four objects with staggered births and deaths over 400 s.
    pub fn four_objects() -> Self {
        let births = [(1.0, 250.0), (50.0, 300.0), (100.0, 350.0), (150.0, 400.0)];
        let initial = [
            [800.0, 0.13, 300.0, -1.44],
            [200.0, 0.18, 700.0, -2.17],
            [1200.0, -1.94, 1000.0, 0.42],
            [900.0, 1.91, 1300.0, -2.04],
        ];
        let freqs = [131e3, 201e3, 401e3, 841e3];
        let offsets = [0.1, 0.2, 0.3, 0.4];
        let objects = (0..4)
            .map(|i| {
                let switch = if i % 2 == 0 { 1.0 } else { 65.0 };
                ObjectConfig {
                    label: Label(i as u32 + 1),
                    birth: births[i].0,
                    death: births[i].1,
                    initial: initial[i],
                    modes: ModeSchedule::Scripted {
                        initial: Mode::Wandering,
                        switches: vec![(switch, Mode::ConstantVelocity)],
                    },
                    transmitter: default_transmitter(freqs[i], offsets[i]),
                    birth_mean: None,
                }
            })
            .collect();
        Self {
            name: "four-objects".into(),
            seed: 0,
            duration: 400.0,
            region: Region::default(),
            uav: UavConfig::default(),
            receiver: ReceiverConfig::default(),
            objects,
            filter: FilterConfig::default(),
            planner: PlannerSettings::default(),
            truth: TruthConfig::default(),
            ospa: OspaParams::default(),
        }
    }

    /// Shorten the scenario, ending lifetimes that run past the new
    /// duration and dropping objects born after it.
    pub fn truncated(mut self, duration: f64) -> Self {
        self.duration = duration;
        self.objects.retain(|o| o.birth <= duration);
        for o in &mut self.objects {
            o.death = o.death.min(duration);
        }
        self
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Number of measurement intervals.
    pub fn steps(&self) -> usize {
        (self.duration / self.interval() + 1e-9).floor() as usize
    }

    /// Measurement interval, equal to the pulse period.
    pub fn interval(&self) -> f64 {
        self.filter.dynamics.interval
    }

    pub fn tx_table(&self) -> TxTable {
        self.objects.iter().map(|o| (o.label, o.transmitter)).collect()
    }

    pub fn receiver_params(&self) -> ReceiverParams {
        let r = &self.receiver;
        let shortest_pulse = self
            .objects
            .iter()
            .map(|o| o.transmitter.pulse_width)
            .fold(f64::INFINITY, f64::min);
        let hop = r.hop.unwrap_or_else(|| {
            if shortest_pulse.is_finite() {
                hop_for_pulse_width(shortest_pulse, r.sample_rate)
            } else {
                r.window_width + 1
            }
        });
        let frames = r
            .frames
            .unwrap_or_else(|| frame_count(self.interval(), r.sample_rate, r.window_width, hop));
        ReceiverParams {
            center_freq: r.center_freq,
            sample_rate: r.sample_rate,
            receiver_gain: db_to_linear(r.receiver_gain_db),
            ref_distance: r.ref_distance,
            path_loss: r.path_loss,
            noise_cov: r.noise_cov,
            window_kind: r.window,
            window_width: r.window_width,
            fft_len: r.fft_len,
            hop,
            frames,
            target_height: r.target_height,
            antenna: r.antenna.pattern(),
        }
    }

    pub fn filter_params(&self) -> FilterParams {
        FilterParams {
            particles: self.filter.particles,
            ess_fraction: self.filter.ess_fraction,
            extract_threshold: self.filter.extract_threshold,
            prune_threshold: self.filter.prune_threshold,
            regularization: self.filter.regularization,
            jitter_floor: self.filter.jitter_floor,
            birth_refresh: self.filter.birth_refresh,
        }
    }

    pub fn birth_model(&self) -> Result<BirthModel> {
        let specs = self
            .objects
            .iter()
            .map(|o| BirthSpec {
                label: o.label,
                existence: self.filter.birth_existence,
                mean: o.birth_mean(),
                cov_diag: self.filter.birth_cov_diag,
            })
            .collect();
        BirthModel::new(specs, self.filter.mode_prior, self.interval())
    }

    pub fn planner_config(&self) -> PlannerConfig {
        let p = &self.planner;
        PlannerConfig {
            divergence: match p.variant {
                PlannerVariant::Cauchy => Divergence::CauchySchwarz { k: p.cs_volume },
                _ => Divergence::Renyi { alpha: p.alpha },
            },
            horizon: p.horizon,
            planning_interval: p.planning_interval,
            discount: p.discount,
            void_threshold: p.void_threshold,
            r_min: p.r_min,
            grid_size: p.grid_size,
            max_turn_rate: self.uav.max_turn_rate,
            speed: self.uav.speed,
            rollout_particles: p.rollout_particles,
            pims_source: p.pims_source,
            extract_threshold: self.filter.extract_threshold,
        }
    }

    pub fn resolvability(&self) -> ResolvabilityReport {
        check_resolvability(&self.tx_table(), &self.receiver_params())
    }

    /// Schema and physical-consistency checks.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidScenario(m));
        if !(self.duration >= 0.0 && self.duration.is_finite()) {
            return bad(format!("duration {} must be non-negative", self.duration));
        }
        let r = &self.region;
        if !(r.x_min < r.x_max && r.y_min < r.y_max) {
            return bad("region bounds are empty".into());
        }
        if !r.contains([self.uav.position[0], self.uav.position[1]]) {
            return bad("UAV starts outside the region".into());
        }
        let mut labels = BTreeSet::new();
        for o in &self.objects {
            if !labels.insert(o.label) {
                return Err(Error::LabelCollision(o.label));
            }
            if !(o.birth >= 0.0 && o.birth <= o.death && o.death <= self.duration) {
                return bad(format!(
                    "object {}: need 0 <= birth <= death <= duration, got ({}, {})",
                    o.label, o.birth, o.death
                ));
            }
            if !r.contains([o.initial[0], o.initial[2]]) {
                return bad(format!("object {} starts outside the region", o.label));
            }
            if let ModeSchedule::Scripted { switches, .. } = &o.modes {
                if switches.windows(2).any(|w| w[1].0 < w[0].0) || switches.iter().any(|s| s.0 < 0.0) {
                    return bad(format!("object {}: mode switches must be sorted and non-negative", o.label));
                }
            }
            o.transmitter.validate()?;
            if (o.transmitter.pulse_period - self.interval()).abs() > 1e-12 {
                return bad(format!("object {}: pulse period must equal the measurement interval", o.label));
            }
        }
        let rx = self.receiver_params();
        rx.validate()?;
        if rx.required_samples() as f64 > self.interval() * rx.sample_rate + 1e-9 {
            return bad("STFT frames do not fit in one measurement interval".into());
        }
        JmsModel::new(&self.filter.dynamics)?;
        JmsModel::new(&self.truth.dynamics)?;
        self.birth_model()?;
        self.filter_params().validate()?;
        self.planner_config().validate()?;
        self.ospa.validate()?;
        let report = self.resolvability();
        if let Some(c) = report.checks.iter().find(|c| !c.passed) {
            return bad(format!("resolvability check `{}` failed: {}", c.name, c.detail));
        }
        Ok(())
    }
}
