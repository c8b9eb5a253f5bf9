//! Closed-loop sense, filter, plan, move.

use std::f64::consts::PI;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynamics::JmsModel;
use crate::error::{Error, Result};
use crate::likelihood::LikelihoodModel;
use crate::metrics::{ospa, Ospa};
use crate::planner::{write_decision, PlanDecision, Planner, DECISION_HEADER};
use crate::rf_signal::{spectrogram_from_frames, synth_frames};
use crate::rng::{stream, Stream};
use crate::tbd_lmb::{BeliefSnapshot, Estimate, LmbFilter};
use crate::types::{wrap_angle, Label, ObjectState, Region, UavState};

use super::config::{PlannerVariant, ScenarioConfig};
use super::truth::simulate_truth;

/// Everything recorded for one measurement interval.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub time: f64,
    /// UAV pose at which the measurement was taken.
    pub uav: UavState,
    pub truth: Vec<ObjectState>,
    pub estimates: Vec<Estimate>,
    pub belief: BeliefSnapshot,
    pub ospa: Ospa,
    /// Labels whose update degenerated and kept the predicted density.
    pub degenerate: Vec<Label>,
}

impl StepRecord {
    pub fn existence(&self, label: Label) -> f64 {
        self.belief
            .components
            .iter()
            .find(|c| c.label == label)
            .map_or(0.0, |c| c.existence)
    }

    pub fn estimate(&self, label: Label) -> Option<&Estimate> {
        self.estimates.iter().find(|e| e.state.label == label)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionRecord {
    pub step: usize,
    pub time: f64,
    pub decision: PlanDecision,
}

/// Full record of one closed-loop run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunLog {
    pub name: String,
    pub seed: u64,
    pub variant: PlannerVariant,
    pub noise_cov: f64,
    pub steps: Vec<StepRecord>,
    pub decisions: Vec<DecisionRecord>,
}

/// Per-run scalar results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub name: String,
    pub seed: u64,
    pub variant: PlannerVariant,
    pub noise_cov: f64,
    pub steps: usize,
    pub mean_ospa: f64,
    pub mean_ospa_localization: f64,
    pub mean_ospa_cardinality: f64,
    /// Mean absolute difference between estimated and true cardinality.
    pub mean_cardinality_error: f64,
    /// Fraction of steps whose estimated cardinality is within one of the truth.
    pub cardinality_within_one: f64,
    pub planning_epochs: usize,
    pub fallback_epochs: usize,
    pub degenerate_updates: usize,
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}

impl RunLog {
    pub fn ospa_series(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.ospa.total).collect()
    }

    pub fn summary(&self) -> RunSummary {
        let card_err = |s: &StepRecord| (s.estimates.len() as f64 - s.truth.len() as f64).abs();
        RunSummary {
            name: self.name.clone(),
            seed: self.seed,
            variant: self.variant,
            noise_cov: self.noise_cov,
            steps: self.steps.len(),
            mean_ospa: mean(self.steps.iter().map(|s| s.ospa.total)),
            mean_ospa_localization: mean(self.steps.iter().map(|s| s.ospa.localization)),
            mean_ospa_cardinality: mean(self.steps.iter().map(|s| s.ospa.cardinality)),
            mean_cardinality_error: mean(self.steps.iter().map(card_err)),
            cardinality_within_one: mean(self.steps.iter().map(|s| f64::from(u8::from(card_err(s) <= 1.0)))),
            planning_epochs: self.decisions.len(),
            fallback_epochs: self.decisions.iter().filter(|d| d.decision.fallback).count(),
            degenerate_updates: self.steps.iter().map(|s| s.degenerate.len()).sum(),
        }
    }
}

/// Move along the current heading for one interval; the diagonal baseline
/// turns around instead of leaving the region.
fn fly(uav: &UavState, distance: f64, region: &Region, reverse_at_edge: bool) -> UavState {
    let step = |heading: f64| {
        [
            uav.position[0] + distance * heading.cos(),
            uav.position[1] + distance * heading.sin(),
        ]
    };
    let mut heading = uav.heading;
    let mut p = step(heading);
    if reverse_at_edge && !region.contains(p) {
        heading = wrap_angle(heading + PI);
        p = step(heading);
    }
    let p = region.clamp(p);
    UavState::new(p[0], p[1], uav.position[2], heading)
}

/// Run one closed-loop simulation of `cfg` under `seed`. Truth,
/// measurement noise, filter and planner draw from independent streams.
pub fn run_closed_loop(cfg: &ScenarioConfig, seed: u64) -> Result<RunLog> {
    cfg.validate()?;
    let rx = cfg.receiver_params();
    let tx = cfg.tx_table();
    let model = LikelihoodModel::new(&rx, &tx)?;
    let dt = cfg.interval();

    let mut truth_rng = stream(seed, Stream::Truth);
    let mut meas_rng = stream(seed, Stream::Measurement);
    let mut filter_rng = stream(seed, Stream::Filter);
    let mut plan_rng = stream(seed, Stream::Planner);

    let truth = simulate_truth(cfg, &mut truth_rng)?;
    let dynamics = JmsModel::new(&cfg.filter.dynamics)?;
    let mut filter = LmbFilter::new(dynamics.clone(), cfg.birth_model()?, cfg.filter_params())?;
    let variant = cfg.planner.variant;
    let planner = match variant {
        PlannerVariant::Straight => None,
        _ => Some(Planner::new(cfg.planner_config(), &dynamics, &model, cfg.region)?),
    };
    let epoch = ((cfg.planner.planning_interval / dt).round() as usize).max(1);

    let mut uav = cfg.uav.initial_state();
    let mut log = RunLog {
        name: cfg.name.clone(),
        seed,
        variant,
        noise_cov: cfg.receiver.noise_cov,
        steps: Vec::with_capacity(truth.steps),
        decisions: Vec::new(),
    };
    for k in 1..=truth.steps {
        let time = k as f64 * dt;
        let objects = truth.objects_at(k);
        let frames = synth_frames(&objects, &uav, &rx, &tx, &mut meas_rng)?;
        let z = spectrogram_from_frames(&frames, &rx, k as u32)?;
        let report = filter.step(&z, &uav, &model, &mut filter_rng)?;
        let estimates = filter.estimate();

        let truth_pos: Vec<[f64; 2]> = objects.iter().map(|o| o.position()).collect();
        let est_pos: Vec<[f64; 2]> = estimates.iter().map(|e| e.state.position()).collect();
        log.steps.push(StepRecord {
            step: k,
            time,
            uav,
            truth: objects,
            belief: filter.belief.snapshot(k, dt),
            estimates,
            ospa: ospa(&truth_pos, &est_pos, &cfg.ospa)?,
            degenerate: report.degenerate,
        });

        if let Some(p) = &planner {
            if k % epoch == 0 {
                let decision = p.plan(&filter.belief, &uav, &mut plan_rng)?;
                let delta = decision.action().deltas.first().copied().unwrap_or(0.0);
                uav.heading = wrap_angle(uav.heading + delta);
                log.decisions.push(DecisionRecord {
                    step: k,
                    time,
                    decision,
                });
            }
        }
        uav = fly(&uav, cfg.uav.speed * dt, &cfg.region, planner.is_none());
    }
    Ok(log)
}

/// Header of `metrics.csv`.
pub const METRICS_HEADER: [&str; 7] = [
    "step",
    "time",
    "ospa",
    "ospa_localization",
    "ospa_cardinality",
    "true_cardinality",
    "estimated_cardinality",
];

pub fn write_metrics<W: Write>(out: W, log: &RunLog) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(METRICS_HEADER)?;
    for s in &log.steps {
        w.serialize((
            s.step,
            s.time,
            s.ospa.total,
            s.ospa.localization,
            s.ospa.cardinality,
            s.truth.len(),
            s.estimates.len(),
        ))?;
    }
    w.flush()?;
    Ok(())
}

/// Long-format trajectory table: one row per UAV pose, true object and
/// estimate per step.
pub fn write_trajectory<W: Write>(out: W, log: &RunLog) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "step", "time", "kind", "label", "x", "y", "vx", "vy", "heading", "mode", "p_cv", "existence",
    ])?;
    for s in &log.steps {
        let u = &s.uav;
        w.write_record([
            s.step.to_string(),
            s.time.to_string(),
            "uav".into(),
            String::new(),
            u.position[0].to_string(),
            u.position[1].to_string(),
            String::new(),
            String::new(),
            u.heading.to_string(),
            String::new(),
            String::new(),
            String::new(),
        ])?;
        let rows = s
            .truth
            .iter()
            .map(|o| ("truth", o, None, None))
            .chain(
                s.estimates
                    .iter()
                    .map(|e| ("estimate", &e.state, Some(e.mode_probabilities[1]), Some(e.existence))),
            );
        for (kind, o, p_cv, r) in rows {
            let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
            w.write_record([
                s.step.to_string(),
                s.time.to_string(),
                kind.into(),
                o.label.to_string(),
                o.kin[0].to_string(),
                o.kin[2].to_string(),
                o.kin[1].to_string(),
                o.kin[3].to_string(),
                String::new(),
                o.mode.short_name().into(),
                opt(p_cv),
                opt(r),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_decisions<W: Write>(mut out: W, log: &RunLog) -> Result<()> {
    writeln!(out, "{DECISION_HEADER}")?;
    for d in &log.decisions {
        write_decision(&mut out, d.time, &d.decision)?;
    }
    out.flush()?;
    Ok(())
}

/// Write `metrics.csv`, `trajectory.csv`, `decisions.csv`,
/// `belief/<k>.json` and `summary.json` into `dir`.
pub fn write_outputs(dir: &Path, log: &RunLog) -> Result<()> {
    fs::create_dir_all(dir.join("belief"))?;
    let create = |name: &str| -> Result<BufWriter<fs::File>> { Ok(BufWriter::new(fs::File::create(dir.join(name))?)) };
    write_metrics(create("metrics.csv")?, log)?;
    write_trajectory(create("trajectory.csv")?, log)?;
    write_decisions(create("decisions.csv")?, log)?;
    for s in &log.steps {
        let f = BufWriter::new(fs::File::create(dir.join("belief").join(format!("{}.json", s.step)))?);
        serde_json::to_writer(f, &s.belief)?;
    }
    let mut f = create("summary.json")?;
    serde_json::to_writer_pretty(&mut f, &log.summary())?;
    writeln!(f)?;
    f.flush()?;
    Ok(())
}

/// Reject a log that breaks the UAV's speed or turn-rate limits.
pub fn check_kinematics(log: &RunLog, cfg: &ScenarioConfig) -> Result<()> {
    let dt = cfg.interval();
    let max_step = cfg.uav.speed * dt * (1.0 + 1e-9);
    let max_turn = cfg.planner_config().max_delta() + 1e-9;
    for w in log.steps.windows(2) {
        let (a, b) = (&w[0].uav, &w[1].uav);
        let d = (b.position[0] - a.position[0]).hypot(b.position[1] - a.position[1]);
        if d > max_step {
            return Err(Error::InvalidScenario(format!(
                "UAV moved {d} m between steps {} and {}",
                w[0].step, w[1].step
            )));
        }
        let turn = wrap_angle(b.heading - a.heading).abs();
        let reversal = cfg.planner.variant == PlannerVariant::Straight && (turn - PI).abs() < 1e-9;
        if turn > max_turn && !reversal {
            return Err(Error::InvalidScenario(format!(
                "UAV turned {turn} rad between steps {} and {}",
                w[0].step, w[1].step
            )));
        }
        if !cfg.region.contains(b.planar()) {
            return Err(Error::InvalidScenario(format!("UAV left the region at step {}", w[1].step)));
        }
    }
    Ok(())
}
