//! Ground-truth object trajectories.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::dynamics::JmsModel;
use crate::error::Result;
use crate::types::{Kinematics, Label, Mode, ObjectState, Region};

use super::config::{ModeSchedule, ObjectConfig, ScenarioConfig};

/// One object's states at the steps where it exists.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub label: Label,
    /// Step index (1-based) of the first state; unused when `states` is empty.
    pub first_step: usize,
    pub states: Vec<ObjectState>,
}

impl Trajectory {
    pub fn at_step(&self, k: usize) -> Option<&ObjectState> {
        k.checked_sub(self.first_step).and_then(|i| self.states.get(i))
    }

    pub fn last_step(&self) -> Option<usize> {
        (!self.states.is_empty()).then(|| self.first_step + self.states.len() - 1)
    }
}

/// Ground truth of a whole scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub interval: f64,
    pub steps: usize,
    pub trajectories: Vec<Trajectory>,
}

impl GroundTruth {
    /// Objects alive at step `k`, in label order.
    pub fn objects_at(&self, k: usize) -> Vec<ObjectState> {
        let mut v: Vec<ObjectState> = self.trajectories.iter().filter_map(|t| t.at_step(k).copied()).collect();
        v.sort_by_key(|o| o.label);
        v
    }

    pub fn trajectory(&self, label: Label) -> Option<&Trajectory> {
        self.trajectories.iter().find(|t| t.label == label)
    }
}

const EPS: f64 = 1e-9;

fn scheduled_mode(schedule: &ModeSchedule, age: f64) -> Mode {
    match schedule {
        ModeSchedule::Scripted { initial, switches } => switches
            .iter()
            .take_while(|(t, _)| *t <= age + EPS)
            .last()
            .map_or(*initial, |s| s.1),
        ModeSchedule::Markov { initial } => *initial,
    }
}

/// Fold a position back into the region, mirroring the velocity.
fn reflect(kin: &mut Kinematics, region: &Region) {
    for (p, v, lo, hi) in [
        (0, 1, region.x_min, region.x_max),
        (2, 3, region.y_min, region.y_max),
    ] {
        let width = hi - lo;
        // repeated folding covers steps longer than the region
        for _ in 0..8 {
            if kin[p] < lo {
                kin[p] = 2.0 * lo - kin[p];
                kin[v] = -kin[v];
            } else if kin[p] > hi {
                kin[p] = 2.0 * hi - kin[p];
                kin[v] = -kin[v];
            } else {
                break;
            }
        }
        if width > 0.0 {
            kin[p] = kin[p].clamp(lo, hi);
        }
    }
}

/// True motion over one interval. Wandering objects jitter around their
/// position but keep their nominal velocity, which a constant-velocity
/// phase then follows.
fn step_kinematics<R: Rng + ?Sized>(
    kin: &Kinematics,
    mode: Mode,
    model: &JmsModel,
    noise: bool,
    rng: &mut R,
) -> Kinematics {
    match mode {
        Mode::Wandering => {
            let mut next = *kin;
            if noise {
                let q = &model.mode(Mode::Wandering).process_cov;
                for i in [0, 2] {
                    let n: f64 = rng.sample(StandardNormal);
                    next[i] += q[(i, i)].sqrt() * n;
                }
            }
            next
        }
        Mode::ConstantVelocity => {
            let d = model.mode(Mode::ConstantVelocity);
            if noise {
                d.step(kin, rng)
            } else {
                d.transition * kin
            }
        }
    }
}

fn simulate_object<R: Rng + ?Sized>(
    o: &ObjectConfig,
    cfg: &ScenarioConfig,
    model: &JmsModel,
    rng: &mut R,
) -> Trajectory {
    let dt = cfg.interval();
    let steps = cfg.steps();
    let first = ((o.birth / dt) - EPS).ceil().max(1.0) as usize;
    let mut traj = Trajectory {
        label: o.label,
        first_step: first,
        states: Vec::new(),
    };
    if !(o.birth < o.death) {
        return traj;
    }
    let mut kin = Kinematics::from(o.initial);
    let mut mode = scheduled_mode(&o.modes, 0.0);
    // the initial state holds at the birth time; intervals between birth
    // and the first measurement are propagated before recording
    let lag = ((first as f64 * dt - o.birth) / dt).round() as usize;
    let mut age = 0.0;
    for k in (first - lag.min(first))..=steps {
        let t = k as f64 * dt;
        if t > o.death + EPS {
            break;
        }
        if k + lag > first {
            kin = step_kinematics(&kin, mode, model, cfg.truth.process_noise, rng);
            reflect(&mut kin, &cfg.region);
            age += dt;
            mode = match &o.modes {
                ModeSchedule::Scripted { .. } => scheduled_mode(&o.modes, age),
                ModeSchedule::Markov { .. } => model.sample_mode(mode, rng),
            };
        }
        if k >= first {
            traj.states.push(ObjectState::new(kin, mode, o.transmitter.offset, o.label));
        }
    }
    traj
}

/// Simulate every object of `cfg`. Each object alive at step `k`
/// (time `k * T0`) satisfies `birth <= t <= death`; the pulse offset is
/// held at the transmitter's configured value.
pub fn simulate_truth<R: Rng + ?Sized>(cfg: &ScenarioConfig, rng: &mut R) -> Result<GroundTruth> {
    let model = JmsModel::new(&cfg.truth.dynamics)?;
    let trajectories = cfg
        .objects
        .iter()
        .map(|o| simulate_object(o, cfg, &model, rng))
        .collect();
    Ok(GroundTruth {
        interval: cfg.interval(),
        steps: cfg.steps(),
        trajectories,
    })
}
