//! Receding-horizon UAV path planning with information-divergence rewards
//! under a void-probability safety constraint.

mod divergence;

use std::f64::consts::PI;
use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::JmsModel;
use crate::error::{invalid, Result};
use crate::likelihood::LikelihoodModel;
use crate::tbd_lmb::{predict, resample, update_component, BernoulliComponent, LmbBelief};
use crate::types::{wrap_angle, ObjectState, Region, UavState};

pub use divergence::{
    cauchy_schwarz_divergence, cauchy_schwarz_from_weights, paired_weights, renyi_divergence, renyi_from_weights,
    LabelWeights,
};

/// Reward functional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Divergence {
    Renyi { alpha: f64 },
    CauchySchwarz { k: f64 },
}

impl Divergence {
    pub fn evaluate(&self, pairs: &[(LabelWeights, LabelWeights)]) -> Result<f64> {
        match *self {
            Divergence::Renyi { alpha } => renyi_from_weights(pairs, alpha),
            Divergence::CauchySchwarz { k } => cauchy_schwarz_from_weights(pairs, k),
        }
    }
}

/// How the ideal measurement of each rollout step is generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PimsSource {
    /// Extracted estimate of the predicted belief.
    Estimate,
    /// One trajectory sampled from the belief: each label is present with
    /// probability `r` and follows one particle drawn by weight.
    Sample,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlannerConfig {
    pub divergence: Divergence,
    pub horizon: usize,
    /// Seconds between planning epochs.
    pub planning_interval: f64,
    pub discount: f64,
    pub void_threshold: f64,
    pub r_min: f64,
    /// Number of heading deltas per step.
    pub grid_size: usize,
    /// Maximum turning rate (rad/s).
    pub max_turn_rate: f64,
    /// UAV ground speed (m/s).
    pub speed: f64,
    /// Particles per label used inside rollouts.
    pub rollout_particles: usize,
    pub pims_source: PimsSource,
    /// Existence threshold used when extracting the PIMS estimate.
    pub extract_threshold: f64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            divergence: Divergence::Renyi { alpha: 0.5 },
            horizon: 3,
            planning_interval: 5.0,
            discount: 1.0,
            void_threshold: 0.9,
            r_min: 50.0,
            grid_size: 5,
            max_turn_rate: PI / 3.0,
            speed: 20.0,
            rollout_particles: 200,
            pims_source: PimsSource::Estimate,
            extract_threshold: 0.5,
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(invalid("horizon", "must be at least 1"));
        }
        if !(self.discount > 0.0 && self.discount <= 1.0) {
            return Err(invalid("discount", format!("must lie in (0, 1], got {}", self.discount)));
        }
        if !(self.planning_interval > 0.0) {
            return Err(invalid("planning_interval", "must be positive"));
        }
        if !(0.0..1.0).contains(&self.void_threshold) {
            return Err(invalid("void_threshold", format!("must lie in [0, 1), got {}", self.void_threshold)));
        }
        if !(self.r_min > 0.0) {
            return Err(invalid("r_min", "must be positive"));
        }
        if self.grid_size == 0 {
            return Err(invalid("grid_size", "must be at least 1"));
        }
        if !(self.max_turn_rate >= 0.0) || !(self.speed >= 0.0) {
            return Err(invalid("max_turn_rate", "rate and speed must be non-negative"));
        }
        if self.rollout_particles == 0 {
            return Err(invalid("rollout_particles", "must be positive"));
        }
        match self.divergence {
            Divergence::Renyi { alpha } if !(alpha >= 0.0) => {
                Err(invalid("alpha", format!("must be non-negative, got {alpha}")))
            }
            Divergence::CauchySchwarz { k } if !(k > 0.0) => Err(invalid("k", format!("must be positive, got {k}"))),
            _ => Ok(()),
        }
    }

    /// Largest heading change allowed per planning step. Capped below `pi`
    /// so that the grid never contains two deltas giving the same heading.
    pub fn max_delta(&self) -> f64 {
        let g = self.grid_size as f64;
        (self.max_turn_rate * self.planning_interval).min(PI * (g - 1.0) / g)
    }

    /// Symmetric heading-delta grid.
    pub fn delta_grid(&self) -> Vec<f64> {
        let g = self.grid_size;
        if g == 1 {
            return vec![0.0];
        }
        let m = self.max_delta();
        (0..g).map(|i| -m + 2.0 * m * i as f64 / (g - 1) as f64).collect()
    }
}

/// A candidate plan: heading deltas per step and the waypoints they induce.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionSequence {
    pub deltas: Vec<f64>,
    pub waypoints: Vec<UavState>,
}

impl ActionSequence {
    pub fn total_turn(&self) -> f64 {
        self.deltas.iter().map(|d| d.abs()).sum()
    }
}

/// Pose after flying `distance` along `heading + delta`, clipped to `region`.
pub fn advance(u: &UavState, delta: f64, distance: f64, region: &Region) -> UavState {
    let heading = wrap_angle(u.heading + delta);
    let p = region.clamp([
        u.position[0] + distance * heading.cos(),
        u.position[1] + distance * heading.sin(),
    ]);
    UavState::new(p[0], p[1], u.position[2], heading)
}

/// All `grid_size^horizon` heading-delta sequences from `u`.
pub fn enumerate_actions(u: &UavState, cfg: &PlannerConfig, region: &Region) -> Vec<ActionSequence> {
    let grid = cfg.delta_grid();
    let step = cfg.speed * cfg.planning_interval;
    let mut seqs = vec![ActionSequence {
        deltas: Vec::new(),
        waypoints: Vec::new(),
    }];
    for _ in 0..cfg.horizon {
        seqs = seqs
            .into_iter()
            .flat_map(|s| {
                grid.iter().map(move |&d| {
                    let from = s.waypoints.last().copied().unwrap_or(*u);
                    let mut next = s.clone();
                    next.deltas.push(d);
                    next.waypoints.push(advance(&from, d, step, region));
                    next
                })
            })
            .collect();
    }
    seqs
}

/// Probability that no object lies within ground distance `radius` of
/// `center`.
pub fn void_probability(belief: &LmbBelief, center: [f64; 2], radius: f64) -> f64 {
    belief
        .components()
        .map(|c| 1.0 - c.existence * c.mass_within(center, radius))
        .product()
}

/// Prediction-only beliefs over the horizon and the ideal-measurement object
/// sets generated from them. Shared by every candidate action.
#[derive(Debug, Clone)]
pub struct PredictionChain {
    /// Belief the rollouts start from (possibly subsampled).
    pub start: LmbBelief,
    /// `pi_{k+j|k}` for `j = 1..=H`.
    pub predicted: Vec<LmbBelief>,
    /// Objects generating the ideal measurement at each step.
    pub ideal_objects: Vec<Vec<ObjectState>>,
}

/// Motion-only prediction over one planning interval.
pub fn predict_interval<R: Rng + ?Sized>(
    belief: &LmbBelief,
    dynamics: &JmsModel,
    planning_interval: f64,
    rng: &mut R,
) -> Result<LmbBelief> {
    let steps = (planning_interval / dynamics.interval()).round().max(1.0) as usize;
    let mut b = belief.clone();
    for _ in 0..steps {
        b = predict(&b, dynamics, Vec::new(), rng)?;
    }
    Ok(b)
}

/// Build the shared chain. Each component is first resampled to
/// `rollout_particles` particles.
pub fn prediction_chain<R: Rng + ?Sized>(
    belief: &LmbBelief,
    dynamics: &JmsModel,
    cfg: &PlannerConfig,
    rng: &mut R,
) -> Result<PredictionChain> {
    let mut start = LmbBelief::new();
    for c in belief.components() {
        let sub = if c.len() == cfg.rollout_particles && c.weights.iter().all(|&w| w == c.weights[0]) {
            c.clone()
        } else {
            resample(c, cfg.rollout_particles, rng)?
        };
        start.insert(sub)?;
    }
    let mut predicted = Vec::with_capacity(cfg.horizon);
    let mut b = start.clone();
    for _ in 0..cfg.horizon {
        b = predict_interval(&b, dynamics, cfg.planning_interval, rng)?;
        predicted.push(b.clone());
    }
    let ideal_objects = match cfg.pims_source {
        PimsSource::Estimate => predicted
            .iter()
            .map(|p| {
                p.extract_estimate(cfg.extract_threshold, dynamics.interval())
                    .into_iter()
                    .map(|e| e.state)
                    .collect()
            })
            .collect(),
        PimsSource::Sample => sample_trajectory(&predicted, rng),
    };
    Ok(PredictionChain {
        start,
        predicted,
        ideal_objects,
    })
}

/// Particles keep their index through prediction, so one index per label
/// traces a trajectory through the whole chain.
fn sample_trajectory<R: Rng + ?Sized>(predicted: &[LmbBelief], rng: &mut R) -> Vec<Vec<ObjectState>> {
    let mut out = vec![Vec::new(); predicted.len()];
    let Some(first) = predicted.first() else {
        return out;
    };
    for c in first.components() {
        if rng.random::<f64>() >= c.existence {
            continue;
        }
        let u = rng.random::<f64>();
        let mut cum = 0.0;
        let idx = c
            .weights
            .iter()
            .position(|&w| {
                cum += w;
                u < cum
            })
            .unwrap_or(c.len() - 1);
        for (j, b) in predicted.iter().enumerate() {
            if let Some(cj) = b.get(c.label) {
                out[j].push(ObjectState::from_particle(&cj.particles[idx], c.label));
            }
        }
    }
    out
}

/// Per-step rewards and void probabilities of one action.
#[derive(Debug, Clone, PartialEq)]
pub struct RolloutResult {
    pub rewards: Vec<f64>,
    pub void_probabilities: Vec<f64>,
}

impl RolloutResult {
    pub fn discounted_reward(&self, gamma: f64) -> f64 {
        self.rewards
            .iter()
            .enumerate()
            .map(|(j, r)| gamma.powi(j as i32) * r)
            .sum()
    }

    pub fn min_void(&self) -> f64 {
        self.void_probabilities.iter().copied().fold(1.0, f64::min)
    }
}

/// PIMS rollout of one action. The pseudo-posterior keeps the particles of
/// the prediction chain and carries its own existence and weights forward
/// through every ideal-measurement update.
pub fn pims_rollout(
    chain: &PredictionChain,
    action: &ActionSequence,
    model: &LikelihoodModel,
    dynamics: &JmsModel,
    cfg: &PlannerConfig,
) -> Result<RolloutResult> {
    let steps = (cfg.planning_interval / dynamics.interval()).round().max(1.0) as i32;
    let decay = dynamics.survival().powi(steps);
    let mut posterior: Vec<BernoulliComponent> = chain.start.components().cloned().collect();
    let mut rewards = Vec::with_capacity(chain.predicted.len());
    let mut voids = Vec::with_capacity(chain.predicted.len());
    for ((prior, objects), uav) in chain.predicted.iter().zip(&chain.ideal_objects).zip(&action.waypoints) {
        voids.push(void_probability(prior, uav.planar(), cfg.r_min));
        let z = model.ideal_measurement(objects, uav, 0)?;
        for (post, pc) in posterior.iter_mut().zip(prior.components()) {
            post.existence = (post.existence * decay).clamp(0.0, 1.0);
            post.particles.clone_from(&pc.particles);
            let log_g = pc
                .particles
                .iter()
                .map(|p| model.particle_log_likelihood(pc.label, p, &z, uav))
                .collect::<Result<Vec<_>>>()?;
            update_component(post, &log_g);
        }
        let pairs: Vec<_> = posterior
            .iter()
            .zip(prior.components())
            .map(|(two, one)| {
                (
                    LabelWeights {
                        existence: two.existence,
                        weights: &two.weights,
                    },
                    LabelWeights {
                        existence: one.existence,
                        weights: &one.weights,
                    },
                )
            })
            .collect();
        rewards.push(cfg.divergence.evaluate(&pairs)?);
    }
    Ok(RolloutResult {
        rewards,
        void_probabilities: voids,
    })
}

/// Evaluation of one candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateEval {
    pub action: ActionSequence,
    pub reward: f64,
    pub min_void: f64,
    pub feasible: bool,
}

/// Outcome of one planning epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanDecision {
    pub chosen: usize,
    pub candidates: Vec<CandidateEval>,
    /// No candidate met the void constraint; the safest one was taken.
    pub fallback: bool,
}

impl PlanDecision {
    pub fn action(&self) -> &ActionSequence {
        &self.candidates[self.chosen].action
    }

    pub fn chosen_eval(&self) -> &CandidateEval {
        &self.candidates[self.chosen]
    }
}

/// `a` is better than `b` when its key is larger beyond a relative
/// tolerance, or equal within it and the turn is smaller, or, failing that,
/// the deltas are lexicographically smaller.
fn prefer(a: &CandidateEval, a_key: f64, b: &CandidateEval, b_key: f64) -> bool {
    let tol = 1e-12 * a_key.abs().max(b_key.abs());
    if a_key > b_key + tol {
        return true;
    }
    if a_key < b_key - tol {
        return false;
    }
    let (ta, tb) = (a.action.total_turn(), b.action.total_turn());
    if ta != tb {
        return ta < tb;
    }
    a.action.deltas < b.action.deltas
}

/// Pick among evaluated candidates: best reward among feasible ones, else
/// the one with the largest minimum void probability.
pub fn select(candidates: Vec<CandidateEval>) -> PlanDecision {
    let any_feasible = candidates.iter().any(|c| c.feasible);
    let key = |c: &CandidateEval| if any_feasible { c.reward } else { c.min_void };
    let mut best: Option<usize> = None;
    for (i, c) in candidates.iter().enumerate() {
        if any_feasible && !c.feasible {
            continue;
        }
        best = match best {
            Some(b) if !prefer(c, key(c), &candidates[b], key(&candidates[b])) => Some(b),
            _ => Some(i),
        };
    }
    PlanDecision {
        chosen: best.unwrap_or(0),
        candidates,
        fallback: !any_feasible,
    }
}

/// Planner bound to a dynamics and measurement model.
#[derive(Debug, Clone)]
pub struct Planner<'a> {
    pub cfg: PlannerConfig,
    pub dynamics: &'a JmsModel,
    pub model: &'a LikelihoodModel,
    pub region: Region,
}

impl<'a> Planner<'a> {
    pub fn new(cfg: PlannerConfig, dynamics: &'a JmsModel, model: &'a LikelihoodModel, region: Region) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            dynamics,
            model,
            region,
        })
    }

    pub fn evaluate<R: Rng + ?Sized>(
        &self,
        belief: &LmbBelief,
        uav: &UavState,
        rng: &mut R,
    ) -> Result<Vec<CandidateEval>> {
        let actions = enumerate_actions(uav, &self.cfg, &self.region);
        let chain = prediction_chain(belief, self.dynamics, &self.cfg, rng)?;
        actions
            .into_par_iter()
            .map(|action| {
                let r = pims_rollout(&chain, &action, self.model, self.dynamics, &self.cfg)?;
                let min_void = r.min_void();
                Ok(CandidateEval {
                    reward: r.discounted_reward(self.cfg.discount),
                    min_void,
                    feasible: min_void > self.cfg.void_threshold,
                    action,
                })
            })
            .collect()
    }

    pub fn plan<R: Rng + ?Sized>(&self, belief: &LmbBelief, uav: &UavState, rng: &mut R) -> Result<PlanDecision> {
        Ok(select(self.evaluate(belief, uav, rng)?))
    }
}

/// Header of the decision log.
pub const DECISION_HEADER: &str =
    "time,chosen,deltas,reward,min_void,feasible_count,fallback,rewards,void_probabilities";

/// One CSV line per planning epoch; candidate rewards and void
/// probabilities are `;`-separated in enumeration order.
pub fn write_decision<W: Write>(out: &mut W, time: f64, d: &PlanDecision) -> std::io::Result<()> {
    let join = |f: &dyn Fn(&CandidateEval) -> f64| {
        d.candidates
            .iter()
            .map(|c| format!("{:e}", f(c)))
            .collect::<Vec<_>>()
            .join(";")
    };
    let c = d.chosen_eval();
    let deltas = c
        .action
        .deltas
        .iter()
        .map(|x| format!("{x:.6}"))
        .collect::<Vec<_>>()
        .join(";");
    writeln!(
        out,
        "{time},{},{deltas},{:e},{:e},{},{},{},{}",
        d.chosen,
        c.reward,
        c.min_void,
        d.candidates.iter().filter(|c| c.feasible).count(),
        d.fallback,
        join(&|c| c.reward),
        join(&|c| c.min_void),
    )
}
