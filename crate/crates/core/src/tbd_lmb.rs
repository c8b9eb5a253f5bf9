//! Particle labeled multi-Bernoulli track-before-detect filter.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{Matrix4, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{propagate_particle, spawn_missing, BirthModel, BirthSpec, JmsModel};
use crate::error::{invalid, Error, Result};
use crate::likelihood::LikelihoodModel;
use crate::spectrogram::Spectrogram;
use crate::types::{Kinematics, Label, Mode, ObjectState, Particle, UavState};

/// Lower and upper clamp on existence probabilities.
pub const R_MIN: f64 = 1e-12;
pub const R_MAX: f64 = 1.0 - 1e-12;

/// One labeled Bernoulli hypothesis with a weighted particle cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct BernoulliComponent {
    pub label: Label,
    pub existence: f64,
    pub particles: Vec<Particle>,
    pub weights: Vec<f64>,
}

impl BernoulliComponent {
    pub fn new(label: Label, existence: f64, particles: Vec<Particle>, weights: Vec<f64>) -> Result<Self> {
        if particles.is_empty() {
            return Err(Error::EmptyInput("particles"));
        }
        if particles.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: format!("{} weights", particles.len()),
                actual: weights.len().to_string(),
            });
        }
        if !(0.0..=1.0).contains(&existence) {
            return Err(invalid("existence", format!("must lie in [0, 1], got {existence}")));
        }
        let total: f64 = weights.iter().sum();
        if weights.iter().any(|&w| !(w >= 0.0)) || (total - 1.0).abs() > 1e-9 {
            return Err(Error::DegenerateWeights);
        }
        Ok(Self {
            label,
            existence,
            particles,
            weights,
        })
    }

    /// Equal-weight cloud.
    pub fn uniform(label: Label, existence: f64, particles: Vec<Particle>) -> Self {
        let w = 1.0 / particles.len() as f64;
        let weights = vec![w; particles.len()];
        Self {
            label,
            existence,
            particles,
            weights,
        }
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    /// Effective sample size `1 / sum w^2`.
    pub fn ess(&self) -> f64 {
        1.0 / self.weights.iter().map(|w| w * w).sum::<f64>()
    }

    pub fn mean(&self) -> Kinematics {
        self.particles
            .iter()
            .zip(&self.weights)
            .fold(Kinematics::zeros(), |acc, (p, &w)| acc + p.kin * w)
    }

    /// Weighted circular mean of the pulse offset over `period`.
    pub fn mean_offset(&self, period: f64) -> f64 {
        let k = std::f64::consts::TAU / period;
        let (s, c) = self
            .particles
            .iter()
            .zip(&self.weights)
            .fold((0.0, 0.0), |(s, c), (p, &w)| {
                let (ps, pc) = (k * p.tau).sin_cos();
                (s + w * ps, c + w * pc)
            });
        crate::dynamics::wrap_offset(s.atan2(c) / k, period)
    }

    pub fn variance(&self) -> Kinematics {
        let mean = self.mean();
        self.particles.iter().zip(&self.weights).fold(Kinematics::zeros(), |acc, (p, &w)| {
            let d = p.kin - mean;
            acc + d.component_mul(&d) * w
        })
    }

    /// Weighted covariance of the kinematic state.
    pub fn covariance(&self) -> Matrix4<f64> {
        let mean = self.mean();
        self.particles.iter().zip(&self.weights).fold(Matrix4::zeros(), |acc, (p, &w)| {
            let d = p.kin - mean;
            acc + d * d.transpose() * w
        })
    }

    /// Weighted covariance of the kinematics of the particles in `mode`,
    /// normalized within that mode. Zero when the mode carries no weight.
    pub fn mode_covariance(&self, mode: Mode) -> Matrix4<f64> {
        let members = || {
            self.particles
                .iter()
                .zip(&self.weights)
                .filter(move |(p, _)| p.mode == mode)
        };
        let total: f64 = members().map(|(_, &w)| w).sum();
        if !(total > 0.0) {
            return Matrix4::zeros();
        }
        let mean = members().fold(Kinematics::zeros(), |acc, (p, &w)| acc + p.kin * w) / total;
        members().fold(Matrix4::zeros(), |acc, (p, &w)| {
            let d = p.kin - mean;
            acc + d * d.transpose() * (w / total)
        })
    }

    /// Probability mass per mode, indexed by [`Mode::index`].
    pub fn mode_probabilities(&self) -> [f64; 2] {
        let mut out = [0.0; 2];
        for (p, &w) in self.particles.iter().zip(&self.weights) {
            out[p.mode.index()] += w;
        }
        out
    }

    /// Weight of particles whose planar position lies within `radius` of
    /// `center`.
    pub fn mass_within(&self, center: [f64; 2], radius: f64) -> f64 {
        let r2 = radius * radius;
        self.particles
            .iter()
            .zip(&self.weights)
            .filter(|(p, _)| {
                let dx = p.kin[0] - center[0];
                let dy = p.kin[2] - center[1];
                dx * dx + dy * dy < r2
            })
            .map(|(_, &w)| w)
            .sum()
    }
}

/// Outcome of updating one component with per-particle log-likelihoods.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ComponentUpdate {
    Updated,
    /// Every particle had zero or non-finite likelihood; the prior was kept.
    Degenerate,
}

/// Bayes update of one Bernoulli component given `ln g` at each particle.
pub fn update_component(c: &mut BernoulliComponent, log_g: &[f64]) -> ComponentUpdate {
    debug_assert_eq!(c.len(), log_g.len());
    let lmax = log_g
        .iter()
        .zip(&c.weights)
        .filter(|(_, &w)| w > 0.0)
        .map(|(&l, _)| l)
        .fold(f64::NEG_INFINITY, f64::max);
    if !lmax.is_finite() {
        return ComponentUpdate::Degenerate;
    }
    let scaled: Vec<f64> = log_g
        .iter()
        .zip(&c.weights)
        .map(|(&l, &w)| w * (l - lmax).exp())
        .collect();
    let sum: f64 = scaled.iter().sum();
    if !(sum > 0.0 && sum.is_finite()) {
        return ComponentUpdate::Degenerate;
    }
    let log_psi = lmax + sum.ln();
    let r = c.existence.clamp(R_MIN, R_MAX);
    // r' = r psi / (1 - r + r psi)
    let log_odds = r.ln() - (-r).ln_1p() + log_psi;
    let r_new = 1.0 / (1.0 + (-log_odds).exp());
    c.existence = r_new.clamp(R_MIN, R_MAX);
    for (w, s) in c.weights.iter_mut().zip(scaled) {
        *w = s / sum;
    }
    ComponentUpdate::Updated
}

/// Systematic resampling to `n` equally weighted particles.
pub fn resample<R: Rng + ?Sized>(c: &BernoulliComponent, n: usize, rng: &mut R) -> Result<BernoulliComponent> {
    let total: f64 = c.weights.iter().sum();
    if !(total > 0.0 && total.is_finite()) || n == 0 {
        return Err(Error::DegenerateWeights);
    }
    let step = total / n as f64;
    let mut u = rng.random::<f64>() * step;
    let mut out = Vec::with_capacity(n);
    let mut cum = c.weights[0];
    let mut i = 0;
    for _ in 0..n {
        while u > cum && i + 1 < c.weights.len() {
            i += 1;
            cum += c.weights[i];
        }
        out.push(c.particles[i]);
        u += step;
    }
    Ok(BernoulliComponent::uniform(c.label, c.existence, out))
}

/// Gaussian-kernel bandwidth for `n` particles in four dimensions.
pub fn kernel_bandwidth(n: usize) -> f64 {
    (4.0 / (6.0 * n as f64)).powf(1.0 / 8.0)
}

/// Jitter every particle's kinematics with `N(0, kernels[mode])`, using
/// the kernel of the particle's own mode.
pub fn jitter<R: Rng + ?Sized>(c: &mut BernoulliComponent, kernels: &[Matrix4<f64>; 2], rng: &mut R) {
    let factors = kernels.map(|k| {
        let eig = SymmetricEigen::new(k);
        eig.eigenvectors * Matrix4::from_diagonal(&eig.eigenvalues.map(|v| v.max(0.0).sqrt()))
    });
    for p in &mut c.particles {
        let n = Kinematics::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal));
        p.kin += factors[p.mode.index()] * n;
    }
}

/// Fold a fresh birth of the same label into a surviving component: the
/// object either already existed or appears now with probability
/// `spec.existence`. Birth particles are added only when their share of
/// the mixture is worth at least half a particle of `n`.
pub fn mix_birth<R: Rng + ?Sized>(
    c: &mut BernoulliComponent,
    births: &BirthModel,
    spec: &BirthSpec,
    n: usize,
    rng: &mut R,
) -> bool {
    let r_s = c.existence;
    let r = r_s + (1.0 - r_s) * spec.existence;
    let w_b = (1.0 - r_s) * spec.existence / r;
    let n_b = (w_b * n as f64).round() as usize;
    if n_b == 0 {
        return false;
    }
    for w in &mut c.weights {
        *w *= 1.0 - w_b;
    }
    for _ in 0..n_b {
        c.particles.push(births.sample_particle(spec, rng));
        c.weights.push(w_b / n_b as f64);
    }
    c.existence = r;
    true
}

/// Labeled multi-Bernoulli belief.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LmbBelief {
    components: BTreeMap<Label, BernoulliComponent>,
}

/// Reported object estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub state: ObjectState,
    pub existence: f64,
    pub mode_probabilities: [f64; 2],
}

impl LmbBelief {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_components(components: impl IntoIterator<Item = BernoulliComponent>) -> Result<Self> {
        let mut b = Self::new();
        for c in components {
            b.insert(c)?;
        }
        Ok(b)
    }

    pub fn insert(&mut self, c: BernoulliComponent) -> Result<()> {
        if self.components.contains_key(&c.label) {
            return Err(Error::LabelCollision(c.label));
        }
        self.components.insert(c.label, c);
        Ok(())
    }

    pub fn remove(&mut self, label: Label) -> Option<BernoulliComponent> {
        self.components.remove(&label)
    }

    pub fn get(&self, label: Label) -> Option<&BernoulliComponent> {
        self.components.get(&label)
    }

    pub fn get_mut(&mut self, label: Label) -> Option<&mut BernoulliComponent> {
        self.components.get_mut(&label)
    }

    pub fn components(&self) -> impl Iterator<Item = &BernoulliComponent> {
        self.components.values()
    }

    pub fn components_mut(&mut self) -> impl Iterator<Item = &mut BernoulliComponent> {
        self.components.values_mut()
    }

    pub fn labels(&self) -> BTreeSet<Label> {
        self.components.keys().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Expected number of objects.
    pub fn expected_cardinality(&self) -> f64 {
        self.components().map(|c| c.existence).sum()
    }

    /// Cardinality distribution over `0..=len` by convolving Bernoulli pmfs.
    pub fn cardinality_pmf(&self) -> Vec<f64> {
        cardinality_pmf(self.components().map(|c| c.existence))
    }

    /// Components with `r > threshold`, summarized by their weighted means.
    pub fn extract_estimate(&self, threshold: f64, period: f64) -> Vec<Estimate> {
        self.components()
            .filter(|c| c.existence > threshold)
            .map(|c| {
                let probs = c.mode_probabilities();
                let mode = if probs[0] >= probs[1] {
                    Mode::Wandering
                } else {
                    Mode::ConstantVelocity
                };
                Estimate {
                    state: ObjectState::new(c.mean(), mode, c.mean_offset(period), c.label),
                    existence: c.existence,
                    mode_probabilities: probs,
                }
            })
            .collect()
    }

    pub fn snapshot(&self, step: usize, period: f64) -> BeliefSnapshot {
        BeliefSnapshot {
            step,
            components: self
                .components()
                .map(|c| ComponentSnapshot {
                    label: c.label,
                    existence: c.existence,
                    mean: c.mean().into(),
                    variance: c.variance().into(),
                    tau: c.mean_offset(period),
                    mode_probabilities: c.mode_probabilities(),
                    particles: c.len(),
                })
                .collect(),
        }
    }
}

/// Cardinality pmf of independent Bernoulli variables.
pub fn cardinality_pmf(existence: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut pmf = vec![1.0];
    for r in existence {
        let mut next = vec![0.0; pmf.len() + 1];
        for (n, &p) in pmf.iter().enumerate() {
            next[n] += p * (1.0 - r);
            next[n + 1] += p * r;
        }
        pmf = next;
    }
    pmf
}

/// JSON summary of one component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentSnapshot {
    pub label: Label,
    pub existence: f64,
    pub mean: [f64; 4],
    pub variance: [f64; 4],
    pub tau: f64,
    pub mode_probabilities: [f64; 2],
    pub particles: usize,
}

/// JSON summary of a belief at one step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeliefSnapshot {
    pub step: usize,
    pub components: Vec<ComponentSnapshot>,
}

/// LMB prediction: survivors are scaled by `p_S` and propagated, then
/// `births` are appended.
pub fn predict<R: Rng + ?Sized>(
    belief: &LmbBelief,
    model: &JmsModel,
    births: Vec<BernoulliComponent>,
    rng: &mut R,
) -> Result<LmbBelief> {
    let mut out = LmbBelief::new();
    for c in belief.components() {
        let particles = c.particles.iter().map(|p| propagate_particle(p, model, rng)).collect();
        out.insert(BernoulliComponent {
            label: c.label,
            existence: (c.existence * model.survival()).clamp(0.0, 1.0),
            particles,
            weights: c.weights.clone(),
        })?;
    }
    for b in births {
        out.insert(b)?;
    }
    Ok(out)
}

/// Labels whose update collapsed and kept their prior.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct UpdateReport {
    pub degenerate: Vec<Label>,
}

/// Per-particle `ln g` for one component. Parallel over particles; the
/// output order matches the particle order.
pub fn component_log_likelihoods(
    c: &BernoulliComponent,
    z: &Spectrogram,
    uav: &UavState,
    model: &LikelihoodModel,
) -> Result<Vec<f64>> {
    c.particles
        .par_iter()
        .with_min_len(256)
        .map(|p| model.particle_log_likelihood(c.label, p, z, uav))
        .collect()
}

/// Separable-likelihood LMB update.
pub fn update(
    belief: &LmbBelief,
    z: &Spectrogram,
    uav: &UavState,
    model: &LikelihoodModel,
) -> Result<(LmbBelief, UpdateReport)> {
    let rx = model.receiver();
    if z.frames() != rx.frames || z.bins() != rx.fft_len {
        return Err(Error::DimensionMismatch {
            expected: format!("{}x{}", rx.frames, rx.fft_len),
            actual: format!("{}x{}", z.frames(), z.bins()),
        });
    }
    let mut out = belief.clone();
    let mut report = UpdateReport::default();
    for c in out.components_mut() {
        let log_g = component_log_likelihoods(c, z, uav, model)?;
        if update_component(c, &log_g) == ComponentUpdate::Degenerate {
            report.degenerate.push(c.label);
        }
    }
    Ok((out, report))
}

/// Filter tuning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FilterParams {
    pub particles: usize,
    /// Resample when ESS falls below this fraction of the particle count.
    pub ess_fraction: f64,
    /// Existence threshold for reporting an object.
    pub extract_threshold: f64,
    /// Components below this existence are dropped and later re-born.
    pub prune_threshold: f64,
    /// Multiplier on the Gaussian-kernel bandwidth used to jitter particles
    /// after resampling; zero disables it.
    pub regularization: f64,
    /// Variances added to the jitter kernel, `[p_x, v_x, p_y, v_y]`.
    pub jitter_floor: [f64; 4],
    /// Keep adding birth mass to live labels of the birth model, so that
    /// an object may appear at any time.
    pub birth_refresh: bool,
}

impl Default for FilterParams {
    fn default() -> Self {
        Self {
            particles: 2000,
            ess_fraction: 0.5,
            extract_threshold: 0.5,
            prune_threshold: 1e-10,
            regularization: 1.0,
            jitter_floor: [0.0; 4],
            birth_refresh: true,
        }
    }
}

impl FilterParams {
    pub fn validate(&self) -> Result<()> {
        if self.particles == 0 {
            return Err(invalid("particles", "must be positive"));
        }
        if !(0.0..=1.0).contains(&self.ess_fraction) {
            return Err(invalid("ess_fraction", format!("must lie in [0, 1], got {}", self.ess_fraction)));
        }
        if !(0.0..1.0).contains(&self.extract_threshold) {
            return Err(invalid("extract_threshold", format!("got {}", self.extract_threshold)));
        }
        if !(0.0..1.0).contains(&self.prune_threshold) {
            return Err(invalid("prune_threshold", format!("got {}", self.prune_threshold)));
        }
        if !(self.regularization >= 0.0) || self.jitter_floor.iter().any(|&v| !(v >= 0.0)) {
            return Err(invalid("regularization", "bandwidth and floor must be non-negative"));
        }
        Ok(())
    }
}

/// Recursive TBD-LMB filter: predict with births for absent labels,
/// update, resample, prune.
#[derive(Debug, Clone)]
pub struct LmbFilter {
    pub belief: LmbBelief,
    pub dynamics: JmsModel,
    pub births: BirthModel,
    pub params: FilterParams,
}

impl LmbFilter {
    pub fn new(dynamics: JmsModel, births: BirthModel, params: FilterParams) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            belief: LmbBelief::new(),
            dynamics,
            births,
            params,
        })
    }

    pub fn predict<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<()> {
        let live = self.belief.labels();
        let newborn = spawn_missing(&self.births, &live, self.params.particles, rng);
        self.belief = predict(&self.belief, &self.dynamics, newborn, rng)?;
        if self.params.birth_refresh {
            for spec in self.births.specs.iter().filter(|s| live.contains(&s.label)) {
                if let Some(c) = self.belief.get_mut(spec.label) {
                    mix_birth(c, &self.births, spec, self.params.particles, rng);
                }
            }
        }
        Ok(())
    }

    pub fn update<R: Rng + ?Sized>(
        &mut self,
        z: &Spectrogram,
        uav: &UavState,
        model: &LikelihoodModel,
        rng: &mut R,
    ) -> Result<UpdateReport> {
        let (mut belief, report) = update(&self.belief, z, uav, model)?;
        let n = self.params.particles;
        for c in belief.components_mut() {
            let depleted = c.ess() < self.params.ess_fraction * c.len() as f64;
            if depleted || c.len() != n {
                // only an informative update earns jitter; otherwise the
                // kernel would keep inflating an uninformed cloud
                // and each mode is smoothed with its own spread so that
                // wandering velocities never leak into constant-velocity ones
                let h = self.params.regularization * kernel_bandwidth(n);
                let floor = Matrix4::from_diagonal(&self.params.jitter_floor.into());
                let kernels = Mode::ALL.map(|m| c.mode_covariance(m) * (h * h) + floor);
                *c = resample(c, n, rng)?;
                if depleted && kernels.iter().any(|k| k.amax() > 0.0) {
                    jitter(c, &kernels, rng);
                }
            }
        }
        let dead: Vec<Label> = belief
            .components()
            .filter(|c| c.existence < self.params.prune_threshold)
            .map(|c| c.label)
            .collect();
        for l in dead {
            belief.remove(l);
        }
        self.belief = belief;
        Ok(report)
    }

    pub fn step<R: Rng + ?Sized>(
        &mut self,
        z: &Spectrogram,
        uav: &UavState,
        model: &LikelihoodModel,
        rng: &mut R,
    ) -> Result<UpdateReport> {
        self.predict(rng)?;
        self.update(z, uav, model, rng)
    }

    pub fn estimate(&self) -> Vec<Estimate> {
        self.belief
            .extract_estimate(self.params.extract_threshold, self.dynamics.interval())
    }
}
