//! Jump-Markov single-object dynamics, survival and LMB birth.

use std::collections::BTreeSet;

use nalgebra::{Matrix2, Matrix4, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::tbd_lmb::BernoulliComponent;
use crate::types::{Kinematics, Label, Mode, Particle};

/// Serializable dynamics configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DynamicsParams {
    /// Propagation interval, equal to the pulse period (s).
    pub interval: f64,
    /// Diagonal of the wandering-mode process covariance.
    pub wd_process_diag: [f64; 4],
    /// Acceleration noise standard deviation of the CV mode (m/s^2).
    pub sigma_cv: f64,
    /// Mode transition matrix, row = previous mode.
    pub mode_transition: [[f64; 2]; 2],
    /// Pulse-offset drift per step, as a fraction of the pulse period.
    pub sigma_tau: f64,
    pub survival: f64,
}

impl Default for DynamicsParams {
    fn default() -> Self {
        Self {
            interval: 1.0,
            wd_process_diag: [0.25, 2.25, 0.25, 2.25],
            sigma_cv: 0.05,
            mode_transition: [[0.99, 0.01], [0.01, 0.99]],
            sigma_tau: 0.002,
            survival: 0.99,
        }
    }
}

/// Linear-Gaussian motion for one mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeDynamics {
    pub transition: Matrix4<f64>,
    pub process_cov: Matrix4<f64>,
    noise_factor: Matrix4<f64>,
}

impl ModeDynamics {
    pub fn new(transition: Matrix4<f64>, process_cov: Matrix4<f64>) -> Result<Self> {
        if (process_cov - process_cov.transpose()).amax() > 1e-12 * (1.0 + process_cov.amax()) {
            return Err(invalid("process_cov", "not symmetric"));
        }
        let eig = SymmetricEigen::new(process_cov);
        let tol = 1e-12 * (1.0 + process_cov.amax());
        if eig.eigenvalues.iter().any(|&v| v < -tol) {
            return Err(invalid("process_cov", "not positive semidefinite"));
        }
        let sqrt_vals = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
        let noise_factor = eig.eigenvectors * Matrix4::from_diagonal(&sqrt_vals);
        Ok(Self {
            transition,
            process_cov,
            noise_factor,
        })
    }

    pub fn step<R: Rng + ?Sized>(&self, kin: &Kinematics, rng: &mut R) -> Kinematics {
        let mut out = self.transition * kin;
        if self.noise_factor.amax() > 0.0 {
            let n = Kinematics::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal));
            out += self.noise_factor * n;
        }
        out
    }
}

/// Per-axis white-noise-acceleration block `[[T^3/3, T^2/2], [T^2/2, T]]`
/// placed on the `[p_x, v_x]` and `[p_y, v_y]` diagonal blocks.
pub fn cv_process_cov(sigma_cv: f64, interval: f64) -> Result<Matrix4<f64>> {
    if !(sigma_cv > 0.0) {
        return Err(invalid("sigma_cv", format!("must be positive, got {sigma_cv}")));
    }
    let t = interval;
    let block = Matrix2::new(t.powi(3) / 3.0, t * t / 2.0, t * t / 2.0, t) * (sigma_cv * sigma_cv);
    Ok(axis_blocks(&block))
}

/// `[[1, T], [0, 1]]` per axis.
pub fn cv_transition(interval: f64) -> Matrix4<f64> {
    axis_blocks(&Matrix2::new(1.0, interval, 0.0, 1.0))
}

pub fn wd_transition() -> Matrix4<f64> {
    Matrix4::from_diagonal(&Kinematics::new(1.0, 0.0, 1.0, 0.0))
}

fn axis_blocks(block: &Matrix2<f64>) -> Matrix4<f64> {
    let mut m = Matrix4::zeros();
    m.fixed_view_mut::<2, 2>(0, 0).copy_from(block);
    m.fixed_view_mut::<2, 2>(2, 2).copy_from(block);
    m
}

/// Two-mode jump-Markov system with pulse-offset random walk.
#[derive(Debug, Clone, PartialEq)]
pub struct JmsModel {
    interval: f64,
    modes: [ModeDynamics; 2],
    mode_transition: [[f64; 2]; 2],
    tau_std: f64,
    survival: f64,
}

impl JmsModel {
    pub fn new(params: &DynamicsParams) -> Result<Self> {
        if !(params.interval > 0.0) {
            return Err(invalid("interval", format!("must be positive, got {}", params.interval)));
        }
        let wd = ModeDynamics::new(
            wd_transition(),
            Matrix4::from_diagonal(&Kinematics::from(params.wd_process_diag)),
        )?;
        let cv = ModeDynamics::new(
            cv_transition(params.interval),
            cv_process_cov(params.sigma_cv, params.interval)?,
        )?;
        Self::from_parts(
            params.interval,
            [wd, cv],
            params.mode_transition,
            params.sigma_tau,
            params.survival,
        )
    }

    /// Assemble from explicit per-mode dynamics (index order WD, CV).
    pub fn from_parts(
        interval: f64,
        modes: [ModeDynamics; 2],
        mode_transition: [[f64; 2]; 2],
        sigma_tau: f64,
        survival: f64,
    ) -> Result<Self> {
        if !(interval > 0.0) {
            return Err(invalid("interval", format!("must be positive, got {interval}")));
        }
        for row in &mode_transition {
            if row.iter().any(|&p| !(0.0..=1.0).contains(&p)) || (row[0] + row[1] - 1.0).abs() > 1e-12 {
                return Err(invalid("mode_transition", format!("row {row:?} is not a distribution")));
            }
        }
        if !(sigma_tau >= 0.0) {
            return Err(invalid("sigma_tau", format!("must be non-negative, got {sigma_tau}")));
        }
        if !(survival > 0.0 && survival <= 1.0) {
            return Err(invalid("survival", format!("must lie in (0, 1], got {survival}")));
        }
        Ok(Self {
            interval,
            modes,
            mode_transition,
            tau_std: sigma_tau * interval,
            survival,
        })
    }

    pub fn interval(&self) -> f64 {
        self.interval
    }

    pub fn survival(&self) -> f64 {
        self.survival
    }

    pub fn mode(&self, mode: Mode) -> &ModeDynamics {
        &self.modes[mode.index()]
    }

    pub fn mode_transition(&self) -> &[[f64; 2]; 2] {
        &self.mode_transition
    }

    /// Offset random-walk variance per step.
    pub fn tau_variance(&self) -> f64 {
        self.tau_std * self.tau_std
    }

    /// Draw the next mode given the current one.
    pub fn sample_mode<R: Rng + ?Sized>(&self, from: Mode, rng: &mut R) -> Mode {
        let row = &self.mode_transition[from.index()];
        if rng.random::<f64>() < row[0] {
            Mode::Wandering
        } else {
            Mode::ConstantVelocity
        }
    }
}

/// Wrap an offset into `[0, period)`.
pub fn wrap_offset(tau: f64, period: f64) -> f64 {
    let w = tau.rem_euclid(period);
    if w >= period {
        0.0
    } else {
        w
    }
}

/// One step of the jump-Markov transition. Kinematics follow the mode the
/// particle was in; the new mode is then drawn from the transition row.
pub fn propagate_particle<R: Rng + ?Sized>(p: &Particle, model: &JmsModel, rng: &mut R) -> Particle {
    let kin = model.mode(p.mode).step(&p.kin, rng);
    let tau = if model.tau_std > 0.0 {
        let n: f64 = rng.sample(StandardNormal);
        wrap_offset(p.tau + model.tau_std * n, model.interval)
    } else {
        p.tau
    };
    let mode = model.sample_mode(p.mode, rng);
    Particle { kin, mode, tau }
}

/// Gaussian birth density for one label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BirthSpec {
    pub label: Label,
    pub existence: f64,
    pub mean: [f64; 4],
    /// Diagonal of the kinematic birth covariance.
    pub cov_diag: [f64; 4],
}

/// LMB birth model. Offsets are drawn uniformly over one pulse period and
/// modes from `mode_prior`.
#[derive(Debug, Clone, PartialEq)]
pub struct BirthModel {
    pub specs: Vec<BirthSpec>,
    pub mode_prior: [f64; 2],
    pub period: f64,
}

impl BirthModel {
    pub fn new(specs: Vec<BirthSpec>, mode_prior: [f64; 2], period: f64) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for s in &specs {
            if !(s.existence > 0.0 && s.existence < 1.0) {
                return Err(invalid("existence", format!("birth r must lie in (0, 1), got {}", s.existence)));
            }
            if s.cov_diag.iter().any(|&v| !(v >= 0.0)) {
                return Err(invalid("cov_diag", "variances must be non-negative"));
            }
            if !seen.insert(s.label) {
                return Err(Error::LabelCollision(s.label));
            }
        }
        if mode_prior.iter().any(|&p| !(p >= 0.0)) || (mode_prior[0] + mode_prior[1] - 1.0).abs() > 1e-12 {
            return Err(invalid("mode_prior", format!("{mode_prior:?} is not a distribution")));
        }
        if !(period > 0.0) {
            return Err(invalid("period", format!("must be positive, got {period}")));
        }
        Ok(Self {
            specs,
            mode_prior,
            period,
        })
    }

    pub fn empty(period: f64) -> Self {
        Self {
            specs: Vec::new(),
            mode_prior: [0.5, 0.5],
            period,
        }
    }

    pub fn sample_particle<R: Rng + ?Sized>(&self, spec: &BirthSpec, rng: &mut R) -> Particle {
        let kin = Kinematics::from_fn(|i, _| {
            let n: f64 = rng.sample(StandardNormal);
            spec.mean[i] + spec.cov_diag[i].sqrt() * n
        });
        let tau = wrap_offset(rng.random::<f64>() * self.period, self.period);
        let mode = if rng.random::<f64>() < self.mode_prior[0] {
            Mode::Wandering
        } else {
            Mode::ConstantVelocity
        };
        Particle { kin, mode, tau }
    }

    fn spawn<R: Rng + ?Sized>(&self, spec: &BirthSpec, n_particles: usize, rng: &mut R) -> BernoulliComponent {
        let particles = (0..n_particles).map(|_| self.sample_particle(spec, rng)).collect();
        BernoulliComponent::uniform(spec.label, spec.existence, particles)
    }
}

/// Instantiate every birth component. Fails if a birth label is already live.
pub fn spawn_births<R: Rng + ?Sized>(
    model: &BirthModel,
    live: &BTreeSet<Label>,
    n_particles: usize,
    rng: &mut R,
) -> Result<Vec<BernoulliComponent>> {
    if let Some(s) = model.specs.iter().find(|s| live.contains(&s.label)) {
        return Err(Error::LabelCollision(s.label));
    }
    Ok(model.specs.iter().map(|s| model.spawn(s, n_particles, rng)).collect())
}

/// Instantiate birth components only for labels that are not live.
pub fn spawn_missing<R: Rng + ?Sized>(
    model: &BirthModel,
    live: &BTreeSet<Label>,
    n_particles: usize,
    rng: &mut R,
) -> Vec<BernoulliComponent> {
    model
        .specs
        .iter()
        .filter(|s| !live.contains(&s.label))
        .map(|s| model.spawn(s, n_particles, rng))
        .collect()
}
