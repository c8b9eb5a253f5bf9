//! Shared domain types used by every stage of the pipeline.

use std::fmt;

use nalgebra::Vector4;
use serde::{Deserialize, Serialize};

/// Frequency label identifying one transmitter. Labels are static for the
/// lifetime of an object.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Label(pub u32);

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Planar kinematic state `[p_x, v_x, p_y, v_y]`.
pub type Kinematics = Vector4<f64>;

/// Dynamic mode of the jump-Markov motion model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Wandering: velocity redrawn every step and not applied to position.
    Wandering,
    /// Constant velocity.
    ConstantVelocity,
}

impl Mode {
    pub const ALL: [Mode; 2] = [Mode::Wandering, Mode::ConstantVelocity];

    pub fn index(self) -> usize {
        match self {
            Mode::Wandering => 0,
            Mode::ConstantVelocity => 1,
        }
    }

    pub fn from_index(i: usize) -> Option<Mode> {
        Mode::ALL.get(i).copied()
    }

    pub fn short_name(self) -> &'static str {
        match self {
            Mode::Wandering => "WD",
            Mode::ConstantVelocity => "CV",
        }
    }
}

/// Unlabeled single-object state carried by a particle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Particle {
    pub kin: Kinematics,
    pub mode: Mode,
    /// Pulse offset in seconds, kept in `[0, T0)`.
    pub tau: f64,
}

impl Particle {
    pub fn new(kin: Kinematics, mode: Mode, tau: f64) -> Self {
        Self { kin, mode, tau }
    }

    pub fn position(&self) -> [f64; 2] {
        [self.kin[0], self.kin[2]]
    }
}

/// Labeled single-object state `[x, s, tau, lambda]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectState {
    pub kin: Kinematics,
    pub mode: Mode,
    pub tau: f64,
    pub label: Label,
}

impl ObjectState {
    pub fn new(kin: Kinematics, mode: Mode, tau: f64, label: Label) -> Self {
        Self {
            kin,
            mode,
            tau,
            label,
        }
    }

    pub fn from_particle(p: &Particle, label: Label) -> Self {
        Self::new(p.kin, p.mode, p.tau, label)
    }

    pub fn particle(&self) -> Particle {
        Particle::new(self.kin, self.mode, self.tau)
    }

    pub fn position(&self) -> [f64; 2] {
        [self.kin[0], self.kin[2]]
    }
}

/// Observer pose: position (z held at the flight altitude) and heading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UavState {
    pub position: [f64; 3],
    pub heading: f64,
}

impl UavState {
    pub fn new(x: f64, y: f64, z: f64, heading: f64) -> Self {
        Self {
            position: [x, y, z],
            heading: wrap_angle(heading),
        }
    }

    pub fn planar(&self) -> [f64; 2] {
        [self.position[0], self.position[1]]
    }
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(theta: f64) -> f64 {
    use std::f64::consts::PI;
    let mut a = theta.rem_euclid(2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    }
    a
}

/// Axis-aligned planar region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Region {
    pub fn contains(&self, p: [f64; 2]) -> bool {
        p[0] >= self.x_min && p[0] <= self.x_max && p[1] >= self.y_min && p[1] <= self.y_max
    }

    pub fn clamp(&self, p: [f64; 2]) -> [f64; 2] {
        [
            p[0].clamp(self.x_min, self.x_max),
            p[1].clamp(self.y_min, self.y_max),
        ]
    }
}

impl Default for Region {
    fn default() -> Self {
        Self {
            x_min: 0.0,
            x_max: 1500.0,
            y_min: 0.0,
            y_max: 1500.0,
        }
    }
}
