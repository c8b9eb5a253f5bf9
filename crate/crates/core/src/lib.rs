//! Joint detection and tracking of radio-tagged objects from raw
//! spectrograms, with online UAV path planning.
//!
//! The pipeline: [`rf_signal`] synthesizes what the UAV hears,
//! [`likelihood`] scores hypotheses against the spectrogram, [`tbd_lmb`]
//! maintains a labeled multi-Bernoulli particle belief under the
//! [`dynamics`] model, [`planner`] picks the next flight segment, and
//! [`sim`] closes the loop and evaluates it with [`metrics`].

pub mod dynamics;
pub mod error;
pub mod likelihood;
pub mod metrics;
pub mod planner;
pub mod rf_signal;
pub mod rng;
pub mod sim;
pub mod spectrogram;
pub mod stats;
pub mod tbd_lmb;
pub mod types;

pub use error::{Error, Result};
pub use spectrogram::Spectrogram;
pub use types::{wrap_angle, Kinematics, Label, Mode, ObjectState, Particle, Region, UavState};
