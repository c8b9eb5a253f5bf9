use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::types::UavState;

/// Directional gain of the receiving antenna as a function of the bearing
/// between the UAV heading and the line of sight to the object.
///
/// The directional pattern is `g_max * (g_back + (1 - g_back) * ((1 + cos b) / 2)^n)`:
/// maximal on boresight, `g_max * g_back` directly behind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AntennaPattern {
    Isotropic,
    Directional {
        g_max: f64,
        g_back: f64,
        exponent: f64,
    },
}

impl Default for AntennaPattern {
    /// Two-element Yagi: about 5 dB forward gain, 10% back lobe.
    fn default() -> Self {
        AntennaPattern::Directional {
            g_max: 10f64.powf(0.5),
            g_back: 0.1,
            exponent: 2.0,
        }
    }
}

impl AntennaPattern {
    pub fn validate(&self) -> Result<()> {
        if let AntennaPattern::Directional {
            g_max,
            g_back,
            exponent,
        } = *self
        {
            if !(g_max > 0.0 && g_max.is_finite()) {
                return Err(invalid("antenna.g_max", "must be positive"));
            }
            if !(0.0..=1.0).contains(&g_back) {
                return Err(invalid("antenna.g_back", "must lie in [0, 1]"));
            }
            if !(exponent >= 0.0 && exponent.is_finite()) {
                return Err(invalid("antenna.exponent", "must be non-negative"));
            }
        }
        Ok(())
    }

    /// Gain at relative bearing `beta` (radians from boresight).
    pub fn gain_at_bearing(&self, beta: f64) -> f64 {
        match *self {
            AntennaPattern::Isotropic => 1.0,
            AntennaPattern::Directional {
                g_max,
                g_back,
                exponent,
            } => {
                let lobe = (0.5 * (1.0 + beta.cos())).powf(exponent);
                g_max * (g_back + (1.0 - g_back) * lobe)
            }
        }
    }

    pub fn max_gain(&self) -> f64 {
        match *self {
            AntennaPattern::Isotropic => 1.0,
            AntennaPattern::Directional { g_max, .. } => g_max,
        }
    }
}

/// Relative bearing of a ground point seen from the UAV. An object directly
/// beneath the UAV is treated as broadside (`pi/2`).
pub fn relative_bearing(object_xy: [f64; 2], uav: &UavState) -> f64 {
    let dx = object_xy[0] - uav.position[0];
    let dy = object_xy[1] - uav.position[1];
    if dx == 0.0 && dy == 0.0 {
        return std::f64::consts::FRAC_PI_2;
    }
    dy.atan2(dx) - uav.heading
}

/// Antenna gain `G_a` for an object at ground position `object_xy` and
/// height `object_z`.
pub fn antenna_gain(
    pattern: &AntennaPattern,
    object_xy: [f64; 2],
    object_z: f64,
    uav: &UavState,
) -> Result<f64> {
    if object_xy[0] == uav.position[0]
        && object_xy[1] == uav.position[1]
        && object_z == uav.position[2]
    {
        return Err(Error::CoincidentPositions);
    }
    Ok(pattern.gain_at_bearing(relative_bearing(object_xy, uav)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn yagi() -> AntennaPattern {
        AntennaPattern::Directional {
            g_max: 3.0,
            g_back: 0.1,
            exponent: 2.0,
        }
    }

    #[test]
    fn boresight_gives_max_gain() {
        let uav = UavState::new(0.0, 0.0, 30.0, 0.3);
        let obj = [100.0 * 0.3f64.cos(), 100.0 * 0.3f64.sin()];
        assert_relative_eq!(antenna_gain(&yagi(), obj, 1.0, &uav).unwrap(), 3.0, max_relative = 1e-12);
    }

    #[test]
    fn back_lobe_ratio() {
        let uav = UavState::new(0.0, 0.0, 30.0, 0.0);
        let g = antenna_gain(&yagi(), [-50.0, 0.0], 1.0, &uav).unwrap();
        assert_relative_eq!(g, 3.0 * 0.1, max_relative = 1e-12);
        assert_relative_eq!(yagi().gain_at_bearing(PI), 0.3, max_relative = 1e-12);
    }

    #[test]
    fn isotropic_is_unity() {
        let uav = UavState::new(10.0, 20.0, 30.0, 1.0);
        for p in [[0.0, 0.0], [500.0, -3.0], [10.0, 21.0]] {
            assert_eq!(antenna_gain(&AntennaPattern::Isotropic, p, 1.0, &uav).unwrap(), 1.0);
        }
    }

    #[test]
    fn gain_is_bounded_and_continuous() {
        let p = AntennaPattern::default();
        let mut prev = p.gain_at_bearing(-PI);
        for i in 1..=3600 {
            let b = -PI + 2.0 * PI * i as f64 / 3600.0;
            let g = p.gain_at_bearing(b);
            assert!(g > 0.0 && g <= p.max_gain() + 1e-12);
            assert!((g - prev).abs() < 0.01);
            prev = g;
        }
    }

    #[test]
    fn coincident_positions_error() {
        let uav = UavState::new(5.0, 5.0, 1.0, 0.0);
        assert!(matches!(
            antenna_gain(&yagi(), [5.0, 5.0], 1.0, &uav),
            Err(Error::CoincidentPositions)
        ));
    }
}
