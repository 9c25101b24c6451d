//! Vehicle kinematics, path tracking, reactive avoidance and mode switching.

mod avoidance;
mod kinematics;
mod pursuit;

pub use avoidance::{avoidance_command, sense_obstacles, supervisor_step, target_clear, turn_toward, AvoidanceParams, Detection};
pub use kinematics::{step_kinematics_3d, step_kinematics_planar, KinematicStep};
pub use pursuit::{cross_track_error, pursuit_command, pursuit_lookahead, PathTracker};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::energy::BatteryState;
use crate::geometry::Vec3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ControlError {
    #[error("invalid control limits: {0}")]
    InvalidLimits(&'static str),
    #[error("invalid avoidance parameters: {0}")]
    InvalidAvoidance(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Tracking,
    Avoiding,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Tracking => "tracking",
            Mode::Avoiding => "avoiding",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UavState {
    pub position: Vec3,
    /// Heading in `(-pi, pi]`, counter-clockwise from +x.
    pub heading: f64,
    pub speed: f64,
    pub battery: BatteryState,
    pub mode: Mode,
}

impl UavState {
    pub fn new(position: Vec3, heading: f64, speed: f64, battery: BatteryState) -> Self {
        UavState {
            position,
            heading: crate::geometry::wrap_angle(heading),
            speed,
            battery,
            mode: Mode::Tracking,
        }
    }

    /// Planar velocity vector.
    pub fn velocity(&self) -> Vec3 {
        Vec3::from_angle(self.heading) * self.speed
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlLimits {
    pub v_min: f64,
    pub v_max: f64,
    /// Turn-rate bound, rad/s.
    pub u_max: f64,
    /// Cruise speed while tracking.
    pub cruise: f64,
    /// Vertical-rate bound, m/s.
    #[serde(default = "default_vertical")]
    pub vertical_max: f64,
}

fn default_vertical() -> f64 {
    3.0
}

impl Default for ControlLimits {
    fn default() -> Self {
        ControlLimits {
            v_min: 0.0,
            v_max: 20.0,
            u_max: 120f64.to_radians(),
            cruise: 12.0,
            vertical_max: default_vertical(),
        }
    }
}

impl ControlLimits {
    pub fn validate(&self) -> Result<(), ControlError> {
        let finite = [self.v_min, self.v_max, self.u_max, self.cruise, self.vertical_max]
            .iter()
            .all(|x| x.is_finite());
        if !finite {
            return Err(ControlError::InvalidLimits("non-finite value"));
        }
        if !(0.0 <= self.v_min && self.v_min < self.cruise && self.cruise < self.v_max) {
            return Err(ControlError::InvalidLimits("need 0 <= v_min < cruise < v_max"));
        }
        if self.u_max <= 0.0 {
            return Err(ControlError::InvalidLimits("u_max must be positive"));
        }
        if self.vertical_max < 0.0 {
            return Err(ControlError::InvalidLimits("vertical_max must be non-negative"));
        }
        Ok(())
    }

    pub fn clamp_speed(&self, v: f64) -> f64 {
        v.clamp(self.v_min, self.v_max)
    }

    pub fn clamp_turn(&self, u: f64) -> f64 {
        u.clamp(-self.u_max, self.u_max)
    }
}
