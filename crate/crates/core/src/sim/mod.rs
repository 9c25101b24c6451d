//! Fixed-step scenario simulation of the hybrid controller.

mod route;
mod runner;

pub use route::{plan_route, scenario_grid, Route, RouteLeg};
pub use runner::{audit_energy, compute_metrics, run_scenario, EnergyAudit, Event, EventKind, Metrics, Outcome, Record, SimLog};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::control::{AvoidanceParams, ControlLimits};
use crate::energy::{BatteryState, EnergyModel};
use crate::env::{is_collision, Environment, Prism};
use crate::geometry::Vec3;
use crate::planners::{DpConfig, PlanError, PlannerKind};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("planning failed: {0}")]
    PlanningFailed(#[from] PlanError),
    #[error("invalid scenario field `{field}`: {reason}")]
    Invalid { field: String, reason: String },
}

fn invalid(field: &str, reason: impl ToString) -> SimError {
    SimError::Invalid {
        field: field.to_string(),
        reason: reason.to_string(),
    }
}

/// A sphere moving in a straight line at constant velocity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MovingObstacle {
    pub center: Vec3,
    pub radius: f64,
    #[serde(default)]
    pub velocity: Vec3,
    #[serde(default)]
    pub known_to_planner: bool,
}

impl MovingObstacle {
    pub fn at(&self, t: f64) -> MovingObstacle {
        MovingObstacle {
            center: self.center + self.velocity * t,
            ..*self
        }
    }

    pub fn as_prism(&self) -> Prism {
        Prism::sphere(self.center, self.radius)
    }

    pub fn speed(&self) -> f64 {
        self.velocity.norm()
    }
}

/// Advances every obstacle by `velocity * dt`.
pub fn step_obstacles(obs: &[MovingObstacle], dt: f64) -> Vec<MovingObstacle> {
    obs.iter().map(|o| o.at(dt)).collect()
}

/// Controller stack used by [`run_scenario`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimMode {
    /// Global plan on known obstacles, pursuit tracking, reactive avoidance.
    Hybrid,
    /// Straight line to the goal with reactive avoidance of everything sensed.
    ReactiveOnly,
    /// Global plan and pursuit, no avoidance.
    TrackOnly,
}

impl SimMode {
    pub const ALL: [SimMode; 3] = [SimMode::Hybrid, SimMode::ReactiveOnly, SimMode::TrackOnly];

    pub fn name(self) -> &'static str {
        match self {
            SimMode::Hybrid => "hybrid",
            SimMode::ReactiveOnly => "reactive-only",
            SimMode::TrackOnly => "track-only",
        }
    }
}

impl std::str::FromStr for SimMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SimMode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown mode '{s}' (expected hybrid, reactive-only or track-only)"))
    }
}

fn default_dt() -> f64 {
    0.05
}

fn default_lookahead() -> f64 {
    20.0
}

fn default_duration() -> f64 {
    600.0
}

fn default_planner() -> PlannerKind {
    PlannerKind::Energy
}

fn default_resolution() -> f64 {
    10.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    #[serde(default)]
    pub name: String,
    pub start: Vec3,
    pub goal: Vec3,
    #[serde(default = "default_planner")]
    pub planner: PlannerKind,
    /// Grid spacing for the global planners and the goal-arrival radius, m.
    #[serde(default = "default_resolution")]
    pub resolution: f64,
    /// Plan on a single layer at the start altitude and fly level.
    #[serde(default)]
    pub planar: bool,
    #[serde(default = "default_lookahead")]
    pub lookahead: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_duration")]
    pub max_duration: f64,
    pub environment: Environment,
    #[serde(default)]
    pub energy: EnergyModel,
    pub battery: BatteryState,
    #[serde(default)]
    pub limits: ControlLimits,
    #[serde(default)]
    pub avoidance: AvoidanceParams,
    #[serde(default)]
    pub obstacles: Vec<MovingObstacle>,
    #[serde(default)]
    pub privacy: Option<DpConfig>,
}

impl Scenario {
    /// Checks every invariant; the error names the offending field.
    pub fn validate(&self) -> Result<(), SimError> {
        self.environment.validate().map_err(|e| invalid("environment", e))?;
        self.energy.validate().map_err(|e| invalid("energy", e))?;
        self.battery.validate().map_err(|e| invalid("battery", e))?;
        self.limits.validate().map_err(|e| invalid("limits", e))?;
        self.avoidance.validate().map_err(|e| invalid("avoidance", e))?;
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(invalid("dt", "must be positive"));
        }
        if !(self.max_duration > 0.0 && self.max_duration.is_finite()) {
            return Err(invalid("max_duration", "must be positive"));
        }
        if !(self.resolution > 0.0 && self.resolution.is_finite()) {
            return Err(invalid("resolution", "must be positive"));
        }
        if !(self.lookahead > 0.0 && self.lookahead.is_finite()) {
            return Err(invalid("lookahead", "must be positive"));
        }
        for (i, o) in self.obstacles.iter().enumerate() {
            if !(o.radius > 0.0 && o.radius.is_finite() && o.center.is_finite() && o.velocity.is_finite()) {
                return Err(invalid(&format!("obstacles[{i}]"), "needs a positive radius and finite vectors"));
            }
            if o.speed() >= self.limits.cruise {
                return Err(invalid(&format!("obstacles[{i}].velocity"), "must be slower than the cruise speed"));
            }
        }
        for (field, p) in [("start", self.start), ("goal", self.goal)] {
            if !p.is_finite() || !self.environment.in_bounds(p) {
                return Err(invalid(field, "outside the world bounds"));
            }
            if is_collision(p, &self.environment) || self.obstacles.iter().any(|o| o.as_prism().contains(p)) {
                return Err(invalid(field, "inside an obstacle"));
            }
        }
        Ok(())
    }

    /// Environment the global planner sees: buildings plus obstacles flagged
    /// as known, at their initial positions.
    pub fn planning_environment(&self) -> Environment {
        let mut env = self.environment.clone();
        env.obstacles
            .extend(self.obstacles.iter().filter(|o| o.known_to_planner).map(MovingObstacle::as_prism));
        env
    }

    pub fn obstacles_at(&self, t: f64) -> Vec<MovingObstacle> {
        self.obstacles.iter().map(|o| o.at(t)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn obstacle_motion_is_linear() {
        let o = [MovingObstacle {
            center: Vec3::new(1.0, 2.0, 3.0),
            radius: 1.0,
            velocity: Vec3::new(1.0, 0.0, 0.0),
            known_to_planner: false,
        }];
        assert_eq!(step_obstacles(&o, 2.0)[0].center, Vec3::new(3.0, 2.0, 3.0));
        let still = MovingObstacle { velocity: Vec3::ZERO, ..o[0] };
        assert_eq!(step_obstacles(&[still], 5.0)[0], still);
    }
}
