use serde::{Deserialize, Serialize};

use super::{Scenario, SimError};
use crate::energy::MotionSegment;
use crate::grid::{build_grid, build_planar_grid, mean_harvest, NavGrid};
use crate::planners::{
    plan_energy_efficient, plan_privacy_dp, plan_shortest, plan_time_efficient, total_privacy_risk, Path, PlanError,
    PlannerKind, TimedPoint,
};
use crate::geometry::Vec3;

const RISK_SUBSTEPS: usize = 8;

/// One leg of a planned route.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RouteLeg {
    pub consumed: f64,
    pub harvested: f64,
    pub duration: f64,
    pub shadow_fraction: f64,
}

/// A planned route with its energy bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct Route {
    pub planner: PlannerKind,
    pub waypoints: Vec<Vec3>,
    pub legs: Vec<RouteLeg>,
    /// Stored energy on arrival at each waypoint.
    pub battery: Vec<f64>,
    pub consumed: f64,
    /// Harvest credited after clamping at capacity.
    pub harvested: f64,
    pub clamp_loss: f64,
    pub duration: f64,
    pub length: f64,
    pub shadow_time: f64,
    /// Accumulated privacy risk along the route.
    pub privacy_risk: f64,
}

impl Route {
    pub fn net_cost(&self) -> f64 {
        self.consumed - self.harvested
    }

    pub fn min_battery(&self) -> f64 {
        self.battery.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Arrival time at each waypoint.
    pub fn times(&self) -> Vec<f64> {
        let mut t = 0.0;
        let mut out = vec![0.0];
        for l in &self.legs {
            t += l.duration;
            out.push(t);
        }
        out
    }

    /// Route sampled `n` times per leg, at constant speed along each leg.
    pub fn sampled(&self, n: usize) -> Vec<TimedPoint> {
        let n = n.max(1);
        let times = self.times();
        let mut out = vec![TimedPoint {
            t: 0.0,
            position: self.waypoints[0],
        }];
        for (k, w) in self.waypoints.windows(2).enumerate() {
            for s in 1..=n {
                let u = s as f64 / n as f64;
                out.push(TimedPoint {
                    t: times[k] + u * (times[k + 1] - times[k]),
                    position: w[0].lerp(w[1], u),
                });
            }
        }
        out
    }

    fn from_legs(sc: &Scenario, planner: PlannerKind, waypoints: Vec<Vec3>, legs: Vec<RouteLeg>) -> Route {
        let cap = sc.battery.capacity;
        let mut e = sc.battery.energy;
        let mut r = Route {
            planner,
            waypoints,
            legs,
            battery: vec![e],
            consumed: 0.0,
            harvested: 0.0,
            clamp_loss: 0.0,
            duration: 0.0,
            length: 0.0,
            shadow_time: 0.0,
            privacy_risk: 0.0,
        };
        for (k, l) in r.legs.iter().enumerate() {
            let raw = e - l.consumed + l.harvested;
            let next = raw.min(cap);
            r.consumed += l.consumed;
            r.harvested += l.harvested - (raw - next);
            r.clamp_loss += raw - next;
            r.duration += l.duration;
            r.length += r.waypoints[k].distance(r.waypoints[k + 1]);
            r.shadow_time += l.shadow_fraction * l.duration;
            r.battery.push(next);
            e = next;
        }
        r
    }

    fn from_path(sc: &Scenario, planner: PlannerKind, path: Path) -> Route {
        let legs = path
            .edges
            .iter()
            .map(|c| RouteLeg {
                consumed: c.consumed,
                harvested: c.harvested,
                duration: c.duration,
                shadow_fraction: c.shadow_fraction,
            })
            .collect();
        Route::from_legs(sc, planner, path.waypoints, legs)
    }
}

/// Grid of the scenario's planning environment, annotated at time zero.
pub fn scenario_grid(sc: &Scenario) -> Result<NavGrid, SimError> {
    let env = sc.planning_environment();
    let grid = if sc.planar {
        build_planar_grid(&env, sc.resolution, sc.start.z)
    } else {
        build_grid(&env, sc.resolution)
    };
    let mut grid = grid.map_err(|e| SimError::Invalid {
        field: "environment".into(),
        reason: e.to_string(),
    })?;
    grid.annotate(&env, &sc.energy, 0.0);
    Ok(grid)
}

/// Runs one global planner on the scenario's known obstacles.
pub fn plan_route(sc: &Scenario, planner: PlannerKind) -> Result<Route, SimError> {
    let env = sc.planning_environment();
    let route = match planner {
        PlannerKind::Privacy => {
            let cfg = sc
                .privacy
                .ok_or_else(|| PlanError::InvalidInput("scenario has no privacy settings".into()))?;
            let plan = plan_privacy_dp(&env, sc.start, sc.goal, &cfg)?;
            let step = plan.step_time;
            let legs = plan
                .waypoints
                .windows(2)
                .map(|w| {
                    let seg = MotionSegment::between(w[0], w[1], &sc.energy.consumption);
                    let power = sc.energy.consumption_power(seg.horizontal() > 0.0, seg.vertical());
                    let (harvest, shade) = mean_harvest(&env, &sc.energy, w[0], w[1], 0.0);
                    RouteLeg {
                        consumed: power * step,
                        harvested: harvest * step,
                        duration: step,
                        shadow_fraction: shade,
                    }
                })
                .collect();
            let mut r = Route::from_legs(sc, planner, plan.waypoints.clone(), legs);
            r.privacy_risk = plan.risk;
            r
        }
        _ => {
            let grid = scenario_grid(sc)?;
            let path = match planner {
                PlannerKind::Energy => plan_energy_efficient(&grid, sc.battery, sc.start, sc.goal)?,
                PlannerKind::Time => plan_time_efficient(&grid, sc.battery, sc.start, sc.goal)?,
                _ => plan_shortest(&grid, sc.start, sc.goal)?,
            };
            let mut r = Route::from_path(sc, planner, path);
            r.privacy_risk = total_privacy_risk(&r.sampled(RISK_SUBSTEPS), &env.privacy_regions);
            r
        }
    };
    Ok(route)
}
