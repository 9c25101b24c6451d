//! Trajectory CSV and metrics report writers.

use std::io::Write;

use serde::Serialize;

use crate::env::{in_shadow, Environment};
use crate::geometry::Vec3;
use crate::sim::{Metrics, Outcome, Route, SimLog};

pub const CSV_HEADER: [&str; 11] = ["t", "x", "y", "z", "theta", "v", "u", "battery", "shadow", "mode", "min_dist"];

fn f(x: f64) -> String {
    format!("{x:.6}")
}

#[allow(clippy::too_many_arguments)]
fn row(t: f64, p: Vec3, theta: f64, v: f64, u: f64, battery: f64, shadow: bool, mode: &str, min_dist: f64) -> [String; 11] {
    [
        f(t),
        f(p.x),
        f(p.y),
        f(p.z),
        f(theta),
        f(v),
        f(u),
        f(battery),
        u8::from(shadow).to_string(),
        mode.to_string(),
        f(min_dist),
    ]
}

/// Writes the simulated trajectory, one row per step.
pub fn write_trajectory_csv<W: Write>(log: &SimLog, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in &log.records {
        w.write_record(row(r.t, r.position, r.heading, r.speed, r.u, r.battery, r.shadow, r.mode.name(), r.min_dist))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a planned route as waypoint rows with arrival times and mode
/// `planned`; `theta` is the heading of the leg leaving each waypoint.
pub fn write_route_csv<W: Write>(route: &Route, env: &Environment, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    let times = route.times();
    let n = route.waypoints.len();
    for (k, &p) in route.waypoints.iter().enumerate() {
        let leg = if k + 1 < n { k } else { k.saturating_sub(1) };
        let (theta, v) = if n > 1 {
            let (a, b) = (route.waypoints[leg], route.waypoints[leg + 1]);
            let dur = route.legs[leg].duration;
            let v = if k + 1 < n && dur > 0.0 { a.distance(b) / dur } else { 0.0 };
            ((b - a).bearing(), v)
        } else {
            (0.0, 0.0)
        };
        let min_dist = env
            .obstacles
            .iter()
            .map(|o| o.radial_clearance(p))
            .fold(f64::INFINITY, f64::min);
        let battery = route.battery.get(k).copied().unwrap_or(f64::NAN);
        w.write_record(row(times[k], p, theta, v, 0.0, battery, in_shadow(env, p, times[k]), "planned", min_dist))?;
    }
    w.flush()?;
    Ok(())
}

/// One planner or simulation run in a report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub name: String,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub consumed: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub harvested: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub net_cost: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clamp_loss: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_battery: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_battery: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shadow_time: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub privacy_risk: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outcome: Option<Outcome>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub collision: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_separation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode_switches: Option<usize>,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

impl RunReport {
    fn empty(name: &str, status: &str) -> Self {
        RunReport {
            name: name.to_string(),
            status: status.to_string(),
            error: None,
            time: None,
            consumed: None,
            harvested: None,
            net_cost: None,
            clamp_loss: None,
            final_battery: None,
            min_battery: None,
            length: None,
            shadow_time: None,
            privacy_risk: None,
            outcome: None,
            collision: None,
            min_separation: None,
            mode_switches: None,
        }
    }

    pub fn failed(name: &str, error: impl ToString) -> Self {
        RunReport {
            error: Some(error.to_string()),
            ..Self::empty(name, "error")
        }
    }

    pub fn from_route(route: &Route) -> Self {
        RunReport {
            time: Some(route.duration),
            consumed: Some(route.consumed),
            harvested: Some(route.harvested),
            net_cost: Some(route.net_cost()),
            clamp_loss: Some(route.clamp_loss),
            final_battery: route.battery.last().copied(),
            min_battery: finite(route.min_battery()),
            length: Some(route.length),
            shadow_time: Some(route.shadow_time),
            privacy_risk: Some(route.privacy_risk),
            ..Self::empty(route.planner.name(), "ok")
        }
    }

    pub fn from_metrics(name: &str, m: &Metrics) -> Self {
        let status = if m.outcome == Outcome::GoalReached { "ok" } else { "failed" };
        RunReport {
            time: Some(m.total_time),
            consumed: Some(m.consumed),
            harvested: Some(m.harvested),
            net_cost: Some(m.net_cost),
            clamp_loss: Some(m.clamp_loss),
            final_battery: Some(m.final_battery),
            min_battery: Some(m.min_battery),
            length: Some(m.path_length),
            shadow_time: Some(m.shadow_time),
            outcome: Some(m.outcome),
            collision: Some(m.collision),
            min_separation: finite(m.min_separation),
            mode_switches: Some(m.mode_switches),
            ..Self::empty(name, status)
        }
    }
}

/// Summary document written by the CLI.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub scenario: String,
    pub digest: String,
    pub runs: Vec<RunReport>,
}

impl MetricsReport {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("reports always serialize")
    }
}
