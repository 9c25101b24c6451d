//! Global planners over a [`NavGrid`] and the privacy-aware time-layered DP.

mod astar;
mod privacy;

pub use astar::{dijkstra_oracle, plan_energy_efficient, plan_shortest, plan_time_efficient};
pub use privacy::{
    plan_privacy_dp, privacy_intensity, total_intensity, total_privacy_risk, DpConfig, DpLattice, DpPlan,
    TimedPoint,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::energy::BatteryState;
use crate::grid::{EdgeCost, NavGrid};
use crate::geometry::Vec3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error("no feasible path to the goal")]
    NoPath,
    #[error("{which} position {position} is not a free grid node")]
    NodeInObstacle { which: &'static str, position: Vec3 },
    #[error("negative edge cost {cost} on edge {from}->{to}")]
    NegativeEdgeCost { from: usize, to: usize, cost: f64 },
    #[error("grid has no energy annotation")]
    NotAnnotated,
    #[error("start is not reachable from any layer within the time horizon")]
    Unreachable,
    #[error("invalid planner input: {0}")]
    InvalidInput(String),
}

/// Selectable global planners.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlannerKind {
    Energy,
    Time,
    Shortest,
    Privacy,
}

impl PlannerKind {
    pub const ALL: [PlannerKind; 4] = [
        PlannerKind::Energy,
        PlannerKind::Time,
        PlannerKind::Shortest,
        PlannerKind::Privacy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PlannerKind::Energy => "energy",
            PlannerKind::Time => "time",
            PlannerKind::Shortest => "shortest",
            PlannerKind::Privacy => "privacy",
        }
    }
}

impl std::str::FromStr for PlannerKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PlannerKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown planner '{s}' (expected energy, time, shortest or privacy)"))
    }
}

impl std::fmt::Display for PlannerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A grid path with its per-edge energy and time and the battery profile.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub nodes: Vec<usize>,
    pub waypoints: Vec<Vec3>,
    pub edges: Vec<EdgeCost>,
    /// Stored energy on arrival at each waypoint (empty when no battery was given).
    pub battery: Vec<f64>,
    pub consumed: f64,
    /// Harvest credited to the battery (after clamping at capacity).
    pub harvested: f64,
    pub clamp_loss: f64,
    pub duration: f64,
    pub length: f64,
    pub shadow_time: f64,
}

impl Path {
    /// Builds the path record for a node sequence; `battery` replays the
    /// bookkeeping without enforcing the floor.
    pub fn from_nodes(grid: &NavGrid, nodes: Vec<usize>, battery: Option<BatteryState>) -> Path {
        let waypoints: Vec<Vec3> = nodes.iter().map(|&n| grid.position(n)).collect();
        let mut edges = Vec::with_capacity(nodes.len().saturating_sub(1));
        for w in nodes.windows(2) {
            let k = grid
                .neighbors(w[0])
                .iter()
                .position(|e| e.to == w[1])
                .expect("consecutive path nodes must be grid neighbours");
            edges.push(grid.cost(grid.edge_id(w[0], k)));
        }
        let mut path = Path {
            nodes,
            waypoints,
            edges,
            battery: Vec::new(),
            consumed: 0.0,
            harvested: 0.0,
            clamp_loss: 0.0,
            duration: 0.0,
            length: 0.0,
            shadow_time: 0.0,
        };
        let mut energy = battery.map(|b| b.energy);
        if let Some(e) = energy {
            path.battery.push(e);
        }
        for (k, c) in path.edges.iter().enumerate() {
            path.consumed += c.consumed;
            path.duration += c.duration;
            path.length += path.waypoints[k].distance(path.waypoints[k + 1]);
            path.shadow_time += c.shadow_fraction * c.duration;
            let mut credited = c.harvested;
            if let (Some(e), Some(b)) = (energy.as_mut(), battery) {
                let raw = *e - c.consumed + c.harvested;
                let next = raw.min(b.capacity);
                path.clamp_loss += raw - next;
                credited -= raw - next;
                *e = next;
                path.battery.push(next);
            }
            path.harvested += credited;
        }
        path
    }

    /// Net energy expenditure: consumption minus credited harvest.
    pub fn net_cost(&self) -> f64 {
        self.consumed - self.harvested
    }

    /// Lowest stored energy along the path, if a battery profile exists.
    pub fn min_battery(&self) -> Option<f64> {
        self.battery.iter().copied().reduce(f64::min)
    }

    pub fn start(&self) -> Vec3 {
        self.waypoints[0]
    }

    pub fn goal(&self) -> Vec3 {
        *self.waypoints.last().expect("paths are never empty")
    }

    /// Straight two-point path used by the purely reactive controller.
    pub fn straight(a: Vec3, b: Vec3) -> Path {
        Path {
            nodes: Vec::new(),
            waypoints: vec![a, b],
            edges: Vec::new(),
            battery: Vec::new(),
            consumed: 0.0,
            harvested: 0.0,
            clamp_loss: 0.0,
            duration: 0.0,
            length: a.distance(b),
            shadow_time: 0.0,
        }
    }
}
