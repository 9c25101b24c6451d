//! Built-in scenarios.

use crate::control::{AvoidanceParams, ControlLimits};
use crate::energy::{BatteryState, ConsumptionParams, EnergyModel, HarvestModel, HarvestParams};
use crate::env::{Aabb, Environment, Prism, SunModel};
use crate::geometry::Vec3;
use crate::planners::PlannerKind;
use crate::sim::{MovingObstacle, Scenario};

pub const PRESET_NAMES: [&str; 2] = ["section4", "section5"];

pub fn preset(name: &str) -> Option<Scenario> {
    match name {
        "section4" => Some(section4()),
        "section5" => Some(section5()),
        _ => None,
    }
}

fn building(x: f64, y: f64, half_x: f64, half_y: f64, height: f64) -> Prism {
    Prism::new(Vec3::new(x, y, 0.0), [half_x, half_y, height], [4, 4, 4]).expect("preset buildings are valid")
}

fn table_energy() -> EnergyModel {
    EnergyModel {
        consumption: ConsumptionParams {
            level_power: 30.0,
            climb_power: 34.0,
            descent_power: 26.0,
            cruise_speed: 12.0,
            climb_speed: 3.0,
            descent_speed: 3.0,
        },
        harvest: HarvestParams {
            efficiency: 0.2,
            spectral_density: 380.0,
            panel_area: 0.3,
            ..HarvestParams::default()
        },
        model: HarvestModel::ClearSky,
    }
}

/// Street with a row of tall buildings north of the direct line; the sun
/// stands to the north so the direct line lies in their shadow.
pub fn section4() -> Scenario {
    let bounds = Aabb::new(Vec3::new(0.0, 0.0, 0.0), Vec3::new(600.0, 400.0, 300.0));
    let mut env = Environment::open(bounds, (40.0, 120.0));
    env.sun = SunModel::from_position(Vec3::new(250.0, 800.0, 1800.0), Vec3::new(300.0, 200.0, 0.0));
    env.obstacles = [150.0, 250.0, 350.0, 450.0]
        .iter()
        .map(|&x| building(x, 240.0, 40.0, 30.0, 150.0))
        .collect();
    Scenario {
        name: "section4".into(),
        start: Vec3::new(20.0, 200.0, 60.0),
        goal: Vec3::new(580.0, 200.0, 60.0),
        planner: PlannerKind::Energy,
        resolution: 10.0,
        planar: false,
        lookahead: 20.0,
        dt: 0.05,
        max_duration: 300.0,
        environment: env,
        energy: table_energy(),
        battery: BatteryState::full(670.0, 50.0),
        limits: ControlLimits::default(),
        avoidance: AvoidanceParams::default(),
        obstacles: Vec::new(),
        privacy: None,
    }
}

/// Level flight at 100 m through four buildings, with one static and two
/// moving obstacles unknown to the planner.
pub fn section5() -> Scenario {
    let bounds = Aabb::new(Vec3::new(0.0, 0.0, 0.0), Vec3::new(600.0, 400.0, 300.0));
    let mut env = Environment::open(bounds, (20.0, 250.0));
    env.sun = SunModel::from_position(Vec3::new(300.0, 900.0, 1500.0), Vec3::new(300.0, 200.0, 0.0));
    env.clearance = 8.0;
    env.obstacles = vec![
        building(160.0, 255.0, 35.0, 25.0, 180.0),
        building(300.0, 265.0, 40.0, 25.0, 200.0),
        building(440.0, 255.0, 35.0, 25.0, 160.0),
        building(360.0, 110.0, 25.0, 25.0, 140.0),
    ];
    let sphere = |x: f64, y: f64, r: f64, vx: f64, vy: f64| MovingObstacle {
        center: Vec3::new(x, y, 100.0),
        radius: r,
        velocity: Vec3::new(vx, vy, 0.0),
        known_to_planner: false,
    };
    Scenario {
        name: "section5".into(),
        start: Vec3::new(20.0, 200.0, 100.0),
        goal: Vec3::new(580.0, 200.0, 100.0),
        planner: PlannerKind::Energy,
        resolution: 10.0,
        planar: true,
        lookahead: 20.0,
        dt: 0.05,
        max_duration: 200.0,
        environment: env,
        energy: table_energy(),
        battery: BatteryState::full(750.0, 0.0),
        limits: ControlLimits {
            v_min: 0.0,
            v_max: 20.0,
            u_max: 120f64.to_radians(),
            cruise: 12.0,
            vertical_max: 3.0,
        },
        avoidance: AvoidanceParams::default(),
        obstacles: vec![
            sphere(100.0, 200.0, 12.0, 0.0, 0.0),
            sphere(250.0, 120.0, 8.0, 0.0, 4.0),
            sphere(500.0, 260.0, 8.0, -1.0, -4.0),
        ],
        privacy: None,
    }
}
