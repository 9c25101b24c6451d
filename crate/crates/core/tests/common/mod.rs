//! Scenario generators and reference implementations shared by the
//! integration tests.
#![allow(dead_code)]

use std::collections::HashMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use suav::control::{AvoidanceParams, ControlLimits};
use suav::energy::{BatteryState, ConsumptionParams, EnergyModel, HarvestModel, HarvestParams};
use suav::env::{is_collision, segment_blocked, Aabb, Environment, Prism, PrivacyRegion, SunModel};
use suav::grid::{build_grid, build_planar_grid, NavGrid};
use suav::planners::{total_intensity, DpConfig, PlannerKind};
use suav::sim::{MovingObstacle, Scenario};
use suav::Vec3;

pub fn table_energy() -> EnergyModel {
    EnergyModel {
        consumption: ConsumptionParams::default(),
        harvest: HarvestParams {
            efficiency: 0.2,
            spectral_density: 380.0,
            panel_area: 0.3,
            ..HarvestParams::default()
        },
        model: HarvestModel::ClearSky,
    }
}

/// Building standing on the ground with its top at `height`.
pub fn building(x: f64, y: f64, hx: f64, hy: f64, height: f64) -> Prism {
    Prism::new(Vec3::new(x, y, 0.0), [hx, hy, height], [4, 4, 4]).unwrap()
}

pub fn random_prism(rng: &mut ChaCha8Rng, bounds: &Aabb) -> Prism {
    let exps = [1u32, 2, 4];
    let c = Vec3::new(
        rng.gen_range(bounds.min.x..bounds.max.x),
        rng.gen_range(bounds.min.y..bounds.max.y),
        rng.gen_range(bounds.min.z..bounds.max.z),
    );
    let axes = [rng.gen_range(5.0..30.0), rng.gen_range(5.0..30.0), rng.gen_range(5.0..30.0)];
    let e = [exps[rng.gen_range(0..3)], exps[rng.gen_range(0..3)], exps[rng.gen_range(0..3)]];
    Prism::new(c, axes, e).unwrap()
}

/// A random world of at most `max_n` grid nodes per axis at 10 m spacing,
/// its annotated grid and two distinct free nodes.
pub struct GridWorld {
    pub env: Environment,
    pub grid: NavGrid,
    pub start: Vec3,
    pub goal: Vec3,
}

pub fn random_grid_world(rng: &mut ChaCha8Rng, max_n: usize) -> GridWorld {
    loop {
        let n = [
            rng.gen_range(4..=max_n),
            rng.gen_range(4..=max_n),
            rng.gen_range(2..=max_n),
        ];
        let hi = Vec3::new((n[0] - 1) as f64, (n[1] - 1) as f64, (n[2] - 1) as f64) * 10.0;
        let bounds = Aabb::new(Vec3::ZERO, hi);
        let mut env = Environment::open(bounds, (0.0, hi.z));
        for _ in 0..rng.gen_range(1..=6) {
            env.obstacles.push(random_prism(rng, &bounds));
        }
        let sun = Vec3::new(rng.gen_range(-500.0..500.0), rng.gen_range(-500.0..500.0), env.roofline().max(hi.z) + 300.0);
        env.sun = SunModel::from_position(sun, bounds.min.lerp(bounds.max, 0.5).with_z(0.0));
        let Ok(mut grid) = build_grid(&env, 10.0) else { continue };
        assert!(grid.dims().iter().all(|&d| d <= max_n));
        let free: Vec<usize> = (0..grid.node_count()).filter(|&i| grid.is_free(i)).collect();
        if free.len() < 2 {
            continue;
        }
        let a = free[rng.gen_range(0..free.len())];
        let b = free[rng.gen_range(0..free.len())];
        if a == b {
            continue;
        }
        grid.annotate(&env, &table_energy(), 0.0);
        return GridWorld {
            start: grid.position(a),
            goal: grid.position(b),
            env,
            grid,
        };
    }
}

/// Planar world where every minimum-length grid route from start to goal
/// mixes ten diagonal and ten straight moves. A building south of the
/// straight-first branch shades it; the diagonal-first branch stays in sun.
pub fn fork_scenario() -> Scenario {
    let bounds = Aabb::new(Vec3::ZERO, Vec3::new(300.0, 300.0, 200.0));
    let mut env = Environment::open(bounds, (20.0, 150.0));
    env.obstacles = vec![building(170.0, 40.0, 40.0, 20.0, 140.0)];
    env.sun = SunModel::from_position(Vec3::new(170.0, -2000.0, 2100.0), Vec3::new(170.0, 100.0, 60.0));
    Scenario {
        name: "fork".into(),
        start: Vec3::new(20.0, 100.0, 60.0),
        goal: Vec3::new(220.0, 200.0, 60.0),
        planner: PlannerKind::Energy,
        resolution: 10.0,
        planar: true,
        lookahead: 20.0,
        dt: 0.05,
        max_duration: 120.0,
        environment: env,
        energy: table_energy(),
        battery: BatteryState::full(1000.0, 50.0),
        limits: ControlLimits::default(),
        avoidance: AvoidanceParams::default(),
        obstacles: Vec::new(),
        privacy: None,
    }
}

/// Node sequences of the two extreme equal-length branches of the fork:
/// (straight first, diagonal first).
pub fn fork_branches(sc: &Scenario, grid: &NavGrid) -> (Vec<usize>, Vec<usize>) {
    let node = |x: f64, y: f64| grid.nearest_node(Vec3::new(x, y, sc.start.z)).unwrap();
    let mut straight_first = Vec::new();
    let mut diagonal_first = Vec::new();
    for k in 0..=20 {
        let k = k as f64;
        let (sx, sy) = if k <= 10.0 { (20.0 + 10.0 * k, 100.0) } else { (20.0 + 10.0 * k, 100.0 + 10.0 * (k - 10.0)) };
        let (dx, dy) = if k <= 10.0 { (20.0 + 10.0 * k, 100.0 + 10.0 * k) } else { (20.0 + 10.0 * k, 200.0) };
        straight_first.push(node(sx, sy));
        diagonal_first.push(node(dx, dy));
    }
    (straight_first, diagonal_first)
}

pub fn planar_grid(sc: &Scenario) -> NavGrid {
    let mut grid = build_planar_grid(&sc.environment, sc.resolution, sc.start.z).unwrap();
    grid.annotate(&sc.environment, &sc.energy, 0.0);
    grid
}

fn seg_point_distance(a: Vec3, b: Vec3, c: Vec3) -> f64 {
    let d = b - a;
    let len2 = d.dot(d);
    let t = if len2 == 0.0 { 0.0 } else { ((c - a).dot(d) / len2).clamp(0.0, 1.0) };
    a.lerp(b, t).distance(c)
}

/// Minimum accumulated privacy risk over every walk of one to `layers`
/// lattice moves (26 directions plus hold, or 8 plus hold when planar) from
/// `start` to `goal`, found by depth-first enumeration. Positions are
/// `goal + integer offsets * spacing`; callers keep them exactly
/// representable so the sums reproduce bit for bit.
pub fn dp_exhaustive_risk(env: &Environment, start: Vec3, goal: Vec3, cfg: &DpConfig) -> Option<f64> {
    let h = cfg.spacing();
    let regions = &env.privacy_regions;
    let zs: &[i64] = if cfg.planar { &[0] } else { &[-1, 0, 1] };
    let mut moves = Vec::new();
    for &dz in zs {
        for dy in -1..=1 {
            for dx in -1..=1 {
                moves.push([dx, dy, dz]);
            }
        }
    }
    let pos = |c: [i64; 3]| Vec3::new(goal.x + c[0] as f64 * h, goal.y + c[1] as f64 * h, goal.z + c[2] as f64 * h);
    let node_ok = |p: Vec3| {
        let z_ok = !cfg.planar || p.z == goal.z;
        z_ok && !is_collision(p, env) && regions.iter().all(|r| p.distance(r.center) > r.inner)
    };
    let s = start - goal;
    let sc = [(s.x / h).round() as i64, (s.y / h).round() as i64, (s.z / h).round() as i64];
    if pos(sc) != start || !node_ok(start) || !node_ok(goal) {
        return None;
    }
    let dt = cfg.step_time() / cfg.substeps as f64;
    let mut stage_cache: HashMap<([i64; 3], usize), Option<f64>> = HashMap::new();
    let mut stage = |c: [i64; 3], k: usize| -> Option<f64> {
        *stage_cache.entry((c, k)).or_insert_with(|| {
            let m = moves[k];
            let q_c = [c[0] + m[0], c[1] + m[1], c[2] + m[2]];
            let (p, q) = (pos(c), pos(q_c));
            if !node_ok(q) {
                return None;
            }
            if m != [0, 0, 0]
                && (segment_blocked(env, p, q) || regions.iter().any(|r| seg_point_distance(p, q, r.center) <= r.inner))
            {
                return None;
            }
            let mut risk = 0.0;
            let mut prev = total_intensity(p, regions);
            for s in 1..=cfg.substeps {
                let x = p.lerp(q, s as f64 / cfg.substeps as f64);
                let f = total_intensity(x, regions);
                risk += 0.5 * dt * (prev + f);
                prev = f;
            }
            Some(risk)
        })
    };

    struct Search<'a, F: FnMut([i64; 3], usize) -> Option<f64>> {
        stage: &'a mut F,
        moves: &'a [[i64; 3]],
        layers: usize,
        stages: Vec<f64>,
        best: f64,
        /// Least partial risk seen per (node, depth).
        seen: HashMap<[i64; 3], Vec<f64>>,
    }
    fn dfs<F: FnMut([i64; 3], usize) -> Option<f64>>(s: &mut Search<F>, c: [i64; 3], partial: f64) {
        let depth = s.stages.len();
        if depth > 0 && c == [0, 0, 0] {
            // Same association as the backward recursion: s0 + (s1 + (... + 0)).
            let total = s.stages.iter().rev().fold(0.0, |acc, &x| x + acc);
            if total < s.best {
                s.best = total;
            }
        }
        if depth == s.layers {
            return;
        }
        let remaining = (s.layers - depth) as i64;
        if c.iter().map(|v| v.abs()).max().unwrap() > remaining {
            return;
        }
        if partial > s.best + 1e-9 {
            return;
        }
        // A walk that reached this node in no more steps with clearly less
        // risk dominates this one; near ties are kept so rounding cannot
        // hide the optimum.
        let layers = s.layers;
        let row = s.seen.entry(c).or_insert_with(|| vec![f64::INFINITY; layers + 1]);
        if row[..=depth].iter().any(|&r| r + 1e-9 < partial) {
            return;
        }
        if partial < row[depth] {
            row[depth] = partial;
        }
        // Moves that close in on the goal first, for an early bound.
        let mut order: Vec<usize> = (0..s.moves.len()).collect();
        order.sort_by_key(|&k| {
            let m = s.moves[k];
            (0..3).map(|a| (c[a] + m[a]).abs()).max().unwrap()
        });
        for k in order {
            let Some(risk) = (s.stage)(c, k) else { continue };
            let m = s.moves[k];
            s.stages.push(risk);
            dfs(s, [c[0] + m[0], c[1] + m[1], c[2] + m[2]], partial + risk);
            s.stages.pop();
        }
    }
    let mut search = Search {
        stage: &mut stage,
        moves: &moves,
        layers: cfg.layers,
        stages: Vec::new(),
        best: f64::INFINITY,
        seen: HashMap::new(),
    };
    dfs(&mut search, sc, 0.0);
    search.best.is_finite().then_some(search.best)
}

/// 9 x 9 x 3 lattice world with a hard privacy core between start and goal.
pub fn small_dp_world() -> (Environment, Vec3, Vec3, DpConfig) {
    let bounds = Aabb::new(Vec3::new(0.0, 0.0, 0.0), Vec3::new(80.0, 80.0, 100.0));
    let mut env = Environment::open(bounds, (40.0, 60.0));
    env.privacy_regions = vec![
        PrivacyRegion::new(Vec3::new(40.0, 40.0, 50.0), 15.0, 100.0).unwrap(),
        PrivacyRegion {
            weight: 0.5,
            ..PrivacyRegion::new(Vec3::new(20.0, 70.0, 60.0), 5.0, 40.0).unwrap()
        },
    ];
    env.obstacles = vec![Prism::new(Vec3::new(60.0, 25.0, 0.0), [6.0, 6.0, 70.0], [1, 1, 1]).unwrap()];
    let cfg = DpConfig {
        layers: 12,
        horizon: 12.0,
        max_speed: 10.0,
        substeps: 8,
        planar: false,
    };
    (env, Vec3::new(0.0, 40.0, 50.0), Vec3::new(80.0, 40.0, 50.0), cfg)
}

/// Planar world with a non-convex no-fly zone: three overlapping cores in a
/// wall across the direct line, and a fourth bending the wall into an L.
pub fn nonconvex_privacy_world() -> (Environment, Vec3, Vec3, DpConfig) {
    let bounds = Aabb::new(Vec3::new(0.0, 0.0, 0.0), Vec3::new(200.0, 200.0, 100.0));
    let mut env = Environment::open(bounds, (20.0, 80.0));
    env.privacy_regions = [(100.0, 60.0), (100.0, 100.0), (100.0, 140.0), (130.0, 140.0)]
        .iter()
        .map(|&(x, y)| PrivacyRegion::new(Vec3::new(x, y, 50.0), 20.0, 80.0).unwrap())
        .collect();
    let cfg = DpConfig {
        layers: 40,
        horizon: 40.0,
        max_speed: 10.0,
        substeps: 8,
        planar: true,
    };
    (env, Vec3::new(0.0, 100.0, 50.0), Vec3::new(200.0, 100.0, 50.0), cfg)
}

/// Random scenario sized so the battery comfortably covers the flight.
pub fn random_sim_scenario(rng: &mut ChaCha8Rng) -> Scenario {
    let bounds = Aabb::new(Vec3::ZERO, Vec3::new(300.0, 300.0, 150.0));
    let mut env = Environment::open(bounds, (30.0, 120.0));
    for _ in 0..rng.gen_range(0..=3) {
        env.obstacles.push(building(
            rng.gen_range(80.0..220.0),
            rng.gen_range(40.0..260.0),
            rng.gen_range(10.0..25.0),
            rng.gen_range(10.0..25.0),
            rng.gen_range(50.0..140.0),
        ));
    }
    env.clearance = 4.0;
    let sun = Vec3::new(rng.gen_range(-800.0..1100.0), rng.gen_range(-800.0..1100.0), rng.gen_range(400.0..2000.0));
    env.sun = SunModel::from_position(sun, Vec3::new(150.0, 150.0, 0.0));
    let planar = rng.gen_bool(0.5);
    let z0 = if planar { 60.0 } else { rng.gen_range(3..=9) as f64 * 10.0 };
    let z1 = if planar { z0 } else { rng.gen_range(3..=9) as f64 * 10.0 };
    let start = Vec3::new(20.0, rng.gen_range(2..=28) as f64 * 10.0, z0);
    let goal = Vec3::new(280.0, rng.gen_range(2..=28) as f64 * 10.0, z1);
    let mut energy = table_energy();
    energy.model = [HarvestModel::ClearSky, HarvestModel::Cloud, HarvestModel::Altitude][rng.gen_range(0..3)];
    energy.harvest.cloud_base = 40.0;
    energy.harvest.cloud_top = 90.0;
    energy.harvest.absorption = 0.01;
    let capacity = rng.gen_range(2200.0..3500.0);
    let floor = rng.gen_range(0.0..100.0);
    let energy_left = rng.gen_range(0.8..=1.0) * capacity;
    let mut obstacles = Vec::new();
    for _ in 0..rng.gen_range(0..=2) {
        let c = Vec3::new(rng.gen_range(90.0..210.0), rng.gen_range(30.0..270.0), z0);
        let clear_of_buildings = env.obstacles.iter().all(|b| b.radial_clearance(c) > 20.0);
        if clear_of_buildings && c.distance(start) > 40.0 && c.distance(goal) > 40.0 {
            obstacles.push(MovingObstacle {
                center: c,
                radius: rng.gen_range(4.0..8.0),
                velocity: Vec3::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), 0.0),
                known_to_planner: false,
            });
        }
    }
    let planner = [PlannerKind::Energy, PlannerKind::Time, PlannerKind::Shortest][rng.gen_range(0..3)];
    Scenario {
        name: "random".into(),
        start,
        goal,
        planner,
        resolution: 10.0,
        planar,
        lookahead: 20.0,
        dt: 0.05,
        max_duration: 150.0,
        environment: env,
        energy,
        battery: BatteryState {
            energy: energy_left,
            capacity,
            floor,
        },
        limits: ControlLimits::default(),
        avoidance: AvoidanceParams::default(),
        obstacles,
        privacy: None,
    }
}
