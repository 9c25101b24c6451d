//! Acceptance suite: one PASS/FAIL line per criterion. Runs without the
//! libtest harness so the lines always reach the console.

mod common;

use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use suav::cli::presets::{preset, PRESET_NAMES};
use suav::control::{
    cross_track_error, pursuit_command, step_kinematics_planar, ControlLimits, Mode, PathTracker, UavState,
};
use suav::energy::{harvest_power_altitude, harvest_power_clear, harvest_power_cloud, BatteryState, HarvestParams};
use suav::env::Prism;
use suav::grid::build_planar_grid;
use suav::planners::{
    dijkstra_oracle, plan_energy_efficient, plan_privacy_dp, plan_shortest, total_privacy_risk, DpLattice, Path,
    PlanError, PlannerKind, TimedPoint,
};
use suav::sim::{audit_energy, compute_metrics, plan_route, run_scenario, Outcome, SimMode};
use suav::Vec3;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: f64) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit, || {
        format!("took {:.2} s, limit {limit} s", elapsed.as_secs_f64())
    })
}

fn floored_net(p: &Path) -> f64 {
    p.edges.iter().map(|c| c.net().max(0.0)).fold(0.0, |a, x| a + x)
}

fn oracle_optimality() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut solved = 0;
    let mut worst = 0.0f64;
    let mut slowest = 0.0f64;
    while solved < 25 {
        let clock = Instant::now();
        let w = common::random_grid_world(&mut rng, 15);
        let oracle = match dijkstra_oracle(&w.grid, |_, e, _| e.length, w.start, w.goal) {
            Err(PlanError::NoPath) => {
                ensure(plan_shortest(&w.grid, w.start, w.goal) == Err(PlanError::NoPath), || {
                    "search found a path the oracle did not".into()
                })?;
                continue;
            }
            other => other.map_err(|e| e.to_string())?,
        };
        let short = plan_shortest(&w.grid, w.start, w.goal).map_err(|e| e.to_string())?;
        let oracle_e = dijkstra_oracle(&w.grid, |_, _, c| c.net().max(0.0), w.start, w.goal).map_err(|e| e.to_string())?;
        let energy = plan_energy_efficient(&w.grid, BatteryState::full(1e12, 0.0), w.start, w.goal)
            .map_err(|e| e.to_string())?;
        let d_len = (oracle.length - short.length).abs();
        let d_energy = (floored_net(&oracle_e) - floored_net(&energy)).abs();
        worst = worst.max(d_len).max(d_energy);
        slowest = slowest.max(clock.elapsed().as_secs_f64());
        ensure(d_len <= 1e-9 && d_energy <= 1e-9, || {
            format!("instance {solved}: length gap {d_len:e}, energy gap {d_energy:e}")
        })?;
        within(clock.elapsed(), 1.0)?;
        solved += 1;
    }
    Ok(format!("25 grids, max gap {worst:.1e}, slowest {slowest:.3} s"))
}

fn section4_ordering() -> Check {
    let clock = Instant::now();
    let sc = preset("section4").unwrap();
    let plan = |k| plan_route(&sc, k).map_err(|e| e.to_string());
    let (e, t, s) = (plan(PlannerKind::Energy)?, plan(PlannerKind::Time)?, plan(PlannerKind::Shortest)?);
    let (ce, ct, cs) = (e.net_cost(), t.net_cost(), s.net_cost());
    let budget = sc.battery.capacity - sc.battery.floor;
    ensure(ce < ct && ct <= cs, || format!("cost order broken: {ce:.1} / {ct:.1} / {cs:.1} J"))?;
    ensure(s.duration <= t.duration && t.duration <= e.duration, || {
        format!("time order broken: {:.2} / {:.2} / {:.2} s", s.duration, t.duration, e.duration)
    })?;
    ensure(ct <= budget, || format!("time route costs {ct:.1} J > {budget} J"))?;
    within(clock.elapsed(), 10.0)?;
    Ok(format!(
        "cost {ce:.1} < {ct:.1} <= {cs:.1} J, time {:.2} <= {:.2} <= {:.2} s",
        s.duration, t.duration, e.duration
    ))
}

fn shadow_avoidance() -> Check {
    let sc = common::fork_scenario();
    let grid = common::planar_grid(&sc);
    let (shaded, sunlit) = common::fork_branches(&sc, &grid);
    let shaded = Path::from_nodes(&grid, shaded, None);
    let sunlit = Path::from_nodes(&grid, sunlit, None);
    ensure(shaded.length == sunlit.length && shaded.shadow_time > 0.0 && sunlit.shadow_time == 0.0, || {
        "fork scenario does not offer an equal-length sunlit detour".into()
    })?;
    let route = plan_route(&sc, PlannerKind::Energy).map_err(|e| e.to_string())?;
    let log = run_scenario(&sc, SimMode::TrackOnly).map_err(|e| e.to_string())?;
    let flown = compute_metrics(&log, &sc).shadow_time;
    ensure(route.shadow_time == 0.0 && flown == 0.0, || {
        format!("shadow time planned {} s, flown {} s", route.shadow_time, flown)
    })?;
    Ok(format!("planned and flown shadow time 0 s over {:.0} m", route.length))
}

fn battery_invariants() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut runs = 0;
    let mut worst = 0.0f64;
    while runs < 100 {
        let sc = common::random_sim_scenario(&mut rng);
        if sc.validate().is_err() || plan_route(&sc, sc.planner).is_err() {
            continue;
        }
        let mode = SimMode::ALL[rng.gen_range(0..3)];
        let log = run_scenario(&sc, mode).map_err(|e| e.to_string())?;
        let b = sc.battery;
        ensure(log.outcome != Outcome::BatteryDepleted, || format!("run {runs} depleted its battery"))?;
        for r in &log.records {
            ensure(r.battery >= b.floor && r.battery <= b.capacity, || {
                format!("run {runs}: battery {} outside [{}, {}]", r.battery, b.floor, b.capacity)
            })?;
        }
        let audit = audit_energy(&log, &sc);
        let gap = audit.controller_residual.abs().max(audit.replay_residual.abs());
        worst = worst.max(gap);
        ensure(gap <= 1e-6, || format!("run {runs}: audit residual {gap:e} J"))?;
        runs += 1;
    }
    Ok(format!("100 runs in range, max audit residual {worst:.1e} J"))
}

fn privacy_dp() -> Check {
    let clock = Instant::now();
    let (env, start, goal, cfg) = common::small_dp_world();
    let lattice = DpLattice::build(&env, goal, &cfg).map_err(|e| e.to_string())?;
    ensure(lattice.dims() == [9, 9, 3], || format!("lattice dims {:?}", lattice.dims()))?;
    let plan = lattice.plan_from(start).map_err(|e| e.to_string())?;
    let oracle = common::dp_exhaustive_risk(&env, start, goal, &cfg).ok_or("enumeration found no walk")?;
    ensure(plan.risk == oracle, || format!("dp risk {} vs enumeration {}", plan.risk, oracle))?;

    let (env, start, goal, cfg) = common::nonconvex_privacy_world();
    let plan = plan_privacy_dp(&env, start, goal, &cfg).map_err(|e| e.to_string())?;
    let mut blocked = env.clone();
    blocked
        .obstacles
        .extend(env.privacy_regions.iter().map(|r| Prism::sphere(r.center, r.inner)));
    let grid = build_planar_grid(&blocked, 10.0, start.z).map_err(|e| e.to_string())?;
    let short = plan_shortest(&grid, start, goal).map_err(|e| e.to_string())?;
    let mut t = 0.0;
    let mut traj = vec![TimedPoint { t, position: start }];
    for w in short.waypoints.windows(2) {
        let dur = w[0].distance(w[1]) / cfg.max_speed;
        for s in 1..=8 {
            let u = s as f64 / 8.0;
            traj.push(TimedPoint {
                t: t + u * dur,
                position: w[0].lerp(w[1], u),
            });
        }
        t += dur;
    }
    let baseline = total_privacy_risk(&traj, &env.privacy_regions);
    let saving = 1.0 - plan.risk / baseline;
    ensure(saving >= 0.10, || format!("dp risk {:.3} only {:.1}% below shortest {:.3}", plan.risk, 100.0 * saving, baseline))?;
    within(clock.elapsed(), 30.0)?;
    Ok(format!(
        "exhaustive optimum {oracle:.6} matched exactly; non-convex zone risk {:.3} vs {:.3} ({:.0}% lower)",
        plan.risk,
        baseline,
        100.0 * saving
    ))
}

fn hybrid_safety() -> Check {
    let clock = Instant::now();
    let sc = preset("section5").unwrap();
    let hybrid = run_scenario(&sc, SimMode::Hybrid).map_err(|e| e.to_string())?;
    let reactive = run_scenario(&sc, SimMode::ReactiveOnly).map_err(|e| e.to_string())?;
    let (mh, mr) = (compute_metrics(&hybrid, &sc), compute_metrics(&reactive, &sc));
    ensure(hybrid.outcome == Outcome::GoalReached, || format!("hybrid ended with {:?}", hybrid.outcome))?;
    ensure(!mh.collision && hybrid.records.iter().all(|r| r.min_dist > 0.0), || {
        format!("min separation {:.2} m", mh.min_separation)
    })?;
    ensure(mh.net_cost < mr.net_cost, || {
        format!("hybrid {:.1} J not below reactive {:.1} J", mh.net_cost, mr.net_cost)
    })?;
    let avoiding: Vec<_> = hybrid.records.iter().filter(|r| r.mode == Mode::Avoiding).collect();
    ensure(!avoiding.is_empty(), || "hybrid never entered avoidance".into())?;
    ensure(avoiding.iter().all(|r| r.u == 0.0 || r.u.abs() == sc.limits.u_max), || {
        "non bang-bang turn rate while avoiding".into()
    })?;
    within(clock.elapsed(), 10.0)?;
    Ok(format!(
        "goal reached, min separation {:.2} m, net {:.1} J vs reactive {:.1} J",
        mh.min_separation, mh.net_cost, mr.net_cost
    ))
}

fn model_points() -> Check {
    let hp = common::table_energy().harvest;
    let peak = harvest_power_clear(1.0, false, &hp);
    ensure(peak == 22.8, || format!("clear-sky peak {peak}"))?;
    let cloudy = HarvestParams {
        cloud_base: 800.0,
        cloud_top: 1500.0,
        absorption: 0.002,
        ..hp
    };
    let mut jump = 0.0f64;
    for z in [cloudy.cloud_base, cloudy.cloud_top] {
        let at = harvest_power_cloud(z, &cloudy);
        for n in [f64::from_bits(z.to_bits() - 1), f64::from_bits(z.to_bits() + 1)] {
            jump = jump.max((harvest_power_cloud(n, &cloudy) - at).abs());
        }
    }
    ensure(jump <= 1e-12, || format!("cloud model jumps by {jump:e} W"))?;
    let mut prev = harvest_power_altitude(0.0, &hp);
    for k in 1..=100_000 {
        let p = harvest_power_altitude(k as f64 * 0.1, &hp);
        ensure(p >= prev, || format!("altitude model decreases at {} m", k as f64 * 0.1))?;
        prev = p;
    }
    Ok(format!("peak {peak} W, cloud jump {jump:.1e} W, altitude model monotone to 10 km"))
}

fn controller_numerics() -> Check {
    let limits = ControlLimits::default();
    let battery = BatteryState::full(750.0, 0.0);
    let (v, w, dt) = (12.0, 0.4, 1e-3);
    let mut s = UavState::new(Vec3::new(0.0, 0.0, 100.0), 0.0, v, battery);
    let mut worst = 0.0f64;
    for k in 1..=20_000 {
        s = step_kinematics_planar(&s, v, w, dt, &limits).state;
        let th = w * k as f64 * dt;
        let exact = Vec3::new(v / w * th.sin(), v / w * (1.0 - th.cos()), 100.0);
        worst = worst.max(s.position.distance(exact));
    }
    ensure(worst <= 1e-6, || format!("arc deviation {worst:e} m"))?;

    let path = [Vec3::new(0.0, 0.0, 100.0), Vec3::new(2000.0, 0.0, 100.0)];
    let mut tracker = PathTracker::new(&path);
    let mut s = UavState::new(Vec3::new(0.0, 5.0, 100.0), 0.0, limits.cruise, battery);
    let dt = 0.01;
    let mut settled = None;
    for k in 1..=1000 {
        tracker.update(s.position, 20.0);
        let (v, u) = pursuit_command(&s, tracker.target(20.0), 20.0, &limits);
        s = step_kinematics_planar(&s, v, u, dt, &limits).state;
        if settled.is_none() && cross_track_error(&path, s.position) < 0.5 {
            settled = Some(k as f64 * dt);
        }
    }
    let final_error = cross_track_error(&path, s.position);
    let settled = settled.ok_or_else(|| format!("cross-track error still {final_error:.3} m after 10 s"))?;
    ensure(final_error < 0.5, || format!("error grew back to {final_error:.3} m"))?;
    Ok(format!("arc deviation {worst:.1e} m, pursuit below 0.5 m after {settled:.2} s"))
}

fn determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let exe = env!("CARGO_BIN_EXE_suav");
    for name in PRESET_NAMES {
        let mut outputs = Vec::new();
        for _ in 0..2 {
            let out = Command::new(exe)
                .args(["compare", name, "--planners", "energy,time,shortest,privacy", "--report", "r.toml"])
                .current_dir(dir.path())
                .output()
                .map_err(|e| e.to_string())?;
            let report = std::fs::read(dir.path().join("r.toml")).map_err(|e| e.to_string())?;
            outputs.push((out.status.code(), out.stdout, out.stderr, report));
        }
        ensure(outputs[0] == outputs[1], || format!("compare on {name} differs between runs"))?;
        ensure(outputs[0].0 == Some(0), || format!("compare on {name} exited {:?}", outputs[0].0))?;
    }
    Ok(format!("compare byte-identical on {}", PRESET_NAMES.join(", ")))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("oracle optimality", oracle_optimality),
        ("section-4 ordering", section4_ordering),
        ("shadow avoidance", shadow_avoidance),
        ("battery invariants", battery_invariants),
        ("privacy DP", privacy_dp),
        ("hybrid safety and benefit", hybrid_safety),
        ("model point checks", model_points),
        ("controller numerics", controller_numerics),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let clock = Instant::now();
        let result = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = clock.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {}: PASS {name} ({secs:.2} s): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL {name} ({secs:.2} s): {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} of 9 acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all 9 acceptance criteria passed");
}
