mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use suav::cli::presets::preset;
use suav::control::{sense_obstacles, Mode};
use suav::env::{in_shadow_with, Prism};
use suav::planners::PlannerKind;
use suav::sim::{
    audit_energy, compute_metrics, plan_route, run_scenario, EventKind, MovingObstacle, Outcome, Scenario, SimLog,
    SimMode,
};

/// Random scenarios that validate and can be planned.
fn feasible_scenarios(seed: u64, count: usize) -> Vec<(Scenario, SimMode)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let sc = common::random_sim_scenario(&mut rng);
        if sc.validate().is_err() || plan_route(&sc, sc.planner).is_err() {
            continue;
        }
        let mode = SimMode::ALL[rng.gen_range(0..3)];
        out.push((sc, mode));
    }
    out
}

fn check_battery(sc: &Scenario, log: &SimLog) {
    let b = &sc.battery;
    for r in &log.records {
        assert!(r.battery >= b.floor && r.battery <= b.capacity, "battery {} outside [{}, {}]", r.battery, b.floor, b.capacity);
    }
    let audit = audit_energy(log, sc);
    assert!(audit.controller_residual.abs() <= 1e-6, "{audit:?}");
    assert!(audit.replay_residual.abs() <= 1e-6, "{audit:?}");
}

#[test]
fn random_scenarios_keep_battery_in_range() {
    let mut outcomes = [0usize; 4];
    for (sc, mode) in feasible_scenarios(99, 100) {
        let log = run_scenario(&sc, mode).unwrap();
        assert_ne!(log.outcome, Outcome::BatteryDepleted, "mode {mode:?}");
        check_battery(&sc, &log);
        outcomes[match log.outcome {
            Outcome::GoalReached => 0,
            Outcome::Collision => 1,
            Outcome::BatteryDepleted => 2,
            Outcome::Timeout => 3,
        }] += 1;
    }
    assert!(outcomes[0] >= 80, "outcomes {outcomes:?}");
}

#[test]
fn logs_are_internally_consistent() {
    for (sc, mode) in feasible_scenarios(5, 12) {
        let log = run_scenario(&sc, mode).unwrap();
        let m = compute_metrics(&log, &sc);
        assert_eq!(m.collision, m.min_separation <= 0.0);
        for (k, r) in log.records.iter().enumerate() {
            assert!((r.t - k as f64 * sc.dt).abs() <= 1e-9);
            let occ: Vec<Prism> = sc.obstacles_at(r.t).iter().map(MovingObstacle::as_prism).collect();
            assert_eq!(r.shadow, in_shadow_with(&sc.environment, &occ, r.position, r.t));
            assert!(r.speed >= sc.limits.v_min && r.speed <= sc.limits.v_max);
            assert!(r.u.abs() <= sc.limits.u_max);
        }
        assert!(matches!(log.events.last().unwrap().kind, EventKind::Terminal(o) if o == log.outcome));
    }
}

#[test]
fn runs_are_deterministic() {
    let sc = preset("section5").unwrap();
    for mode in SimMode::ALL {
        assert_eq!(run_scenario(&sc, mode).unwrap(), run_scenario(&sc, mode).unwrap());
    }
}

#[test]
fn section5_hybrid_is_safe_and_cheaper_than_reactive() {
    let sc = preset("section5").unwrap();
    let hybrid = run_scenario(&sc, SimMode::Hybrid).unwrap();
    let reactive = run_scenario(&sc, SimMode::ReactiveOnly).unwrap();
    let track = run_scenario(&sc, SimMode::TrackOnly).unwrap();
    let (mh, mr, mt) = (
        compute_metrics(&hybrid, &sc),
        compute_metrics(&reactive, &sc),
        compute_metrics(&track, &sc),
    );
    assert_eq!(hybrid.outcome, Outcome::GoalReached);
    assert!(!mh.collision);
    assert!(hybrid.records.iter().all(|r| r.min_dist > 0.0));
    assert!(mh.net_cost < mr.net_cost);
    assert!(mh.mode_switches >= 2);
    for r in hybrid.records.iter().filter(|r| r.mode == Mode::Avoiding) {
        assert!(r.u == 0.0 || r.u.abs() == sc.limits.u_max, "u = {}", r.u);
    }
    // Without avoidance the unknown obstacle is hit.
    assert!(mt.collision);
    check_battery(&sc, &hybrid);
}

/// Every recorded switch agrees with the distance part of the switching laws
/// evaluated on the logged state.
#[test]
fn switches_follow_the_laws() {
    let sc = preset("section5").unwrap();
    for mode in [SimMode::Hybrid, SimMode::ReactiveOnly] {
        let log = run_scenario(&sc, mode).unwrap();
        let mut switches = 0;
        for ev in &log.events {
            let EventKind::ModeSwitch { from, to } = ev.kind else { continue };
            switches += 1;
            let r = &log.records[ev.step];
            if mode == SimMode::ReactiveOnly {
                continue;
            }
            let state = suav::control::UavState {
                mode: from,
                ..suav::control::UavState::new(r.position, r.heading, r.speed, sc.battery)
            };
            let d = sense_obstacles(&sc.obstacles_at(ev.t), &state, &sc.avoidance)
                .iter()
                .map(|d| d.range)
                .fold(f64::INFINITY, f64::min);
            match (from, to) {
                (Mode::Tracking, Mode::Avoiding) => assert!(d <= sc.avoidance.trigger),
                (Mode::Avoiding, Mode::Tracking) => assert!(d > sc.avoidance.trigger),
                _ => unreachable!(),
            }
        }
        assert!(switches > 0);
    }
}

#[test]
fn fork_flight_stays_in_sun() {
    let sc = common::fork_scenario();
    let log = run_scenario(&sc, SimMode::TrackOnly).unwrap();
    assert_eq!(log.outcome, Outcome::GoalReached);
    assert_eq!(compute_metrics(&log, &sc).shadow_time, 0.0);
    let route = plan_route(&sc, PlannerKind::Energy).unwrap();
    assert_eq!(route.shadow_time, 0.0);
}
