use serde::Serialize;

use super::route::Route;
use super::{plan_route, MovingObstacle, Scenario, SimError, SimMode};
use crate::control::{
    avoidance_command, pursuit_command, sense_obstacles, step_kinematics_3d, supervisor_step, target_clear, turn_toward, Detection,
    Mode, PathTracker, UavState,
};
use crate::energy::incidence_cosine;
use crate::env::{in_shadow_with, Prism};
use crate::geometry::Vec3;

/// One logged simulation step, state after the step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Record {
    pub t: f64,
    pub position: Vec3,
    pub heading: f64,
    pub speed: f64,
    /// Turn-rate command applied during the step.
    pub u: f64,
    pub battery: f64,
    pub shadow: bool,
    pub mode: Mode,
    /// Distance to the nearest obstacle surface; infinite in an empty world.
    pub min_dist: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    GoalReached,
    Collision,
    BatteryDepleted,
    Timeout,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EventKind {
    ModeSwitch { from: Mode, to: Mode },
    LimitClamped,
    Terminal(Outcome),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub t: f64,
    pub step: usize,
    pub kind: EventKind,
}

/// Full trace of a run plus the controller-side energy bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct SimLog {
    pub mode: SimMode,
    pub dt: f64,
    pub records: Vec<Record>,
    pub events: Vec<Event>,
    pub outcome: Outcome,
    /// Global route the controller tracked.
    pub route: Route,
    pub consumed: f64,
    /// Harvest before clamping at capacity.
    pub harvested: f64,
    pub clamp_loss: f64,
}

impl SimLog {
    pub fn mode_switches(&self) -> usize {
        self.events
            .iter()
            .filter(|e| matches!(e.kind, EventKind::ModeSwitch { .. }))
            .count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metrics {
    pub total_time: f64,
    pub consumed: f64,
    /// Harvest credited to the battery.
    pub harvested: f64,
    pub net_cost: f64,
    pub clamp_loss: f64,
    pub initial_battery: f64,
    pub final_battery: f64,
    pub min_battery: f64,
    pub path_length: f64,
    pub shadow_time: f64,
    pub min_separation: f64,
    pub collision: bool,
    pub outcome: Outcome,
    pub mode_switches: usize,
}

/// Comparison of the replayed energy trace with the controller's books.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyAudit {
    /// `consumed - harvested + clamp_loss - (initial - final)` from the controller.
    pub controller_residual: f64,
    /// Replayed final battery minus the logged final battery.
    pub replay_residual: f64,
}

fn step_energy(sc: &Scenario, prev: &Record, cur: &Record, cos: f64) -> (f64, f64) {
    let dt = sc.dt;
    let rate = (cur.position.z - prev.position.z) / dt;
    let power = sc.energy.consumption_power(cur.speed > 0.0, rate);
    let harvest = sc.energy.harvest_power(cur.position.z, cos, cur.shadow);
    (power * dt, harvest * dt)
}

fn sun_cosine(sc: &Scenario) -> f64 {
    let sun = &sc.environment.sun;
    incidence_cosine(0.0, 0.0, sun.azimuth, sun.elevation)
}

fn separation(sc: &Scenario, p: Vec3, spheres: &[MovingObstacle]) -> f64 {
    let prisms = sc.environment.obstacles.iter().map(|o| o.radial_clearance(p));
    let balls = spheres.iter().map(|o| o.center.distance(p) - o.radius);
    prisms.chain(balls).fold(f64::INFINITY, f64::min)
}

fn collides(sc: &Scenario, p: Vec3, spheres: &[MovingObstacle]) -> bool {
    sc.environment.obstacles.iter().any(|o| o.contains(p)) || spheres.iter().any(|o| o.as_prism().contains(p))
}

/// Cross-section circles of the buildings at altitude `z`, as static spheres
/// in that plane. Used by the purely reactive controller.
fn building_circles(sc: &Scenario, z: f64) -> Vec<MovingObstacle> {
    sc.environment
        .obstacles
        .iter()
        .filter(|o| (z - o.center.z).abs() < o.semi_axes[2])
        .map(|o| MovingObstacle {
            center: o.center.with_z(z),
            radius: o.semi_axes[0].hypot(o.semi_axes[1]),
            velocity: Vec3::ZERO,
            known_to_planner: true,
        })
        .collect()
}

/// Runs the scenario with the chosen controller stack.
pub fn run_scenario(sc: &Scenario, mode: SimMode) -> Result<SimLog, SimError> {
    sc.validate()?;
    let route = match mode {
        SimMode::ReactiveOnly => Route {
            planner: sc.planner,
            waypoints: vec![sc.start, sc.goal],
            legs: Vec::new(),
            battery: vec![sc.battery.energy],
            consumed: 0.0,
            harvested: 0.0,
            clamp_loss: 0.0,
            duration: 0.0,
            length: sc.start.distance(sc.goal),
            shadow_time: 0.0,
            privacy_risk: 0.0,
        },
        _ => plan_route(sc, sc.planner)?,
    };
    let mut path = route.waypoints.clone();
    path[0] = sc.start;
    let mut tracker = PathTracker::new(&path);
    let limits = &sc.limits;
    let band = if sc.planar {
        (sc.start.z, sc.start.z)
    } else {
        sc.environment.altitude
    };
    let cos = sun_cosine(sc);
    let arrive = sc.resolution;

    let first_target = tracker.target(sc.lookahead);
    let aim = if first_target.distance_xy(sc.start) > 0.0 { first_target } else { sc.goal };
    let mut state = UavState::new(sc.start, (aim - sc.start).bearing(), limits.cruise, sc.battery);
    let spheres0 = sc.obstacles_at(0.0);
    let shadow0 = {
        let occ: Vec<Prism> = spheres0.iter().map(MovingObstacle::as_prism).collect();
        in_shadow_with(&sc.environment, &occ, sc.start, 0.0)
    };
    let mut records = vec![Record {
        t: 0.0,
        position: state.position,
        heading: state.heading,
        speed: state.speed,
        u: 0.0,
        battery: state.battery.energy,
        shadow: shadow0,
        mode: state.mode,
        min_dist: separation(sc, state.position, &spheres0),
    }];
    let mut events = Vec::new();
    let (mut consumed, mut harvested, mut clamp_loss) = (0.0, 0.0, 0.0);
    let max_steps = (sc.max_duration / sc.dt).ceil() as usize;

    let outcome = if state.position.distance(sc.goal) <= arrive {
        Outcome::GoalReached
    } else {
        let mut k = 0usize;
        loop {
            let t = k as f64 * sc.dt;
            let spheres = sc.obstacles_at(t);
            tracker.update(state.position, sc.lookahead);
            let target = tracker.target(sc.lookahead);

            let detections: Vec<Detection> = match mode {
                SimMode::TrackOnly => Vec::new(),
                SimMode::Hybrid => sense_obstacles(&spheres, &state, &sc.avoidance),
                SimMode::ReactiveOnly => {
                    let mut all = spheres.clone();
                    all.extend(building_circles(sc, state.position.z));
                    sense_obstacles(&all, &state, &sc.avoidance)
                }
            };
            let next_mode = supervisor_step(state.mode, &state, &detections, target, &sc.avoidance);
            if next_mode != state.mode {
                events.push(Event {
                    t,
                    step: k,
                    kind: EventKind::ModeSwitch {
                        from: state.mode,
                        to: next_mode,
                    },
                });
                state.mode = next_mode;
            }

            let nearest = detections.iter().min_by(|a, b| a.range.total_cmp(&b.range).then(a.id.cmp(&b.id)));
            let (v, u) = match (state.mode, nearest) {
                (Mode::Tracking, _) => pursuit_command(&state, target, sc.lookahead, limits),
                (Mode::Avoiding, Some(d))
                    if d.range <= sc.avoidance.trigger
                        && !target_clear(&state, &detections, target, &sc.avoidance, limits) =>
                {
                    let sun = sc.environment.sun.ground_direction(state.position, t);
                    avoidance_command(&state, d, sun, &sc.avoidance, limits)
                }
                (Mode::Avoiding, _) => (limits.cruise, turn_toward(&state, target, limits)),
            };
            let w = if sc.planar {
                0.0
            } else {
                (target.z - state.position.z) * limits.cruise / sc.lookahead
            };
            let step = step_kinematics_3d(&state, v, w, u, sc.dt, limits, band);
            if step.clamped {
                events.push(Event {
                    t,
                    step: k,
                    kind: EventKind::LimitClamped,
                });
            }
            let prev = *records.last().unwrap();
            let mut next = step.state;
            k += 1;
            let t1 = k as f64 * sc.dt;
            let spheres1 = sc.obstacles_at(t1);
            let occ: Vec<Prism> = spheres1.iter().map(MovingObstacle::as_prism).collect();
            let mut rec = Record {
                t: t1,
                position: next.position,
                heading: next.heading,
                speed: next.speed,
                u: limits.clamp_turn(u),
                battery: 0.0,
                shadow: in_shadow_with(&sc.environment, &occ, next.position, t1),
                mode: next.mode,
                min_dist: separation(sc, next.position, &spheres1),
            };
            let (c, h) = step_energy(sc, &prev, &rec, cos);
            let raw = next.battery.energy - c + h;
            let stored = raw.min(next.battery.capacity);
            consumed += c;
            harvested += h;
            clamp_loss += raw - stored;
            next.battery.energy = stored;
            rec.battery = stored;
            records.push(rec);
            state = next;

            if collides(sc, state.position, &spheres1) {
                break Outcome::Collision;
            }
            if stored < state.battery.floor {
                break Outcome::BatteryDepleted;
            }
            if state.position.distance(sc.goal) <= arrive {
                break Outcome::GoalReached;
            }
            if k >= max_steps {
                break Outcome::Timeout;
            }
        }
    };
    let last = records.last().unwrap();
    events.push(Event {
        t: last.t,
        step: records.len() - 1,
        kind: EventKind::Terminal(outcome),
    });
    log::debug!(
        "{} run ended with {:?} at t = {:.2} s after {} steps",
        mode.name(),
        outcome,
        last.t,
        records.len() - 1
    );
    Ok(SimLog {
        mode,
        dt: sc.dt,
        records,
        events,
        outcome,
        route,
        consumed,
        harvested,
        clamp_loss,
    })
}

/// Aggregates recomputed from the logged trace alone.
pub fn compute_metrics(log: &SimLog, sc: &Scenario) -> Metrics {
    let cos = sun_cosine(sc);
    let first = &log.records[0];
    let cap = sc.battery.capacity;
    let mut e = first.battery;
    let mut m = Metrics {
        total_time: log.records.last().unwrap().t - first.t,
        consumed: 0.0,
        harvested: 0.0,
        net_cost: 0.0,
        clamp_loss: 0.0,
        initial_battery: first.battery,
        final_battery: first.battery,
        min_battery: first.battery,
        path_length: 0.0,
        shadow_time: 0.0,
        min_separation: first.min_dist,
        collision: false,
        outcome: log.outcome,
        mode_switches: 0,
    };
    for w in log.records.windows(2) {
        let (c, h) = step_energy(sc, &w[0], &w[1], cos);
        let raw = e - c + h;
        let next = raw.min(cap);
        m.consumed += c;
        m.harvested += h - (raw - next);
        m.clamp_loss += raw - next;
        e = next;
        m.min_battery = m.min_battery.min(e);
        m.path_length += w[0].position.distance(w[1].position);
        if w[1].shadow {
            m.shadow_time += sc.dt;
        }
        m.min_separation = m.min_separation.min(w[1].min_dist);
        if w[1].mode != w[0].mode {
            m.mode_switches += 1;
        }
    }
    m.final_battery = e;
    m.net_cost = m.consumed - m.harvested;
    m.collision = m.min_separation <= 0.0;
    m
}

/// Double-entry check of a run's energy accounting.
pub fn audit_energy(log: &SimLog, sc: &Scenario) -> EnergyAudit {
    let first = log.records[0].battery;
    let last = log.records.last().unwrap().battery;
    let m = compute_metrics(log, sc);
    EnergyAudit {
        controller_residual: log.consumed - log.harvested + log.clamp_loss - (first - last),
        replay_residual: m.final_battery - last,
    }
}
