use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use super::{ControlError, ControlLimits, Mode, UavState};
use crate::geometry::{ccw_angle, wrap_angle, Vec3};
use crate::sim::MovingObstacle;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AvoidanceParams {
    /// Angle added outside each edge of an obstacle's cone, rad.
    pub alpha_safe: f64,
    /// Below this difference of the two candidate deviations the sunward
    /// candidate is preferred, rad.
    pub select_threshold: f64,
    pub sensor_range: f64,
    /// Switch to avoidance at or below this surface distance.
    pub trigger: f64,
    /// Heading tolerance for returning to tracking, rad.
    pub align_tolerance: f64,
    /// Half-width of the forward field of view, rad.
    pub fov_half: f64,
}

impl Default for AvoidanceParams {
    fn default() -> Self {
        AvoidanceParams {
            alpha_safe: 40f64.to_radians(),
            select_threshold: 10f64.to_radians(),
            sensor_range: 50.0,
            trigger: 30.0,
            align_tolerance: 5f64.to_radians(),
            fov_half: FRAC_PI_2,
        }
    }
}

impl AvoidanceParams {
    pub fn validate(&self) -> Result<(), ControlError> {
        if !(self.alpha_safe > 0.0 && self.alpha_safe < FRAC_PI_2) {
            return Err(ControlError::InvalidAvoidance("alpha_safe must lie in (0, pi/2)"));
        }
        if !(self.trigger > 0.0 && self.trigger <= self.sensor_range) {
            return Err(ControlError::InvalidAvoidance("need 0 < trigger <= sensor_range"));
        }
        if !(self.select_threshold >= 0.0 && self.align_tolerance > 0.0 && self.fov_half > 0.0) {
            return Err(ControlError::InvalidAvoidance("angles must be positive"));
        }
        if !(self.sensor_range.is_finite() && self.select_threshold.is_finite()) {
            return Err(ControlError::InvalidAvoidance("non-finite value"));
        }
        Ok(())
    }
}

/// One sensed obstacle, angles in the body frame (counter-clockwise positive).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub id: usize,
    /// Left edge of the obstacle's cone.
    pub alpha1: f64,
    /// Right edge, `alpha2 <= alpha1`.
    pub alpha2: f64,
    pub velocity: Vec3,
    /// Distance from the vehicle to the obstacle surface at flight altitude.
    pub range: f64,
    pub center_distance: f64,
}

/// Obstacles inside sensor range whose cone overlaps the forward field of
/// view. Each sphere is cut by the flight altitude plane.
pub fn sense_obstacles(obstacles: &[MovingObstacle], s: &UavState, params: &AvoidanceParams) -> Vec<Detection> {
    let mut out = Vec::new();
    for (id, o) in obstacles.iter().enumerate() {
        let dz = o.center.z - s.position.z;
        if dz.abs() >= o.radius {
            continue;
        }
        let r_eff = (o.radius * o.radius - dz * dz).sqrt();
        let rel = (o.center - s.position).with_z(0.0);
        let r = rel.norm_xy();
        let range = (r - r_eff).max(0.0);
        if range > params.sensor_range {
            continue;
        }
        let bearing = wrap_angle(rel.bearing() - s.heading);
        let half = if r > r_eff { (r_eff / r).asin() } else { FRAC_PI_2 };
        let (alpha1, alpha2) = (bearing + half, bearing - half);
        if alpha2 > params.fov_half || alpha1 < -params.fov_half {
            continue;
        }
        out.push(Detection {
            id,
            alpha1,
            alpha2,
            velocity: o.velocity.with_z(0.0),
            range,
            center_distance: r,
        });
    }
    out
}

fn tau(a: Vec3, b: Vec3) -> f64 {
    let angle = ccw_angle(a, b);
    if angle == 0.0 {
        0.0
    } else if angle > 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Bang-bang steering onto a boundary ray of the enlarged cone of `det`.
pub fn avoidance_command(
    s: &UavState,
    det: &Detection,
    sun_dir: Vec3,
    params: &AvoidanceParams,
    limits: &ControlLimits,
) -> (f64, f64) {
    let gain = limits.v_max - limits.cruise;
    let beta = [det.alpha1 + params.alpha_safe, det.alpha2 - params.alpha_safe];
    let cand = beta.map(|b| det.velocity + Vec3::from_angle(s.heading + b) * gain);
    let heading = Vec3::from_angle(s.heading);
    let vel = if s.speed > 0.0 { heading * s.speed } else { heading };
    let eps = cand.map(|c| ccw_angle(c, vel));
    let pick = if (eps[0].abs() - eps[1].abs()).abs() >= params.select_threshold {
        usize::from(eps[1].abs() < eps[0].abs())
    } else {
        let to_sun = cand.map(|c| ccw_angle(c, sun_dir).abs());
        usize::from(to_sun[1] < to_sun[0])
    };
    let c = cand[pick];
    let u = -limits.u_max * tau(c, vel);
    (limits.clamp_speed(c.norm_xy()), u)
}

/// Whether heading for `target` at cruise speed keeps the velocity relative
/// to every detected obstacle within `trigger` outside its enlarged cone.
pub fn target_clear(
    s: &UavState,
    detections: &[Detection],
    target: Vec3,
    params: &AvoidanceParams,
    limits: &ControlLimits,
) -> bool {
    let want = Vec3::from_angle((target - s.position).bearing()) * limits.cruise;
    detections.iter().filter(|d| d.range <= params.trigger).all(|d| {
        let rel = want - d.velocity;
        let a = wrap_angle(rel.bearing() - s.heading);
        let mid = 0.5 * (d.alpha1 + d.alpha2);
        let half = 0.5 * (d.alpha1 - d.alpha2) + params.alpha_safe;
        wrap_angle(a - mid).abs() > half
    })
}

/// Full-rate turn toward `target` (zero when already on it).
pub fn turn_toward(s: &UavState, target: Vec3, limits: &ControlLimits) -> f64 {
    -limits.u_max * tau(target - s.position, Vec3::from_angle(s.heading))
}

/// Mode after applying the two switching rules.
pub fn supervisor_step(
    mode: Mode,
    s: &UavState,
    detections: &[Detection],
    target: Vec3,
    params: &AvoidanceParams,
) -> Mode {
    let d = detections.iter().map(|d| d.range).fold(f64::INFINITY, f64::min);
    match mode {
        Mode::Tracking if d <= params.trigger => Mode::Avoiding,
        Mode::Avoiding if d > params.trigger => {
            let off = wrap_angle((target - s.position).bearing() - s.heading);
            if off.abs() <= params.align_tolerance {
                Mode::Tracking
            } else {
                Mode::Avoiding
            }
        }
        m => m,
    }
}
