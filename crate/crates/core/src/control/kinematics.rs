use super::{ControlLimits, UavState};
use crate::geometry::{wrap_angle, Vec3};

/// Result of one integration step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KinematicStep {
    pub state: UavState,
    /// Speed, turn rate or vertical rate was clamped, or the altitude band was hit.
    pub clamped: bool,
}

// (x, y, z, theta)
type Q = [f64; 4];

fn deriv(q: &Q, v: f64, w: f64, omega: f64) -> Q {
    [v * q[3].cos(), v * q[3].sin(), w, omega]
}

fn axpy(q: &Q, k: &Q, h: f64) -> Q {
    [q[0] + h * k[0], q[1] + h * k[1], q[2] + h * k[2], q[3] + h * k[3]]
}

fn rk4(q: Q, v: f64, w: f64, omega: f64, dt: f64) -> Q {
    let k1 = deriv(&q, v, w, omega);
    let k2 = deriv(&axpy(&q, &k1, dt / 2.0), v, w, omega);
    let k3 = deriv(&axpy(&q, &k2, dt / 2.0), v, w, omega);
    let k4 = deriv(&axpy(&q, &k3, dt), v, w, omega);
    let mut out = q;
    for i in 0..4 {
        out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// Advances the unicycle with speed `v`, vertical rate `w` and turn rate
/// `omega` over `dt`, keeping the altitude inside `band`.
pub fn step_kinematics_3d(
    s: &UavState,
    v: f64,
    w: f64,
    omega: f64,
    dt: f64,
    limits: &ControlLimits,
    band: (f64, f64),
) -> KinematicStep {
    let vc = limits.clamp_speed(v);
    let wc = w.clamp(-limits.vertical_max, limits.vertical_max);
    let oc = limits.clamp_turn(omega);
    let mut clamped = vc != v || wc != w || oc != omega;
    let q = rk4([s.position.x, s.position.y, s.position.z, s.heading], vc, wc, oc, dt);
    let mut z = q[2];
    if z < band.0 || z > band.1 {
        z = z.clamp(band.0, band.1);
        clamped = true;
    }
    let state = UavState {
        position: Vec3::new(q[0], q[1], z),
        heading: wrap_angle(q[3]),
        speed: vc,
        ..*s
    };
    KinematicStep { state, clamped }
}

/// Planar variant: altitude held constant.
pub fn step_kinematics_planar(s: &UavState, v: f64, omega: f64, dt: f64, limits: &ControlLimits) -> KinematicStep {
    let z = s.position.z;
    let mut step = step_kinematics_3d(s, v, 0.0, omega, dt, limits, (z, z));
    step.state.position.z = z;
    step
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::BatteryState;

    fn state(heading: f64) -> UavState {
        UavState::new(Vec3::new(0.0, 0.0, 100.0), heading, 12.0, BatteryState::full(750.0, 0.0))
    }

    #[test]
    fn fixed_point_and_straight_line() {
        let lim = ControlLimits::default();
        let s = state(0.3);
        let r = step_kinematics_planar(&s, 0.0, 0.0, 1.0, &lim);
        assert_eq!(r.state.position, s.position);
        assert_eq!(r.state.heading, s.heading);
        assert!(!r.clamped);
        let r = step_kinematics_planar(&state(0.0), 12.0, 0.0, 1.0, &lim);
        assert_eq!(r.state.position, Vec3::new(12.0, 0.0, 100.0));
    }

    #[test]
    fn inputs_are_clamped() {
        let lim = ControlLimits::default();
        let r = step_kinematics_planar(&state(0.0), 50.0, 10.0, 0.01, &lim);
        assert!(r.clamped);
        assert_eq!(r.state.speed, lim.v_max);
        let r = step_kinematics_3d(&state(0.0), 12.0, 3.0, 0.0, 10.0, &lim, (40.0, 110.0));
        assert!(r.clamped);
        assert_eq!(r.state.position.z, 110.0);
    }

    #[test]
    fn climbing_helix() {
        let lim = ControlLimits::default();
        let mut s = state(0.0);
        for _ in 0..1000 {
            s = step_kinematics_3d(&s, 10.0, 1.0, 0.5, 1e-3, &lim, (0.0, 1000.0)).state;
        }
        let r = 10.0 / 0.5;
        assert!((s.position.x - r * 0.5f64.sin()).abs() < 1e-9);
        assert!((s.position.y - r * (1.0 - 0.5f64.cos())).abs() < 1e-9);
        assert!((s.position.z - 101.0).abs() < 1e-9);
    }
}
