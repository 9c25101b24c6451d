//! World model: superellipsoid prism obstacles, segment and shadow queries.
//!
//! Every building is enclosed by a superellipsoid
//! `((x-x0)/a)^(2d) + ((y-y0)/b)^(2e) + ((z-z0)/c)^(2f)`; values `<= 1` are
//! treated as occupied. Large exponents give box-like prisms, `(1, 1, f)`
//! with large `f` a cylinder, `(1, 1, 1)` an ellipsoid.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Vec3;

/// Distance tolerance used when locating the closest approach of a segment.
pub const SEGMENT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnvError {
    #[error("invalid prism: {0}")]
    InvalidPrism(String),
    #[error("invalid sun model: {0}")]
    InvalidSun(String),
    #[error("invalid privacy region: {0}")]
    InvalidRegion(String),
    #[error("invalid bounds: {0}")]
    InvalidBounds(String),
    #[error("no free grid node exists")]
    EmptyGrid,
    #[error("invalid grid resolution {0}")]
    InvalidResolution(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prism {
    pub center: Vec3,
    pub semi_axes: [f64; 3],
    pub exponents: [u32; 3],
}

impl Prism {
    pub fn new(center: Vec3, semi_axes: [f64; 3], exponents: [u32; 3]) -> Result<Self, EnvError> {
        let prism = Prism {
            center,
            semi_axes,
            exponents,
        };
        prism.validate()?;
        Ok(prism)
    }

    /// Sphere of the given radius, expressed as a `(1, 1, 1)` superellipsoid.
    pub fn sphere(center: Vec3, radius: f64) -> Self {
        Prism {
            center,
            semi_axes: [radius; 3],
            exponents: [1; 3],
        }
    }

    pub fn validate(&self) -> Result<(), EnvError> {
        if !self.center.is_finite() {
            return Err(EnvError::InvalidPrism("center must be finite".into()));
        }
        if self.semi_axes.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(EnvError::InvalidPrism(format!(
                "semi-axes must be positive, got {:?}",
                self.semi_axes
            )));
        }
        if self.exponents.iter().any(|&e| e < 1) {
            return Err(EnvError::InvalidPrism(format!(
                "shape exponents must be >= 1, got {:?}",
                self.exponents
            )));
        }
        Ok(())
    }

    /// The inside-outside function of the superellipsoid.
    pub fn gamma(&self, p: Vec3) -> f64 {
        let u = (p - self.center).to_array();
        (0..3)
            .map(|i| (u[i] / self.semi_axes[i]).powi(2 * self.exponents[i] as i32))
            .sum()
    }

    pub fn contains(&self, p: Vec3) -> bool {
        self.gamma(p) <= 1.0
    }

    /// Same shape with every semi-axis grown by `margin`.
    pub fn inflated(&self, margin: f64) -> Prism {
        Prism {
            semi_axes: self.semi_axes.map(|s| s + margin),
            ..*self
        }
    }

    pub fn bounding_box(&self) -> Aabb {
        let s = Vec3::from(self.semi_axes);
        Aabb {
            min: self.center - s,
            max: self.center + s,
        }
    }

    pub fn top(&self) -> f64 {
        self.center.z + self.semi_axes[2]
    }

    /// Whether the closed segment `a -> b` touches the closed prism.
    pub fn intersects_segment(&self, a: Vec3, b: Vec3) -> bool {
        // Fix the parametrisation so the answer cannot depend on argument order.
        let (a, b) = if a.to_array() <= b.to_array() { (a, b) } else { (b, a) };
        let Some((t0, t1)) = self.bounding_box().clip_segment(a, b) else {
            return false;
        };
        if self.contains(a) || self.contains(b) {
            return true;
        }
        let d = b - a;
        if self.exponents == [1, 1, 1] {
            // Quadratic in t along the line.
            let u = (a - self.center).to_array();
            let dv = d.to_array();
            let (mut qa, mut qb, mut qc) = (0.0, 0.0, 0.0);
            for i in 0..3 {
                let s2 = self.semi_axes[i] * self.semi_axes[i];
                qa += dv[i] * dv[i] / s2;
                qb += 2.0 * u[i] * dv[i] / s2;
                qc += u[i] * u[i] / s2;
            }
            if qa == 0.0 {
                return qc <= 1.0;
            }
            let t = (-qb / (2.0 * qa)).clamp(0.0, 1.0);
            return (qa * t + qb) * t + qc <= 1.0;
        }
        // Gamma along a line is a sum of even powers of affine functions, hence
        // convex: bisect on the sign of its derivative for the minimiser.
        let len = d.norm();
        if len == 0.0 {
            return false;
        }
        let slope = |t: f64| self.gamma_derivative(a, d, t);
        let (mut lo, mut hi) = (t0, t1);
        let t_min = if slope(lo) >= 0.0 {
            lo
        } else if slope(hi) <= 0.0 {
            hi
        } else {
            while (hi - lo) * len > SEGMENT_TOLERANCE {
                let mid = 0.5 * (lo + hi);
                if slope(mid) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        self.gamma(a + d * t_min) <= 1.0
    }

    fn gamma_derivative(&self, a: Vec3, d: Vec3, t: f64) -> f64 {
        let u = (a + d * t - self.center).to_array();
        let dv = d.to_array();
        (0..3)
            .map(|i| {
                let k = 2 * self.exponents[i] as i32;
                let w = u[i] / self.semi_axes[i];
                k as f64 * w.powi(k - 1) * dv[i] / self.semi_axes[i]
            })
            .sum()
    }

    /// Distance from `p` to the surface measured along the ray from the
    /// centre. Zero inside; exact for spheres, an upper bound on the
    /// Euclidean clearance otherwise.
    pub fn radial_clearance(&self, p: Vec3) -> f64 {
        let g = self.gamma(p);
        if g <= 1.0 {
            return 0.0;
        }
        let r = p.distance(self.center);
        let [e0, e1, e2] = self.exponents;
        let scale = if e0 == e1 && e1 == e2 {
            g.powf(-1.0 / (2.0 * e0 as f64))
        } else {
            // gamma(centre + s (p - centre)) is increasing in s.
            let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if self.gamma(self.center.lerp(p, mid)) <= 1.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lo
        };
        (1.0 - scale) * r
    }
}

/// The inside-outside function of `prism` at `p`.
pub fn gamma(p: Vec3, prism: &Prism) -> f64 {
    prism.gamma(p)
}

/// Axis-aligned box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn new(min: Vec3, max: Vec3) -> Self {
        Aabb { min, max }
    }

    pub fn contains(&self, p: Vec3) -> bool {
        p.x >= self.min.x
            && p.x <= self.max.x
            && p.y >= self.min.y
            && p.y <= self.max.y
            && p.z >= self.min.z
            && p.z <= self.max.z
    }

    pub fn overlaps(&self, other: &Aabb) -> bool {
        self.min.x <= other.max.x
            && other.min.x <= self.max.x
            && self.min.y <= other.max.y
            && other.min.y <= self.max.y
            && self.min.z <= other.max.z
            && other.min.z <= self.max.z
    }

    /// Parameter interval of `a + t (b - a)`, `t` in `[0, 1]`, inside the box.
    pub fn clip_segment(&self, a: Vec3, b: Vec3) -> Option<(f64, f64)> {
        let (mut t0, mut t1) = (0.0_f64, 1.0_f64);
        let pa = a.to_array();
        let d = (b - a).to_array();
        let lo = self.min.to_array();
        let hi = self.max.to_array();
        for i in 0..3 {
            if d[i] == 0.0 {
                if pa[i] < lo[i] || pa[i] > hi[i] {
                    return None;
                }
            } else {
                let mut ta = (lo[i] - pa[i]) / d[i];
                let mut tb = (hi[i] - pa[i]) / d[i];
                if ta > tb {
                    std::mem::swap(&mut ta, &mut tb);
                }
                t0 = t0.max(ta);
                t1 = t1.min(tb);
                if t0 > t1 {
                    return None;
                }
            }
        }
        Some((t0, t1))
    }
}

/// Point-like sun with optional linear drift.
///
/// `azimuth` is the planar bearing of the sun measured in the same frame as
/// the vehicle heading (counter-clockwise from +x); `elevation` is measured
/// from the horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SunModel {
    pub position: Vec3,
    pub azimuth: f64,
    pub elevation: f64,
    #[serde(default)]
    pub drift: Vec3,
}

impl SunModel {
    /// Sun at `position`, with azimuth/elevation as seen from `reference`.
    pub fn from_position(position: Vec3, reference: Vec3) -> Self {
        let d = position - reference;
        SunModel {
            position,
            azimuth: d.bearing(),
            elevation: d.z.atan2(d.norm_xy()),
            drift: Vec3::ZERO,
        }
    }

    pub fn position_at(&self, t: f64) -> Vec3 {
        self.position + self.drift * t
    }

    /// Planar unit vector from `p` toward the sun's ground projection.
    pub fn ground_direction(&self, p: Vec3, t: f64) -> Vec3 {
        let d = (self.position_at(t) - p).with_z(0.0);
        let n = d.norm_xy();
        if n == 0.0 {
            Vec3::from_angle(self.azimuth)
        } else {
            d / n
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrivacyRegion {
    pub center: Vec3,
    /// Radius of the no-fly core (intensity 1).
    pub inner: f64,
    /// Radius beyond which the intensity vanishes.
    pub outer: f64,
    /// Positive scale applied to the intensity in the risk integral.
    #[serde(default = "unit_weight")]
    pub weight: f64,
}

fn unit_weight() -> f64 {
    1.0
}

impl PrivacyRegion {
    pub fn new(center: Vec3, inner: f64, outer: f64) -> Result<Self, EnvError> {
        let r = PrivacyRegion {
            center,
            inner,
            outer,
            weight: 1.0,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<(), EnvError> {
        if !(self.inner > 0.0 && self.inner < self.outer && self.outer.is_finite()) {
            return Err(EnvError::InvalidRegion(format!(
                "need 0 < inner < outer, got inner={} outer={}",
                self.inner, self.outer
            )));
        }
        if !(self.weight > 0.0 && self.weight.is_finite()) {
            return Err(EnvError::InvalidRegion(format!(
                "weight must be positive, got {}",
                self.weight
            )));
        }
        if !self.center.is_finite() {
            return Err(EnvError::InvalidRegion("center must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub bounds: Aabb,
    pub obstacles: Vec<Prism>,
    #[serde(default)]
    pub privacy_regions: Vec<PrivacyRegion>,
    pub sun: SunModel,
    pub altitude: (f64, f64),
    /// Clearance every free grid node keeps from prism surfaces.
    #[serde(default = "default_clearance")]
    pub clearance: f64,
}

pub const DEFAULT_CLEARANCE: f64 = 2.0;

fn default_clearance() -> f64 {
    DEFAULT_CLEARANCE
}

impl Environment {
    /// Obstacle-free world with the sun straight overhead.
    pub fn open(bounds: Aabb, altitude: (f64, f64)) -> Self {
        let c = bounds.min.lerp(bounds.max, 0.5);
        let sun_pos = c.with_z(bounds.max.z + 1000.0);
        Environment {
            bounds,
            obstacles: Vec::new(),
            privacy_regions: Vec::new(),
            sun: SunModel::from_position(sun_pos, c.with_z(bounds.min.z)),
            altitude,
            clearance: DEFAULT_CLEARANCE,
        }
    }

    pub fn validate(&self) -> Result<(), EnvError> {
        let (lo, hi) = (self.bounds.min, self.bounds.max);
        if !(lo.is_finite() && hi.is_finite() && lo.x < hi.x && lo.y < hi.y && lo.z < hi.z) {
            return Err(EnvError::InvalidBounds(format!("degenerate bounds {lo} .. {hi}")));
        }
        let (z_min, z_max) = self.altitude;
        if !(z_min < z_max) {
            return Err(EnvError::InvalidBounds(format!(
                "altitude band needs z_min < z_max, got ({z_min}, {z_max})"
            )));
        }
        if !(self.clearance >= 0.0) {
            return Err(EnvError::InvalidBounds(format!(
                "clearance must be non-negative, got {}",
                self.clearance
            )));
        }
        for (i, p) in self.obstacles.iter().enumerate() {
            p.validate()?;
            if !p.bounding_box().overlaps(&self.bounds) {
                return Err(EnvError::InvalidPrism(format!("prism {i} lies outside the bounds")));
            }
        }
        for r in &self.privacy_regions {
            r.validate()?;
        }
        let sun = &self.sun;
        if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&sun.elevation) {
            return Err(EnvError::InvalidSun(format!(
                "elevation {} outside [0, pi/2]",
                sun.elevation
            )));
        }
        if let Some(top) = self.obstacles.iter().map(Prism::top).reduce(f64::max) {
            if sun.position.z <= top {
                return Err(EnvError::InvalidSun(format!(
                    "sun height {} is not above the tallest obstacle top {top}",
                    sun.position.z
                )));
            }
        }
        Ok(())
    }

    pub fn in_bounds(&self, p: Vec3) -> bool {
        self.bounds.contains(p) && p.z >= self.altitude.0 && p.z <= self.altitude.1
    }

    /// Tallest obstacle top, or `-inf` for an empty world.
    pub fn roofline(&self) -> f64 {
        self.obstacles
            .iter()
            .map(Prism::top)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Outside the bounds/altitude band, or inside any prism.
pub fn is_collision(p: Vec3, env: &Environment) -> bool {
    !env.in_bounds(p) || env.obstacles.iter().any(|o| o.contains(p))
}

/// As [`is_collision`], with every prism grown by `margin`.
pub fn is_collision_with_margin(p: Vec3, env: &Environment, margin: f64) -> bool {
    !env.in_bounds(p) || env.obstacles.iter().any(|o| o.inflated(margin).contains(p))
}

/// Whether the closed segment `a -> b` touches any known prism.
pub fn segment_blocked(env: &Environment, a: Vec3, b: Vec3) -> bool {
    env.obstacles.iter().any(|o| o.intersects_segment(a, b))
}

/// Shadow test: the sun-to-vehicle segment crosses a known prism.
pub fn in_shadow(env: &Environment, p: Vec3, t: f64) -> bool {
    segment_blocked(env, env.sun.position_at(t), p)
}

/// Shadow test that also accounts for extra occluders (e.g. unknown obstacles).
pub fn in_shadow_with(env: &Environment, extra: &[Prism], p: Vec3, t: f64) -> bool {
    let sun = env.sun.position_at(t);
    segment_blocked(env, sun, p) || extra.iter().any(|o| o.intersects_segment(sun, p))
}
