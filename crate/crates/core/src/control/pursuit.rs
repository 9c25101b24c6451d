use super::{ControlLimits, UavState};
use crate::geometry::{wrap_angle, Vec3};

/// Arc-length parametrised polyline with a monotone progress marker.
#[derive(Debug, Clone, PartialEq)]
pub struct PathTracker {
    points: Vec<Vec3>,
    cum: Vec<f64>,
    progress: f64,
}

impl PathTracker {
    /// Panics on an empty waypoint list.
    pub fn new(points: &[Vec3]) -> Self {
        assert!(!points.is_empty(), "path must have at least one waypoint");
        let mut cum = Vec::with_capacity(points.len());
        let mut acc = 0.0;
        cum.push(0.0);
        for w in points.windows(2) {
            acc += w[0].distance(w[1]);
            cum.push(acc);
        }
        PathTracker {
            points: points.to_vec(),
            cum,
            progress: 0.0,
        }
    }

    pub fn length(&self) -> f64 {
        *self.cum.last().unwrap()
    }

    pub fn progress(&self) -> f64 {
        self.progress
    }

    pub fn waypoints(&self) -> &[Vec3] {
        &self.points
    }

    /// Point at arc length `s`, saturating at both ends.
    pub fn point_at(&self, s: f64) -> Vec3 {
        if s <= 0.0 {
            return self.points[0];
        }
        if s >= self.length() {
            return *self.points.last().unwrap();
        }
        let k = self.cum.partition_point(|&c| c <= s) - 1;
        let seg = self.cum[k + 1] - self.cum[k];
        if seg == 0.0 {
            return self.points[k];
        }
        self.points[k].lerp(self.points[k + 1], (s - self.cum[k]) / seg)
    }

    /// Arc length of the point of the path closest to `p` among arc lengths
    /// in `[from, until]`; the earliest one on ties.
    pub fn closest_arc(&self, p: Vec3, from: f64, until: f64) -> f64 {
        let mut best = (self.point_at(from).distance(p), from);
        for k in 0..self.points.len().saturating_sub(1) {
            let (s0, s1) = (self.cum[k], self.cum[k + 1]);
            if s1 <= from || s1 == s0 || s0 > until {
                continue;
            }
            let (a, b) = (self.points[k], self.points[k + 1]);
            let d = b - a;
            let t = ((p - a).dot(d) / d.dot(d)).clamp(0.0, 1.0);
            let s = (s0 + t * (s1 - s0)).clamp(from, until.max(from));
            let dist = self.point_at(s).distance(p);
            if dist < best.0 {
                best = (dist, s);
            }
        }
        best.1
    }

    /// Moves the progress marker to the closest point ahead of it, looking
    /// no further than the current offset plus `window` along the path.
    pub fn update(&mut self, p: Vec3, window: f64) -> f64 {
        let reach = self.progress + self.point_at(self.progress).distance(p) + window;
        self.progress = self.closest_arc(p, self.progress, reach);
        self.progress
    }

    /// Virtual target `lookahead` metres beyond the progress marker.
    pub fn target(&self, lookahead: f64) -> Vec3 {
        self.point_at(self.progress + lookahead)
    }

    pub fn remaining(&self) -> f64 {
        self.length() - self.progress
    }
}

/// Virtual target at arc distance `lookahead` beyond the point of the path
/// closest to `p`; the final waypoint when less remains.
pub fn pursuit_lookahead(path: &[Vec3], p: Vec3, lookahead: f64) -> Vec3 {
    let tracker = PathTracker::new(path);
    tracker.point_at(tracker.closest_arc(p, 0.0, f64::INFINITY) + lookahead)
}

/// Distance from `p` to the polyline.
pub fn cross_track_error(path: &[Vec3], p: Vec3) -> f64 {
    let tracker = PathTracker::new(path);
    tracker.point_at(tracker.closest_arc(p, 0.0, f64::INFINITY)).distance(p)
}

/// Pure-pursuit speed and turn rate toward `target`.
pub fn pursuit_command(s: &UavState, target: Vec3, lookahead: f64, limits: &ControlLimits) -> (f64, f64) {
    let alpha = wrap_angle((target - s.position).bearing() - s.heading);
    let v = limits.cruise;
    let curvature = 2.0 * alpha.sin() / lookahead;
    (v, limits.clamp_turn(v * curvature))
}
