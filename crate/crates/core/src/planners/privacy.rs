//! Privacy-aware planning by backward dynamic programming over time layers.
//!
//! Layer `M` holds only the goal. A lattice point belongs to layer `i < M`
//! when one constant-heading move of duration `delta = horizon / M` reaches
//! a point of layer `i + 1` without leaving the admissible space. The value
//! of a point is the least accumulated privacy risk to the goal; the start
//! layer is the one where the start point has the lowest value.

use serde::{Deserialize, Serialize};

use super::PlanError;
use crate::env::{is_collision, Environment, PrivacyRegion};
use crate::geometry::Vec3;

/// Intensity of one region at `p`: 1 in the core, 0 beyond the outer shell,
/// linear in distance between.
pub fn privacy_intensity(p: Vec3, region: &PrivacyRegion) -> f64 {
    let d = p.distance(region.center);
    if d >= region.outer {
        0.0
    } else if d <= region.inner {
        1.0
    } else {
        (d - region.outer) / (region.inner - region.outer)
    }
}

/// Weighted sum of all region intensities at `p`.
pub fn total_intensity(p: Vec3, regions: &[PrivacyRegion]) -> f64 {
    regions.iter().map(|r| r.weight * privacy_intensity(p, r)).fold(0.0, |acc, x| acc + x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimedPoint {
    pub t: f64,
    pub position: Vec3,
}

/// Trapezoidal time integral of the summed intensities along `traj`.
pub fn total_privacy_risk(traj: &[TimedPoint], regions: &[PrivacyRegion]) -> f64 {
    traj.windows(2)
        .map(|w| {
            let dt = w[1].t - w[0].t;
            0.5 * dt * (total_intensity(w[0].position, regions) + total_intensity(w[1].position, regions))
        })
        .fold(0.0, |acc, x| acc + x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DpConfig {
    /// Number of time layers `M`.
    pub layers: usize,
    /// Time horizon `T_max`, s.
    pub horizon: f64,
    /// Flight speed, m/s; the lattice spacing is `max_speed * horizon / layers`.
    pub max_speed: f64,
    /// Trapezoid sub-intervals per move for the stage risk.
    #[serde(default = "default_substeps")]
    pub substeps: usize,
    /// Restrict moves to the start altitude.
    #[serde(default)]
    pub planar: bool,
}

fn default_substeps() -> usize {
    8
}

impl DpConfig {
    pub fn step_time(&self) -> f64 {
        self.horizon / self.layers as f64
    }

    pub fn spacing(&self) -> f64 {
        self.max_speed * self.step_time()
    }
}

/// Result of [`plan_privacy_dp`].
#[derive(Debug, Clone, PartialEq)]
pub struct DpPlan {
    /// Lattice point at the start of every layer from `start_layer` to `M`.
    pub waypoints: Vec<Vec3>,
    pub start_layer: usize,
    pub step_time: f64,
    /// `(M - start_layer) * step_time`.
    pub final_time: f64,
    /// Value of the start point: accumulated stage risk.
    pub risk: f64,
    pub substeps: usize,
}

impl DpPlan {
    /// Trajectory sampled at the stage-risk quadrature points.
    pub fn sampled(&self) -> Vec<TimedPoint> {
        let n = self.substeps.max(1);
        let mut out = vec![TimedPoint {
            t: 0.0,
            position: self.waypoints[0],
        }];
        for (k, w) in self.waypoints.windows(2).enumerate() {
            for s in 1..=n {
                let u = s as f64 / n as f64;
                out.push(TimedPoint {
                    t: (k as f64 + u) * self.step_time,
                    position: w[0].lerp(w[1], u),
                });
            }
        }
        out
    }

    pub fn length(&self) -> f64 {
        self.waypoints.windows(2).map(|w| w[0].distance(w[1])).fold(0.0, |acc, x| acc + x)
    }
}

/// The layered value table.
#[derive(Debug, Clone)]
pub struct DpLattice {
    config: DpConfig,
    origin: Vec3,
    dims: [usize; 3],
    moves: Vec<[i64; 3]>,
    valid: Vec<bool>,
    /// Stage risk per (node, move); `NaN` marks an inadmissible move.
    stage: Vec<f64>,
    /// Value and tie-break length per (layer, node); `inf` outside `S(i)`.
    value: Vec<f64>,
    length: Vec<f64>,
    choice: Vec<u8>,
    goal: usize,
}

impl DpLattice {
    /// Builds the lattice anchored at `goal` and runs the backward recursion.
    pub fn build(env: &Environment, goal: Vec3, config: &DpConfig) -> Result<DpLattice, PlanError> {
        if config.layers == 0 || !(config.horizon > 0.0) || !(config.max_speed > 0.0) || config.substeps == 0 {
            return Err(PlanError::InvalidInput(
                "need layers >= 1, positive horizon, speed and substeps".into(),
            ));
        }
        let h = config.spacing();
        let b = env.bounds;
        let lo = [
            b.min.x,
            b.min.y,
            if config.planar { goal.z } else { env.altitude.0.max(b.min.z) },
        ];
        let hi = [
            b.max.x,
            b.max.y,
            if config.planar { goal.z } else { env.altitude.1.min(b.max.z) },
        ];
        let g = goal.to_array();
        let mut first = [0i64; 3];
        let mut dims = [0usize; 3];
        for k in 0..3 {
            let a = ((lo[k] - g[k]) / h - 1e-9).ceil() as i64;
            let z = ((hi[k] - g[k]) / h + 1e-9).floor() as i64;
            if z < a {
                return Err(PlanError::InvalidInput("goal lies outside the admissible space".into()));
            }
            first[k] = a;
            dims[k] = (z - a + 1) as usize;
        }
        let origin = goal + Vec3::new(first[0] as f64, first[1] as f64, first[2] as f64) * h;
        let mut moves = Vec::new();
        let zs: &[i64] = if config.planar { &[0] } else { &[-1, 0, 1] };
        for &dz in zs {
            for dy in -1..=1 {
                for dx in -1..=1 {
                    moves.push([dx, dy, dz]);
                }
            }
        }
        let goal_idx = [-first[0] as usize, -first[1] as usize, -first[2] as usize];
        let mut lat = DpLattice {
            config: *config,
            origin,
            dims,
            moves,
            valid: Vec::new(),
            stage: Vec::new(),
            value: Vec::new(),
            length: Vec::new(),
            choice: Vec::new(),
            goal: 0,
        };
        lat.goal = lat.index(goal_idx);
        let n = lat.node_count();
        let regions = &env.privacy_regions;
        lat.valid = (0..n)
            .map(|i| {
                let p = lat.position(i);
                !is_collision(p, env) && regions.iter().all(|r| p.distance(r.center) > r.inner)
            })
            .collect();
        if !lat.valid[lat.goal] {
            return Err(PlanError::InvalidInput("goal violates a hard constraint".into()));
        }
        let m = lat.moves.len();
        let dt = config.step_time() / config.substeps as f64;
        lat.stage = vec![f64::NAN; n * m];
        for i in 0..n {
            if !lat.valid[i] {
                continue;
            }
            let p = lat.position(i);
            for k in 0..m {
                let Some(j) = lat.neighbor(i, k) else { continue };
                if !lat.valid[j] {
                    continue;
                }
                let q = lat.position(j);
                if j != i && !lat.move_admissible(env, p, q) {
                    continue;
                }
                let mut risk = 0.0;
                let mut prev = total_intensity(p, regions);
                for s in 1..=config.substeps {
                    let x = p.lerp(q, s as f64 / config.substeps as f64);
                    let f = total_intensity(x, regions);
                    risk += 0.5 * dt * (prev + f);
                    prev = f;
                }
                lat.stage[i * m + k] = risk;
            }
        }
        lat.recurse();
        Ok(lat)
    }

    fn move_admissible(&self, env: &Environment, p: Vec3, q: Vec3) -> bool {
        if crate::env::segment_blocked(env, p, q) {
            return false;
        }
        env.privacy_regions.iter().all(|r| segment_point_distance(p, q, r.center) > r.inner)
    }

    fn recurse(&mut self) {
        let n = self.node_count();
        let m = self.moves.len();
        let layers = self.config.layers;
        self.value = vec![f64::INFINITY; (layers + 1) * n];
        self.length = vec![f64::INFINITY; (layers + 1) * n];
        self.choice = vec![u8::MAX; (layers + 1) * n];
        self.value[layers * n + self.goal] = 0.0;
        self.length[layers * n + self.goal] = 0.0;
        let h = self.config.spacing();
        let move_len: Vec<f64> = self
            .moves
            .iter()
            .map(|d| Vec3::new(d[0] as f64, d[1] as f64, d[2] as f64).norm() * h)
            .collect();
        for layer in (0..layers).rev() {
            let (cur, next) = (layer * n, (layer + 1) * n);
            for i in 0..n {
                if !self.valid[i] {
                    continue;
                }
                let mut best = (f64::INFINITY, f64::INFINITY);
                let mut best_k = u8::MAX;
                #[allow(clippy::needless_range_loop)]
                for k in 0..m {
                    let stage = self.stage[i * m + k];
                    if stage.is_nan() {
                        continue;
                    }
                    let j = self.neighbor(i, k).expect("admissible moves stay on the lattice");
                    let v = self.value[next + j];
                    if v == f64::INFINITY {
                        continue;
                    }
                    let cand = (stage + v, move_len[k] + self.length[next + j]);
                    if cand.0 < best.0 || (cand.0 == best.0 && cand.1 < best.1) {
                        best = cand;
                        best_k = k as u8;
                    }
                }
                if best_k != u8::MAX {
                    self.value[cur + i] = best.0;
                    self.length[cur + i] = best.1;
                    self.choice[cur + i] = best_k;
                }
            }
        }
    }

    fn index(&self, c: [usize; 3]) -> usize {
        c[0] + self.dims[0] * (c[1] + self.dims[1] * c[2])
    }

    fn coords(&self, i: usize) -> [usize; 3] {
        [
            i % self.dims[0],
            (i / self.dims[0]) % self.dims[1],
            i / (self.dims[0] * self.dims[1]),
        ]
    }

    fn neighbor(&self, i: usize, k: usize) -> Option<usize> {
        let c = self.coords(i);
        let d = self.moves[k];
        let mut out = [0usize; 3];
        for a in 0..3 {
            let v = c[a] as i64 + d[a];
            if v < 0 || v >= self.dims[a] as i64 {
                return None;
            }
            out[a] = v as usize;
        }
        Some(self.index(out))
    }

    pub fn node_count(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn layers(&self) -> usize {
        self.config.layers
    }

    pub fn position(&self, i: usize) -> Vec3 {
        let [x, y, z] = self.coords(i);
        self.origin + Vec3::new(x as f64, y as f64, z as f64) * self.config.spacing()
    }

    /// Lattice node at `p`, if `p` coincides with one (to 1e-6 of the spacing).
    pub fn node_at(&self, p: Vec3) -> Option<usize> {
        let h = self.config.spacing();
        let r = ((p - self.origin) / h).to_array();
        let mut c = [0usize; 3];
        for k in 0..3 {
            let v = r[k].round();
            if (r[k] - v).abs() > 1e-6 || v < 0.0 || v >= self.dims[k] as f64 {
                return None;
            }
            c[k] = v as usize;
        }
        Some(self.index(c))
    }

    /// `V(layer, node)`; infinite when the node is not in the layer's set.
    pub fn value(&self, layer: usize, node: usize) -> f64 {
        self.value[layer * self.node_count() + node]
    }

    /// Admissible successors of `node` as `(next node, stage risk)`.
    pub fn successors(&self, node: usize) -> Vec<(usize, f64)> {
        let m = self.moves.len();
        (0..m)
            .filter_map(|k| {
                let s = self.stage[node * m + k];
                (!s.is_nan()).then(|| (self.neighbor(node, k).unwrap(), s))
            })
            .collect()
    }

    /// Largest deviation between a stored value and the minimum over its
    /// successors of stage risk plus successor value.
    pub fn audit(&self) -> f64 {
        let n = self.node_count();
        let mut worst: f64 = 0.0;
        for layer in 0..self.config.layers {
            for i in 0..n {
                let stored = self.value(layer, i);
                let recomputed = self
                    .successors(i)
                    .into_iter()
                    .map(|(j, s)| s + self.value(layer + 1, j))
                    .fold(f64::INFINITY, f64::min);
                if stored.is_infinite() && recomputed.is_infinite() {
                    continue;
                }
                worst = worst.max((stored - recomputed).abs());
            }
        }
        worst
    }

    /// Extracts the optimal trajectory from `start`.
    pub fn plan_from(&self, start: Vec3) -> Result<DpPlan, PlanError> {
        let s = self
            .node_at(start)
            .ok_or_else(|| PlanError::InvalidInput(format!("start {start} is not a lattice point")))?;
        let mut best: Option<(usize, f64, f64)> = None;
        for layer in 0..self.config.layers {
            let v = self.value(layer, s);
            if v.is_infinite() {
                continue;
            }
            let len = self.length[layer * self.node_count() + s];
            // Ties prefer the shorter path, then the later start (shorter flight).
            let better = match best {
                None => true,
                Some((_, bv, bl)) => v < bv || (v == bv && len <= bl),
            };
            if better {
                best = Some((layer, v, len));
            }
        }
        let (start_layer, risk, _) = best.ok_or(PlanError::Unreachable)?;
        let n = self.node_count();
        let mut waypoints = vec![self.position(s)];
        let mut node = s;
        for layer in start_layer..self.config.layers {
            let k = self.choice[layer * n + node] as usize;
            node = self.neighbor(node, k).expect("stored choices are admissible");
            waypoints.push(self.position(node));
        }
        let step = self.config.step_time();
        Ok(DpPlan {
            waypoints,
            start_layer,
            step_time: step,
            final_time: (self.config.layers - start_layer) as f64 * step,
            risk,
            substeps: self.config.substeps,
        })
    }
}

fn segment_point_distance(a: Vec3, b: Vec3, c: Vec3) -> f64 {
    let d = b - a;
    let len2 = d.dot(d);
    let t = if len2 == 0.0 { 0.0 } else { ((c - a).dot(d) / len2).clamp(0.0, 1.0) };
    a.lerp(b, t).distance(c)
}

/// Minimum-risk trajectory from `start` to `goal` within the horizon.
pub fn plan_privacy_dp(env: &Environment, start: Vec3, goal: Vec3, config: &DpConfig) -> Result<DpPlan, PlanError> {
    let lattice = DpLattice::build(env, goal, config)?;
    lattice.plan_from(start)
}
