//! Free-space lattice with 26-connected (8 in planar mode) motion primitives.

use crate::energy::{consumption_energy, incidence_cosine, EnergyModel, MotionSegment};
use crate::env::{in_shadow, is_collision_with_margin, EnvError, Environment, Prism};
use crate::geometry::Vec3;

/// Sample positions along an edge used for the harvest integral, with
/// trapezoid weights.
const EDGE_SAMPLES: [(f64, f64); 5] = [
    (0.0, 0.125),
    (0.25, 0.25),
    (0.5, 0.25),
    (0.75, 0.25),
    (1.0, 0.125),
];

/// Mean harvest power and shadow fraction along the straight move `a -> b`,
/// from the same five-sample trapezoid the grid uses.
pub fn mean_harvest(env: &Environment, model: &EnergyModel, a: Vec3, b: Vec3, epoch: f64) -> (f64, f64) {
    let cos = incidence_cosine(0.0, 0.0, env.sun.azimuth, env.sun.elevation);
    let mut power = 0.0;
    let mut shade = 0.0;
    for &(u, w) in &EDGE_SAMPLES {
        let p = a.lerp(b, u);
        let s = in_shadow(env, p, epoch);
        power += w * model.harvest_power(p.z, cos, s);
        if s {
            shade += w;
        }
    }
    (power, shade)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub to: usize,
    pub length: f64,
}

/// Energy and time attached to a directed edge.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EdgeCost {
    pub consumed: f64,
    pub harvested: f64,
    pub duration: f64,
    /// Time-weighted fraction of the edge spent in shadow.
    pub shadow_fraction: f64,
}

impl EdgeCost {
    pub fn net(&self) -> f64 {
        self.consumed - self.harvested
    }
}

#[derive(Debug, Clone)]
pub struct NavGrid {
    origin: Vec3,
    resolution: f64,
    dims: [usize; 3],
    planar: bool,
    free: Vec<bool>,
    offsets: Vec<usize>,
    edges: Vec<Edge>,
    costs: Vec<EdgeCost>,
    shadow: Vec<bool>,
    energy_rate: f64,
    max_speed: f64,
}

/// 3D lattice over the bounds and altitude band.
pub fn build_grid(env: &Environment, resolution: f64) -> Result<NavGrid, EnvError> {
    NavGrid::build(env, resolution, None)
}

/// Single-layer lattice at `altitude` with 8-connected moves.
pub fn build_planar_grid(env: &Environment, resolution: f64, altitude: f64) -> Result<NavGrid, EnvError> {
    NavGrid::build(env, resolution, Some(altitude))
}

fn axis_count(lo: f64, hi: f64, step: f64) -> usize {
    if hi < lo {
        0
    } else {
        ((hi - lo) / step + 1e-9).floor() as usize + 1
    }
}

impl NavGrid {
    fn build(env: &Environment, resolution: f64, planar: Option<f64>) -> Result<NavGrid, EnvError> {
        if !(resolution > 0.0 && resolution.is_finite()) {
            return Err(EnvError::InvalidResolution(resolution));
        }
        let b = env.bounds;
        let (z_lo, z_hi) = (env.altitude.0.max(b.min.z), env.altitude.1.min(b.max.z));
        let origin = Vec3::new(b.min.x, b.min.y, planar.unwrap_or(z_lo));
        let nz = match planar {
            Some(_) => 1,
            None => axis_count(z_lo, z_hi, resolution),
        };
        let dims = [
            axis_count(b.min.x, b.max.x, resolution),
            axis_count(b.min.y, b.max.y, resolution),
            nz,
        ];
        let n = dims[0] * dims[1] * dims[2];
        let inflated: Vec<Prism> = env.obstacles.iter().map(|o| o.inflated(env.clearance)).collect();
        let mut grid = NavGrid {
            origin,
            resolution,
            dims,
            planar: planar.is_some(),
            free: vec![false; n],
            offsets: Vec::with_capacity(n + 1),
            edges: Vec::new(),
            costs: Vec::new(),
            shadow: Vec::new(),
            energy_rate: 0.0,
            max_speed: f64::INFINITY,
        };
        for i in 0..n {
            grid.free[i] = !is_collision_with_margin(grid.position(i), env, env.clearance);
        }
        if !grid.free.iter().any(|&f| f) {
            return Err(EnvError::EmptyGrid);
        }
        let dirs = grid.directions();
        grid.offsets.push(0);
        for i in 0..n {
            if grid.free[i] {
                let p = grid.position(i);
                for d in &dirs {
                    let Some(j) = grid.offset_index(i, *d) else { continue };
                    if !grid.free[j] {
                        continue;
                    }
                    let q = grid.position(j);
                    if inflated.iter().any(|o| o.intersects_segment(p, q)) {
                        continue;
                    }
                    grid.edges.push(Edge {
                        to: j,
                        length: p.distance(q),
                    });
                }
            }
            grid.offsets.push(grid.edges.len());
        }
        Ok(grid)
    }

    fn directions(&self) -> Vec<[i64; 3]> {
        let zs: &[i64] = if self.planar { &[0] } else { &[-1, 0, 1] };
        let mut out = Vec::new();
        for &dz in zs {
            for dy in -1..=1 {
                for dx in -1..=1 {
                    if (dx, dy, dz) != (0, 0, 0) {
                        out.push([dx, dy, dz]);
                    }
                }
            }
        }
        out
    }

    fn offset_index(&self, i: usize, d: [i64; 3]) -> Option<usize> {
        let c = self.coords(i);
        let mut out = [0usize; 3];
        for k in 0..3 {
            let v = c[k] as i64 + d[k];
            if v < 0 || v >= self.dims[k] as i64 {
                return None;
            }
            out[k] = v as usize;
        }
        Some(self.index(out))
    }

    pub fn index(&self, c: [usize; 3]) -> usize {
        c[0] + self.dims[0] * (c[1] + self.dims[1] * c[2])
    }

    pub fn coords(&self, i: usize) -> [usize; 3] {
        let x = i % self.dims[0];
        let y = (i / self.dims[0]) % self.dims[1];
        let z = i / (self.dims[0] * self.dims[1]);
        [x, y, z]
    }

    pub fn position(&self, i: usize) -> Vec3 {
        let [x, y, z] = self.coords(i);
        self.origin + Vec3::new(x as f64, y as f64, z as f64) * self.resolution
    }

    pub fn node_count(&self) -> usize {
        self.free.len()
    }

    pub fn free_count(&self) -> usize {
        self.free.iter().filter(|&&f| f).count()
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn is_planar(&self) -> bool {
        self.planar
    }

    pub fn is_free(&self, i: usize) -> bool {
        self.free[i]
    }

    pub fn neighbors(&self, i: usize) -> &[Edge] {
        &self.edges[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Global edge id of the `k`-th outgoing edge of node `i`.
    pub fn edge_id(&self, i: usize, k: usize) -> usize {
        self.offsets[i] + k
    }

    pub fn edge(&self, id: usize) -> Edge {
        self.edges[id]
    }

    pub fn is_annotated(&self) -> bool {
        !self.costs.is_empty() || self.edges.is_empty()
    }

    /// Energy/time of edge `id`; zero costs before [`Self::annotate`].
    pub fn cost(&self, id: usize) -> EdgeCost {
        self.costs.get(id).copied().unwrap_or_default()
    }

    pub fn node_in_shadow(&self, i: usize) -> bool {
        self.shadow.get(i).copied().unwrap_or(false)
    }

    /// Nearest lattice node to `p`, if `p` lies within the lattice extent.
    pub fn nearest_node(&self, p: Vec3) -> Option<usize> {
        let rel = (p - self.origin) / self.resolution;
        let r = rel.to_array();
        let mut c = [0usize; 3];
        for k in 0..3 {
            let v = r[k].round();
            if !(v >= 0.0 && v < self.dims[k] as f64) {
                return None;
            }
            c[k] = v as usize;
        }
        Some(self.index(c))
    }

    /// Precomputes consumption, harvest and duration of every edge, with the
    /// sun at its position at time `epoch`.
    pub fn annotate(&mut self, env: &Environment, model: &EnergyModel, epoch: f64) {
        let shadow: Vec<bool> = (0..self.node_count())
            .map(|i| self.free[i] && in_shadow(env, self.position(i), epoch))
            .collect();
        let cos = incidence_cosine(0.0, 0.0, env.sun.azimuth, env.sun.elevation);
        let mut costs = Vec::with_capacity(self.edges.len());
        for i in 0..self.node_count() {
            for e in self.neighbors(i) {
                let (lo, hi) = if i < e.to { (i, e.to) } else { (e.to, i) };
                let (a, b) = (self.position(lo), self.position(hi));
                let mut power = 0.0;
                let mut shade = 0.0;
                for (k, &(u, w)) in EDGE_SAMPLES.iter().enumerate() {
                    let s = if k == 0 {
                        shadow[lo]
                    } else if k == EDGE_SAMPLES.len() - 1 {
                        shadow[hi]
                    } else {
                        in_shadow(env, a.lerp(b, u), epoch)
                    };
                    let z = a.z + (b.z - a.z) * u;
                    power += w * model.harvest_power(z, cos, s);
                    if s {
                        shade += w;
                    }
                }
                let seg = MotionSegment::between(self.position(i), self.position(e.to), &model.consumption);
                costs.push(EdgeCost {
                    consumed: consumption_energy(&seg, &model.consumption),
                    harvested: power * seg.duration(),
                    duration: seg.duration(),
                    shadow_fraction: shade,
                });
            }
        }
        self.costs = costs;
        self.shadow = shadow;
        self.energy_rate = self.energy_rate_bound(model, env.altitude);
        self.max_speed = self.max_primitive_speed(model);
    }

    /// Admissible per-metre net-energy rate used by the energy heuristic.
    pub fn energy_rate(&self) -> f64 {
        self.energy_rate
    }

    /// Speed bound used by the time heuristic.
    pub fn max_speed(&self) -> f64 {
        self.max_speed
    }

    /// Lower bound on net cost per metre for any edge, assuming the maximum
    /// harvest power throughout; floored at zero.
    pub fn energy_rate_bound(&self, model: &EnergyModel, altitude: (f64, f64)) -> f64 {
        let peak = model.max_harvest_power(altitude);
        let mut rate = f64::INFINITY;
        for d in self.directions() {
            let step = Vec3::new(d[0] as f64, d[1] as f64, d[2] as f64) * self.resolution;
            let seg = MotionSegment::between(Vec3::ZERO, step, &model.consumption);
            let net = consumption_energy(&seg, &model.consumption) - peak * seg.duration();
            rate = rate.min(net / seg.length());
        }
        rate.max(0.0)
    }

    /// Fastest straight-line speed over the motion primitives.
    pub fn max_primitive_speed(&self, model: &EnergyModel) -> f64 {
        self.directions()
            .into_iter()
            .map(|d| {
                let step = Vec3::new(d[0] as f64, d[1] as f64, d[2] as f64) * self.resolution;
                let seg = MotionSegment::between(Vec3::ZERO, step, &model.consumption);
                seg.length() / seg.duration()
            })
            .fold(0.0, f64::max)
    }
}
