//! Best-first searches over the navigation grid.
//!
//! The energy- and time-efficient planners carry the battery level in each
//! search label. A node may be expanded again when a later label reaches it
//! with strictly more stored energy; labels arrive in nondecreasing cost
//! order, so this keeps exactly the cost/energy Pareto front per node.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{Path, PlanError};
use crate::energy::BatteryState;
use crate::geometry::Vec3;
use crate::grid::{Edge, EdgeCost, NavGrid};

const NO_PARENT: usize = usize::MAX;

#[derive(Debug, Clone, Copy)]
struct Entry {
    f: f64,
    node: usize,
    label: usize,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    // Reversed: BinaryHeap is a max-heap.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| other.node.cmp(&self.node))
            .then_with(|| other.label.cmp(&self.label))
    }
}

#[derive(Debug, Clone, Copy)]
struct Label {
    node: usize,
    g: f64,
    energy: f64,
    parent: usize,
}

fn resolve(grid: &NavGrid, p: Vec3, which: &'static str) -> Result<usize, PlanError> {
    match grid.nearest_node(p) {
        Some(i) if grid.is_free(i) => Ok(i),
        _ => Err(PlanError::NodeInObstacle { which, position: p }),
    }
}

fn search<C, H>(
    grid: &NavGrid,
    start: Vec3,
    goal: Vec3,
    battery: Option<BatteryState>,
    edge_cost: C,
    heuristic: H,
) -> Result<Path, PlanError>
where
    C: Fn(&Edge, &EdgeCost) -> f64,
    H: Fn(Vec3) -> f64,
{
    let s = resolve(grid, start, "start")?;
    let t = resolve(grid, goal, "goal")?;
    let n = grid.node_count();
    // Unconstrained searches use a constant energy so the pop rule becomes a closed set.
    let mut best_energy = vec![f64::NEG_INFINITY; n];
    let mut best_g = vec![f64::INFINITY; n];
    let mut labels = vec![Label {
        node: s,
        g: 0.0,
        energy: battery.map_or(0.0, |b| b.energy),
        parent: NO_PARENT,
    }];
    let mut open = BinaryHeap::new();
    open.push(Entry {
        f: heuristic(grid.position(s)),
        node: s,
        label: 0,
    });
    best_g[s] = 0.0;
    while let Some(Entry { node, label, .. }) = open.pop() {
        let cur = labels[label];
        if cur.energy <= best_energy[node] {
            continue;
        }
        best_energy[node] = cur.energy;
        if node == t {
            let mut nodes = Vec::new();
            let mut k = label;
            while k != NO_PARENT {
                nodes.push(labels[k].node);
                k = labels[k].parent;
            }
            nodes.reverse();
            return Ok(Path::from_nodes(grid, nodes, battery));
        }
        for (k, e) in grid.neighbors(node).iter().enumerate() {
            let c = grid.cost(grid.edge_id(node, k));
            let energy = match battery {
                Some(b) => {
                    let here = BatteryState { energy: cur.energy, ..b };
                    match here.apply(c.consumed, c.harvested) {
                        Ok(u) => u.state.energy,
                        Err(_) => continue,
                    }
                }
                None => 0.0,
            };
            if energy <= best_energy[e.to] {
                continue;
            }
            let g = cur.g + edge_cost(e, &c);
            if battery.is_none() {
                if g >= best_g[e.to] {
                    continue;
                }
                best_g[e.to] = g;
            }
            labels.push(Label {
                node: e.to,
                g,
                energy,
                parent: label,
            });
            open.push(Entry {
                f: g + heuristic(grid.position(e.to)),
                node: e.to,
                label: labels.len() - 1,
            });
        }
    }
    Err(PlanError::NoPath)
}

fn require_costs(grid: &NavGrid) -> Result<(), PlanError> {
    if grid.is_annotated() {
        Ok(())
    } else {
        Err(PlanError::NotAnnotated)
    }
}

/// Minimises net energy expenditure (consumption minus harvest, each edge
/// floored at zero) while the battery never drops below its floor.
pub fn plan_energy_efficient(
    grid: &NavGrid,
    battery: BatteryState,
    start: Vec3,
    goal: Vec3,
) -> Result<Path, PlanError> {
    require_costs(grid)?;
    let rate = grid.energy_rate();
    let g = goal_position(grid, goal)?;
    search(
        grid,
        start,
        goal,
        Some(battery),
        |_, c| c.net().max(0.0),
        |p| rate * p.distance(g),
    )
}

/// Minimises flight time while the battery never drops below its floor.
pub fn plan_time_efficient(
    grid: &NavGrid,
    battery: BatteryState,
    start: Vec3,
    goal: Vec3,
) -> Result<Path, PlanError> {
    require_costs(grid)?;
    let speed = grid.max_speed();
    let g = goal_position(grid, goal)?;
    search(grid, start, goal, Some(battery), |_, c| c.duration, |p| p.distance(g) / speed)
}

/// Minimum Euclidean-length grid path; ignores energy.
pub fn plan_shortest(grid: &NavGrid, start: Vec3, goal: Vec3) -> Result<Path, PlanError> {
    let g = goal_position(grid, goal)?;
    search(grid, start, goal, None, |e, _| e.length, |p| p.distance(g))
}

fn goal_position(grid: &NavGrid, goal: Vec3) -> Result<Vec3, PlanError> {
    resolve(grid, goal, "goal").map(|i| grid.position(i))
}

/// Plain Dijkstra with a caller-supplied edge cost; the reference every
/// heuristic search is checked against.
pub fn dijkstra_oracle<C>(grid: &NavGrid, edge_cost: C, start: Vec3, goal: Vec3) -> Result<Path, PlanError>
where
    C: Fn(usize, &Edge, &EdgeCost) -> f64,
{
    let n = grid.node_count();
    let mut weights = Vec::with_capacity(grid.edge_count());
    for i in 0..n {
        for (k, e) in grid.neighbors(i).iter().enumerate() {
            let w = edge_cost(i, e, &grid.cost(grid.edge_id(i, k)));
            if !(w >= 0.0) {
                return Err(PlanError::NegativeEdgeCost {
                    from: i,
                    to: e.to,
                    cost: w,
                });
            }
            weights.push(w);
        }
    }
    let s = resolve(grid, start, "start")?;
    let t = resolve(grid, goal, "goal")?;
    let mut dist = vec![f64::INFINITY; n];
    let mut parent = vec![NO_PARENT; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[s] = 0.0;
    heap.push(Entry {
        f: 0.0,
        node: s,
        label: 0,
    });
    while let Some(Entry { f, node, .. }) = heap.pop() {
        if done[node] {
            continue;
        }
        done[node] = true;
        if node == t {
            break;
        }
        for (k, e) in grid.neighbors(node).iter().enumerate() {
            let d = f + weights[grid.edge_id(node, k)];
            if d < dist[e.to] {
                dist[e.to] = d;
                parent[e.to] = node;
                heap.push(Entry {
                    f: d,
                    node: e.to,
                    label: 0,
                });
            }
        }
    }
    if !done[t] {
        return Err(PlanError::NoPath);
    }
    let mut nodes = vec![t];
    while let Some(&last) = nodes.last() {
        if parent[last] == NO_PARENT {
            break;
        }
        nodes.push(parent[last]);
    }
    nodes.reverse();
    Ok(Path::from_nodes(grid, nodes, None))
}
