//! Discrete (viewpoint graph) and continuous (free-space) environments.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use serde::{Deserialize, Serialize};

use super::{Pose, SimError};
use crate::detection::SceneObject;
use crate::geometry::{normalize_degrees, Position};
use crate::omnigraph::ViewpointId;

/// Slack allowed when checking continuous moves against the step length.
const MOVE_TOLERANCE_M: f64 = 1e-6;
/// Sampling interval for segment collision checks.
const COLLISION_SAMPLE_M: f64 = 0.02;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneViewpoint {
    pub id: ViewpointId,
    pub position: Position,
}

/// Viewpoints with positions plus an undirected adjacency list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscreteScene {
    pub scene_id: String,
    pub viewpoints: Vec<SceneViewpoint>,
    pub adjacency: BTreeMap<ViewpointId, Vec<ViewpointId>>,
    #[serde(default)]
    pub objects: Vec<SceneObject>,
}

impl DiscreteScene {
    /// Checks ids and adjacency, then makes the adjacency symmetric, sorted
    /// and duplicate free.
    pub fn normalized(mut self) -> Result<Self, SimError> {
        let mut ids = BTreeSet::new();
        for vp in &self.viewpoints {
            if !ids.insert(vp.id.clone()) {
                return Err(SimError::InvalidScene(format!("duplicate viewpoint '{}'", vp.id)));
            }
            if !vp.position.is_finite() {
                return Err(SimError::InvalidScene(format!("viewpoint '{}' has a non-finite position", vp.id)));
            }
        }
        let mut adj: BTreeMap<ViewpointId, BTreeSet<ViewpointId>> =
            ids.iter().map(|id| (id.clone(), BTreeSet::new())).collect();
        for (a, list) in &self.adjacency {
            for b in list {
                if !ids.contains(a) || !ids.contains(b) {
                    return Err(SimError::InvalidScene(format!("edge {a} - {b} names an unknown viewpoint")));
                }
                if a == b {
                    return Err(SimError::InvalidScene(format!("self loop at '{a}'")));
                }
                adj.get_mut(a).expect("known").insert(b.clone());
                adj.get_mut(b).expect("known").insert(a.clone());
            }
        }
        for o in &self.objects {
            o.validate()?;
        }
        self.adjacency = adj.into_iter().map(|(k, v)| (k, v.into_iter().collect())).collect();
        Ok(self)
    }

    pub fn position(&self, id: &ViewpointId) -> Option<Position> {
        self.viewpoints.iter().find(|v| &v.id == id).map(|v| v.position)
    }

    pub fn neighbours(&self, id: &ViewpointId) -> &[ViewpointId] {
        self.adjacency.get(id).map(Vec::as_slice).unwrap_or(&[])
    }

    fn require(&self, id: &ViewpointId) -> Result<Position, SimError> {
        self.position(id).ok_or_else(|| SimError::PoseNotInScene(format!("unknown viewpoint '{id}'")))
    }

    /// Dijkstra over Euclidean edge lengths. Among equal-length paths the
    /// lexicographically smallest id sequence wins, which keeps results
    /// independent of adjacency order.
    pub fn shortest_path(&self, from: &ViewpointId, to: &ViewpointId) -> Result<Vec<ViewpointId>, SimError> {
        self.require(from)?;
        self.require(to)?;
        let pos: BTreeMap<&ViewpointId, Position> = self.viewpoints.iter().map(|v| (&v.id, v.position)).collect();
        let mut best: BTreeMap<&ViewpointId, (f64, Vec<&ViewpointId>)> = BTreeMap::new();
        let mut heap = BinaryHeap::new();
        best.insert(from, (0.0, vec![from]));
        heap.push(Frontier { cost: 0.0, path: vec![from] });
        while let Some(Frontier { cost, path }) = heap.pop() {
            let u = *path.last().expect("non-empty");
            if best.get(u).is_some_and(|(c, p)| *c < cost || (*c == cost && *p < path)) {
                continue;
            }
            if u == to {
                return Ok(path.into_iter().cloned().collect());
            }
            for v in self.neighbours(u) {
                let c = cost + pos[u].distance(&pos[v]);
                let mut p = path.clone();
                p.push(v);
                let better = match best.get(v) {
                    None => true,
                    Some((bc, bp)) => c < *bc - 1e-12 || ((c - *bc).abs() <= 1e-12 && p < *bp),
                };
                if better {
                    best.insert(v, (c, p.clone()));
                    heap.push(Frontier { cost: c, path: p });
                }
            }
        }
        Err(SimError::NoPath(format!("{from} -> {to}")))
    }

    /// Whether any viewpoint has more than two neighbours.
    pub fn has_branching(&self) -> bool {
        self.adjacency.values().any(|n| n.len() > 2)
    }
}

struct Frontier<'a> {
    cost: f64,
    path: Vec<&'a ViewpointId>,
}

impl PartialEq for Frontier<'_> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Frontier<'_> {}
impl PartialOrd for Frontier<'_> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Frontier<'_> {
    // min-heap on (cost, path)
    fn cmp(&self, other: &Self) -> Ordering {
        other.cost.total_cmp(&self.cost).then_with(|| other.path.cmp(&self.path))
    }
}

/// Axis-aligned rectangle, `min` ≤ `max` componentwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Self { min: [x0.min(x1), y0.min(y1)], max: [x0.max(x1), y0.max(y1)] }
    }

    pub fn contains(&self, p: &Position) -> bool {
        p.x >= self.min[0] && p.x <= self.max[0] && p.y >= self.min[1] && p.y <= self.max[1]
    }
}

fn default_step() -> f64 {
    0.25
}
fn default_turn() -> f64 {
    30.0
}

/// Rectangular free space with box obstacles. The agent moves in straight
/// steps of `step_m` along headings that are multiples of `turn_deg`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContinuousScene {
    pub scene_id: String,
    pub bounds: Rect,
    #[serde(default)]
    pub obstacles: Vec<Rect>,
    #[serde(default)]
    pub objects: Vec<SceneObject>,
    #[serde(default = "default_step")]
    pub step_m: f64,
    #[serde(default = "default_turn")]
    pub turn_deg: f64,
}

impl ContinuousScene {
    pub fn validated(self) -> Result<Self, SimError> {
        if !(self.step_m > 0.0 && self.step_m.is_finite()) {
            return Err(SimError::InvalidScene(format!("step_m must be positive, got {}", self.step_m)));
        }
        let turns = 360.0 / self.turn_deg;
        if !self.turn_deg.is_finite() || self.turn_deg <= 0.0 || (turns - turns.round()).abs() > 1e-9 {
            return Err(SimError::InvalidScene(format!("turn_deg must divide 360, got {}", self.turn_deg)));
        }
        for o in &self.objects {
            o.validate()?;
        }
        Ok(self)
    }

    pub fn is_free(&self, p: &Position) -> bool {
        self.bounds.contains(p) && !self.obstacles.iter().any(|o| o.contains(p))
    }

    pub fn segment_free(&self, a: &Position, b: &Position) -> bool {
        let n = (a.distance(b) / COLLISION_SAMPLE_M).ceil().max(1.0) as usize;
        (0..=n).all(|i| {
            let t = i as f64 / n as f64;
            self.is_free(&Position::new(a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t))
        })
    }

    /// Candidate moves from `p`, in heading order starting north.
    pub fn moves(&self, p: &Position) -> Vec<Position> {
        let turns = (360.0 / self.turn_deg).round() as usize;
        (0..turns).map(|k| p.step(k as f64 * self.turn_deg, self.step_m)).filter(|q| self.segment_free(p, q)).collect()
    }

    pub fn is_valid_move(&self, a: &Position, b: &Position) -> bool {
        a.distance(b) <= self.step_m + MOVE_TOLERANCE_M && self.segment_free(a, b)
    }

    /// Collision-free path as a sequence of points no more than `step_m`
    /// apart, both ends included. Straight when the segment is free,
    /// otherwise routed through an 8-connected grid of pitch `step_m`.
    pub fn shortest_path(&self, from: &Position, to: &Position) -> Result<Vec<Position>, SimError> {
        for p in [from, to] {
            if !self.is_free(p) {
                return Err(SimError::PoseNotInScene(format!("({}, {}) is not free space", p.x, p.y)));
            }
        }
        if self.segment_free(from, to) {
            return Ok(densify(&[*from, *to], self.step_m));
        }
        let corners = self.grid_route(from, to)?;
        Ok(densify(&corners, self.step_m))
    }

    fn grid_route(&self, from: &Position, to: &Position) -> Result<Vec<Position>, SimError> {
        let s = self.step_m;
        let nx = ((self.bounds.max[0] - self.bounds.min[0]) / s).floor() as usize + 1;
        let ny = ((self.bounds.max[1] - self.bounds.min[1]) / s).floor() as usize + 1;
        let cell =
            |i: usize, j: usize| Position::new(self.bounds.min[0] + i as f64 * s, self.bounds.min[1] + j as f64 * s);
        let n = nx * ny;
        // node n = from, n + 1 = to
        let point = |k: usize| -> Position {
            if k == n {
                *from
            } else if k == n + 1 {
                *to
            } else {
                cell(k % nx, k / nx)
            }
        };
        let free: Vec<bool> = (0..n).map(|k| self.is_free(&point(k))).collect();
        let near = |p: &Position| -> Vec<usize> {
            let ci = ((p.x - self.bounds.min[0]) / s).round() as i64;
            let cj = ((p.y - self.bounds.min[1]) / s).round() as i64;
            let mut out = Vec::new();
            for dj in -2..=2 {
                for di in -2..=2 {
                    let (i, j) = (ci + di, cj + dj);
                    if i < 0 || j < 0 || i as usize >= nx || j as usize >= ny {
                        continue;
                    }
                    let k = j as usize * nx + i as usize;
                    if free[k] && self.segment_free(p, &point(k)) {
                        out.push(k);
                    }
                }
            }
            out
        };
        let from_links = near(from);
        let to_links: BTreeSet<usize> = near(to).into_iter().collect();

        let mut dist = vec![f64::INFINITY; n + 2];
        let mut prev = vec![usize::MAX; n + 2];
        let mut heap = BinaryHeap::new();
        dist[n] = 0.0;
        heap.push(GridEntry(0.0, n));
        while let Some(GridEntry(d, u)) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            if u == n + 1 {
                break;
            }
            let mut next: Vec<usize> = Vec::new();
            if u == n {
                next.extend(&from_links);
            } else {
                let (i, j) = ((u % nx) as i64, (u / nx) as i64);
                for (di, dj) in [(-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)] {
                    let (a, b) = (i + di, j + dj);
                    if a < 0 || b < 0 || a as usize >= nx || b as usize >= ny {
                        continue;
                    }
                    let k = b as usize * nx + a as usize;
                    if free[k] && self.segment_free(&point(u), &point(k)) {
                        next.push(k);
                    }
                }
                if to_links.contains(&u) {
                    next.push(n + 1);
                }
            }
            let pu = point(u);
            for v in next {
                let nd = d + pu.distance(&point(v));
                if nd < dist[v] - 1e-12 {
                    dist[v] = nd;
                    prev[v] = u;
                    heap.push(GridEntry(nd, v));
                }
            }
        }
        if !dist[n + 1].is_finite() {
            return Err(SimError::NoPath(format!("({}, {}) -> ({}, {})", from.x, from.y, to.x, to.y)));
        }
        let mut route = vec![*to];
        let mut k = prev[n + 1];
        while k != n {
            route.push(point(k));
            k = prev[k];
        }
        route.push(*from);
        route.reverse();
        Ok(route)
    }
}

#[derive(PartialEq)]
struct GridEntry(f64, usize);
impl Eq for GridEntry {}
impl PartialOrd for GridEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for GridEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

/// Insert evenly spaced points so consecutive points are at most `step` apart.
pub fn densify(corners: &[Position], step: f64) -> Vec<Position> {
    let mut out = Vec::new();
    if let Some(first) = corners.first() {
        out.push(*first);
    }
    for w in corners.windows(2) {
        let (a, b) = (w[0], w[1]);
        let n = (a.distance(&b) / step - 1e-9).ceil().max(1.0) as usize;
        if a.distance(&b) == 0.0 {
            continue;
        }
        for i in 1..=n {
            let t = i as f64 / n as f64;
            out.push(if i == n { b } else { Position::new(a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t) });
        }
    }
    out
}

/// Either kind of scene, as stored on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Environment {
    Discrete(DiscreteScene),
    Continuous(ContinuousScene),
}

impl Environment {
    pub fn from_json(bytes: &[u8]) -> Result<Self, SimError> {
        let env: Environment = serde_json::from_slice(bytes).map_err(|e| SimError::InvalidScene(e.to_string()))?;
        env.validated()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("scenes serialize");
        s.push('\n');
        s
    }

    pub fn validated(self) -> Result<Self, SimError> {
        Ok(match self {
            Environment::Discrete(s) => Environment::Discrete(s.normalized()?),
            Environment::Continuous(s) => Environment::Continuous(s.validated()?),
        })
    }

    pub fn scene_id(&self) -> &str {
        match self {
            Environment::Discrete(s) => &s.scene_id,
            Environment::Continuous(s) => &s.scene_id,
        }
    }

    pub fn objects(&self) -> &[SceneObject] {
        match self {
            Environment::Discrete(s) => &s.objects,
            Environment::Continuous(s) => &s.objects,
        }
    }

    pub fn is_continuous(&self) -> bool {
        matches!(self, Environment::Continuous(_))
    }

    pub fn position_of(&self, pose: &Pose) -> Result<Position, SimError> {
        match (self, pose) {
            (Environment::Discrete(s), Pose::Viewpoint(id)) => s.require(id),
            (Environment::Continuous(s), Pose::Point(p)) if s.is_free(p) => Ok(*p),
            (Environment::Continuous(_), Pose::Point(p)) => {
                Err(SimError::PoseNotInScene(format!("({}, {}) is not free space", p.x, p.y)))
            }
            (Environment::Discrete(_), Pose::Point(_)) => {
                Err(SimError::PoseNotInScene("coordinate pose in a discrete scene".into()))
            }
            (Environment::Continuous(_), Pose::Viewpoint(_)) => {
                Err(SimError::PoseNotInScene("viewpoint pose in a continuous scene".into()))
            }
        }
    }

    /// Poses reachable in one move.
    pub fn neighbours(&self, pose: &Pose) -> Result<Vec<Pose>, SimError> {
        self.position_of(pose)?;
        Ok(match (self, pose) {
            (Environment::Discrete(s), Pose::Viewpoint(id)) => {
                s.neighbours(id).iter().cloned().map(Pose::Viewpoint).collect()
            }
            (Environment::Continuous(s), Pose::Point(p)) => s.moves(p).into_iter().map(Pose::Point).collect(),
            _ => unreachable!("checked by position_of"),
        })
    }

    pub fn is_valid_move(&self, from: &Pose, to: &Pose) -> bool {
        match (self, from, to) {
            (Environment::Discrete(s), Pose::Viewpoint(a), Pose::Viewpoint(b)) => s.neighbours(a).contains(b),
            (Environment::Continuous(s), Pose::Point(a), Pose::Point(b)) => s.is_free(a) && s.is_valid_move(a, b),
            _ => false,
        }
    }

    /// Shortest path, both ends included.
    pub fn shortest_path(&self, from: &Pose, to: &Pose) -> Result<Vec<Pose>, SimError> {
        self.position_of(from)?;
        self.position_of(to)?;
        match (self, from, to) {
            (Environment::Discrete(s), Pose::Viewpoint(a), Pose::Viewpoint(b)) => {
                Ok(s.shortest_path(a, b)?.into_iter().map(Pose::Viewpoint).collect())
            }
            (Environment::Continuous(s), Pose::Point(a), Pose::Point(b)) => {
                Ok(s.shortest_path(a, b)?.into_iter().map(Pose::Point).collect())
            }
            _ => unreachable!("checked by position_of"),
        }
    }

    pub fn shortest_distance(&self, from: &Pose, to: &Pose) -> Result<f64, SimError> {
        let path = self.shortest_path(from, to)?;
        let pts: Result<Vec<_>, _> = path.iter().map(|p| self.position_of(p)).collect();
        Ok(crate::geometry::path_length(&pts?))
    }

    /// Heading of a move, for orienting the panorama.
    pub fn heading_between(&self, from: &Pose, to: &Pose) -> Option<f64> {
        let a = self.position_of(from).ok()?;
        let b = self.position_of(to).ok()?;
        (a.distance(&b) > 0.0).then(|| normalize_degrees(a.bearing_to(&b)))
    }
}
