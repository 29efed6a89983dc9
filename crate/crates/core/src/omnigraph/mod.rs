//! The omnigraph: an undirected graph of visited viewpoints, each carrying a
//! table of the best keyword detection seen there so far.
//!
//! Mutations take `&mut self`, reads take `&self`, so the borrow checker
//! enforces the single-writer / many-reader contract. The type is `Send + Sync`.

mod codec;
mod dot;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::detection::Detection;
use crate::geometry::Position;

pub use codec::ParseErrorKind;
pub use dot::DOT_KEYWORDS_PER_NODE;

/// Tolerance used when checking a re-added viewpoint's position.
pub const POSITION_TOLERANCE_M: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("viewpoint id must be non-empty")]
    EmptyViewpointId,
    #[error("viewpoint '{0}' re-added with a different position")]
    PositionConflict(ViewpointId),
    #[error("unknown viewpoint '{0}'")]
    UnknownViewpoint(ViewpointId),
    #[error("invalid detection: {0}")]
    InvalidDetection(String),
    #[error("viewpoint '{0}' has no position")]
    MissingPosition(ViewpointId),
    #[error("self-loop on '{0}'")]
    SelfLoop(ViewpointId),
    #[error("parse error at byte {offset}: {message}")]
    ParseError { offset: usize, message: String, kind: ParseErrorKind },
    #[error("invalid graph document: {0}")]
    InvalidGraph(String),
}

impl GraphError {
    /// Stable error name, for hosts that map errors to string codes.
    pub fn code(&self) -> &'static str {
        match self {
            GraphError::EmptyViewpointId => "EmptyViewpointId",
            GraphError::PositionConflict(_) => "PositionConflict",
            GraphError::UnknownViewpoint(_) => "UnknownViewpoint",
            GraphError::InvalidDetection(_) => "InvalidDetection",
            GraphError::MissingPosition(_) => "MissingPosition",
            GraphError::SelfLoop(_) => "SelfLoop",
            GraphError::ParseError { .. } => "ParseError",
            GraphError::InvalidGraph(_) => "InvalidGraph",
        }
    }
}

/// Opaque, non-empty viewpoint identifier.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ViewpointId(String);

impl ViewpointId {
    pub fn new(id: impl Into<String>) -> Result<Self, GraphError> {
        let id = id.into();
        if id.is_empty() {
            return Err(GraphError::EmptyViewpointId);
        }
        Ok(Self(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for ViewpointId {
    type Error = GraphError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        ViewpointId::new(s)
    }
}

impl From<ViewpointId> for String {
    fn from(id: ViewpointId) -> Self {
        id.0
    }
}

impl fmt::Display for ViewpointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Shorthand for tests and examples. Panics on an empty id.
pub fn vp_id(s: &str) -> ViewpointId {
    ViewpointId::new(s).expect("non-empty viewpoint id")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Viewpoint {
    pub id: ViewpointId,
    pub position: Option<Position>,
    detections: BTreeMap<String, Detection>,
}

impl Viewpoint {
    pub fn new(id: ViewpointId, position: Option<Position>) -> Self {
        Self { id, position, detections: BTreeMap::new() }
    }

    pub fn at(id: ViewpointId, position: Position) -> Self {
        Self::new(id, Some(position))
    }

    /// Keyword table, keyed by detection label.
    pub fn detections(&self) -> &BTreeMap<String, Detection> {
        &self.detections
    }

    pub fn detection(&self, label: &str) -> Option<&Detection> {
        self.detections.get(label)
    }

    /// Union-merge `dets` into the keyword table. Per label the more
    /// confident detection wins; on an exact tie the newer one replaces the
    /// stored one. The batch is validated up front, so on error nothing changes.
    pub fn update_keywords(&mut self, dets: &[Detection]) -> Result<(), GraphError> {
        validate_all(dets)?;
        for d in dets {
            match self.detections.get(&d.label) {
                Some(old) if old.confidence > d.confidence => {}
                _ => {
                    self.detections.insert(d.label.clone(), d.clone());
                }
            }
        }
        Ok(())
    }

    pub fn with_detections(mut self, dets: &[Detection]) -> Result<Self, GraphError> {
        self.update_keywords(dets)?;
        Ok(self)
    }

    fn same_place(&self, other: &Viewpoint) -> bool {
        match (&self.position, &other.position) {
            (None, None) => true,
            (Some(a), Some(b)) => a.approx_eq(b, POSITION_TOLERANCE_M),
            _ => false,
        }
    }
}

fn validate_all(dets: &[Detection]) -> Result<(), GraphError> {
    for d in dets {
        d.validate().map_err(|e| GraphError::InvalidDetection(e.to_string()))?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Omnigraph {
    scene_id: String,
    nodes: BTreeMap<ViewpointId, Viewpoint>,
    edges: BTreeSet<(ViewpointId, ViewpointId)>,
    adjacency: BTreeMap<ViewpointId, BTreeSet<ViewpointId>>,
}

impl Omnigraph {
    pub fn new(scene_id: impl Into<String>) -> Self {
        Self { scene_id: scene_id.into(), ..Default::default() }
    }

    pub fn scene_id(&self) -> &str {
        &self.scene_id
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, id: &ViewpointId) -> bool {
        self.nodes.contains_key(id)
    }

    pub fn node(&self, id: &ViewpointId) -> Option<&Viewpoint> {
        self.nodes.get(id)
    }

    /// Nodes in id order.
    pub fn nodes(&self) -> impl Iterator<Item = &Viewpoint> {
        self.nodes.values()
    }

    /// Canonical edges (smaller id first) in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = &(ViewpointId, ViewpointId)> {
        self.edges.iter()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, a: &ViewpointId, b: &ViewpointId) -> bool {
        self.edges.contains(&canonical(a, b))
    }

    /// Adjacent viewpoints in id order.
    pub fn neighbours(&self, id: &ViewpointId) -> impl Iterator<Item = &ViewpointId> {
        self.adjacency.get(id).into_iter().flatten()
    }

    /// Insert `vp` if its id is new. Re-adding an id is a no-op when the
    /// position matches, and a [`GraphError::PositionConflict`] otherwise.
    pub fn add_viewpoint(&mut self, vp: Viewpoint) -> Result<(), GraphError> {
        if let Some(existing) = self.nodes.get(&vp.id) {
            if existing.same_place(&vp) {
                return Ok(());
            }
            return Err(GraphError::PositionConflict(vp.id));
        }
        validate_all(&vp.detections.values().cloned().collect::<Vec<_>>())?;
        self.adjacency.entry(vp.id.clone()).or_default();
        self.nodes.insert(vp.id.clone(), vp);
        Ok(())
    }

    /// Add the undirected edge `{a, b}`; both endpoints must exist.
    pub fn connect(&mut self, a: &ViewpointId, b: &ViewpointId) -> Result<(), GraphError> {
        if a == b {
            return Err(GraphError::SelfLoop(a.clone()));
        }
        for id in [a, b] {
            if !self.nodes.contains_key(id) {
                return Err(GraphError::UnknownViewpoint(id.clone()));
            }
        }
        self.edges.insert(canonical(a, b));
        self.adjacency.get_mut(a).expect("node present").insert(b.clone());
        self.adjacency.get_mut(b).expect("node present").insert(a.clone());
        Ok(())
    }

    /// The agent arrived at `curr`, coming from `prev` (or starting there).
    ///
    /// Adds `curr` if unseen, adds the edge `{prev, curr}` when `prev` is a
    /// different viewpoint, and merges `dets` into `curr`'s keyword table.
    /// All checks run before any mutation.
    pub fn record_arrival(
        &mut self,
        prev: Option<&ViewpointId>,
        curr: Viewpoint,
        dets: &[Detection],
    ) -> Result<(), GraphError> {
        if let Some(p) = prev {
            if !self.nodes.contains_key(p) {
                return Err(GraphError::UnknownViewpoint(p.clone()));
            }
        }
        validate_all(dets)?;
        if let Some(existing) = self.nodes.get(&curr.id) {
            if !existing.same_place(&curr) {
                return Err(GraphError::PositionConflict(curr.id));
            }
        }
        let id = curr.id.clone();
        self.add_viewpoint(curr)?;
        if let Some(p) = prev {
            if *p != id {
                self.connect(p, &id)?;
            }
        }
        self.nodes.get_mut(&id).expect("just added").update_keywords(dets)
    }

    /// Merge detections into an existing viewpoint's table.
    pub fn update_keywords(&mut self, id: &ViewpointId, dets: &[Detection]) -> Result<(), GraphError> {
        self.nodes.get_mut(id).ok_or_else(|| GraphError::UnknownViewpoint(id.clone()))?.update_keywords(dets)
    }

    /// Breadth-first hop distances from `origin`, limited to `max_hops`.
    /// Sorted by hop count, then id. The origin is included at distance 0.
    pub fn neighbours_within_hops(
        &self,
        origin: &ViewpointId,
        max_hops: usize,
    ) -> Result<Vec<(ViewpointId, usize)>, GraphError> {
        if !self.nodes.contains_key(origin) {
            return Err(GraphError::UnknownViewpoint(origin.clone()));
        }
        let mut dist: BTreeMap<&ViewpointId, usize> = BTreeMap::new();
        let mut queue = VecDeque::new();
        dist.insert(origin, 0);
        queue.push_back(origin);
        while let Some(u) = queue.pop_front() {
            let du = dist[u];
            if du == max_hops {
                continue;
            }
            for v in self.neighbours(u) {
                if !dist.contains_key(v) {
                    dist.insert(v, du + 1);
                    queue.push_back(v);
                }
            }
        }
        let mut out: Vec<(ViewpointId, usize)> = dist.into_iter().map(|(k, d)| (k.clone(), d)).collect();
        out.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
        Ok(out)
    }

    /// Viewpoints strictly closer than `radius` meters to `pos`, sorted by
    /// distance then id. Every node must have a position.
    pub fn neighbours_within_radius(&self, pos: &Position, radius: f64) -> Result<Vec<(ViewpointId, f64)>, GraphError> {
        let mut out = Vec::new();
        for vp in self.nodes.values() {
            let p = vp.position.as_ref().ok_or_else(|| GraphError::MissingPosition(vp.id.clone()))?;
            let d = pos.distance(p);
            if d < radius {
                out.push((vp.id.clone(), d));
            }
        }
        out.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
        Ok(out)
    }

    /// Check the structural invariants. Used after deserialization and in tests.
    pub fn check_invariants(&self) -> Result<(), GraphError> {
        for (a, b) in &self.edges {
            if a == b {
                return Err(GraphError::SelfLoop(a.clone()));
            }
            if a > b {
                return Err(GraphError::InvalidGraph(format!("edge ({a}, {b}) not canonical")));
            }
            for id in [a, b] {
                if !self.nodes.contains_key(id) {
                    return Err(GraphError::UnknownViewpoint(id.clone()));
                }
            }
        }
        for (id, vp) in &self.nodes {
            if *id != vp.id {
                return Err(GraphError::InvalidGraph(format!("node key {id} != {}", vp.id)));
            }
            for (label, d) in &vp.detections {
                if *label != d.label {
                    return Err(GraphError::InvalidGraph(format!("table key {label} != {}", d.label)));
                }
            }
        }
        Ok(())
    }
}

fn canonical(a: &ViewpointId, b: &ViewpointId) -> (ViewpointId, ViewpointId) {
    if a <= b {
        (a.clone(), b.clone())
    } else {
        (b.clone(), a.clone())
    }
}
