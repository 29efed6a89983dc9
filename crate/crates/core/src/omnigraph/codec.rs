//! JSON encoding of an [`Omnigraph`].
//!
//! Output is byte-deterministic: nodes by id, detections by label, edges by
//! canonical pair. Floats use shortest round-trip formatting.

use serde::{Deserialize, Serialize};

use super::{GraphError, Omnigraph, Viewpoint, ViewpointId};
use crate::detection::Detection;
use crate::geometry::Position;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ParseErrorKind {
    Syntax,
    Eof,
    Data,
    Io,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphDoc {
    scene_id: String,
    nodes: Vec<NodeDoc>,
    edges: Vec<[ViewpointId; 2]>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeDoc {
    id: ViewpointId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    position: Option<Position>,
    detections: Vec<Detection>,
}

impl Omnigraph {
    fn to_doc(&self) -> GraphDoc {
        GraphDoc {
            scene_id: self.scene_id.clone(),
            nodes: self
                .nodes
                .values()
                .map(|vp| NodeDoc {
                    id: vp.id.clone(),
                    position: vp.position,
                    detections: vp.detections.values().cloned().collect(),
                })
                .collect(),
            edges: self.edges.iter().map(|(a, b)| [a.clone(), b.clone()]).collect(),
        }
    }

    fn from_doc(doc: GraphDoc) -> Result<Self, GraphError> {
        let mut g = Omnigraph::new(doc.scene_id);
        for node in doc.nodes {
            if g.contains(&node.id) {
                return Err(GraphError::InvalidGraph(format!("duplicate node '{}'", node.id)));
            }
            let mut vp = Viewpoint::new(node.id, node.position);
            for det in node.detections {
                if vp.detections.contains_key(&det.label) {
                    return Err(GraphError::InvalidGraph(format!(
                        "duplicate detection '{}' on '{}'",
                        det.label, vp.id
                    )));
                }
                det.validate().map_err(|e| GraphError::InvalidDetection(e.to_string()))?;
                vp.detections.insert(det.label.clone(), det);
            }
            g.add_viewpoint(vp)?;
        }
        for [a, b] in doc.edges {
            if g.has_edge(&a, &b) {
                return Err(GraphError::InvalidGraph(format!("duplicate edge ({a}, {b})")));
            }
            g.connect(&a, &b)?;
        }
        g.check_invariants()?;
        Ok(g)
    }

    /// Pretty-printed JSON with a trailing newline.
    pub fn serialize(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(&self.to_doc()).expect("graph document always serializes");
        out.push(b'\n');
        out
    }

    pub fn deserialize(bytes: &[u8]) -> Result<Self, GraphError> {
        let doc: GraphDoc = serde_json::from_slice(bytes).map_err(|e| parse_error(bytes, &e))?;
        Self::from_doc(doc)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(self.to_doc()).expect("graph document always serializes")
    }
}

impl Serialize for Omnigraph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_doc().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Omnigraph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let doc = GraphDoc::deserialize(d)?;
        Omnigraph::from_doc(doc).map_err(serde::de::Error::custom)
    }
}

/// Map serde_json's (line, column) position to a byte offset into `input`.
fn parse_error(input: &[u8], e: &serde_json::Error) -> GraphError {
    let kind = match e.classify() {
        serde_json::error::Category::Syntax => ParseErrorKind::Syntax,
        serde_json::error::Category::Eof => ParseErrorKind::Eof,
        serde_json::error::Category::Data => ParseErrorKind::Data,
        serde_json::error::Category::Io => ParseErrorKind::Io,
    };
    let mut offset = 0usize;
    let mut line = 1usize;
    for (i, b) in input.iter().enumerate() {
        if line == e.line() {
            offset = i;
            break;
        }
        if *b == b'\n' {
            line += 1;
            offset = i + 1;
        }
    }
    let offset = (offset + e.column().saturating_sub(1)).min(input.len());
    GraphError::ParseError { offset, message: e.to_string(), kind }
}
