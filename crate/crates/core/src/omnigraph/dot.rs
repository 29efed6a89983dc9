//! Graphviz export.

use std::fmt::Write as _;

use super::Omnigraph;

/// Keywords shown per node in DOT exports.
pub const DOT_KEYWORDS_PER_NODE: usize = 3;

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

impl Omnigraph {
    /// Undirected DOT graph. Each node is labelled with its id and up to
    /// `max_keywords` keywords, most confident first (ties by label).
    /// Positioned nodes get a pinned `pos`.
    pub fn to_dot(&self, max_keywords: usize) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "graph {} {{", quote(self.scene_id()));
        let _ = writeln!(s, "  node [shape=box, fontsize=10];");
        for vp in self.nodes() {
            let mut dets: Vec<_> = vp.detections().values().collect();
            dets.sort_by(|a, b| b.confidence.total_cmp(&a.confidence).then_with(|| a.label.cmp(&b.label)));
            let mut label = vp.id.as_str().to_string();
            for d in dets.into_iter().take(max_keywords) {
                let _ = write!(label, "\n{} {:.2}", d.label, d.confidence);
            }
            let label = quote(&label).replace('\n', "\\n");
            match vp.position {
                Some(p) => {
                    let _ = writeln!(s, "  {} [label={label}, pos=\"{},{}!\"];", quote(vp.id.as_str()), p.x, p.y);
                }
                None => {
                    let _ = writeln!(s, "  {} [label={label}];", quote(vp.id.as_str()));
                }
            }
        }
        for (a, b) in self.edges() {
            let _ = writeln!(s, "  {} -- {};", quote(a.as_str()), quote(b.as_str()));
        }
        s.push_str("}\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use crate::detection::{BoundingBox, Detection};
    use crate::geometry::Position;
    use crate::omnigraph::{vp_id, Omnigraph, Viewpoint};

    #[test]
    fn at_most_three_keywords_per_node() {
        let mut g = Omnigraph::new("s");
        let dets: Vec<Detection> = [("sofa", 0.9), ("lamp", 0.5), ("bed", 0.7), ("rug", 0.2)]
            .iter()
            .map(|(l, c)| Detection::new(*l, BoundingBox::new(0.0, 0.0, 1.0, 1.0).unwrap(), *c, 0.0))
            .collect();
        g.record_arrival(None, Viewpoint::at(vp_id("a"), Position::new(1.0, 2.0)), &dets).unwrap();
        g.record_arrival(Some(&vp_id("a")), Viewpoint::new(vp_id("b\"q"), None), &[]).unwrap();
        let dot = g.to_dot(3);
        assert!(dot.contains("label=\"a\\nsofa 0.90\\nbed 0.70\\nlamp 0.50\", pos=\"1,2!\""));
        assert!(!dot.contains("rug"));
        assert!(dot.contains("\"a\" -- \"b\\\"q\";"));
        assert!(dot.starts_with("graph \"s\" {\n") && dot.ends_with("}\n"));
    }
}
