use std::collections::HashMap;

use super::{FusedKeyword, FusionError};
use crate::geometry::Position;
use crate::omnigraph::{Omnigraph, ViewpointId};

/// Continuous fusion around `pos`: viewpoints strictly within `radius`
/// meters, then per keyword the single most confident detection across all
/// of them. `distance` is the Euclidean distance to that detection's
/// viewpoint and `direction` the compass bearing towards it.
///
/// Confidence ties go to the nearer viewpoint, then the smaller id.
/// Output is sorted by distance, then label.
pub fn fuse_continuous(graph: &Omnigraph, pos: &Position, radius: f64) -> Result<Vec<FusedKeyword>, FusionError> {
    let neighbours = graph.neighbours_within_radius(pos, radius)?;

    struct Best<'a> {
        confidence: f64,
        distance: f64,
        id: &'a ViewpointId,
        at: Position,
    }
    let mut best: HashMap<&str, Best> = HashMap::new();
    for (id, distance) in &neighbours {
        let vp = graph.node(id).expect("neighbour exists");
        let at = vp.position.expect("radius query checked positions");
        for det in vp.detections().values() {
            let cand = Best { confidence: det.confidence, distance: *distance, id, at };
            let replace = match best.get(det.label.as_str()) {
                None => true,
                Some(cur) => cand
                    .confidence
                    .total_cmp(&cur.confidence)
                    .reverse()
                    .then(cand.distance.total_cmp(&cur.distance))
                    .then(cand.id.cmp(cur.id))
                    .is_lt(),
            };
            if replace {
                best.insert(det.label.as_str(), cand);
            }
        }
    }

    let mut out: Vec<FusedKeyword> = best
        .into_iter()
        .map(|(label, b)| FusedKeyword {
            label: label.to_string(),
            distance: b.distance,
            direction: pos.bearing_to(&b.at),
            confidence: b.confidence,
        })
        .collect();
    out.sort_by(|a, b| a.distance.total_cmp(&b.distance).then_with(|| a.label.cmp(&b.label)));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detection::{BoundingBox, Detection};
    use crate::omnigraph::{vp_id, Viewpoint};

    fn det(label: &str, conf: f64) -> Detection {
        Detection::new(label, BoundingBox::new(0.0, 0.0, 1.0, 1.0).unwrap(), conf, 0.0)
    }

    type Spot<'a> = (&'a str, f64, f64, &'a [(&'a str, f64)]);

    fn graph(points: &[Spot]) -> Omnigraph {
        let mut g = Omnigraph::new("c");
        for (id, x, y, dets) in points {
            let dets: Vec<_> = dets.iter().map(|(l, c)| det(l, *c)).collect();
            let vp = Viewpoint::at(vp_id(id), Position::new(*x, *y)).with_detections(&dets).unwrap();
            g.add_viewpoint(vp).unwrap();
        }
        g
    }

    #[test]
    fn max_score_picks_north_sofa() {
        let g = graph(&[("e", 5.0, 0.0, &[("sofa", 0.8)]), ("n", 0.0, 5.0, &[("sofa", 0.9)])]);
        let out = fuse_continuous(&g, &Position::new(0.0, 0.0), 7.0).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].distance, 5.0);
        assert_eq!(out[0].direction, 0.0);
        assert_eq!(out[0].confidence, 0.9);
    }

    #[test]
    fn radius_too_small() {
        let g = graph(&[("e", 5.0, 0.0, &[("sofa", 0.8)])]);
        assert!(fuse_continuous(&g, &Position::new(0.0, 0.0), 4.9).unwrap().is_empty());
    }

    #[test]
    fn bearing_due_east() {
        let g = graph(&[("e", 3.0, 0.0, &[("lamp", 0.8)])]);
        let out = fuse_continuous(&g, &Position::new(0.0, 0.0), 7.0).unwrap();
        assert!((out[0].direction - 90.0).abs() < 1e-12);
    }

    #[test]
    fn missing_position_errors() {
        let mut g = graph(&[]);
        g.add_viewpoint(Viewpoint::new(vp_id("x"), None)).unwrap();
        assert_eq!(fuse_continuous(&g, &Position::new(0.0, 0.0), 7.0).unwrap_err().code(), "MissingPosition");
    }

    #[test]
    fn distinct_labels_sorted_by_distance() {
        let g = graph(&[
            ("a", 1.0, 0.0, &[("sofa", 0.3), ("bed", 0.2)]),
            ("b", 0.0, 2.0, &[("sofa", 0.6), ("sink", 0.9)]),
            ("c", 0.0, -6.0, &[("plant", 0.9)]),
        ]);
        let out = fuse_continuous(&g, &Position::new(0.0, 0.0), 7.0).unwrap();
        let labels: Vec<_> = out.iter().map(|k| k.label.as_str()).collect();
        assert_eq!(labels, vec!["bed", "sink", "sofa", "plant"]);
        assert!(out.windows(2).all(|w| w[0].distance <= w[1].distance));
    }
}
