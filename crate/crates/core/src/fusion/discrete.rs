use std::collections::{BTreeMap, HashMap, VecDeque};

use super::{FusedKeyword, FusionError, ViewIndexing};
use crate::detection::filter_boxes_per_keyword;
use crate::omnigraph::{GraphError, Omnigraph, ViewpointId};

pub const DEFAULT_DISCRETE_HOPS: usize = 3;

/// (distance, view) -> (count, best confidence), for one label.
type Tally = BTreeMap<(usize, usize), (usize, f64)>;

/// Hop distance and first move (smallest-id next hop on a shortest path)
/// for every viewpoint within `max_hops` of `origin`.
fn hops_and_first_moves<'g>(
    graph: &'g Omnigraph,
    origin: &'g ViewpointId,
    max_hops: usize,
) -> BTreeMap<&'g ViewpointId, (usize, Option<&'g ViewpointId>)> {
    let mut seen: BTreeMap<&ViewpointId, (usize, Option<&ViewpointId>)> = BTreeMap::new();
    let mut queue = VecDeque::new();
    seen.insert(origin, (0, None));
    queue.push_back(origin);
    while let Some(u) = queue.pop_front() {
        let (du, first_u) = seen[u];
        if du == max_hops {
            continue;
        }
        for v in graph.neighbours(u) {
            let via = first_u.unwrap_or(v);
            match seen.get_mut(v) {
                None => {
                    seen.insert(v, (du + 1, Some(via)));
                    queue.push_back(v);
                }
                Some((dv, Some(first_v))) if *dv == du + 1 && via < *first_v => *first_v = via,
                _ => {}
            }
        }
    }
    seen
}

/// Discrete fusion around `current`.
///
/// 1. collect viewpoints within `max_hops` hops;
/// 2. keep the most confident box per keyword at each viewpoint;
/// 3. tag each keyword occurrence with its viewpoint's hop distance and the
///    view index of the first move towards it (view 0 at the origin);
/// 4. collapse keywords seen at several viewpoints to their most frequent
///    (distance, view) pair, preferring smaller distance, then smaller view.
///
/// Output is sorted by distance, then label.
pub fn fuse_discrete<F>(
    graph: &Omnigraph,
    current: &ViewpointId,
    max_hops: usize,
    next_move_view_index: F,
) -> Result<Vec<FusedKeyword>, FusionError>
where
    F: Fn(&ViewpointId, &ViewpointId) -> usize,
{
    if !graph.contains(current) {
        return Err(GraphError::UnknownViewpoint(current.clone()).into());
    }
    let reach = hops_and_first_moves(graph, current, max_hops);

    let mut tally: HashMap<String, Tally> = HashMap::new();
    for (id, (hops, first)) in &reach {
        let vp = graph.node(id).expect("reachable node exists");
        let view = match first {
            None => 0,
            Some(next) => next_move_view_index(current, next),
        };
        let dets: Vec<_> = vp.detections().values().cloned().collect();
        for det in filter_boxes_per_keyword(&dets) {
            let slot = tally.entry(det.label).or_default().entry((*hops, view)).or_insert((0, 0.0));
            slot.0 += 1;
            slot.1 = slot.1.max(det.confidence);
        }
    }

    let mut out: Vec<FusedKeyword> = tally
        .into_iter()
        .map(|(label, pairs)| {
            // BTreeMap iterates (distance, view) ascending, so the first
            // maximal count already carries the tie-break.
            let (&(hops, view), &(_, confidence)) = pairs
                .iter()
                .reduce(|best, cand| if cand.1 .0 > best.1 .0 { cand } else { best })
                .expect("non-empty tally");
            FusedKeyword { label, distance: hops as f64, direction: view as f64, confidence }
        })
        .collect();
    out.sort_by(|a, b| a.distance.total_cmp(&b.distance).then_with(|| a.label.cmp(&b.label)));
    Ok(out)
}

/// A next-move function that quantizes the bearing between two positioned
/// viewpoints into a view index. Viewpoints without positions map to view 0.
pub fn bearing_view_index<'g>(
    graph: &'g Omnigraph,
    views: ViewIndexing,
) -> impl Fn(&ViewpointId, &ViewpointId) -> usize + 'g {
    move |from, to| {
        let a = graph.node(from).and_then(|v| v.position);
        let b = graph.node(to).and_then(|v| v.position);
        match (a, b) {
            (Some(a), Some(b)) => views.index_for(a.bearing_to(&b), 0.0),
            _ => 0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detection::{BoundingBox, Detection};
    use crate::geometry::Position;
    use crate::omnigraph::{vp_id, Viewpoint};

    fn det(label: &str, conf: f64) -> Detection {
        Detection::new(label, BoundingBox::new(0.0, 0.0, 1.0, 1.0).unwrap(), conf, 0.0)
    }

    fn abc() -> Omnigraph {
        let mut g = Omnigraph::new("s");
        g.record_arrival(None, Viewpoint::at(vp_id("A"), Position::new(0.0, 0.0)), &[]).unwrap();
        g.record_arrival(Some(&vp_id("A")), Viewpoint::at(vp_id("B"), Position::new(1.0, 0.0)), &[det("sofa", 0.9)])
            .unwrap();
        g.record_arrival(
            Some(&vp_id("B")),
            Viewpoint::at(vp_id("C"), Position::new(2.0, 0.0)),
            &[det("sofa", 0.8), det("lamp", 0.7)],
        )
        .unwrap();
        g
    }

    #[test]
    fn line_example() {
        let g = abc();
        let view = bearing_view_index(&g, ViewIndexing::default());
        let dir_ab = view(&vp_id("A"), &vp_id("B"));
        assert_eq!(dir_ab, 3);
        let out = fuse_discrete(&g, &vp_id("A"), 3, &view).unwrap();
        assert_eq!(
            out,
            vec![
                FusedKeyword { label: "sofa".into(), distance: 1.0, direction: 3.0, confidence: 0.9 },
                FusedKeyword { label: "lamp".into(), distance: 2.0, direction: 3.0, confidence: 0.7 },
            ]
        );
    }

    #[test]
    fn origin_keyword_gets_view_zero() {
        let mut g = abc();
        g.update_keywords(&vp_id("A"), &[det("bed", 0.4)]).unwrap();
        let out = fuse_discrete(&g, &vp_id("A"), 1, |_, _| 7).unwrap();
        assert_eq!(out[0], FusedKeyword { label: "bed".into(), distance: 0.0, direction: 0.0, confidence: 0.4 });
        assert_eq!(out[1].label, "sofa");
        assert_eq!(out[1].direction, 7.0);
    }

    #[test]
    fn empty_and_unknown() {
        let mut g = Omnigraph::new("s");
        g.add_viewpoint(Viewpoint::new(vp_id("A"), None)).unwrap();
        assert!(fuse_discrete(&g, &vp_id("A"), 3, |_, _| 0).unwrap().is_empty());
        assert_eq!(fuse_discrete(&g, &vp_id("X"), 3, |_, _| 0).unwrap_err().code(), "UnknownViewpoint");
    }

    #[test]
    fn first_move_prefers_smallest_next_hop() {
        // A -> {M, N} -> T ; both shortest, M < N
        let mut g = Omnigraph::new("s");
        for id in ["A", "N", "M", "T"] {
            g.add_viewpoint(Viewpoint::new(vp_id(id), None)).unwrap();
        }
        for (a, b) in [("A", "N"), ("A", "M"), ("N", "T"), ("M", "T")] {
            g.connect(&vp_id(a), &vp_id(b)).unwrap();
        }
        g.update_keywords(&vp_id("T"), &[det("sink", 0.5)]).unwrap();
        let out = fuse_discrete(&g, &vp_id("A"), 2, |_, to| if to.as_str() == "M" { 1 } else { 2 }).unwrap();
        assert_eq!(out[0].direction, 1.0);
    }

    #[test]
    fn modal_pair_wins_over_closer_single() {
        // sofa at one viewpoint 1 hop away and two viewpoints 2 hops away in the same direction
        let mut g = Omnigraph::new("s");
        for id in ["O", "P", "Q", "R", "S"] {
            g.add_viewpoint(Viewpoint::new(vp_id(id), None)).unwrap();
        }
        for (a, b) in [("O", "P"), ("O", "Q"), ("Q", "R"), ("Q", "S")] {
            g.connect(&vp_id(a), &vp_id(b)).unwrap();
        }
        for id in ["P", "R", "S"] {
            g.update_keywords(&vp_id(id), &[det("sofa", 0.5)]).unwrap();
        }
        let out = fuse_discrete(&g, &vp_id("O"), 3, |_, to| if to.as_str() == "P" { 4 } else { 9 }).unwrap();
        assert_eq!(out, vec![FusedKeyword { label: "sofa".into(), distance: 2.0, direction: 9.0, confidence: 0.5 }]);
    }
}
