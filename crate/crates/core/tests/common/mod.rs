#![allow(dead_code)]

use std::path::PathBuf;

use omninav::detection::{BoundingBox, Detection};
use omninav::geometry::Position;
use omninav::omnigraph::{vp_id, Omnigraph, Viewpoint};

pub fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

pub fn data_dir() -> PathBuf {
    crate_dir().join("data")
}

pub fn det(label: &str, conf: f64, heading: f64) -> Detection {
    Detection::new(label, BoundingBox::new(100.0, 800.0, 300.0, 1000.0).unwrap(), conf, heading)
}

/// The graph frozen in `tests/data/golden_graph.json`.
pub fn golden_graph() -> Omnigraph {
    let mut g = Omnigraph::new("golden_scene");
    g.record_arrival(
        None,
        Viewpoint::at(vp_id("vp_a"), Position::new(0.0, 0.0)),
        &[det("sofa", 0.875, 90.0), det("lamp", 0.5, 270.25)],
    )
    .unwrap();
    g.record_arrival(
        Some(&vp_id("vp_a")),
        Viewpoint::at(vp_id("vp_b"), Position::new(1.5, -0.25)),
        &[det("dining table", 0.6, 12.5)],
    )
    .unwrap();
    g.record_arrival(Some(&vp_id("vp_b")), Viewpoint::at(vp_id("vp_c"), Position::new_3d(3.0, 0.1, 1.2)), &[]).unwrap();
    g
}
