//! Continuous fusion: keywords within a radius, with meters and bearings.

use omninav::detection::{BoundingBox, Detection};
use omninav::fusion::fuse_continuous;
use omninav::geometry::Position;
use omninav::omnigraph::{vp_id, Omnigraph, Viewpoint};

fn main() -> anyhow::Result<()> {
    let bbox = BoundingBox::new(100.0, 800.0, 300.0, 1000.0)?;
    let mut g = Omnigraph::new("plan");
    let spots = [
        ("a", Position::new(0.0, 0.0), vec![("sofa", 0.6)]),
        ("b", Position::new(3.0, 4.0), vec![("sofa", 0.8), ("lamp", 0.5)]),
        ("c", Position::new(-6.0, 0.0), vec![("fridge", 0.7)]),
        ("d", Position::new(20.0, 0.0), vec![("bed", 0.9)]),
    ];
    let mut prev = None;
    for (id, pos, dets) in spots {
        let dets: Vec<Detection> = dets.into_iter().map(|(l, c)| Detection::new(l, bbox, c, 0.0)).collect();
        g.record_arrival(prev.as_ref(), Viewpoint::at(vp_id(id), pos), &dets)?;
        prev = Some(vp_id(id));
    }
    for radius in [5.5, 7.0] {
        println!("radius {radius} m:");
        for k in fuse_continuous(&g, &Position::new(0.0, 0.0), radius)? {
            println!("  {:7} {:5.2} m at {:6.1}°  conf {:.2}", k.label, k.distance, k.direction, k.confidence);
        }
    }
    Ok(())
}
