//! Build a small omnigraph by hand, then save and reload it.

use omninav::detection::{BoundingBox, Detection};
use omninav::geometry::Position;
use omninav::omnigraph::{vp_id, Omnigraph, Viewpoint};

fn main() -> anyhow::Result<()> {
    let bbox = BoundingBox::new(1200.0, 900.0, 1500.0, 1200.0)?;
    let mut g = Omnigraph::new("demo");
    g.record_arrival(None, Viewpoint::at(vp_id("hall"), Position::new(0.0, 0.0)), &[])?;
    g.record_arrival(
        Some(&vp_id("hall")),
        Viewpoint::at(vp_id("lounge"), Position::new(2.0, 0.0)),
        &[Detection::new("sofa", bbox, 0.82, 95.0)],
    )?;
    g.record_arrival(
        Some(&vp_id("lounge")),
        Viewpoint::at(vp_id("kitchen"), Position::new(2.0, 3.0)),
        &[Detection::new("sink", bbox, 0.64, 10.0), Detection::new("sofa", bbox, 0.4, 200.0)],
    )?;
    // seeing the sofa again with more confidence replaces the stored box
    g.update_keywords(&vp_id("kitchen"), &[Detection::new("sofa", bbox, 0.9, 180.0)])?;

    println!("{} viewpoints, {} edges", g.len(), g.edge_count());
    for (id, hops) in g.neighbours_within_hops(&vp_id("hall"), 2)? {
        let labels: Vec<&str> = g.node(&id).unwrap().detections().keys().map(String::as_str).collect();
        println!("  {id:8} {hops} hop(s)  {labels:?}");
    }

    let bytes = g.serialize();
    let back = Omnigraph::deserialize(&bytes)?;
    assert_eq!(back, g);
    println!("{}", String::from_utf8(bytes)?);
    Ok(())
}
