//! Run the mock detector on one panorama and turn boxes into headings.

use omninav::detection::{
    detect, elevation_from_box, filter_boxes_per_keyword, relative_heading_from_box, MockDetector, Panorama,
    SceneObject,
};
use omninav::geometry::Position;

fn main() -> anyhow::Result<()> {
    let detector = MockDetector::new(vec![
        SceneObject::new("sofa", Position::new(3.0, 0.0), 0.9, 8.0),
        SceneObject::new("sofa", Position::new(0.0, -4.0), 0.7, 8.0),
        SceneObject::new("lamp", Position::new(-1.0, 1.0), 0.6, 8.0),
        SceneObject::new("bed", Position::new(30.0, 30.0), 0.9, 5.0),
    ])?;
    // agent at the origin facing east
    let pano = Panorama::new(Position::new(0.0, 0.0), 90.0);
    let queries = vec!["Sofa".to_string(), "lamp".to_string(), "bed".to_string()];

    let dets = detect(&detector, &pano, &queries)?;
    for d in &dets {
        let rel = relative_heading_from_box(&d.bbox, pano.width_px)?;
        let elev = elevation_from_box(&d.bbox, pano.height_px)?;
        println!(
            "{:6} conf {:.2}  relative {rel:6.1}°  absolute {:6.1}°  elevation {elev:5.1}°",
            d.label, d.confidence, d.heading_deg
        );
    }
    println!("one box per keyword:");
    for d in filter_boxes_per_keyword(&dets) {
        println!("  {} at {:.1}°", d.label, d.heading_deg);
    }
    Ok(())
}
