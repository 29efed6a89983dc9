//! Random walk in the open-plan scene with viewpoint discovery and lazy detection.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use omninav::config::Config;
use omninav::detection::MockDetector;
use omninav::geometry::Position;
use omninav::sim::synthetic::open_plan;
use omninav::sim::{trigger_lazy_detection, ContinuousMemory, Environment, Thresholds};

fn main() -> anyhow::Result<()> {
    let env = open_plan();
    let Environment::Continuous(scene) = &env else { unreachable!("open plan is continuous") };
    let cfg = Config::default();
    let det = MockDetector::new(env.objects().to_vec())?;
    let thresholds = Thresholds::new(cfg.d_vp, cfg.d_det)?;
    let mut memory = ContinuousMemory::new(env.scene_id(), thresholds)?;
    let queries = vec!["sofa".to_string(), "dining table".to_string(), "plant".to_string()];

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut pos = Position::new(1.0, 1.0);
    for _ in 0..500 {
        memory.observe(&pos, cfg.panorama(pos, 0.0))?;
        trigger_lazy_detection(&mut memory, &det, &pos, thresholds.d_det, &queries)?;
        let moves = scene.moves(&pos);
        pos = moves[rng.random_range(0..moves.len())];
    }
    println!("{} viewpoints, {} detector calls", memory.graph.len(), memory.detector_calls());
    for vp in memory.graph.nodes().filter(|v| !v.detections().is_empty()) {
        let labels: Vec<&String> = vp.detections().keys().collect();
        println!("  {} at {:?}: {labels:?}", vp.id, vp.position.unwrap());
    }
    println!("d_det = 1.5 is rejected: {}", Thresholds::new(1.0, 1.5).is_err());
    Ok(())
}
