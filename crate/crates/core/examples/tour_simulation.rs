//! Run a two-episode tour and show that the second episode sees the first one's detections.

use omninav::config::Config;
use omninav::detection::MockDetector;
use omninav::keywords::{AblationMode, KeywordPipeline};
use omninav::sim::synthetic::memory_demo_tour;
use omninav::sim::{OracleAgent, Phase, TourRunner};

fn main() -> anyhow::Result<()> {
    let (env, tour) = memory_demo_tour();
    let det = MockDetector::new(env.objects().to_vec())?;
    let kw = KeywordPipeline::rule_based(AblationMode::Full);
    let cfg = Config::default();
    let mut runner = TourRunner::new(&env, &det, &kw, &cfg)?;
    let log = runner.run(&mut OracleAgent::new(), &tour)?;

    for ep in &log.episodes {
        println!("{}: \"{}\" -> {:?}", ep.episode_id, ep.instruction, ep.keywords);
        for phase in &ep.phases {
            let poses: Vec<String> = phase.steps.iter().map(|s| format!("{:?}", s.pose)).collect();
            println!("  {:?}: {}", phase.phase, poses.join(" "));
        }
    }
    let nav = log.episodes[1].phase(Phase::Navigation).unwrap();
    println!("fusion at the start of episode 2: {:?}", nav.steps[0].fused);

    let start = &tour.episodes[1].start;
    println!("query before reset: {} keyword(s)", runner.fuse_at(start)?.len());
    runner.reset();
    println!("query after reset: {} keyword(s), epoch {}", runner.fuse_at(start)?.len(), runner.epoch());
    Ok(())
}
