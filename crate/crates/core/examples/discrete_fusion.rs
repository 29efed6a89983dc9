//! Fuse keywords around a viewpoint of a discrete scene after a short walk.

use omninav::config::Config;
use omninav::detection::MockDetector;
use omninav::fusion::{bearing_view_index, fuse_discrete};
use omninav::keywords::{AblationMode, KeywordPipeline};
use omninav::sim::synthetic::house_grid;
use omninav::sim::{run_tour, synthetic::shortest_path_episode, OracleAgent, Pose, Tour};

fn main() -> anyhow::Result<()> {
    let env = house_grid();
    let ep = shortest_path_episode(
        &env,
        "walk",
        Pose::vp("h00"),
        Pose::vp("h34"),
        "Go past the sofa and the dining table to the bed.",
    )?;
    let tour = Tour { tour_id: "walk".into(), scene_id: env.scene_id().into(), episodes: vec![ep] };
    let det = MockDetector::new(env.objects().to_vec())?;
    let kw = KeywordPipeline::rule_based(AblationMode::Full);
    let cfg = Config::default();
    let log = run_tour(&env, &det, &kw, &mut OracleAgent::new(), &tour, &cfg)?;

    let g = &log.graph;
    // a viewpoint half way along the walk
    let gt = &tour.episodes[0].gt_path;
    let Pose::Viewpoint(here) = gt[gt.len() / 2].clone() else { unreachable!("discrete scene") };
    for hops in [1, 3] {
        println!("within {hops} hop(s) of {here}:");
        for k in fuse_discrete(g, &here, hops, bearing_view_index(g, cfg.views))? {
            println!("  {:14} d_v {} h_v {:2} conf {:.2}", k.label, k.distance, k.direction, k.confidence);
        }
    }
    Ok(())
}
