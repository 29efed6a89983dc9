//! Order shuffled episodes so each goal lies close to the next start.

use omninav::sim::synthetic::{bundled, house_grid};
use omninav::sim::{order_episodes_into_tour, order_tour, tour_cost};

fn main() -> anyhow::Result<()> {
    // points on a line, visited out of order; cost is the gap between them
    let stops = [4.0_f64, 0.0, 9.0, 1.0, 6.0];
    let cost = |i: usize, j: usize| (stops[i] - stops[j]).abs();
    let natural: Vec<usize> = (0..stops.len()).collect();
    let best = order_episodes_into_tour(stops.len(), cost);
    println!("given order cost {:.1}, ordered {:?} cost {:.1}", tour_cost(&natural, &cost), best.order, best.cost);

    let env = house_grid();
    let mut episodes: Vec<_> = bundled()[0].tours.tours.iter().flat_map(|t| t.episodes.clone()).collect();
    episodes.reverse();
    let tour = order_tour(&env, "all", env.scene_id(), episodes)?;
    for ep in &tour.episodes {
        println!("  {:10} {:?} -> {:?}", ep.id, ep.start, ep.goal);
    }
    Ok(())
}
