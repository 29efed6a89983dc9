//! Episode ordering: chain episodes so each goal is close to the next start.

use super::{Environment, Episode, SimError, Tour};

/// A visiting order and its total transition cost.
#[derive(Debug, Clone, PartialEq)]
pub struct Ordering {
    pub order: Vec<usize>,
    pub cost: f64,
}

/// Sum of `cost(order[k], order[k + 1])`.
pub fn tour_cost<F: Fn(usize, usize) -> f64>(order: &[usize], cost: &F) -> f64 {
    order.windows(2).map(|w| cost(w[0], w[1])).sum()
}

fn nearest_neighbour<F: Fn(usize, usize) -> f64>(n: usize, first: usize, cost: &F) -> Vec<usize> {
    let mut order = vec![first];
    let mut used = vec![false; n];
    used[first] = true;
    for _ in 1..n {
        let last = *order.last().expect("non-empty");
        let next = (0..n)
            .filter(|&j| !used[j])
            .min_by(|&a, &b| cost(last, a).total_cmp(&cost(last, b)).then(a.cmp(&b)))
            .expect("unused episode left");
        used[next] = true;
        order.push(next);
    }
    order
}

/// Segment reversal and segment relocation moves until no move improves.
/// Reversal re-prices the reversed segment since costs are asymmetric.
fn local_search<F: Fn(usize, usize) -> f64>(mut order: Vec<usize>, cost: &F) -> Vec<usize> {
    let n = order.len();
    let mut best = tour_cost(&order, cost);
    let improves = |c: f64, best: f64| c < best - 1e-12 * best.abs().max(1.0);
    loop {
        let mut improved = false;
        for i in 0..n {
            for j in i + 1..n {
                let mut cand = order.clone();
                cand[i..=j].reverse();
                let c = tour_cost(&cand, cost);
                if improves(c, best) {
                    order = cand;
                    best = c;
                    improved = true;
                }
            }
        }
        for len in 1..=3.min(n.saturating_sub(1)) {
            for i in 0..=n - len {
                for k in 0..=n - len {
                    if k == i {
                        continue;
                    }
                    let mut cand = order.clone();
                    let seg: Vec<usize> = cand.drain(i..i + len).collect();
                    let at = k.min(cand.len());
                    cand.splice(at..at, seg);
                    let c = tour_cost(&cand, cost);
                    if improves(c, best) {
                        order = cand;
                        best = c;
                        improved = true;
                    }
                }
            }
        }
        if !improved {
            return order;
        }
    }
}

/// Order `n` episodes to minimise the sum of transition costs
/// `cost(i, j)` (from the goal of `i` to the start of `j`). Nearest-neighbour
/// tours from every start plus the input order seed a local search; the
/// cheapest result wins, with earlier candidates preferred on ties.
/// The result never costs more than the input order or any
/// nearest-neighbour tour.
pub fn order_episodes_into_tour<F: Fn(usize, usize) -> f64>(n: usize, cost: F) -> Ordering {
    if n == 0 {
        return Ordering { order: vec![], cost: 0.0 };
    }
    let mut seeds = vec![(0..n).collect::<Vec<_>>()];
    seeds.extend((0..n).map(|s| nearest_neighbour(n, s, &cost)));
    let mut best: Option<Ordering> = None;
    for seed in seeds {
        let order = local_search(seed, &cost);
        let c = tour_cost(&order, &cost);
        if best.as_ref().is_none_or(|b| c < b.cost) {
            best = Some(Ordering { order, cost: c });
        }
    }
    best.expect("at least one seed")
}

/// Order episodes of one scene into a tour using shortest-path distances.
pub fn order_tour(env: &Environment, tour_id: &str, scene_id: &str, episodes: Vec<Episode>) -> Result<Tour, SimError> {
    if scene_id != env.scene_id() {
        return Err(SimError::SceneMismatch { tour: scene_id.to_string(), env: env.scene_id().to_string() });
    }
    if episodes.is_empty() {
        return Err(SimError::InvalidEpisode("cannot order an empty episode list".into()));
    }
    for e in &episodes {
        e.validate()?;
        env.position_of(&e.start)?;
        env.position_of(&e.goal)?;
    }
    let n = episodes.len();
    let mut table = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                table[i * n + j] = env.shortest_distance(&episodes[i].goal, &episodes[j].start)?;
            }
        }
    }
    let ordering = order_episodes_into_tour(n, |i, j| table[i * n + j]);
    let mut slots: Vec<Option<Episode>> = episodes.into_iter().map(Some).collect();
    let episodes = ordering.order.iter().map(|&k| slots[k].take().expect("permutation")).collect();
    Ok(Tour { tour_id: tour_id.to_string(), scene_id: scene_id.to_string(), episodes })
}
