//! Bundled synthetic scenes and tours. The same data is checked in as JSON
//! under `data/`; a test keeps the two in sync.

use std::collections::BTreeMap;

use super::{
    order_tour, ContinuousScene, DiscreteScene, Environment, Episode, Pose, Rect, SceneViewpoint, SimError, Tour,
    TourFile,
};
use crate::detection::SceneObject;
use crate::geometry::Position;
use crate::omnigraph::vp_id;

/// A scene with its tours.
#[derive(Debug, Clone, PartialEq)]
pub struct Bundle {
    pub env: Environment,
    pub tours: TourFile,
}

impl Bundle {
    pub fn scene_file_name(&self) -> String {
        format!("{}.scene.json", self.env.scene_id())
    }

    pub fn tour_file_name(&self) -> String {
        format!("{}.tours.json", self.env.scene_id())
    }
}

fn obj(label: &str, x: f64, y: f64, conf: f64, radius: f64) -> SceneObject {
    SceneObject::new(label, Position::new(x, y), conf, radius)
}

fn discrete(
    scene_id: &str,
    nodes: &[(&str, f64, f64)],
    edges: &[(&str, &str)],
    objects: Vec<SceneObject>,
) -> Environment {
    let mut adjacency: BTreeMap<_, Vec<_>> = BTreeMap::new();
    for (a, b) in edges {
        adjacency.entry(vp_id(a)).or_default().push(vp_id(b));
    }
    let scene = DiscreteScene {
        scene_id: scene_id.into(),
        viewpoints: nodes
            .iter()
            .map(|(id, x, y)| SceneViewpoint { id: vp_id(id), position: Position::new(*x, *y) })
            .collect(),
        adjacency,
        objects,
    };
    Environment::Discrete(scene.normalized().expect("bundled scene is valid"))
}

/// 4 × 5 grid of viewpoints 2 m apart with a few walls: living room, dining
/// area and kitchen along the south side, bedroom and bathroom to the north.
pub fn house_grid() -> Environment {
    let mut nodes = Vec::new();
    let names: Vec<String> = (0..4).flat_map(|r| (0..5).map(move |c| format!("h{r}{c}"))).collect();
    for (k, name) in names.iter().enumerate() {
        let (r, c) = (k / 5, k % 5);
        nodes.push((name.as_str(), c as f64 * 2.0, r as f64 * 2.0));
    }
    let walls = [("h01", "h11"), ("h02", "h12"), ("h13", "h23"), ("h21", "h31"), ("h23", "h24"), ("h32", "h33")];
    let blocked = |a: &str, b: &str| walls.iter().any(|&(x, y)| (x == a && y == b) || (x == b && y == a));
    let mut edges: Vec<(&str, &str)> = Vec::new();
    for r in 0..4 {
        for c in 0..5 {
            let here = names[r * 5 + c].as_str();
            let mut others = Vec::new();
            if c + 1 < 5 {
                others.push(names[r * 5 + c + 1].as_str());
            }
            if r + 1 < 4 {
                others.push(names[(r + 1) * 5 + c].as_str());
            }
            for other in others {
                if !blocked(here, other) {
                    edges.push((here, other));
                }
            }
        }
    }
    let objects = vec![
        obj("sofa", 1.0, 1.0, 0.9, 4.5),
        obj("coffee table", 2.0, 1.5, 0.7, 3.5),
        obj("fireplace", 0.5, -0.3, 0.8, 4.0),
        obj("dining table", 6.0, 1.0, 0.85, 4.0),
        obj("chair", 6.5, 1.5, 0.6, 3.0),
        obj("kitchen counter", 8.3, 0.5, 0.8, 4.0),
        obj("sink", 8.5, 1.5, 0.7, 3.0),
        obj("refrigerator", 8.5, 3.0, 0.75, 3.5),
        obj("plant", 4.0, 3.5, 0.7, 5.0),
        obj("bed", 1.0, 6.5, 0.9, 4.0),
        obj("nightstand", 2.0, 6.5, 0.6, 3.0),
        obj("wardrobe", 0.0, 5.0, 0.7, 3.5),
        obj("bookshelf", 4.5, 6.5, 0.65, 3.5),
        obj("mirror", 6.5, 6.0, 0.6, 3.0),
        obj("bathtub", 7.5, 6.5, 0.85, 3.0),
        obj("toilet", 8.5, 5.5, 0.8, 3.0),
    ];
    discrete("house_grid", &nodes, &edges, objects)
}

/// A corridor with rooms branching off to both sides.
pub fn corridor_rooms() -> Environment {
    let nodes = [
        ("c0", 0.0, 0.0),
        ("c1", 2.5, 0.0),
        ("c2", 5.0, 0.0),
        ("c3", 7.5, 0.0),
        ("c4", 10.0, 0.0),
        ("c5", 12.5, 0.0),
        ("n1", 2.5, 3.0),
        ("n1b", 2.5, 5.5),
        ("n3", 7.5, 3.0),
        ("n3b", 9.5, 3.5),
        ("s2", 5.0, -3.0),
        ("s4", 10.0, -3.0),
        ("s4b", 12.5, -3.0),
    ];
    let edges = [
        ("c0", "c1"),
        ("c1", "c2"),
        ("c2", "c3"),
        ("c3", "c4"),
        ("c4", "c5"),
        ("c1", "n1"),
        ("n1", "n1b"),
        ("c3", "n3"),
        ("n3", "n3b"),
        ("c2", "s2"),
        ("c4", "s4"),
        ("s4", "s4b"),
        ("s4b", "c5"),
    ];
    let objects = vec![
        obj("piano", 0.0, -1.0, 0.8, 4.0),
        obj("bed", 2.5, 6.0, 0.9, 4.0),
        obj("desk", 3.0, 5.0, 0.7, 3.0),
        obj("sofa", 7.5, 3.5, 0.85, 4.0),
        obj("tv", 8.0, 3.8, 0.7, 3.5),
        obj("sink", 5.0, -3.5, 0.75, 3.0),
        obj("toilet", 5.5, -3.2, 0.8, 3.0),
        obj("stove", 10.0, -3.5, 0.7, 3.0),
        obj("refrigerator", 12.8, -3.3, 0.8, 3.0),
        obj("dining table", 12.0, -2.0, 0.85, 3.5),
        obj("stairs", 12.5, 0.5, 0.9, 4.0),
    ];
    discrete("corridor_rooms", &nodes, &edges, objects)
}

/// Open-plan flat: a kitchen island in the middle and a partition wall in
/// front of the bedroom.
pub fn open_plan() -> Environment {
    let scene = ContinuousScene {
        scene_id: "open_plan".into(),
        bounds: Rect::new(0.0, 0.0, 12.0, 8.0),
        obstacles: vec![Rect::new(5.0, 3.0, 7.0, 4.5), Rect::new(9.0, 0.0, 9.2, 5.0)],
        objects: vec![
            obj("sofa", 1.5, 6.5, 0.9, 4.0),
            obj("lamp", 3.0, 7.5, 0.7, 3.0),
            obj("dining table", 3.5, 2.0, 0.85, 4.0),
            obj("chair", 4.0, 1.5, 0.6, 3.0),
            obj("kitchen island", 6.0, 3.75, 0.8, 4.0),
            obj("kitchen counter", 6.0, 2.5, 0.75, 3.5),
            obj("sink", 7.5, 2.8, 0.7, 3.0),
            obj("refrigerator", 8.5, 0.5, 0.8, 3.0),
            obj("bed", 11.0, 1.5, 0.9, 4.0),
            obj("wardrobe", 11.5, 4.0, 0.7, 3.0),
            obj("plant", 10.0, 7.0, 0.7, 4.0),
        ],
        step_m: 0.25,
        turn_deg: 30.0,
    };
    Environment::Continuous(scene.validated().expect("bundled scene is valid"))
}

/// An episode whose ground truth is the environment's shortest path.
pub fn shortest_path_episode(
    env: &Environment,
    id: &str,
    start: Pose,
    goal: Pose,
    instruction: &str,
) -> Result<Episode, SimError> {
    let gt_path = env.shortest_path(&start, &goal)?;
    Ok(Episode { id: id.into(), instruction: instruction.into(), start, goal, gt_path, start_heading_deg: None })
}

fn tour(env: &Environment, tour_id: &str, specs: &[(&str, Pose, Pose, &str)]) -> Tour {
    let episodes = specs
        .iter()
        .map(|(id, s, g, instr)| shortest_path_episode(env, id, s.clone(), g.clone(), instr).expect("bundled episode"))
        .collect();
    order_tour(env, tour_id, env.scene_id(), episodes).expect("bundled tour")
}

fn house_tours(env: &Environment) -> TourFile {
    let v = Pose::vp;
    TourFile {
        tours: vec![
            tour(
                env,
                "house_a",
                &[
                    (
                        "house_a_1",
                        v("h00"),
                        v("h04"),
                        "Walk past the sofa and the dining table, then stop at the kitchen counter.",
                    ),
                    (
                        "house_a_2",
                        v("h04"),
                        v("h34"),
                        "Leave the kitchen and head to the bathroom. Stop next to the bathtub.",
                    ),
                    ("house_a_3", v("h33"), v("h30"), "Go past the bookshelf and stop by the bed."),
                ],
            ),
            tour(
                env,
                "house_b",
                &[
                    ("house_b_1", v("h20"), v("h12"), "Walk over to the plant in the middle of the house."),
                    ("house_b_2", v("h10"), v("h00"), "Turn around and stand in front of the fireplace."),
                ],
            ),
        ],
    }
}

fn corridor_tours(env: &Environment) -> TourFile {
    let v = Pose::vp;
    TourFile {
        tours: vec![
            tour(
                env,
                "corridor_a",
                &[
                    ("corridor_a_1", v("c0"), v("n1b"), "Walk down the hallway into the bedroom and stop at the bed."),
                    ("corridor_a_2", v("n1b"), v("s2"), "Go back out and into the bathroom, wait next to the toilet."),
                    ("corridor_a_3", v("s2"), v("s4b"), "Head to the kitchen and wait by the refrigerator."),
                ],
            ),
            tour(
                env,
                "corridor_b",
                &[
                    ("corridor_b_1", v("c5"), v("n3b"), "Go to the living room and stop in front of the tv."),
                    ("corridor_b_2", v("n3"), v("c0"), "Return along the hallway to the piano."),
                ],
            ),
        ],
    }
}

fn open_plan_tours(env: &Environment) -> TourFile {
    let p = Pose::at;
    TourFile {
        tours: vec![
            tour(
                env,
                "open_a",
                &[
                    ("open_a_1", p(1.0, 1.0), p(2.0, 6.0), "Walk to the sofa next to the lamp."),
                    ("open_a_2", p(2.0, 6.0), p(8.0, 2.0), "Go around the kitchen island and stop at the sink."),
                    ("open_a_3", p(8.0, 2.0), p(11.0, 2.0), "Walk into the bedroom and stop beside the bed."),
                ],
            ),
            tour(env, "open_b", &[("open_b_1", p(6.0, 7.0), p(3.0, 2.5), "Head over to the dining table.")]),
        ],
    }
}

/// Every bundled scene with its tours.
pub fn bundled() -> Vec<Bundle> {
    let house = house_grid();
    let corridor = corridor_rooms();
    let open = open_plan();
    vec![
        Bundle { tours: house_tours(&house), env: house },
        Bundle { tours: corridor_tours(&corridor), env: corridor },
        Bundle { tours: open_plan_tours(&open), env: open },
    ]
}

/// Two house episodes with disjoint keyword sets: the first mentions the
/// sofa and coffee table, the second only the bed.
pub fn memory_demo_tour() -> (Environment, Tour) {
    let env = house_grid();
    let v = Pose::vp;
    let episodes = vec![
        shortest_path_episode(&env, "demo_1", v("h02"), v("h00"), "Walk past the coffee table and stop at the sofa.")
            .expect("demo episode"),
        shortest_path_episode(&env, "demo_2", v("h10"), v("h30"), "Go upstairs to the bed.").expect("demo episode"),
    ];
    let tour = Tour { tour_id: "memory_demo".into(), scene_id: env.scene_id().into(), episodes };
    (env, tour)
}
