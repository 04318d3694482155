//! Fixture environments and task generators.
//!
//! All cases share a unit-square workspace with six isosceles right
//! triangles (legs of length `s`) and two rectangular obstacles. Only the
//! side lengths are given for the original layout, so the coordinates below
//! are fixture choices: each triangle keeps its centroid when `s` changes.

use rand::seq::{index::sample, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{EnvironmentFile, Point, Rect, RegionFile, SeparationNorm, Workspace};
use crate::rng::{stream, Site};

/// Triangle centroids, indexed by label - 1.
pub const REGION_CENTROIDS: [[f64; 2]; 6] = [
    [0.15, 0.80],
    [0.80, 0.52],
    [0.42, 0.12],
    [0.48, 0.80],
    [0.15, 0.45],
    [0.80, 0.80],
];

/// Obstacles as `[x0, y0, x1, y1]`.
pub const OBSTACLES: [[f64; 4]; 2] = [[0.32, 0.30, 0.44, 0.62], [0.58, 0.26, 0.70, 0.42]];

pub const START: [f64; 2] = [0.8, 0.1];
pub const MIN_SEPARATION: f64 = 0.005;

/// A ready-to-plan task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub environment: EnvironmentFile,
    pub formula: String,
    pub start: Vec<Point>,
    /// Named subformulas `xi_e`, when the task is built from them.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub subformulas: Vec<String>,
}

/// Right angle at bottom-left, legs along +x and +y.
fn triangle(c: [f64; 2], s: f64) -> Vec<Point> {
    let (x, y) = (c[0] - s / 3.0, c[1] - s / 3.0);
    vec![Point::new(x, y), Point::new(x + s, y), Point::new(x, y + s)]
}

/// Environment of the fixture layout for `n_robots` and side `s`.
pub fn environment(s: f64, n_robots: usize) -> EnvironmentFile {
    EnvironmentFile {
        bounds: Rect::unit(),
        obstacles: OBSTACLES
            .iter()
            .map(|&[x0, y0, x1, y1]| vec![Point::new(x0, y0), Point::new(x1, y0), Point::new(x1, y1), Point::new(x0, y1)])
            .collect(),
        regions: REGION_CENTROIDS
            .iter()
            .enumerate()
            .map(|(i, &c)| RegionFile {
                label: i as u32 + 1,
                vertices: triangle(c, s),
            })
            .collect(),
        n_robots,
        min_separation: MIN_SEPARATION,
        separation_norm: SeparationNorm::Chebyshev,
    }
}

/// Single robot: l2 before l1, then l3; l5, l6, l4 in order with l4 not before l5.
pub fn case1(s: f64) -> Scenario {
    Scenario {
        name: format!("case1-s{s}"),
        environment: environment(s, 1),
        formula: "F (pi(1,1) && F pi(1,3)) && (!pi(1,1) U pi(1,2)) && F (pi(1,5) && F (pi(1,6) && F pi(1,4))) && (!pi(1,4) U pi(1,5))".into(),
        start: vec![Point::new(START[0], START[1])],
        subformulas: vec![],
    }
}

/// Two robots with recurring visits and an ordered rendezvous region.
pub fn case2(s: f64) -> Scenario {
    Scenario {
        name: format!("case2-s{s}"),
        environment: environment(s, 2),
        formula: "G F pi(1,1) && G F pi(2,2) && G F (pi(1,4) && F pi(2,4))".into(),
        start: vec![Point::new(START[0] - 0.02, START[1]), Point::new(START[0] + 0.02, START[1])],
        subformulas: vec![],
    }
}

/// Random subteam task: eight conjunctions `xi_e` of `m` atoms each.
///
/// Robots are first dealt into disjoint groups so that every robot appears
/// in some `xi_e`; the remaining subformulas use random subteams. Starts are
/// uniform in free space outside all regions and mutually separated.
pub fn scatter(n_robots: usize, m: usize, seed: u64, s: f64) -> Scenario {
    assert!(m >= 1 && m <= n_robots, "need 1 <= m <= N");
    assert!(8 * m >= n_robots, "eight subformulas of size m cannot cover N robots");
    let mut rng = stream(seed, Site::Scenario);
    let mut order: Vec<usize> = (0..n_robots).collect();
    order.shuffle(&mut rng);
    let mut teams: Vec<Vec<usize>> = Vec::new();
    for chunk in order.chunks(m) {
        let mut team = chunk.to_vec();
        // Top up a short last group with other robots.
        while team.len() < m {
            let r = rng.random_range(0..n_robots);
            if !team.contains(&r) {
                team.push(r);
            }
        }
        teams.push(team);
    }
    while teams.len() < 8 {
        teams.push(sample(&mut rng, n_robots, m).into_vec());
    }
    teams.shuffle(&mut rng);
    let xis: Vec<String> = teams
        .iter()
        .map(|team| {
            let mut atoms: Vec<(usize, u32)> = team.iter().map(|&r| (r + 1, rng.random_range(1..=6u32))).collect();
            atoms.sort_unstable();
            let parts: Vec<String> = atoms.iter().map(|(r, j)| format!("pi({r},{j})")).collect();
            if parts.len() == 1 {
                parts[0].clone()
            } else {
                format!("({})", parts.join(" && "))
            }
        })
        .collect();
    let x = |e: usize| xis[e - 1].as_str();
    let formula = format!(
        "G F {} && G F {} && G F {} && G F ({} && F ({} && F {})) && F {} && G F {} && (!{} U {})",
        x(1),
        x(2),
        x(3),
        x(4),
        x(5),
        x(6),
        x(7),
        x(8),
        x(7),
        x(8)
    );
    let environment = environment(s, n_robots);
    let ws = Workspace::from_file(&environment).expect("fixture environment is valid");
    let mut start: Vec<Point> = Vec::new();
    while start.len() < n_robots {
        let p = Point::new(rng.random_range(0.0..1.0), rng.random_range(0.0..1.0));
        if ws.point_free(p) && ws.label_of(p).is_none() && start.iter().all(|&q| ws.separated(p, q)) {
            start.push(p);
        }
    }
    Scenario {
        name: format!("scatter-n{n_robots}-m{m}-seed{seed}"),
        environment,
        formula,
        start,
        subformulas: xis,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse_ltl, parse_prop};

    #[test]
    fn region_areas() {
        let ws = Workspace::from_file(&environment(0.15, 1)).unwrap();
        for r in ws.regions() {
            assert!((r.polygon.area() - 0.01125).abs() < 1e-12);
        }
    }

    #[test]
    fn layouts_are_valid_for_all_sizes() {
        for s in [0.1, 0.15, 0.2, 0.25] {
            let ws = Workspace::from_file(&environment(s, 2)).unwrap();
            for a in 1..=6 {
                for b in a + 1..=6 {
                    assert!(ws.regions_disjoint(a, b), "s={s}: regions {a} and {b} touch");
                }
                let r = &ws.region(a).polygon;
                for o in ws.obstacles() {
                    assert!(!r.closure_intersects(o), "s={s}: region {a} touches an obstacle");
                }
                assert!(r.vertices().iter().all(|&v| ws.bounds().contains(v)));
            }
            for sc in [case1(s), case2(s)] {
                let w = Workspace::from_file(&sc.environment).unwrap();
                assert!(w.joint_state_valid(&sc.start));
                assert!(sc.start.iter().all(|&p| w.label_of(p).is_none()));
            }
        }
    }

    #[test]
    fn formulas_parse() {
        parse_ltl(&case1(0.15).formula).unwrap();
        parse_ltl(&case2(0.25).formula).unwrap();
    }

    #[test]
    fn scatter_covers_every_robot() {
        for seed in 0..20 {
            for (n, m) in [(2, 1), (4, 1), (8, 2), (8, 3)] {
                let sc = scatter(n, m, seed, 0.15);
                assert_eq!(sc.subformulas.len(), 8);
                let f = parse_ltl(&sc.formula).unwrap();
                let robots: std::collections::BTreeSet<u32> = f.atoms().iter().map(|a| a.robot).collect();
                assert_eq!(robots.len(), n);
                for xi in &sc.subformulas {
                    assert_eq!(parse_prop(xi).unwrap().atoms().len(), m);
                }
                let ws = Workspace::from_file(&sc.environment).unwrap();
                assert!(ws.joint_state_valid(&sc.start));
            }
        }
        assert_eq!(scatter(8, 3, 4, 0.15), scatter(8, 3, 4, 0.15));
    }
}
