//! Small hand-built and seeded instances shared by unit tests, integration
//! tests and the acceptance suite.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::synthetic::{generate_planar, SyntheticConfig};
use crate::index::InfluenceIndex;
use crate::model::{Billboard, GeoPoint, ProbabilityModel, ProblemInstance, Trajectory};

fn board(id: u32, x: f64, y: f64, panel_size: f64, cost: u64) -> Billboard {
    Billboard {
        id,
        location: GeoPoint::new(x, y),
        panel_size,
        cost,
    }
}

fn path(id: u32, points: &[(f64, f64)]) -> Trajectory {
    Trajectory {
        id,
        points: points.iter().map(|&(x, y)| GeoPoint::new(x, y)).collect(),
    }
}

/// Six billboards and twelve trajectories on a 2 km square, λ = 100 m,
/// `size / 20` probabilities, unit-quantum costs. Budget 0.
pub fn d1() -> ProblemInstance {
    let universe = vec![
        board(1, 500.0, 500.0, 4.0, 1),
        board(2, 650.0, 500.0, 6.0, 2),
        board(3, 1500.0, 500.0, 8.0, 3),
        board(4, 1500.0, 1500.0, 10.0, 2),
        board(5, 500.0, 1500.0, 5.0, 2),
        board(6, 1000.0, 1000.0, 12.0, 4),
    ];
    let trajectories = vec![
        path(1, &[(400.0, 500.0), (560.0, 500.0), (700.0, 520.0)]),
        path(2, &[(600.0, 450.0), (600.0, 300.0)]),
        path(3, &[(700.0, 600.0), (660.0, 560.0)]),
        path(4, &[(450.0, 430.0), (300.0, 300.0)]),
        path(
            5,
            &[
                (1450.0, 450.0),
                (1500.0, 800.0),
                (1550.0, 1000.0),
                (1450.0, 1000.0),
                (1080.0, 1000.0),
            ],
        ),
        path(6, &[(1000.0, 940.0), (1000.0, 700.0)]),
        path(7, &[(940.0, 1040.0), (600.0, 1400.0), (540.0, 1460.0)]),
        path(8, &[(1520.0, 1480.0), (1700.0, 1700.0)]),
        path(9, &[(1560.0, 1540.0), (1900.0, 1900.0)]),
        path(10, &[(1200.0, 200.0), (1300.0, 150.0)]),
        path(11, &[(450.0, 1520.0), (300.0, 1700.0)]),
        path(12, &[(1010.0, 1050.0), (1480.0, 1420.0)]),
    ];
    ProblemInstance::new(
        universe,
        trajectories,
        100.0,
        ProbabilityModel::PanelOverA { area: 20.0 },
        0,
    )
    .expect("d1 is valid")
}

/// Six billboards along a line with `cost(b_i) = i` and `size / 10`
/// probabilities, arranged so that b3 reaches t1, t2, t3 and b1 shares t1
/// with it. `{b1, b2, b3}` has influence 1.11.
pub fn line_scenario() -> ProblemInstance {
    let universe = vec![
        board(1, 0.0, 0.0, 1.0, 1),
        board(2, 1000.0, 0.0, 2.0, 2),
        board(3, 500.0, 0.0, 3.0, 3),
        board(4, 2000.0, 0.0, 6.0, 4),
        board(5, 3000.0, 0.0, 5.0, 5),
        board(6, 2500.0, 0.0, 3.0, 6),
    ];
    let trajectories = vec![
        path(1, &[(0.0, 50.0), (500.0, 50.0)]),
        path(2, &[(1000.0, -50.0), (520.0, -40.0)]),
        path(3, &[(480.0, 80.0)]),
        path(4, &[(2000.0, 60.0), (2500.0, 60.0)]),
        path(5, &[(3000.0, -70.0)]),
        path(6, &[(2950.0, 0.0), (2560.0, 30.0)]),
    ];
    ProblemInstance::new(
        universe,
        trajectories,
        100.0,
        ProbabilityModel::PanelOverA { area: 10.0 },
        12,
    )
    .expect("line scenario is valid")
}

/// Two billboards with disjoint audiences: b1 reaches one trajectory at cost 1,
/// b2 reaches `x` trajectories at cost `x + 1`. Unit-greedy prefers b1, the
/// optimum at budget `x + 1` is b2.
pub fn two_billboard_trap(x: u32) -> InfluenceIndex {
    InfluenceIndex::from_forward_lists(vec![
        (1, 1, vec![(0, 1.0)]),
        (2, x as u64 + 1, (1..=x).map(|t| (t, 1.0)).collect()),
    ])
    .expect("valid lists")
}

/// Synthetic configuration behind [`d2`].
pub fn d2_config(seed: u64) -> SyntheticConfig {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x0d2d_2d2d);
    SyntheticConfig {
        width_km: 2.0,
        height_km: 2.0,
        billboards: rng.random_range(12..=16),
        trajectories: rng.random_range(40..=60),
        clusters: rng.random_range(3..=4),
        cluster_spread_m: 220.0,
        cluster_bias: 0.9,
        step_m: 45.0,
        short_fraction: 0.9,
        short_limit_m: 600.0,
        min_length_m: 100.0,
        max_length_m: 1500.0,
        panel_min: 10.0,
        panel_max: 60.0,
        ref_lat: 40.75,
        ref_lng: -73.99,
        seed,
    }
}

/// Seeded desk-scale instance small enough for the exact oracle:
/// 12–16 billboards, 40–60 trajectories, costs 1..=4, λ = 100 m,
/// `size / 100` probabilities.
pub fn d2(seed: u64) -> ProblemInstance {
    let config = d2_config(seed);
    let (mut billboards, trajectories) = generate_planar(&config).expect("d2 config is valid");
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    for b in &mut billboards {
        b.cost = rng.random_range(1..=4);
    }
    ProblemInstance::new(
        billboards,
        trajectories,
        100.0,
        ProbabilityModel::PanelOverA { area: 100.0 },
        0,
    )
    .expect("d2 is valid")
}
