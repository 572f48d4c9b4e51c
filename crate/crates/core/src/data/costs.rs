//! Leasing costs from standalone influence: `⌊β · I({b}) / 100⌋ × 1000`,
//! with β drawn per billboard from U[0.8, 1.2].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::index::InfluenceIndex;
use crate::model::ProblemInstance;

pub const COST_UNIT: u64 = 1000;
pub const BETA_RANGE: (f64, f64) = (0.8, 1.2);

/// Cost for one billboard; a zero result is raised to one unit so every
/// billboard costs something.
pub fn cost_from_influence(influence: f64, beta: f64) -> u64 {
    let units = (beta * influence / 100.0).floor().max(0.0) as u64;
    units.max(1) * COST_UNIT
}

/// One β per billboard, in the given order.
pub fn draw_betas(count: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| rng.random_range(BETA_RANGE.0..=BETA_RANGE.1))
        .collect()
}

/// Copy of `instance` with costs derived from its own standalone influences.
/// β values are drawn in universe order.
pub fn assign_costs(instance: &ProblemInstance, seed: u64) -> ProblemInstance {
    let index = InfluenceIndex::build(instance);
    let betas = draw_betas(instance.universe.len(), seed);
    let mut out = instance.clone();
    for (b, beta) in out.universe.iter_mut().zip(betas) {
        let influence = index.standalone(b.id).expect("billboard is indexed");
        b.cost = cost_from_influence(influence, beta);
    }
    out
}
