//! Reference solvers: traffic-volume TopK, simulated annealing and the
//! exhaustive optimum used as ground truth in tests.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index::InfluenceIndex;
use crate::model::BillboardId;
use crate::select::{Diagnostics, Selection, EPS};

/// Largest candidate set [`exact_opt`] accepts by default.
pub const DEFAULT_EXACT_CAP: usize = 20;

/// Adds billboards in descending order of reached trajectories (ties: smaller
/// id) whenever they still fit.
pub fn top_k(index: &InfluenceIndex, candidates: &[BillboardId], budget: u64) -> Result<Selection> {
    let mut order = index.positions(candidates)?;
    order.sort_by_key(|&p| (std::cmp::Reverse(index.reach_at(p)), p));
    let mut chosen = Vec::new();
    let mut spent = 0;
    for p in order {
        let c = index.cost_at(p);
        if spent + c <= budget {
            spent += c;
            chosen.push(p);
        }
    }
    Ok(Selection::from_positions(index, &chosen, Diagnostics::default()))
}

/// Depth-first walk over feasible subsets in lexicographic order, keeping
/// the running influence in a survival vector with an undo log.
struct Enumerator<'a> {
    index: &'a InfluenceIndex,
    candidates: &'a [usize],
    max_budget: u64,
    survival: Vec<f64>,
    prefix: Vec<usize>,
    visited: u64,
}

impl Enumerator<'_> {
    fn walk(&mut self, start: usize, cost: u64, value: f64, visit: &mut dyn FnMut(&[usize], u64, f64)) {
        for k in start..self.candidates.len() {
            let pos = self.candidates[k];
            let c = cost + self.index.cost_at(pos);
            if c > self.max_budget {
                continue;
            }
            let list = self.index.forward_at(pos);
            let mut saved = Vec::with_capacity(list.len());
            let mut gain = 0.0;
            for &(t, p) in list {
                let s = &mut self.survival[t as usize];
                saved.push(*s);
                gain += *s * p;
                *s *= 1.0 - p;
            }
            self.prefix.push(pos);
            self.visited += 1;
            visit(&self.prefix, c, value + gain);
            self.walk(k + 1, c, value + gain, visit);
            self.prefix.pop();
            for (&(t, _), s) in list.iter().zip(saved) {
                self.survival[t as usize] = s;
            }
        }
    }
}

fn enumerate(
    index: &InfluenceIndex,
    candidates: &[BillboardId],
    max_budget: u64,
    cap: usize,
    mut visit: impl FnMut(&[usize], u64, f64),
) -> Result<u64> {
    let positions = index.positions(candidates)?;
    if positions.len() > cap {
        return Err(Error::TooLarge {
            size: positions.len(),
            cap,
        });
    }
    let mut e = Enumerator {
        index,
        candidates: &positions,
        max_budget,
        survival: vec![1.0; index.trajectory_count()],
        prefix: Vec::new(),
        visited: 0,
    };
    e.walk(0, 0, 0.0, &mut visit);
    Ok(e.visited)
}

/// Maximum-influence feasible subset by exhaustive search; ties go to the
/// lexicographically smallest set. Refuses more than `cap` candidates.
pub fn exact_opt(
    index: &InfluenceIndex,
    candidates: &[BillboardId],
    budget: u64,
    cap: usize,
) -> Result<Selection> {
    Ok(exact_opt_curve(index, candidates, budget, cap)?.pop().expect("non-empty curve"))
}

/// `OPT(L)` for every `L` in `0..=max_budget` from a single enumeration.
pub fn exact_opt_curve(
    index: &InfluenceIndex,
    candidates: &[BillboardId],
    max_budget: u64,
    cap: usize,
) -> Result<Vec<Selection>> {
    let n = max_budget as usize + 1;
    let mut best: Vec<(f64, Vec<usize>)> = vec![(0.0, Vec::new()); n];
    let visited = enumerate(index, candidates, max_budget, cap, |set, cost, value| {
        for slot in &mut best[cost as usize..] {
            if value > slot.0 + EPS {
                *slot = (value, set.to_vec());
            }
        }
    })?;
    let diag = Diagnostics {
        sets_examined: visited,
        ..Diagnostics::default()
    };
    Ok(best
        .into_iter()
        .map(|(_, set)| Selection::from_positions(index, &set, diag))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnealParams {
    /// Defaults to a tenth of the TopK influence at the same budget.
    pub initial_temperature: Option<f64>,
    pub cooling: f64,
    pub iterations_per_level: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Cooling stops once the temperature falls below this fraction of the
    /// initial one.
    pub min_temperature_ratio: f64,
}

impl Default for AnnealParams {
    fn default() -> Self {
        AnnealParams {
            initial_temperature: None,
            cooling: 0.95,
            iterations_per_level: 200,
            restarts: 10,
            seed: 0,
            min_temperature_ratio: 1e-3,
        }
    }
}

impl AnnealParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.cooling > 0.0 && self.cooling < 1.0) {
            return Err(Error::Config("cooling factor must lie in (0, 1)".into()));
        }
        if self.restarts == 0 {
            return Err(Error::Config("at least one restart is required".into()));
        }
        if self.initial_temperature.is_some_and(|t| !(t > 0.0 && t.is_finite())) {
            return Err(Error::Config("initial temperature must be positive".into()));
        }
        if !(self.min_temperature_ratio > 0.0 && self.min_temperature_ratio < 1.0) {
            return Err(Error::Config("minimum temperature ratio must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

struct Walk<'a> {
    index: &'a InfluenceIndex,
    candidates: &'a [usize],
    budget: u64,
    inside: Vec<bool>,
    members: Vec<usize>,
    cost: u64,
    value: f64,
    evaluations: u64,
}

impl<'a> Walk<'a> {
    fn random_start(
        index: &'a InfluenceIndex,
        candidates: &'a [usize],
        budget: u64,
        rng: &mut ChaCha8Rng,
    ) -> Self {
        let mut order = candidates.to_vec();
        order.shuffle(rng);
        let mut walk = Walk {
            index,
            candidates,
            budget,
            inside: vec![false; index.billboard_count()],
            members: Vec::new(),
            cost: 0,
            value: 0.0,
            evaluations: 0,
        };
        let take = rng.random_range(0..=order.len());
        for p in order.into_iter().take(take) {
            if walk.cost + index.cost_at(p) <= budget {
                walk.inside[p] = true;
                walk.members.push(p);
                walk.cost += index.cost_at(p);
            }
        }
        walk.value = walk.evaluate(&walk.members.clone());
        walk
    }

    fn evaluate(&mut self, members: &[usize]) -> f64 {
        self.evaluations += 1;
        let mut sorted = members.to_vec();
        sorted.sort_unstable();
        self.index.influence_at(&sorted)
    }

    /// A random add, remove or swap that stays within budget, as
    /// `(outgoing, incoming)`.
    fn propose(&self, rng: &mut ChaCha8Rng) -> Option<(Option<usize>, Option<usize>)> {
        let room = self.budget - self.cost;
        match rng.random_range(0..3) {
            0 => {
                let options: Vec<usize> = self
                    .candidates
                    .iter()
                    .copied()
                    .filter(|&p| !self.inside[p] && self.index.cost_at(p) <= room)
                    .collect();
                (!options.is_empty()).then(|| (None, Some(options[rng.random_range(0..options.len())])))
            }
            1 => (!self.members.is_empty())
                .then(|| (Some(self.members[rng.random_range(0..self.members.len())]), None)),
            _ => {
                if self.members.is_empty() {
                    return None;
                }
                let out = self.members[rng.random_range(0..self.members.len())];
                let room = room + self.index.cost_at(out);
                let options: Vec<usize> = self
                    .candidates
                    .iter()
                    .copied()
                    .filter(|&p| !self.inside[p] && self.index.cost_at(p) <= room)
                    .collect();
                (!options.is_empty())
                    .then(|| (Some(out), Some(options[rng.random_range(0..options.len())])))
            }
        }
    }

    fn apply(&mut self, out: Option<usize>, inc: Option<usize>, value: f64) {
        if let Some(o) = out {
            self.inside[o] = false;
            self.members.retain(|&m| m != o);
            self.cost -= self.index.cost_at(o);
        }
        if let Some(i) = inc {
            self.inside[i] = true;
            self.members.push(i);
            self.cost += self.index.cost_at(i);
        }
        self.value = value;
    }
}

fn anneal_once(
    index: &InfluenceIndex,
    candidates: &[usize],
    budget: u64,
    params: &AnnealParams,
    t0: f64,
    restart: u64,
) -> (f64, Vec<usize>, u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    rng.set_stream(restart);
    let mut walk = Walk::random_start(index, candidates, budget, &mut rng);
    let mut best = (walk.value, walk.members.clone());
    let floor = t0 * params.min_temperature_ratio;
    let mut temperature = t0;
    while params.iterations_per_level > 0 && temperature >= floor {
        for _ in 0..params.iterations_per_level {
            let Some((out, inc)) = walk.propose(&mut rng) else {
                continue;
            };
            let mut next = walk.members.clone();
            if let Some(o) = out {
                next.retain(|&m| m != o);
            }
            next.extend(inc);
            let value = walk.evaluate(&next);
            let delta = value - walk.value;
            if delta >= 0.0 || rng.random::<f64>() < (delta / temperature).exp() {
                walk.apply(out, inc, value);
                if walk.value > best.0 + EPS {
                    best = (walk.value, walk.members.clone());
                }
            }
        }
        temperature *= params.cooling;
    }
    (best.0, best.1, walk.evaluations)
}

/// Seeded simulated annealing over feasible sets; restarts run in parallel
/// and the best one wins (ties: lower restart index).
pub fn simulated_annealing(
    index: &InfluenceIndex,
    candidates: &[BillboardId],
    budget: u64,
    params: &AnnealParams,
) -> Result<Selection> {
    params.validate()?;
    let positions = index.positions(candidates)?;
    let t0 = match params.initial_temperature {
        Some(t) => t,
        None => (top_k(index, candidates, budget)?.influence / 10.0).max(1e-9),
    };
    let runs: Vec<(f64, Vec<usize>, u64)> = (0..params.restarts as u64)
        .into_par_iter()
        .map(|r| anneal_once(index, &positions, budget, params, t0, r))
        .collect();
    let mut diag = Diagnostics::default();
    let mut best: Option<&(f64, Vec<usize>, u64)> = None;
    for run in &runs {
        diag.sets_examined += run.2;
        if best.is_none_or(|b| run.0 > b.0 + EPS) {
            best = Some(run);
        }
    }
    Ok(Selection::from_positions(index, &best.expect("restarts >= 1").1, diag))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    const D1_OPT: [(f64, &[BillboardId]); 11] = [
        (0.0, &[]),
        (0.4, &[1]),
        (1.5, &[4]),
        (1.9, &[1, 4]),
        (2.4, &[2, 4]),
        (2.8, &[1, 6]),
        (3.6, &[4, 6]),
        (4.0, &[1, 4, 6]),
        (4.5, &[2, 4, 6]),
        (4.84, &[1, 2, 4, 6]),
        (4.85, &[2, 4, 5, 6]),
    ];

    #[test]
    fn exact_curve_matches_golden() {
        let index = InfluenceIndex::build(&fixtures::d1());
        let curve = exact_opt_curve(&index, index.billboard_ids(), 10, DEFAULT_EXACT_CAP).unwrap();
        for (l, (value, set)) in D1_OPT.iter().enumerate() {
            assert!((curve[l].influence - value).abs() < 1e-9, "L={l}");
            assert_eq!(curve[l].chosen, *set, "L={l}");
            let single = exact_opt(&index, index.billboard_ids(), l as u64, 20).unwrap();
            assert_eq!(single.chosen, curve[l].chosen);
        }
    }

    #[test]
    fn exact_on_trap_picks_b2() {
        let index = fixtures::two_billboard_trap(10);
        assert_eq!(exact_opt(&index, &[1, 2], 11, 20).unwrap().chosen, vec![2]);
        assert_eq!(exact_opt(&index, &[2], 11, 20).unwrap().chosen, vec![2]);
    }

    #[test]
    fn exact_refuses_large_sets() {
        let index = InfluenceIndex::build(&fixtures::d1());
        assert!(matches!(
            exact_opt(&index, index.billboard_ids(), 3, 5),
            Err(Error::TooLarge { size: 6, cap: 5 })
        ));
    }

    #[test]
    fn top_k_d1() {
        let index = InfluenceIndex::build(&fixtures::d1());
        let all = index.billboard_ids();
        assert!(top_k(&index, all, 0).unwrap().chosen.is_empty());
        let s = top_k(&index, all, 5).unwrap();
        // reach: b6 4, b2 3, b4 3, b1 2, b5 2, b3 1
        assert_eq!(s.chosen, vec![1, 6]);
        assert!((s.influence - 2.8).abs() < 1e-9);
        assert_eq!(top_k(&index, all, 14).unwrap().chosen, all);
    }

    #[test]
    fn annealing_generous_budget_reaches_everything() {
        let index = InfluenceIndex::build(&fixtures::d1());
        let all = index.billboard_ids();
        let params = AnnealParams {
            seed: 7,
            ..AnnealParams::default()
        };
        let s = simulated_annealing(&index, all, 14, &params).unwrap();
        assert!((s.influence - index.influence(all).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn annealing_without_iterations_keeps_a_random_start() {
        let index = InfluenceIndex::build(&fixtures::d1());
        let params = AnnealParams {
            iterations_per_level: 0,
            restarts: 3,
            seed: 1,
            ..AnnealParams::default()
        };
        let s = simulated_annealing(&index, index.billboard_ids(), 5, &params).unwrap();
        assert!(s.cost <= 5);
        assert_eq!(s.diagnostics.sets_examined, 3);
    }

    #[test]
    fn annealing_is_deterministic_and_beats_top_k_on_d1() {
        let index = InfluenceIndex::build(&fixtures::d1());
        let all = index.billboard_ids();
        let params = AnnealParams {
            seed: 42,
            ..AnnealParams::default()
        };
        for budget in 0..=10 {
            let a = simulated_annealing(&index, all, budget, &params).unwrap();
            let b = simulated_annealing(&index, all, budget, &params).unwrap();
            assert_eq!(a, b);
            assert!(a.cost <= budget);
            assert!(a.influence + 1e-9 >= top_k(&index, all, budget).unwrap().influence);
        }
    }

    #[test]
    fn bad_params_are_rejected() {
        let bad = AnnealParams {
            cooling: 1.0,
            ..AnnealParams::default()
        };
        assert!(bad.validate().is_err());
    }
}
