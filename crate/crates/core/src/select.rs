//! Per-cluster selectors: cost-effective greedy, enumeration greedy and the
//! greedy upper-bound estimator.
//!
//! All three share one greedy step: among the candidates, take the largest
//! unit marginal influence `Δ(b|S) / cost(b)`, with ties (within [`EPS`])
//! going to the smaller billboard id. Zero-cost candidates rank above every
//! positive-cost one.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::index::{InfluenceIndex, SurvivalCache};
use crate::model::BillboardId;

/// Tolerance for treating two influence values or unit marginals as equal.
pub const EPS: f64 = 1e-12;

/// Candidate positions with their influence.
type Scored = (Vec<usize>, f64);

/// Solver counters. Fields a solver does not use stay zero.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Diagnostics {
    /// Marginal-influence evaluations in greedy steps.
    pub marginal_evaluations: u64,
    /// Candidate sets evaluated by enumeration.
    pub sets_examined: u64,
    pub enum_calls: u64,
    pub estimator_calls: u64,
    pub pruned_cells: u64,
}

impl Diagnostics {
    pub fn absorb(&mut self, other: &Diagnostics) {
        self.marginal_evaluations += other.marginal_evaluations;
        self.sets_examined += other.sets_examined;
        self.enum_calls += other.enum_calls;
        self.estimator_calls += other.estimator_calls;
        self.pruned_cells += other.pruned_cells;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Selection {
    /// Ascending billboard ids.
    pub chosen: Vec<BillboardId>,
    pub cost: u64,
    pub influence: f64,
    pub diagnostics: Diagnostics,
}

impl Selection {
    pub fn empty() -> Self {
        Selection {
            chosen: Vec::new(),
            cost: 0,
            influence: 0.0,
            diagnostics: Diagnostics::default(),
        }
    }

    pub(crate) fn from_positions(
        index: &InfluenceIndex,
        positions: &[usize],
        diagnostics: Diagnostics,
    ) -> Self {
        let mut positions = positions.to_vec();
        positions.sort_unstable();
        positions.dedup();
        Selection {
            chosen: index.ids_at(&positions),
            cost: positions.iter().map(|&p| index.cost_at(p)).sum(),
            influence: index.influence_at(&positions),
            diagnostics,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UpperBound {
    pub value: f64,
    /// The greedy prefix `S'` the bound extrapolates from, ascending ids.
    pub greedy_set: Vec<BillboardId>,
    /// First greedy choice that no longer fit, if any.
    pub k_plus_one: Option<BillboardId>,
}

/// Orders greedy candidates. `tier` 1 is reserved for zero-cost billboards,
/// which compare on raw marginal.
#[derive(Debug, Clone, Copy)]
struct Rank {
    tier: u8,
    value: f64,
}

impl Rank {
    fn of(marginal: f64, cost: u64) -> Self {
        if cost == 0 {
            Rank { tier: 1, value: marginal }
        } else {
            Rank {
                tier: 0,
                value: marginal / cost as f64,
            }
        }
    }

    /// Strictly better; callers scan in ascending id order so equal ranks
    /// keep the smaller id.
    fn beats(&self, other: &Rank) -> bool {
        self.tier > other.tier || (self.tier == other.tier && self.value > other.value + EPS)
    }
}

/// Best candidate not yet in the cache, optionally restricted to those that
/// fit the remaining budget. Returns `(position, marginal)`.
fn best_candidate(
    index: &InfluenceIndex,
    cache: &SurvivalCache,
    candidates: &[usize],
    remaining: Option<u64>,
    diag: &mut Diagnostics,
) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64, Rank)> = None;
    for &pos in candidates {
        if cache.contains_at(pos) {
            continue;
        }
        let cost = index.cost_at(pos);
        if remaining.is_some_and(|r| cost > r) {
            continue;
        }
        let marginal = index.marginal_at(cache, pos);
        diag.marginal_evaluations += 1;
        let rank = Rank::of(marginal, cost);
        if best.as_ref().is_none_or(|b| rank.beats(&b.2)) {
            best = Some((pos, marginal, rank));
        }
    }
    best.map(|(p, m, _)| (p, m))
}

/// The unit-marginal greedy loop: keeps adding the best affordable candidate
/// until nothing fits within `budget` (counted against the cache's cost).
fn greedy_extend(
    index: &InfluenceIndex,
    cache: &mut SurvivalCache,
    candidates: &[usize],
    budget: u64,
    diag: &mut Diagnostics,
) {
    while let Some((pos, _)) = best_candidate(
        index,
        cache,
        candidates,
        Some(budget.saturating_sub(cache.cost())),
        diag,
    ) {
        index.commit_at(cache, pos);
    }
}

pub(crate) fn greedy_at(
    index: &InfluenceIndex,
    cache: &mut SurvivalCache,
    candidates: &[usize],
    budget: u64,
) -> Selection {
    let mut diag = Diagnostics::default();
    cache.reset();
    greedy_extend(index, cache, candidates, budget, &mut diag);
    let greedy: Vec<usize> = cache.member_positions().to_vec();
    let greedy_value = index.influence_at(&sorted(&greedy));

    let mut single: Option<(usize, f64)> = None;
    for &pos in candidates {
        if index.cost_at(pos) <= budget {
            let v = index.standalone_at(pos);
            if single.is_none_or(|(_, best)| v > best + EPS) {
                single = Some((pos, v));
            }
        }
    }
    cache.reset();
    match single {
        Some((pos, v)) if v > greedy_value + EPS => Selection::from_positions(index, &[pos], diag),
        _ => Selection::from_positions(index, &greedy, diag),
    }
}

/// Cost-effective greedy with the best-single-billboard fallback.
pub fn greedy_sel(index: &InfluenceIndex, candidates: &[BillboardId], budget: u64) -> Result<Selection> {
    let positions = index.positions(candidates)?;
    let mut cache = index.new_cache();
    Ok(greedy_at(index, &mut cache, &positions, budget))
}

fn sorted(positions: &[usize]) -> Vec<usize> {
    let mut v = positions.to_vec();
    v.sort_unstable();
    v
}

/// Best feasible set of size at most `tau`, enumerated in lexicographic
/// preorder; replaces the incumbent only on a strict improvement.
fn best_small_set(
    index: &InfluenceIndex,
    candidates: &[usize],
    budget: u64,
    tau: usize,
    diag: &mut Diagnostics,
) -> (Vec<usize>, f64) {
    #[allow(clippy::too_many_arguments)]
    fn visit(
        index: &InfluenceIndex,
        candidates: &[usize],
        start: usize,
        budget: u64,
        tau: usize,
        prefix: &mut Vec<usize>,
        cost: u64,
        best: &mut (Vec<usize>, f64),
        diag: &mut Diagnostics,
    ) {
        for k in start..candidates.len() {
            let pos = candidates[k];
            let c = cost + index.cost_at(pos);
            if c > budget {
                continue;
            }
            prefix.push(pos);
            let v = index.influence_at(prefix);
            diag.sets_examined += 1;
            if v > best.1 + EPS {
                *best = (prefix.clone(), v);
            }
            if prefix.len() < tau {
                visit(index, candidates, k + 1, budget, tau, prefix, c, best, diag);
            }
            prefix.pop();
        }
    }
    let mut best = (Vec::new(), 0.0);
    let mut prefix = Vec::with_capacity(tau);
    visit(index, candidates, 0, budget, tau, &mut prefix, 0, &mut best, diag);
    best
}

/// Seeds of size `size` starting with `candidates[first]`, in lexicographic
/// order, each extended greedily; returns the best extension.
fn best_extension_from(
    index: &InfluenceIndex,
    candidates: &[usize],
    first: usize,
    size: usize,
    budget: u64,
    cache: &mut SurvivalCache,
    diag: &mut Diagnostics,
) -> Option<(Vec<usize>, f64)> {
    let mut best: Option<(Vec<usize>, f64)> = None;
    let mut seed = vec![candidates[first]];
    let first_cost = index.cost_at(candidates[first]);
    if first_cost > budget {
        return None;
    }
    #[allow(clippy::too_many_arguments)]
    fn rec(
        index: &InfluenceIndex,
        candidates: &[usize],
        start: usize,
        size: usize,
        budget: u64,
        seed: &mut Vec<usize>,
        cost: u64,
        cache: &mut SurvivalCache,
        best: &mut Option<(Vec<usize>, f64)>,
        diag: &mut Diagnostics,
    ) {
        if seed.len() == size {
            cache.reset();
            for &p in seed.iter() {
                index.commit_at(cache, p);
            }
            greedy_extend(index, cache, candidates, budget, diag);
            diag.sets_examined += 1;
            let v = cache.total();
            if best.as_ref().is_none_or(|b| v > b.1 + EPS) {
                *best = Some((cache.member_positions().to_vec(), v));
            }
            return;
        }
        for k in start..candidates.len() {
            let pos = candidates[k];
            let c = cost + index.cost_at(pos);
            if c > budget {
                continue;
            }
            seed.push(pos);
            rec(index, candidates, k + 1, size, budget, seed, c, cache, best, diag);
            seed.pop();
        }
    }
    rec(
        index,
        candidates,
        first + 1,
        size,
        budget,
        &mut seed,
        first_cost,
        cache,
        &mut best,
        diag,
    );
    best
}

pub(crate) fn enum_at(
    index: &InfluenceIndex,
    candidates: &[usize],
    budget: u64,
    tau: usize,
) -> Selection {
    let tau = tau.max(1);
    let mut diag = Diagnostics::default();
    let (h1, h1_value) = best_small_set(index, candidates, budget, tau, &mut diag);
    if candidates.len() < tau + 1 {
        return Selection::from_positions(index, &h1, diag);
    }

    // One task per first seed element; merged in ascending order so the
    // result matches a sequential lexicographic scan of the groups.
    let per_first: Vec<(Option<Scored>, Diagnostics)> = (0..candidates.len())
        .into_par_iter()
        .map_init(
            || index.new_cache(),
            |cache, first| {
                let mut d = Diagnostics::default();
                let best =
                    best_extension_from(index, candidates, first, tau + 1, budget, cache, &mut d);
                (best, d)
            },
        )
        .collect();
    let mut h2: Option<(Vec<usize>, f64)> = None;
    for (best, d) in per_first {
        diag.absorb(&d);
        if let Some(b) = best {
            if h2.as_ref().is_none_or(|h| b.1 > h.1 + EPS) {
                h2 = Some(b);
            }
        }
    }
    match h2 {
        Some((set, _)) => {
            let set = sorted(&set);
            let v = index.influence_at(&set);
            if v > h1_value + EPS {
                Selection::from_positions(index, &set, diag)
            } else {
                Selection::from_positions(index, &h1, diag)
            }
        }
        None => Selection::from_positions(index, &h1, diag),
    }
}

/// Enumeration greedy: the best feasible set of at most `tau` billboards
/// versus the best greedy extension of every feasible `tau + 1` seed.
pub fn enum_sel(
    index: &InfluenceIndex,
    candidates: &[BillboardId],
    budget: u64,
    tau: usize,
) -> Result<Selection> {
    let positions = index.positions(candidates)?;
    Ok(enum_at(index, &positions, budget, tau))
}

pub(crate) fn bound_at(
    index: &InfluenceIndex,
    cache: &mut SurvivalCache,
    candidates: &[usize],
    budget: u64,
) -> (UpperBound, Diagnostics) {
    let mut diag = Diagnostics::default();
    cache.reset();
    let result = loop {
        match best_candidate(index, cache, candidates, None, &mut diag) {
            None => {
                let set = sorted(cache.member_positions());
                break UpperBound {
                    value: index.influence_at(&set),
                    greedy_set: index.ids_at(&set),
                    k_plus_one: None,
                };
            }
            Some((pos, marginal)) => {
                let cost = index.cost_at(pos);
                if cache.cost() + cost <= budget {
                    index.commit_at(cache, pos);
                    continue;
                }
                let set = sorted(cache.member_positions());
                let slack = (budget - cache.cost()) as f64;
                break UpperBound {
                    value: index.influence_at(&set) + slack * marginal / cost as f64,
                    greedy_set: index.ids_at(&set),
                    k_plus_one: Some(index.id_at(pos)),
                };
            }
        }
    };
    cache.reset();
    (result, diag)
}

/// Greedy upper estimate `I(S') + (L - cost(S')) * M`, where `S'` is the
/// greedy prefix before the first candidate that does not fit and `M` is
/// that candidate's unit marginal. `I(S')` exactly if nothing ever fails to
/// fit.
pub fn estimate_bound(
    index: &InfluenceIndex,
    candidates: &[BillboardId],
    budget: u64,
) -> Result<UpperBound> {
    let positions = index.positions(candidates)?;
    let mut cache = index.new_cache();
    Ok(bound_at(index, &mut cache, &positions, budget).0)
}
