//! Forward/inverted influence lists over a uniform grid of trajectory points,
//! plus the survival cache that makes marginal-influence queries incremental.
//!
//! Billboards and trajectories are addressed by *position* internally: both are
//! sorted by id when the index is built, so position order and id order agree
//! and "smaller id wins" tie-breaks can be applied on positions directly.

use std::collections::HashMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{distance, BillboardId, GeoPoint, ProblemInstance, Trajectory, TrajectoryId};

/// Uniform grid over trajectory points. Each entry is
/// `(trajectory position, point index, point)`.
/// `(billboard id, cost, [(trajectory id, probability)])`.
pub type ForwardEntry = (BillboardId, u64, Vec<(TrajectoryId, f64)>);

type Cells = HashMap<(i64, i64), Vec<(u32, u32, GeoPoint)>>;

#[derive(Debug, Clone)]
pub struct SpatialGrid {
    cell: f64,
    cells: Cells,
}

impl SpatialGrid {
    pub fn build<'a>(trajectories: impl IntoIterator<Item = &'a Trajectory>, cell: f64) -> Self {
        assert!(cell > 0.0 && cell.is_finite(), "grid cell must be positive");
        let mut cells = Cells::new();
        for (tpos, t) in trajectories.into_iter().enumerate() {
            for (k, &p) in t.points.iter().enumerate() {
                cells
                    .entry(Self::key(cell, p))
                    .or_default()
                    .push((tpos as u32, k as u32, p));
            }
        }
        SpatialGrid { cell, cells }
    }

    fn key(cell: f64, p: GeoPoint) -> (i64, i64) {
        ((p.x / cell).floor() as i64, (p.y / cell).floor() as i64)
    }

    pub fn cell_size(&self) -> f64 {
        self.cell
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn point_count(&self) -> usize {
        self.cells.values().map(Vec::len).sum()
    }

    /// All `(trajectory position, point index)` pairs within `radius` of
    /// `center`, boundary inclusive, sorted. With `radius <= cell size` only
    /// the 3x3 neighbourhood of the center's cell is inspected.
    pub fn range_query(&self, center: GeoPoint, radius: f64) -> Vec<(u32, u32)> {
        let rings = ((radius / self.cell).ceil() as i64).max(1);
        let (cx, cy) = Self::key(self.cell, center);
        let mut hits = Vec::new();
        for dx in -rings..=rings {
            for dy in -rings..=rings {
                if let Some(points) = self.cells.get(&(cx + dx, cy + dy)) {
                    hits.extend(
                        points
                            .iter()
                            .filter(|(_, _, p)| distance(*p, center) <= radius)
                            .map(|&(t, k, _)| (t, k)),
                    );
                }
            }
        }
        hits.sort_unstable();
        hits
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct IndexStats {
    pub billboards: usize,
    pub trajectories: usize,
    pub points: usize,
    pub grid_cells: usize,
    pub forward_entries: usize,
    pub max_forward_len: usize,
    pub mean_forward_len: f64,
    pub build_ms: f64,
}

/// Paired forward (billboard → trajectories) and inverted (trajectory →
/// billboards) influence lists.
#[derive(Debug, Clone)]
pub struct InfluenceIndex {
    billboard_ids: Vec<BillboardId>,
    costs: Vec<u64>,
    trajectory_ids: Vec<TrajectoryId>,
    position: HashMap<BillboardId, usize>,
    forward: Vec<Vec<(u32, f64)>>,
    inverted: Vec<Vec<(u32, f64)>>,
    standalone: Vec<f64>,
    stats: IndexStats,
}

impl InfluenceIndex {
    /// Builds the lists with one circular range query per billboard.
    pub fn build(instance: &ProblemInstance) -> Self {
        let started = Instant::now();
        let mut trajectories: Vec<&Trajectory> = instance.trajectories.iter().collect();
        trajectories.sort_by_key(|t| t.id);
        let grid = SpatialGrid::build(trajectories.iter().copied(), instance.lambda);

        let mut billboards: Vec<_> = instance.universe.iter().collect();
        billboards.sort_by_key(|b| b.id);
        let max_panel = instance.max_panel();
        let forward: Vec<Vec<(u32, f64)>> = billboards
            .par_iter()
            .map(|b| {
                let p = instance.model.meeting_probability(b.panel_size, max_panel);
                let mut hits: Vec<u32> = grid
                    .range_query(b.location, instance.lambda)
                    .into_iter()
                    .map(|(t, _)| t)
                    .collect();
                // one entry per trajectory, however many of its points meet
                hits.dedup();
                hits.into_iter().map(|t| (t, p)).collect()
            })
            .collect();

        let mut index = Self::assemble(
            billboards.iter().map(|b| b.id).collect(),
            billboards.iter().map(|b| b.cost).collect(),
            trajectories.iter().map(|t| t.id).collect(),
            forward,
        );
        index.stats.points = grid.point_count();
        index.stats.grid_cells = grid.cell_count();
        index.stats.build_ms = started.elapsed().as_secs_f64() * 1e3;
        index
    }

    /// Builds an index from explicit forward lists, bypassing geometry.
    pub fn from_forward_lists(
        entries: Vec<ForwardEntry>,
    ) -> Result<Self> {
        let mut entries = entries;
        entries.sort_by_key(|e| e.0);
        if entries.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidInstance("duplicate billboard id".into()));
        }
        let mut trajectory_ids: Vec<TrajectoryId> = entries
            .iter()
            .flat_map(|e| e.2.iter().map(|&(t, _)| t))
            .collect();
        trajectory_ids.sort_unstable();
        trajectory_ids.dedup();
        let tpos: HashMap<TrajectoryId, u32> = trajectory_ids
            .iter()
            .enumerate()
            .map(|(i, &t)| (t, i as u32))
            .collect();
        let mut forward = Vec::with_capacity(entries.len());
        for (id, _, list) in &entries {
            let mut mapped = Vec::with_capacity(list.len());
            for &(t, p) in list {
                if !(p > 0.0 && p <= 1.0) {
                    return Err(Error::InvalidModel(format!(
                        "probability {p} for billboard {id} outside (0, 1]"
                    )));
                }
                mapped.push((tpos[&t], p));
            }
            mapped.sort_by_key(|e| e.0);
            if mapped.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(Error::InvalidInstance(format!(
                    "billboard {id} lists a trajectory twice"
                )));
            }
            forward.push(mapped);
        }
        Ok(Self::assemble(
            entries.iter().map(|e| e.0).collect(),
            entries.iter().map(|e| e.1).collect(),
            trajectory_ids,
            forward,
        ))
    }

    fn assemble(
        billboard_ids: Vec<BillboardId>,
        costs: Vec<u64>,
        trajectory_ids: Vec<TrajectoryId>,
        forward: Vec<Vec<(u32, f64)>>,
    ) -> Self {
        let mut inverted = vec![Vec::new(); trajectory_ids.len()];
        for (bpos, list) in forward.iter().enumerate() {
            for &(t, p) in list {
                inverted[t as usize].push((bpos as u32, p));
            }
        }
        let standalone = forward
            .iter()
            .map(|list| list.iter().map(|&(_, p)| p).sum())
            .collect();
        let position = billboard_ids
            .iter()
            .enumerate()
            .map(|(i, &id)| (id, i))
            .collect();
        let entries: usize = forward.iter().map(Vec::len).sum();
        let stats = IndexStats {
            billboards: billboard_ids.len(),
            trajectories: trajectory_ids.len(),
            forward_entries: entries,
            max_forward_len: forward.iter().map(Vec::len).max().unwrap_or(0),
            mean_forward_len: if forward.is_empty() {
                0.0
            } else {
                entries as f64 / forward.len() as f64
            },
            ..IndexStats::default()
        };
        InfluenceIndex {
            billboard_ids,
            costs,
            trajectory_ids,
            position,
            forward,
            inverted,
            standalone,
            stats,
        }
    }

    pub fn stats(&self) -> &IndexStats {
        &self.stats
    }

    /// Billboard ids in ascending order.
    pub fn billboard_ids(&self) -> &[BillboardId] {
        &self.billboard_ids
    }

    pub fn trajectory_ids(&self) -> &[TrajectoryId] {
        &self.trajectory_ids
    }

    pub fn billboard_count(&self) -> usize {
        self.billboard_ids.len()
    }

    pub fn trajectory_count(&self) -> usize {
        self.trajectory_ids.len()
    }

    pub fn position(&self, id: BillboardId) -> Result<usize> {
        self.position
            .get(&id)
            .copied()
            .ok_or(Error::UnknownBillboard(id))
    }

    pub(crate) fn positions(&self, ids: &[BillboardId]) -> Result<Vec<usize>> {
        let mut out = ids
            .iter()
            .map(|&id| self.position(id))
            .collect::<Result<Vec<_>>>()?;
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }

    pub(crate) fn id_at(&self, pos: usize) -> BillboardId {
        self.billboard_ids[pos]
    }

    pub(crate) fn ids_at(&self, positions: &[usize]) -> Vec<BillboardId> {
        let mut ids: Vec<_> = positions.iter().map(|&p| self.billboard_ids[p]).collect();
        ids.sort_unstable();
        ids
    }

    pub(crate) fn cost_at(&self, pos: usize) -> u64 {
        self.costs[pos]
    }

    pub fn cost(&self, id: BillboardId) -> Result<u64> {
        Ok(self.costs[self.position(id)?])
    }

    pub fn total_cost(&self, ids: &[BillboardId]) -> Result<u64> {
        Ok(self
            .positions(ids)?
            .into_iter()
            .map(|p| self.costs[p])
            .sum())
    }

    pub(crate) fn forward_at(&self, pos: usize) -> &[(u32, f64)] {
        &self.forward[pos]
    }

    /// Trajectories influenced by `id`, as `(trajectory id, probability)`
    /// sorted by trajectory id.
    pub fn forward(&self, id: BillboardId) -> Result<Vec<(TrajectoryId, f64)>> {
        let pos = self.position(id)?;
        Ok(self.forward[pos]
            .iter()
            .map(|&(t, p)| (self.trajectory_ids[t as usize], p))
            .collect())
    }

    /// Billboards influencing trajectory `id`, sorted by billboard id. Empty for
    /// unknown or unreached trajectories.
    pub fn inverted(&self, id: TrajectoryId) -> Vec<(BillboardId, f64)> {
        match self.trajectory_ids.binary_search(&id) {
            Ok(t) => self.inverted[t]
                .iter()
                .map(|&(b, p)| (self.billboard_ids[b as usize], p))
                .collect(),
            Err(_) => Vec::new(),
        }
    }

    /// Number of trajectories the billboard meets.
    pub fn reach(&self, id: BillboardId) -> Result<usize> {
        Ok(self.forward[self.position(id)?].len())
    }

    pub(crate) fn reach_at(&self, pos: usize) -> usize {
        self.forward[pos].len()
    }

    /// `I({b})`.
    pub fn standalone(&self, id: BillboardId) -> Result<f64> {
        Ok(self.standalone[self.position(id)?])
    }

    pub(crate) fn standalone_at(&self, pos: usize) -> f64 {
        self.standalone[pos]
    }

    /// `I(S)`, touching only trajectories in the union of the forward lists
    /// of `S`.
    pub fn influence(&self, set: &[BillboardId]) -> Result<f64> {
        Ok(self.influence_at(&self.positions(set)?))
    }

    /// `positions` must be free of duplicates.
    pub(crate) fn influence_at(&self, positions: &[usize]) -> f64 {
        survival_by_trajectory(self, positions)
            .into_iter()
            .map(|(_, s)| 1.0 - s)
            .sum()
    }

    pub fn new_cache(&self) -> SurvivalCache {
        SurvivalCache {
            selected: vec![false; self.billboard_ids.len()],
            members: Vec::new(),
            survival: vec![1.0; self.trajectory_ids.len()],
            touched: Vec::new(),
            total: 0.0,
            cost: 0,
        }
    }

    /// `I(S ∪ {b}) - I(S)` for the cache's current set `S`.
    pub fn marginal(&self, cache: &SurvivalCache, id: BillboardId) -> Result<f64> {
        let pos = self.position(id)?;
        if cache.selected[pos] {
            return Err(Error::AlreadySelected(id));
        }
        Ok(self.marginal_at(cache, pos))
    }

    pub(crate) fn marginal_at(&self, cache: &SurvivalCache, pos: usize) -> f64 {
        self.forward[pos]
            .iter()
            .map(|&(t, p)| cache.survival[t as usize] * p)
            .sum()
    }

    /// Adds `id` to the cache's set and returns the marginal gain applied.
    pub fn commit(&self, cache: &mut SurvivalCache, id: BillboardId) -> Result<f64> {
        let pos = self.position(id)?;
        if cache.selected[pos] {
            return Err(Error::AlreadySelected(id));
        }
        Ok(self.commit_at(cache, pos))
    }

    pub(crate) fn commit_at(&self, cache: &mut SurvivalCache, pos: usize) -> f64 {
        debug_assert!(!cache.selected[pos]);
        let mut gain = 0.0;
        for &(t, p) in &self.forward[pos] {
            let s = &mut cache.survival[t as usize];
            if *s == 1.0 {
                cache.touched.push(t);
            }
            gain += *s * p;
            *s *= 1.0 - p;
        }
        cache.selected[pos] = true;
        cache.members.push(pos);
        cache.total += gain;
        cache.cost += self.costs[pos];
        gain
    }
}

/// Survival products `prod(1 - p)` per touched trajectory position, in
/// ascending trajectory order.
pub(crate) fn survival_by_trajectory(index: &InfluenceIndex, positions: &[usize]) -> Vec<(u32, f64)> {
    let mut entries: Vec<(u32, f64)> = positions
        .iter()
        .flat_map(|&b| index.forward_at(b).iter().copied())
        .collect();
    // stable: products per trajectory multiply in billboard order
    entries.sort_by_key(|e| e.0);
    let mut out: Vec<(u32, f64)> = Vec::new();
    for (t, p) in entries {
        match out.last_mut() {
            Some((last, s)) if *last == t => *s *= 1.0 - p,
            _ => out.push((t, 1.0 - p)),
        }
    }
    out
}

/// Mutable working set for incremental marginal evaluation: the current set
/// `S`, per-trajectory survival products `prod_{b in S}(1 - pr(b, t))` and
/// the running total `I(S)`.
#[derive(Debug, Clone)]
pub struct SurvivalCache {
    selected: Vec<bool>,
    members: Vec<usize>,
    survival: Vec<f64>,
    touched: Vec<u32>,
    total: f64,
    cost: u64,
}

impl SurvivalCache {
    /// Running `I(S)`.
    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn cost(&self) -> u64 {
        self.cost
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Member ids, ascending.
    pub fn members(&self, index: &InfluenceIndex) -> Vec<BillboardId> {
        index.ids_at(&self.members)
    }

    pub(crate) fn member_positions(&self) -> &[usize] {
        &self.members
    }

    pub(crate) fn contains_at(&self, pos: usize) -> bool {
        self.selected[pos]
    }

    pub fn contains(&self, index: &InfluenceIndex, id: BillboardId) -> bool {
        index
            .position(id)
            .map(|p| self.selected[p])
            .unwrap_or(false)
    }

    /// Survival product of a trajectory; 1 for trajectories `S` does not reach.
    pub fn survival(&self, index: &InfluenceIndex, id: TrajectoryId) -> f64 {
        match index.trajectory_ids.binary_search(&id) {
            Ok(t) => self.survival[t],
            Err(_) => 1.0,
        }
    }

    /// Empties the set, restoring only the trajectories it touched.
    pub(crate) fn reset(&mut self) {
        for &t in &self.touched {
            self.survival[t as usize] = 1.0;
        }
        for &b in &self.members {
            self.selected[b] = false;
        }
        self.touched.clear();
        self.members.clear();
        self.total = 0.0;
        self.cost = 0;
    }
}
