//! Budget allocation across clusters by dynamic programming, with and without
//! bound-based pruning of local solves.
//!
//! `Θ[i][l]` is the best total of local solutions over the first `i` clusters
//! within `l` budget cells, ignoring overlap between clusters:
//! `Θ[i][l] = max_q Θ[i-1][l-q] + ψ[i][q]`, ties to the smallest `q`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::index::InfluenceIndex;
use crate::model::BillboardId;
use crate::partition::Partition;
use crate::select::{bound_at, enum_at, Diagnostics, Selection};

/// Upper limit on budget cells; finer grids point at an unsuitable quantum.
pub const MAX_CELLS: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BudgetGrid {
    pub quantum: u64,
    /// Number of budget cells above zero, `L / quantum`.
    pub cells: usize,
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl BudgetGrid {
    /// Quantum = gcd of all costs and the budget (1 if all are zero).
    pub fn new(costs: impl IntoIterator<Item = u64>, budget: u64) -> Result<Self> {
        let quantum = costs.into_iter().fold(budget, gcd).max(1);
        Self::with_quantum(quantum, std::iter::empty(), budget)
    }

    /// Uses an explicit quantum, which must divide every cost and the budget.
    pub fn with_quantum(
        quantum: u64,
        costs: impl IntoIterator<Item = u64>,
        budget: u64,
    ) -> Result<Self> {
        if quantum == 0 {
            return Err(Error::Config("budget quantum must be positive".into()));
        }
        if !budget.is_multiple_of(quantum) {
            return Err(Error::Quantization {
                quantum,
                what: "budget".into(),
                value: budget,
            });
        }
        if let Some(c) = costs.into_iter().find(|c| c % quantum != 0) {
            return Err(Error::Quantization {
                quantum,
                what: "a billboard cost".into(),
                value: c,
            });
        }
        let cells = budget / quantum;
        if cells > MAX_CELLS {
            return Err(Error::Config(format!(
                "{cells} budget cells at quantum {quantum}; costs share too small a divisor"
            )));
        }
        Ok(BudgetGrid {
            quantum,
            cells: cells as usize,
        })
    }

    pub fn budget(&self, cells: usize) -> u64 {
        cells as u64 * self.quantum
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalSolution {
    pub value: f64,
    /// Ascending billboard ids.
    pub chosen: Vec<BillboardId>,
}

impl LocalSolution {
    pub fn empty() -> Self {
        LocalSolution {
            value: 0.0,
            chosen: Vec::new(),
        }
    }
}

/// Source of local solutions `ψ[i][q]` and their estimates `ψ↑[i][q]`.
/// Budgets are in currency units.
pub trait ClusterOracle: Sync {
    fn clusters(&self) -> usize;
    fn solve(&self, cluster: usize, budget: u64) -> LocalSolution;
    fn bound(&self, cluster: usize, budget: u64) -> f64;
}

/// Local solves with enumeration greedy, estimates with the greedy bound.
pub struct IndexOracle<'a> {
    index: &'a InfluenceIndex,
    clusters: Vec<Vec<usize>>,
    tau: usize,
}

impl<'a> IndexOracle<'a> {
    pub fn new(index: &'a InfluenceIndex, partition: &Partition, tau: usize) -> Result<Self> {
        partition.check_cover(index)?;
        let clusters = partition
            .clusters
            .iter()
            .map(|c| index.positions(&c.members))
            .collect::<Result<_>>()?;
        Ok(IndexOracle {
            index,
            clusters,
            tau,
        })
    }
}

impl ClusterOracle for IndexOracle<'_> {
    fn clusters(&self) -> usize {
        self.clusters.len()
    }

    fn solve(&self, cluster: usize, budget: u64) -> LocalSolution {
        let s = enum_at(self.index, &self.clusters[cluster], budget, self.tau);
        LocalSolution {
            value: s.influence,
            chosen: s.chosen,
        }
    }

    fn bound(&self, cluster: usize, budget: u64) -> f64 {
        let mut cache = self.index.new_cache();
        bound_at(self.index, &mut cache, &self.clusters[cluster], budget)
            .0
            .value
    }
}

/// Fixed tables, one row per cluster indexed by budget `0..`. Budgets past
/// the end of a row reuse its last entry.
#[derive(Debug, Clone)]
pub struct TableOracle {
    pub solutions: Vec<Vec<LocalSolution>>,
    pub bounds: Vec<Vec<f64>>,
}

impl TableOracle {
    /// Rows start at budget 1; budget 0 is the empty solution. Bounds default
    /// to the solution values.
    pub fn from_rows(rows: Vec<Vec<(f64, Vec<BillboardId>)>>) -> Self {
        let solutions: Vec<Vec<LocalSolution>> = rows
            .into_iter()
            .map(|row| {
                std::iter::once(LocalSolution::empty())
                    .chain(row.into_iter().map(|(value, chosen)| LocalSolution { value, chosen }))
                    .collect()
            })
            .collect();
        let bounds = solutions
            .iter()
            .map(|row| row.iter().map(|s| s.value).collect())
            .collect();
        TableOracle { solutions, bounds }
    }

    /// Replaces the bound row of `cluster`; index 0 is budget 0.
    pub fn with_bounds(mut self, cluster: usize, bounds: Vec<f64>) -> Self {
        self.bounds[cluster] = bounds;
        self
    }
}

fn at<T: Clone>(row: &[T], budget: u64) -> T {
    row[(budget as usize).min(row.len() - 1)].clone()
}

impl ClusterOracle for TableOracle {
    fn clusters(&self) -> usize {
        self.solutions.len()
    }

    fn solve(&self, cluster: usize, budget: u64) -> LocalSolution {
        at(&self.solutions[cluster], budget)
    }

    fn bound(&self, cluster: usize, budget: u64) -> f64 {
        at(&self.bounds[cluster], budget)
    }
}

/// Tables behind one DP run, indexed `[cluster row][budget cell]`. Row 0 of
/// `theta` is the empty prefix; `psi` rows start at cluster 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DpMatrices {
    pub quantum: u64,
    pub psi: Vec<Vec<Option<f64>>>,
    pub psi_upper: Vec<Vec<Option<f64>>>,
    pub theta: Vec<Vec<f64>>,
    /// Cells of cluster `i` used by `Θ[i][l]`; `None` when cluster `i` got
    /// nothing without a local solve.
    pub traceback: Vec<Vec<Option<usize>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Allocation {
    /// Position of the cluster in the partition.
    pub cluster: usize,
    pub budget: u64,
    pub value: f64,
    pub chosen: Vec<BillboardId>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DpOutcome {
    /// `Θ[m][L]`: sum of local values, no overlap correction.
    pub value: f64,
    pub chosen: Vec<BillboardId>,
    pub allocation: Vec<Allocation>,
    pub diagnostics: Diagnostics,
    pub matrices: DpMatrices,
}

struct Tables {
    psi: Vec<BTreeMap<usize, LocalSolution>>,
    psi_upper: Vec<BTreeMap<usize, f64>>,
    theta: Vec<Vec<f64>>,
    choice: Vec<Vec<Option<usize>>>,
}

impl Tables {
    fn new(m: usize, cells: usize) -> Self {
        Tables {
            psi: vec![BTreeMap::new(); m],
            psi_upper: vec![BTreeMap::new(); m],
            theta: vec![vec![0.0; cells + 1]; m + 1],
            choice: vec![vec![None; cells + 1]; m + 1],
        }
    }

    fn finish(self, grid: &BudgetGrid, diagnostics: Diagnostics) -> DpOutcome {
        let m = self.psi.len();
        let mut allocation = Vec::new();
        let mut l = grid.cells;
        for i in (1..=m).rev() {
            if let Some(q) = self.choice[i][l] {
                let s = &self.psi[i - 1][&q];
                if !s.chosen.is_empty() {
                    allocation.push(Allocation {
                        cluster: i - 1,
                        budget: grid.budget(q),
                        value: s.value,
                        chosen: s.chosen.clone(),
                    });
                }
                l -= q;
            }
        }
        allocation.reverse();
        let mut chosen: Vec<BillboardId> = allocation
            .iter()
            .flat_map(|a| a.chosen.iter().copied())
            .collect();
        chosen.sort_unstable();
        let dense = |maps: &[BTreeMap<usize, f64>]| -> Vec<Vec<Option<f64>>> {
            maps.iter()
                .map(|row| (0..=grid.cells).map(|q| row.get(&q).copied()).collect())
                .collect()
        };
        let psi_values: Vec<BTreeMap<usize, f64>> = self
            .psi
            .iter()
            .map(|row| row.iter().map(|(&q, s)| (q, s.value)).collect())
            .collect();
        DpOutcome {
            value: self.theta[m][grid.cells],
            chosen,
            allocation,
            diagnostics,
            matrices: DpMatrices {
                quantum: grid.quantum,
                psi: dense(&psi_values),
                psi_upper: dense(&self.psi_upper),
                theta: self.theta,
                traceback: self.choice,
            },
        }
    }
}

/// Plain DP: every `ψ[i][q]` for `q = 0..=L/quantum` is solved, rows in
/// parallel across budgets.
pub fn part_sel_with<O: ClusterOracle>(oracle: &O, grid: &BudgetGrid) -> DpOutcome {
    let m = oracle.clusters();
    let cells = grid.cells;
    let mut tables = Tables::new(m, cells);
    let mut diag = Diagnostics::default();
    for i in 1..=m {
        let row: Vec<LocalSolution> = (0..=cells)
            .into_par_iter()
            .map(|q| oracle.solve(i - 1, grid.budget(q)))
            .collect();
        diag.enum_calls += row.len() as u64;
        for l in 0..=cells {
            let mut best = f64::NEG_INFINITY;
            let mut pick = 0;
            for (q, s) in row.iter().enumerate().take(l + 1) {
                let v = tables.theta[i - 1][l - q] + s.value;
                if v > best {
                    best = v;
                    pick = q;
                }
            }
            tables.theta[i][l] = best;
            tables.choice[i][l] = Some(pick);
        }
        tables.psi[i - 1] = row.into_iter().enumerate().collect();
    }
    tables.finish(grid, diag)
}

/// DP that solves `ψ[i][q]` only when the estimate `ψ↑[i][q]` could beat the
/// current best for the cell. Both tables are memoized per `(i, q)`.
pub fn lazy_probe_with<O: ClusterOracle>(oracle: &O, grid: &BudgetGrid) -> DpOutcome {
    let m = oracle.clusters();
    let cells = grid.cells;
    let mut tables = Tables::new(m, cells);
    let mut diag = Diagnostics::default();
    for i in 1..=m {
        let c = i - 1;
        for l in 0..=cells {
            // q = 0 with the empty local selection
            let mut best = tables.theta[i - 1][l];
            let mut pick = None;
            for q in 0..=l {
                let upper = *tables.psi_upper[c].entry(q).or_insert_with(|| {
                    diag.estimator_calls += 1;
                    oracle.bound(c, grid.budget(q))
                });
                let base = tables.theta[i - 1][l - q];
                if best < base + upper {
                    let value = tables.psi[c]
                        .entry(q)
                        .or_insert_with(|| {
                            diag.enum_calls += 1;
                            oracle.solve(c, grid.budget(q))
                        })
                        .value;
                    if base + value > best {
                        best = base + value;
                        pick = Some(q);
                    }
                }
            }
            tables.theta[i][l] = best;
            tables.choice[i][l] = pick;
        }
    }
    let total_cells = (m * (cells + 1)) as u64;
    diag.pruned_cells = total_cells - diag.enum_calls;
    tables.finish(grid, diag)
}

/// A partition DP result: the exact selection plus the DP's own view.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionSelection {
    /// `influence` is recomputed exactly on the union of local selections.
    pub selection: Selection,
    /// `Θ[m][L]`, which ignores overlap between clusters.
    pub dp_value: f64,
    pub grid: BudgetGrid,
    pub allocation: Vec<Allocation>,
    pub matrices: DpMatrices,
}

fn run(
    index: &InfluenceIndex,
    partition: &Partition,
    budget: u64,
    tau: usize,
    lazy: bool,
) -> Result<PartitionSelection> {
    let oracle = IndexOracle::new(index, partition, tau)?;
    let grid = BudgetGrid::new(
        index.billboard_ids().iter().map(|&b| index.cost(b).unwrap_or(0)),
        budget,
    )?;
    let outcome = if lazy {
        lazy_probe_with(&oracle, &grid)
    } else {
        part_sel_with(&oracle, &grid)
    };
    let cost = index.total_cost(&outcome.chosen)?;
    let influence = index.influence(&outcome.chosen)?;
    Ok(PartitionSelection {
        selection: Selection {
            chosen: outcome.chosen,
            cost,
            influence,
            diagnostics: outcome.diagnostics,
        },
        dp_value: outcome.value,
        grid,
        allocation: outcome.allocation,
        matrices: outcome.matrices,
    })
}

/// Partition DP with enumeration greedy in every cell.
pub fn part_sel(
    index: &InfluenceIndex,
    partition: &Partition,
    budget: u64,
    tau: usize,
) -> Result<PartitionSelection> {
    run(index, partition, budget, tau, false)
}

/// Partition DP with bound-based pruning of local solves.
pub fn lazy_probe(
    index: &InfluenceIndex,
    partition: &Partition,
    budget: u64,
    tau: usize,
) -> Result<PartitionSelection> {
    run(index, partition, budget, tau, true)
}
