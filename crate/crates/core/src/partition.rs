//! Overlap between billboard groups and θ-partitions built by agglomerative
//! merging.
//!
//! Only clusters that share at least one trajectory can overlap, so the merge
//! loop keeps ratios for adjacent pairs only and refreshes the pairs that
//! touch a freshly merged cluster.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index::{survival_by_trajectory, InfluenceIndex, SurvivalCache};
use crate::model::BillboardId;

pub const PARTITION_VERSION: u32 = 1;

/// Which overlap ratio the partition is built and checked against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OverlapMode {
    /// Worst single billboard of one cluster against the other cluster.
    Singleton,
    /// Overlap of the two clusters relative to `I(U)`.
    Volume,
    /// Worst billboard of a cluster against everything outside it, for either
    /// cluster; zero for clusters with no shared audience.
    External,
}

impl fmt::Display for OverlapMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OverlapMode::Singleton => "singleton",
            OverlapMode::Volume => "volume",
            OverlapMode::External => "external",
        })
    }
}

impl FromStr for OverlapMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "singleton" => Ok(OverlapMode::Singleton),
            "volume" => Ok(OverlapMode::Volume),
            "external" => Ok(OverlapMode::External),
            _ => Err(Error::Config(format!(
                "unknown overlap mode `{s}` (singleton, volume or external)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub id: usize,
    /// Ascending billboard ids.
    pub members: Vec<BillboardId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pub theta: f64,
    pub mode: OverlapMode,
    /// Ascending by size, ties by smallest member id; `id` is the position.
    pub clusters: Vec<Cluster>,
}

#[derive(Serialize, Deserialize)]
struct PartitionFile {
    version: u32,
    theta: f64,
    mode: OverlapMode,
    clusters: Vec<Vec<BillboardId>>,
}

impl Partition {
    /// Normalizes member order and cluster order. Clusters must be non-empty
    /// and disjoint.
    pub fn from_clusters(
        theta: f64,
        mode: OverlapMode,
        clusters: Vec<Vec<BillboardId>>,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::MalformedPartition(format!(
                "theta {theta} outside [0, 1]"
            )));
        }
        let mut seen = HashSet::new();
        let mut clusters: Vec<Vec<BillboardId>> = clusters
            .into_iter()
            .map(|mut c| {
                c.sort_unstable();
                c
            })
            .collect();
        for c in &clusters {
            if c.is_empty() {
                return Err(Error::MalformedPartition("empty cluster".into()));
            }
            for &b in c {
                if !seen.insert(b) {
                    return Err(Error::MalformedPartition(format!(
                        "billboard {b} appears more than once"
                    )));
                }
            }
        }
        clusters.sort_by_key(|c| (c.len(), c[0]));
        Ok(Partition {
            theta,
            mode,
            clusters: clusters
                .into_iter()
                .enumerate()
                .map(|(id, members)| Cluster { id, members })
                .collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn largest(&self) -> usize {
        self.clusters.last().map_or(0, |c| c.members.len())
    }

    /// Fails unless the clusters cover exactly the index's billboards.
    pub fn check_cover(&self, index: &InfluenceIndex) -> Result<()> {
        let mut all: Vec<BillboardId> = self
            .clusters
            .iter()
            .flat_map(|c| c.members.iter().copied())
            .collect();
        all.sort_unstable();
        if all != index.billboard_ids() {
            return Err(Error::MalformedPartition(
                "clusters do not cover the billboard universe exactly".into(),
            ));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&PartitionFile {
            version: PARTITION_VERSION,
            theta: self.theta,
            mode: self.mode,
            clusters: self.clusters.iter().map(|c| c.members.clone()).collect(),
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: PartitionFile = serde_json::from_str(text)?;
        if file.version != PARTITION_VERSION {
            return Err(Error::MalformedPartition(format!(
                "unsupported partition version {}",
                file.version
            )));
        }
        Self::from_clusters(file.theta, file.mode, file.clusters)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()? + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }
}

/// `Ω(A, B) = I(A) + I(B) - I(A ∪ B)`.
pub fn overlap(index: &InfluenceIndex, a: &[BillboardId], b: &[BillboardId]) -> Result<f64> {
    Ok(overlap_at(index, &index.positions(a)?, &index.positions(b)?))
}

/// Per trajectory reached by both sides: `(1-π_A) + (1-π_B) - (1-π_{A∪B})`.
fn overlap_at(index: &InfluenceIndex, a: &[usize], b: &[usize]) -> f64 {
    let sa = survival_by_trajectory(index, a);
    let sb = survival_by_trajectory(index, b);
    let mut union: Vec<usize> = a.iter().chain(b).copied().collect();
    union.sort_unstable();
    union.dedup();
    let su = survival_by_trajectory(index, &union);
    let (mut i, mut j, mut k) = (0, 0, 0);
    let mut total = 0.0;
    while i < sa.len() && j < sb.len() {
        match sa[i].0.cmp(&sb[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                let t = sa[i].0;
                while su[k].0 < t {
                    k += 1;
                }
                total += (1.0 - sa[i].1) + (1.0 - sb[j].1) - (1.0 - su[k].1);
                i += 1;
                j += 1;
            }
        }
    }
    total
}

fn clamp_ratio(r: f64) -> f64 {
    if r.is_nan() {
        0.0
    } else {
        r.clamp(0.0, 1.0)
    }
}

/// `max_{b ∈ from} Ω({b}, against) / I({b})`, using
/// `Ω({b}, C) = I({b}) - Δ(b | C)` for `b ∉ C`.
fn worst_single(
    index: &InfluenceIndex,
    cache: &mut SurvivalCache,
    from: &[usize],
    against: &[usize],
) -> f64 {
    cache.reset();
    for &p in against {
        index.commit_at(cache, p);
    }
    let mut worst = 0.0_f64;
    for &b in from {
        let alone = index.standalone_at(b);
        if alone > 0.0 {
            let r = clamp_ratio((alone - index.marginal_at(cache, b)) / alone);
            worst = worst.max(r);
        }
    }
    cache.reset();
    worst
}

fn complement(index: &InfluenceIndex, cluster: &[usize]) -> Vec<usize> {
    let inside: HashSet<usize> = cluster.iter().copied().collect();
    (0..index.billboard_count())
        .filter(|p| !inside.contains(p))
        .collect()
}

/// Evaluates pair ratios; owns the scratch cache and the per-cluster values
/// that do not depend on the other cluster.
struct RatioEngine<'a> {
    index: &'a InfluenceIndex,
    mode: OverlapMode,
    cache: SurvivalCache,
    total: f64,
}

impl<'a> RatioEngine<'a> {
    fn new(index: &'a InfluenceIndex, mode: OverlapMode) -> Self {
        let all: Vec<usize> = (0..index.billboard_count()).collect();
        RatioEngine {
            index,
            mode,
            cache: index.new_cache(),
            total: if mode == OverlapMode::Volume {
                index.influence_at(&all)
            } else {
                0.0
            },
        }
    }

    /// Per-cluster external ratio; only meaningful in external mode.
    fn external(&mut self, cluster: &[usize]) -> f64 {
        let outside = complement(self.index, cluster);
        worst_single(self.index, &mut self.cache, cluster, &outside)
    }

    /// Ratio for an adjacent pair, `a` and `b` in canonical order.
    fn pair(&mut self, a: &[usize], b: &[usize], ext: (f64, f64)) -> f64 {
        match self.mode {
            OverlapMode::Singleton => {
                let ab = worst_single(self.index, &mut self.cache, a, b);
                let ba = worst_single(self.index, &mut self.cache, b, a);
                ab.max(ba)
            }
            OverlapMode::Volume => {
                if self.total > 0.0 {
                    clamp_ratio(overlap_at(self.index, a, b) / self.total)
                } else {
                    0.0
                }
            }
            OverlapMode::External => {
                if overlap_at(self.index, a, b) > 0.0 {
                    ext.0.max(ext.1)
                } else {
                    0.0
                }
            }
        }
    }
}

fn reached(index: &InfluenceIndex, cluster: &[usize]) -> Vec<u32> {
    let mut ts: Vec<u32> = cluster
        .iter()
        .flat_map(|&p| index.forward_at(p).iter().map(|e| e.0))
        .collect();
    ts.sort_unstable();
    ts.dedup();
    ts
}

fn intersects(a: &[u32], b: &[u32]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return true,
        }
    }
    false
}

/// Overlap ratio between two clusters under `mode`, as used by
/// [`theta_partition`] and [`validate_partition`]. External mode measures
/// each cluster against the rest of the index's universe.
pub fn overlap_ratio(
    index: &InfluenceIndex,
    ci: &[BillboardId],
    cj: &[BillboardId],
    mode: OverlapMode,
) -> Result<f64> {
    let (a, b) = (index.positions(ci)?, index.positions(cj)?);
    let mut engine = RatioEngine::new(index, mode);
    let ext = if mode == OverlapMode::External {
        (engine.external(&a), engine.external(&b))
    } else {
        (0.0, 0.0)
    };
    if !intersects(&reached(index, &a), &reached(index, &b)) {
        return Ok(0.0);
    }
    Ok(engine.pair(&a, &b, ext))
}

/// Exhaustive form of the singleton ratio: `max Ω(S, cj) / I(S)` over every
/// non-empty `S ⊆ ci` with positive influence. Refuses clusters larger than
/// `cap`.
pub fn subset_overlap_ratio(
    index: &InfluenceIndex,
    ci: &[BillboardId],
    cj: &[BillboardId],
    cap: usize,
) -> Result<f64> {
    let (a, b) = (index.positions(ci)?, index.positions(cj)?);
    if a.len() > cap {
        return Err(Error::TooLarge {
            size: a.len(),
            cap,
        });
    }
    let mut worst = 0.0_f64;
    for mask in 1u64..(1u64 << a.len()) {
        let subset: Vec<usize> = (0..a.len())
            .filter(|k| mask >> k & 1 == 1)
            .map(|k| a[k])
            .collect();
        let value = index.influence_at(&subset);
        if value > 0.0 {
            worst = worst.max(clamp_ratio(overlap_at(index, &subset, &b) / value));
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairRatio {
    /// Cluster positions in the partition, `a < b`.
    pub a: usize,
    pub b: usize,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OverlapReport {
    pub mode: OverlapMode,
    pub theta: f64,
    /// Every pair with a non-zero ratio.
    pub pairs: Vec<PairRatio>,
    /// Pairs whose ratio exceeds θ.
    pub violations: Vec<PairRatio>,
    pub max_ratio: f64,
}

impl OverlapReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Recomputes every pairwise ratio of `partition` under its own mode and
/// lists pairs above θ.
pub fn validate_partition(index: &InfluenceIndex, partition: &Partition) -> Result<OverlapReport> {
    partition.check_cover(index)?;
    let clusters: Vec<Vec<usize>> = partition
        .clusters
        .iter()
        .map(|c| index.positions(&c.members))
        .collect::<Result<_>>()?;
    let reach: Vec<Vec<u32>> = clusters.iter().map(|c| reached(index, c)).collect();
    let mut engine = RatioEngine::new(index, partition.mode);
    let ext: Vec<f64> = if partition.mode == OverlapMode::External {
        clusters.iter().map(|c| engine.external(c)).collect()
    } else {
        vec![0.0; clusters.len()]
    };
    let mut pairs = Vec::new();
    for i in 0..clusters.len() {
        for j in i + 1..clusters.len() {
            if !intersects(&reach[i], &reach[j]) {
                continue;
            }
            // canonical order: smaller first position, i.e. smaller min id
            let (x, y) = if clusters[i][0] < clusters[j][0] { (i, j) } else { (j, i) };
            let ratio = engine.pair(&clusters[x], &clusters[y], (ext[x], ext[y]));
            if ratio > 0.0 {
                pairs.push(PairRatio { a: i, b: j, ratio });
            }
        }
    }
    let violations = pairs
        .iter()
        .filter(|p| p.ratio > partition.theta)
        .cloned()
        .collect();
    let max_ratio = pairs.iter().map(|p| p.ratio).fold(0.0, f64::max);
    Ok(OverlapReport {
        mode: partition.mode,
        theta: partition.theta,
        pairs,
        violations,
        max_ratio,
    })
}

/// Agglomerative θ-partition of the whole index universe: start from
/// singletons and repeatedly merge the pair with the largest ratio above θ
/// (ties: smaller pair of smallest member ids) until none remains.
pub fn theta_partition(index: &InfluenceIndex, theta: f64, mode: OverlapMode) -> Result<Partition> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::Config(format!("theta {theta} outside [0, 1]")));
    }
    let n = index.billboard_count();
    // Clusters are keyed by their smallest position, which is also the
    // position of their smallest id.
    let mut clusters: BTreeMap<usize, Vec<usize>> = (0..n).map(|p| (p, vec![p])).collect();
    let mut reach: BTreeMap<usize, Vec<u32>> =
        (0..n).map(|p| (p, reached(index, &[p]))).collect();
    let mut engine = RatioEngine::new(index, mode);
    let mut ext: BTreeMap<usize, f64> = BTreeMap::new();
    if mode == OverlapMode::External {
        for (&k, c) in &clusters {
            ext.insert(k, engine.external(c));
        }
    }
    let ext_of = |ext: &BTreeMap<usize, f64>, k: usize| ext.get(&k).copied().unwrap_or(0.0);

    let mut ratios: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let keys: Vec<usize> = clusters.keys().copied().collect();
    for (x, &a) in keys.iter().enumerate() {
        for &b in &keys[x + 1..] {
            if intersects(&reach[&a], &reach[&b]) {
                let r = engine.pair(&clusters[&a], &clusters[&b], (ext_of(&ext, a), ext_of(&ext, b)));
                ratios.insert((a, b), r);
            }
        }
    }

    loop {
        let mut pick: Option<((usize, usize), f64)> = None;
        for (&key, &r) in &ratios {
            // BTreeMap iterates keys ascending, so equal ratios keep the first
            if r > theta && pick.is_none_or(|(_, best)| r > best) {
                pick = Some((key, r));
            }
        }
        let Some(((a, b), _)) = pick else { break };
        let mut merged = clusters.remove(&a).unwrap();
        merged.extend(clusters.remove(&b).unwrap());
        merged.sort_unstable();
        let mut merged_reach = reach.remove(&a).unwrap();
        merged_reach.extend(reach.remove(&b).unwrap());
        merged_reach.sort_unstable();
        merged_reach.dedup();
        ratios.retain(|&(x, y), _| x != a && x != b && y != a && y != b);
        ext.remove(&b);
        if mode == OverlapMode::External {
            ext.insert(a, engine.external(&merged));
        }
        for (&k, c) in &clusters {
            if intersects(&merged_reach, &reach[&k]) {
                let key = (a.min(k), a.max(k));
                let r = if a < k {
                    engine.pair(&merged, c, (ext_of(&ext, a), ext_of(&ext, k)))
                } else {
                    engine.pair(c, &merged, (ext_of(&ext, k), ext_of(&ext, a)))
                };
                ratios.insert(key, r);
            }
        }
        clusters.insert(a, merged);
        reach.insert(a, merged_reach);
    }

    Partition::from_clusters(
        theta,
        mode,
        clusters.values().map(|c| index.ids_at(c)).collect(),
    )
}

/// `⌈log_{1+1/θ} m⌉`, with 0 for θ = 0 or a single cluster.
pub fn approximation_exponent(theta: f64, clusters: usize) -> u32 {
    if theta <= 0.0 || clusters <= 1 {
        return 0;
    }
    let base = 1.0 + 1.0 / theta;
    let target = clusters as f64 * (1.0 - 1e-12);
    let mut d = 0;
    let mut power = 1.0;
    while power < target {
        power *= base;
        d += 1;
    }
    d
}

/// Guaranteed fraction of the optimum for the partition DP:
/// `(1/2)^⌈log_{1+1/θ} m⌉ · (1 - 1/e)`.
pub fn partition_bound_factor(theta: f64, clusters: usize) -> f64 {
    0.5_f64.powi(approximation_exponent(theta, clusters) as i32) * (1.0 - (-1.0_f64).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn d1_index() -> InfluenceIndex {
        InfluenceIndex::build(&fixtures::d1())
    }

    #[test]
    fn overlap_basics() {
        let index = d1_index();
        assert_eq!(overlap(&index, &[1], &[4]).unwrap(), 0.0);
        assert!((overlap(&index, &[1], &[2]).unwrap() - 0.06).abs() < 1e-12);
        let i26 = index.influence(&[2, 6]).unwrap();
        assert!((overlap(&index, &[2, 6], &[2, 6]).unwrap() - i26).abs() < 1e-12);
    }

    #[test]
    fn covered_single_billboard_has_ratio_one() {
        let index = InfluenceIndex::from_forward_lists(vec![
            (1, 1, vec![(0, 0.5)]),
            (2, 1, vec![(0, 1.0), (1, 0.5)]),
        ])
        .unwrap();
        assert_eq!(overlap_ratio(&index, &[1], &[2], OverlapMode::Singleton).unwrap(), 1.0);
    }

    #[test]
    fn disjoint_audiences_have_zero_ratio() {
        let index = d1_index();
        for mode in [OverlapMode::Singleton, OverlapMode::Volume, OverlapMode::External] {
            assert_eq!(overlap_ratio(&index, &[1, 2], &[4], mode).unwrap(), 0.0);
        }
    }

    #[test]
    fn d1_ratios_by_hand() {
        let index = d1_index();
        // b1 vs b2 share t1 only: Ω = 0.2 * 0.3 = 0.06
        let s = overlap_ratio(&index, &[1], &[2], OverlapMode::Singleton).unwrap();
        assert!((s - 0.06 / 0.4).abs() < 1e-12);
        let v = overlap_ratio(&index, &[1], &[2], OverlapMode::Volume).unwrap();
        assert!((v - 0.06 / index.influence(index.billboard_ids()).unwrap()).abs() < 1e-12);
        // b3 against the rest: only b6 shares t5, Ω({3}, U\{3}) = 0.4 * 0.6
        let e = overlap_ratio(&index, &[3], &[6], OverlapMode::External).unwrap();
        let r6 = {
            let rest = [1, 2, 3, 4, 5];
            let i6 = index.standalone(6).unwrap();
            let mut rest6 = rest.to_vec();
            rest6.push(6);
            (i6 + index.influence(&rest).unwrap() - index.influence(&rest6).unwrap()) / i6
        };
        assert!((e - f64::max(0.6, r6)).abs() < 1e-12, "{e} {r6}");
    }

    #[test]
    fn theta_one_gives_singletons() {
        let index = d1_index();
        let p = theta_partition(&index, 1.0, OverlapMode::Singleton).unwrap();
        assert_eq!(p.len(), 6);
        assert!(p.clusters.iter().all(|c| c.members.len() == 1));
    }

    #[test]
    fn theta_zero_merges_overlapping_chain() {
        let index = InfluenceIndex::from_forward_lists(vec![
            (1, 1, vec![(0, 0.5), (1, 0.5)]),
            (2, 1, vec![(1, 0.5), (2, 0.5)]),
            (3, 1, vec![(2, 0.5), (0, 0.5)]),
        ])
        .unwrap();
        for mode in [OverlapMode::Singleton, OverlapMode::Volume, OverlapMode::External] {
            let p = theta_partition(&index, 0.0, mode).unwrap();
            assert_eq!(p.len(), 1);
            assert_eq!(p.clusters[0].members, vec![1, 2, 3]);
        }
    }

    #[test]
    fn d1_partitions_validate() {
        let index = d1_index();
        for mode in [OverlapMode::Singleton, OverlapMode::Volume, OverlapMode::External] {
            for theta in [0.0, 0.1, 0.2, 0.3, 0.5] {
                let p = theta_partition(&index, theta, mode).unwrap();
                let report = validate_partition(&index, &p).unwrap();
                assert!(report.is_valid(), "{mode} {theta}: {report:?}");
                for w in p.clusters.windows(2) {
                    assert!(w[0].members.len() <= w[1].members.len());
                }
            }
        }
    }

    #[test]
    fn d1_theta_025_singleton_shape() {
        let index = d1_index();
        let p = theta_partition(&index, 0.25, OverlapMode::Singleton).unwrap();
        let clusters: Vec<_> = p.clusters.iter().map(|c| c.members.clone()).collect();
        // ratios: (3,6) 0.6, (5,6) 0.3, (4,6) 0.2, (1,2) 0.15
        assert_eq!(clusters, vec![vec![1], vec![2], vec![4], vec![3, 5, 6]]);
    }

    #[test]
    fn merged_violation_is_reported() {
        let index = d1_index();
        let p = Partition::from_clusters(
            0.1,
            OverlapMode::Singleton,
            vec![vec![1, 2, 3, 4, 5], vec![6]],
        )
        .unwrap();
        let report = validate_partition(&index, &p).unwrap();
        assert!(!report.is_valid());
    }

    #[test]
    fn malformed_partitions() {
        let index = d1_index();
        assert!(Partition::from_clusters(0.1, OverlapMode::Volume, vec![vec![1], vec![1, 2]]).is_err());
        assert!(Partition::from_clusters(0.1, OverlapMode::Volume, vec![vec![]]).is_err());
        let partial = Partition::from_clusters(0.1, OverlapMode::Volume, vec![vec![1, 2]]).unwrap();
        assert!(matches!(
            validate_partition(&index, &partial),
            Err(Error::MalformedPartition(_))
        ));
    }

    #[test]
    fn json_round_trip() {
        let index = d1_index();
        let p = theta_partition(&index, 0.2, OverlapMode::Singleton).unwrap();
        let back = Partition::from_json(&p.to_json().unwrap()).unwrap();
        assert_eq!(p, back);
        assert!(Partition::from_json(r#"{"version":9,"theta":0.1,"mode":"volume","clusters":[]}"#).is_err());
    }

    #[test]
    fn subset_ratio_dominates_singleton() {
        let index = d1_index();
        let a = [1, 2, 3];
        let b = [6, 4];
        let single = overlap_ratio(&index, &a, &b, OverlapMode::Singleton).unwrap();
        let full = subset_overlap_ratio(&index, &a, &b, 10)
            .unwrap()
            .max(subset_overlap_ratio(&index, &b, &a, 10).unwrap());
        assert!(full + 1e-12 >= single);
        assert!(subset_overlap_ratio(&index, &a, &b, 2).is_err());
    }

    #[test]
    fn exponent_examples() {
        assert_eq!(approximation_exponent(0.0, 5), 0);
        assert_eq!(approximation_exponent(0.3, 1), 0);
        // base 2: m = 2 -> 1, m = 3 -> 2, m = 4 -> 2
        assert_eq!(approximation_exponent(1.0, 2), 1);
        assert_eq!(approximation_exponent(1.0, 3), 2);
        assert_eq!(approximation_exponent(1.0, 4), 2);
        // base 11: m = 11 -> 1, m = 12 -> 2
        assert_eq!(approximation_exponent(0.1, 11), 1);
        assert_eq!(approximation_exponent(0.1, 12), 2);
    }
}
