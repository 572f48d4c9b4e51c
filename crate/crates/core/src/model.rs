//! Domain entities and the reference influence evaluator.
//!
//! Everything here works on planar coordinates in meters. Geographic input is
//! projected once at ingestion (see [`crate::data::geo`]), so the meet
//! predicate is a plain Euclidean distance test against the threshold λ.
//!
//! [`influence_naive`] scans every (billboard, trajectory, point) triple and is
//! deliberately index-free: the faster evaluators in [`crate::index`] are
//! checked against it.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type BillboardId = u32;
pub type TrajectoryId = u32;

/// Projected location in meters (x east, y north).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub x: f64,
    pub y: f64,
}

impl GeoPoint {
    pub const fn new(x: f64, y: f64) -> Self {
        GeoPoint { x, y }
    }

    fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Billboard {
    pub id: BillboardId,
    pub location: GeoPoint,
    /// Panel area in square meters.
    pub panel_size: f64,
    /// Leasing cost in integer currency units.
    pub cost: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub id: TrajectoryId,
    pub points: Vec<GeoPoint>,
}

/// How the probability that a billboard influences a trajectory it meets is
/// derived.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProbabilityModel {
    /// The same probability `p` for every meeting pair.
    Uniform { p: f64 },
    /// `panel_size / area`, with `area` larger than every panel.
    PanelOverA { area: f64 },
    /// `panel_size / (2 * max panel size)`.
    PanelHalfMax,
}

impl ProbabilityModel {
    /// Checks the model against the largest panel of the universe it will be
    /// applied to.
    pub fn validate(&self, max_panel: f64) -> Result<()> {
        match *self {
            ProbabilityModel::Uniform { p } => {
                if !(p > 0.0 && p <= 1.0) {
                    return Err(Error::InvalidModel(format!(
                        "uniform probability {p} outside (0, 1]"
                    )));
                }
            }
            ProbabilityModel::PanelOverA { area } => {
                if !(area.is_finite() && area > max_panel) {
                    return Err(Error::InvalidModel(format!(
                        "area {area} must exceed the largest panel size {max_panel}"
                    )));
                }
            }
            ProbabilityModel::PanelHalfMax => {
                if max_panel.is_nan() || max_panel <= 0.0 {
                    return Err(Error::InvalidModel(
                        "panel-half needs a positive maximum panel size".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Probability for a billboard that meets the trajectory. The caller is
    /// responsible for the meet test.
    pub fn meeting_probability(&self, panel_size: f64, max_panel: f64) -> f64 {
        match *self {
            ProbabilityModel::Uniform { p } => p,
            ProbabilityModel::PanelOverA { area } => panel_size / area,
            ProbabilityModel::PanelHalfMax => panel_size / (2.0 * max_panel),
        }
    }
}

impl fmt::Display for ProbabilityModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProbabilityModel::Uniform { p } => write!(f, "uniform:{p}"),
            ProbabilityModel::PanelOverA { area } => write!(f, "panel:{area}"),
            ProbabilityModel::PanelHalfMax => write!(f, "panel-half"),
        }
    }
}

impl FromStr for ProbabilityModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |why: &str| Error::InvalidModel(format!("`{s}`: {why}"));
        if s == "panel-half" {
            return Ok(ProbabilityModel::PanelHalfMax);
        }
        let (kind, value) = s
            .split_once(':')
            .ok_or_else(|| bad("expected uniform:<p>, panel:<A> or panel-half"))?;
        let value: f64 = value.parse().map_err(|_| bad("not a number"))?;
        match kind {
            "uniform" => Ok(ProbabilityModel::Uniform { p: value }),
            "panel" => Ok(ProbabilityModel::PanelOverA { area: value }),
            _ => Err(bad("unknown model kind")),
        }
    }
}

/// A validated placement problem: universe, trajectories, meet threshold,
/// probability model and budget.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    pub universe: Vec<Billboard>,
    pub trajectories: Vec<Trajectory>,
    pub lambda: f64,
    pub model: ProbabilityModel,
    pub budget: u64,
    max_panel: f64,
}

impl ProblemInstance {
    pub fn new(
        universe: Vec<Billboard>,
        trajectories: Vec<Trajectory>,
        lambda: f64,
        model: ProbabilityModel,
        budget: u64,
    ) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidInstance(format!(
                "lambda must be positive, got {lambda}"
            )));
        }
        let mut seen = HashSet::new();
        for b in &universe {
            if !seen.insert(b.id) {
                return Err(Error::InvalidInstance(format!(
                    "duplicate billboard id {}",
                    b.id
                )));
            }
            if !b.location.is_finite() {
                return Err(Error::InvalidInstance(format!(
                    "billboard {} has a non-finite location",
                    b.id
                )));
            }
            if !(b.panel_size.is_finite() && b.panel_size > 0.0) {
                return Err(Error::InvalidInstance(format!(
                    "billboard {} has non-positive panel size {}",
                    b.id, b.panel_size
                )));
            }
        }
        let mut seen = HashSet::new();
        for t in &trajectories {
            if !seen.insert(t.id) {
                return Err(Error::InvalidInstance(format!(
                    "duplicate trajectory id {}",
                    t.id
                )));
            }
            if t.points.is_empty() {
                return Err(Error::InvalidInstance(format!(
                    "trajectory {} has no points",
                    t.id
                )));
            }
            if t.points.iter().any(|p| !p.is_finite()) {
                return Err(Error::InvalidInstance(format!(
                    "trajectory {} has a non-finite point",
                    t.id
                )));
            }
        }
        let max_panel = universe
            .iter()
            .map(|b| b.panel_size)
            .fold(0.0_f64, f64::max);
        // An empty universe has nothing to validate the panel models against.
        if !universe.is_empty() || matches!(model, ProbabilityModel::Uniform { .. }) {
            model.validate(max_panel)?;
        }
        Ok(ProblemInstance {
            universe,
            trajectories,
            lambda,
            model,
            budget,
            max_panel,
        })
    }

    pub fn max_panel(&self) -> f64 {
        self.max_panel
    }

    pub fn billboard(&self, id: BillboardId) -> Option<&Billboard> {
        self.universe.iter().find(|b| b.id == id)
    }

    pub fn billboard_ids(&self) -> Vec<BillboardId> {
        let mut ids: Vec<_> = self.universe.iter().map(|b| b.id).collect();
        ids.sort_unstable();
        ids
    }

    /// Same instance with a different budget.
    pub fn with_budget(&self, budget: u64) -> Self {
        ProblemInstance {
            budget,
            ..self.clone()
        }
    }

    pub fn pair_probability(&self, b: &Billboard, t: &Trajectory) -> Result<f64> {
        pair_probability(&self.model, self.max_panel, b, t, self.lambda)
    }
}

pub fn distance(a: GeoPoint, b: GeoPoint) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

/// Meet predicate: some point of `t` lies within `lambda` of the billboard
/// (boundary inclusive).
pub fn influences(b: &Billboard, t: &Trajectory, lambda: f64) -> bool {
    t.points.iter().any(|&p| distance(p, b.location) <= lambda)
}

/// Probability that `b` influences `t`; zero when they do not meet.
pub fn pair_probability(
    model: &ProbabilityModel,
    max_panel: f64,
    b: &Billboard,
    t: &Trajectory,
    lambda: f64,
) -> Result<f64> {
    model.validate(max_panel)?;
    if b.panel_size > max_panel {
        return Err(Error::InvalidModel(format!(
            "billboard {} panel {} exceeds the declared maximum {max_panel}",
            b.id, b.panel_size
        )));
    }
    if !influences(b, t, lambda) {
        return Ok(0.0);
    }
    Ok(model.meeting_probability(b.panel_size, max_panel))
}

/// Probability that at least one of several independent billboards
/// influences a trajectory: `1 - prod(1 - p_i)`.
pub fn set_probability<I>(pairwise: I) -> f64
where
    I: IntoIterator<Item = f64>,
{
    1.0 - pairwise.into_iter().map(|p| 1.0 - p).product::<f64>()
}

/// Reference influence `I(S)`, evaluated by brute force over every trajectory.
pub fn influence_naive(instance: &ProblemInstance, set: &[BillboardId]) -> Result<f64> {
    let by_id: HashMap<BillboardId, &Billboard> =
        instance.universe.iter().map(|b| (b.id, b)).collect();
    let members = set
        .iter()
        .map(|id| by_id.get(id).copied().ok_or(Error::UnknownBillboard(*id)))
        .collect::<Result<Vec<_>>>()?;
    let mut total = 0.0;
    for t in &instance.trajectories {
        let probs = members
            .iter()
            .map(|b| instance.pair_probability(b, t))
            .collect::<Result<Vec<_>>>()?;
        total += set_probability(probs);
    }
    Ok(total)
}
