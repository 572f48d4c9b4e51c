//! Seeded synthetic cities: billboards scattered around cluster centers and
//! short random-walk trajectories that mostly stay local.

use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::geo::Projection;
use crate::data::io::{write_dataset, DatasetManifest};
use crate::error::{Error, Result};
use crate::model::{Billboard, GeoPoint, Trajectory};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub width_km: f64,
    pub height_km: f64,
    pub billboards: usize,
    pub trajectories: usize,
    pub clusters: usize,
    /// Billboards land within this radius of their cluster center.
    pub cluster_spread_m: f64,
    /// Probability that a trajectory starts near a cluster center.
    pub cluster_bias: f64,
    pub step_m: f64,
    /// Fraction of trajectories whose planned length is below `short_limit_m`.
    pub short_fraction: f64,
    pub short_limit_m: f64,
    pub min_length_m: f64,
    pub max_length_m: f64,
    pub panel_min: f64,
    pub panel_max: f64,
    pub ref_lat: f64,
    pub ref_lng: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            width_km: 20.0,
            height_km: 20.0,
            billboards: 200,
            trajectories: 2000,
            clusters: 12,
            cluster_spread_m: 800.0,
            cluster_bias: 0.8,
            step_m: 100.0,
            short_fraction: 0.85,
            short_limit_m: 5000.0,
            min_length_m: 300.0,
            max_length_m: 15_000.0,
            panel_min: 10.0,
            panel_max: 60.0,
            ref_lat: 40.75,
            ref_lng: -73.99,
            seed: 1,
        }
    }
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if !(self.width_km > 0.0 && self.height_km > 0.0) {
            return bad("bounding box must be positive");
        }
        if self.billboards > 0 && self.clusters == 0 {
            return bad("at least one cluster is needed to place billboards");
        }
        if self.step_m.is_nan() || self.step_m <= 0.0 {
            return bad("step must be positive");
        }
        if !(0.0..=1.0).contains(&self.short_fraction) || !(0.0..=1.0).contains(&self.cluster_bias)
        {
            return bad("fractions must lie in [0, 1]");
        }
        if !(self.min_length_m >= 0.0
            && self.min_length_m <= self.short_limit_m
            && self.short_limit_m <= self.max_length_m)
        {
            return bad("need min_length <= short_limit <= max_length");
        }
        if !(self.panel_min > 0.0 && self.panel_min <= self.panel_max) {
            return bad("panel sizes must satisfy 0 < min <= max");
        }
        Ok(())
    }
}

/// Generates planar billboards (ids `0..n`, cost 0) and trajectories.
pub fn generate_planar(config: &SyntheticConfig) -> Result<(Vec<Billboard>, Vec<Trajectory>)> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let (w, h) = (config.width_km * 1000.0, config.height_km * 1000.0);
    let clamp = |p: GeoPoint| GeoPoint::new(p.x.clamp(0.0, w), p.y.clamp(0.0, h));

    let centers: Vec<GeoPoint> = (0..config.clusters)
        .map(|_| GeoPoint::new(rng.random_range(0.1 * w..=0.9 * w), rng.random_range(0.1 * h..=0.9 * h)))
        .collect();

    let billboards = (0..config.billboards)
        .map(|i| {
            let c = centers[rng.random_range(0..centers.len())];
            let p = clamp(disc_offset(&mut rng, c, config.cluster_spread_m));
            let size = rng.random_range(config.panel_min..=config.panel_max);
            Billboard {
                id: i as u32,
                location: p,
                panel_size: (size * 10.0).round() / 10.0,
                cost: 0,
            }
        })
        .collect();

    let trajectories = (0..config.trajectories)
        .map(|i| {
            let origin = if !centers.is_empty() && rng.random::<f64>() < config.cluster_bias {
                let c = centers[rng.random_range(0..centers.len())];
                clamp(disc_offset(&mut rng, c, 2.0 * config.cluster_spread_m))
            } else {
                GeoPoint::new(rng.random_range(0.0..=w), rng.random_range(0.0..=h))
            };
            let length = if rng.random::<f64>() < config.short_fraction {
                rng.random_range(config.min_length_m..=config.short_limit_m)
            } else {
                rng.random_range(config.short_limit_m..=config.max_length_m)
            };
            let steps = ((length / config.step_m).ceil() as usize).max(1);
            let mut heading = rng.random_range(0.0..2.0 * PI);
            let mut points = Vec::with_capacity(steps + 1);
            let mut at = origin;
            points.push(at);
            for _ in 0..steps {
                heading += rng.random_range(-0.5..0.5);
                let mut next = GeoPoint::new(
                    at.x + config.step_m * heading.cos(),
                    at.y + config.step_m * heading.sin(),
                );
                if !(0.0..=w).contains(&next.x) || !(0.0..=h).contains(&next.y) {
                    heading += PI;
                    next = clamp(GeoPoint::new(
                        at.x + config.step_m * heading.cos(),
                        at.y + config.step_m * heading.sin(),
                    ));
                }
                at = next;
                points.push(at);
            }
            Trajectory {
                id: i as u32,
                points,
            }
        })
        .collect();

    Ok((billboards, trajectories))
}

fn disc_offset(rng: &mut ChaCha8Rng, center: GeoPoint, radius: f64) -> GeoPoint {
    let r = radius * rng.random::<f64>().sqrt();
    let a = rng.random_range(0.0..2.0 * PI);
    GeoPoint::new(center.x + r * a.cos(), center.y + r * a.sin())
}

pub fn path_length(t: &Trajectory) -> f64 {
    t.points
        .windows(2)
        .map(|w| crate::model::distance(w[0], w[1]))
        .sum()
}

/// Writes `billboards.csv`, `trajectories.jsonl` and `manifest.json` into
/// `out_dir`.
pub fn generate_synthetic(config: &SyntheticConfig, out_dir: &Path) -> Result<DatasetManifest> {
    let (billboards, trajectories) = generate_planar(config)?;
    let projection = Projection::new(config.ref_lat, config.ref_lng);
    write_dataset(out_dir, &billboards, &trajectories, &projection, false, None, None)
}
