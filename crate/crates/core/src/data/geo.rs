//! Equirectangular projection around a local reference point.

use serde::{Deserialize, Serialize};

use crate::model::GeoPoint;

/// Mean Earth radius in meters.
pub const EARTH_RADIUS_M: f64 = 6_371_008.8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    pub ref_lat: f64,
    pub ref_lng: f64,
}

impl Projection {
    pub fn new(ref_lat: f64, ref_lng: f64) -> Self {
        Projection { ref_lat, ref_lng }
    }

    fn x_scale(&self) -> f64 {
        EARTH_RADIUS_M * self.ref_lat.to_radians().cos()
    }

    pub fn to_plane(&self, lat: f64, lng: f64) -> GeoPoint {
        GeoPoint {
            x: (lng - self.ref_lng).to_radians() * self.x_scale(),
            y: (lat - self.ref_lat).to_radians() * EARTH_RADIUS_M,
        }
    }

    /// Inverse of [`Projection::to_plane`]; returns `(lat, lng)`.
    pub fn to_geo(&self, p: GeoPoint) -> (f64, f64) {
        let lat = self.ref_lat + (p.y / EARTH_RADIUS_M).to_degrees();
        let lng = self.ref_lng + (p.x / self.x_scale()).to_degrees();
        (lat, lng)
    }
}

/// Great-circle distance in meters.
pub fn haversine(lat1: f64, lng1: f64, lat2: f64, lng2: f64) -> f64 {
    let (p1, p2) = (lat1.to_radians(), lat2.to_radians());
    let dp = p2 - p1;
    let dl = (lng2 - lng1).to_radians();
    let a = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_M * a.sqrt().asin()
}
