//! Plain JSON records of star bodies.
//!
//! ```json
//! { "dimension": 2, "symmetric": true,
//!   "directions": [[1.0, 0.0], [0.0, 1.0], ...],
//!   "radii": [1.0, 0.5, ...] }
//! ```
//!
//! Directions are unit vectors (they are normalized on load). Between the
//! tabulated directions the gauge `1/r` is interpolated: linearly in the angle
//! on the circle, by inverse-distance weighting of the `m + 1` nearest
//! directions on higher spheres.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::body::{dot, Regularity, StarBody};
use super::search::direction_grid;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BodyRecord {
    pub dimension: usize,
    #[serde(default = "default_symmetric")]
    pub symmetric: bool,
    pub directions: Vec<Vec<f64>>,
    pub radii: Vec<f64>,
}

fn default_symmetric() -> bool {
    true
}

impl BodyRecord {
    /// Sample `body` on the shared direction grid.
    pub fn sample(body: &StarBody) -> Self {
        let grid = direction_grid(body.dim());
        BodyRecord {
            dimension: body.dim(),
            symmetric: body.is_symmetric(),
            directions: grid.iter().map(|u| u.to_vec()).collect(),
            radii: body.grid_radii().to_vec(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("records serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let rec: BodyRecord =
            serde_json::from_str(text).map_err(|e| Error::BodyFormat(e.to_string()))?;
        rec.validate()?;
        Ok(rec)
    }

    fn validate(&self) -> Result<()> {
        let m = self.dimension;
        if m < 2 {
            return Err(Error::BodyFormat(format!(
                "dimension must be >= 2, got {m}"
            )));
        }
        if self.directions.len() != self.radii.len() {
            return Err(Error::BodyFormat(format!(
                "{} directions but {} radii",
                self.directions.len(),
                self.radii.len()
            )));
        }
        if self.directions.len() < m + 1 {
            return Err(Error::BodyFormat("too few directions".into()));
        }
        if let Some(d) = self.directions.iter().find(|d| d.len() != m) {
            return Err(Error::BodyFormat(format!(
                "direction of length {} in R^{m}",
                d.len()
            )));
        }
        if self.directions.iter().any(|d| d.iter().all(|c| *c == 0.0)) {
            return Err(Error::BodyFormat("zero direction".into()));
        }
        if self.radii.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
            return Err(Error::BodyFormat(
                "radii must be positive and finite".into(),
            ));
        }
        Ok(())
    }

    /// Star body interpolating the record.
    pub fn to_body(&self) -> Result<StarBody> {
        self.validate()?;
        let m = self.dimension;
        let dirs: Vec<Vec<f64>> = self
            .directions
            .iter()
            .map(|d| {
                let n = dot(d, d).sqrt();
                d.iter().map(|c| c / n).collect()
            })
            .collect();
        let gauges: Vec<f64> = self.radii.iter().map(|r| 1.0 / r).collect();
        let body = if m == 2 {
            let mut table: Vec<(f64, f64)> = dirs
                .iter()
                .zip(&gauges)
                .map(|(d, g)| (d[1].atan2(d[0]), *g))
                .collect();
            table.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            StarBody::from_radial(
                2,
                move |u| 1.0 / circle_interp(&table, u[1].atan2(u[0])),
                self.symmetric,
                Regularity::Piecewise,
            )
        } else {
            StarBody::from_radial(
                m,
                move |u| 1.0 / idw(&dirs, &gauges, u, m + 1),
                self.symmetric,
                Regularity::Piecewise,
            )
        };
        Ok(body.with_label("record"))
    }
}

fn circle_interp(table: &[(f64, f64)], phi: f64) -> f64 {
    let n = table.len();
    let idx = table.partition_point(|e| e.0 <= phi);
    let (lo, hi) = if idx == 0 || idx == n {
        let lo = table[n - 1];
        let hi = table[0];
        (lo, hi)
    } else {
        (table[idx - 1], table[idx])
    };
    let span = (hi.0 - lo.0).rem_euclid(2.0 * PI);
    if span == 0.0 {
        return lo.1;
    }
    let t = (phi - lo.0).rem_euclid(2.0 * PI) / span;
    lo.1 + t * (hi.1 - lo.1)
}

fn idw(dirs: &[Vec<f64>], gauges: &[f64], u: &[f64], k: usize) -> f64 {
    let mut near: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
    for (i, d) in dirs.iter().enumerate() {
        let dist = (2.0 - 2.0 * dot(d, u)).max(0.0).sqrt();
        if dist < 1e-12 {
            return gauges[i];
        }
        if near.len() < k || dist < near[near.len() - 1].0 {
            let pos = near.partition_point(|e| e.0 < dist);
            near.insert(pos, (dist, i));
            near.truncate(k);
        }
    }
    let (num, den) = near.iter().fold((0.0, 0.0), |(a, b), &(d, i)| {
        let w = 1.0 / (d * d);
        (a + w * gauges[i], b + w)
    });
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::body::Ellipsoid;

    #[test]
    fn round_trip_preserves_samples() {
        let e = Ellipsoid::with_axes(&[1.0, 2.0]).unwrap().to_body();
        let rec = BodyRecord::sample(&e);
        let back = BodyRecord::from_json(&rec.to_json()).unwrap();
        assert_eq!(rec, back);
        let body = back.to_body().unwrap();
        for (d, r) in rec.directions.iter().zip(&rec.radii) {
            assert!((body.radial(d) - r).abs() < 1e-12 * r);
        }
        assert!((body.volume() - 2.0 * PI).abs() < 1e-3);
    }

    #[test]
    fn three_dimensional_record_is_exact_at_nodes() {
        let e = Ellipsoid::with_axes(&[1.0, 1.5, 0.8]).unwrap().to_body();
        let rec = BodyRecord::sample(&e);
        let body = rec.to_body().unwrap();
        for (d, r) in rec.directions.iter().zip(&rec.radii).step_by(101) {
            assert!((body.radial(d) - r).abs() < 1e-12);
        }
        let want = 4.0 * PI / 3.0 * 1.2;
        assert!((body.volume() - want).abs() < 1e-2 * want);
    }

    #[test]
    fn malformed_records_are_rejected() {
        assert!(BodyRecord::from_json("{\"dimension\": 2}").is_err());
        let bad = r#"{"dimension": 2, "directions": [[1,0],[0,1],[-1,0]], "radii": [1, 1]}"#;
        assert!(matches!(
            BodyRecord::from_json(bad),
            Err(Error::BodyFormat(_))
        ));
        let neg = r#"{"dimension": 2, "directions": [[1,0],[0,1],[-1,0]], "radii": [1, -1, 1]}"#;
        assert!(BodyRecord::from_json(neg).is_err());
    }
}
