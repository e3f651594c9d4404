//! Nested interval description of the real positivity region.
//!
//! For fixed `z12, z13, z14 ∈ [-1, 1]` the admissible `z23`, `z24` lie in
//! intervals that depend only on those three values, and the admissible
//! `z34` lies in an interval that depends on all five preceding variables.

use serde::{Deserialize, Serialize};

/// Closed real interval; `lo > hi` denotes the empty set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi
    }

    pub fn contains(&self, x: f64, tol: f64) -> bool {
        x >= self.lo - tol && x <= self.hi + tol
    }

    /// Distance from `x` to the nearest endpoint.
    pub fn edge_distance(&self, x: f64) -> f64 {
        (x - self.lo).abs().min((x - self.hi).abs())
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo).max(0.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CadBox {
    pub z23: Interval,
    pub z24: Interval,
    pub z34: Interval,
    /// `|z12| = 1`: the `z34` interval is the limiting one, rows 1 and 2 coincide up to sign.
    pub degenerate: bool,
}

impl CadBox {
    /// Membership of `(z23, z24, z34)`, assuming the box was built from the same leading values.
    pub fn contains(&self, z23: f64, z24: f64, z34: f64, tol: f64) -> bool {
        self.z23.contains(z23, tol) && self.z24.contains(z24, tol) && self.z34.contains(z34, tol)
    }
}

fn pair_interval(a: f64, b: f64) -> Interval {
    let centre = a * b;
    let half = (1.0 - a * a).max(0.0).sqrt() * (1.0 - b * b).max(0.0).sqrt();
    Interval::new(centre - half, centre + half)
}

/// Builds the three nested intervals for the given leading variables.
///
/// `z23` and `z24` enter only the `z34` interval. The product under the
/// square root of the `z34` half-width is formed before taking the root, so
/// the arithmetic stays real; it is clamped at zero outside the region.
pub fn cad_box(z12: f64, z13: f64, z14: f64, z23: f64, z24: f64) -> CadBox {
    let int23 = pair_interval(z12, z13);
    let int24 = pair_interval(z12, z14);

    let denom = 1.0 - z12 * z12;
    if denom <= 0.0 {
        // rows 1 and 2 are parallel: the remaining condition is the {1,3,4} minor
        return CadBox {
            z23: int23,
            z24: int24,
            z34: pair_interval(z13, z14),
            degenerate: true,
        };
    }

    let r3 = 1.0 - z12 * z12 - z13 * z13 + 2.0 * z12 * z13 * z23 - z23 * z23;
    let r4 = 1.0 - z12 * z12 - z14 * z14 + 2.0 * z12 * z14 * z24 - z24 * z24;
    let s = (r3 * r4).max(0.0).sqrt();
    let centre = z13 * z14 - z12 * z14 * z23 - z12 * z13 * z24 + z23 * z24;
    CadBox {
        z23: int23,
        z24: int24,
        z34: Interval::new((centre - s) / denom, (centre + s) / denom),
        degenerate: false,
    }
}
