//! Algebra on Bloore-parameterized two-qubit density matrices.
//!
//! Off-diagonal entries are written as `ρ_ij = sqrt(ρ_ii ρ_jj) z_ij`. The
//! determinant then factors as `A · B` with `A = Π ρ_ii`, and the
//! determinant of the partial transpose factors as `(ρ22 ρ33)² · q(μ)`
//! where `q` is a quartic in the diagonal ratio `μ = sqrt(ρ11 ρ44 / (ρ22 ρ33))`.
//! Equivalently `det(ρ_PT) / A = q(μ) / μ²`, which has the sign of `q`.

mod cad;
mod matrix;
pub mod roots;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use cad::{cad_box, CadBox, Interval};
pub use matrix::{det3, det4, eigen_oracle, DensityMatrix4, Mat4};

/// Values within this distance below zero count as nonnegative.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// Row/column pairs (0-based) of the six independent off-diagonal entries,
/// in the order z12, z13, z14, z23, z24, z34.
pub const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Real (9-dimensional) or complex (15-dimensional) two-qubit states.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Case {
    Real,
    Complex,
}

impl Case {
    /// Dimension of the sampled cube of off-diagonal coordinates.
    pub fn cube_dimension(self) -> usize {
        match self {
            Case::Real => 6,
            Case::Complex => 12,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Case::Real => "real",
            Case::Complex => "complex",
        }
    }
}

impl std::fmt::Display for Case {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Case {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "real" => Ok(Case::Real),
            "complex" => Ok(Case::Complex),
            other => Err(Error::Usage(format!("unknown case `{other}`"))),
        }
    }
}

/// The six Bloore variables z12, z13, z14, z23, z24, z34.
///
/// Real vectors carry zero imaginary parts; the Hermitian completion
/// `z_ji = conj(z_ij)` is implied. Entries are not required to satisfy
/// `|z_ij| <= 1` at construction; [`is_density`] rejects vectors outside
/// that box.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlooreVector {
    z: [Complex64; 6],
    real: bool,
}

impl BlooreVector {
    pub fn real(z: [f64; 6]) -> Self {
        Self {
            z: z.map(|v| Complex64::new(v, 0.0)),
            real: true,
        }
    }

    pub fn complex(z: [Complex64; 6]) -> Self {
        let real = z.iter().all(|v| v.im == 0.0);
        Self { z, real }
    }

    pub fn zeros() -> Self {
        Self::real([0.0; 6])
    }

    pub fn entries(&self) -> &[Complex64; 6] {
        &self.z
    }

    /// Real parts in z12, z13, z14, z23, z24, z34 order.
    pub fn real_parts(&self) -> [f64; 6] {
        self.z.map(|v| v.re)
    }

    /// True when every entry has zero imaginary part.
    pub fn is_real(&self) -> bool {
        self.real
    }

    /// Entry of the unit-diagonal matrix Z (0-based indices).
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        use std::cmp::Ordering::*;
        match i.cmp(&j) {
            Equal => Complex64::new(1.0, 0.0),
            Less => self.z[pair_index(i, j)],
            Greater => self.z[pair_index(j, i)].conj(),
        }
    }

    /// `|z_ij| <= 1` for all six entries.
    pub fn in_unit_box(&self) -> bool {
        if self.real {
            self.z.iter().all(|v| v.re.abs() <= 1.0)
        } else {
            self.z.iter().all(|v| v.norm_sqr() <= 1.0)
        }
    }

    /// Relabels the basis by (1↔2, 3↔4). Combined with the matching swap of
    /// the diagonal this maps a state with ratio μ to one with ratio 1/μ.
    pub fn swapped(&self) -> Self {
        const PERM: [usize; 4] = [1, 0, 3, 2];
        let mut z = [Complex64::new(0.0, 0.0); 6];
        for (k, &(i, j)) in PAIRS.iter().enumerate() {
            z[k] = self.get(PERM[i], PERM[j]);
        }
        Self { z, real: self.real }
    }

    /// The unit-diagonal Hermitian matrix Z.
    pub fn unit_matrix(&self) -> Mat4 {
        let mut m = [[Complex64::new(0.0, 0.0); 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, slot) in row.iter_mut().enumerate() {
                *slot = self.get(i, j);
            }
        }
        m
    }
}

fn pair_index(i: usize, j: usize) -> usize {
    match (i, j) {
        (0, 1) => 0,
        (0, 2) => 1,
        (0, 3) => 2,
        (1, 2) => 3,
        (1, 3) => 4,
        (2, 3) => 5,
        _ => unreachable!("pair ({i},{j}) is not an upper off-diagonal position"),
    }
}

/// The diagonal ratio `μ = sqrt(ρ11 ρ44 / (ρ22 ρ33))`, strictly positive.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct DiagonalRatio(f64);

impl DiagonalRatio {
    pub fn new(mu: f64) -> Result<Self> {
        if mu.is_finite() && mu > 0.0 {
            Ok(Self(mu))
        } else {
            Err(Error::Domain(format!("diagonal ratio must be positive, got {mu}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Diagonal entries ρ11..ρ44 of a density matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiagonalVector([f64; 4]);

impl DiagonalVector {
    pub fn new(rho: [f64; 4]) -> Result<Self> {
        if rho.iter().any(|&r| !(r >= 0.0)) {
            return Err(Error::Domain(format!("negative diagonal entry in {rho:?}")));
        }
        let trace: f64 = rho.iter().sum();
        if (trace - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("diagonal trace is {trace}, expected 1")));
        }
        Ok(Self(rho))
    }

    pub fn entries(&self) -> [f64; 4] {
        self.0
    }

    /// `A = Π ρ_ii`.
    pub fn product(&self) -> f64 {
        self.0.iter().product()
    }

    pub fn ratio(&self) -> f64 {
        let [a, b, c, d] = self.0;
        (a * d / (b * c)).sqrt()
    }

    pub fn swapped(&self) -> Self {
        let [a, b, c, d] = self.0;
        Self([b, a, d, c])
    }
}

/// `ρ11 = ρ44 = μ/(2(1+μ))`, `ρ22 = ρ33 = 1/(2(1+μ))`.
pub fn representative_diagonal(mu: DiagonalRatio) -> DiagonalVector {
    let mu = mu.value();
    let outer = mu / (2.0 * (1.0 + mu));
    let inner = 1.0 / (2.0 * (1.0 + mu));
    DiagonalVector([outer, inner, inner, outer])
}

/// Builds ρ with `ρ_ij = sqrt(ρ_ii ρ_jj) z_ij`.
pub fn reconstruct(z: &BlooreVector, d: &DiagonalVector) -> DensityMatrix4 {
    let rho = d.entries();
    let scale = rho.map(f64::sqrt);
    let mut m = z.unit_matrix();
    for (i, row) in m.iter_mut().enumerate() {
        for (j, slot) in row.iter_mut().enumerate() {
            *slot = if i == j {
                Complex64::new(rho[i], 0.0)
            } else {
                *slot * (scale[i] * scale[j])
            };
        }
    }
    DensityMatrix4::from_entries(m)
}

/// Closed-form `B` for real Bloore variables.
pub fn factor_b_polynomial(z: [f64; 6]) -> f64 {
    let [z12, z13, z14, z23, z24, z34] = z;
    (z34 * z34 - 1.0) * z12 * z12
        + 2.0 * (z14 * (z24 - z23 * z34) + z13 * (z23 - z24 * z34)) * z12
        - z23 * z23
        - z24 * z24
        - z34 * z34
        + z14 * z14 * (z23 * z23 - 1.0)
        + z13 * z13 * (z24 * z24 - 1.0)
        + 2.0 * z23 * z24 * z34
        + 2.0 * z13 * z14 * (z34 - z23 * z24)
        + 1.0
}

/// `B = det Z`, the diagonal-free factor of `det ρ`.
pub fn factor_b(z: &BlooreVector) -> f64 {
    if z.is_real() {
        factor_b_polynomial(z.real_parts())
    } else {
        det4(&z.unit_matrix()).re
    }
}

/// Principal 3×3 minor of Z on the given 0-based indices.
pub fn minor3(z: &BlooreVector, which: [usize; 3]) -> Result<f64> {
    let [a, b, c] = which;
    if which.iter().any(|&i| i > 3) || a == b || b == c || a == c {
        return Err(Error::Usage(format!(
            "minor indices must be three distinct values in 0..4, got {which:?}"
        )));
    }
    if z.is_real() {
        let x = z.get(a, b).re;
        let y = z.get(a, c).re;
        let w = z.get(b, c).re;
        return Ok(1.0 - x * x - y * y - w * w + 2.0 * x * y * w);
    }
    let m = [
        [z.get(a, a), z.get(a, b), z.get(a, c)],
        [z.get(b, a), z.get(b, b), z.get(b, c)],
        [z.get(c, a), z.get(c, b), z.get(c, c)],
    ];
    Ok(det3(&m).re)
}

/// Positive semidefiniteness of ρ for any positive diagonal.
///
/// Given `|z_ij| <= 1`, nonnegativity of `B` together with the leading
/// 3×3 minor of Z suffices: by eigenvalue interlacing the 2×2 block is
/// PSD, so each larger leading block has at most one negative eigenvalue,
/// which a nonnegative determinant rules out.
pub fn is_density(z: &BlooreVector) -> bool {
    if !z.in_unit_box() {
        return false;
    }
    let minor = minor3(z, [0, 1, 2]).expect("fixed valid triple");
    minor >= -BOUNDARY_TOL && factor_b(z) >= -BOUNDARY_TOL
}

/// Coefficients of `q(μ) = det(ρ_PT) / (ρ22 ρ33)²` in increasing degree order.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MuQuartic {
    pub coeffs: [f64; 5],
}

/// Interpolation nodes for the complex case, plus the residual probe.
const QUARTIC_NODES: [f64; 5] = [1.0 / 3.0, 0.5, 1.0, 1.5, 2.0];
const QUARTIC_PROBE: f64 = 0.77;
const QUARTIC_RESIDUAL_TOL: f64 = 1e-9;

impl MuQuartic {
    /// Explicit coefficients for real Bloore variables.
    pub fn real(z: [f64; 6]) -> Self {
        let [z12, z13, z14, z23, z24, z34] = z;
        let c4 = -z14 * z14;
        let c3 = 2.0 * z14 * (z12 * z13 + z24 * z34);
        let c2 = (z34 * z34 - 1.0) * z12 * z12
            - 2.0 * (z14 * z23 + z13 * z24) * z34 * z12
            - z13 * z13
            + z14 * z14 * z23 * z23
            + (z13 * z13 - 1.0) * z24 * z24
            - z34 * z34
            - 2.0 * z13 * z14 * z23 * z24
            + 1.0;
        let c1 = 2.0 * z23 * (z12 * z24 + z13 * z34);
        let c0 = -z23 * z23;
        Self {
            coeffs: [c0, c1, c2, c3, c4],
        }
    }

    pub fn eval(&self, mu: f64) -> f64 {
        roots::eval(&self.coeffs, mu)
    }

    /// `{μ ∈ [lo, hi] : q(μ) >= -BOUNDARY_TOL}` as disjoint closed intervals.
    pub fn nonnegative_set(&self, lo: f64, hi: f64) -> Vec<(f64, f64)> {
        let mut shifted = self.coeffs;
        shifted[0] += BOUNDARY_TOL;
        roots::nonnegative_set(&shifted, lo, hi)
    }
}

/// `det(ρ_PT) / (ρ22 ρ33)²` for an explicit diagonal.
pub fn ptdet_ratio(z: &BlooreVector, d: &DiagonalVector) -> f64 {
    let [_, r22, r33, _] = d.entries();
    let inner = r22 * r33;
    reconstruct(z, d).partial_transpose().determinant() / (inner * inner)
}

/// `q(μ)`, the diagonal-free factor of the partial-transpose determinant.
pub fn ptdet_q(z: &BlooreVector, mu: DiagonalRatio) -> f64 {
    if z.is_real() {
        MuQuartic::real(z.real_parts()).eval(mu.value())
    } else {
        ptdet_ratio(z, &representative_diagonal(mu))
    }
}

/// Quartic coefficients of `q`: read off directly in the real case,
/// interpolated through five nodes otherwise.
pub fn mu_quartic(z: &BlooreVector) -> Result<MuQuartic> {
    if z.is_real() {
        return Ok(MuQuartic::real(z.real_parts()));
    }
    let sample = |mu: f64| ptdet_ratio(z, &representative_diagonal(DiagonalRatio(mu)));
    let values = QUARTIC_NODES.map(sample);
    let coeffs = interpolate_monomial(&QUARTIC_NODES, &values);
    let quartic = MuQuartic { coeffs };

    let direct = sample(QUARTIC_PROBE);
    let fitted = quartic.eval(QUARTIC_PROBE);
    let scale = coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| c.abs() * QUARTIC_PROBE.powi(k as i32))
        .sum::<f64>()
        .max(f64::MIN_POSITIVE);
    if !((direct - fitted).abs() <= QUARTIC_RESIDUAL_TOL * scale) {
        return Err(Error::Internal(format!(
            "quartic interpolation residual {:e} at μ={QUARTIC_PROBE} exceeds tolerance",
            (direct - fitted).abs() / scale
        )));
    }
    Ok(quartic)
}

/// Monomial coefficients of the degree-4 interpolant, via Newton divided differences.
fn interpolate_monomial(x: &[f64; 5], y: &[f64; 5]) -> [f64; 5] {
    let mut dd = *y;
    for level in 1..5 {
        for i in (level..5).rev() {
            dd[i] = (dd[i] - dd[i - 1]) / (x[i] - x[i - level]);
        }
    }
    // expand Σ dd[k] Π_{j<k} (μ - x_j) from the innermost term outwards
    let mut c = [0.0; 5];
    c[0] = dd[4];
    for (deg, k) in (0..4).rev().enumerate() {
        for i in (0..=deg).rev() {
            c[i + 1] += c[i];
            c[i] *= -x[k];
        }
        c[0] += dd[k];
    }
    c
}

/// μ-intervals within `[0, 1]` where the partial transpose has nonnegative determinant.
pub fn separable_mu_set(z: &BlooreVector) -> Result<Vec<(f64, f64)>> {
    separable_mu_set_on(z, 0.0, 1.0)
}

/// As [`separable_mu_set`], on an arbitrary `[lo, hi]` with `lo >= 0`.
pub fn separable_mu_set_on(z: &BlooreVector, lo: f64, hi: f64) -> Result<Vec<(f64, f64)>> {
    if !(lo >= 0.0 && hi >= lo && hi.is_finite()) {
        return Err(Error::Usage(format!("invalid μ range [{lo}, {hi}]")));
    }
    if !is_density(z) {
        return Ok(Vec::new());
    }
    Ok(mu_quartic(z)?.nonnegative_set(lo, hi))
}

/// Peres–Horodecki test: ρ is a state and `det(ρ_PT) >= 0`.
pub fn is_separable(z: &BlooreVector, mu: DiagonalRatio) -> bool {
    is_density(z) && ptdet_q(z, mu) >= -BOUNDARY_TOL
}

#[cfg(test)]
mod tests;
