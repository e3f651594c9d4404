//! Self-checks bundled for the `validate` command: exact jacobian
//! identities, total-volume calibration and oracle equivalences.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{PathKind, RunConfig};
use crate::error::Result;
use crate::estimator::{calibrate_total, Normalization, Sweep};
use crate::geometry::{
    cad_box, eigen_oracle, is_density, reconstruct, BlooreVector, Case, DiagonalVector,
};
use crate::jacobian;
use crate::qmc::{IndexRange, SequenceKind};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidateOptions {
    pub calibration_points_real: u64,
    pub calibration_points_complex: u64,
    /// Random cases per oracle-equivalence check.
    pub oracle_cases: usize,
    pub seed: u64,
    pub workers: usize,
    /// Multiplies the normalization constant; anything but 1 should fail calibration.
    pub normalization_scale: f64,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        Self {
            calibration_points_real: 1_000_000,
            calibration_points_complex: 4_000_000,
            oracle_cases: 10_000,
            seed: 0,
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            normalization_scale: 1.0,
        }
    }
}

fn relative_check(name: &str, measured: f64, expected: f64, tolerance: f64) -> CheckResult {
    let rel = ((measured - expected) / expected).abs();
    CheckResult {
        name: name.into(),
        passed: rel <= tolerance,
        measured,
        expected,
        tolerance,
        detail: format!("relative deviation {rel:.3e}"),
    }
}

fn mismatch_check(name: &str, mismatches: usize, checked: usize) -> CheckResult {
    CheckResult {
        name: name.into(),
        passed: mismatches == 0 && checked > 0,
        measured: mismatches as f64,
        expected: 0.0,
        tolerance: 0.0,
        detail: format!("{mismatches} disagreements in {checked} cases"),
    }
}

pub fn jacobian_integral_check(case: Case) -> Result<CheckResult> {
    Ok(relative_check(
        &format!("jacobian-integral-{case}"),
        jacobian::integral_check(case)?,
        jacobian::exact_integral(case),
        1e-10,
    ))
}

pub fn series_remainder_check(case: Case) -> CheckResult {
    let m = jacobian::singularity_order(case);
    let valuation = jacobian::numerator_series(case, m + 4).valuation();
    let measured = valuation.map_or(f64::INFINITY, |v| v as f64);
    CheckResult {
        name: format!("series-remainder-{case}"),
        passed: valuation == Some(m),
        measured,
        expected: m as f64,
        tolerance: 0.0,
        detail: format!("numerator coefficients 0..{m} vanish exactly"),
    }
}

pub fn calibration_check(case: Case, opts: &ValidateOptions) -> Result<CheckResult> {
    let (points, tolerance) = match case {
        Case::Real => (opts.calibration_points_real, 0.005),
        Case::Complex => (opts.calibration_points_complex, 0.02),
    };
    let config = RunConfig {
        case,
        points,
        seed: opts.seed,
        workers: opts.workers,
        ..RunConfig::default()
    };
    let sweep = Sweep::new(&config)?;
    let acc = sweep.accumulate_parallel(IndexRange::new(sweep.spec().skip, points), opts.workers)?;
    let norm = Normalization::for_case(case).scaled(opts.normalization_scale);
    let cal = calibrate_total(case, acc.density_count, acc.total_points, &norm)?;
    let mut check = relative_check(
        &format!("total-volume-{case}"),
        cal.v_total_estimate,
        cal.v_total_exact,
        tolerance,
    );
    check.detail = format!(
        "{}; {points} points, density fraction {:.6} (target {:.6})",
        check.detail, cal.density_fraction, cal.density_fraction_target
    );
    Ok(check)
}

/// Real states inside the nested-interval box are states and vice versa,
/// away from the box boundary.
pub fn cad_equivalence_check(opts: &ValidateOptions) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0xcad);
    let (mut checked, mut mismatches) = (0, 0);
    while checked < opts.oracle_cases {
        let z: [f64; 6] = std::array::from_fn(|_| rng.gen_range(-1.0..=1.0));
        let b = cad_box(z[0], z[1], z[2], z[3], z[4]);
        let edge = [
            b.z23.edge_distance(z[3]),
            b.z24.edge_distance(z[4]),
            b.z34.edge_distance(z[5]),
        ];
        if edge.iter().any(|&d| d < 1e-10) {
            continue;
        }
        checked += 1;
        if b.contains(z[3], z[4], z[5], 0.0) != is_density(&BlooreVector::real(z)) {
            mismatches += 1;
        }
    }
    mismatch_check("cad-equivalence", mismatches, checked)
}

/// `is_density` against the smallest eigenvalue of the reconstructed matrix.
pub fn eigen_oracle_check(opts: &ValidateOptions) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0xe16e);
    let diag = DiagonalVector::new([0.25; 4])?;
    let (mut checked, mut mismatches) = (0, 0);
    while checked < opts.oracle_cases {
        let z = if checked % 2 == 0 {
            BlooreVector::real(std::array::from_fn(|_| rng.gen_range(-1.0..=1.0)))
        } else {
            let z = BlooreVector::complex(std::array::from_fn(|_| {
                num_complex::Complex64::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0))
            }));
            if !z.in_unit_box() {
                continue;
            }
            z
        };
        let min_eig = eigen_oracle(&reconstruct(&z, &diag))?[0];
        if min_eig.abs() < 1e-10 {
            continue;
        }
        checked += 1;
        if is_density(&z) != (min_eig > 0.0) {
            mismatches += 1;
        }
    }
    Ok(mismatch_check("eigen-oracle", mismatches, checked))
}

/// Interval counting against per-grid-point testing on the same points.
pub fn path_equivalence_check(case: Case, opts: &ValidateOptions) -> Result<CheckResult> {
    let fast = RunConfig {
        case,
        sequence: SequenceKind::UniformPrng,
        seed: opts.seed,
        ..RunConfig::default()
    };
    let slow = RunConfig {
        path: PathKind::Slow,
        ..fast.clone()
    };
    let range = IndexRange::new(0, opts.oracle_cases as u64);
    let a = Sweep::new(&fast)?.accumulate_parallel(range, opts.workers)?;
    let b = Sweep::new(&slow)?.accumulate_parallel(range, opts.workers)?;
    let grid = fast.grid()?;
    let differing = a
        .separable_count
        .iter()
        .zip(&b.separable_count)
        .filter(|(x, y)| x != y)
        .count();
    let mut check = mismatch_check(&format!("path-equivalence-{case}"), differing, grid.len());
    check.detail = format!(
        "{differing} of {} grid counts differ over {} points ({} states)",
        grid.len(),
        opts.oracle_cases,
        a.density_count
    );
    Ok(check)
}

/// Runs every check; failures are reported in the result, not as errors.
pub fn run_all(opts: &ValidateOptions) -> Result<ValidationReport> {
    let mut checks = Vec::new();
    for case in [Case::Real, Case::Complex] {
        checks.push(jacobian_integral_check(case)?);
        checks.push(series_remainder_check(case));
    }
    for case in [Case::Real, Case::Complex] {
        checks.push(calibration_check(case, opts)?);
    }
    checks.push(cad_equivalence_check(opts));
    checks.push(eigen_oracle_check(opts)?);
    for case in [Case::Real, Case::Complex] {
        checks.push(path_equivalence_check(case, opts)?);
    }
    Ok(ValidationReport { checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> ValidateOptions {
        ValidateOptions {
            calibration_points_real: 200_000,
            calibration_points_complex: 200_000,
            oracle_cases: 2_000,
            ..ValidateOptions::default()
        }
    }

    #[test]
    fn exact_checks_pass() {
        for case in [Case::Real, Case::Complex] {
            assert!(jacobian_integral_check(case).unwrap().passed);
            assert!(series_remainder_check(case).passed);
        }
    }

    #[test]
    fn oracle_checks_pass() {
        let opts = quick();
        assert!(cad_equivalence_check(&opts).passed);
        assert!(eigen_oracle_check(&opts).unwrap().passed);
        assert!(path_equivalence_check(Case::Real, &opts).unwrap().passed);
    }

    #[test]
    fn corrupted_normalization_fails_calibration() {
        let opts = ValidateOptions {
            normalization_scale: 0.5,
            ..quick()
        };
        let check = calibration_check(Case::Real, &opts).unwrap();
        assert!(!check.passed);
        assert!((check.measured / check.expected - 0.5).abs() < 0.01);
        let good = calibration_check(Case::Real, &quick()).unwrap();
        assert!(good.passed, "{good:?}");
    }
}
