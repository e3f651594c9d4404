//! Estimation of f(μ) on a grid, calibration against the known total
//! volumes, and assembly of separable volumes and probabilities.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{PathKind, RunConfig};
use crate::error::{Error, Result};
use crate::geometry::{
    self, is_density, ptdet_ratio, BlooreVector, Case, DiagonalRatio, DiagonalVector, BOUNDARY_TOL,
};
use crate::jacobian::{self, JacobianEvaluator};
use crate::qmc::{IndexRange, PointStream, SequenceSpec};
use crate::quadrature::{self, Tolerance};

/// Number of points per parallel work item.
const CHUNK: u64 = 1 << 14;

/// Constant that turns a fraction of cube points into a Hilbert–Schmidt volume density.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    /// Volume-element weight of the off-diagonal coordinates: √2 per real, 2 per complex entry.
    pub off_diagonal_weight: f64,
    /// Volume of the sampled cube `[-1, 1]^m`.
    pub cube_volume: f64,
    /// Volume-element factor of the trace-constrained diagonal.
    pub diagonal_factor: f64,
}

impl Normalization {
    pub fn for_case(case: Case) -> Self {
        match case {
            Case::Real => Self {
                off_diagonal_weight: 8.0,
                cube_volume: 64.0,
                diagonal_factor: 2.0,
            },
            Case::Complex => Self {
                off_diagonal_weight: 64.0,
                cube_volume: 4096.0,
                diagonal_factor: 2.0,
            },
        }
    }

    pub fn constant(&self) -> f64 {
        self.off_diagonal_weight * self.cube_volume * self.diagonal_factor
    }

    /// Same constant with the off-diagonal weight multiplied by `factor`.
    pub fn scaled(mut self, factor: f64) -> Self {
        self.off_diagonal_weight *= factor;
        self
    }
}

/// Hilbert–Schmidt volume of all two-qubit states.
pub fn exact_total_volume(case: Case) -> f64 {
    match case {
        Case::Real => PI.powi(4) / 60480.0,
        Case::Complex => PI.powi(6) / 851_350_500.0,
    }
}

/// Expected fraction of cube points that are states:
/// `V_total / (2 ∫jac · normalization)`.
pub fn density_fraction_target(case: Case) -> f64 {
    match case {
        Case::Real => PI.powi(2) / 54.0,
        Case::Complex => PI.powi(6) / 442_368.0,
    }
}

/// Conjectured exact separability probability, where one is known.
pub fn conjectured_probability(case: Case) -> Option<f64> {
    match case {
        Case::Real => None,
        Case::Complex => {
            Some(4.0 * 3.0 * 49.0 * 11.0 * 13.0 * 3f64.sqrt() / (625.0 * PI.powi(6)))
        }
    }
}

/// Maps a cube point to Bloore variables, each coordinate `x ↦ 2x − 1`.
///
/// Complex points pair consecutive coordinates as (re, im). The result may
/// lie outside the unit polydisc; such points are rejected by [`is_density`].
pub fn sample_to_z(point: &[f64], case: Case) -> Result<BlooreVector> {
    let m = case.cube_dimension();
    if point.len() != m {
        return Err(Error::Usage(format!(
            "{case} sample needs {m} coordinates, got {}",
            point.len()
        )));
    }
    let map = |x: f64| 2.0 * x - 1.0;
    Ok(match case {
        Case::Real => BlooreVector::real(std::array::from_fn(|k| map(point[k]))),
        Case::Complex => BlooreVector::complex(std::array::from_fn(|k| {
            Complex64::new(map(point[2 * k]), map(point[2 * k + 1]))
        })),
    })
}

/// Peres–Horodecki test at one grid value; μ = 0 is the limit of a vanishing outer diagonal.
pub fn separable_at(z: &BlooreVector, mu: f64) -> bool {
    if mu > 0.0 {
        return DiagonalRatio::new(mu).is_ok_and(|r| geometry::is_separable(z, r));
    }
    if !is_density(z) {
        return false;
    }
    let q0 = if z.is_real() {
        geometry::MuQuartic::real(z.real_parts()).eval(0.0)
    } else {
        let d = DiagonalVector::new([0.0, 0.5, 0.5, 0.0]).expect("valid diagonal");
        ptdet_ratio(z, &d)
    };
    q0 >= -BOUNDARY_TOL
}

/// Partial counts over a set of point indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Accumulator {
    pub case: Case,
    pub digest: String,
    /// Disjoint, sorted, coalesced index ranges that were consumed.
    pub ranges: Vec<IndexRange>,
    pub total_points: u64,
    pub density_count: u64,
    pub separable_count: Vec<u64>,
    /// States whose quartic could not be formed and were tested per grid point instead.
    pub fallbacks: u64,
}

impl Accumulator {
    pub fn empty(case: Case, digest: impl Into<String>, grid_len: usize) -> Self {
        Self {
            case,
            digest: digest.into(),
            ranges: Vec::new(),
            total_points: 0,
            density_count: 0,
            separable_count: vec![0; grid_len],
            fallbacks: 0,
        }
    }

    /// Combines counts from disjoint index ranges of the same configuration.
    pub fn merge(mut self, other: Self) -> Result<Self> {
        if self.case != other.case || self.digest != other.digest {
            return Err(Error::Usage(format!(
                "cannot merge accumulators of different configurations ({} {} vs {} {})",
                self.case, self.digest, other.case, other.digest
            )));
        }
        if self.separable_count.len() != other.separable_count.len() {
            return Err(Error::Usage("cannot merge accumulators over different grids".into()));
        }
        let mut ranges = self.ranges;
        ranges.extend(other.ranges);
        ranges.retain(|r| !r.is_empty());
        ranges.sort();
        let mut coalesced: Vec<IndexRange> = Vec::with_capacity(ranges.len());
        for r in ranges {
            match coalesced.last_mut() {
                Some(last) if r.start < last.end() => {
                    return Err(Error::Usage(format!(
                        "index ranges overlap: [{}, {}) and [{}, {})",
                        last.start,
                        last.end(),
                        r.start,
                        r.end()
                    )));
                }
                Some(last) if r.start == last.end() => last.len += r.len,
                _ => coalesced.push(r),
            }
        }
        self.ranges = coalesced;
        self.total_points += other.total_points;
        self.density_count += other.density_count;
        self.fallbacks += other.fallbacks;
        for (a, b) in self.separable_count.iter_mut().zip(&other.separable_count) {
            *a += b;
        }
        Ok(self)
    }
}

/// Everything needed to turn point indices into counts.
#[derive(Clone, Debug)]
pub struct Sweep {
    case: Case,
    grid: Arc<Vec<f64>>,
    stream: PointStream,
    path: PathKind,
    digest: String,
}

impl Sweep {
    pub fn new(config: &RunConfig) -> Result<Self> {
        let grid = config.grid()?;
        Ok(Self {
            case: config.case,
            grid: Arc::new(grid),
            stream: PointStream::new(config.sequence_spec()?),
            path: config.path,
            digest: config.digest()?,
        })
    }

    pub fn case(&self) -> Case {
        self.case
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn digest(&self) -> &str {
        &self.digest
    }

    pub fn spec(&self) -> &SequenceSpec {
        self.stream.spec()
    }

    pub fn empty(&self) -> Accumulator {
        Accumulator::empty(self.case, self.digest.clone(), self.grid.len())
    }

    /// Counts one index range on the calling thread.
    pub fn accumulate(&self, range: IndexRange) -> Accumulator {
        let grid = &self.grid[..];
        let n = grid.len();
        let hi = grid.last().copied().unwrap_or(1.0).max(1.0);
        let mut acc = self.empty();
        let mut diff = vec![0i64; n + 1];
        let mut point = vec![0.0; self.case.cube_dimension()];
        for index in range.indices() {
            self.stream.point_at(index, &mut point);
            let z = sample_to_z(&point, self.case).expect("stream dimension matches case");
            if !is_density(&z) {
                continue;
            }
            acc.density_count += 1;
            let intervals = match self.path {
                PathKind::Fast => geometry::separable_mu_set_on(&z, 0.0, hi).ok(),
                PathKind::Slow => None,
            };
            match intervals {
                Some(set) => {
                    for (a, b) in set {
                        let first = grid.partition_point(|&g| g < a);
                        let last = grid.partition_point(|&g| g <= b);
                        if first < last {
                            diff[first] += 1;
                            diff[last] -= 1;
                        }
                    }
                }
                None => {
                    if self.path == PathKind::Fast {
                        acc.fallbacks += 1;
                    }
                    for (i, &mu) in grid.iter().enumerate() {
                        if separable_at(&z, mu) {
                            diff[i] += 1;
                            diff[i + 1] -= 1;
                        }
                    }
                }
            }
        }
        let mut running = 0i64;
        for (count, d) in acc.separable_count.iter_mut().zip(&diff) {
            running += d;
            *count = running as u64;
        }
        acc.total_points = range.len;
        if !range.is_empty() {
            acc.ranges.push(range);
        }
        acc
    }

    /// Counts a range in parallel on `workers` threads. The result does not
    /// depend on `workers`: chunks are fixed-size and merged in index order.
    pub fn accumulate_parallel(&self, range: IndexRange, workers: usize) -> Result<Accumulator> {
        if workers == 0 {
            return Err(Error::Usage("worker count must be positive".into()));
        }
        let chunks: Vec<IndexRange> = (0..range.len.div_ceil(CHUNK))
            .map(|k| {
                let start = range.start + k * CHUNK;
                IndexRange::new(start, CHUNK.min(range.end() - start))
            })
            .collect();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
        let parts: Vec<Accumulator> =
            pool.install(|| chunks.par_iter().map(|&c| self.accumulate(c)).collect());
        parts.into_iter().try_fold(self.empty(), Accumulator::merge)
    }
}

/// Normalized estimates of f on a grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FTable {
    pub case: Case,
    pub grid: Vec<f64>,
    pub separable_count: Vec<u64>,
    pub density_count: u64,
    pub total_points: u64,
    pub normalization: Normalization,
    pub digest: String,
    pub ranges: Vec<IndexRange>,
}

impl FTable {
    pub fn from_accumulator(acc: Accumulator, grid: Vec<f64>, normalization: Normalization) -> Result<Self> {
        if grid.len() != acc.separable_count.len() {
            return Err(Error::Usage(format!(
                "grid has {} values but the accumulator has {} counts",
                grid.len(),
                acc.separable_count.len()
            )));
        }
        let table = Self {
            case: acc.case,
            grid,
            separable_count: acc.separable_count,
            density_count: acc.density_count,
            total_points: acc.total_points,
            normalization,
            digest: acc.digest,
            ranges: acc.ranges,
        };
        table.check()?;
        Ok(table)
    }

    /// Structural invariants: sorted grid, counts bounded by the density count.
    pub fn check(&self) -> Result<()> {
        if self.grid.len() != self.separable_count.len() {
            return Err(Error::Input("grid and count columns differ in length".into()));
        }
        if self.grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Input("grid is not strictly increasing".into()));
        }
        if self.density_count > self.total_points {
            return Err(Error::Input(format!(
                "density count {} exceeds total points {}",
                self.density_count, self.total_points
            )));
        }
        if let Some(i) = self.separable_count.iter().position(|&c| c > self.density_count) {
            return Err(Error::Input(format!(
                "separable count at mu = {} exceeds the density count",
                self.grid[i]
            )));
        }
        Ok(())
    }

    pub fn f_estimate(&self, i: usize) -> f64 {
        self.normalization.constant() * self.separable_count[i] as f64 / self.total_points as f64
    }

    pub fn f_values(&self) -> Vec<f64> {
        (0..self.grid.len()).map(|i| self.f_estimate(i)).collect()
    }

    /// Binomial standard error of `f_estimate(i)` treating points as independent.
    pub fn f_std_error(&self, i: usize) -> f64 {
        let n = self.total_points as f64;
        let p = self.separable_count[i] as f64 / n;
        self.normalization.constant() * (p * (1.0 - p) / n).sqrt()
    }

    /// Index of the grid value equal to `mu`, if present.
    pub fn index_of(&self, mu: f64) -> Option<usize> {
        self.grid.iter().position(|&g| g == mu)
    }

    /// Interpolant of f through the grid values within `[0, 1]`.
    pub fn interpolant(&self, degree: usize) -> Result<Interpolant> {
        let keep = self.grid.partition_point(|&g| g <= 1.0);
        Interpolant::new(self.grid[..keep].to_vec(), self.f_values()[..keep].to_vec(), degree)
    }
}

/// Piecewise Lagrange interpolation on the `degree + 1` nodes nearest each panel.
#[derive(Clone, Debug, PartialEq)]
pub struct Interpolant {
    nodes: Vec<f64>,
    values: Vec<f64>,
    degree: usize,
}

impl Interpolant {
    pub fn new(nodes: Vec<f64>, values: Vec<f64>, degree: usize) -> Result<Self> {
        if degree == 0 || nodes.len() != values.len() || nodes.len() <= degree {
            return Err(Error::Usage(format!(
                "degree-{degree} interpolation needs more than {degree} nodes, got {}",
                nodes.len()
            )));
        }
        Ok(Self {
            nodes,
            values,
            degree,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Index of the panel `[nodes[i], nodes[i + 1]]` containing `x` (clamped).
    fn panel(&self, x: f64) -> usize {
        let n = self.nodes.len();
        self.nodes.partition_point(|&g| g <= x).clamp(1, n - 1) - 1
    }

    /// Evaluates the polynomial of panel `panel` at `x`.
    pub fn eval_on(&self, panel: usize, x: f64) -> f64 {
        let n = self.nodes.len();
        let first = (panel + 1).saturating_sub(self.degree.div_ceil(2)).min(n - self.degree - 1);
        let xs = &self.nodes[first..=first + self.degree];
        let ys = &self.values[first..=first + self.degree];
        let mut sum = 0.0;
        for (j, (&xj, &yj)) in xs.iter().zip(ys).enumerate() {
            let mut basis = 1.0;
            for (k, &xk) in xs.iter().enumerate() {
                if k != j {
                    basis *= (x - xk) / (xj - xk);
                }
            }
            sum += yj * basis;
        }
        sum
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.eval_on(self.panel(x), x)
    }
}

/// Volume and probability assembled from an [`FTable`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeReport {
    pub case: Case,
    pub v_total_exact: f64,
    pub v_sep: f64,
    pub probability: f64,
    /// `2 ∫ jac f` over `[0, switch_point]`.
    pub split_low: f64,
    /// `2 ∫ jac f` over `[switch_point, 1]`.
    pub split_high: f64,
    pub switch_point: f64,
    pub points: u64,
    pub grid: usize,
    pub interpolation_degree: usize,
    pub digest: String,
}

/// `V_sep = 2 ∫₀¹ jac(μ) f(μ) dμ`, integrated panel by panel so the
/// interpolant is smooth on every quadrature interval.
pub fn integrate_volume(table: &FTable, ev: &JacobianEvaluator, degree: usize) -> Result<VolumeReport> {
    if table.case != ev.case() {
        return Err(Error::Usage(format!(
            "table is {} but the jacobian is {}",
            table.case,
            ev.case()
        )));
    }
    if table.total_points == 0 {
        return Err(Error::Input("table holds no sampled points".into()));
    }
    table.check()?;
    let interp = table.interpolant(degree)?;
    let nodes = interp.nodes();
    if nodes[0] != 0.0 || *nodes.last().expect("nonempty") != 1.0 {
        return Err(Error::Input("grid must include both endpoints 0 and 1".into()));
    }
    let s = ev.switch_point();
    let mut pieces = Vec::with_capacity(nodes.len());
    for (i, w) in nodes.windows(2).enumerate() {
        if w[0] < s && s < w[1] {
            pieces.push((i, w[0], s));
            pieces.push((i, s, w[1]));
        } else {
            pieces.push((i, w[0], w[1]));
        }
    }
    let tol = Tolerance::default();
    let parts: Vec<(f64, f64)> = pieces
        .par_iter()
        .map(|&(panel, a, b)| {
            let f = |mu: f64| Ok(ev.eval(mu)? * interp.eval_on(panel, mu));
            let v = 2.0 * quadrature::integrate(f, a, b, tol)?.value;
            Ok((a, v))
        })
        .collect::<Result<_>>()?;
    let split_low: f64 = parts.iter().filter(|(a, _)| *a < s).map(|(_, v)| v).sum();
    let split_high: f64 = parts.iter().filter(|(a, _)| *a >= s).map(|(_, v)| v).sum();
    let v_total_exact = exact_total_volume(table.case);
    let v_sep = split_low + split_high;
    Ok(VolumeReport {
        case: table.case,
        v_total_exact,
        v_sep,
        probability: v_sep / v_total_exact,
        split_low,
        split_high,
        switch_point: s,
        points: table.total_points,
        grid: table.grid.len(),
        interpolation_degree: degree,
        digest: table.digest.clone(),
    })
}

/// Total-volume estimate from the density count alone.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub case: Case,
    pub v_total_estimate: f64,
    pub v_total_exact: f64,
    pub relative_error: f64,
    pub density_fraction: f64,
    pub density_fraction_target: f64,
    pub points: u64,
}

/// `V_total ≈ 2 (∫jac) · normalization · density_count / total_points`.
pub fn calibrate_total(
    case: Case,
    density_count: u64,
    total_points: u64,
    normalization: &Normalization,
) -> Result<Calibration> {
    if total_points == 0 {
        return Err(Error::Numerical(
            "calibration is degenerate: no points were sampled".into(),
        ));
    }
    let fraction = density_count as f64 / total_points as f64;
    let estimate = 2.0 * jacobian::exact_integral(case) * normalization.constant() * fraction;
    let exact = exact_total_volume(case);
    Ok(Calibration {
        case,
        v_total_estimate: estimate,
        v_total_exact: exact,
        relative_error: (estimate - exact) / exact,
        density_fraction: fraction,
        density_fraction_target: density_fraction_target(case),
        points: total_points,
    })
}
