//! Run configuration and its digest.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geometry::Case;
use crate::jacobian::{self, JacobianEvaluator};
use crate::qmc::{SequenceKind, SequenceSpec};

pub const DEFAULT_GRID_SIZE: usize = 201;
pub const DEFAULT_POINTS: u64 = 100_000;
pub const DEFAULT_INTERP_DEGREE: usize = 3;
pub const MAX_INTERP_DEGREE: usize = 8;

/// How separable grid points are found for each sampled state.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathKind {
    /// Isolate the roots of the μ-quartic once and count whole grid intervals.
    #[default]
    Fast,
    /// Test every grid point individually.
    Slow,
}

impl std::str::FromStr for PathKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fast" => Ok(PathKind::Fast),
            "slow" => Ok(PathKind::Slow),
            other => Err(Error::Usage(format!("unknown path `{other}` (fast, slow)"))),
        }
    }
}

impl std::fmt::Display for PathKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PathKind::Fast => "fast",
            PathKind::Slow => "slow",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub case: Case,
    pub points: u64,
    /// Number of equally spaced μ values on `[0, 1]`, endpoints included.
    pub grid_size: usize,
    /// Additional μ values merged into the uniform grid.
    pub extra_mu: Vec<f64>,
    pub seed: u64,
    pub sequence: SequenceKind,
    /// Leading indices to discard; `None` means `base^4`.
    pub skip: Option<u64>,
    pub path: PathKind,
    pub switch_point: f64,
    pub series_degree: usize,
    pub interp_degree: usize,
    pub workers: usize,
    pub out: PathBuf,
    /// Points between checkpoints; 0 disables checkpointing.
    pub checkpoint_every: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            case: Case::Real,
            points: DEFAULT_POINTS,
            grid_size: DEFAULT_GRID_SIZE,
            extra_mu: Vec::new(),
            seed: 0,
            sequence: SequenceKind::Faure,
            skip: None,
            path: PathKind::Fast,
            switch_point: jacobian::DEFAULT_SWITCH_POINT,
            series_degree: jacobian::DEFAULT_SERIES_DEGREE,
            interp_degree: DEFAULT_INTERP_DEGREE,
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            out: PathBuf::from("out"),
            checkpoint_every: 0,
        }
    }
}

/// The fields that determine the sampled counts. Point count and worker
/// count are deliberately absent: runs can be extended and repartitioned.
#[derive(Serialize)]
struct DigestFields<'a> {
    version: u32,
    case: Case,
    grid: &'a [f64],
    sequence: SequenceSpec,
    path: PathKind,
}

impl RunConfig {
    pub fn for_case(case: Case) -> Self {
        Self {
            case,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_size < 2 {
            return Err(Error::Usage(format!(
                "grid needs at least 2 points, got {}",
                self.grid_size
            )));
        }
        if let Some(bad) = self.extra_mu.iter().find(|m| !(m.is_finite() && **m >= 0.0)) {
            return Err(Error::Usage(format!("extra grid value {bad} is not a finite μ >= 0")));
        }
        if !(1..=MAX_INTERP_DEGREE).contains(&self.interp_degree) {
            return Err(Error::Usage(format!(
                "interpolation degree must be in 1..={MAX_INTERP_DEGREE}, got {}",
                self.interp_degree
            )));
        }
        if self.grid_size <= self.interp_degree {
            return Err(Error::Usage(format!(
                "grid of {} points is too small for degree-{} interpolation",
                self.grid_size, self.interp_degree
            )));
        }
        if !(self.switch_point > 0.0 && self.switch_point < 1.0) {
            return Err(Error::Usage(format!(
                "switch point must lie in (0, 1), got {}",
                self.switch_point
            )));
        }
        if self.series_degree < jacobian::MIN_SERIES_DEGREE {
            return Err(Error::Usage(format!(
                "series degree must be at least {}, got {}",
                jacobian::MIN_SERIES_DEGREE,
                self.series_degree
            )));
        }
        if self.workers == 0 {
            return Err(Error::Usage("worker count must be positive".into()));
        }
        Ok(())
    }

    /// Sorted grid: the uniform grid plus any extra values, duplicates removed.
    pub fn grid(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let n = self.grid_size;
        let mut grid: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        grid.extend_from_slice(&self.extra_mu);
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        Ok(grid)
    }

    pub fn sequence_spec(&self) -> Result<SequenceSpec> {
        let spec = SequenceSpec::new(self.case.cube_dimension(), self.sequence, self.seed)?;
        Ok(match self.skip {
            Some(skip) => spec.with_skip(skip),
            None => spec,
        })
    }

    pub fn jacobian(&self) -> Result<JacobianEvaluator> {
        JacobianEvaluator::with_params(self.case, self.switch_point, self.series_degree)
    }

    /// Hex SHA-256 over the count-determining fields.
    pub fn digest(&self) -> Result<String> {
        let grid = self.grid()?;
        let fields = DigestFields {
            version: 1,
            case: self.case,
            grid: &grid,
            sequence: self.sequence_spec()?,
            path: self.path,
        };
        let bytes = serde_json::to_vec(&fields)?;
        Ok(Sha256::digest(&bytes)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect())
    }
}
