pub mod config;
pub mod error;
pub mod estimator;
pub mod geometry;
pub mod io;
pub mod jacobian;
pub mod qmc;
pub mod quadrature;
pub mod series;
pub mod validate;

pub use config::{PathKind, RunConfig};
pub use error::{Error, Result};
pub use estimator::{Accumulator, Calibration, FTable, Interpolant, Normalization, Sweep, VolumeReport};
pub use geometry::{BlooreVector, Case, DiagonalRatio, DiagonalVector, MuQuartic};
pub use jacobian::{JacobianEvaluator, JacobianMode};
pub use io::{Checkpoint, TableSidecar};
pub use qmc::{IndexRange, PointStream, SequenceKind, SequenceSpec};
pub use validate::{CheckResult, ValidateOptions, ValidationReport};
