//! Shared fixtures for the benchmarks.

use sepvol_core::estimator::{FTable, Normalization, Sweep};
use sepvol_core::{Case, IndexRange, PathKind, RunConfig};

/// A run configuration sized for benchmarking.
pub fn config(case: Case, path: PathKind, points: u64) -> RunConfig {
    RunConfig {
        case,
        path,
        points,
        grid_size: 201,
        workers: 1,
        ..RunConfig::for_case(case)
    }
}

/// An f table from `points` low-discrepancy points.
pub fn table(case: Case, points: u64) -> FTable {
    let cfg = config(case, PathKind::Fast, points);
    let sweep = Sweep::new(&cfg).expect("valid config");
    let acc = sweep.accumulate(IndexRange::new(sweep.spec().skip, points));
    FTable::from_accumulator(acc, sweep.grid().to_vec(), Normalization::for_case(case))
        .expect("consistent table")
}
