//! On-disk formats: f tables (CSV plus JSON sidecar), volume reports and checkpoints.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::estimator::{Accumulator, FTable, Normalization};
use crate::geometry::Case;
use crate::qmc::IndexRange;

pub const TABLE_FORMAT_VERSION: u32 = 1;
pub const CHECKPOINT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    mu: f64,
    separable_count: u64,
    f_estimate: f64,
}

/// Metadata stored next to the CSV of an [`FTable`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableSidecar {
    pub format_version: u32,
    pub digest: String,
    pub config: RunConfig,
    pub case: Case,
    pub density_count: u64,
    pub total_points: u64,
    pub normalization: Normalization,
    pub ranges: Vec<IndexRange>,
    pub grid_size: usize,
}

pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

fn input_err(path: &Path, what: impl std::fmt::Display) -> Error {
    Error::Input(format!("{}: {what}", path.display()))
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| input_err(path, e))
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    serde_json::from_str(&read_to_string(path)?).map_err(|e| input_err(path, e))
}

/// Writes `table` as CSV to `csv_path` and its sidecar next to it.
pub fn write_table(table: &FTable, config: &RunConfig, csv_path: &Path) -> Result<PathBuf> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for (i, &mu) in table.grid.iter().enumerate() {
        w.serialize(Row {
            mu,
            separable_count: table.separable_count[i],
            f_estimate: table.f_estimate(i),
        })
        .map_err(|e| Error::Internal(format!("csv encoding: {e}")))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Internal(format!("csv encoding: {e}")))?;
    write_atomic(csv_path, &bytes)?;
    let sidecar = TableSidecar {
        format_version: TABLE_FORMAT_VERSION,
        digest: table.digest.clone(),
        config: config.clone(),
        case: table.case,
        density_count: table.density_count,
        total_points: table.total_points,
        normalization: table.normalization,
        ranges: table.ranges.clone(),
        grid_size: table.grid.len(),
    };
    let path = sidecar_path(csv_path);
    write_json(&path, &sidecar)?;
    Ok(path)
}

/// Reads a table and its sidecar, rejecting anything inconsistent.
pub fn read_table(csv_path: &Path) -> Result<(FTable, TableSidecar)> {
    let side_path = sidecar_path(csv_path);
    let sidecar: TableSidecar = read_json(&side_path)?;
    if sidecar.format_version != TABLE_FORMAT_VERSION {
        return Err(input_err(
            &side_path,
            format!("unsupported table format version {}", sidecar.format_version),
        ));
    }
    let expected_digest = sidecar.config.digest().map_err(|e| input_err(&side_path, e))?;
    if expected_digest != sidecar.digest {
        return Err(input_err(&side_path, "digest does not match the embedded configuration"));
    }
    if sidecar.case != sidecar.config.case {
        return Err(input_err(&side_path, "case does not match the embedded configuration"));
    }

    let text = read_to_string(csv_path)?;
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| input_err(csv_path, e))?.clone();
    if headers != vec!["mu", "separable_count", "f_estimate"] {
        return Err(input_err(csv_path, format!("unexpected header {headers:?}")));
    }
    let rows: Vec<Row> = reader
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| input_err(csv_path, e))?;
    if rows.is_empty() {
        return Err(input_err(csv_path, "table is empty"));
    }
    let grid: Vec<f64> = rows.iter().map(|r| r.mu).collect();
    let config_grid = sidecar.config.grid().map_err(|e| input_err(&side_path, e))?;
    if grid != config_grid || grid.len() != sidecar.grid_size {
        return Err(input_err(csv_path, "grid does not match the embedded configuration"));
    }
    let table = FTable {
        case: sidecar.case,
        grid,
        separable_count: rows.iter().map(|r| r.separable_count).collect(),
        density_count: sidecar.density_count,
        total_points: sidecar.total_points,
        normalization: sidecar.normalization,
        digest: sidecar.digest.clone(),
        ranges: sidecar.ranges.clone(),
    };
    table.check().map_err(|e| input_err(csv_path, e))?;
    let covered: u64 = table.ranges.iter().map(|r| r.len).sum();
    if covered != table.total_points {
        return Err(input_err(&side_path, "index ranges do not cover the point count"));
    }
    if table.total_points > 0 {
        for (i, row) in rows.iter().enumerate() {
            let want = table.f_estimate(i);
            if (row.f_estimate - want).abs() > 1e-12 * want.abs().max(1.0) {
                return Err(input_err(
                    csv_path,
                    format!("f_estimate at mu = {} disagrees with its count", row.mu),
                ));
            }
        }
    }
    Ok((table, sidecar))
}

/// Resumable state of a sweep: counts for `[skip, cursor)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format_version: u32,
    pub digest: String,
    pub config: RunConfig,
    /// Next point index to process.
    pub cursor: u64,
    pub accumulator: Accumulator,
}

impl Checkpoint {
    pub fn new(config: &RunConfig, cursor: u64, accumulator: Accumulator) -> Self {
        Self {
            format_version: CHECKPOINT_FORMAT_VERSION,
            digest: accumulator.digest.clone(),
            config: config.clone(),
            cursor,
            accumulator,
        }
    }

    /// Refuses checkpoints written by another version or configuration.
    pub fn verify(&self, config: &RunConfig) -> Result<()> {
        if self.format_version != CHECKPOINT_FORMAT_VERSION {
            return Err(Error::Input(format!(
                "unsupported checkpoint format version {}",
                self.format_version
            )));
        }
        let digest = config.digest()?;
        if self.digest != digest || self.accumulator.digest != digest {
            return Err(Error::Input(format!(
                "checkpoint digest {} does not match the current configuration {digest}",
                self.digest
            )));
        }
        let skip = config.sequence_spec()?.skip;
        let expected: Vec<IndexRange> = if self.cursor > skip {
            vec![IndexRange::new(skip, self.cursor - skip)]
        } else {
            Vec::new()
        };
        if self.cursor < skip
            || self.accumulator.ranges != expected
            || self.accumulator.total_points != self.cursor - skip
        {
            return Err(Error::Input(
                "checkpoint counts do not match its cursor".into(),
            ));
        }
        if self.cursor - skip > config.points {
            return Err(Error::Input(format!(
                "checkpoint already covers {} points, more than the {} requested",
                self.cursor - skip,
                config.points
            )));
        }
        Ok(())
    }
}

pub fn save_checkpoint(path: &Path, checkpoint: &Checkpoint) -> Result<()> {
    write_json(path, checkpoint)
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    read_json(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::Sweep;

    fn small_table(config: &RunConfig) -> FTable {
        let sweep = Sweep::new(config).unwrap();
        let acc = sweep.accumulate(IndexRange::new(sweep.spec().skip, 5000));
        FTable::from_accumulator(acc, sweep.grid().to_vec(), Normalization::for_case(config.case)).unwrap()
    }

    #[test]
    fn table_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let config = RunConfig {
            grid_size: 11,
            extra_mu: vec![0.618_033_988_749_894_9],
            ..RunConfig::default()
        };
        let table = small_table(&config);
        let path = dir.path().join("f.csv");
        write_table(&table, &config, &path).unwrap();
        let (back, sidecar) = read_table(&path).unwrap();
        assert_eq!(back, table);
        assert_eq!(sidecar.config, config);
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("mu,separable_count,f_estimate\n"));
    }

    #[test]
    fn corrupt_or_missing_tables_are_input_errors() {
        let dir = tempfile::tempdir().unwrap();
        let config = RunConfig {
            grid_size: 11,
            ..RunConfig::default()
        };
        let path = dir.path().join("f.csv");
        assert!(matches!(read_table(&path), Err(Error::Input(_))));

        write_table(&small_table(&config), &config, &path).unwrap();
        let original = fs::read_to_string(&path).unwrap();

        fs::write(&path, "mu,separable_count,f_estimate\n").unwrap();
        assert!(matches!(read_table(&path), Err(Error::Input(_))));

        let mut lines: Vec<String> = original.lines().map(String::from).collect();
        let fields: Vec<&str> = lines[1].split(',').collect();
        lines[1] = format!("{},99999999,{}", fields[0], fields[2]);
        fs::write(&path, lines.join("\n")).unwrap();
        assert!(matches!(read_table(&path), Err(Error::Input(_))));

        fs::write(&path, &original).unwrap();
        let side = sidecar_path(&path);
        let mut s: TableSidecar = read_json(&side).unwrap();
        s.config.seed = 42;
        write_json(&side, &s).unwrap();
        assert!(matches!(read_table(&path), Err(Error::Input(_))));
    }

    #[test]
    fn checkpoint_verification() {
        let dir = tempfile::tempdir().unwrap();
        let config = RunConfig {
            grid_size: 11,
            points: 10_000,
            ..RunConfig::default()
        };
        let sweep = Sweep::new(&config).unwrap();
        let skip = sweep.spec().skip;
        let acc = sweep.accumulate(IndexRange::new(skip, 3000));
        let cp = Checkpoint::new(&config, skip + 3000, acc);
        let path = dir.path().join("cp.json");
        save_checkpoint(&path, &cp).unwrap();
        let back = load_checkpoint(&path).unwrap();
        assert_eq!(back, cp);
        back.verify(&config).unwrap();

        let other = RunConfig { seed: 3, ..config.clone() };
        assert!(matches!(back.verify(&other), Err(Error::Input(_))));
        let fewer = RunConfig { points: 100, ..config.clone() };
        assert!(back.verify(&fewer).is_err());
        let mut shifted = back.clone();
        shifted.cursor += 1;
        assert!(shifted.verify(&config).is_err());
    }
}
