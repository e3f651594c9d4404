use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use log::info;
use sepvol_core::estimator::{self, integrate_volume, FTable, Normalization, Sweep};
use sepvol_core::io::{self, Checkpoint};
use sepvol_core::validate::{self, ValidateOptions};
use sepvol_core::{Case, Error, IndexRange, JacobianEvaluator, Result, RunConfig, VolumeReport};

use crate::args::{EstimateArgs, IntegrateArgs, JacobianArgs, ValidateArgs};
use crate::settings;

/// Outcome of a command that ran to completion.
pub enum Outcome {
    Success,
    /// The validation suite ran but some checks failed.
    ValidationFailed,
    /// Stopped on request after a checkpoint.
    Interrupted,
}

pub fn table_path(out: &Path, case: Case) -> PathBuf {
    out.join(format!("f_{case}.csv"))
}

pub fn checkpoint_path(out: &Path, case: Case) -> PathBuf {
    out.join(format!("checkpoint_{case}.json"))
}

pub fn report_path(out: &Path, case: Case) -> PathBuf {
    out.join(format!("volume_{case}.json"))
}

pub fn estimate_f(args: &EstimateArgs) -> Result<Outcome> {
    let config = settings::resolve(RunConfig::default(), &args.run)?;
    let sweep = Sweep::new(&config)?;
    let skip = sweep.spec().skip;
    let end = skip
        .checked_add(config.points)
        .ok_or_else(|| Error::Usage("point count exceeds the index space".into()))?;
    let cp_path = checkpoint_path(&config.out, config.case);

    let (mut acc, mut cursor) = if args.resume {
        let cp = io::load_checkpoint(&cp_path)?;
        cp.verify(&config)?;
        info!("resuming at index {} ({} points done)", cp.cursor, cp.cursor - skip);
        (cp.accumulator, cp.cursor)
    } else {
        (sweep.empty(), skip)
    };

    let step = match config.checkpoint_every {
        0 => config.points.max(1),
        n => n,
    };
    let mut written = 0;
    while cursor < end {
        let len = step.min(end - cursor);
        let part = sweep.accumulate_parallel(IndexRange::new(cursor, len), config.workers)?;
        acc = acc.merge(part)?;
        cursor += len;
        info!("{} / {} points", cursor - skip, config.points);
        if config.checkpoint_every > 0 && cursor < end {
            io::save_checkpoint(&cp_path, &Checkpoint::new(&config, cursor, acc.clone()))?;
            written += 1;
            if args.abort_after_checkpoints == Some(written) {
                info!("stopping after {written} checkpoints at index {cursor}");
                return Ok(Outcome::Interrupted);
            }
        }
    }
    if acc.fallbacks > 0 {
        log::warn!("{} states were tested point by point", acc.fallbacks);
    }

    let table = FTable::from_accumulator(acc, sweep.grid().to_vec(), Normalization::for_case(config.case))?;
    let csv = table_path(&config.out, config.case);
    let sidecar = io::write_table(&table, &config, &csv)?;
    if cp_path.exists() {
        fs::remove_file(&cp_path)?;
    }

    let mut stdout = std::io::stdout().lock();
    writeln!(stdout, "table    {}", csv.display())?;
    writeln!(stdout, "sidecar  {}", sidecar.display())?;
    writeln!(stdout, "digest   {}", table.digest)?;
    if table.total_points > 0 {
        let cal = estimator::calibrate_total(
            table.case,
            table.density_count,
            table.total_points,
            &table.normalization,
        )?;
        writeln!(
            stdout,
            "states   {} of {} points (fraction {:.6}, expected {:.6})",
            table.density_count, table.total_points, cal.density_fraction, cal.density_fraction_target
        )?;
        writeln!(
            stdout,
            "V_total  {:.8e} (exact {:.8e}, deviation {:+.3}%)",
            cal.v_total_estimate,
            cal.v_total_exact,
            100.0 * cal.relative_error
        )?;
        for mu in [0.5, 1.0] {
            if let Some(i) = table.index_of(mu) {
                writeln!(stdout, "{:<9}{:.6}", format!("f({mu})"), table.f_estimate(i))?;
            }
        }
    }
    Ok(Outcome::Success)
}

struct Reference {
    v_sep: f64,
    probability: f64,
    split_low: f64,
}

fn reference(case: Case) -> Reference {
    match case {
        Case::Real => Reference {
            v_sep: 0.000_729_811_2,
            probability: 0.453_130_01,
            split_low: 0.000_670_766_8,
        },
        Case::Complex => Reference {
            v_sep: 2.625_622_678e-7,
            probability: 0.232_509_91,
            split_low: 2.327_058_044e-7,
        },
    }
}

pub fn integrate(args: &IntegrateArgs) -> Result<Outcome> {
    let (table, sidecar) = io::read_table(&args.table)?;
    let config = settings::resolve(sidecar.config.clone(), &args.run)?;
    let digest = config.digest()?;
    if digest != table.digest {
        return Err(Error::Input(format!(
            "table digest {} does not match the requested configuration {digest}",
            table.digest
        )));
    }
    let ev = config.jacobian()?;
    let report = integrate_volume(&table, &ev, config.interp_degree)?;
    let path = report_path(&config.out, config.case);
    io::write_json(&path, &report)?;
    print_report(&report, &path)?;
    Ok(Outcome::Success)
}

fn print_report(report: &VolumeReport, path: &Path) -> Result<()> {
    let r = reference(report.case);
    let mut out = std::io::stdout().lock();
    writeln!(out, "report {}", path.display())?;
    writeln!(
        out,
        "{} case, {} points, {} grid values, degree-{} interpolation",
        report.case, report.points, report.grid, report.interpolation_degree
    )?;
    writeln!(out, "{:<24}{:>16}{:>16}{:>12}", "quantity", "estimate", "reference", "deviation")?;
    let rows = [
        (format!("V_sep [0, {}]", report.switch_point), report.split_low, r.split_low),
        ("V_sep".to_string(), report.v_sep, r.v_sep),
        ("probability".to_string(), report.probability, r.probability),
    ];
    for (name, est, reference) in rows {
        writeln!(
            out,
            "{name:<24}{est:>16.10e}{reference:>16.10e}{:>11.3}%",
            100.0 * (est - reference) / reference
        )?;
    }
    writeln!(out, "{:<24}{:>16.10e}", "V_total (exact)", report.v_total_exact)?;
    if let Some(p) = estimator::conjectured_probability(report.case) {
        writeln!(
            out,
            "{:<24}{p:>16.10e}{:>16}{:>11.3}%",
            "conjectured probability",
            "",
            100.0 * (report.probability - p) / p
        )?;
    }
    Ok(())
}

pub fn jacobian(args: &JacobianArgs) -> Result<Outcome> {
    if args.grid == 0 {
        return Err(Error::Usage("grid needs at least one value".into()));
    }
    let ev = JacobianEvaluator::with_params(args.case, args.switch_point, args.series_degree)?
        .with_mode(args.mode);
    let n = args.grid;
    let grid: Vec<f64> = match args.from {
        None => (1..=n).map(|i| args.to * i as f64 / n as f64).collect(),
        Some(from) if n == 1 => vec![from],
        Some(from) => (0..n)
            .map(|i| from + (args.to - from) * i as f64 / (n - 1) as f64)
            .collect(),
    };
    let rows = ev.table(&grid)?;
    let mut text = String::from("mu,jac\n");
    for (mu, v) in rows {
        text.push_str(&format!("{mu},{v:e}\n"));
    }
    match &args.out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            fs::write(path, text)?;
        }
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(Outcome::Success)
}

pub fn validate(args: &ValidateArgs) -> Result<Outcome> {
    let defaults = ValidateOptions::default();
    let opts = ValidateOptions {
        calibration_points_real: args.points_real,
        calibration_points_complex: args.points_complex,
        oracle_cases: args.oracle_cases,
        seed: args.seed,
        workers: args.workers.unwrap_or(defaults.workers),
        normalization_scale: args.normalization_scale,
    };
    if opts.workers == 0 {
        return Err(Error::Usage("worker count must be positive".into()));
    }
    let report = validate::run_all(&opts)?;
    if let Some(path) = &args.out {
        io::write_json(path, &report)?;
    }
    let mut out = std::io::stdout().lock();
    if args.json {
        serde_json::to_writer_pretty(&mut out, &report)?;
        writeln!(out)?;
    } else {
        for c in &report.checks {
            writeln!(
                out,
                "{} {:<26} measured {:<14.8e} expected {:<14.8e} tol {:<8.1e} {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.measured,
                c.expected,
                c.tolerance,
                c.detail
            )?;
        }
    }
    Ok(if report.passed() {
        Outcome::Success
    } else {
        Outcome::ValidationFailed
    })
}
