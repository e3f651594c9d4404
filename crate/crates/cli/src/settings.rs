use std::fs;

use serde_json::Value;
use sepvol_core::{Error, Result, RunConfig};

use crate::args::RunArgs;

/// Layers a TOML config file and then explicit flags over `base`.
pub fn resolve(base: RunConfig, args: &RunArgs) -> Result<RunConfig> {
    let mut config = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
            let file: toml::Table = toml::from_str(&text)
                .map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
            overlay(&base, file)
                .map_err(|e| Error::Input(format!("{}: {e}", path.display())))?
        }
        None => base,
    };
    apply_flags(&mut config, args);
    config.validate()?;
    Ok(config)
}

fn overlay(base: &RunConfig, file: toml::Table) -> Result<RunConfig> {
    let mut value = serde_json::to_value(base)?;
    let fields = value.as_object_mut().expect("config serializes to an object");
    for (key, v) in serde_json::to_value(file)?.as_object().into_iter().flatten() {
        fields.insert(key.clone(), v.clone());
    }
    Ok(serde_json::from_value(Value::Object(fields.clone()))?)
}

fn apply_flags(config: &mut RunConfig, args: &RunArgs) {
    macro_rules! set {
        ($flag:ident => $field:ident) => {
            if let Some(v) = &args.$flag {
                config.$field = v.clone();
            }
        };
    }
    set!(case => case);
    set!(points => points);
    set!(grid => grid_size);
    set!(extra_mu => extra_mu);
    set!(seed => seed);
    set!(sequence => sequence);
    set!(path => path);
    set!(workers => workers);
    set!(switch_point => switch_point);
    set!(series_degree => series_degree);
    set!(interp_degree => interp_degree);
    set!(out => out);
    set!(checkpoint_every => checkpoint_every);
    if let Some(skip) = args.skip {
        config.skip = Some(skip);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use sepvol_core::{Case, SequenceKind};

    #[test]
    fn flags_win_over_file_and_file_over_base() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        fs::write(
            &path,
            "case = \"complex\"\npoints = 500\nsequence = \"scrambled-faure\"\nextra_mu = [0.3125]\n",
        )
        .unwrap();
        let args = RunArgs {
            config: Some(path),
            points: Some(900),
            ..RunArgs::default()
        };
        let base = RunConfig {
            seed: 7,
            ..RunConfig::default()
        };
        let cfg = resolve(base, &args).unwrap();
        assert_eq!(cfg.case, Case::Complex);
        assert_eq!(cfg.points, 900);
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.sequence, SequenceKind::ScrambledFaure);
        assert_eq!(cfg.extra_mu, vec![0.3125]);
    }

    #[test]
    fn unknown_keys_and_bad_values_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        fs::write(&path, "pionts = 5\n").unwrap();
        let args = RunArgs {
            config: Some(path.clone()),
            ..RunArgs::default()
        };
        assert!(matches!(resolve(RunConfig::default(), &args), Err(Error::Input(_))));
        let args = RunArgs {
            grid: Some(1),
            ..RunArgs::default()
        };
        assert!(matches!(resolve(RunConfig::default(), &args), Err(Error::Usage(_))));
    }
}
