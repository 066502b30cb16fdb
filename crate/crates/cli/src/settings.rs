//! Generator settings from defaults, an optional flat TOML file, `--set`
//! overrides and flags, in increasing precedence.
//!
//! File keys are `ComposerConfig` field names, with dots for nested fields
//! (`augment.contrast = [0.8, 1.2]`), plus the run keys `preset`, `n`, `mix`
//! and `workers`. TOML tables are flattened the same way.

use std::path::Path;

use clap::ValueEnum;
use serde_json::Value;
use techdraw_core::{ComposerConfig, Mix};

use crate::{CliError, CliResult, ConfigArgs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Ds2000,
    Ds5000,
    Ds7000,
}

impl Preset {
    pub fn images(self) -> usize {
        match self {
            Preset::Ds2000 => 2000,
            Preset::Ds5000 => 5000,
            Preset::Ds7000 => 7000,
        }
    }

    pub fn mix(self) -> Mix {
        Mix::default()
    }

    fn parse(s: &str) -> Option<Self> {
        <Preset as ValueEnum>::from_str(s, true).ok()
    }
}

#[derive(Debug, Clone)]
pub struct Settings {
    pub composer: ComposerConfig,
    pub n: Option<usize>,
    pub mix: Option<Mix>,
    pub workers: Option<usize>,
}

#[derive(Default)]
struct RunKeys {
    preset: Option<Preset>,
    n: Option<usize>,
    mix: Option<Mix>,
    workers: Option<usize>,
}

fn config_err(origin: &str, message: impl Into<String>) -> CliError {
    CliError::Config {
        origin: origin.to_string(),
        message: message.into(),
    }
}

fn as_count(origin: &str, key: &str, v: &toml::Value) -> CliResult<usize> {
    v.as_integer()
        .and_then(|i| usize::try_from(i).ok())
        .ok_or_else(|| config_err(origin, format!("`{key}` must be a non-negative integer")))
}

fn as_mix(origin: &str, v: &toml::Value) -> CliResult<Mix> {
    let fractions: Option<Vec<f64>> = v.as_array().map(|a| {
        a.iter()
            .filter_map(|x| x.as_float().or_else(|| x.as_integer().map(|i| i as f64)))
            .collect()
    });
    match fractions.as_deref() {
        Some(&[p, c]) => Mix::new(p, c).map_err(|e| config_err(origin, e.to_string())),
        _ => Err(config_err(origin, "`mix` must be a two-element array")),
    }
}

fn apply(
    origin: &str,
    tree: &mut Value,
    run: &mut RunKeys,
    key: &str,
    v: toml::Value,
) -> CliResult {
    if let toml::Value::Table(t) = v {
        for (k, v) in t {
            apply(origin, tree, run, &format!("{key}.{k}"), v)?;
        }
        return Ok(());
    }
    match key {
        "preset" => {
            let s = v.as_str().unwrap_or_default();
            run.preset = Some(
                Preset::parse(s)
                    .ok_or_else(|| config_err(origin, format!("unknown preset `{s}`")))?,
            );
        }
        "n" => run.n = Some(as_count(origin, key, &v)?),
        "workers" => run.workers = Some(as_count(origin, key, &v)?),
        "mix" => run.mix = Some(as_mix(origin, &v)?),
        _ => {
            let mut slot = &mut *tree;
            for part in key.split('.') {
                slot = slot
                    .get_mut(part)
                    .filter(|_| !part.is_empty())
                    .ok_or_else(|| config_err(origin, format!("unknown setting `{key}`")))?;
            }
            *slot = serde_json::to_value(v).map_err(|e| config_err(origin, e.to_string()))?;
        }
    }
    Ok(())
}

/// Parses the right side of `--set key=value` as a TOML value, falling back
/// to a bare string.
fn parse_value(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

impl Settings {
    pub fn load(
        args: &ConfigArgs,
        preset: Option<Preset>,
        n: Option<usize>,
        mix: Option<Mix>,
    ) -> CliResult<Self> {
        let mut tree = serde_json::to_value(ComposerConfig::default()).expect("config serializes");
        let mut run = RunKeys::default();
        if let Some(path) = &args.config {
            let origin = path.display().to_string();
            let text =
                std::fs::read_to_string(path).map_err(|e| config_err(&origin, e.to_string()))?;
            let table: toml::Table = text
                .parse()
                .map_err(|e: toml::de::Error| config_err(&origin, e.message()))?;
            for (k, v) in table {
                apply(&origin, &mut tree, &mut run, &k, v)?;
            }
            if run.preset.is_some() && (run.n.is_some() || run.mix.is_some()) {
                return Err(CliError::Usage(format!(
                    "{origin}: `preset` cannot be combined with `n` or `mix`"
                )));
            }
            if let Some(dir) = tree.get_mut("crop_dir").filter(|v| v.is_string()) {
                let base = path.parent().unwrap_or(Path::new("."));
                *dir = Value::String(base.join(dir.as_str().unwrap()).display().to_string());
            }
        }
        for s in &args.set {
            let (k, v) = s
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("--set `{s}` is not KEY=VALUE")))?;
            apply(
                "--set",
                &mut tree,
                &mut run,
                k.trim(),
                parse_value(v.trim()),
            )?;
        }
        if let Some(seed) = args.seed {
            tree["seed"] = seed.into();
        }
        let composer: ComposerConfig =
            serde_json::from_value(tree).map_err(|e| config_err("settings", e.to_string()))?;

        let (n, mix) = match (preset, n) {
            (Some(p), _) => (Some(p.images()), Some(p.mix())),
            (None, Some(n)) => (Some(n), mix.or(run.mix)),
            (None, None) => match run.preset {
                Some(p) => (Some(p.images()), mix.or(Some(p.mix()))),
                None => (run.n, mix.or(run.mix)),
            },
        };
        Ok(Settings {
            composer,
            n,
            mix,
            workers: args.workers.or(run.workers),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(set: &[&str]) -> ConfigArgs {
        ConfigArgs {
            set: set.iter().map(|s| s.to_string()).collect(),
            ..ConfigArgs::default()
        }
    }

    #[test]
    fn presets_expand_to_fixed_sizes() {
        for (p, n, split) in [
            (Preset::Ds2000, 2000, (1400, 600)),
            (Preset::Ds5000, 5000, (3500, 1500)),
            (Preset::Ds7000, 7000, (4900, 2100)),
        ] {
            let s = Settings::load(&ConfigArgs::default(), Some(p), None, None).unwrap();
            assert_eq!(s.n, Some(n));
            assert_eq!(s.mix.unwrap().counts(n), split);
        }
    }

    #[test]
    fn set_overrides_nested_fields() {
        let s = Settings::load(
            &args(&[
                "augment.contrast=[0.8, 1.2]",
                "tolerance_fraction=0.5",
                "seed=9",
                "n=12",
            ]),
            None,
            None,
            None,
        )
        .unwrap();
        assert_eq!(s.composer.augment.contrast, (0.8, 1.2));
        assert_eq!(s.composer.tolerance_fraction, 0.5);
        assert_eq!(s.composer.seed, 9);
        assert_eq!(s.n, Some(12));
    }

    #[test]
    fn flags_beat_file() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("c.toml");
        std::fs::write(
            &file,
            "seed = 3\nn = 50\nmix = [0.5, 0.5]\n[augment]\nbrightness = [0.9, 1.1]\n",
        )
        .unwrap();
        let a = ConfigArgs {
            seed: Some(4),
            config: Some(file.clone()),
            ..ConfigArgs::default()
        };
        let s = Settings::load(&a, None, Some(10), None).unwrap();
        assert_eq!((s.composer.seed, s.n), (4, Some(10)));
        assert_eq!(s.mix, Some(Mix::new(0.5, 0.5).unwrap()));
        assert_eq!(s.composer.augment.brightness, (0.9, 1.1));
    }

    #[test]
    fn unknown_keys_and_conflicts_are_rejected() {
        assert!(Settings::load(&args(&["nope=1"]), None, None, None).is_err());
        assert!(Settings::load(&args(&["augment.nope=1"]), None, None, None).is_err());
        assert!(Settings::load(&args(&["tolerance_fraction=\"x\""]), None, None, None).is_err());
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("c.toml");
        std::fs::write(&file, "preset = \"ds2000\"\nn = 5\n").unwrap();
        let a = ConfigArgs {
            config: Some(file),
            ..ConfigArgs::default()
        };
        assert!(matches!(
            Settings::load(&a, None, None, None),
            Err(CliError::Usage(_))
        ));
    }
}
