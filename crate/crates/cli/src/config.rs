use std::fs;
use std::path::{Path, PathBuf};

use gasfc_core::forecasting::StrategySpec;
use gasfc_core::Error;
use serde::{Deserialize, Serialize};

/// Experiment description read from a TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Mandatory; nothing is ever seeded from the clock.
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub data: DataConfig,
    #[serde(default)]
    pub walk: WalkConfig,
    pub strategy: StrategySpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    /// Frame file written by `gasfc frame`.
    pub frame: PathBuf,
    /// Seconds per step; the frame is mean-downsampled when coarser.
    #[serde(default = "default_resolution")]
    pub resolution: i64,
}

fn default_resolution() -> i64 {
    300
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WalkConfig {
    /// Training span in days; the whole frame when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span_days: Option<usize>,
    /// Walk stride in days (default 1).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stride_days: Option<usize>,
}

impl ExperimentConfig {
    /// Parse, resolve relative paths against the file's directory and
    /// validate.
    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: ExperimentConfig =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        if cfg.data.frame.is_relative() {
            cfg.data.frame = base.join(&cfg.data.frame);
        }
        if let Some(out) = &cfg.output_dir {
            if out.is_relative() {
                cfg.output_dir = Some(base.join(out));
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), Error> {
        self.strategy.validate()?;
        if self.data.resolution <= 0 {
            return Err(Error::Config("resolution must be positive".into()));
        }
        if self.walk.span_days == Some(0) || self.walk.stride_days == Some(0) {
            return Err(Error::Config("walk span and stride must be positive".into()));
        }
        if !self.data.frame.is_file() {
            return Err(Error::Io {
                path: self.data.frame.clone(),
                source: std::io::Error::new(std::io::ErrorKind::NotFound, "frame file not found"),
            });
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_resolves() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("f.csv"), "").unwrap();
        let p = dir.path().join("exp.toml");
        fs::write(
            &p,
            r#"
seed = 7
[data]
frame = "f.csv"
[walk]
span_days = 30
[strategy]
strategy = "hybrid"
horizon = 10
att_heads = 1
mp = true
mp_reversed = true
denoise_wavelet = "db4"
"#,
        )
        .unwrap();
        let c = ExperimentConfig::load(&p).unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.data.frame, dir.path().join("f.csv"));
        assert_eq!(c.data.resolution, 300);
        let echo = c.to_toml();
        let back: ExperimentConfig = toml::from_str(&echo).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn seed_is_mandatory() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("f.csv"), "").unwrap();
        let p = dir.path().join("exp.toml");
        fs::write(&p, "[data]\nframe = \"f.csv\"\n[strategy]\nstrategy = \"direct\"\nhorizon = 1\n").unwrap();
        assert!(matches!(ExperimentConfig::load(&p), Err(Error::Config(_))));
    }

    #[test]
    fn missing_frame_is_a_data_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("exp.toml");
        fs::write(&p, "seed = 1\n[data]\nframe = \"nope.csv\"\n[strategy]\nstrategy = \"direct\"\nhorizon = 1\n").unwrap();
        assert!(matches!(ExperimentConfig::load(&p), Err(Error::Io { .. })));
    }
}
