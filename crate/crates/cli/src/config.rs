//! TOML run configuration. Every key has a default and can be overridden on
//! the command line; unknown keys are rejected.

use std::path::{Path, PathBuf};

use ltft::{FrameShape, PipelineConfig, PipelineMode, SampleCount};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub frame: FrameSection,
    pub pipeline: PipelineSection,
    pub io: IoSection,
}

/// LTFT parameters; `a` and `b` are fractions of the sample rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FrameSection {
    pub tau_min: f64,
    pub tau_max: f64,
    pub a: f64,
    pub b: f64,
}

impl Default for FrameSection {
    fn default() -> Self {
        let s = FrameShape::default();
        Self { tau_min: s.tau_min, tau_max: s.tau_max, a: s.a, b: s.b }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Synthesis,
    Analysis,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineSection {
    /// Samples per unit phase-space volume.
    pub z: f64,
    /// Fixed sample count; overrides `z`.
    pub samples: Option<usize>,
    pub seed: u64,
    /// Frequency extent: ω up to `W·R/2`.
    pub w: f64,
    pub mode: Mode,
}

impl Default for PipelineSection {
    fn default() -> Self {
        Self { z: 64.0, samples: None, seed: 0, w: 1.0, mode: Mode::Synthesis }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IoSection {
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub mask: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

/// Flags shared by every command.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Overrides {
    /// TOML run configuration
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub tau_min: Option<f64>,
    #[arg(long, global = true)]
    pub tau_max: Option<f64>,
    /// Low transition frequency as a fraction of the sample rate
    #[arg(long, global = true)]
    pub a: Option<f64>,
    /// High transition frequency as a fraction of the sample rate
    #[arg(long, global = true)]
    pub b: Option<f64>,
    /// Monte Carlo samples per unit phase-space volume
    #[arg(long, global = true)]
    pub z: Option<f64>,
    /// Fixed Monte Carlo sample count (overrides --z)
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub w: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub mode: Option<Mode>,
    /// CSV report path (stdout when omitted)
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Loads `--config` if given and applies the flag overrides.
    pub fn resolve(o: &Overrides) -> Result<Self, CliError> {
        let mut c = match &o.config {
            Some(p) => Self::load(p)?,
            None => Self::default(),
        };
        let f = &mut c.frame;
        f.tau_min = o.tau_min.unwrap_or(f.tau_min);
        f.tau_max = o.tau_max.unwrap_or(f.tau_max);
        f.a = o.a.unwrap_or(f.a);
        f.b = o.b.unwrap_or(f.b);
        let p = &mut c.pipeline;
        p.z = o.z.unwrap_or(p.z);
        p.samples = o.samples.or(p.samples);
        p.seed = o.seed.unwrap_or(p.seed);
        p.w = o.w.unwrap_or(p.w);
        p.mode = o.mode.unwrap_or(p.mode);
        c.io.report = o.report.clone().or(c.io.report);
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.shape().validate().map_err(|e| CliError::Usage(e.to_string()))?;
        let p = &self.pipeline;
        if !(p.z.is_finite() && p.z > 0.0) {
            return Err(CliError::Usage(format!("z must be positive, got {}", p.z)));
        }
        if p.samples == Some(0) {
            return Err(CliError::Usage("samples must be positive".into()));
        }
        if !(p.w.is_finite() && p.w >= 1.0) {
            return Err(CliError::Usage(format!("w must be at least 1, got {}", p.w)));
        }
        Ok(())
    }

    pub fn shape(&self) -> FrameShape {
        let f = &self.frame;
        FrameShape { tau_min: f.tau_min, tau_max: f.tau_max, a: f.a, b: f.b }
    }

    /// Pipeline settings for one channel.
    pub fn pipeline(&self, seed: u64) -> PipelineConfig {
        let p = &self.pipeline;
        PipelineConfig {
            mode: match p.mode {
                Mode::Synthesis => PipelineMode::Synthesis,
                Mode::Analysis => PipelineMode::Analysis,
            },
            samples: match p.samples {
                Some(k) => SampleCount::Fixed(k),
                None => SampleCount::PerVolume(p.z),
            },
            seed,
            w: p.w,
            ..PipelineConfig::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_the_default() {
        assert_eq!(RunConfig::from_toml("").unwrap(), RunConfig::default());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_toml("[frame]\ntau_mid = 4.0\n").is_err());
        assert!(RunConfig::from_toml("[extra]\n").is_err());
    }

    #[test]
    fn flags_override_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "[pipeline]\nz = 16.0\nseed = 3\n").unwrap();
        let o = Overrides { config: Some(path), seed: Some(9), ..Overrides::default() };
        let c = RunConfig::resolve(&o).unwrap();
        assert_eq!((c.pipeline.z, c.pipeline.seed), (16.0, 9));
    }

    #[test]
    fn inconsistent_frames_are_usage_errors() {
        for (a, b) in [(0.4, 0.2), (0.05, 1.0), (0.05, 1.5)] {
            let o = Overrides { a: Some(a), b: Some(b), ..Overrides::default() };
            assert!(matches!(RunConfig::resolve(&o), Err(CliError::Usage(_))));
        }
    }
}
