use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

/// Settings read from an optional TOML file. Command-line flags win over
/// the file, and the file wins over built-in defaults.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub p: Option<u64>,
    pub g: Option<usize>,
    pub m: Option<u32>,
    pub delta_threshold: Option<i64>,
    pub budget: Option<u64>,
    pub box_bound: Option<Vec<i64>>,
    pub output: Option<PathBuf>,
    pub seed: Option<u64>,
    pub cap: Option<u64>,
    pub samples: Option<u64>,
    pub jobs: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }
}

/// Fully resolved settings for one run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub p: Option<u64>,
    pub g: Option<usize>,
    pub m: u32,
    pub delta_threshold: i64,
    pub budget: Option<u64>,
    pub box_bound: Option<Vec<i64>>,
    pub output: Option<PathBuf>,
    pub seed: u64,
    pub cap: u64,
    pub samples: u64,
    pub jobs: Option<usize>,
}

pub const DEFAULT_THRESHOLD: i64 = 5;

/// Values given on the command line, all optional.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub p: Option<u64>,
    pub g: Option<usize>,
    pub m: Option<u32>,
    pub delta_threshold: Option<i64>,
    pub budget: Option<u64>,
    pub box_bound: Option<Vec<i64>>,
    pub output: Option<PathBuf>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
}

impl RunConfig {
    pub fn resolve(file: &FileConfig, cli: &Overrides) -> Result<Self, String> {
        let defaults = favres_core::pseudo_rep::CheckOptions::default();
        let cfg = RunConfig {
            p: cli.p.or(file.p),
            g: cli.g.or(file.g),
            m: cli.m.or(file.m).unwrap_or(1),
            delta_threshold: cli
                .delta_threshold
                .or(file.delta_threshold)
                .unwrap_or(DEFAULT_THRESHOLD),
            budget: cli.budget.or(file.budget),
            box_bound: cli.box_bound.clone().or_else(|| file.box_bound.clone()),
            output: cli.output.clone().or_else(|| file.output.clone()),
            seed: cli.seed.or(file.seed).unwrap_or(defaults.seed),
            cap: file.cap.unwrap_or(defaults.cap),
            samples: file.samples.unwrap_or(defaults.samples),
            jobs: cli.jobs.or(file.jobs),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), String> {
        if let Some(p) = self.p.filter(|&p| !favres_core::zpm::is_prime(p)) {
            return Err(format!("p = {p} is not prime"));
        }
        if self.m == 0 || self.g == Some(0) || self.budget == Some(0) || self.jobs == Some(0) {
            return Err("numeric settings must be positive".into());
        }
        if self.cap == 0 || self.samples == 0 {
            return Err("cap and samples must be positive".into());
        }
        if self.delta_threshold < 2 {
            return Err(format!(
                "delta_threshold = {} is below 2",
                self.delta_threshold
            ));
        }
        if let Some(b) = &self.box_bound {
            if b.iter().any(|&x| x <= 0) {
                return Err("box bounds must be positive".into());
            }
        }
        Ok(())
    }
}
