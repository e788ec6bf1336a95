//! Project configuration: a flat TOML file, overridden by command-line flags.
//!
//! Paths in the file are relative to the file itself; paths given as flags
//! are relative to the working directory.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::Deserialize;
use sima_core::captions::PolishConfig;
use sima_core::script::ValidateConfig;
use sima_core::timeline::{FitConfig, OverlayConfig};
use sima_core::workload::Hours;
use sima_core::CompileConfig;

pub const ENV_CONFIG: &str = "SIMA_CONFIG";

/// Keys accepted in the config file. Everything is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub script: Option<PathBuf>,
    /// One caption file per split, in split order.
    pub captions: Option<Vec<PathBuf>>,
    pub metadata: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub silence_threshold_s: Option<f64>,
    pub similarity: Option<f64>,
    pub speed_low: Option<f64>,
    pub speed_high: Option<f64>,
    pub overlay_duration_s: Option<f64>,
    pub transition_duration_s: Option<f64>,
    pub early_start_threshold: Option<f64>,
    pub verify_tolerance_s: Option<f64>,
    pub parts: Option<usize>,
    pub splits: Option<usize>,
    pub senior_agents: Option<usize>,
    pub runtime_h: Option<Decimal>,
    pub finalization_h: Option<Decimal>,
}

/// Hours may be written as a number or as a string; strings keep values
/// like `"1.35"` exact.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum Decimal {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Decimal {
    fn text(&self) -> String {
        match self {
            Decimal::Int(n) => n.to_string(),
            Decimal::Float(x) => x.to_string(),
            Decimal::Text(s) => s.clone(),
        }
    }
}

/// Flags that override config keys of the same name.
#[derive(Debug, Default, Clone, Args)]
pub struct Overrides {
    /// Annotated script (.sima.md)
    #[arg(long, global = true, value_name = "FILE")]
    pub script: Option<PathBuf>,
    /// Caption files, one per split in split order
    #[arg(long, global = true, value_name = "FILE", num_args = 1.., value_delimiter = ',')]
    pub captions: Option<Vec<PathBuf>>,
    /// Asset metadata sidecar (JSON)
    #[arg(long, global = true, value_name = "FILE")]
    pub metadata: Option<PathBuf>,
    /// Directory for generated files
    #[arg(long, global = true, value_name = "DIR")]
    pub out_dir: Option<PathBuf>,
    #[arg(long, global = true, value_name = "SECS")]
    pub silence_threshold_s: Option<f64>,
    #[arg(long, global = true, value_name = "0..1")]
    pub similarity: Option<f64>,
    /// Lower edge of the preferred speed band
    #[arg(long, global = true, value_name = "X")]
    pub speed_low: Option<f64>,
    /// Upper edge of the preferred speed band
    #[arg(long, global = true, value_name = "X")]
    pub speed_high: Option<f64>,
    #[arg(long, global = true, value_name = "SECS")]
    pub overlay_duration_s: Option<f64>,
    #[arg(long, global = true, value_name = "SECS")]
    pub transition_duration_s: Option<f64>,
    #[arg(long, global = true, value_name = "X")]
    pub early_start_threshold: Option<f64>,
    #[arg(long, global = true, value_name = "SECS")]
    pub verify_tolerance_s: Option<f64>,
    #[arg(long, global = true, value_name = "N")]
    pub parts: Option<usize>,
    #[arg(long, global = true, value_name = "N")]
    pub splits: Option<usize>,
    #[arg(long, global = true, value_name = "N")]
    pub senior_agents: Option<usize>,
    /// Final runtime in hours
    #[arg(long, global = true, value_name = "HOURS")]
    pub runtime_h: Option<String>,
    /// Allowance for finalization in hours
    #[arg(long, global = true, value_name = "HOURS")]
    pub finalization_h: Option<String>,
}

/// Fully resolved settings.
#[derive(Debug, Clone)]
pub struct Settings {
    pub script: Option<PathBuf>,
    pub captions: Vec<PathBuf>,
    pub metadata: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub silence_threshold_s: f64,
    pub similarity: f64,
    pub speed_low: f64,
    pub speed_high: f64,
    pub overlay_duration_s: f64,
    pub transition_duration_s: f64,
    pub early_start_threshold: f64,
    pub verify_tolerance_s: f64,
    pub parts: usize,
    pub splits: usize,
    pub senior_agents: usize,
    pub runtime: Hours,
    pub finalization: Hours,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            script: None,
            captions: Vec::new(),
            metadata: None,
            out_dir: PathBuf::from("out"),
            silence_threshold_s: 1.5,
            similarity: 0.8,
            speed_low: 0.75,
            speed_high: 2.0,
            overlay_duration_s: 20.0,
            transition_duration_s: 4.0,
            early_start_threshold: 2.0,
            verify_tolerance_s: 1.0,
            parts: 15,
            splits: 3,
            senior_agents: 3,
            runtime: Hours::new(3, 2),
            finalization: Hours::from_integer(1),
        }
    }
}

fn secs_to_ms(s: f64) -> u64 {
    (s * 1000.0).round() as u64
}

fn hours(key: &str, s: &str) -> Result<Hours> {
    s.parse().map_err(|e| anyhow::anyhow!("{key}: {e}"))
}

impl Settings {
    /// Defaults, then the config file (if any), then flags.
    pub fn resolve(config: Option<&Path>, flags: &Overrides) -> Result<Settings> {
        let mut s = Settings::default();
        if let Some(path) = config {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
            let file: FileConfig =
                toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
            let base = path.parent().unwrap_or(Path::new(""));
            s.apply_file(file, base)?;
        }
        s.apply_flags(flags)?;
        s.check()?;
        Ok(s)
    }

    fn apply_file(&mut self, f: FileConfig, base: &Path) -> Result<()> {
        let rel = |p: PathBuf| base.join(p);
        if let Some(p) = f.script {
            self.script = Some(rel(p));
        }
        if let Some(c) = f.captions {
            self.captions = c.into_iter().map(rel).collect();
        }
        if let Some(p) = f.metadata {
            self.metadata = Some(rel(p));
        }
        if let Some(p) = f.out_dir {
            self.out_dir = rel(p);
        }
        self.silence_threshold_s = f.silence_threshold_s.unwrap_or(self.silence_threshold_s);
        self.similarity = f.similarity.unwrap_or(self.similarity);
        self.speed_low = f.speed_low.unwrap_or(self.speed_low);
        self.speed_high = f.speed_high.unwrap_or(self.speed_high);
        self.overlay_duration_s = f.overlay_duration_s.unwrap_or(self.overlay_duration_s);
        self.transition_duration_s = f.transition_duration_s.unwrap_or(self.transition_duration_s);
        self.early_start_threshold = f.early_start_threshold.unwrap_or(self.early_start_threshold);
        self.verify_tolerance_s = f.verify_tolerance_s.unwrap_or(self.verify_tolerance_s);
        self.parts = f.parts.unwrap_or(self.parts);
        self.splits = f.splits.unwrap_or(self.splits);
        self.senior_agents = f.senior_agents.unwrap_or(self.senior_agents);
        if let Some(h) = f.runtime_h {
            self.runtime = hours("runtime_h", &h.text())?;
        }
        if let Some(h) = f.finalization_h {
            self.finalization = hours("finalization_h", &h.text())?;
        }
        Ok(())
    }

    fn apply_flags(&mut self, o: &Overrides) -> Result<()> {
        if let Some(p) = &o.script {
            self.script = Some(p.clone());
        }
        if let Some(c) = &o.captions {
            self.captions = c.clone();
        }
        if let Some(p) = &o.metadata {
            self.metadata = Some(p.clone());
        }
        if let Some(p) = &o.out_dir {
            self.out_dir = p.clone();
        }
        self.silence_threshold_s = o.silence_threshold_s.unwrap_or(self.silence_threshold_s);
        self.similarity = o.similarity.unwrap_or(self.similarity);
        self.speed_low = o.speed_low.unwrap_or(self.speed_low);
        self.speed_high = o.speed_high.unwrap_or(self.speed_high);
        self.overlay_duration_s = o.overlay_duration_s.unwrap_or(self.overlay_duration_s);
        self.transition_duration_s = o.transition_duration_s.unwrap_or(self.transition_duration_s);
        self.early_start_threshold = o.early_start_threshold.unwrap_or(self.early_start_threshold);
        self.verify_tolerance_s = o.verify_tolerance_s.unwrap_or(self.verify_tolerance_s);
        self.parts = o.parts.unwrap_or(self.parts);
        self.splits = o.splits.unwrap_or(self.splits);
        self.senior_agents = o.senior_agents.unwrap_or(self.senior_agents);
        if let Some(h) = &o.runtime_h {
            self.runtime = hours("--runtime-h", h)?;
        }
        if let Some(h) = &o.finalization_h {
            self.finalization = hours("--finalization-h", h)?;
        }
        Ok(())
    }

    fn check(&self) -> Result<()> {
        let positive = [
            ("silence_threshold_s", self.silence_threshold_s),
            ("similarity", self.similarity),
            ("overlay_duration_s", self.overlay_duration_s),
            ("transition_duration_s", self.transition_duration_s),
            ("early_start_threshold", self.early_start_threshold),
            ("verify_tolerance_s", self.verify_tolerance_s),
        ];
        for (key, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                bail!("{key} must be positive, got {v}");
            }
        }
        if self.similarity > 1.0 {
            bail!("similarity must be at most 1, got {}", self.similarity);
        }
        if !(0.5 <= self.speed_low && self.speed_low <= self.speed_high && self.speed_high <= 4.0) {
            bail!(
                "speed band must satisfy 0.5 <= speed_low <= speed_high <= 4.0, got {}..{}",
                self.speed_low,
                self.speed_high
            );
        }
        if !(2..=30).contains(&self.parts) {
            bail!("parts must be between 2 and 30, got {}", self.parts);
        }
        if self.splits == 0 || self.splits > self.parts {
            bail!("splits must be between 1 and parts ({}), got {}", self.parts, self.splits);
        }
        if self.runtime <= Hours::zero() {
            bail!("runtime_h must be positive, got {}", self.runtime);
        }
        if self.senior_agents == 0 {
            bail!("senior_agents must be at least 1");
        }
        Ok(())
    }

    pub fn script_path(&self) -> Result<&Path> {
        self.script.as_deref().context("no script given; set `script` in the config or pass --script")
    }

    pub fn metadata_path(&self) -> Result<&Path> {
        self.metadata.as_deref().context("no metadata sidecar given; set `metadata` in the config or pass --metadata")
    }

    pub fn polish(&self) -> PolishConfig {
        PolishConfig {
            silence_threshold_ms: secs_to_ms(self.silence_threshold_s),
            similarity_threshold: self.similarity,
            ..PolishConfig::default()
        }
    }

    pub fn validate(&self) -> ValidateConfig {
        ValidateConfig { expected_parts: Some(self.parts), ..ValidateConfig::default() }
    }

    pub fn compile(&self) -> CompileConfig {
        CompileConfig {
            fit: FitConfig { preferred_min: self.speed_low, preferred_max: self.speed_high, ..FitConfig::default() },
            transition_ms: secs_to_ms(self.transition_duration_s),
            early_start_threshold: self.early_start_threshold,
            overlay: OverlayConfig { duration_ms: secs_to_ms(self.overlay_duration_s), ..OverlayConfig::default() },
        }
    }

    pub fn verify_tolerance_ms(&self) -> u64 {
        secs_to_ms(self.verify_tolerance_s)
    }
}
