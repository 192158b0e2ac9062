//! Experiment configuration.
//!
//! A config is a TOML document. When it names a `preset`, the preset's
//! table is loaded first and every top-level key of the file overrides it;
//! section tables (`[classical]`, `[fit]`, ...) are overridden key by key.

use std::collections::HashSet;
use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use sawtooth_echo::analysis::{FitKind, WindowPolicy, FGR_CONSTANT};
use sawtooth_echo::qecho::{InitialCondition, MixtureFidelity};
use sawtooth_echo::series::{linear_times, log_times};
use sawtooth_echo::{Error as SimError, MapParams};
use serde::{Deserialize, Serialize};

use crate::error::{RunError, RunResult};
use crate::presets::Preset;

/// Smallest Hilbert-space dimension a scaled run is reduced to.
pub const SCALE_MIN_DIM: usize = 2048;

/// Smallest ensemble a scaled run is reduced to.
pub const SCALE_MIN_TRAJECTORIES: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    pub sweep: Vec<SweepPoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classical: Option<ClassicalSetup>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantum: Option<QuantumSetup>,
    pub t_max: u32,
    #[serde(default)]
    pub times: TimeGrid,
    #[serde(default)]
    pub fit: FitConfig,
    #[serde(default = "default_fgr_constant")]
    pub fgr_constant: f64,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
}

fn default_fgr_constant() -> f64 {
    FGR_CONSTANT
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("runs")
}

/// One point of the parameter grid. `t_max` overrides the run-wide value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    #[serde(flatten)]
    pub params: MapParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<u32>,
}

impl From<MapParams> for SweepPoint {
    fn from(params: MapParams) -> Self {
        Self { params, t_max: None }
    }
}

/// Monte-Carlo strip for the classical echo.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalSetup {
    pub nu: f64,
    pub trajectories: usize,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuantumSetup {
    pub initial: InitialCondition,
    #[serde(default)]
    pub mixture: MixtureFidelity,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "grid", rename_all = "snake_case")]
pub enum TimeGrid {
    /// Every iteration `0..=t_max`.
    #[default]
    Linear,
    /// About `points` log-spaced iterations plus `t = 0`.
    Log { points: usize },
}

impl TimeGrid {
    pub fn times(&self, t_max: u32) -> Vec<u32> {
        match *self {
            TimeGrid::Linear => linear_times(t_max),
            TimeGrid::Log { points } => log_times(t_max, points),
        }
    }
}

/// Plateau used to cut the fit window before saturation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Plateau {
    Fixed(f64),
    Rule(PlateauRule),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlateauRule {
    /// `ν/(2πL)` for classical strips, the tail mean for quantum series
    /// whose tail has flattened out, no cutoff otherwise.
    Auto,
    /// Fit up to the end of the series.
    Off,
}

impl Default for Plateau {
    fn default() -> Self {
        Plateau::Rule(PlateauRule::Auto)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    pub model: FitKind,
    pub start: Option<u32>,
    pub end: Option<u32>,
    pub plateau: Plateau,
    pub saturation_factor: f64,
    pub tail_fraction: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        let policy = WindowPolicy::default();
        Self {
            model: FitKind::Exponential,
            start: None,
            end: None,
            plateau: Plateau::default(),
            saturation_factor: policy.saturation_factor,
            tail_fraction: policy.tail_fraction,
        }
    }
}

impl FitConfig {
    /// Window policy for a series ending at `t_max` whose plateau has been
    /// resolved. Without a plateau the window runs to the end of the series.
    pub fn policy(&self, plateau: Option<f64>, t_max: u32) -> WindowPolicy {
        WindowPolicy {
            start: self.start,
            end: self.end.or(if plateau.is_none() { Some(t_max) } else { None }),
            saturation: plateau,
            saturation_factor: self.saturation_factor,
            tail_fraction: self.tail_fraction,
        }
    }
}

fn sim_error_path(prefix: &str, err: &SimError) -> RunError {
    match err {
        SimError::InvalidParameter { name, value, reason } => {
            RunError::config(format!("{prefix}.{name}"), format!("{value}: {reason}"))
        }
        other => RunError::config(prefix, other.to_string()),
    }
}

impl ExperimentConfig {
    /// Parses a TOML document, expanding a `preset` key if present.
    pub fn from_toml_str(text: &str) -> RunResult<Self> {
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| RunError::config("<toml>", e.to_string()))?;
        let merged = match table.get("preset") {
            Some(value) => {
                let name = value
                    .as_str()
                    .ok_or_else(|| RunError::config("preset", "expected a preset name"))?;
                let preset: Preset = name.parse().map_err(|e: String| RunError::config("preset", e))?;
                merge_over(preset_table(preset)?, table)
            }
            None => table,
        };
        let config: ExperimentConfig = merged
            .try_into()
            .map_err(|e: toml::de::Error| RunError::config("<toml>", e.message().to_string()))?;
        Ok(config)
    }

    pub fn from_file(path: &Path) -> RunResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| RunError::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> RunResult<String> {
        toml::to_string_pretty(self).map_err(|e| RunError::Other(e.to_string()))
    }

    /// Fit horizon of sweep point `i`.
    pub fn t_max_of(&self, i: usize) -> u32 {
        self.sweep[i].t_max.unwrap_or(self.t_max)
    }

    /// Checks every field, reporting the first problem with its path.
    pub fn validate(&self) -> RunResult<()> {
        if self.name.trim().is_empty() {
            return Err(RunError::config("name", "must not be empty"));
        }
        if self.sweep.is_empty() {
            return Err(RunError::config("sweep", "at least one sweep point is required"));
        }
        if self.classical.is_none() && self.quantum.is_none() {
            return Err(RunError::config(
                "classical/quantum",
                "enable at least one of the classical or quantum sections",
            ));
        }
        if self.t_max == 0 {
            return Err(RunError::config("t_max", "must be at least 1"));
        }
        for (i, point) in self.sweep.iter().enumerate() {
            let prefix = format!("sweep[{i}]");
            point.params.validate().map_err(|e| sim_error_path(&prefix, &e))?;
            if point.t_max == Some(0) {
                return Err(RunError::config(format!("{prefix}.t_max"), "must be at least 1"));
            }
            if let Some(c) = &self.classical {
                let max_nu = TAU * f64::from(point.params.torus_len);
                if !(c.nu > 0.0 && c.nu <= max_nu) {
                    return Err(RunError::config(
                        "classical.nu",
                        format!("{} must lie in (0, 2πL] = (0, {max_nu}] for {prefix}", c.nu),
                    ));
                }
            }
            if let Some(q) = &self.quantum {
                q.initial
                    .members(&point.params)
                    .map_err(|e| RunError::config("quantum.initial", format!("{prefix}: {e}")))?;
            }
        }
        if let Some(c) = &self.classical {
            if c.trajectories == 0 {
                return Err(RunError::config("classical.trajectories", "must be at least 1"));
            }
        }
        if let TimeGrid::Log { points } = self.times {
            if points < 2 {
                return Err(RunError::config("times.points", "log grid needs at least 2 points"));
            }
        }
        let fit = &self.fit;
        if !(fit.saturation_factor > 0.0 && fit.saturation_factor.is_finite()) {
            return Err(RunError::config("fit.saturation_factor", "must be positive"));
        }
        if !(fit.tail_fraction > 0.0 && fit.tail_fraction <= 1.0) {
            return Err(RunError::config("fit.tail_fraction", "must lie in (0, 1]"));
        }
        if let Plateau::Fixed(p) = fit.plateau {
            if !(p > 0.0 && p < 1.0) {
                return Err(RunError::config("fit.plateau", "fixed plateau must lie in (0, 1)"));
            }
        }
        if let (Some(s), Some(e)) = (fit.start, fit.end) {
            if e <= s {
                return Err(RunError::config("fit.end", "must be after fit.start"));
            }
        }
        if fit.model == FitKind::PowerLaw && fit.start == Some(0) {
            return Err(RunError::config("fit.start", "power-law fits need t >= 1"));
        }
        if !(self.fgr_constant > 0.0 && self.fgr_constant.is_finite()) {
            return Err(RunError::config("fgr_constant", "must be positive"));
        }
        Ok(())
    }

    /// Desk-scale version of this config.
    ///
    /// With a quantum section each dimension becomes
    /// `max(pow2_floor(N·s), min(N, 2048))` and ε is adjusted so σ is
    /// unchanged. Classical ensembles shrink to
    /// `max(round(M·s), min(M, 10⁴))` trajectories. Points that collapse onto
    /// the same parameters are kept once.
    pub fn scaled(&self, factor: f64) -> RunResult<Self> {
        if !(factor > 0.0 && factor <= 1.0) {
            return Err(RunError::config("scale", format!("{factor} must lie in (0, 1]")));
        }
        let mut out = self.clone();
        if factor == 1.0 {
            return Ok(out);
        }
        if self.quantum.is_some() {
            let mut seen = HashSet::new();
            let mut sweep = Vec::with_capacity(self.sweep.len());
            for point in &self.sweep {
                let n = point.params.dim;
                let target = pow2_floor((n as f64 * factor) as usize).max(n.min(SCALE_MIN_DIM));
                let params = point.params.with_dim_fixed_sigma(target);
                let key = (
                    params.kick.to_bits(),
                    params.torus_len,
                    params.dim,
                    params.eps.to_bits(),
                );
                if seen.insert(key) {
                    sweep.push(SweepPoint { params, ..*point });
                }
            }
            out.sweep = sweep;
        }
        if let Some(c) = &mut out.classical {
            let m = c.trajectories;
            c.trajectories = ((m as f64 * factor).round() as usize).max(m.min(SCALE_MIN_TRAJECTORIES));
        }
        Ok(out)
    }
}

fn pow2_floor(n: usize) -> usize {
    if n < 2 {
        2
    } else {
        1 << (usize::BITS - 1 - n.leading_zeros())
    }
}

fn preset_table(preset: Preset) -> RunResult<toml::Table> {
    toml::Table::try_from(preset.config()).map_err(|e| RunError::Other(e.to_string()))
}

/// Overlays `top` on `base`: top-level keys replace, section tables are
/// merged one level deep.
fn merge_over(mut base: toml::Table, top: toml::Table) -> toml::Table {
    for (key, value) in top {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(section)), toml::Value::Table(overrides)) => {
                for (k, v) in overrides {
                    section.insert(k, v);
                }
            }
            (_, value) => {
                base.insert(key, value);
            }
        }
    }
    base
}
