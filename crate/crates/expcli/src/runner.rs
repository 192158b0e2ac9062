use std::collections::hash_map::Entry;
use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{info, warn};
use sawtooth_echo::analysis::{
    classify_regime_with, fit_exponential_rate, fit_power_law, FitKind, FitResult, RegimeReport,
};
use sawtooth_echo::ensemble::{classical_fidelity_at, sample_strip, ClassicalEnsemble};
use sawtooth_echo::qecho::{quantum_fidelity_at, saturation_estimate};
use sawtooth_echo::{FidelitySeries, InitialDescriptor, MapParams, SeriesKind};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{ExperimentConfig, FitConfig, Plateau, PlateauRule};
use crate::csv::{read_series, write_series};
use crate::error::{RunError, RunResult};
use crate::presets::Preset;

pub const SUMMARY_FILE: &str = "summary.json";

/// One computed series and what was extracted from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesEntry {
    pub id: String,
    pub kind: SeriesKind,
    /// File name relative to the run directory.
    pub csv: String,
    pub params: MapParams,
    pub initial: InitialDescriptor,
    pub t_max: u32,
    /// Plateau used to end the fit window, if any.
    pub plateau: Option<f64>,
    pub fit: Option<FitResult>,
    pub fit_error: Option<String>,
    /// Regime of the quantum parameters; classical series have none.
    pub regime: Option<RegimeReport>,
    /// Classical series with the same `(K₀, L, ε)`, for quantum entries.
    pub classical_ref: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub name: String,
    pub preset: Option<Preset>,
    /// SHA-256 of the resolved configuration, excluding `out_dir`.
    pub config_hash: String,
    /// `v<crate version>-g<content hash>`; the hash covers every series
    /// value, so equal versions mean equal results.
    pub version: String,
    pub wall_time_s: f64,
    pub out_dir: PathBuf,
    pub series: Vec<SeriesEntry>,
    pub config: ExperimentConfig,
}

impl RunRecord {
    pub fn fits(&self) -> Vec<FitResult> {
        self.series.iter().filter_map(|s| s.fit).collect()
    }

    pub fn regimes(&self) -> Vec<RegimeReport> {
        self.series.iter().filter_map(|s| s.regime).collect()
    }

    pub fn entry(&self, id: &str) -> Option<&SeriesEntry> {
        self.series.iter().find(|s| s.id == id)
    }

    pub fn csv_path(&self, entry: &SeriesEntry) -> PathBuf {
        self.out_dir.join(&entry.csv)
    }

    /// Reloads one series from its CSV.
    pub fn load_series(&self, id: &str) -> RunResult<FidelitySeries> {
        let entry = self
            .entry(id)
            .ok_or_else(|| RunError::Other(format!("no series `{id}` in record")))?;
        Ok(read_series(&self.csv_path(entry))?.series)
    }

    /// Reads a `summary.json`. The run directory is taken to be the file's
    /// parent, so records stay valid when a run directory is moved.
    pub fn load(path: &Path) -> RunResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| RunError::io(path, e))?;
        let mut record: RunRecord = serde_json::from_str(&text).map_err(|e| RunError::Csv {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        if let Some(dir) = path.parent() {
            record.out_dir = dir.to_path_buf();
        }
        Ok(record)
    }

    /// Checks that every referenced file exists, parses, and matches its
    /// entry.
    pub fn verify(&self) -> RunResult<()> {
        for entry in &self.series {
            let path = self.csv_path(entry);
            let loaded = read_series(&path)?;
            let mismatch = |what: &str| RunError::Csv {
                path: path.clone(),
                message: format!("{what} does not match the record"),
            };
            if loaded.id() != Some(entry.id.as_str()) {
                return Err(mismatch("id"));
            }
            if loaded.series.meta.params != entry.params || loaded.series.meta.kind != entry.kind {
                return Err(mismatch("parameters"));
            }
            if loaded.series.t_max() != entry.t_max {
                return Err(mismatch("t_max"));
            }
        }
        Ok(())
    }
}

/// Runs `config` on the global thread pool.
pub fn run(config: &ExperimentConfig) -> RunResult<RunRecord> {
    config.validate()?;
    let start = Instant::now();
    let out_dir = config.out_dir.clone();

    // Everything is computed before the first file is written.
    let computed = compute(config)?;

    std::fs::create_dir_all(&out_dir).map_err(|e| RunError::io(&out_dir, e))?;
    let mut hasher = Sha256::new();
    let mut entries = Vec::with_capacity(computed.len());
    for (entry, series) in computed {
        hasher.update(entry.id.as_bytes());
        for (t, f) in series.iter() {
            hasher.update(t.to_le_bytes());
            hasher.update(f.to_bits().to_le_bytes());
        }
        write_series(&out_dir.join(&entry.csv), &entry.id, &series)?;
        entries.push(entry);
    }
    let content = hex(&hasher.finalize());

    let record = RunRecord {
        name: config.name.clone(),
        preset: config.preset,
        config_hash: config_hash(config),
        version: format!("v{}-g{}", env!("CARGO_PKG_VERSION"), &content[..12]),
        wall_time_s: start.elapsed().as_secs_f64(),
        out_dir: out_dir.clone(),
        series: entries,
        config: config.clone(),
    };
    let summary = out_dir.join(SUMMARY_FILE);
    let json = serde_json::to_string_pretty(&record).map_err(|e| RunError::Other(e.to_string()))?;
    std::fs::write(&summary, json).map_err(|e| RunError::io(&summary, e))?;
    info!(
        "{}: {} series in {:.1} s -> {}",
        record.name,
        record.series.len(),
        record.wall_time_s,
        summary.display()
    );
    Ok(record)
}

/// Runs `config` on a dedicated pool of `threads` workers. Results do not
/// depend on the thread count.
pub fn run_with_threads(config: &ExperimentConfig, threads: usize) -> RunResult<RunRecord> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| RunError::Other(e.to_string()))?;
    pool.install(|| run(config))
}

/// SHA-256 of the configuration with its output directory blanked, so the
/// same experiment hashes equally wherever it is written.
pub fn config_hash(config: &ExperimentConfig) -> String {
    let mut canonical = config.clone();
    canonical.out_dir = PathBuf::new();
    let json = serde_json::to_vec(&canonical).expect("config serializes");
    hex(&Sha256::digest(json))
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

type ClassicalKey = (u64, u32, u64);

fn classical_key(p: &MapParams) -> ClassicalKey {
    (p.kick.to_bits(), p.torus_len, p.eps.to_bits())
}

/// Computes every series in sweep order: classical series first (one per
/// distinct `(K₀, L, ε)`), then one quantum series per sweep point.
fn compute(config: &ExperimentConfig) -> RunResult<Vec<(SeriesEntry, FidelitySeries)>> {
    let mut out = Vec::new();
    let mut classical_ids: HashMap<ClassicalKey, String> = HashMap::new();

    if let Some(setup) = &config.classical {
        let mut ensembles: HashMap<u32, ClassicalEnsemble> = HashMap::new();
        for (i, point) in config.sweep.iter().enumerate() {
            let key = classical_key(&point.params);
            if classical_ids.contains_key(&key) {
                continue;
            }
            let l = point.params.torus_len;
            if let Entry::Vacant(slot) = ensembles.entry(l) {
                slot.insert(sample_strip(setup.nu, setup.trajectories, setup.seed, l)?);
            }
            let times = config.times.times(config.t_max_of(i));
            let series = classical_fidelity_at(&ensembles[&l], &point.params, &times)?;
            let id = format!("c{:03}", classical_ids.len());
            info!(
                "{id}: classical K0={} L={l} eps={:e}",
                point.params.kick, point.params.eps
            );
            classical_ids.insert(key, id.clone());
            out.push(analyse(config, id, series, None));
        }
    }

    if let Some(setup) = &config.quantum {
        for (i, point) in config.sweep.iter().enumerate() {
            let times = config.times.times(config.t_max_of(i));
            let series = quantum_fidelity_at(&setup.initial, &point.params, &times, setup.mixture)?;
            let id = format!("q{i:03}");
            info!(
                "{id}: quantum N={} sigma={:.4} eps={:e}",
                point.params.dim,
                point.params.sigma(),
                point.params.eps
            );
            let classical = classical_ids.get(&classical_key(&point.params)).cloned();
            out.push(analyse(config, id, series, classical));
        }
    }
    Ok(out)
}

/// Plateau for the fit window under the configured rule.
pub fn resolve_plateau(fit: &FitConfig, series: &FidelitySeries) -> Option<f64> {
    match fit.plateau {
        Plateau::Fixed(p) => Some(p),
        Plateau::Rule(PlateauRule::Off) => None,
        Plateau::Rule(PlateauRule::Auto) => match (series.meta.kind, &series.meta.initial) {
            (SeriesKind::Classical, InitialDescriptor::Strip { nu, .. }) => {
                Some(nu / (std::f64::consts::TAU * f64::from(series.meta.params.torus_len)))
            }
            _ => saturation_estimate(series, fit.tail_fraction)
                .ok()
                .filter(|s| !s.overlaps_decay && s.mean > 0.0)
                .map(|s| s.mean),
        },
    }
}

/// Fits `series` with the configured model and window.
pub fn fit_series(fit: &FitConfig, series: &FidelitySeries) -> (Option<f64>, RunResult<FitResult>) {
    let plateau = resolve_plateau(fit, series);
    let policy = fit.policy(plateau, series.t_max());
    let result = match fit.model {
        FitKind::Exponential => fit_exponential_rate(series, &policy),
        FitKind::PowerLaw => fit_power_law(series, &policy),
    };
    (plateau, result.map_err(RunError::from))
}

fn analyse(
    config: &ExperimentConfig,
    id: String,
    series: FidelitySeries,
    classical_ref: Option<String>,
) -> (SeriesEntry, FidelitySeries) {
    let (plateau, fit) = fit_series(&config.fit, &series);
    let (fit, fit_error) = match fit {
        Ok(f) => (Some(f), None),
        Err(e) => {
            warn!("{id}: fit failed: {e}");
            (None, Some(e.to_string()))
        }
    };
    let regime = match series.meta.kind {
        SeriesKind::Quantum => Some(classify_regime_with(&series.meta.params, config.fgr_constant)),
        SeriesKind::Classical => None,
    };
    let entry = SeriesEntry {
        csv: format!("{id}.csv"),
        id,
        kind: series.meta.kind,
        params: series.meta.params,
        initial: series.meta.initial.clone(),
        t_max: series.t_max(),
        plateau,
        fit,
        fit_error,
        regime,
        classical_ref,
    };
    (entry, series)
}
