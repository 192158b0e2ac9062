//! Series files.
//!
//! ```text
//! # id=q000
//! # kind=quantum
//! # K0=1.0
//! # ...
//! # created_unix=1760000000
//! t,f
//! 0,1.0000000000000000e0
//! ```
//!
//! Values carry 17 significant digits, enough to reload every `f64`
//! exactly. Parameters are written in shortest round-trip form.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use sawtooth_echo::{FidelitySeries, InitialDescriptor, MapParams, SeriesKind, SeriesMeta};

use crate::error::{RunError, RunResult};

/// Header key of the only line that differs between identical runs.
pub const TIMESTAMP_KEY: &str = "created_unix";

const COLUMNS: &str = "t,f";

fn kind_name(kind: SeriesKind) -> &'static str {
    match kind {
        SeriesKind::Classical => "classical",
        SeriesKind::Quantum => "quantum",
    }
}

/// Renders a series. `timestamp` adds the creation-time header line.
pub fn format_series(id: &str, series: &FidelitySeries, timestamp: Option<u64>) -> String {
    let meta = &series.meta;
    let p = &meta.params;
    let initial = serde_json::to_string(&meta.initial).expect("descriptor serializes");
    let mut out = String::new();
    let mut header = |key: &str, value: &dyn std::fmt::Display| {
        writeln!(out, "# {key}={value}").unwrap();
    };
    header("id", &id);
    header("kind", &kind_name(meta.kind));
    header("K0", &format_args!("{:?}", p.kick));
    header("L", &p.torus_len);
    header("N", &p.dim);
    header("eps", &format_args!("{:?}", p.eps));
    header("sigma", &format_args!("{:?}", p.sigma()));
    header("initial", &initial);
    if let InitialDescriptor::Strip { seed, .. } = meta.initial {
        header("seed", &seed);
    }
    if let Some(ts) = timestamp {
        header(TIMESTAMP_KEY, &ts);
    }
    out.push_str(COLUMNS);
    out.push('\n');
    for (t, f) in series.iter() {
        writeln!(out, "{t},{f:.16e}").unwrap();
    }
    out
}

/// Drops the timestamp line, leaving the part of a file that must be
/// identical between reruns.
pub fn strip_timestamp(text: &str) -> String {
    let prefix = format!("# {TIMESTAMP_KEY}=");
    text.lines()
        .filter(|l| !l.starts_with(&prefix))
        .fold(String::new(), |mut acc, l| {
            acc.push_str(l);
            acc.push('\n');
            acc
        })
}

pub fn write_series(path: &Path, id: &str, series: &FidelitySeries) -> RunResult<()> {
    let now = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    std::fs::write(path, format_series(id, series, Some(now))).map_err(|e| RunError::io(path, e))
}

/// A reloaded series plus every header entry.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedSeries {
    pub series: FidelitySeries,
    pub header: BTreeMap<String, String>,
}

impl LoadedSeries {
    pub fn id(&self) -> Option<&str> {
        self.header.get("id").map(String::as_str)
    }
}

pub fn read_series(path: &Path) -> RunResult<LoadedSeries> {
    let text = std::fs::read_to_string(path).map_err(|e| RunError::io(path, e))?;
    parse_series(&text).map_err(|message| RunError::Csv {
        path: path.to_path_buf(),
        message,
    })
}

pub fn parse_series(text: &str) -> Result<LoadedSeries, String> {
    let mut header = BTreeMap::new();
    let mut lines = text.lines().enumerate();
    let mut saw_columns = false;
    for (lineno, line) in lines.by_ref() {
        if let Some(rest) = line.strip_prefix('#') {
            let (k, v) = rest
                .trim()
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected `# key=value`", lineno + 1))?;
            header.insert(k.trim().to_string(), v.trim().to_string());
        } else if line.trim() == COLUMNS {
            saw_columns = true;
            break;
        } else if !line.trim().is_empty() {
            return Err(format!("line {}: expected header or `{COLUMNS}`", lineno + 1));
        }
    }
    if !saw_columns {
        return Err(format!("missing `{COLUMNS}` column line"));
    }

    let mut times = Vec::new();
    let mut values = Vec::new();
    for (lineno, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let (t, f) = line
            .split_once(',')
            .ok_or_else(|| format!("line {}: expected `t,f`", lineno + 1))?;
        times.push(
            t.trim()
                .parse::<u32>()
                .map_err(|e| format!("line {}: {e}", lineno + 1))?,
        );
        values.push(
            f.trim()
                .parse::<f64>()
                .map_err(|e| format!("line {}: {e}", lineno + 1))?,
        );
    }

    let get = |key: &str| header.get(key).ok_or_else(|| format!("missing header `{key}`"));
    let num = |key: &str| -> Result<f64, String> { get(key)?.parse().map_err(|e| format!("header `{key}`: {e}")) };
    let kind = match get("kind")?.as_str() {
        "classical" => SeriesKind::Classical,
        "quantum" => SeriesKind::Quantum,
        other => return Err(format!("unknown kind `{other}`")),
    };
    let params = MapParams {
        kick: num("K0")?,
        torus_len: get("L")?.parse().map_err(|e| format!("header `L`: {e}"))?,
        dim: get("N")?.parse().map_err(|e| format!("header `N`: {e}"))?,
        eps: num("eps")?,
    };
    let initial: InitialDescriptor =
        serde_json::from_str(get("initial")?).map_err(|e| format!("header `initial`: {e}"))?;
    let series = FidelitySeries::new(times, values, SeriesMeta { params, kind, initial }).map_err(|e| e.to_string())?;
    Ok(LoadedSeries { series, header })
}
