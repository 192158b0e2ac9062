//! Standalone matplotlib scripts for finished runs.
//!
//! Fidelity axes are decimal logarithms. Exponential runs plot `log₁₀ f`
//! against `t` with golden-rule and Lyapunov reference lines; power-law
//! runs plot `log₁₀ f` against `log₁₀ t` with a `1/√(Dt)` line.

use std::f64::consts::LN_10;
use std::path::{Path, PathBuf};

use sawtooth_echo::analysis::{diffusion_coefficient, lyapunov, FitKind, Regime};
use sawtooth_echo::SeriesKind;
use serde::Serialize;

use crate::error::{RunError, RunResult};
use crate::runner::{RunRecord, SeriesEntry};

#[derive(Debug, Clone, PartialEq, Serialize)]
struct PlotSeries {
    csv: String,
    label: String,
    classical: bool,
}

/// Straight reference line in plot coordinates.
#[derive(Debug, Clone, PartialEq, Serialize)]
struct Reference {
    label: String,
    x: [f64; 2],
    y: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct PlotData {
    title: String,
    loglog: bool,
    png: String,
    series: Vec<PlotSeries>,
    references: Vec<Reference>,
}

fn series_label(e: &SeriesEntry) -> String {
    let p = &e.params;
    match e.kind {
        SeriesKind::Classical => format!("classical eps={:.0e}", p.eps),
        SeriesKind::Quantum => format!("N={} sigma={:.3}", p.dim, p.sigma()),
    }
}

fn push_unique(refs: &mut Vec<Reference>, r: Reference) {
    if !refs.iter().any(|x| x.label == r.label) {
        refs.push(r);
    }
}

fn exponential_references(record: &RunRecord) -> Vec<Reference> {
    let mut refs = Vec::new();
    let c = record.config.fgr_constant;
    for e in &record.series {
        let t_end = f64::from(e.t_max);
        if let Some(r) = e.regime {
            if r.regime == Regime::BreitWigner {
                if let Some(gamma) = r.predicted_rate {
                    // Four decades or the series length, whichever is shorter.
                    let t1 = t_end.min(4.0 * LN_10 / gamma);
                    push_unique(
                        &mut refs,
                        Reference {
                            label: format!("Gamma = {c} sigma^2 (sigma={:.3})", r.sigma.abs()),
                            x: [0.0, t1],
                            y: [0.0, -gamma * t1 / LN_10],
                        },
                    );
                }
            }
        }
        let lyapunov_like = e.kind == SeriesKind::Classical || e.regime.is_some_and(|r| r.regime == Regime::Lyapunov);
        if let (true, Some(fit), Ok(lambda)) = (lyapunov_like, e.fit, lyapunov(e.params.kick)) {
            let (t0, t1) = (f64::from(fit.window.0), f64::from(fit.window.1));
            let y = |t: f64| (fit.intercept - lambda * t) / LN_10;
            push_unique(
                &mut refs,
                Reference {
                    label: format!("lambda = {lambda:.2} ({})", series_label(e)),
                    x: [t0, t1],
                    y: [y(t0), y(t1)],
                },
            );
        }
        if let (SeriesKind::Classical, Some(nu)) = (e.kind, e.initial.strip_height()) {
            let level = (nu / (std::f64::consts::TAU * f64::from(e.params.torus_len))).log10();
            push_unique(
                &mut refs,
                Reference {
                    label: "f_inf = nu/(2 pi L)".into(),
                    x: [0.0, t_end],
                    y: [level, level],
                },
            );
        }
    }
    refs
}

fn power_law_references(record: &RunRecord) -> Vec<Reference> {
    let mut refs = Vec::new();
    for e in record.series.iter().filter(|e| e.kind == SeriesKind::Classical) {
        let Some(fit) = e.fit else { continue };
        let d = diffusion_coefficient(e.params.kick);
        let t0 = f64::from(fit.window.0.max(1));
        let t1 = f64::from(e.t_max.max(2));
        // A/√(Dt) through the fitted curve at the window start.
        let amp = fit.predict(t0) * (d * t0).sqrt();
        let y = |t: f64| (amp / (d * t).sqrt()).log10();
        push_unique(
            &mut refs,
            Reference {
                label: format!("1/sqrt(D t), D={d:.2} ({})", series_label(e)),
                x: [t0.log10(), t1.log10()],
                y: [y(t0), y(t1)],
            },
        );
    }
    refs
}

const TEMPLATE: &str = r##"#!/usr/bin/env python3
# Generated by sawecho. Reads only the CSV files listed in DATA.
import json
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

HERE = os.path.dirname(os.path.abspath(__file__))
DATA = json.loads(__DATA__)


def load(name):
    with open(os.path.join(HERE, name)) as fh:
        rows = [line for line in fh if line.strip() and not line.startswith("#")]
    # rows[0] is the "t,f" column line.
    table = np.atleast_2d(np.loadtxt(rows[1:], delimiter=","))
    return table[:, 0], table[:, 1]


fig, ax = plt.subplots(figsize=(6.4, 4.8))
for s in DATA["series"]:
    t, f = load(s["csv"])
    keep = f > 0
    if DATA["loglog"]:
        keep &= t > 0
    x = np.log10(t[keep]) if DATA["loglog"] else t[keep]
    y = np.log10(f[keep])
    if s["classical"]:
        ax.plot(x, y, "o", ms=3, mfc="none", label=s["label"])
    else:
        ax.plot(x, y, "-", lw=1.2, label=s["label"])
for r in DATA["references"]:
    ax.plot(r["x"], r["y"], "--", color="k", lw=0.8, label=r["label"])
ax.set_xlabel("log10 t" if DATA["loglog"] else "t")
ax.set_ylabel("log10 f")
ax.set_title(DATA["title"])
ax.legend(fontsize="x-small")
fig.tight_layout()
fig.savefig(os.path.join(HERE, DATA["png"]), dpi=150)
"##;

/// Renders the plotting script for `record`.
///
/// Fails when the record has no series or when any referenced CSV is
/// missing, so a script is never emitted for data that is not there.
pub fn plot_script(record: &RunRecord) -> RunResult<String> {
    if record.series.is_empty() {
        return Err(RunError::Other(format!(
            "record `{}` has no series to plot",
            record.name
        )));
    }
    for e in &record.series {
        let path = record.csv_path(e);
        if !path.is_file() {
            return Err(RunError::io(
                path,
                std::io::Error::new(std::io::ErrorKind::NotFound, "series CSV is missing"),
            ));
        }
    }
    let loglog = record.config.fit.model == FitKind::PowerLaw;
    let data = PlotData {
        title: format!("{} ({})", record.name, record.version),
        loglog,
        png: format!("{}.png", record.name),
        series: record
            .series
            .iter()
            .map(|e| PlotSeries {
                csv: e.csv.clone(),
                label: series_label(e),
                classical: e.kind == SeriesKind::Classical,
            })
            .collect(),
        references: if loglog {
            power_law_references(record)
        } else {
            exponential_references(record)
        },
    };
    let json = serde_json::to_string(&data).map_err(|e| RunError::Other(e.to_string()))?;
    // A JSON string literal is also a valid Python string literal.
    let literal = serde_json::to_string(&json).map_err(|e| RunError::Other(e.to_string()))?;
    Ok(TEMPLATE.replace("__DATA__", &literal))
}

/// Writes the plotting script into the run directory (or `output`) and
/// returns its path. Relative CSV names resolve against the script's own
/// directory, so `output` should live next to the CSVs.
pub fn emit_plot_script(record: &RunRecord, output: Option<&Path>) -> RunResult<PathBuf> {
    let script = plot_script(record)?;
    let path = output
        .map(Path::to_path_buf)
        .unwrap_or_else(|| record.out_dir.join(format!("plot_{}.py", record.name)));
    std::fs::write(&path, script).map_err(|e| RunError::io(&path, e))?;
    Ok(path)
}
