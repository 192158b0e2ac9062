//! Log-linear and log-log least-squares fits over reproducible windows.

use serde::{Deserialize, Serialize};

use crate::analysis::physics::{transient_time, CRITICAL_SIGMA};
use crate::error::{Error, Result};
use crate::qecho::saturation_estimate;
use crate::series::{FidelitySeries, SeriesKind};

/// Minimum number of points inside a fit window.
pub const MIN_FIT_POINTS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub slope_stderr: f64,
}

/// Ordinary least squares `y ≈ intercept + slope·x`.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            expected: xs.len(),
            found: ys.len(),
        });
    }
    let n = xs.len();
    if n < 2 {
        return Err(Error::Degenerate("need at least two points".into()));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Degenerate("abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - intercept - slope * x;
            r * r
        })
        .sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    let slope_stderr = if n > 2 { (ss_res / (nf - 2.0) / sxx).sqrt() } else { 0.0 };
    Ok(LinearFit {
        slope,
        intercept,
        r_squared,
        slope_stderr,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitKind {
    Exponential,
    PowerLaw,
}

/// Result of a decay fit.
///
/// For [`FitKind::Exponential`] `rate` is `γ` in `f ∝ e^{−γt}`; for
/// [`FitKind::PowerLaw`] it is the exponent `α` in `f ∝ t^α`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub kind: FitKind,
    pub rate: f64,
    pub rate_stderr: f64,
    /// Intercept of the fitted line in natural-log units.
    pub intercept: f64,
    pub window: (u32, u32),
    pub points: usize,
    pub r_squared: f64,
}

impl FitResult {
    /// Model value at `t`.
    pub fn predict(&self, t: f64) -> f64 {
        match self.kind {
            FitKind::Exponential => (self.intercept - self.rate * t).exp(),
            FitKind::PowerLaw => (self.intercept + self.rate * t.ln()).exp(),
        }
    }

    /// Time at which the fitted exponential reaches `level`.
    pub fn time_at_level(&self, level: f64) -> f64 {
        match self.kind {
            FitKind::Exponential => (self.intercept - level.ln()) / self.rate,
            FitKind::PowerLaw => ((level.ln() - self.intercept) / self.rate).exp(),
        }
    }
}

/// How the fit window is chosen.
///
/// Unset bounds are automatic. The automatic start is the echo transient
/// `ln(ν/ε)/λ` for classical series (rounded up) and `t = 1` otherwise. The
/// automatic end is the last time before the series first falls to
/// `saturation_factor` times the plateau; the plateau is `saturation` when
/// given, else the mean of the last `tail_fraction` of the series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WindowPolicy {
    pub start: Option<u32>,
    pub end: Option<u32>,
    pub saturation: Option<f64>,
    pub saturation_factor: f64,
    pub tail_fraction: f64,
}

impl Default for WindowPolicy {
    fn default() -> Self {
        Self {
            start: None,
            end: None,
            saturation: None,
            saturation_factor: 10.0,
            tail_fraction: 0.25,
        }
    }
}

impl WindowPolicy {
    pub fn fixed(start: u32, end: u32) -> Self {
        Self {
            start: Some(start),
            end: Some(end),
            ..Self::default()
        }
    }

    pub fn with_saturation(self, saturation: f64) -> Self {
        Self {
            saturation: Some(saturation),
            ..self
        }
    }

    pub fn with_start(self, start: u32) -> Self {
        Self {
            start: Some(start),
            ..self
        }
    }

    pub fn with_end(self, end: u32) -> Self {
        Self { end: Some(end), ..self }
    }
}

/// Default window start: after the transient `t*` for classical strips and,
/// above the critical border, for quantum strip mixtures. Everything else
/// starts at `t = 1`.
fn auto_start(series: &FidelitySeries) -> Result<u32> {
    let meta = &series.meta;
    let semiclassical = match meta.kind {
        SeriesKind::Classical => true,
        SeriesKind::Quantum => meta.params.sigma().abs() >= CRITICAL_SIGMA,
    };
    let start = match meta.initial.strip_height() {
        Some(nu) if meta.params.eps != 0.0 && semiclassical => {
            transient_time(nu, meta.params.eps, meta.params.kick)?.ceil() as u32
        }
        _ => 1,
    };
    Ok(start.max(1))
}

/// Index range `[first, last]` of the samples selected by `policy`.
pub fn resolve_window(series: &FidelitySeries, policy: &WindowPolicy) -> Result<(usize, usize)> {
    let start_t = match policy.start {
        Some(t) => t,
        None => auto_start(series)?,
    };
    let first = series
        .times
        .iter()
        .position(|&t| t >= start_t)
        .ok_or_else(|| Error::InvalidWindow(format!("start {start_t} beyond series end {}", series.t_max())))?;

    let last = match policy.end {
        Some(end_t) => series
            .times
            .iter()
            .rposition(|&t| t <= end_t)
            .ok_or_else(|| Error::InvalidWindow(format!("end {end_t} before series start")))?,
        None => {
            let plateau = match policy.saturation {
                Some(s) => s,
                None => saturation_estimate(series, policy.tail_fraction)?.mean,
            };
            let threshold = policy.saturation_factor * plateau;
            match series.values[first..].iter().position(|&f| f <= threshold) {
                Some(0) => {
                    return Err(Error::InvalidWindow(format!(
                        "series is already within {}x of its plateau at t = {start_t}",
                        policy.saturation_factor
                    )))
                }
                Some(k) => first + k - 1,
                None => series.len() - 1,
            }
        }
    };

    if last < first || last - first + 1 < MIN_FIT_POINTS {
        return Err(Error::InvalidWindow(format!(
            "window [{}, {}] holds fewer than {MIN_FIT_POINTS} samples",
            series.times[first],
            series.times[last.max(first)]
        )));
    }
    Ok((first, last))
}

fn fit_window(series: &FidelitySeries, policy: &WindowPolicy, kind: FitKind) -> Result<FitResult> {
    let (first, last) = resolve_window(series, policy)?;
    let times = &series.times[first..=last];
    let values = &series.values[first..=last];
    if values.iter().all(|&f| f == 0.0) {
        return Err(Error::Degenerate("all fidelities in the window are zero".into()));
    }
    if let Some(i) = values.iter().position(|&f| f <= 0.0) {
        return Err(Error::Degenerate(format!(
            "zero fidelity at t = {} inside the fit window",
            times[i]
        )));
    }
    let xs: Vec<f64> = match kind {
        FitKind::Exponential => times.iter().map(|&t| f64::from(t)).collect(),
        FitKind::PowerLaw => {
            if times[0] == 0 {
                return Err(Error::InvalidWindow("power-law window must start at t >= 1".into()));
            }
            times.iter().map(|&t| f64::from(t).ln()).collect()
        }
    };
    let ys: Vec<f64> = values.iter().map(|f| f.ln()).collect();
    let line = least_squares(&xs, &ys)?;
    let rate = match kind {
        FitKind::Exponential => -line.slope,
        FitKind::PowerLaw => line.slope,
    };
    if !rate.is_finite() {
        return Err(Error::Degenerate("non-finite fitted rate".into()));
    }
    Ok(FitResult {
        kind,
        // Normalizes −0.0 from flat data.
        rate: rate + 0.0,
        rate_stderr: line.slope_stderr,
        intercept: line.intercept,
        window: (times[0], *times.last().unwrap()),
        points: times.len(),
        r_squared: line.r_squared,
    })
}

/// Exponential rate from the least-squares slope of `ln f` against `t`.
pub fn fit_exponential_rate(series: &FidelitySeries, policy: &WindowPolicy) -> Result<FitResult> {
    fit_window(series, policy, FitKind::Exponential)
}

/// Power-law exponent from the least-squares slope of `ln f` against `ln t`.
pub fn fit_power_law(series: &FidelitySeries, policy: &WindowPolicy) -> Result<FitResult> {
    fit_window(series, policy, FitKind::PowerLaw)
}
