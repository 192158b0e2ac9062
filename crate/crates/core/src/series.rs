use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::MapParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesKind {
    Classical,
    Quantum,
}

/// How the initial condition of a series was prepared.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum InitialDescriptor {
    /// Monte-Carlo strip `−ν/2 ≤ p < ν/2` sampled with `count` points.
    Strip { nu: f64, count: usize, seed: u64 },
    /// Single momentum eigenstate.
    Momentum { n: i64 },
    /// Incoherent mixture of the momentum states inside the strip `ν`.
    Mixture { nu: f64, members: usize },
}

impl InitialDescriptor {
    /// Strip height ν, when the initial condition occupies a strip.
    pub fn strip_height(&self) -> Option<f64> {
        match *self {
            InitialDescriptor::Strip { nu, .. } | InitialDescriptor::Mixture { nu, .. } => Some(nu),
            InitialDescriptor::Momentum { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesMeta {
    pub params: MapParams,
    pub kind: SeriesKind,
    pub initial: InitialDescriptor,
}

/// Fidelity sampled at increasing integer map iterations.
///
/// Most series are sampled at every `t = 0..=t_max`; classical series may
/// use a sparser grid (the echo at each time is computed independently).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelitySeries {
    pub times: Vec<u32>,
    pub values: Vec<f64>,
    pub meta: SeriesMeta,
}

impl FidelitySeries {
    pub fn new(times: Vec<u32>, values: Vec<f64>, meta: SeriesMeta) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: times.len(),
                found: values.len(),
            });
        }
        if times.is_empty() {
            return Err(Error::Degenerate("empty series".into()));
        }
        if times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Degenerate("times must be strictly increasing".into()));
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Degenerate(format!("fidelity {v} outside [0, 1]")));
        }
        Ok(Self { times, values, meta })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn t_max(&self) -> u32 {
        *self.times.last().expect("series is non-empty")
    }

    /// Fidelity at iteration `t`, if sampled.
    pub fn at(&self, t: u32) -> Option<f64> {
        self.times.binary_search(&t).ok().map(|i| self.values[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.times.iter().copied().zip(self.values.iter().copied())
    }
}

/// Sampling times `0..=t_max`.
pub fn linear_times(t_max: u32) -> Vec<u32> {
    (0..=t_max).collect()
}

/// Roughly `points` logarithmically spaced integer times in `[1, t_max]`,
/// preceded by `t = 0`. Duplicates from rounding at small `t` are dropped.
pub fn log_times(t_max: u32, points: usize) -> Vec<u32> {
    let mut times = vec![0u32];
    if t_max == 0 {
        return times;
    }
    let points = points.max(2);
    let ratio = (f64::from(t_max)).ln() / (points - 1) as f64;
    for i in 0..points {
        let t = ((i as f64 * ratio).exp().round() as u32).clamp(1, t_max);
        if *times.last().unwrap() < t {
            times.push(t);
        }
    }
    if *times.last().unwrap() != t_max {
        times.push(t_max);
    }
    times
}
