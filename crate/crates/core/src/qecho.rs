//! Quantum Loschmidt echo.
//!
//! The echo amplitude `⟨ψ|(Û†)ᵗÛ₀ᵗ|ψ⟩` equals `⟨Ûᵗψ|Û₀ᵗψ⟩`, so instead of
//! running forward and then backward for every `t` we evolve the state once
//! with each propagator and take the overlap at every step. Mixtures evolve
//! all members side by side and combine their overlaps according to
//! [`MixtureFidelity`].

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::{momentum_eigenstate, Direction, MapParams, SawtoothPropagator, WaveFunction};
use crate::series::{linear_times, FidelitySeries, InitialDescriptor, SeriesKind, SeriesMeta};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialCondition {
    SingleMomentum {
        n: i64,
    },
    /// Uniform incoherent mixture of every `|n⟩` with `−ν/2 ≤ Tn < ν/2`.
    MomentumMixture {
        nu: f64,
    },
}

impl InitialCondition {
    /// Momentum indices making up the initial condition on the grid of `params`.
    pub fn members(&self, params: &MapParams) -> Result<Vec<i64>> {
        let half = (params.dim / 2) as i64;
        match *self {
            InitialCondition::SingleMomentum { n } => {
                if n < -half || n >= half {
                    return Err(Error::MomentumOutOfRange { n, half });
                }
                Ok(vec![n])
            }
            InitialCondition::MomentumMixture { nu } => {
                let t = params.planck_step();
                let members: Vec<i64> = (-half..half)
                    .filter(|&n| {
                        let p = t * n as f64;
                        -0.5 * nu <= p && p < 0.5 * nu
                    })
                    .collect();
                if members.is_empty() {
                    return Err(Error::EmptyMixture { nu });
                }
                Ok(members)
            }
        }
    }

    pub fn descriptor(&self, params: &MapParams) -> Result<InitialDescriptor> {
        Ok(match *self {
            InitialCondition::SingleMomentum { n } => InitialDescriptor::Momentum { n },
            InitialCondition::MomentumMixture { nu } => InitialDescriptor::Mixture {
                nu,
                members: self.members(params)?.len(),
            },
        })
    }
}

/// `⟨ψ|φ⟩`.
pub fn overlap(psi: &WaveFunction, phi: &WaveFunction) -> Result<Complex64> {
    if psi.dim() != phi.dim() {
        return Err(Error::DimensionMismatch {
            expected: psi.dim(),
            found: phi.dim(),
        });
    }
    if psi.basis() != phi.basis() {
        return Err(Error::WrongBasis {
            expected: match psi.basis() {
                crate::maps::Basis::Momentum => "momentum",
                crate::maps::Basis::Angle => "angle",
            },
        });
    }
    Ok(raw_overlap(psi.bins(), phi.bins()))
}

#[inline]
fn raw_overlap(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Fidelity of a single normalized state for `t = 0..=t_max`.
pub fn pure_state_fidelity(psi: &WaveFunction, params: &MapParams, t_max: u32) -> Result<Vec<f64>> {
    params.validate()?;
    if psi.dim() != params.dim {
        return Err(Error::DimensionMismatch {
            expected: params.dim,
            found: psi.dim(),
        });
    }
    let mut unperturbed = SawtoothPropagator::unperturbed(params);
    let mut perturbed = SawtoothPropagator::perturbed(params);
    let mut chi = psi.clone();
    let mut phi = psi.clone();
    let mut values = Vec::with_capacity(t_max as usize + 1);
    values.push(1.0);
    for _ in 0..t_max {
        unperturbed.step(&mut chi, Direction::Forward)?;
        perturbed.step(&mut phi, Direction::Forward)?;
        values.push(raw_overlap(phi.bins(), chi.bins()).norm_sqr().min(1.0));
    }
    Ok(values)
}

/// How a momentum mixture `ρ = M⁻¹ Σₙ |n⟩⟨n|` is turned into one fidelity.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MixtureFidelity {
    /// `Tr[ρ₀(t) ρ(t)] / Tr[ρ²] = M⁻¹ Σₙ Σₘ |⟨m|(Û†)ᵗÛ₀ᵗ|n⟩|²`: the probability
    /// that a member comes back anywhere inside the strip. This is the
    /// quantum counterpart of the classical return fraction and saturates
    /// at `M/N = ν/(2πL)` for ergodic dynamics.
    #[default]
    StripReturn,
    /// `M⁻¹ Σₙ |⟨n|(Û†)ᵗÛ₀ᵗ|n⟩|²`: mean of the pure-state fidelities.
    IncoherentMean,
}

struct MemberState {
    chi: Vec<Complex64>,
    phi: Vec<Complex64>,
    unperturbed: SawtoothPropagator,
    perturbed: SawtoothPropagator,
}

/// Per-member fidelity contributions sampled at `times`.
///
/// Row `i` holds member `members[i]`; the mixture fidelity is the mean of the
/// rows. All members are stepped in lock-step so the strip-return overlaps
/// `⟨φₘ(t)|χₙ(t)⟩` are available at each sampled time.
pub fn member_fidelities(
    members: &[i64],
    params: &MapParams,
    times: &[u32],
    mode: MixtureFidelity,
) -> Result<Vec<Vec<f64>>> {
    params.validate()?;
    check_times(times)?;
    if members.is_empty() {
        return Err(Error::EmptyMixture { nu: 0.0 });
    }
    let unperturbed = SawtoothPropagator::unperturbed(params);
    let perturbed = SawtoothPropagator::perturbed(params);
    let mut states = members
        .iter()
        .map(|&n| {
            let psi = momentum_eigenstate(n, params.dim)?;
            Ok(MemberState {
                chi: psi.bins().to_vec(),
                phi: psi.bins().to_vec(),
                unperturbed: unperturbed.clone(),
                perturbed: perturbed.clone(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows = vec![Vec::with_capacity(times.len()); members.len()];
    let mut t = 0u32;
    for &sample in times {
        while t < sample {
            states.par_iter_mut().for_each(|s| {
                s.unperturbed.apply(&mut s.chi, Direction::Forward);
                s.perturbed.apply(&mut s.phi, Direction::Forward);
            });
            t += 1;
        }
        let values: Vec<f64> = if sample == 0 {
            vec![1.0; states.len()]
        } else {
            match mode {
                MixtureFidelity::IncoherentMean => states
                    .par_iter()
                    .map(|s| raw_overlap(&s.phi, &s.chi).norm_sqr().min(1.0))
                    .collect(),
                MixtureFidelity::StripReturn => states
                    .par_iter()
                    .map(|n| {
                        states
                            .iter()
                            .map(|m| raw_overlap(&m.phi, &n.chi).norm_sqr())
                            .sum::<f64>()
                            .min(1.0)
                    })
                    .collect(),
            }
        };
        rows.iter_mut().zip(values).for_each(|(row, v)| row.push(v));
    }
    Ok(rows)
}

fn check_times(times: &[u32]) -> Result<()> {
    if times.is_empty() || times.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter {
            name: "times",
            value: times.len() as f64,
            reason: "sampling times must be non-empty and strictly increasing",
        });
    }
    Ok(())
}

/// Quantum fidelity for `t = 0..=t_max` with the default mixture treatment.
pub fn quantum_fidelity_series(init: &InitialCondition, params: &MapParams, t_max: u32) -> Result<FidelitySeries> {
    if t_max < 1 {
        return Err(Error::InvalidParameter {
            name: "t_max",
            value: 0.0,
            reason: "need at least one iteration",
        });
    }
    quantum_fidelity_at(init, params, &linear_times(t_max), MixtureFidelity::default())
}

/// Quantum fidelity at the given increasing times. For a single momentum
/// eigenstate both mixture modes reduce to `|⟨n|(Û†)ᵗÛ₀ᵗ|n⟩|²`.
pub fn quantum_fidelity_at(
    init: &InitialCondition,
    params: &MapParams,
    times: &[u32],
    mode: MixtureFidelity,
) -> Result<FidelitySeries> {
    params.validate()?;
    let members = init.members(params)?;
    let rows = member_fidelities(&members, params, times, mode)?;
    FidelitySeries::new(
        times.to_vec(),
        mean_of_members(&rows),
        SeriesMeta {
            params: *params,
            kind: SeriesKind::Quantum,
            initial: init.descriptor(params)?,
        },
    )
}

/// Pointwise mean in member order; `t = 0` entries are exactly one.
pub fn mean_of_members(per_member: &[Vec<f64>]) -> Vec<f64> {
    let len = per_member[0].len();
    let m = per_member.len() as f64;
    (0..len)
        .map(|i| {
            if per_member.iter().all(|v| v[i] == 1.0) {
                1.0
            } else {
                (per_member.iter().map(|v| v[i]).sum::<f64>() / m).min(1.0)
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaturationEstimate {
    pub mean: f64,
    pub stderr: f64,
    /// First time included in the tail.
    pub tail_start: u32,
    /// The tail is still visibly decaying: its log-slope is negative,
    /// significant at two standard errors, and at least half the average
    /// decay rate before it.
    pub overlaps_decay: bool,
}

/// Mean and standard error over the last `tail_fraction` of the series.
pub fn saturation_estimate(series: &FidelitySeries, tail_fraction: f64) -> Result<SaturationEstimate> {
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "tail_fraction",
            value: tail_fraction,
            reason: "must lie in (0, 1]",
        });
    }
    let n = series.len();
    let tail_len = ((n as f64 * tail_fraction).ceil() as usize).clamp(1, n);
    let start = n - tail_len;
    let tail = &series.values[start..];
    // Averaging deviations from the first tail value keeps a flat tail exact.
    let base = tail[0];
    let mean = base + tail.iter().map(|v| v - base).sum::<f64>() / tail_len as f64;
    let stderr = if tail_len > 1 {
        let var = tail.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (tail_len - 1) as f64;
        (var / tail_len as f64).sqrt()
    } else {
        0.0
    };

    let tail_start = series.times[start];
    let overlaps_decay = if start == 0 || tail_len < 2 || tail.iter().any(|&v| v <= 0.0) {
        false
    } else {
        let head_rate = -series.values[start].ln() / f64::from(tail_start - series.times[0]).max(1.0);
        let ts: Vec<f64> = series.times[start..].iter().map(|&t| f64::from(t)).collect();
        let ys: Vec<f64> = tail.iter().map(|v| v.ln()).collect();
        match crate::analysis::least_squares(&ts, &ys) {
            Ok(line) => head_rate > 0.0 && -line.slope >= 0.5 * head_rate && -line.slope > 2.0 * line.slope_stderr,
            Err(_) => false,
        }
    };

    Ok(SaturationEstimate {
        mean,
        stderr,
        tail_start,
        overlaps_decay,
    })
}
