//! Built-in experiment presets, one per published figure.
//!
//! Each preset is generated from [`CAPTIONS`], a literal transcription of
//! the figure captions. [`check_preset`] compares a config against that table
//! so that edits to a preset cannot silently drift from its figure.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use sawtooth_echo::analysis::{FitKind, FGR_CONSTANT};
use sawtooth_echo::qecho::{InitialCondition, MixtureFidelity};
use sawtooth_echo::MapParams;
use serde::{Deserialize, Serialize};

use crate::config::{
    ClassicalSetup, ExperimentConfig, FitConfig, Plateau, PlateauRule, QuantumSetup, SweepPoint, TimeGrid,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
}

impl Preset {
    pub const ALL: [Preset; 5] = [Preset::Fig1, Preset::Fig2, Preset::Fig3, Preset::Fig4, Preset::Fig5];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig1 => "fig1",
            Preset::Fig2 => "fig2",
            Preset::Fig3 => "fig3",
            Preset::Fig4 => "fig4",
            Preset::Fig5 => "fig5",
        }
    }

    pub fn summary(self) -> &'static str {
        match self {
            Preset::Fig1 => "classical echo, Lyapunov decay for five perturbation strengths",
            Preset::Fig2 => "quantum echo of n=0 in the golden-rule regime, sigma scaling",
            Preset::Fig3 => "quantum vs classical echo of a momentum strip above the critical border",
            Preset::Fig4 => "decay rate versus sigma across the perturbative and Lyapunov regimes",
            Preset::Fig5 => "diffusive regime on a long torus, power-law classical decay",
        }
    }

    /// Full-scale configuration of this preset.
    pub fn config(self) -> ExperimentConfig {
        let rows: Vec<&CaptionRow> = CAPTIONS.iter().filter(|r| r.preset == self).collect();
        let mut sweep = Vec::new();
        for row in &rows {
            match row.perturbation {
                Perturbation::Eps(values) => {
                    let dims = if row.dims.is_empty() {
                        &[CLASSICAL_DIM][..]
                    } else {
                        row.dims
                    };
                    for &dim in dims {
                        for &eps in values {
                            sweep.push(SweepPoint::from(params(row.kick, row.torus_len, dim, eps)));
                        }
                    }
                }
                Perturbation::SigmaSweep => {
                    for &dim in row.dims {
                        for &sigma in FIG4_SIGMAS {
                            let p = MapParams::from_sigma(row.kick, row.torus_len, dim, sigma)
                                .expect("preset parameters are valid");
                            sweep.push(SweepPoint {
                                params: p,
                                t_max: Some(fig4_horizon(sigma)),
                            });
                        }
                    }
                }
            }
        }
        let nu = rows.iter().find_map(|r| r.nu);
        let base = ExperimentConfig {
            name: self.name().to_string(),
            preset: Some(self),
            sweep,
            classical: None,
            quantum: None,
            t_max: 30,
            times: TimeGrid::Linear,
            fit: FitConfig::default(),
            fgr_constant: FGR_CONSTANT,
            out_dir: PathBuf::from("runs").join(self.name()),
        };
        let classical = |nu: f64| ClassicalSetup {
            nu,
            trajectories: FULL_TRAJECTORIES,
            seed: 1,
        };
        let mixture = |nu: f64| QuantumSetup {
            initial: InitialCondition::MomentumMixture { nu },
            mixture: MixtureFidelity::StripReturn,
        };
        match self {
            Preset::Fig1 => ExperimentConfig {
                classical: Some(classical(nu.unwrap())),
                ..base
            },
            Preset::Fig2 => ExperimentConfig {
                quantum: Some(QuantumSetup {
                    initial: InitialCondition::SingleMomentum { n: 0 },
                    mixture: MixtureFidelity::StripReturn,
                }),
                t_max: 400,
                ..base
            },
            Preset::Fig3 => ExperimentConfig {
                classical: Some(classical(nu.unwrap())),
                quantum: Some(mixture(nu.unwrap())),
                ..base
            },
            Preset::Fig4 => ExperimentConfig {
                quantum: Some(mixture(FIG4_STRIP)),
                t_max: 60,
                fit: FitConfig {
                    saturation_factor: 3.0,
                    ..FitConfig::default()
                },
                ..base
            },
            Preset::Fig5 => ExperimentConfig {
                classical: Some(classical(nu.unwrap())),
                quantum: Some(mixture(nu.unwrap())),
                t_max: 1000,
                times: TimeGrid::Log { points: 40 },
                fit: FitConfig {
                    model: FitKind::PowerLaw,
                    start: Some(FIG5_FIT_START),
                    plateau: Plateau::Rule(PlateauRule::Off),
                    ..FitConfig::default()
                },
                ..base
            },
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown preset `{s}` (expected one of fig1..fig5)"))
    }
}

fn params(kick: f64, torus_len: u32, dim: usize, eps: f64) -> MapParams {
    MapParams::new(kick, torus_len, dim, eps).expect("preset parameters are valid")
}

/// Trajectories per classical ensemble at full scale.
pub const FULL_TRAJECTORIES: usize = 1_000_000;

/// Dimension carried by purely classical sweeps, which never use it.
const CLASSICAL_DIM: usize = 1024;

/// σ grid of the rate-versus-σ sweep, spanning the captioned axis range.
pub const FIG4_SIGMAS: &[f64] = &[0.03, 0.05, 0.1, 0.2, 0.3, 0.5, 1.0, 1.5, 3.0, 6.0, 10.0];

/// Strip of momentum states used for the rate-versus-σ sweep. Several
/// states are needed so that the Lyapunov branch has a resolvable decay at
/// the smallest dimension.
pub const FIG4_STRIP: f64 = TAU / 200.0;

/// Power-law fits of the diffusive preset start one decade after the echo
/// transient `ln(ν/ε)/λ ≈ 4.3`.
pub const FIG5_FIT_START: u32 = 50;

/// Iterations needed to follow a golden-rule decay about 3.5 decades down,
/// or a fixed horizon above the critical border.
fn fig4_horizon(sigma: f64) -> u32 {
    if sigma < 1.0 {
        ((8.0 / (FGR_CONSTANT * sigma * sigma)).ceil() as u32 + 20).min(10_000)
    } else {
        60
    }
}

/// How a caption specifies the perturbation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Perturbation {
    /// Explicit ε values.
    Eps(&'static [f64]),
    /// A σ axis; the sampled grid is [`FIG4_SIGMAS`].
    SigmaSweep,
}

/// One caption line. A preset's sweep is the union over its rows of
/// `dims × perturbation`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaptionRow {
    pub preset: Preset,
    pub kick: f64,
    pub torus_len: u32,
    /// Empty for classical-only figures.
    pub dims: &'static [usize],
    pub perturbation: Perturbation,
    pub nu: Option<f64>,
}

pub const CAPTIONS: &[CaptionRow] = &[
    CaptionRow {
        preset: Preset::Fig1,
        kick: 1.0,
        torus_len: 1,
        dims: &[],
        perturbation: Perturbation::Eps(&[1e-3, 1e-4, 1e-5, 1e-6, 1e-7]),
        nu: Some(TAU / 1e4),
    },
    CaptionRow {
        preset: Preset::Fig2,
        kick: 1.0,
        torus_len: 1,
        dims: &[8192, 16384, 32768],
        perturbation: Perturbation::Eps(&[5e-5]),
        nu: None,
    },
    CaptionRow {
        preset: Preset::Fig3,
        kick: 1.0,
        torus_len: 1,
        dims: &[16384, 131072],
        perturbation: Perturbation::Eps(&[1e-3]),
        nu: Some(TAU / 1e3),
    },
    CaptionRow {
        preset: Preset::Fig3,
        kick: 1.0,
        torus_len: 1,
        dims: &[131072],
        perturbation: Perturbation::Eps(&[1e-4]),
        nu: Some(TAU / 1e3),
    },
    CaptionRow {
        preset: Preset::Fig4,
        kick: 1.0,
        torus_len: 1,
        dims: &[2048, 8192, 65536],
        perturbation: Perturbation::SigmaSweep,
        nu: None,
    },
    CaptionRow {
        preset: Preset::Fig4,
        kick: 2.0,
        torus_len: 1,
        dims: &[8192],
        perturbation: Perturbation::SigmaSweep,
        nu: None,
    },
    CaptionRow {
        preset: Preset::Fig4,
        kick: 10.0,
        torus_len: 1,
        dims: &[8192],
        perturbation: Perturbation::SigmaSweep,
        nu: None,
    },
    CaptionRow {
        preset: Preset::Fig5,
        kick: 1.0,
        torus_len: 50,
        dims: &[1024, 2048, 8192, 16384, 32768],
        perturbation: Perturbation::Eps(&[0.05]),
        nu: Some(PI),
    },
];

/// Checks that `config` reproduces the caption parameters of `preset`:
/// the same set of `(K₀, L, N, ε)` points and the same strip height.
pub fn check_preset(preset: Preset, config: &ExperimentConfig) -> Result<(), String> {
    let rows: Vec<&CaptionRow> = CAPTIONS.iter().filter(|r| r.preset == preset).collect();
    let classical_only = rows.iter().all(|r| r.dims.is_empty());
    let matches_row = |p: &MapParams| {
        rows.iter().any(|r| {
            let dim_ok = r.dims.is_empty() || r.dims.contains(&p.dim);
            let eps_ok = match r.perturbation {
                Perturbation::Eps(values) => values.contains(&p.eps),
                Perturbation::SigmaSweep => FIG4_SIGMAS.iter().any(|&s| (p.sigma() - s).abs() <= 1e-12 * s),
            };
            r.kick == p.kick && r.torus_len == p.torus_len && dim_ok && eps_ok
        })
    };
    for (i, point) in config.sweep.iter().enumerate() {
        if !matches_row(&point.params) {
            return Err(format!(
                "sweep[{i}] = {:?} is not in the {preset} caption",
                point.params
            ));
        }
    }
    let expected: usize = rows
        .iter()
        .map(|r| {
            let dims = if classical_only { 1 } else { r.dims.len() };
            let perts = match r.perturbation {
                Perturbation::Eps(v) => v.len(),
                Perturbation::SigmaSweep => FIG4_SIGMAS.len(),
            };
            dims * perts
        })
        .sum();
    if config.sweep.len() != expected {
        return Err(format!(
            "{preset} caption lists {expected} parameter points, config has {}",
            config.sweep.len()
        ));
    }
    if let Some(nu) = rows.iter().find_map(|r| r.nu) {
        if let Some(c) = &config.classical {
            if c.nu != nu {
                return Err(format!("classical.nu = {} but the {preset} caption has {nu}", c.nu));
            }
        }
        if let Some(QuantumSetup {
            initial: InitialCondition::MomentumMixture { nu: q },
            ..
        }) = &config.quantum
        {
            if *q != nu {
                return Err(format!("quantum strip {q} but the {preset} caption has {nu}"));
            }
        }
    }
    if preset == Preset::Fig2 {
        let single_zero = matches!(
            config.quantum,
            Some(QuantumSetup {
                initial: InitialCondition::SingleMomentum { n: 0 },
                ..
            })
        );
        if !single_zero {
            return Err("fig2 caption starts from the n = 0 momentum eigenstate".into());
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_matches_its_caption() {
        for preset in Preset::ALL {
            let config = preset.config();
            config.validate().unwrap();
            check_preset(preset, &config).unwrap_or_else(|e| panic!("{preset}: {e}"));
        }
    }

    #[test]
    fn caption_sigmas_are_reproduced() {
        // σ values printed in the captions, rounded as printed.
        let fig2: Vec<f64> = Preset::Fig2.config().sweep.iter().map(|p| p.params.sigma()).collect();
        for (got, want) in fig2.iter().zip([0.065, 0.13, 0.26]) {
            assert!((got - want).abs() < 0.005, "{got} vs {want}");
        }
        let fig5: Vec<f64> = Preset::Fig5.config().sweep.iter().map(|p| p.params.sigma()).collect();
        for (got, want) in fig5.iter().zip([0.16, 0.33, 1.30, 2.61, 5.22]) {
            assert!((got - want).abs() < 0.005, "{got} vs {want}");
        }
    }

    #[test]
    fn drift_is_detected() {
        let mut c = Preset::Fig2.config();
        c.sweep[0].params.eps = 6e-5;
        assert!(check_preset(Preset::Fig2, &c).is_err());

        let mut c = Preset::Fig3.config();
        c.sweep.pop();
        assert!(check_preset(Preset::Fig3, &c).is_err());

        let mut c = Preset::Fig1.config();
        c.classical.as_mut().unwrap().nu = TAU / 1e3;
        assert!(check_preset(Preset::Fig1, &c).is_err());
    }

    #[test]
    fn names_parse() {
        for p in Preset::ALL {
            assert_eq!(p.name().parse::<Preset>().unwrap(), p);
        }
        assert!("fig6".parse::<Preset>().is_err());
    }
}
