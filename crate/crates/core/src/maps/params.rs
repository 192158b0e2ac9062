use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameter bundle shared by the classical and quantum sawtooth maps.
///
/// The classical map depends only on `kick` (K₀) and the torus length; the
/// quantum map additionally needs the grid size `dim`. The perturbation is
/// always specified classically through `eps` and converted to the quantum
/// kick shift σ = εN/(2πL), so both pictures see the same perturbation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapParams {
    /// Classical kick strength K₀.
    #[serde(rename = "K0")]
    pub kick: f64,
    /// Torus length in units of 2π.
    #[serde(rename = "L")]
    pub torus_len: u32,
    /// Number of momentum states.
    #[serde(rename = "N")]
    pub dim: usize,
    /// Classical perturbation ε of the kick strength.
    pub eps: f64,
}

impl MapParams {
    /// Validates and builds a parameter set.
    ///
    /// `eps` may be negative: the sign only flips the direction of the
    /// perturbation and is used to probe the σ → −σ symmetry.
    pub fn new(kick: f64, torus_len: u32, dim: usize, eps: f64) -> Result<Self> {
        let params = Self {
            kick,
            torus_len,
            dim,
            eps,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kick.is_finite() && self.kick > 0.0) {
            return Err(Error::InvalidParameter {
                name: "K0",
                value: self.kick,
                reason: "kick strength must be finite and positive",
            });
        }
        if self.torus_len == 0 {
            return Err(Error::InvalidParameter {
                name: "L",
                value: 0.0,
                reason: "torus length must be a positive integer",
            });
        }
        if self.dim < 2 || !self.dim.is_multiple_of(2) {
            return Err(Error::InvalidParameter {
                name: "N",
                value: self.dim as f64,
                reason: "dimension must be a positive even integer",
            });
        }
        if !self.eps.is_finite() {
            return Err(Error::InvalidParameter {
                name: "eps",
                value: self.eps,
                reason: "perturbation must be finite",
            });
        }
        Ok(())
    }

    /// Same map with a different perturbation.
    pub fn with_eps(self, eps: f64) -> Self {
        Self { eps, ..self }
    }

    /// Parameters at grid size `dim` with ε rescaled so that σ is unchanged.
    pub fn with_dim_fixed_sigma(self, dim: usize) -> Self {
        let sigma = self.sigma();
        Self {
            dim,
            eps: sigma * 2.0 * PI * f64::from(self.torus_len) / dim as f64,
            ..self
        }
    }

    /// Builds the parameter set whose quantum perturbation equals `sigma`.
    pub fn from_sigma(kick: f64, torus_len: u32, dim: usize, sigma: f64) -> Result<Self> {
        let eps = sigma * 2.0 * PI * f64::from(torus_len) / dim as f64;
        Self::new(kick, torus_len, dim, eps)
    }

    /// Phase-space length 2πL of the momentum torus.
    pub fn torus_period(&self) -> f64 {
        2.0 * PI * f64::from(self.torus_len)
    }

    /// Effective Planck cell T = 2πL/N.
    pub fn planck_step(&self) -> f64 {
        self.torus_period() / self.dim as f64
    }

    /// Quantum kick amplitude k₀ = K₀N/(2πL).
    pub fn quantum_kick(&self) -> f64 {
        self.kick * self.dim as f64 / self.torus_period()
    }

    /// Quantum perturbation σ = εN/(2πL).
    pub fn sigma(&self) -> f64 {
        self.eps * self.dim as f64 / self.torus_period()
    }

    /// Perturbed classical kick K = K₀ + ε.
    pub fn perturbed_kick(&self) -> f64 {
        self.kick + self.eps
    }

    /// Perturbed quantum kick k = k₀ + σ.
    pub fn perturbed_quantum_kick(&self) -> f64 {
        self.quantum_kick() + self.sigma()
    }
}
