use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Empirical prefactor of the Breit-Wigner decay rate `Γ = Cσ²`.
pub const FGR_CONSTANT: f64 = 2.2;

/// Critical perturbation above which quantum fidelity follows the classical echo.
pub const CRITICAL_SIGMA: f64 = 1.0;

/// Lyapunov exponent of the sawtooth map,
/// `λ = ln[(2 + K₀ + √((2 + K₀)² − 4)) / 2]`.
pub fn lyapunov(kick: f64) -> Result<f64> {
    if !(kick.is_finite() && kick > 0.0) {
        return Err(Error::InvalidParameter {
            name: "K0",
            value: kick,
            reason: "the map is uniformly hyperbolic only for K0 > 0",
        });
    }
    // (2 + K)² − 4 = K(K + 4), which avoids cancellation at small K.
    Ok(((2.0 + kick + (kick * (kick + 4.0)).sqrt()) / 2.0).ln())
}

/// Random-phase diffusion coefficient `D = (π²/3)K₀²`, in units of `p²` per iteration.
///
/// The approximation is only claimed for `K₀ > 1`; smaller kicks still get
/// the formula value, with a warning.
pub fn diffusion_coefficient(kick: f64) -> f64 {
    if kick <= 1.0 {
        log::warn!("random-phase diffusion estimate used outside its range (K0 = {kick} <= 1)");
    }
    PI * PI / 3.0 * kick * kick
}

/// Quantum perturbation `σ = εN/(2πL)`.
pub fn sigma_from_eps(eps: f64, dim: usize, torus_len: u32) -> f64 {
    eps * dim as f64 / (2.0 * PI * f64::from(torus_len))
}

/// Breit-Wigner (Fermi golden rule) decay rate `Γ = Cσ²`.
pub fn fgr_rate(sigma: f64, c: f64) -> f64 {
    c * sigma * sigma
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Borders {
    /// `σ_p = 1/√N`.
    pub perturbative: f64,
    /// `σ_c = 1`.
    pub critical: f64,
}

pub fn borders(dim: usize) -> Borders {
    Borders {
        perturbative: 1.0 / (dim as f64).sqrt(),
        critical: CRITICAL_SIGMA,
    }
}

/// Iterations needed for a perturbation `ε` growing as `εe^{λt}` to reach the
/// strip height `ν`. Zero once `ε ≥ ν`, infinite for `ε = 0`.
pub fn transient_time(nu: f64, eps: f64, kick: f64) -> Result<f64> {
    let lambda = lyapunov(kick)?;
    let eps = eps.abs();
    if eps == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok((nu / eps).ln().max(0.0) / lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn lyapunov_reference_values() {
        assert_abs_diff_eq!(lyapunov(1.0).unwrap(), 0.9624, epsilon = 1e-4);
        assert_abs_diff_eq!(lyapunov(2.0).unwrap(), 1.3170, epsilon = 1e-4);
        assert_abs_diff_eq!(lyapunov(10.0).unwrap(), 2.4779, epsilon = 1e-4);
        assert!(lyapunov(0.0).is_err());
        assert!(lyapunov(-0.5).is_err());
    }

    #[test]
    fn lyapunov_is_monotone_and_logarithmic() {
        let mut prev = 0.0;
        for i in 1..2000 {
            let l = lyapunov(i as f64 * 0.05).unwrap();
            assert!(l > prev);
            prev = l;
        }
        let l = lyapunov(100.0).unwrap();
        assert!(((l - 100f64.ln()) / l).abs() < 0.05);
    }

    #[test]
    fn lyapunov_matches_tangent_eigenvalue() {
        for k in [0.3, 1.0, 2.0, 10.0] {
            let m = crate::maps::tangent_matrix(k);
            let tr = m[0][0] + m[1][1];
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            let eig = 0.5 * (tr + (tr * tr - 4.0 * det).sqrt());
            assert_abs_diff_eq!(eig.ln(), lyapunov(k).unwrap(), epsilon = 1e-12);
        }
    }

    #[test]
    fn diffusion_values() {
        assert_abs_diff_eq!(diffusion_coefficient(1.0), 3.2899, epsilon = 1e-4);
        assert_abs_diff_eq!(diffusion_coefficient(2.0), 13.159, epsilon = 1e-3);
    }

    #[test]
    fn sigma_and_borders() {
        assert_abs_diff_eq!(sigma_from_eps(5e-5, 16384, 1), 0.1304, epsilon = 1e-4);
        assert_abs_diff_eq!(sigma_from_eps(1e-3, 131072, 1), 20.86, epsilon = 1e-2);
        assert_eq!(sigma_from_eps(0.0, 1024, 1), 0.0);
        assert_eq!(fgr_rate(0.0, FGR_CONSTANT), 0.0);
        assert_abs_diff_eq!(borders(8192).perturbative, 0.01105, epsilon = 1e-5);
        assert_eq!(borders(8192).critical, 1.0);
    }

    #[test]
    fn transient_scales_with_log_ratio() {
        let lambda = lyapunov(1.0).unwrap();
        let a = transient_time(1e-3, 1e-5, 1.0).unwrap();
        let b = transient_time(1e-3, 1e-3, 1.0).unwrap();
        assert_abs_diff_eq!(a - b, 100f64.ln() / lambda, epsilon = 1e-12);
        assert_eq!(transient_time(1e-3, 1.0, 1.0).unwrap(), 0.0);
        assert!(transient_time(1e-3, 0.0, 1.0).unwrap().is_infinite());
    }
}
