use serde::{Deserialize, Serialize};

use crate::analysis::physics::{borders, fgr_rate, lyapunov, FGR_CONSTANT};
use crate::maps::MapParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `σ < σ_p`: non-exponential (Gaussian) decay, no rate predicted.
    Perturbative,
    /// `σ_p ≤ σ < σ_c`: exponential decay at the golden-rule rate `Cσ²`.
    BreitWigner,
    /// `σ ≥ σ_c`: exponential decay at the classical Lyapunov exponent.
    Lyapunov,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub sigma: f64,
    pub sigma_p: f64,
    pub sigma_c: f64,
    pub regime: Regime,
    pub predicted_rate: Option<f64>,
    /// `|σ|` lies within a factor two of one of the borders, where neither
    /// limiting law is expected to hold cleanly.
    pub crossover: bool,
}

pub fn classify_regime(params: &MapParams) -> RegimeReport {
    classify_regime_with(params, FGR_CONSTANT)
}

/// Classifies `params` with golden-rule prefactor `c`. The rate depends on
/// `σ²`, so the sign of the perturbation is ignored.
pub fn classify_regime_with(params: &MapParams, c: f64) -> RegimeReport {
    let sigma = params.sigma();
    let b = borders(params.dim);
    let s = sigma.abs();
    let (regime, predicted_rate) = if s < b.perturbative {
        (Regime::Perturbative, None)
    } else if s < b.critical {
        (Regime::BreitWigner, Some(fgr_rate(s, c)))
    } else {
        // MapParams guarantees K0 > 0.
        (Regime::Lyapunov, lyapunov(params.kick).ok())
    };
    let near = |border: f64| s >= 0.5 * border && s <= 2.0 * border;
    RegimeReport {
        sigma,
        sigma_p: b.perturbative,
        sigma_c: b.critical,
        regime,
        predicted_rate,
        crossover: near(b.perturbative) || near(b.critical),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn breit_wigner_example() {
        let p = MapParams::from_sigma(1.0, 1, 16384, 0.13).unwrap();
        let r = classify_regime(&p);
        assert_eq!(r.regime, Regime::BreitWigner);
        assert_abs_diff_eq!(r.predicted_rate.unwrap(), 0.0372, epsilon = 1e-4);
        assert!(!r.crossover);
    }

    #[test]
    fn lyapunov_example() {
        let p = MapParams::new(1.0, 1, 16384, 1e-3).unwrap();
        let r = classify_regime(&p);
        assert_abs_diff_eq!(r.sigma, 2.61, epsilon = 5e-3);
        assert_eq!(r.regime, Regime::Lyapunov);
        assert_abs_diff_eq!(r.predicted_rate.unwrap(), 0.9624, epsilon = 1e-4);
    }

    #[test]
    fn perturbative_example() {
        let p = MapParams::from_sigma(1.0, 1, 10_000, 1e-3).unwrap();
        let r = classify_regime(&p);
        assert_eq!(r.regime, Regime::Perturbative);
        assert_eq!(r.predicted_rate, None);
        assert_abs_diff_eq!(r.sigma_p, 1e-2, epsilon = 1e-15);
        assert_eq!(r.sigma_c, 1.0);
    }

    #[test]
    fn crossover_flag_near_borders() {
        for (sigma, flagged) in [(0.6, true), (1.9, true), (2.1, false), (0.45, false), (0.02, true)] {
            let p = MapParams::from_sigma(1.0, 1, 10_000, sigma).unwrap();
            assert_eq!(classify_regime(&p).crossover, flagged, "sigma = {sigma}");
        }
    }

    #[test]
    fn sign_of_sigma_is_irrelevant() {
        let a = classify_regime(&MapParams::from_sigma(1.0, 1, 4096, 0.3).unwrap());
        let b = classify_regime(&MapParams::from_sigma(1.0, 1, 4096, -0.3).unwrap());
        assert_eq!(a.regime, b.regime);
        assert_abs_diff_eq!(a.predicted_rate.unwrap(), b.predicted_rate.unwrap(), epsilon = 1e-15);
    }

    #[test]
    fn custom_prefactor() {
        let p = MapParams::from_sigma(1.0, 1, 4096, 0.5).unwrap();
        let r = classify_regime_with(&p, 1.0);
        assert_abs_diff_eq!(r.predicted_rate.unwrap(), 0.25, epsilon = 1e-12);
    }
}
