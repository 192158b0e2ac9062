//! Closed-form rates and borders, decay fitting and regime classification.

mod fit;
mod physics;
mod regime;

pub use fit::{
    fit_exponential_rate, fit_power_law, least_squares, resolve_window, FitKind, FitResult, LinearFit, WindowPolicy,
};
pub use physics::{
    borders, diffusion_coefficient, fgr_rate, lyapunov, sigma_from_eps, transient_time, Borders, CRITICAL_SIGMA,
    FGR_CONSTANT,
};
pub use regime::{classify_regime, classify_regime_with, Regime, RegimeReport};
