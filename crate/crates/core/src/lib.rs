//! Classical and quantum sawtooth maps and the Loschmidt-echo fidelity.
//!
//! * [`maps`]: parameters, classical map steps, split-operator quantum step.
//! * [`ensemble`]: strip-sampled Monte-Carlo ensembles and the classical echo.
//! * [`qecho`]: quantum fidelity for momentum eigenstates and their mixtures.
//! * [`analysis`]: Lyapunov and diffusion constants, perturbation borders,
//!   decay fits and regime classification.

pub mod analysis;
pub mod ensemble;
pub mod error;
pub mod maps;
pub mod qecho;
pub mod series;

pub use error::{Error, Result};
pub use maps::MapParams;
pub use series::{FidelitySeries, InitialDescriptor, SeriesKind, SeriesMeta};
