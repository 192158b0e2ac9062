//! Parameters and single steps of the classical and quantum sawtooth maps.

mod classical;
mod params;
mod quantum;

pub use classical::{
    classical_step, classical_step_inverse, tangent_matrix, wrap_angle, wrap_momentum, ClassicalPoint, SawtoothMap,
};
pub use params::MapParams;
pub use quantum::{
    bin_of, free_phases, kick_phases, momentum_eigenstate, momentum_of, quantum_step, Basis, Direction, Fourier,
    SawtoothPropagator, WaveFunction, NORM_TOLERANCE,
};
