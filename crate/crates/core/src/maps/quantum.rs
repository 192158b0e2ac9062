//! Quantum sawtooth map as a split-operator Floquet propagator.
//!
//! Amplitudes are stored in transform-bin order: momentum `n` lives at index
//! `n mod N`, so the free rotation and the FFT share one layout. Angle-basis
//! amplitudes live on the grid `θ_j = 2πj/N` and are related to momentum
//! amplitudes by
//!
//! ```text
//!     ψ(θ_j) = N^{-1/2} Σ_n ψ_n e^{i n θ_j}
//! ```

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::maps::MapParams;

/// Tolerance on `‖ψ‖² − 1` accepted by the propagator entry points.
pub const NORM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    Momentum,
    Angle,
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Basis::Momentum => f.write_str("momentum"),
            Basis::Angle => f.write_str("angle"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    amps: Vec<Complex64>,
    basis: Basis,
}

/// Transform bin holding signed momentum `n`.
#[inline]
pub fn bin_of(n: i64, dim: usize) -> usize {
    n.rem_euclid(dim as i64) as usize
}

/// Signed momentum stored in transform bin `bin`.
#[inline]
pub fn momentum_of(bin: usize, dim: usize) -> i64 {
    if bin < dim / 2 {
        bin as i64
    } else {
        bin as i64 - dim as i64
    }
}

impl WaveFunction {
    /// Wraps amplitudes given in transform-bin order.
    pub fn from_bins(amps: Vec<Complex64>, basis: Basis) -> Result<Self> {
        if amps.len() < 2 || !amps.len().is_multiple_of(2) {
            return Err(Error::InvalidParameter {
                name: "N",
                value: amps.len() as f64,
                reason: "dimension must be a positive even integer",
            });
        }
        Ok(Self { amps, basis })
    }

    /// Builds a momentum-basis state from amplitudes ordered `n = −N/2, …, N/2 − 1`.
    pub fn from_signed(ordered: &[Complex64]) -> Result<Self> {
        let dim = ordered.len();
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        for (i, &a) in ordered.iter().enumerate() {
            let n = i as i64 - (dim / 2) as i64;
            amps[bin_of(n, dim)] = a;
        }
        Self::from_bins(amps, Basis::Momentum)
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    /// Amplitudes in transform-bin order.
    pub fn bins(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn bins_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    /// Amplitude of momentum `n`, for momentum-basis states.
    pub fn amplitude(&self, n: i64) -> Result<Complex64> {
        if self.basis != Basis::Momentum {
            return Err(Error::WrongBasis { expected: "momentum" });
        }
        check_momentum(n, self.dim())?;
        Ok(self.amps[bin_of(n, self.dim())])
    }

    /// Amplitudes ordered `n = −N/2, …, N/2 − 1`.
    pub fn to_signed(&self) -> Vec<Complex64> {
        let dim = self.dim();
        (0..dim)
            .map(|i| self.amps[bin_of(i as i64 - (dim / 2) as i64, dim)])
            .collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) {
        let scale = 1.0 / self.norm_sqr().sqrt();
        self.amps.iter_mut().for_each(|a| *a *= scale);
    }

    pub fn to_angle(&self) -> WaveFunction {
        let mut out = self.clone();
        if out.basis == Basis::Momentum {
            Fourier::new(self.dim()).momentum_to_angle(&mut out.amps);
            out.basis = Basis::Angle;
        }
        out
    }

    pub fn to_momentum(&self) -> WaveFunction {
        let mut out = self.clone();
        if out.basis == Basis::Angle {
            Fourier::new(self.dim()).angle_to_momentum(&mut out.amps);
            out.basis = Basis::Momentum;
        }
        out
    }
}

fn check_momentum(n: i64, dim: usize) -> Result<()> {
    let half = (dim / 2) as i64;
    if n < -half || n >= half {
        return Err(Error::MomentumOutOfRange { n, half });
    }
    Ok(())
}

/// The momentum eigenstate `|n⟩` on a grid of `dim` states.
pub fn momentum_eigenstate(n: i64, dim: usize) -> Result<WaveFunction> {
    if dim < 2 || !dim.is_multiple_of(2) {
        return Err(Error::InvalidParameter {
            name: "N",
            value: dim as f64,
            reason: "dimension must be a positive even integer",
        });
    }
    check_momentum(n, dim)?;
    let mut amps = vec![Complex64::new(0.0, 0.0); dim];
    amps[bin_of(n, dim)] = Complex64::new(1.0, 0.0);
    WaveFunction::from_bins(amps, Basis::Momentum)
}

/// Planned forward/inverse FFT pair with unitary scaling.
#[derive(Clone)]
pub struct Fourier {
    dim: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
}

impl Fourier {
    pub fn new(dim: usize) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(dim);
        let inverse = planner.plan_fft_inverse(dim);
        let scratch_len = forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len());
        Self {
            dim,
            forward,
            inverse,
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
        }
    }

    /// Unnormalized `Σ_n a_n e^{+i n θ_j}`.
    fn angle_raw(&mut self, amps: &mut [Complex64]) {
        self.inverse.process_with_scratch(amps, &mut self.scratch);
    }

    /// Unnormalized `Σ_j a_j e^{−i n θ_j}`.
    fn momentum_raw(&mut self, amps: &mut [Complex64]) {
        self.forward.process_with_scratch(amps, &mut self.scratch);
    }

    pub fn momentum_to_angle(&mut self, amps: &mut [Complex64]) {
        self.angle_raw(amps);
        let scale = 1.0 / (self.dim as f64).sqrt();
        amps.iter_mut().for_each(|a| *a *= scale);
    }

    pub fn angle_to_momentum(&mut self, amps: &mut [Complex64]) {
        self.momentum_raw(amps);
        let scale = 1.0 / (self.dim as f64).sqrt();
        amps.iter_mut().for_each(|a| *a *= scale);
    }
}

/// Kick phases `e^{i k (θ_j − π)²/2}` on the angle grid.
pub fn kick_phases(dim: usize, kick: f64) -> Vec<Complex64> {
    (0..dim)
        .map(|j| {
            let x = 2.0 * PI * j as f64 / dim as f64 - PI;
            Complex64::from_polar(1.0, 0.5 * kick * x * x)
        })
        .collect()
}

/// Free-rotation phases `e^{−i T n²/2}` in transform-bin order.
pub fn free_phases(dim: usize, planck_step: f64) -> Vec<Complex64> {
    (0..dim)
        .map(|bin| {
            let n = momentum_of(bin, dim) as f64;
            Complex64::from_polar(1.0, -0.5 * planck_step * n * n)
        })
        .collect()
}

/// One-period propagator `Û = e^{−iTn̂²/2} e^{ik(θ̂−π)²/2}` with its FFT plans.
///
/// Phases are tabulated once; the backward step multiplies by their
/// conjugates, so `Û†Û` is the identity up to FFT roundoff. Clones share the
/// phase tables and plans and only own their FFT scratch.
#[derive(Clone)]
pub struct SawtoothPropagator {
    kick: Arc<[Complex64]>,
    free: Arc<[Complex64]>,
    fourier: Fourier,
    inv_dim: f64,
}

impl SawtoothPropagator {
    pub fn new(dim: usize, kick: f64, planck_step: f64) -> Self {
        Self {
            kick: kick_phases(dim, kick).into(),
            free: free_phases(dim, planck_step).into(),
            fourier: Fourier::new(dim),
            inv_dim: 1.0 / dim as f64,
        }
    }

    /// Unperturbed propagator with kick k₀.
    pub fn unperturbed(params: &MapParams) -> Self {
        Self::new(params.dim, params.quantum_kick(), params.planck_step())
    }

    /// Perturbed propagator with kick k₀ + σ.
    pub fn perturbed(params: &MapParams) -> Self {
        Self::new(params.dim, params.perturbed_quantum_kick(), params.planck_step())
    }

    pub fn dim(&self) -> usize {
        self.free.len()
    }

    /// Applies one step to momentum-basis amplitudes in bin order.
    ///
    /// Callers are responsible for the length and basis; [`Self::step`]
    /// checks them.
    pub fn apply(&mut self, amps: &mut [Complex64], direction: Direction) {
        debug_assert_eq!(amps.len(), self.dim());
        // The two unnormalized transforms together contribute a factor N,
        // removed once (exactly, for power-of-two N).
        match direction {
            Direction::Forward => {
                self.fourier.angle_raw(amps);
                amps.iter_mut().zip(self.kick.iter()).for_each(|(a, k)| *a *= k);
                self.fourier.momentum_raw(amps);
                let s = self.inv_dim;
                amps.iter_mut().zip(self.free.iter()).for_each(|(a, f)| *a *= f * s);
            }
            Direction::Backward => {
                amps.iter_mut().zip(self.free.iter()).for_each(|(a, f)| *a *= f.conj());
                self.fourier.angle_raw(amps);
                amps.iter_mut().zip(self.kick.iter()).for_each(|(a, k)| *a *= k.conj());
                self.fourier.momentum_raw(amps);
                let s = self.inv_dim;
                amps.iter_mut().for_each(|a| *a *= s);
            }
        }
    }

    /// Validated single step on a wave function.
    pub fn step(&mut self, psi: &mut WaveFunction, direction: Direction) -> Result<()> {
        if psi.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: psi.dim(),
            });
        }
        if psi.basis() != Basis::Momentum {
            return Err(Error::WrongBasis { expected: "momentum" });
        }
        self.apply(psi.bins_mut(), direction);
        Ok(())
    }
}

/// One step of the quantum sawtooth map with kick `kick` and Planck cell
/// `planck_step`, applied to a normalized momentum-basis state.
pub fn quantum_step(psi: &WaveFunction, kick: f64, planck_step: f64, direction: Direction) -> Result<WaveFunction> {
    let norm_sqr = psi.norm_sqr();
    if (norm_sqr - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::NotNormalized { norm_sqr });
    }
    let mut prop = SawtoothPropagator::new(psi.dim(), kick, planck_step);
    let mut out = psi.clone();
    prop.step(&mut out, direction)?;
    Ok(out)
}
