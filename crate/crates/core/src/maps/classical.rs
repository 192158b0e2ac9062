//! Classical sawtooth map on the torus `[0, 2π) × [−πL, πL)`.
//!
//! One iteration in rescaled momentum `p = Tn` reads
//!
//! ```text
//!     p̄ = p + K(θ − π)
//!     θ̄ = θ + p̄
//! ```
//!
//! with both coordinates wrapped back onto the torus.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

/// A phase-space point. Angle in `[0, 2π)`, momentum in `[−πL, πL)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalPoint {
    pub theta: f64,
    pub p: f64,
}

impl ClassicalPoint {
    /// Builds a point, wrapping both coordinates onto the torus of length `2πL`.
    pub fn new(theta: f64, p: f64, torus_len: u32) -> Self {
        Self {
            theta: wrap_angle(theta),
            p: wrap_momentum(p, torus_len),
        }
    }
}

/// Wraps into `[0, period)`. `rem_euclid` can round up to `period` itself for
/// tiny negative inputs, which is folded back to zero.
#[inline]
fn wrap_periodic(x: f64, period: f64) -> f64 {
    let r = x.rem_euclid(period);
    if r >= period {
        0.0
    } else {
        r
    }
}

#[inline]
pub fn wrap_angle(theta: f64) -> f64 {
    wrap_periodic(theta, TAU)
}

/// Wraps momentum into the centered interval `[−πL, πL)`.
#[inline]
pub fn wrap_momentum(p: f64, torus_len: u32) -> f64 {
    let half = PI * f64::from(torus_len);
    let r = wrap_periodic(p + half, 2.0 * half) - half;
    // `r + half` may round to 2·half when r sits just below the upper edge.
    if r >= half {
        -half
    } else {
        r
    }
}

/// The sawtooth map at a fixed kick strength on a torus of length `2πL`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SawtoothMap {
    pub kick: f64,
    pub torus_len: u32,
}

impl SawtoothMap {
    pub fn new(kick: f64, torus_len: u32) -> Self {
        Self { kick, torus_len }
    }

    #[inline]
    pub fn step(&self, pt: ClassicalPoint) -> ClassicalPoint {
        let p = wrap_momentum(pt.p + self.kick * (pt.theta - PI), self.torus_len);
        let theta = wrap_angle(pt.theta + p);
        ClassicalPoint { theta, p }
    }

    #[inline]
    pub fn step_inverse(&self, pt: ClassicalPoint) -> ClassicalPoint {
        let theta = wrap_angle(pt.theta - pt.p);
        let p = wrap_momentum(pt.p - self.kick * (theta - PI), self.torus_len);
        ClassicalPoint { theta, p }
    }

    pub fn iterate(&self, mut pt: ClassicalPoint, steps: u32) -> ClassicalPoint {
        for _ in 0..steps {
            pt = self.step(pt);
        }
        pt
    }

    pub fn iterate_inverse(&self, mut pt: ClassicalPoint, steps: u32) -> ClassicalPoint {
        for _ in 0..steps {
            pt = self.step_inverse(pt);
        }
        pt
    }
}

pub fn classical_step(pt: ClassicalPoint, kick: f64, torus_len: u32) -> ClassicalPoint {
    SawtoothMap::new(kick, torus_len).step(pt)
}

pub fn classical_step_inverse(pt: ClassicalPoint, kick: f64, torus_len: u32) -> ClassicalPoint {
    SawtoothMap::new(kick, torus_len).step_inverse(pt)
}

/// Jacobian of one map step acting on `(δp, δθ)`.
///
/// The sawtooth force is linear between its discontinuities, so the matrix
/// is the same at every point of the orbit.
pub fn tangent_matrix(kick: f64) -> [[f64; 2]; 2] {
    [[1.0, kick], [1.0, 1.0 + kick]]
}
