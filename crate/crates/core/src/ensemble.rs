//! Monte-Carlo ensembles for the classical echo.
//!
//! Points are drawn in fixed-size batches, each batch from its own ChaCha
//! stream keyed by `(seed, batch index)`. Ensembles and every quantity
//! derived from them are therefore identical for any number of worker
//! threads.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::maps::{wrap_angle, ClassicalPoint, MapParams, SawtoothMap};
use crate::series::{linear_times, FidelitySeries, InitialDescriptor, SeriesKind, SeriesMeta};

/// Points per RNG stream.
pub const SAMPLE_BATCH: usize = 4096;

/// Points per parallel work item when evolving an ensemble.
const EVOLVE_CHUNK: usize = 1024;

#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalEnsemble {
    points: Vec<ClassicalPoint>,
    nu: f64,
    seed: u64,
    torus_len: u32,
}

impl ClassicalEnsemble {
    pub fn points(&self) -> &[ClassicalPoint] {
        &self.points
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn torus_len(&self) -> u32 {
        self.torus_len
    }

    pub fn count(&self) -> usize {
        self.points.len()
    }

    /// Whether `p` lies in the initial strip `[−ν/2, ν/2)`.
    #[inline]
    pub fn in_strip(&self, p: f64) -> bool {
        let half = 0.5 * self.nu;
        (-half..half).contains(&p)
    }

    pub fn descriptor(&self) -> InitialDescriptor {
        InitialDescriptor::Strip {
            nu: self.nu,
            count: self.count(),
            seed: self.seed,
        }
    }
}

/// Samples `count` points uniformly in the strip `0 ≤ θ < 2π, −ν/2 ≤ p < ν/2`
/// on a torus of length `2πL`.
pub fn sample_strip(nu: f64, count: usize, seed: u64, torus_len: u32) -> Result<ClassicalEnsemble> {
    if !(nu > 0.0 && nu <= 2.0 * PI * f64::from(torus_len)) {
        return Err(Error::InvalidParameter {
            name: "nu",
            value: nu,
            reason: "strip height must lie in (0, 2πL]",
        });
    }
    if count == 0 {
        return Err(Error::InvalidParameter {
            name: "count",
            value: 0.0,
            reason: "ensemble needs at least one trajectory",
        });
    }
    let batches = count.div_ceil(SAMPLE_BATCH);
    let points = (0..batches)
        .into_par_iter()
        .flat_map_iter(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let len = SAMPLE_BATCH.min(count - b * SAMPLE_BATCH);
            (0..len)
                .map(|_| {
                    let theta = wrap_angle(TAU * rng.random::<f64>());
                    let p = nu * (rng.random::<f64>() - 0.5);
                    ClassicalPoint { theta, p }
                })
                .collect::<Vec<_>>()
        })
        .collect();
    Ok(ClassicalEnsemble {
        points,
        nu,
        seed,
        torus_len,
    })
}

fn check_params(ens: &ClassicalEnsemble, params: &MapParams) -> Result<()> {
    params.validate()?;
    if params.torus_len != ens.torus_len {
        return Err(Error::InvalidParameter {
            name: "L",
            value: f64::from(params.torus_len),
            reason: "ensemble was sampled on a different torus",
        });
    }
    Ok(())
}

/// Classical fidelity at every `t = 0..=t_max`.
pub fn classical_fidelity_series(ens: &ClassicalEnsemble, params: &MapParams, t_max: u32) -> Result<FidelitySeries> {
    if t_max < 1 {
        return Err(Error::InvalidParameter {
            name: "t_max",
            value: 0.0,
            reason: "need at least one iteration",
        });
    }
    classical_fidelity_at(ens, params, &linear_times(t_max))
}

/// Classical fidelity sampled at the given increasing times.
///
/// For each time `t` every trajectory runs `t` steps at `K₀`, then `t`
/// inverse steps at `K₀ + ε`; the fidelity is the fraction of trajectories
/// whose momentum lands back in the initial strip. The forward leg is shared
/// between times, only the reversal is recomputed.
pub fn classical_fidelity_at(ens: &ClassicalEnsemble, params: &MapParams, times: &[u32]) -> Result<FidelitySeries> {
    check_params(ens, params)?;
    if times.is_empty() || times.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter {
            name: "times",
            value: times.len() as f64,
            reason: "sampling times must be non-empty and strictly increasing",
        });
    }
    let forward = SawtoothMap::new(params.kick, params.torus_len);
    let backward = SawtoothMap::new(params.perturbed_kick(), params.torus_len);
    let t_last = *times.last().unwrap();

    let counts = ens
        .points
        .par_chunks(EVOLVE_CHUNK)
        .map(|chunk| {
            let mut counts = vec![0u64; times.len()];
            let mut trajectory = Vec::with_capacity(t_last as usize + 1);
            for &x0 in chunk {
                trajectory.clear();
                trajectory.push(x0);
                let mut x = x0;
                for _ in 0..t_last {
                    x = forward.step(x);
                    trajectory.push(x);
                }
                for (slot, &t) in counts.iter_mut().zip(times) {
                    let y = backward.iterate_inverse(trajectory[t as usize], t);
                    if ens.in_strip(y.p) {
                        *slot += 1;
                    }
                }
            }
            counts
        })
        .reduce(
            || vec![0u64; times.len()],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );

    let m = ens.count() as f64;
    let values = counts.into_iter().map(|c| c as f64 / m).collect();
    FidelitySeries::new(
        times.to_vec(),
        values,
        SeriesMeta {
            params: *params,
            kind: SeriesKind::Classical,
            initial: ens.descriptor(),
        },
    )
}

/// Mean squared momentum displacement `⟨(p(t) − p(0))²⟩` for `t = 0..=t_max`
/// under the unperturbed map.
///
/// Momentum is followed on the cylinder (never wrapped); the angle update is
/// unaffected because `2πL` is a multiple of `2π`.
pub fn classical_diffusion_series(ens: &ClassicalEnsemble, params: &MapParams, t_max: u32) -> Result<Vec<f64>> {
    check_params(ens, params)?;
    let kick = params.kick;
    let len = t_max as usize + 1;
    // Fixed chunking plus an ordered sequential merge keeps the float sums
    // independent of scheduling.
    let partials: Vec<Vec<f64>> = ens
        .points
        .par_chunks(EVOLVE_CHUNK)
        .map(|chunk| {
            let mut sums = vec![0.0; len];
            for x0 in chunk {
                let (mut theta, mut p) = (x0.theta, x0.p);
                for slot in sums.iter_mut().skip(1) {
                    p += kick * (theta - PI);
                    theta = wrap_angle(theta + p);
                    let d = p - x0.p;
                    *slot += d * d;
                }
            }
            sums
        })
        .collect();
    let mut total = vec![0.0; len];
    for part in partials {
        total.iter_mut().zip(part).for_each(|(a, b)| *a += b);
    }
    let m = ens.count() as f64;
    Ok(total.into_iter().map(|s| s / m).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strip_points_are_inside() {
        let nu = TAU / 1e4;
        let ens = sample_strip(nu, 100_000, 1, 1).unwrap();
        assert_eq!(ens.count(), 100_000);
        for pt in ens.points() {
            assert!(pt.p.abs() < PI / 1e4);
            assert!((0.0..TAU).contains(&pt.theta));
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let a = sample_strip(0.1, 10_000, 99, 1).unwrap();
        let b = sample_strip(0.1, 10_000, 99, 1).unwrap();
        assert_eq!(a, b);
        let c = sample_strip(0.1, 10_000, 100, 1).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn sample_mean_within_standard_error() {
        let nu = 0.5;
        let m = 200_000;
        let ens = sample_strip(nu, m, 7, 1).unwrap();
        let mean = ens.points().iter().map(|x| x.p).sum::<f64>() / m as f64;
        // Uniform on an interval of width ν has standard deviation ν/√12.
        assert!(mean.abs() < 3.0 * nu / (12.0 * m as f64).sqrt(), "mean = {mean}");
        let mean_theta = ens.points().iter().map(|x| x.theta).sum::<f64>() / m as f64;
        assert!((mean_theta - PI).abs() < 3.0 * TAU / (12.0 * m as f64).sqrt());
    }

    #[test]
    fn rejects_bad_strip() {
        assert!(sample_strip(0.0, 10, 0, 1).is_err());
        assert!(sample_strip(TAU + 1e-9, 10, 0, 1).is_err());
        assert!(sample_strip(TAU, 10, 0, 1).is_ok());
        assert!(sample_strip(0.1, 0, 0, 1).is_err());
    }

    #[test]
    fn unperturbed_echo_returns_everything() {
        let ens = sample_strip(TAU / 1e3, 20_000, 5, 1).unwrap();
        let params = MapParams::new(1.0, 1, 1024, 0.0).unwrap();
        let series = classical_fidelity_series(&ens, &params, 20).unwrap();
        assert_eq!(series.values[0], 1.0);
        assert!(series.values.iter().all(|&f| f > 0.999), "{:?}", series.values);
    }

    #[test]
    fn sparse_times_match_dense_series() {
        let ens = sample_strip(TAU / 1e3, 5_000, 2, 1).unwrap();
        let params = MapParams::new(1.0, 1, 1024, 1e-3).unwrap();
        let dense = classical_fidelity_series(&ens, &params, 12).unwrap();
        let sparse = classical_fidelity_at(&ens, &params, &[0, 3, 7, 12]).unwrap();
        for (t, f) in sparse.iter() {
            assert_eq!(dense.at(t), Some(f));
        }
    }

    #[test]
    fn diffusion_starts_at_zero() {
        let ens = sample_strip(1.0, 1000, 0, 50).unwrap();
        let params = MapParams::new(1.0, 50, 1024, 0.0).unwrap();
        let d = classical_diffusion_series(&ens, &params, 10).unwrap();
        assert_eq!(d.len(), 11);
        assert_eq!(d[0], 0.0);
        assert!(d.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn torus_mismatch_is_rejected() {
        let ens = sample_strip(1.0, 10, 0, 1).unwrap();
        let params = MapParams::new(1.0, 2, 64, 0.0).unwrap();
        assert!(classical_fidelity_series(&ens, &params, 5).is_err());
        assert!(classical_diffusion_series(&ens, &params, 5).is_err());
    }
}
