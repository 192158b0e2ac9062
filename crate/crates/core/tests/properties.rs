use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use sawtooth_echo::analysis::{diffusion_coefficient, fit_exponential_rate, least_squares, WindowPolicy};
use sawtooth_echo::ensemble::{classical_diffusion_series, classical_fidelity_at, sample_strip};
use sawtooth_echo::maps::{
    wrap_angle, wrap_momentum, Basis, ClassicalPoint, Direction, MapParams, SawtoothMap, SawtoothPropagator,
    WaveFunction,
};
use sawtooth_echo::qecho::{quantum_fidelity_series, InitialCondition};
use sawtooth_echo::series::{linear_times, log_times};
use sawtooth_echo::{FidelitySeries, InitialDescriptor, SeriesKind, SeriesMeta};

fn random_state(dim: usize, seed: u64) -> WaveFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amps = (0..dim)
        .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    let mut psi = WaveFunction::from_bins(amps, Basis::Momentum).unwrap();
    psi.normalize();
    psi
}

proptest! {
    #[test]
    fn classical_inverse_undoes_step(
        theta in 0.0..TAU,
        p in -PI..PI,
        kick in 0.01f64..20.0,
        torus_len in 1u32..8,
    ) {
        let x = ClassicalPoint::new(theta, p * f64::from(torus_len), torus_len);
        let map = SawtoothMap::new(kick, torus_len);
        let back = map.step_inverse(map.step(x));
        let dp = wrap_momentum(back.p - x.p, torus_len);
        let dtheta = wrap_momentum(back.theta - x.theta, 1);
        prop_assert!(dp.abs() < 1e-12 * (1.0 + kick) * f64::from(torus_len));
        prop_assert!(dtheta.abs() < 1e-12 * (1.0 + kick));
    }

    #[test]
    fn wrapped_coordinates_stay_in_range(x in -1e6f64..1e6, torus_len in 1u32..100) {
        let theta = wrap_angle(x);
        prop_assert!((0.0..TAU).contains(&theta));
        let p = wrap_momentum(x, torus_len);
        let half = PI * f64::from(torus_len);
        prop_assert!(p >= -half && p < half);
    }

    #[test]
    fn basis_round_trip(seed in any::<u64>(), log_dim in 1u32..10) {
        let psi = random_state(1 << log_dim, seed);
        let back = psi.to_angle().to_momentum();
        prop_assert_eq!(back.basis(), Basis::Momentum);
        for (a, b) in psi.bins().iter().zip(back.bins()) {
            prop_assert!((a - b).norm() < 1e-12);
        }
        prop_assert!((psi.to_angle().norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fit_is_shift_equivariant(rate in 0.01f64..2.0, offset in -5.0f64..0.0, t0 in 1u32..20) {
        let values: Vec<f64> = (0..=40).map(|t| (offset - rate * t as f64).exp().min(1.0)).collect();
        let series = FidelitySeries::new(linear_times(40), values, meta(SeriesKind::Quantum, 0.0)).unwrap();
        let a = fit_exponential_rate(&series, &WindowPolicy::fixed(t0, t0 + 10)).unwrap();
        let b = fit_exponential_rate(&series, &WindowPolicy::fixed(t0 + 5, t0 + 15)).unwrap();
        prop_assert!((a.rate - rate).abs() < 1e-9);
        prop_assert!((a.rate - b.rate).abs() < 1e-9);
    }
}

fn meta(kind: SeriesKind, eps: f64) -> SeriesMeta {
    SeriesMeta {
        params: MapParams::new(1.0, 1, 64, eps).unwrap(),
        kind,
        initial: InitialDescriptor::Momentum { n: 0 },
    }
}

#[test]
fn noisy_exponential_recovers_rate() {
    let gamma = 0.3;
    let noise = Normal::new(0.0, 0.05).unwrap();
    for seed in 0..100 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values: Vec<f64> = (0..=20)
            .map(|t| ((-gamma * t as f64).exp() * (1.0 + noise.sample(&mut rng))).clamp(0.0, 1.0))
            .collect();
        let series = FidelitySeries::new(linear_times(20), values, meta(SeriesKind::Quantum, 0.1)).unwrap();
        let fit = fit_exponential_rate(&series, &WindowPolicy::fixed(1, 20)).unwrap();
        assert!((fit.rate - gamma).abs() < 0.02, "seed {seed}: {}", fit.rate);
    }
}

#[test]
fn long_evolution_stays_unitary() {
    let params = MapParams::new(1.7, 1, 256, 0.0).unwrap();
    let mut u = SawtoothPropagator::unperturbed(&params);
    let mut psi = random_state(256, 11);
    for t in 1..=10_000 {
        u.step(&mut psi, Direction::Forward).unwrap();
        if t % 1000 == 0 {
            assert!((psi.norm_sqr() - 1.0).abs() < 1e-8, "t={t}: {}", psi.norm_sqr());
        }
    }
}

#[test]
fn forward_then_backward_restores_state() {
    let params = MapParams::new(2.3, 1, 1 << 14, 0.0).unwrap();
    let mut u = SawtoothPropagator::unperturbed(&params);
    let psi0 = random_state(1 << 14, 5);
    let mut psi = psi0.clone();
    for _ in 0..100 {
        u.step(&mut psi, Direction::Forward).unwrap();
    }
    for _ in 0..100 {
        u.step(&mut psi, Direction::Backward).unwrap();
    }
    let err = psi0
        .bins()
        .iter()
        .zip(psi.bins())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    assert!(err < 1e-8, "{err}");
}

#[test]
fn unperturbed_quantum_echo_is_perfect() {
    let params = MapParams::new(1.0, 1, 4096, 0.0).unwrap();
    for init in [
        InitialCondition::SingleMomentum { n: 3 },
        InitialCondition::MomentumMixture { nu: 0.01 },
    ] {
        let s = quantum_fidelity_series(&init, &params, 200).unwrap();
        assert!(s.values.iter().all(|f| (f - 1.0).abs() < 1e-12));
    }
}

#[test]
fn diffusion_matches_random_phase_estimate() {
    for kick in [1.0, 2.0, 10.0] {
        let ens = sample_strip(1.0, 100_000, 17, 50).unwrap();
        let params = MapParams::new(kick, 50, 64, 0.0).unwrap();
        let msd = classical_diffusion_series(&ens, &params, 100).unwrap();
        let ts: Vec<f64> = (10..=100).map(f64::from).collect();
        let ys: Vec<f64> = (10..=100).map(|t| msd[t]).collect();
        let slope = least_squares(&ts, &ys).unwrap().slope;
        let ratio = slope / diffusion_coefficient(kick);
        assert!((ratio - 1.0).abs() < 0.15, "K={kick}: ratio {ratio}");
    }
}

#[test]
fn classical_plateau_is_strip_fraction() {
    let (nu, m) = (TAU / 1e3, 100_000);
    let ens = sample_strip(nu, m, 23, 1).unwrap();
    let params = MapParams::new(1.0, 1, 64, 1e-3).unwrap();
    let s = classical_fidelity_at(&ens, &params, &[40, 45, 50]).unwrap();
    let expected = nu / TAU;
    let tol = 3.0 * (expected * (1.0 - expected) / m as f64).sqrt();
    let mean = s.values.iter().sum::<f64>() / 3.0;
    assert!((mean - expected).abs() < tol, "{mean} vs {expected}");
}

#[test]
fn smaller_perturbation_delays_classical_decay() {
    let ens = sample_strip(TAU / 1e3, 50_000, 4, 1).unwrap();
    let times = log_times(20, 20);
    let strong = classical_fidelity_at(&ens, &MapParams::new(1.0, 1, 64, 1e-3).unwrap(), &times).unwrap();
    let weak = classical_fidelity_at(&ens, &MapParams::new(1.0, 1, 64, 1e-5).unwrap(), &times).unwrap();
    // Same decay shape, delayed by roughly ln(100)/λ ≈ 4.8 iterations.
    let crossing = |s: &FidelitySeries| s.iter().find(|&(_, f)| f < 0.1).map(|(t, _)| t).unwrap();
    let shift = crossing(&weak) as f64 - crossing(&strong) as f64;
    assert!((3.0..=7.0).contains(&shift), "shift {shift}");
}

#[test]
fn rate_is_even_in_perturbation() {
    let base = MapParams::from_sigma(1.0, 1, 2048, 0.3).unwrap();
    let flipped = MapParams::from_sigma(1.0, 1, 2048, -0.3).unwrap();
    let init = InitialCondition::SingleMomentum { n: 0 };
    let policy = WindowPolicy::default().with_saturation(1.0 / 2048.0);
    let a = fit_exponential_rate(&quantum_fidelity_series(&init, &base, 60).unwrap(), &policy).unwrap();
    let b = fit_exponential_rate(&quantum_fidelity_series(&init, &flipped, 60).unwrap(), &policy).unwrap();
    assert!(((a.rate - b.rate) / a.rate).abs() < 0.1, "{} vs {}", a.rate, b.rate);
}
