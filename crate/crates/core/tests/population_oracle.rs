//! Brute-force oracles for the thermal population sum and its truncation.

use ionfringe_core::population::{
    choose_truncation, flop_probability, thermal_population, ThermalState,
};
use ionfringe_core::specfun::bessel_j0;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Direct high-truncation evaluation of the thermal sum, weights computed
/// from the closed form at each n rather than incrementally.
fn brute_force_population(
    nbar: f64,
    coupling: impl Fn(u32) -> f64,
    kappa: f64,
    t: f64,
    n_max: u32,
) -> f64 {
    let j0 = bessel_j0(kappa).unwrap();
    let r = nbar / (nbar + 1.0);
    (0..=n_max)
        .map(|n| {
            let weight = r.powi(n as i32) / (nbar + 1.0);
            let s = (0.25 * coupling(n) * j0 * t).sin();
            weight * s * s
        })
        .sum()
}

/// 10(nbar+1)+100, grown where necessary so the reference's own geometric
/// tail is below 1e-10 and the comparison really measures the implementation.
fn oversized_n_max(nbar: f64) -> u32 {
    let formula = 10 * (nbar as u32 + 1) + 100;
    if nbar == 0.0 {
        return formula;
    }
    let r = nbar / (nbar + 1.0);
    let mut needed = 0u32;
    let mut tail = 1.0;
    while tail >= 1e-10 {
        tail *= r;
        needed += 1;
    }
    formula.max(needed)
}

#[test]
fn thermal_sum_matches_oversized_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7e31);
    for case in 0..100 {
        // include the paper's fitted nbar = 18 as the first case
        let nbar = if case == 0 { 18.0 } else { rng.random::<f64>() * 30.0 };
        let omega = 1e4 + rng.random::<f64>() * 1e6;
        let slope = (rng.random::<f64>() - 0.5) * 2e-3;
        let kappa = rng.random::<f64>() * 3.0;
        let t = rng.random::<f64>() * 40e-6;
        // carrier-like Debye-Waller dependence on n
        let coupling = |n: u32| omega * (1.0 - slope * (1.0 + 2.0 * n as f64));

        let state = ThermalState::with_tolerance(nbar, 1e-9).unwrap();
        let fast = thermal_population(&state, coupling, kappa, t);
        let slow = brute_force_population(nbar, coupling, kappa, t, oversized_n_max(nbar));
        assert!(
            (fast - slow).abs() <= 1e-8,
            "case {case}: nbar={nbar:.3} diff={:e}",
            fast - slow
        );
    }
}

#[test]
fn truncation_examples_verified_by_direct_summation() {
    // smallest n_max whose tail (after direct accumulation) is < epsilon
    let direct = |nbar: f64, eps: f64| -> u32 {
        if nbar == 0.0 {
            return 0;
        }
        let r = nbar / (nbar + 1.0);
        let mut mass = 0.0;
        let mut weight = 1.0 / (nbar + 1.0);
        for n in 0..100_000u32 {
            mass += weight;
            if 1.0 - mass < eps {
                return n;
            }
            weight *= r;
        }
        unreachable!("tail never dropped below epsilon");
    };
    for (nbar, eps) in [(18.0, 1e-6), (1.0, 0.5), (18.0, 1e-9), (0.0, 1e-9), (7.3, 1e-4)] {
        assert_eq!(
            choose_truncation(nbar, eps),
            direct(nbar, eps),
            "nbar={nbar} eps={eps}"
        );
    }
    // the closed-form geometric tail puts (18/19)^{n+1} below 1e-6 at 255
    assert_eq!(choose_truncation(18.0, 1e-6), 255);
}

#[test]
fn convergence_against_growing_truncation_stays_within_tail_bound() {
    let nbar = 18.0;
    let coupling = |n: u32| 2.5e5 * (1.0 - 8e-4 * (1.0 + 2.0 * n as f64));
    let reference = brute_force_population(nbar, coupling, 0.7, 13e-6, 5000);
    // epsilon above 1e-6 would violate the ThermalState mass invariant
    for eps in [1e-6, 1e-8, 1e-9, 1e-11] {
        let state = ThermalState::with_tolerance(nbar, eps).unwrap();
        let p = thermal_population(&state, coupling, 0.7, 13e-6);
        assert!(
            (p - reference).abs() <= eps + 1e-12,
            "eps={eps}: diff {:e}",
            (p - reference).abs()
        );
    }
}

#[test]
fn first_carrier_maximum_at_quarter_convention_time() {
    // first maximum of sin^2(Omega J0 t / 4) sits at t = 2 pi / (Omega J0)
    let omega = 3.3e5;
    let kappa = 0.9;
    let j0 = bessel_j0(kappa).unwrap();
    let t_star = std::f64::consts::TAU / (omega * j0);
    assert!((flop_probability(omega, kappa, t_star) - 1.0).abs() < 1e-12);
    for frac in [0.1, 0.35, 0.6, 0.85, 0.99] {
        let p = flop_probability(omega, kappa, frac * t_star);
        assert!(p < 1.0 - 1e-6, "strictly below the first maximum at {frac}");
    }
    // and it is the first: the probability rises monotonically up to t*
    let mut prev = -1.0;
    for i in 0..=100 {
        let p = flop_probability(omega, kappa, t_star * i as f64 / 100.0);
        assert!(p >= prev - 1e-12);
        prev = p;
    }
}
