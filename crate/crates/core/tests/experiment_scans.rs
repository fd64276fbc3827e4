//! Scan-level structure tests: fringe interleaving, the shared micromotion
//! envelope zeros, node/antinode power response and the model's phase-shift
//! symmetries.

use ionfringe_core::constants::{ATOMIC_MASS, ELEMENTARY_CHARGE};
use ionfringe_core::coupling::{MicromotionConfig, MotionalMode};
use ionfringe_core::experiment::{
    simulate_scan, suppression_db, FitParameterSet, ScanContext, ScanKind, ScanSpec, Transition,
};
use ionfringe_core::peaks::{alternates, find_local_maxima};
use ionfringe_core::population::{PulseSpec, RabiConvention};
use ionfringe_core::specfun::bessel_j0;
use std::f64::consts::TAU;

fn paper_context() -> ScanContext {
    ScanContext {
        wavelength: 729e-9,
        theta: 13f64.to_radians(),
        phi: 0.0,
        mode: MotionalMode::new(TAU * 4.75e6, 40.0 * ATOMIC_MASS).unwrap(),
        micromotion: MicromotionConfig::new(TAU * 50e6, 0.0, ELEMENTARY_CHARGE).unwrap(),
        beta_compensated: true,
        ex_over_ey: 0.15,
        convention: RabiConvention::Quarter,
        truncation_epsilon: 1e-9,
        seed: 0,
    }
}

fn paper_params() -> FitParameterSet {
    FitParameterSet {
        a: [2.19e-7, 2.7375e-6, 5e-8, 0.0, 0.0],
        m: [0.85, 0.02, 0.005],
        omega1: 1.25e6,
        omega2: 0.52 * 1.25e6,
        alpha: 18f64.to_radians(),
        nbar: 18.0,
    }
}

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn ey_spec(transition: Transition, offset_db: f64, points: usize) -> ScanSpec {
    ScanSpec {
        kind: ScanKind::EyScan,
        transition,
        grid: grid(-2.5, 2.5, points),
        pulse: PulseSpec { duration: 13e-6 },
        power_offset_db: offset_db,
        shots: 0,
        fixed_ey: 0.0,
    }
}

/// Peak x-positions restricted to the contiguous index run `lo..=hi`.
fn peaks_in_run(xs: &[f64], ys: &[f64], lo: usize, hi: usize) -> Vec<f64> {
    find_local_maxima(&xs[lo..=hi], &ys[lo..=hi])
        .into_iter()
        .map(|p| p.x)
        .collect()
}

#[test]
fn paper_configuration_fringes_interleave() {
    let ctx = paper_context();
    let params = paper_params();
    let carrier = simulate_scan(&ctx, &params, &ey_spec(Transition::Carrier, -13.5, 1201)).unwrap();
    let sideband =
        simulate_scan(&ctx, &params, &ey_spec(Transition::RedSideband, -4.0, 1201)).unwrap();

    // restrict to where the micromotion envelope is alive
    let map = params.displacement_map();
    let mask: Vec<bool> = carrier
        .abscissa
        .iter()
        .map(|&ey| bessel_j0(map.kappa_at(ey).unwrap()).unwrap().abs() > 0.1)
        .collect();

    // contiguous mask runs
    let mut runs: Vec<(usize, usize)> = Vec::new();
    let mut start: Option<usize> = None;
    for (i, &ok) in mask.iter().enumerate() {
        match (ok, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                runs.push((s, i - 1));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        runs.push((s, mask.len() - 1));
    }
    assert!(!runs.is_empty());

    let mut checked_fringes = 0;
    for (lo, hi) in runs {
        if hi - lo < 20 {
            continue;
        }
        let car = peaks_in_run(&carrier.abscissa, &carrier.population, lo, hi);
        let side = peaks_in_run(&sideband.abscissa, &sideband.population, lo, hi);
        if car.len() < 2 || side.len() < 2 {
            continue;
        }
        assert!(
            alternates(&car, &side),
            "fringe maxima fail to interleave on run {lo}..{hi}"
        );
        // every interior carrier maximum sits between two sideband maxima
        for c in car.iter().filter(|&&c| c > side[0] && c < side[side.len() - 1]) {
            let below = side.iter().filter(|&&s| s < *c).cloned().fold(f64::MIN, f64::max);
            let above = side.iter().filter(|&&s| s > *c).cloned().fold(f64::MAX, f64::min);
            assert!(below < *c && *c < above);
            checked_fringes += 1;
        }
    }
    assert!(checked_fringes > 10, "only {checked_fringes} fringes checked");
}

#[test]
fn micromotion_envelope_zeros_are_shared() {
    let ctx = paper_context();
    let mut params = paper_params();
    // kappa = |E_y| * root/2: the envelope dies exactly at E_y = +-2
    let root = 2.404825557695773f64;
    params.m = [(root / 2.0) * (root / 2.0), 0.0, 0.0];
    let spec_c = ScanSpec {
        grid: grid(-2.5, 2.5, 101), // includes +-2.0 exactly
        ..ey_spec(Transition::Carrier, -13.5, 101)
    };
    let spec_s = ScanSpec {
        grid: spec_c.grid.clone(),
        ..ey_spec(Transition::RedSideband, -4.0, 101)
    };
    let carrier = simulate_scan(&ctx, &params, &spec_c).unwrap();
    let sideband = simulate_scan(&ctx, &params, &spec_s).unwrap();
    for (i, &ey) in carrier.abscissa.iter().enumerate() {
        if ey.abs() == 2.0 {
            assert!(carrier.population[i] < 1e-6, "carrier at {ey}: {}", carrier.population[i]);
            assert!(sideband.population[i] < 1e-6, "sideband at {ey}: {}", sideband.population[i]);
        }
    }
    // and the curves are alive elsewhere
    assert!(carrier.population.iter().cloned().fold(0.0f64, f64::max) > 0.2);
    assert!(sideband.population.iter().cloned().fold(0.0f64, f64::max) > 0.05);
}

/// First local maximum of a power scan, refined; None when the curve has no
/// interior maximum.
fn first_max_db(ctx: &ScanContext, params: &FitParameterSet, fixed_ey: f64) -> Option<f64> {
    let spec = ScanSpec {
        kind: ScanKind::PowerScan,
        transition: Transition::Carrier,
        grid: grid(-25.0, 5.0, 1501),
        pulse: PulseSpec { duration: 13e-6 },
        power_offset_db: 0.0,
        shots: 0,
        fixed_ey,
    };
    let result = simulate_scan(ctx, params, &spec).unwrap();
    find_local_maxima(&result.abscissa, &result.population)
        .first()
        .map(|p| p.x)
}

#[test]
fn node_antinode_power_gap_equals_suppression() {
    let ctx = paper_context();
    // cold ion: no thermal smearing, the gap matches the amplitude ratio to
    // grid resolution
    let mut params = paper_params();
    params.nbar = 1e-6;
    params.m = [1e-4, 0.0, 0.0]; // essentially flat envelope near the null
    // place an exact node at E_y = -0.08: gamma(-0.08) = 0
    params.a[2] = 0.0;
    params.a[0] = 0.08 * params.a[1];
    let k_cos = TAU / ctx.wavelength * params.alpha.cos();
    let quarter = (std::f64::consts::FRAC_PI_2) / (k_cos * params.a[1]);
    let node = -0.08;
    let antinode = node + quarter;

    let p_node = first_max_db(&ctx, &params, node).expect("node curve has a maximum");
    let p_anti = first_max_db(&ctx, &params, antinode).expect("antinode curve has a maximum");
    // the carrier couples strongest on the node, so the antinode curve needs
    // strictly more power to reach its first maximum
    assert!(p_anti > p_node);
    let suppression = suppression_db(&ctx, &params, Transition::Carrier).unwrap();
    let resolution = 30.0 / 1500.0;
    assert!(
        ((p_anti - p_node) - suppression).abs() <= 2.0 * resolution,
        "gap {} vs suppression {suppression}",
        p_anti - p_node
    );

    // at the paper's nbar = 18 the thermal mixture smears the first maximum
    // slightly away from the representative-n arithmetic
    let mut hot = params;
    hot.nbar = 18.0;
    let p_node = first_max_db(&ctx, &hot, node).unwrap();
    let p_anti = first_max_db(&ctx, &hot, antinode).unwrap();
    let suppression = suppression_db(&ctx, &hot, Transition::Carrier).unwrap();
    assert!(
        ((p_anti - p_node) - suppression).abs() <= 0.15,
        "hot gap {} vs suppression {suppression}",
        p_anti - p_node
    );
}

#[test]
fn full_fringe_period_shift_leaves_populations_unchanged() {
    let ctx = paper_context();
    let params = paper_params();
    let spec = ey_spec(Transition::Carrier, -13.5, 301);
    let base = simulate_scan(&ctx, &params, &spec).unwrap();
    let mut shifted = params;
    shifted.a[0] += ctx.wavelength / params.alpha.cos(); // gamma -> gamma + 2 pi
    let moved = simulate_scan(&ctx, &shifted, &spec).unwrap();
    for (p, q) in base.population.iter().zip(&moved.population) {
        assert!((p - q).abs() < 1e-11, "{p} vs {q}");
    }
    // the half-period shift (gamma -> gamma + pi) flips both interference
    // terms at once and is also a symmetry of every magnitude
    let mut half = params;
    half.a[0] += ctx.wavelength / (2.0 * params.alpha.cos());
    let moved = simulate_scan(&ctx, &half, &spec).unwrap();
    for (p, q) in base.population.iter().zip(&moved.population) {
        assert!((p - q).abs() < 1e-11, "{p} vs {q}");
    }
}

#[test]
fn joint_angle_flip_is_an_exact_symmetry() {
    // eta_j and gamma depend on (alpha, theta) only through sin*sin and
    // cos*cos, so flipping both signs changes nothing
    let mut ctx = paper_context();
    let params = paper_params();
    let spec = ey_spec(Transition::RedSideband, -4.0, 101);
    let base = simulate_scan(&ctx, &params, &spec).unwrap();
    ctx.theta = -ctx.theta;
    let mut flipped_params = params;
    flipped_params.alpha = -params.alpha;
    let flipped = simulate_scan(&ctx, &flipped_params, &spec).unwrap();
    for (p, q) in base.population.iter().zip(&flipped.population) {
        assert!((p - q).abs() <= 1e-13 * p.max(1e-3), "{p} vs {q}");
    }
}
