use ionfringe_core::constants::{ATOMIC_MASS, ELEMENTARY_CHARGE};
use ionfringe_core::coupling::{MicromotionConfig, MotionalMode};
use ionfringe_core::experiment::{simulate_scan, FitParameterSet, ScanContext, ScanKind, ScanSpec, Transition};
use ionfringe_core::fitter::{fit, Dataset, FitOptions};
use ionfringe_core::population::{PulseSpec, RabiConvention};
use std::f64::consts::TAU;

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn main() {
    let c = ScanContext {
        wavelength: 729e-9,
        theta: 13f64.to_radians(),
        phi: 0.0,
        mode: MotionalMode::new(TAU * 4.75e6, 40.0 * ATOMIC_MASS).unwrap(),
        micromotion: MicromotionConfig::new(TAU * 50e6, 0.0, ELEMENTARY_CHARGE).unwrap(),
        beta_compensated: true,
        ex_over_ey: 0.0,
        convention: RabiConvention::Quarter,
        truncation_epsilon: 1e-7,
        seed: 0,
    };
    let mut gen = FitParameterSet {
        a: [1.5e-7, 2.7375e-6, 0.0, 0.0, 0.0],
        m: [0.2, 0.0, 0.0],
        omega1: 1.25e6,
        omega2: 0.0,
        alpha: 18f64.to_radians(),
        nbar: 2.0,
    };
    gen.omega2 = 0.0;

    let carrier = ScanSpec {
        kind: ScanKind::EyScan,
        transition: Transition::Carrier,
        grid: grid(-1.5, 1.5, 61),
        pulse: PulseSpec { duration: 13e-6 },
        power_offset_db: -10.0,
        shots: 600,
        fixed_ey: 0.0,
    };
    let sideband = ScanSpec {
        transition: Transition::RedSideband,
        power_offset_db: 0.0,
        ..carrier.clone()
    };
    let power = ScanSpec {
        kind: ScanKind::PowerScan,
        transition: Transition::Carrier,
        grid: grid(-20.0, 0.0, 41),
        pulse: PulseSpec { duration: 13e-6 },
        power_offset_db: 0.0,
        shots: 600,
        fixed_ey: -0.08,
    };
    let _unused: Vec<Dataset> = [carrier.clone(), sideband.clone()]
        .into_iter()
        .map(|spec| Dataset::from_scan_result(&simulate_scan(&c, &gen, &spec).unwrap()).unwrap())
        .collect();

    for seed in 0u64..8 {
        let mut c2 = c;
        c2.seed = seed;
        let datasets: Vec<Dataset> = [carrier.clone(), sideband.clone(), power.clone()]
            .into_iter()
            .map(|spec| Dataset::from_scan_result(&simulate_scan(&c2, &gen, &spec).unwrap()).unwrap())
            .collect();
        let mut start = gen;
        start.omega2 = 0.12 * gen.omega1;
        start.omega1 *= 1.05;
        start.nbar *= 1.25;
        let options = FitOptions { multi_starts: 2, max_iterations: 120, ..Default::default() };
        let t0 = std::time::Instant::now();
        let report = fit(&c2, &datasets, &start, &options).unwrap();
        let sig = report.std_errors.map(|e| e[9]).unwrap_or(f64::NAN);
        println!(
            "seed {seed}: {:?} om2={:.1} sigma={:.1} ratio={:.2} om2/om1={:.4} nbar={:.2} elapsed={:?}",
            report.stop_reason, report.best.omega2, sig, report.best.omega2 / sig,
            report.best.omega2 / report.best.omega1, report.best.nbar, t0.elapsed()
        );
    }
}
