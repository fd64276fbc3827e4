//! Data-driven seeding of the fringe frequency and phase.
//!
//! The objective is periodic in the displacement coefficients, so a start
//! with a1 more than a couple of percent off loses the fringe count and lands
//! in a wrong-period local minimum that no amount of local descent repairs.
//! A periodogram of the longest displacement scan pins the spatial frequency
//! (hence a1) and phase (hence a0) well inside the convergence basin before
//! Levenberg-Marquardt starts.

use crate::experiment::{FitParameterSet, ScanContext, ScanKind, Transition};

use super::Dataset;

/// Estimate (a0, a1) from the fringes of one displacement scan. Returns None
/// when no usable ey_scan dataset exists or the initial a1 is zero.
pub(crate) fn phase_seed(
    ctx: &ScanContext,
    initial: &FitParameterSet,
    datasets: &[Dataset],
) -> Option<FitParameterSet> {
    let ds = datasets
        .iter()
        .filter(|d| d.spec.kind == ScanKind::EyScan && d.observations.len() >= 16)
        .max_by_key(|d| {
            (d.spec.transition == Transition::Carrier, d.observations.len())
        })?;
    if initial.a[1] == 0.0 {
        return None;
    }

    let k = std::f64::consts::TAU / ctx.wavelength;
    let cos_alpha = initial.alpha.cos();
    // population fringes go as cos(2 gamma): spatial frequency in cycles per (kV/m)
    let f0 = (k * initial.a[1].abs() * cos_alpha / std::f64::consts::PI).abs();
    if !f0.is_finite() || f0 == 0.0 {
        return None;
    }

    let xs: Vec<f64> = ds.observations.iter().map(|o| o.abscissa).collect();
    let ps: Vec<f64> = ds.observations.iter().map(|o| o.population).collect();
    let mean = ps.iter().sum::<f64>() / ps.len() as f64;

    // direct periodogram over a window that excludes the 2f harmonic
    let (f_lo, f_hi) = (0.55 * f0, 1.45 * f0);
    let n_freq = 481;
    let spectrum: Vec<(f64, f64, f64)> = (0..n_freq)
        .map(|i| {
            let f = f_lo + (f_hi - f_lo) * i as f64 / (n_freq - 1) as f64;
            let (mut re, mut im) = (0.0, 0.0);
            for (x, p) in xs.iter().zip(&ps) {
                let phase = -std::f64::consts::TAU * f * x;
                re += (p - mean) * phase.cos();
                im += (p - mean) * phase.sin();
            }
            (f, re * re + im * im, im.atan2(re))
        })
        .collect();

    let peak = spectrum
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))?
        .0;

    // parabolic refinement of the peak frequency on the uniform grid
    let f_hat = if peak > 0 && peak < n_freq - 1 {
        let (ym, y0, yp) = (spectrum[peak - 1].1, spectrum[peak].1, spectrum[peak + 1].1);
        let denom = ym - 2.0 * y0 + yp;
        let df = (f_hi - f_lo) / (n_freq - 1) as f64;
        if denom < 0.0 {
            spectrum[peak].0 + 0.5 * df * (ym - yp) / denom
        } else {
            spectrum[peak].0
        }
    } else {
        spectrum[peak].0
    };

    // re-evaluate the phase at the refined frequency
    let (mut re, mut im) = (0.0, 0.0);
    for (x, p) in xs.iter().zip(&ps) {
        let phase = -std::f64::consts::TAU * f_hat * x;
        re += (p - mean) * phase.cos();
        im += (p - mean) * phase.sin();
    }
    let mut phi = im.atan2(re);
    // carrier maxima sit at cos(2 gamma) = +1; sideband fringes are inverted
    if ds.spec.transition != Transition::Carrier {
        phi += std::f64::consts::PI;
    }

    let a1 = (std::f64::consts::PI * f_hat / (k * cos_alpha)).copysign(initial.a[1]);
    let half_period = ctx.wavelength / (2.0 * cos_alpha);
    let a0 = (phi / (2.0 * k * cos_alpha)).rem_euclid(half_period);

    let mut seeded = *initial;
    seeded.a[0] = a0;
    seeded.a[1] = a1;
    Some(seeded)
}
