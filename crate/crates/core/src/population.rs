//! Excited-state populations for Fock and thermal motional states.
//!
//! The D5/2 population after a pulse of duration t is
//!
//! P = sum_n  nbar^n/(nbar+1)^{n+1}  sin^2[ 1/4 |Omega(gamma, n)| J0(kappa) t ]
//!
//! Note the 1/4 in the argument: the model is implemented with the quarter
//! factor exactly as printed in the source analysis, not the more common
//! sin^2(Omega t / 2). Fitted Rabi frequencies absorb the convention, so only
//! internal consistency matters; [`RabiConvention::Half`] is available for
//! cross-checks against the other convention.

use crate::error::{Error, Result};
use crate::specfun::j0_raw;

/// Prefactor convention for the flopping argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RabiConvention {
    /// sin^2(Omega J0 t / 4), as printed in the model this crate implements.
    #[default]
    Quarter,
    /// sin^2(Omega J0 t / 2), the textbook Rabi convention.
    Half,
}

impl RabiConvention {
    pub fn prefactor(self) -> f64 {
        match self {
            RabiConvention::Quarter => 0.25,
            RabiConvention::Half => 0.5,
        }
    }
}

/// A square interaction pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSpec {
    /// Interaction time (s).
    pub duration: f64,
}

/// Geometric (thermal) distribution over Fock states, truncated at `n_max`.
///
/// The truncation must retain at least 1 - 1e-6 of the probability mass;
/// use [`ThermalState::with_tolerance`] to pick `n_max` from a tail bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalState {
    nbar: f64,
    n_max: u32,
}

/// Default tail mass allowed past the truncation.
pub const DEFAULT_TRUNCATION_EPSILON: f64 = 1e-9;

/// Largest tail mass a ThermalState will accept.
const MAX_TAIL: f64 = 1e-6;

impl ThermalState {
    pub fn new(nbar: f64, n_max: u32) -> Result<Self> {
        if !(nbar >= 0.0) || !nbar.is_finite() {
            return Err(Error::InvalidParameter {
                field: "nbar",
                msg: format!("must be >= 0 and finite, got {nbar}"),
            });
        }
        let tail = tail_mass(nbar, n_max);
        if tail > MAX_TAIL {
            return Err(Error::Truncation(format!(
                "n_max = {n_max} keeps only {} of the thermal mass at nbar = {nbar}",
                1.0 - tail
            )));
        }
        Ok(Self { nbar, n_max })
    }

    /// Truncation chosen so the discarded tail mass is below `epsilon`.
    pub fn with_tolerance(nbar: f64, epsilon: f64) -> Result<Self> {
        Self::new(nbar, choose_truncation(nbar, epsilon))
    }

    pub fn nbar(&self) -> f64 {
        self.nbar
    }

    pub fn n_max(&self) -> u32 {
        self.n_max
    }

    /// Occupation probability nbar^n / (nbar+1)^{n+1}.
    pub fn weight(&self, n: u32) -> f64 {
        let r = self.nbar / (self.nbar + 1.0);
        r.powi(n as i32) / (self.nbar + 1.0)
    }
}

/// Tail mass past n_max: (nbar/(nbar+1))^{n_max+1}.
fn tail_mass(nbar: f64, n_max: u32) -> f64 {
    if nbar == 0.0 {
        0.0
    } else {
        (nbar / (nbar + 1.0)).powi(n_max as i32 + 1)
    }
}

/// Smallest n_max whose geometric tail mass is strictly below `epsilon`.
///
/// Closed form ceil(ln eps / ln(nbar/(nbar+1))) - 1, then nudged by direct
/// evaluation so the strict inequality holds even at boundary cases like
/// eps = 0.5, nbar = 1 where the logarithm ratio is an exact integer.
pub fn choose_truncation(nbar: f64, epsilon: f64) -> u32 {
    assert!(epsilon > 0.0 && epsilon < 1.0, "epsilon must be in (0,1)");
    if nbar <= 0.0 {
        return 0;
    }
    let r = nbar / (nbar + 1.0);
    // smallest N with N+1 > ln(eps)/ln(r); start two below the closed form
    // so rounding in the logarithms can never land us past the answer
    let t = epsilon.ln() / r.ln();
    let mut n_max = (t.ceil() as i64 - 2).max(0) as u32;
    while tail_mass(nbar, n_max) >= epsilon {
        n_max += 1;
    }
    n_max
}

/// sin^2 of the quarter-convention flopping argument, in [0, 1].
pub fn flop_probability(omega_mag: f64, kappa: f64, t: f64) -> f64 {
    flop_probability_with(RabiConvention::Quarter, omega_mag, kappa, t)
}

pub fn flop_probability_with(
    convention: RabiConvention,
    omega_mag: f64,
    kappa: f64,
    t: f64,
) -> f64 {
    debug_assert!(t >= 0.0, "pulse duration must be nonnegative");
    let arg = convention.prefactor() * omega_mag * j0_raw(kappa) * t;
    let s = arg.sin();
    s * s
}

/// Thermal average of the flopping probability over the truncated Fock
/// ladder. `coupling` maps n to the coupling magnitude |Omega(gamma, n)|.
pub fn thermal_population<F: Fn(u32) -> f64>(
    state: &ThermalState,
    coupling: F,
    kappa: f64,
    t: f64,
) -> f64 {
    thermal_population_with(RabiConvention::Quarter, state, coupling, kappa, t)
}

pub fn thermal_population_with<F: Fn(u32) -> f64>(
    convention: RabiConvention,
    state: &ThermalState,
    coupling: F,
    kappa: f64,
    t: f64,
) -> f64 {
    let j0 = j0_raw(kappa);
    let pref = convention.prefactor();
    let r = state.nbar / (state.nbar + 1.0);
    let mut weight = 1.0 / (state.nbar + 1.0);
    let mut total = 0.0;
    for n in 0..=state.n_max {
        let s = (pref * coupling(n) * j0 * t).sin();
        total += weight * s * s;
        weight *= r;
    }
    total.clamp(0.0, 1.0)
}
