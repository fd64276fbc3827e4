//! Two-beam Lamb-Dicke parameters and position-dependent coupling strengths.
//!
//! An incident beam (Rabi frequency `omega1`) and its mirror reflection
//! (`omega2`) interfere at the ion. The optical phase of the standing wave at
//! the equilibrium position y is gamma = k y cos(alpha), and the carrier and
//! first-order sideband coupling strengths are interference sums of the two
//! running-wave terms, each carrying its own Lamb-Dicke parameter. Off the RF
//! null, micromotion multiplies every coupling by J0(kappa).
//!
//! All angular frequencies are stored in rad/s. Configuration layers that
//! accept Hz must multiply by 2 pi before constructing these types; the trap
//! RF frequency in the modulation index follows the same rad/s convention.

use num_complex::Complex64;

use crate::constants::HBAR;
use crate::error::{Error, Result};
use crate::specfun::j0_raw;

/// Beam and mode geometry: wavelength, incidence angle from the mirror
/// normal, motional-mode axis angle from the surface normal, and the optical
/// phase offset of the drive (kept for completeness; it drops out of every
/// measured magnitude).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamGeometry {
    /// Laser wavelength (m).
    pub wavelength: f64,
    /// Incidence angle alpha from the mirror normal (rad), |alpha| < pi/2.
    pub alpha: f64,
    /// Motional-mode axis angle theta from the surface normal (rad), |theta| < pi/2.
    pub theta: f64,
    /// Optical phase offset phi of the drive (rad).
    pub phi: f64,
}

impl BeamGeometry {
    pub fn new(wavelength: f64, alpha: f64, theta: f64, phi: f64) -> Result<Self> {
        if !(wavelength > 0.0) || !wavelength.is_finite() {
            return Err(Error::InvalidParameter {
                field: "wavelength",
                msg: format!("must be positive and finite, got {wavelength}"),
            });
        }
        if !(alpha.abs() < std::f64::consts::FRAC_PI_2) {
            return Err(Error::InvalidParameter {
                field: "alpha",
                msg: format!("|alpha| must be < pi/2, got {alpha}"),
            });
        }
        if !(theta.abs() < std::f64::consts::FRAC_PI_2) {
            return Err(Error::InvalidParameter {
                field: "theta",
                msg: format!("|theta| must be < pi/2, got {theta}"),
            });
        }
        Ok(Self { wavelength, alpha, theta, phi })
    }

    /// Wavenumber k = 2 pi / lambda (rad/m).
    pub fn wavenumber(&self) -> f64 {
        std::f64::consts::TAU / self.wavelength
    }

    /// Ion displacement between adjacent carrier maxima: lambda / (2 cos alpha).
    pub fn fringe_period(&self) -> f64 {
        self.wavelength / (2.0 * self.alpha.cos())
    }
}

/// Rabi frequencies of the incident and reflected beams (rad/s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StandingWaveDrive {
    pub omega1: f64,
    pub omega2: f64,
}

impl StandingWaveDrive {
    pub fn new(omega1: f64, omega2: f64) -> Result<Self> {
        if !(omega1 >= 0.0) || !omega1.is_finite() {
            return Err(Error::InvalidParameter {
                field: "omega1",
                msg: format!("must be >= 0, got {omega1}"),
            });
        }
        if !(omega2 >= 0.0) || !omega2.is_finite() {
            return Err(Error::InvalidParameter {
                field: "omega2",
                msg: format!("must be >= 0, got {omega2}"),
            });
        }
        Ok(Self { omega1, omega2 })
    }
}

/// One secular mode: frequency nu (rad/s) and ion mass (kg).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionalMode {
    pub nu: f64,
    pub mass: f64,
}

impl MotionalMode {
    pub fn new(nu: f64, mass: f64) -> Result<Self> {
        if !(nu > 0.0) || !nu.is_finite() {
            return Err(Error::InvalidParameter {
                field: "nu",
                msg: format!("must be positive, got {nu}"),
            });
        }
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(Error::InvalidParameter {
                field: "mass",
                msg: format!("must be positive, got {mass}"),
            });
        }
        Ok(Self { nu, mass })
    }

    /// Ground-state wavepacket extent sqrt(hbar / (2 m nu)) (m).
    pub fn ground_state_extent(&self) -> f64 {
        (HBAR / (2.0 * self.mass * self.nu)).sqrt()
    }
}

/// Trap RF drive and micromotion direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MicromotionConfig {
    /// Trap RF frequency nu_RF (rad/s).
    pub nu_rf: f64,
    /// Angle beta between the micromotion direction and the gate beam (rad).
    pub beta: f64,
    /// Ion charge (C).
    pub charge: f64,
}

impl MicromotionConfig {
    pub fn new(nu_rf: f64, beta: f64, charge: f64) -> Result<Self> {
        if !(nu_rf > 0.0) || !nu_rf.is_finite() {
            return Err(Error::InvalidParameter {
                field: "nu_rf",
                msg: format!("must be positive, got {nu_rf}"),
            });
        }
        if !(charge > 0.0) || !charge.is_finite() {
            return Err(Error::InvalidParameter {
                field: "charge",
                msg: format!("must be positive, got {charge}"),
            });
        }
        Ok(Self { nu_rf, beta, charge })
    }
}

/// Lamb-Dicke parameters of the incident (eta1) and reflected (eta2) beams:
///
/// eta_j = k sqrt(hbar/(2 m nu)) [sin(theta) sin(alpha) - (-1)^j cos(theta) cos(alpha)]
///
/// They have opposite sign when cos(theta)cos(alpha) > sin(theta)sin(alpha),
/// which is what puts the carrier and sideband fringes 180 degrees out of
/// phase.
pub fn lamb_dicke_pair(geom: &BeamGeometry, mode: &MotionalMode) -> (f64, f64) {
    let scale = geom.wavenumber() * mode.ground_state_extent();
    let s = geom.theta.sin() * geom.alpha.sin();
    let c = geom.theta.cos() * geom.alpha.cos();
    (scale * (s + c), scale * (s - c))
}

/// Standing-wave phase gamma = k y cos(alpha) at displacement y (m).
pub fn gamma_at(geom: &BeamGeometry, y: f64) -> f64 {
    geom.wavenumber() * y * geom.alpha.cos()
}

/// Carrier coupling strength (rad/s, complex):
///
/// Omega1 e^{-i gamma} [1 - eta1^2/2 (1+2n)] + Omega2 e^{i gamma} [1 - eta2^2/2 (1+2n)]
///
/// Callers use the magnitude. The Debye-Waller factor keeps its n-dependence,
/// so each Fock component of a thermal state sees its own carrier strength.
pub fn omega_carrier(
    drive: &StandingWaveDrive,
    geom: &BeamGeometry,
    mode: &MotionalMode,
    gamma: f64,
    n: u32,
) -> Complex64 {
    let (eta1, eta2) = lamb_dicke_pair(geom, mode);
    let dw = 1.0 + 2.0 * n as f64;
    let a = drive.omega1 * (1.0 - 0.5 * eta1 * eta1 * dw);
    let b = drive.omega2 * (1.0 - 0.5 * eta2 * eta2 * dw);
    let e = Complex64::from_polar(1.0, gamma);
    a * e.conj() + b * e
}

/// Red-sideband coupling strength i sqrt(n) (Omega1 e^{-i gamma} eta1 + Omega2 e^{i gamma} eta2).
/// Zero when n = 0.
pub fn omega_red_sideband(
    drive: &StandingWaveDrive,
    geom: &BeamGeometry,
    mode: &MotionalMode,
    gamma: f64,
    n: u32,
) -> Complex64 {
    sideband_interference(drive, geom, mode, gamma) * Complex64::new(0.0, (n as f64).sqrt())
}

/// Blue-sideband coupling strength i sqrt(n+1) (Omega1 e^{-i gamma} eta1 + Omega2 e^{i gamma} eta2).
pub fn omega_blue_sideband(
    drive: &StandingWaveDrive,
    geom: &BeamGeometry,
    mode: &MotionalMode,
    gamma: f64,
    n: u32,
) -> Complex64 {
    sideband_interference(drive, geom, mode, gamma) * Complex64::new(0.0, (n as f64 + 1.0).sqrt())
}

fn sideband_interference(
    drive: &StandingWaveDrive,
    geom: &BeamGeometry,
    mode: &MotionalMode,
    gamma: f64,
) -> Complex64 {
    let (eta1, eta2) = lamb_dicke_pair(geom, mode);
    let e = Complex64::from_polar(1.0, gamma);
    drive.omega1 * eta1 * e.conj() + drive.omega2 * eta2 * e
}

/// Micromotion modulation index from the local pseudopotential:
///
/// kappa = cos(beta) * 2/(lambda nu_RF) * sqrt(q Phi_pp / m)
pub fn kappa_from_pseudopotential(
    mm: &MicromotionConfig,
    geom: &BeamGeometry,
    mode: &MotionalMode,
    phi_pp: f64,
) -> Result<f64> {
    if !(phi_pp >= 0.0) {
        return Err(Error::NegativePseudopotential(phi_pp));
    }
    let v = (mm.charge * phi_pp / mode.mass).sqrt();
    Ok(mm.beta.cos() * 2.0 / (geom.wavelength * mm.nu_rf) * v)
}

/// Exact algebraic inverse of [`kappa_from_pseudopotential`]:
///
/// Phi_pp = m (kappa lambda nu_RF / (2 cos beta))^2 / q
pub fn pseudopotential_from_kappa(
    mm: &MicromotionConfig,
    geom: &BeamGeometry,
    mode: &MotionalMode,
    kappa: f64,
) -> Result<f64> {
    let cb = mm.beta.cos();
    // cos(pi/2) rounds to ~6e-17 rather than zero; anything this small is
    // physically a beam orthogonal to the micromotion and the inverse is singular
    if cb.abs() < 1e-9 {
        return Err(Error::SingularConfiguration(
            "cos(beta) ~ 0: micromotion orthogonal to the beam carries no modulation",
        ));
    }
    let s = kappa * geom.wavelength * mm.nu_rf / (2.0 * cb);
    Ok(mode.mass * s * s / mm.charge)
}

/// |omega| scaled by the micromotion envelope J0(kappa). The sign of J0 is
/// retained; downstream population formulas square the product.
pub fn modulated_magnitude(omega: Complex64, kappa: f64) -> f64 {
    omega.norm() * j0_raw(kappa)
}

/// Lamb-Dicke expansion diagnostic: eta^2 (2 nbar + 1) per beam, flagged when
/// the larger one exceeds 0.25. Reported, never enforced; the expansion is
/// still usable at nbar ~ 18 where the corrections matter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambDickeDiagnostic {
    pub eta1: f64,
    pub eta2: f64,
    /// max(eta1^2, eta2^2) * (2 nbar + 1)
    pub expansion_parameter: f64,
    pub exceeds_threshold: bool,
}

pub const LAMB_DICKE_WARN_THRESHOLD: f64 = 0.25;

pub fn lamb_dicke_diagnostic(
    geom: &BeamGeometry,
    mode: &MotionalMode,
    nbar: f64,
) -> LambDickeDiagnostic {
    let (eta1, eta2) = lamb_dicke_pair(geom, mode);
    let p = eta1.abs().max(eta2.abs()).powi(2) * (2.0 * nbar + 1.0);
    LambDickeDiagnostic {
        eta1,
        eta2,
        expansion_parameter: p,
        exceeds_threshold: p > LAMB_DICKE_WARN_THRESHOLD,
    }
}
