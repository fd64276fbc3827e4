//! Carrier and sideband coupling of a trapped ion in a mirror-formed optical
//! standing wave: position-dependent coupling strengths, displacement and
//! power scan simulation with micromotion and thermal effects, and the
//! simultaneous 12-parameter fit that extracts beam geometry, reflection
//! ratio, temperature and trap pseudopotential from scan data.
//!
//! Module map:
//! - [`specfun`]: the Bessel J0 kernel behind the micromotion envelope
//! - [`coupling`]: Lamb-Dicke parameters and carrier/sideband strengths
//! - [`population`]: Fock and thermal-state excitation probabilities
//! - [`experiment`]: forward simulation of displacement and power scans
//! - [`fitter`]: simultaneous nonlinear least-squares parameter estimation
//! - [`trapmodel`]: analytic quadrupole trap for model/fit comparison
//! - [`csvio`]: the CSV dialect shared by scans, fits and comparisons
//! - [`peaks`]: fringe maxima detection used by scan analysis

pub mod constants;
pub mod coupling;
pub mod csvio;
pub mod error;
pub mod experiment;
pub mod fitter;
pub mod peaks;
pub mod population;
pub mod specfun;
pub mod trapmodel;

pub use error::{Error, Result};
