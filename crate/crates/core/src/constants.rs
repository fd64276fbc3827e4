//! Physical constants (CODATA 2018 / SI exact values).

/// Reduced Planck constant (J s).
pub const HBAR: f64 = 1.054571817e-34;

/// Unified atomic mass unit (kg).
pub const ATOMIC_MASS: f64 = 1.66053906660e-27;

/// Elementary charge (C); exact in the 2019 SI.
pub const ELEMENTARY_CHARGE: f64 = 1.602176634e-19;
