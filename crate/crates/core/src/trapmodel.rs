//! Ideal linear-quadrupole trap: a quadratic RF pseudopotential about the
//! null plus a uniform DC restoring curvature. Stands in for a full numerical
//! model of the trapping potentials so the kappa^2 -> pseudopotential
//! extraction pipeline can be validated end to end; deviations between real
//! data and this model are expected and are exactly what the comparison
//! table displays.

use crate::coupling::{pseudopotential_from_kappa, BeamGeometry, MicromotionConfig, MotionalMode};
use crate::csvio::{self, Table};
use crate::error::{Error, Result};
use crate::experiment::DisplacementMap;

/// Ideal trap description. The stray field is carried for display alongside
/// comparisons; its effect on the equilibrium is already folded into
/// `null_position`, since mapping field to offset requires electrode geometry
/// this model does not have.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadrupoleTrap {
    /// RF-only secular frequency omega_pp at the null (rad/s); sets the
    /// pseudopotential curvature.
    pub secular_freq_rf: f64,
    /// DC contribution to the curvature along y (rad/s).
    pub dc_freq: f64,
    /// RF null y-coordinate (m).
    pub null_position: f64,
    /// Uniform stray field magnitude along y (V/m); informational.
    pub stray_field: f64,
    /// Ion mass (kg).
    pub mass: f64,
    /// Ion charge (C).
    pub charge: f64,
}

impl QuadrupoleTrap {
    pub fn new(
        secular_freq_rf: f64,
        dc_freq: f64,
        null_position: f64,
        stray_field: f64,
        mass: f64,
        charge: f64,
    ) -> Result<Self> {
        if !(secular_freq_rf > 0.0) {
            return Err(Error::InvalidParameter {
                field: "secular_freq_rf",
                msg: format!("must be > 0, got {secular_freq_rf}"),
            });
        }
        let total = secular_freq_rf * secular_freq_rf + dc_freq * dc_freq;
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::SingularConfiguration(
                "total trap curvature must be positive and finite",
            ));
        }
        if !(mass > 0.0) || !(charge > 0.0) {
            return Err(Error::InvalidParameter {
                field: "mass/charge",
                msg: "must be positive".into(),
            });
        }
        Ok(Self { secular_freq_rf, dc_freq, null_position, stray_field, mass, charge })
    }

    /// Phi_pp(y) = m/(2q) omega_pp^2 (y - y_null)^2; zero on the null.
    pub fn pseudopotential_at(&self, y: f64) -> f64 {
        let d = y - self.null_position;
        self.mass / (2.0 * self.charge) * self.secular_freq_rf * self.secular_freq_rf * d * d
    }

    /// Equilibrium displacement under a uniform field (V/m):
    /// y = y_null + q E_y / (m (omega_pp^2 + omega_dc^2)). Exactly linear.
    pub fn displacement_vs_field(&self, ey_v_m: f64) -> f64 {
        let curvature = self.secular_freq_rf * self.secular_freq_rf + self.dc_freq * self.dc_freq;
        self.null_position + self.charge * ey_v_m / (self.mass * curvature)
    }

    /// The displacement/micromotion polynomial this ideal trap induces, with
    /// E_y in kV/m to match the scan convention: y is linear in the field and
    /// kappa^2 is exactly quadratic, so a = [y_null, a1, 0, 0, 0] and
    /// m = [m2, 0, 0].
    pub fn ideal_displacement_map(
        &self,
        mm: &MicromotionConfig,
        geom: &BeamGeometry,
    ) -> DisplacementMap {
        let curvature = self.secular_freq_rf * self.secular_freq_rf + self.dc_freq * self.dc_freq;
        let a1 = self.charge * 1e3 / (self.mass * curvature); // m per kV/m
        let cb = mm.beta.cos();
        let m2 = 2.0 * cb * cb * (self.secular_freq_rf * a1 / (geom.wavelength * mm.nu_rf)).powi(2);
        DisplacementMap { a: [self.null_position, a1, 0.0, 0.0, 0.0], m: [m2, 0.0, 0.0] }
    }
}

/// One row of the model-vs-fit comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonRow {
    pub ey_kv_m: f64,
    pub y_model: f64,
    pub y_fit: f64,
    pub dy_abs: f64,
    pub dy_rel: f64,
    pub phi_model: f64,
    pub phi_fit: f64,
    pub dphi_abs: f64,
    pub dphi_rel: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
    pub metadata: Vec<(String, String)>,
}

pub const COMPARISON_HEADER: [&str; 9] = [
    "ey_kv_m", "y_model_m", "y_fit_m", "dy_abs_m", "dy_rel", "phi_model_v", "phi_fit_v",
    "dphi_abs_v", "dphi_rel",
];

impl ComparisonTable {
    pub fn to_csv_string(&self) -> String {
        let rows: Vec<Vec<Option<f64>>> = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    Some(r.ey_kv_m),
                    Some(r.y_model),
                    Some(r.y_fit),
                    Some(r.dy_abs),
                    Some(r.dy_rel),
                    Some(r.phi_model),
                    Some(r.phi_fit),
                    Some(r.dphi_abs),
                    Some(r.dphi_rel),
                ]
            })
            .collect();
        let mut buf = Vec::new();
        csvio::write_table(&mut buf, &self.metadata, &COMPARISON_HEADER, &rows)
            .expect("in-memory write cannot fail");
        String::from_utf8(buf).expect("csv output is ascii")
    }

    pub fn from_table(table: &Table) -> Result<Self> {
        let rows = table
            .rows
            .iter()
            .map(|r| {
                let cell = |i: usize| -> Result<f64> {
                    r.get(i)
                        .copied()
                        .flatten()
                        .ok_or_else(|| Error::Parse(format!("missing column {i}")))
                };
                Ok(ComparisonRow {
                    ey_kv_m: cell(0)?,
                    y_model: cell(1)?,
                    y_fit: cell(2)?,
                    dy_abs: cell(3)?,
                    dy_rel: cell(4)?,
                    phi_model: cell(5)?,
                    phi_fit: cell(6)?,
                    dphi_abs: cell(7)?,
                    dphi_rel: cell(8)?,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self { rows, metadata: table.metadata.clone() })
    }
}

/// Compare the analytic trap against a fitted displacement map on a shared
/// E_y grid (kV/m). The fitted pseudopotential comes from inverting the
/// modulation index: Phi_fit = pseudopotential_from_kappa(sqrt(kappa^2(E_y))).
pub fn compare_to_fit(
    trap: &QuadrupoleTrap,
    fitted: &DisplacementMap,
    mm: &MicromotionConfig,
    geom: &BeamGeometry,
    mode: &MotionalMode,
    grid_kv_m: &[f64],
) -> Result<ComparisonTable> {
    let mut rows = Vec::with_capacity(grid_kv_m.len());
    for &ey in grid_kv_m {
        let y_model = trap.displacement_vs_field(ey * 1e3);
        let y_fit = fitted.y_at(ey);
        let phi_model = trap.pseudopotential_at(y_model);
        let kappa = fitted.kappa_at(ey)?;
        let phi_fit = pseudopotential_from_kappa(mm, geom, mode, kappa)?;
        let rel = |d: f64, scale: f64| if scale == 0.0 { 0.0 } else { d / scale };
        rows.push(ComparisonRow {
            ey_kv_m: ey,
            y_model,
            y_fit,
            dy_abs: y_fit - y_model,
            dy_rel: rel(y_fit - y_model, y_model.abs().max(y_fit.abs())),
            phi_model,
            phi_fit,
            dphi_abs: phi_fit - phi_model,
            dphi_rel: rel(phi_fit - phi_model, phi_model.abs().max(phi_fit.abs())),
        });
    }
    let f = csvio::format_f64;
    let metadata = vec![
        ("trap.secular_freq_rf_rad_s".to_string(), f(trap.secular_freq_rf)),
        ("trap.dc_freq_rad_s".to_string(), f(trap.dc_freq)),
        ("trap.null_position_m".to_string(), f(trap.null_position)),
        ("trap.stray_field_v_m".to_string(), f(trap.stray_field)),
        ("trap.mass_kg".to_string(), f(trap.mass)),
        ("trap.charge_c".to_string(), f(trap.charge)),
    ];
    Ok(ComparisonTable { rows, metadata })
}
