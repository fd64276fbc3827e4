//! Forward simulation of the two experiment classes: displacement scans
//! (D5/2 population vs. applied E_y field) and relative-power scans at a
//! fixed field, both for carrier and first-order sidebands, with the
//! polynomial displacement/micromotion maps and optional binomial shot noise.
//!
//! Conventions:
//! - E_y is in kV/m; the displacement polynomial returns meters.
//! - relative power is in dB of *beam power*; Rabi frequencies scale as
//!   10^(dB/20) since Omega is proportional to sqrt(P).
//! - the drive is assumed to track the motional resonance as the ion moves,
//!   so nu enters only through the Lamb-Dicke parameters and the thermal
//!   distribution.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::coupling::{
    gamma_at, lamb_dicke_pair, BeamGeometry, MicromotionConfig, MotionalMode, StandingWaveDrive,
};
use crate::csvio::{self, Table};
use crate::error::{Error, Result};
use crate::population::{thermal_population_with, PulseSpec, RabiConvention, ThermalState};

/// What is being swept.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanKind {
    /// Sweep the applied E_y field (kV/m) at fixed drive power.
    EyScan,
    /// Sweep the relative drive power (dB) at a fixed E_y field.
    PowerScan,
}

impl ScanKind {
    pub fn name(self) -> &'static str {
        match self {
            ScanKind::EyScan => "ey_scan",
            ScanKind::PowerScan => "power_scan",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "ey_scan" => Ok(ScanKind::EyScan),
            "power_scan" => Ok(ScanKind::PowerScan),
            other => Err(Error::InvalidSpec(format!("unknown scan kind '{other}'"))),
        }
    }
}

/// Which transition the pulse addresses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transition {
    Carrier,
    RedSideband,
    BlueSideband,
}

impl Transition {
    pub fn name(self) -> &'static str {
        match self {
            Transition::Carrier => "carrier",
            Transition::RedSideband => "red_sideband",
            Transition::BlueSideband => "blue_sideband",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "carrier" => Ok(Transition::Carrier),
            "red_sideband" => Ok(Transition::RedSideband),
            "blue_sideband" => Ok(Transition::BlueSideband),
            other => Err(Error::InvalidSpec(format!("unknown transition '{other}'"))),
        }
    }
}

/// Polynomial maps from applied field to displacement and modulation index:
///
/// y(E_y)      = sum_{j=0}^{4} a_j E_y^j        (m, E_y in kV/m)
/// kappa^2(E_y) = sum_{j=2}^{4} m_j E_y^j        (dimensionless)
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisplacementMap {
    pub a: [f64; 5],
    /// Coefficients m2, m3, m4.
    pub m: [f64; 3],
}

impl DisplacementMap {
    pub fn y_at(&self, ey: f64) -> f64 {
        self.a.iter().rev().fold(0.0, |acc, &c| acc * ey + c)
    }

    pub fn kappa_sq_at(&self, ey: f64) -> f64 {
        ey * ey * (self.m[0] + ey * (self.m[1] + ey * self.m[2]))
    }

    /// kappa(E_y), failing when the kappa^2 polynomial dips negative.
    pub fn kappa_at(&self, ey: f64) -> Result<f64> {
        let ksq = self.kappa_sq_at(ey);
        if ksq < 0.0 {
            return Err(Error::InvalidMap { ey, value: ksq });
        }
        Ok(ksq.sqrt())
    }

    /// Check kappa^2 >= 0 and finite coefficients over a grid.
    pub fn validate_on_grid(&self, grid: &[f64]) -> Result<()> {
        if self.a.iter().chain(self.m.iter()).any(|c| !c.is_finite()) {
            return Err(Error::InvalidSpec("non-finite map coefficient".into()));
        }
        for &ey in grid {
            self.kappa_at(ey)?;
        }
        Ok(())
    }
}

/// The full 12-parameter model: displacement polynomial a0..a4, micromotion
/// polynomial m2..m4, the two Rabi frequencies, the incidence angle and the
/// mean thermal occupation. This is what the simultaneous fit estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitParameterSet {
    /// a0..a4 (m per (kV/m)^j).
    pub a: [f64; 5],
    /// m2..m4 (per (kV/m)^j).
    pub m: [f64; 3],
    /// Incident-beam Rabi frequency (rad/s).
    pub omega1: f64,
    /// Reflected-beam Rabi frequency (rad/s).
    pub omega2: f64,
    /// Incidence angle (rad).
    pub alpha: f64,
    /// Mean motional occupation.
    pub nbar: f64,
}

/// Parameter names in vector order, shared by the fitter and its reports.
pub const PARAM_NAMES: [&str; 12] = [
    "a0", "a1", "a2", "a3", "a4", "m2", "m3", "m4", "omega1", "omega2", "alpha", "nbar",
];

impl FitParameterSet {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega1 > 0.0) {
            return Err(Error::InvalidParameter {
                field: "omega1",
                msg: format!("must be > 0, got {}", self.omega1),
            });
        }
        if !(self.omega2 >= 0.0) {
            return Err(Error::InvalidParameter {
                field: "omega2",
                msg: format!("must be >= 0, got {}", self.omega2),
            });
        }
        if !(self.nbar >= 0.0) {
            return Err(Error::InvalidParameter {
                field: "nbar",
                msg: format!("must be >= 0, got {}", self.nbar),
            });
        }
        if !(self.alpha.abs() < std::f64::consts::FRAC_PI_2) {
            return Err(Error::InvalidParameter {
                field: "alpha",
                msg: format!("|alpha| must be < pi/2, got {}", self.alpha),
            });
        }
        Ok(())
    }

    pub fn displacement_map(&self) -> DisplacementMap {
        DisplacementMap { a: self.a, m: self.m }
    }

    pub fn to_array(&self) -> [f64; 12] {
        [
            self.a[0], self.a[1], self.a[2], self.a[3], self.a[4], self.m[0], self.m[1],
            self.m[2], self.omega1, self.omega2, self.alpha, self.nbar,
        ]
    }

    pub fn from_array(v: &[f64; 12]) -> Self {
        Self {
            a: [v[0], v[1], v[2], v[3], v[4]],
            m: [v[5], v[6], v[7]],
            omega1: v[8],
            omega2: v[9],
            alpha: v[10],
            nbar: v[11],
        }
    }
}

/// One scan request.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanSpec {
    pub kind: ScanKind,
    pub transition: Transition,
    /// E_y values (kV/m) for an ey_scan, relative power (dB) for a power_scan.
    pub grid: Vec<f64>,
    pub pulse: PulseSpec,
    /// Per-transition drive offset (dB of beam power) added to the abscissa
    /// power for power scans, or applied alone for ey scans.
    pub power_offset_db: f64,
    /// Electron-shelving repetitions per point; 0 means noiseless model values.
    pub shots: u32,
    /// E_y (kV/m) the ion sits at during a power scan. Ignored by ey scans.
    pub fixed_ey: f64,
}

impl ScanSpec {
    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::InvalidSpec("scan grid is empty".into()));
        }
        if self.grid.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSpec("scan grid contains non-finite values".into()));
        }
        if self.grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidSpec("scan grid must be strictly increasing".into()));
        }
        if !(self.pulse.duration >= 0.0) {
            return Err(Error::InvalidSpec(format!(
                "pulse duration must be >= 0, got {}",
                self.pulse.duration
            )));
        }
        Ok(())
    }
}

/// Fixed (non-fitted) physics of the apparatus plus evaluation options.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanContext {
    /// Gate beam wavelength (m).
    pub wavelength: f64,
    /// Motional-mode axis angle from the surface normal (rad).
    pub theta: f64,
    /// Optical phase offset of the drive (rad); drops out of populations.
    pub phi: f64,
    pub mode: MotionalMode,
    pub micromotion: MicromotionConfig,
    /// When true, E_x is servoed proportionally to E_y so the micromotion
    /// stays aligned with the beam (beta = 0 everywhere).
    pub beta_compensated: bool,
    /// The E_x/E_y proportionality constant of that servo; metadata only.
    pub ex_over_ey: f64,
    pub convention: RabiConvention,
    /// Tail mass allowed past the thermal truncation.
    pub truncation_epsilon: f64,
    /// Seed for the per-point binomial sampling.
    pub seed: u64,
}

impl ScanContext {
    pub fn geometry(&self, alpha: f64) -> Result<BeamGeometry> {
        BeamGeometry::new(self.wavelength, alpha, self.theta, self.phi)
    }

    /// Micromotion angle the simulation actually uses.
    pub fn effective_beta(&self) -> f64 {
        if self.beta_compensated {
            0.0
        } else {
            self.micromotion.beta
        }
    }

    /// The compensation proportionality constant, recorded for metadata.
    pub fn beta_compensation_note(&self) -> f64 {
        self.ex_over_ey
    }
}

/// Simulated (or sampled) populations over the scan grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub abscissa: Vec<f64>,
    pub population: Vec<f64>,
    /// Empty when noiseless; sqrt(p(1-p)/shots) per point otherwise.
    pub population_stderr: Vec<f64>,
    /// Echo of the spec, the model parameters and the context.
    pub metadata: Vec<(String, String)>,
}

impl ScanResult {
    pub fn to_csv_string(&self) -> String {
        let rows: Vec<Vec<Option<f64>>> = self
            .abscissa
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                vec![
                    Some(x),
                    Some(self.population[i]),
                    self.population_stderr.get(i).copied(),
                ]
            })
            .collect();
        let mut buf = Vec::new();
        csvio::write_table(&mut buf, &self.metadata, &["abscissa", "population", "stderr"], &rows)
            .expect("in-memory write cannot fail");
        String::from_utf8(buf).expect("csv output is ascii")
    }
}

/// Per-scan evaluator with the Lamb-Dicke pair, thermal state and drive
/// scaling hoisted out of the point loop.
struct ScanEvaluator {
    kind: ScanKind,
    transition: Transition,
    map: DisplacementMap,
    geom: BeamGeometry,
    eta1: f64,
    eta2: f64,
    omega1: f64,
    omega2: f64,
    power_offset_db: f64,
    fixed_ey: f64,
    duration: f64,
    cos_eff_beta: f64,
    state: ThermalState,
    convention: RabiConvention,
}

impl ScanEvaluator {
    fn new(ctx: &ScanContext, params: &FitParameterSet, spec: &ScanSpec) -> Result<Self> {
        params.validate()?;
        Self::new_relaxed(ctx, params, spec)
    }

    /// Like `new` but without the parameter invariants: the fitter evaluates
    /// trial points where omega2 may transiently be negative (that sign is a
    /// model symmetry and is canonicalized away at the end).
    fn new_relaxed(ctx: &ScanContext, params: &FitParameterSet, spec: &ScanSpec) -> Result<Self> {
        spec.validate()?;
        let geom = ctx.geometry(params.alpha)?;
        let (eta1, eta2) = lamb_dicke_pair(&geom, &ctx.mode);
        Ok(Self {
            kind: spec.kind,
            transition: spec.transition,
            map: params.displacement_map(),
            geom,
            eta1,
            eta2,
            omega1: params.omega1,
            omega2: params.omega2,
            power_offset_db: spec.power_offset_db,
            fixed_ey: spec.fixed_ey,
            duration: spec.pulse.duration,
            cos_eff_beta: ctx.effective_beta().cos(),
            state: ThermalState::with_tolerance(params.nbar, ctx.truncation_epsilon)?,
            convention: ctx.convention,
        })
    }

    /// Noiseless model population at one abscissa value.
    fn population(&self, x: f64) -> Result<f64> {
        let (ey, power_db) = match self.kind {
            ScanKind::EyScan => (x, 0.0),
            ScanKind::PowerScan => (self.fixed_ey, x),
        };
        let kappa = self.map.kappa_at(ey)? * self.cos_eff_beta;
        let gamma = gamma_at(&self.geom, self.map.y_at(ey));
        let scale = 10f64.powf((power_db + self.power_offset_db) / 20.0);
        let om1 = self.omega1 * scale;
        let om2 = self.omega2 * scale;

        // |a e^{-ig} + b e^{ig}| = sqrt([(a+b)cos g]^2 + [(a-b)sin g]^2),
        // evaluated in the cancellation-free split form. A single running
        // wave has no gamma dependence at all, so that case skips the trig
        // and is exactly flat.
        let (cg, sg) = (gamma.cos(), gamma.sin());
        let mag = |a: f64, b: f64| -> f64 {
            if a == 0.0 || b == 0.0 {
                return a.abs() + b.abs();
            }
            let u = (a + b) * cg;
            let v = (a - b) * sg;
            (u * u + v * v).sqrt()
        };
        let p = thermal_population_with(
            self.convention,
            &self.state,
            |n| match self.transition {
                Transition::Carrier => {
                    let dw = 1.0 + 2.0 * n as f64;
                    mag(
                        om1 * (1.0 - 0.5 * self.eta1 * self.eta1 * dw),
                        om2 * (1.0 - 0.5 * self.eta2 * self.eta2 * dw),
                    )
                }
                Transition::RedSideband => {
                    (n as f64).sqrt() * mag(om1 * self.eta1, om2 * self.eta2)
                }
                Transition::BlueSideband => {
                    (n as f64 + 1.0).sqrt() * mag(om1 * self.eta1, om2 * self.eta2)
                }
            },
            kappa,
            self.duration,
        );
        Ok(p)
    }
}

/// Noiseless model populations at caller-chosen abscissae (the fit objective
/// evaluates observations wherever they were taken, not on the spec grid).
pub fn model_populations(
    ctx: &ScanContext,
    params: &FitParameterSet,
    spec: &ScanSpec,
    abscissae: &[f64],
) -> Result<Vec<f64>> {
    let eval = ScanEvaluator::new(ctx, params, spec)?;
    abscissae.iter().map(|&x| eval.population(x)).collect()
}

/// Fitter-internal variant of [`model_populations`] that skips the parameter
/// invariants (see `ScanEvaluator::new_relaxed`).
pub(crate) fn model_populations_relaxed(
    ctx: &ScanContext,
    params: &FitParameterSet,
    spec: &ScanSpec,
    abscissae: &[f64],
) -> Result<Vec<f64>> {
    let eval = ScanEvaluator::new_relaxed(ctx, params, spec)?;
    abscissae.iter().map(|&x| eval.population(x)).collect()
}

/// Simulate a scan; points are evaluated in parallel.
pub fn simulate_scan(
    ctx: &ScanContext,
    params: &FitParameterSet,
    spec: &ScanSpec,
) -> Result<ScanResult> {
    simulate_scan_with(ctx, params, spec, true)
}

/// Simulate a scan with explicit control over point-level parallelism. The
/// noise stream is split per point from the seed, so serial and parallel
/// evaluation produce bit-identical results.
pub fn simulate_scan_with(
    ctx: &ScanContext,
    params: &FitParameterSet,
    spec: &ScanSpec,
    parallel: bool,
) -> Result<ScanResult> {
    let eval = ScanEvaluator::new(ctx, params, spec)?;
    let point = |(i, &x): (usize, &f64)| -> Result<(f64, Option<f64>)> {
        let p = eval.population(x)?;
        if spec.shots == 0 {
            return Ok((p, None));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
        rng.set_stream(i as u64);
        let successes = (0..spec.shots).filter(|_| rng.random::<f64>() < p).count() as f64;
        let p_hat = successes / spec.shots as f64;
        let stderr = (p_hat * (1.0 - p_hat) / spec.shots as f64).sqrt();
        Ok((p_hat, Some(stderr)))
    };

    let outcomes: Result<Vec<(f64, Option<f64>)>> = if parallel {
        spec.grid.par_iter().enumerate().map(point).collect()
    } else {
        spec.grid.iter().enumerate().map(point).collect()
    };
    let outcomes = outcomes?;

    let population: Vec<f64> = outcomes.iter().map(|o| o.0).collect();
    let population_stderr: Vec<f64> = if spec.shots == 0 {
        Vec::new()
    } else {
        outcomes.iter().map(|o| o.1.expect("stderr present for noisy scans")).collect()
    };
    Ok(ScanResult {
        abscissa: spec.grid.clone(),
        population,
        population_stderr,
        metadata: build_metadata(ctx, params, spec),
    })
}

/// Equivalent drive-power suppression in dB across the standing-wave fringe:
/// 20 log10(max_gamma |Omega_eff| / min_gamma |Omega_eff|).
///
/// For magnitudes of a e^{-ig} + b e^{ig} the extrema over gamma are |a|+|b|
/// and ||a|-|b||. The carrier term uses n = round(nbar) in its Debye-Waller
/// factor as the thermally representative occupation (an approximation); the
/// sideband ratio is n-independent. Returns +infinity when the minimum
/// vanishes (perfect cancellation).
pub fn suppression_db(
    ctx: &ScanContext,
    params: &FitParameterSet,
    transition: Transition,
) -> Result<f64> {
    params.validate()?;
    let geom = ctx.geometry(params.alpha)?;
    let (eta1, eta2) = lamb_dicke_pair(&geom, &ctx.mode);
    let (a, b) = match transition {
        Transition::Carrier => {
            let n = params.nbar.round();
            let dw = 1.0 + 2.0 * n;
            (
                params.omega1 * (1.0 - 0.5 * eta1 * eta1 * dw),
                params.omega2 * (1.0 - 0.5 * eta2 * eta2 * dw),
            )
        }
        Transition::RedSideband | Transition::BlueSideband => {
            (params.omega1 * eta1, params.omega2 * eta2)
        }
    };
    let hi = a.abs() + b.abs();
    let lo = (a.abs() - b.abs()).abs();
    if hi == 0.0 {
        return Ok(0.0);
    }
    if lo == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(20.0 * (hi / lo).log10())
}

/// How much faster a sideband interaction can run when the drive power is
/// raised by the suppression margin: 10^(dB/20) in Rabi frequency.
pub fn speedup_factor(suppression_db: f64) -> f64 {
    10f64.powf(suppression_db / 20.0)
}

fn build_metadata(
    ctx: &ScanContext,
    params: &FitParameterSet,
    spec: &ScanSpec,
) -> Vec<(String, String)> {
    let f = csvio::format_f64;
    let mut md: Vec<(String, String)> = vec![
        ("spec.kind".into(), spec.kind.name().into()),
        ("spec.transition".into(), spec.transition.name().into()),
        ("spec.pulse_duration_s".into(), f(spec.pulse.duration)),
        ("spec.power_offset_db".into(), f(spec.power_offset_db)),
        ("spec.shots".into(), spec.shots.to_string()),
        ("spec.fixed_ey_kv_m".into(), f(spec.fixed_ey)),
    ];
    for (name, value) in PARAM_NAMES.iter().zip(params.to_array()) {
        md.push((format!("model.{name}"), f(value)));
    }
    md.extend([
        ("ctx.wavelength_m".into(), f(ctx.wavelength)),
        ("ctx.theta_rad".into(), f(ctx.theta)),
        ("ctx.phi_rad".into(), f(ctx.phi)),
        ("ctx.nu_rad_s".into(), f(ctx.mode.nu)),
        ("ctx.mass_kg".into(), f(ctx.mode.mass)),
        ("ctx.nu_rf_rad_s".into(), f(ctx.micromotion.nu_rf)),
        ("ctx.beta_rad".into(), f(ctx.micromotion.beta)),
        ("ctx.charge_c".into(), f(ctx.micromotion.charge)),
        ("ctx.beta_compensated".into(), ctx.beta_compensated.to_string()),
        ("ctx.ex_over_ey".into(), f(ctx.beta_compensation_note())),
        (
            "ctx.rabi_convention".into(),
            match ctx.convention {
                RabiConvention::Quarter => "quarter".into(),
                RabiConvention::Half => "half".into(),
            },
        ),
        ("ctx.truncation_epsilon".into(), f(ctx.truncation_epsilon)),
        ("ctx.seed".into(), ctx.seed.to_string()),
    ]);
    md
}

/// Rebuild a [`ScanSpec`] from a parsed scan CSV (metadata plus the abscissa
/// column as the grid).
pub fn scan_spec_from_table(table: &Table) -> Result<ScanSpec> {
    let meta_str = |key: &str| -> Result<&str> {
        table
            .meta(key)
            .ok_or_else(|| Error::Parse(format!("missing metadata key '{key}'")))
    };
    let grid: Vec<f64> = table
        .rows
        .iter()
        .map(|r| {
            r.first()
                .copied()
                .flatten()
                .ok_or_else(|| Error::Parse("row without abscissa".into()))
        })
        .collect::<Result<_>>()?;
    Ok(ScanSpec {
        kind: ScanKind::parse(meta_str("spec.kind")?)?,
        transition: Transition::parse(meta_str("spec.transition")?)?,
        grid,
        pulse: PulseSpec { duration: table.meta_f64("spec.pulse_duration_s")? },
        power_offset_db: table.meta_f64("spec.power_offset_db")?,
        shots: table.meta_f64("spec.shots")? as u32,
        fixed_ey: table.meta_f64("spec.fixed_ey_kv_m")?,
    })
}

/// Rebuild the context a scan CSV was produced with.
pub fn scan_context_from_table(table: &Table) -> Result<ScanContext> {
    let convention = match table.meta("ctx.rabi_convention") {
        Some("half") => RabiConvention::Half,
        _ => RabiConvention::Quarter,
    };
    Ok(ScanContext {
        wavelength: table.meta_f64("ctx.wavelength_m")?,
        theta: table.meta_f64("ctx.theta_rad")?,
        phi: table.meta_f64("ctx.phi_rad")?,
        mode: MotionalMode::new(table.meta_f64("ctx.nu_rad_s")?, table.meta_f64("ctx.mass_kg")?)?,
        micromotion: MicromotionConfig::new(
            table.meta_f64("ctx.nu_rf_rad_s")?,
            table.meta_f64("ctx.beta_rad")?,
            table.meta_f64("ctx.charge_c")?,
        )?,
        beta_compensated: table.meta("ctx.beta_compensated") == Some("true"),
        ex_over_ey: table.meta_f64("ctx.ex_over_ey").unwrap_or(0.0),
        convention,
        truncation_epsilon: table.meta_f64("ctx.truncation_epsilon")?,
        seed: table
            .meta("ctx.seed")
            .and_then(|s| s.parse().ok())
            .unwrap_or(0),
    })
}

/// Rebuild the model parameters a scan CSV was generated with.
pub fn params_from_table(table: &Table) -> Result<FitParameterSet> {
    let mut v = [0.0; 12];
    for (slot, name) in v.iter_mut().zip(PARAM_NAMES) {
        *slot = table.meta_f64(&format!("model.{name}"))?;
    }
    Ok(FitParameterSet::from_array(&v))
}

/// Coupling magnitude used by scans, via the public coupling operations.
/// Exists so tests can pin the fast path in [`ScanEvaluator`] to the
/// reference complex-amplitude route.
pub fn reference_coupling_magnitude(
    transition: Transition,
    drive: &StandingWaveDrive,
    geom: &BeamGeometry,
    mode: &MotionalMode,
    gamma: f64,
    n: u32,
) -> f64 {
    let w: Complex64 = match transition {
        Transition::Carrier => crate::coupling::omega_carrier(drive, geom, mode, gamma, n),
        Transition::RedSideband => {
            crate::coupling::omega_red_sideband(drive, geom, mode, gamma, n)
        }
        Transition::BlueSideband => {
            crate::coupling::omega_blue_sideband(drive, geom, mode, gamma, n)
        }
    };
    w.norm()
}
