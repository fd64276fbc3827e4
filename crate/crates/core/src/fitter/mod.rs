//! Simultaneous nonlinear least-squares estimation of the 12-parameter model
//! from multiple scan datasets.
//!
//! The optimizer is Levenberg-Marquardt with a central-difference Jacobian
//! over transformed parameters (omega1 and nbar in log space, alpha through a
//! sigmoid onto (0, pi/2), a0 wrapped to one fringe period at the end), with
//! a data-driven fringe-frequency seed, multi-start jitter against the
//! periodic local minima, and an optional Nelder-Mead fallback when LM
//! stalls.

mod levmar;
mod linalg;
mod neldermead;
mod spectral;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::csvio::{self, Table};
use crate::error::{Error, Result};
use crate::experiment::{
    model_populations_relaxed, scan_spec_from_table, ScanContext, ScanResult, ScanSpec,
    PARAM_NAMES,
};
pub use crate::experiment::FitParameterSet;

use levmar::{LmConfig, LmStop};

const N_PARAMS: usize = 12;

/// Residual injected for every point of a dataset whose model evaluation
/// failed (e.g. the kappa^2 polynomial went negative). Large enough that the
/// optimizer backs away, finite so it never throws.
pub const PENALTY_RESIDUAL: f64 = 1e6;

/// One observed point: abscissa in the dataset's scan units, measured
/// population, and its least-squares weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub abscissa: f64,
    pub population: f64,
    pub weight: f64,
}

/// A scan spec paired with observations taken on it.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub spec: ScanSpec,
    pub observations: Vec<Observation>,
}

impl Dataset {
    pub fn new(spec: ScanSpec, observations: Vec<Observation>) -> Result<Self> {
        if observations.is_empty() {
            return Err(Error::InvalidSpec("dataset has no observations".into()));
        }
        for o in &observations {
            if !(0.0..=1.0).contains(&o.population) {
                return Err(Error::InvalidSpec(format!(
                    "population {} outside [0,1]",
                    o.population
                )));
            }
            if !(o.weight > 0.0) || !o.weight.is_finite() {
                return Err(Error::InvalidSpec(format!("weight {} must be > 0", o.weight)));
            }
            if !o.abscissa.is_finite() {
                return Err(Error::InvalidSpec("non-finite abscissa".into()));
            }
        }
        Ok(Self { spec, observations })
    }

    /// Build a dataset from a simulated scan; weights are 1/stderr^2 where a
    /// stderr is available (with a half-count floor so p-hat values of 0 or 1
    /// do not produce infinite weight) and 1 otherwise.
    pub fn from_scan_result(result: &ScanResult) -> Result<Self> {
        let table = csvio::read_table(result.to_csv_string().as_bytes())?;
        let spec = scan_spec_from_table(&table)?;
        let observations = result
            .abscissa
            .iter()
            .enumerate()
            .map(|(i, &x)| Observation {
                abscissa: x,
                population: result.population[i],
                weight: weight_from_stderr(
                    result.population_stderr.get(i).copied(),
                    spec.shots,
                ),
            })
            .collect();
        Self::new(spec, observations)
    }

    /// Ingest the CSV format emitted by the experiment module.
    pub fn from_csv<R: std::io::BufRead>(reader: R) -> Result<Self> {
        Self::from_table(&csvio::read_table(reader)?)
    }

    pub fn from_table(table: &Table) -> Result<Self> {
        let spec = scan_spec_from_table(table)?;
        let observations = table
            .rows
            .iter()
            .map(|row| -> Result<Observation> {
                let abscissa = row
                    .first()
                    .copied()
                    .flatten()
                    .ok_or_else(|| Error::Parse("row without abscissa".into()))?;
                let population = row
                    .get(1)
                    .copied()
                    .flatten()
                    .ok_or_else(|| Error::Parse("row without population".into()))?;
                let stderr = row.get(2).copied().flatten();
                Ok(Observation {
                    abscissa,
                    population,
                    weight: weight_from_stderr(stderr, spec.shots),
                })
            })
            .collect::<Result<_>>()?;
        Self::new(spec, observations)
    }
}

/// 1/stderr^2, flooring the stderr at the half-count binomial level
/// sqrt(p_f (1-p_f) / shots) with p_f = 1/(2 shots), so rail points keep a
/// finite weight.
fn weight_from_stderr(stderr: Option<f64>, shots: u32) -> f64 {
    match stderr {
        None => 1.0,
        Some(s) => {
            let floor = if shots > 0 {
                let p = 0.5 / shots as f64;
                (p * (1.0 - p) / shots as f64).sqrt()
            } else {
                0.0
            };
            let eff = s.max(floor);
            if eff > 0.0 {
                1.0 / (eff * eff)
            } else {
                1.0
            }
        }
    }
}

/// How the datasets share the objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DatasetWeighting {
    /// Every point counts with its own weight; larger datasets matter more.
    #[default]
    PerPoint,
    /// Each dataset's weights are divided by its point count, equalizing the
    /// datasets regardless of length.
    PerDataset,
}

#[derive(Debug, Clone)]
pub struct FitOptions {
    /// Iteration cap per start; exceeding it yields a non-converged report.
    pub max_iterations: usize,
    /// Number of multi-starts (the seed start plus jittered copies).
    pub multi_starts: usize,
    /// Relative jitter applied to each parameter for the extra starts.
    pub start_jitter: f64,
    pub seed: u64,
    /// Relative objective decrease below which an iteration counts as converged.
    pub ftol: f64,
    /// Gradient infinity-norm convergence threshold.
    pub gtol: f64,
    /// Relative finite-difference step for the Jacobian.
    pub gradient_step: f64,
    /// Polish a stalled LM result with Nelder-Mead and re-run LM.
    pub nelder_mead_fallback: bool,
    /// Seed a0/a1 from a periodogram of the longest displacement scan.
    pub spectral_init: bool,
    /// Run multi-starts in parallel. Start selection tie-breaks on index, so
    /// parallel and serial runs return the same report.
    pub parallel: bool,
    pub dataset_weighting: DatasetWeighting,
    /// Hold parameters at their initial values ([`PARAM_NAMES`] order).
    /// Useful when a previously calibrated displacement map must not be
    /// refitted, e.g. against running-wave data that cannot constrain it.
    pub fixed_parameters: [bool; N_PARAMS],
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iterations: 2000,
            multi_starts: 8,
            start_jitter: 0.2,
            seed: 0,
            ftol: 1e-10,
            gtol: 1e-8,
            gradient_step: 1e-6,
            nelder_mead_fallback: true,
            spectral_init: true,
            parallel: true,
            dataset_weighting: DatasetWeighting::default(),
            fixed_parameters: [false; N_PARAMS],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    GradientNorm,
    ObjectiveDecrease,
    /// No descent step existed at maximal damping; treated as converged to
    /// evaluation noise.
    Stalled,
    IterationCap,
}

impl StopReason {
    fn from_lm(stop: LmStop) -> Self {
        match stop {
            LmStop::GradientNorm => StopReason::GradientNorm,
            LmStop::ObjectiveDecrease => StopReason::ObjectiveDecrease,
            LmStop::Stalled => StopReason::Stalled,
            LmStop::IterationCap => StopReason::IterationCap,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            StopReason::GradientNorm => "gradient_norm",
            StopReason::ObjectiveDecrease => "objective_decrease",
            StopReason::Stalled => "stalled",
            StopReason::IterationCap => "iteration_cap",
        }
    }
}

#[derive(Debug, Clone)]
pub struct FitReport {
    pub best: FitParameterSet,
    /// Weighted sum of squared residuals at `best`.
    pub residual_norm: f64,
    /// Weighted chi^2 contribution of each dataset at `best`.
    pub dataset_chisq: Vec<f64>,
    /// 1-sigma errors from (J^T J)^{-1} scaled by reduced chi^2, in
    /// [`PARAM_NAMES`] order. Flat directions report infinity; None when the
    /// constrained subspace is itself singular.
    pub std_errors: Option<[f64; 12]>,
    pub converged: bool,
    pub stop_reason: StopReason,
    /// Iterations of the winning start (including any post-fallback polish).
    pub iterations: usize,
    /// Total residual-vector evaluations across all starts.
    pub n_evaluations: usize,
    /// Objective after each accepted iteration of the winning start.
    pub history: Vec<f64>,
    /// Datasets whose model evaluation failed at the optimum (0 normally).
    pub model_failures_at_best: usize,
}

// ---------------------------------------------------------------------------
// parameter transforms

const SIGMOID_CLAMP: f64 = 1e-6;
const NBAR_FLOOR: f64 = 1e-9;

fn to_internal(p: &FitParameterSet) -> [f64; N_PARAMS] {
    let s = (p.alpha.abs() / std::f64::consts::FRAC_PI_2)
        .clamp(SIGMOID_CLAMP, 1.0 - SIGMOID_CLAMP);
    [
        p.a[0],
        p.a[1],
        p.a[2],
        p.a[3],
        p.a[4],
        p.m[0],
        p.m[1],
        p.m[2],
        p.omega1.max(f64::MIN_POSITIVE).ln(),
        p.omega2,
        (s / (1.0 - s)).ln(),
        p.nbar.max(NBAR_FLOOR).ln(),
    ]
}

fn from_internal(u: &[f64]) -> FitParameterSet {
    FitParameterSet {
        a: [u[0], u[1], u[2], u[3], u[4]],
        m: [u[5], u[6], u[7]],
        omega1: u[8].exp(),
        omega2: u[9],
        alpha: std::f64::consts::FRAC_PI_2 / (1.0 + (-u[10]).exp()),
        nbar: u[11].exp(),
    }
}

/// Characteristic physical magnitude per parameter, used for differencing
/// steps. The floors keep steps sensible when a parameter sits at zero: the
/// a_j and m_j floors are sized so a floor-scale coefficient moves gamma or
/// kappa^2 by a fringe-relevant fraction over a few kV/m of scan.
fn physical_scales(p: &FitParameterSet) -> [f64; N_PARAMS] {
    let floors = [
        1e-7, 1e-7, 2.5e-8, 1.2e-8, 6e-9, // a0..a4 (m per (kV/m)^j)
        1e-2, 5e-3, 2.5e-3, // m2..m4
        1.0,
        1e-3 * p.omega1.abs().max(1.0), // omega2 floor tied to omega1
        1e-3, // alpha
        1e-2, // nbar
    ];
    let v = p.to_array();
    std::array::from_fn(|i| v[i].abs().max(floors[i]))
}

fn internal_scales(base: &FitParameterSet) -> Vec<f64> {
    let u = to_internal(base);
    let phys = physical_scales(base);
    (0..N_PARAMS)
        .map(|i| match i {
            8 | 11 => 1e-2_f64.max(u[i].abs() * 1e-3), // log-space coordinates
            10 => 1e-2,                                // sigmoid coordinate
            9 => phys[9],
            _ => phys[i].max(u[i].abs()),
        })
        .collect()
}

// ---------------------------------------------------------------------------
// objective and residuals

fn dataset_weight_factor(weighting: DatasetWeighting, len: usize) -> f64 {
    match weighting {
        DatasetWeighting::PerPoint => 1.0,
        DatasetWeighting::PerDataset => 1.0 / len as f64,
    }
}

fn weighted_residuals(
    ctx: &ScanContext,
    params: &FitParameterSet,
    datasets: &[Dataset],
    weighting: DatasetWeighting,
    out: &mut Vec<f64>,
) {
    out.clear();
    for ds in datasets {
        let factor = dataset_weight_factor(weighting, ds.observations.len());
        let xs: Vec<f64> = ds.observations.iter().map(|o| o.abscissa).collect();
        match model_populations_relaxed(ctx, params, &ds.spec, &xs) {
            Ok(model) => {
                for (o, m) in ds.observations.iter().zip(model) {
                    out.push((factor * o.weight).sqrt() * (m - o.population));
                }
            }
            Err(_) => out.extend(std::iter::repeat_n(PENALTY_RESIDUAL, ds.observations.len())),
        }
    }
}

/// Weighted sum of squared deviations between the noiseless model and the
/// observations. Model evaluation failures contribute a large finite penalty
/// per point; an empty dataset list gives 0.
pub fn objective(ctx: &ScanContext, params: &FitParameterSet, datasets: &[Dataset]) -> f64 {
    objective_with(ctx, params, datasets, DatasetWeighting::PerPoint)
}

pub fn objective_with(
    ctx: &ScanContext,
    params: &FitParameterSet,
    datasets: &[Dataset],
    weighting: DatasetWeighting,
) -> f64 {
    let mut r = Vec::new();
    weighted_residuals(ctx, params, datasets, weighting, &mut r);
    r.iter().map(|v| v * v).sum()
}

/// Central-difference gradient of the objective with respect to the physical
/// parameters, in [`PARAM_NAMES`] order. Falls back to a forward difference
/// at the omega1 > 0 and nbar >= 0 boundaries.
pub fn numeric_gradient(
    ctx: &ScanContext,
    params: &FitParameterSet,
    datasets: &[Dataset],
    step: f64,
) -> [f64; N_PARAMS] {
    assert!(step > 0.0, "step must be positive");
    let p0 = params.to_array();
    let scales = physical_scales(params);
    let f = |v: &[f64; N_PARAMS]| {
        objective(ctx, &FitParameterSet::from_array(v), datasets)
    };
    let lower_bounded = |i: usize| i == 8 || i == 11; // omega1, nbar
    std::array::from_fn(|i| {
        let h = step * scales[i];
        let mut up = p0;
        up[i] += h;
        if lower_bounded(i) && p0[i] - h < 0.0 {
            (f(&up) - f(&p0)) / h
        } else {
            let mut dn = p0;
            dn[i] -= h;
            (f(&up) - f(&dn)) / (2.0 * h)
        }
    })
}

// ---------------------------------------------------------------------------
// the fit

/// Simultaneous least-squares fit of all datasets.
///
/// Returns a local optimum; `residual_norm` never exceeds the objective at
/// `initial`. Exceeding the iteration cap yields `converged = false`, never
/// an error.
pub fn fit(
    ctx: &ScanContext,
    datasets: &[Dataset],
    initial: &FitParameterSet,
    options: &FitOptions,
) -> Result<FitReport> {
    if datasets.is_empty() {
        return Err(Error::InvalidSpec("fit requires at least one dataset".into()));
    }
    initial.validate()?;

    let weighting = options.dataset_weighting;
    let free: Vec<usize> = (0..N_PARAMS).filter(|&i| !options.fixed_parameters[i]).collect();
    if free.is_empty() {
        return Err(Error::InvalidSpec("all parameters are fixed".into()));
    }

    // data-driven fringe seed, kept only if it actually helps; meaningless
    // when the phase map is pinned by the caller
    let mut base = *initial;
    if options.spectral_init && !options.fixed_parameters[0] && !options.fixed_parameters[1] {
        if let Some(candidate) = spectral::phase_seed(ctx, initial, datasets) {
            if objective_with(ctx, &candidate, datasets, weighting)
                < objective_with(ctx, &base, datasets, weighting)
            {
                base = candidate;
            }
        }
    }

    let u_base = to_internal(&base);
    let unpack = |reduced: &[f64]| -> [f64; N_PARAMS] {
        let mut full = u_base;
        for (k, &i) in free.iter().enumerate() {
            full[i] = reduced[k];
        }
        full
    };
    let residual_fn = |reduced: &[f64]| -> Vec<f64> {
        let p = from_internal(&unpack(reduced));
        let mut r = Vec::new();
        weighted_residuals(ctx, &p, datasets, weighting, &mut r);
        r
    };

    let scales_full = internal_scales(&base);
    let scales: Vec<f64> = free.iter().map(|&i| scales_full[i]).collect();
    let lm_cfg = LmConfig {
        max_iterations: options.max_iterations,
        ftol: options.ftol,
        gtol: options.gtol,
        step: options.gradient_step,
        scales: scales.clone(),
    };

    // multi-starts: the base plus jittered copies of it (free components only)
    let starts: Vec<Vec<f64>> = (0..options.multi_starts.max(1))
        .map(|k| {
            if k == 0 {
                return free.iter().map(|&i| u_base[i]).collect();
            }
            let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
            rng.set_stream(k as u64);
            let v = base.to_array();
            let jittered: [f64; N_PARAMS] = std::array::from_fn(|i| {
                if options.fixed_parameters[i] {
                    v[i]
                } else {
                    v[i] * (1.0 + options.start_jitter * (2.0 * rng.random::<f64>() - 1.0))
                }
            });
            let u = to_internal(&FitParameterSet::from_array(&jittered));
            free.iter().map(|&i| u[i]).collect()
        })
        .collect();

    let run = |(idx, u0): (usize, &Vec<f64>)| {
        let out = levmar::minimize(&residual_fn, u0, &lm_cfg);
        (idx, out)
    };
    let mut outcomes: Vec<(usize, levmar::LmResult)> = if options.parallel {
        starts.par_iter().enumerate().map(run).collect()
    } else {
        starts.iter().enumerate().map(run).collect()
    };
    outcomes.sort_by(|a, b| a.1.objective.total_cmp(&b.1.objective).then(a.0.cmp(&b.0)));
    let mut best = outcomes.swap_remove(0).1;
    let mut n_evaluations: usize = best.n_evals + outcomes.iter().map(|o| o.1.n_evals).sum::<usize>();

    // Nelder-Mead rescue for a stalled LM, then one more LM polish
    if best.stop == LmStop::Stalled && options.nelder_mead_fallback {
        let obj_fn = |u: &[f64]| residual_fn(u).iter().map(|v| v * v).sum::<f64>();
        let nm = neldermead::minimize(&obj_fn, &best.x, &scales, 600);
        n_evaluations += nm.n_evals;
        if nm.objective < best.objective {
            let polished = levmar::minimize(&residual_fn, &nm.x, &lm_cfg);
            n_evaluations += polished.n_evals;
            if polished.objective < best.objective {
                let mut history = best.history.clone();
                history.extend(polished.history.iter().copied().filter(|&v| v <= best.objective));
                best = levmar::LmResult { history, ..polished };
            }
        }
    }

    let mut params = from_internal(&unpack(&best.x));
    // fixed parameters report exactly the caller's values, bypassing the
    // transform round-trip
    let initial_values = initial.to_array();
    let mut v = params.to_array();
    for i in 0..N_PARAMS {
        if options.fixed_parameters[i] {
            v[i] = initial_values[i];
        }
    }
    params = FitParameterSet::from_array(&v);
    canonicalize(ctx, &mut params, &options.fixed_parameters);

    // recompute per-dataset chi^2 and failures at the canonical optimum
    let mut dataset_chisq = Vec::with_capacity(datasets.len());
    let mut model_failures_at_best = 0;
    let mut residual_norm = 0.0;
    for ds in datasets {
        let factor = dataset_weight_factor(weighting, ds.observations.len());
        let xs: Vec<f64> = ds.observations.iter().map(|o| o.abscissa).collect();
        let chisq = match model_populations_relaxed(ctx, &params, &ds.spec, &xs) {
            Ok(model) => ds
                .observations
                .iter()
                .zip(model)
                .map(|(o, m)| factor * o.weight * (m - o.population) * (m - o.population))
                .sum(),
            Err(_) => {
                model_failures_at_best += 1;
                ds.observations.len() as f64 * PENALTY_RESIDUAL * PENALTY_RESIDUAL
            }
        };
        residual_norm += chisq;
        dataset_chisq.push(chisq);
    }

    let n_points: usize = datasets.iter().map(|d| d.observations.len()).sum();
    let std_errors = standard_errors(
        ctx,
        &params,
        datasets,
        weighting,
        residual_norm,
        n_points,
        &options.fixed_parameters,
    );

    let stop_reason = StopReason::from_lm(best.stop);
    Ok(FitReport {
        best: params,
        residual_norm,
        dataset_chisq,
        std_errors,
        converged: stop_reason != StopReason::IterationCap,
        stop_reason,
        iterations: best.iterations,
        n_evaluations,
        history: best.history,
        model_failures_at_best,
    })
}

/// Map the optimum onto the canonical sheet: omega2 >= 0 (a negative fitted
/// omega2 is the same model with the fringe phase shifted a quarter period),
/// alpha >= 0, and a0 wrapped to one fringe period.
///
/// When a0 is held fixed the quarter-period shift is unavailable, so a
/// pinned-phase fit may report a signed omega2 whose magnitude is the
/// physical amplitude; the wrap is likewise skipped.
fn canonicalize(ctx: &ScanContext, p: &mut FitParameterSet, fixed: &[bool; N_PARAMS]) {
    if !fixed[10] {
        p.alpha = p.alpha.abs();
    }
    if fixed[0] || fixed[9] {
        return;
    }
    if p.omega2 < 0.0 {
        p.omega2 = -p.omega2;
        p.a[0] -= ctx.wavelength / (4.0 * p.alpha.cos());
    }
    let fringe = ctx.wavelength / (2.0 * p.alpha.cos());
    p.a[0] = p.a[0].rem_euclid(fringe);
}

/// 1-sigma parameter errors from the Gauss-Newton covariance at the optimum.
/// Directions the data do not constrain (Jacobian column numerically zero)
/// report infinity and are excluded from the inversion; fixed parameters
/// report zero.
#[allow(clippy::too_many_arguments)]
fn standard_errors(
    ctx: &ScanContext,
    params: &FitParameterSet,
    datasets: &[Dataset],
    weighting: DatasetWeighting,
    residual_norm: f64,
    n_points: usize,
    fixed: &[bool; N_PARAMS],
) -> Option<[f64; N_PARAMS]> {
    let p0 = params.to_array();
    let scales = physical_scales(params);
    let eval = |v: &[f64; N_PARAMS]| -> Vec<f64> {
        let p = FitParameterSet::from_array(v);
        let mut r = Vec::new();
        weighted_residuals(ctx, &p, datasets, weighting, &mut r);
        r
    };

    let npts: usize = datasets.iter().map(|d| d.observations.len()).sum();
    let mut jac = vec![0.0; npts * N_PARAMS];
    for j in 0..N_PARAMS {
        let h = 1e-6 * scales[j];
        let mut up = p0;
        up[j] += h;
        let mut dn = p0;
        dn[j] -= h;
        let (rp, rm) = (eval(&up), eval(&dn));
        if rp.len() != npts || rm.len() != npts {
            return None;
        }
        for k in 0..npts {
            jac[k * N_PARAMS + j] = (rp[k] - rm[k]) / (2.0 * h);
        }
    }

    // column norms identify flat directions
    let mut col_norm = [0.0f64; N_PARAMS];
    for k in 0..npts {
        for j in 0..N_PARAMS {
            col_norm[j] += jac[k * N_PARAMS + j] * jac[k * N_PARAMS + j];
        }
    }
    let max_norm = col_norm.iter().fold(0.0f64, |m, &v| m.max(v));
    if max_norm == 0.0 {
        return None;
    }
    let active: Vec<usize> = (0..N_PARAMS)
        .filter(|&j| !fixed[j] && col_norm[j] > max_norm * 1e-24)
        .collect();
    let na = active.len();
    if na == 0 {
        return None;
    }

    let mut ata = vec![0.0; na * na];
    for k in 0..npts {
        for (ai, &i) in active.iter().enumerate() {
            let ji = jac[k * N_PARAMS + i];
            for (aj, &j) in active.iter().enumerate().skip(ai) {
                ata[ai * na + aj] += ji * jac[k * N_PARAMS + j];
            }
        }
    }
    for i in 0..na {
        for j in 0..i {
            ata[i * na + j] = ata[j * na + i];
        }
    }
    let cov = linalg::invert(&ata, na)?;
    let dof = n_points.saturating_sub(na);
    let red_chisq = if dof > 0 { residual_norm / dof as f64 } else { 1.0 };

    let mut errors = [f64::INFINITY; N_PARAMS];
    for (i, is_fixed) in fixed.iter().enumerate() {
        if *is_fixed {
            errors[i] = 0.0;
        }
    }
    for (ai, &i) in active.iter().enumerate() {
        let var = red_chisq * cov[ai * na + ai];
        if var < 0.0 {
            return None;
        }
        errors[i] = var.sqrt();
    }
    Some(errors)
}

// ---------------------------------------------------------------------------
// report serialization

impl FitReport {
    /// Human-readable summary.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str("fit report\n==========\n");
        s.push_str(&format!(
            "converged: {} ({})\niterations: {}\nevaluations: {}\nresidual norm: {}\n",
            self.converged,
            self.stop_reason.name(),
            self.iterations,
            self.n_evaluations,
            csvio::format_f64(self.residual_norm),
        ));
        s.push_str("\nparameters (1-sigma):\n");
        let values = self.best.to_array();
        for (i, name) in PARAM_NAMES.iter().enumerate() {
            let err = match &self.std_errors {
                Some(e) if e[i].is_finite() => format!(" +- {}", csvio::format_f64(e[i])),
                Some(_) => " (unconstrained)".to_string(),
                None => " (stderr unavailable)".to_string(),
            };
            s.push_str(&format!("  {name:>7} = {}{err}\n", csvio::format_f64(values[i])));
        }
        s.push_str(&format!(
            "  omega2/omega1 = {}\n",
            csvio::format_f64(self.best.omega2 / self.best.omega1)
        ));
        s.push_str("\nper-dataset chi^2:\n");
        for (i, c) in self.dataset_chisq.iter().enumerate() {
            s.push_str(&format!("  dataset{} = {}\n", i, csvio::format_f64(*c)));
        }
        s
    }

    /// Machine-readable key=value block.
    pub fn to_key_value(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("converged={}\n", self.converged));
        s.push_str(&format!("stop_reason={}\n", self.stop_reason.name()));
        s.push_str(&format!("iterations={}\n", self.iterations));
        s.push_str(&format!("n_evaluations={}\n", self.n_evaluations));
        s.push_str(&format!("residual_norm={}\n", csvio::format_f64(self.residual_norm)));
        s.push_str(&format!("model_failures_at_best={}\n", self.model_failures_at_best));
        let values = self.best.to_array();
        for (i, name) in PARAM_NAMES.iter().enumerate() {
            s.push_str(&format!("param.{name}={}\n", csvio::format_f64(values[i])));
        }
        match &self.std_errors {
            Some(errs) => {
                for (i, name) in PARAM_NAMES.iter().enumerate() {
                    s.push_str(&format!("stderr.{name}={}\n", csvio::format_f64(errs[i])));
                }
            }
            None => s.push_str("stderr.unavailable=true\n"),
        }
        for (i, c) in self.dataset_chisq.iter().enumerate() {
            s.push_str(&format!("chisq.dataset{i}={}\n", csvio::format_f64(*c)));
        }
        s
    }
}
