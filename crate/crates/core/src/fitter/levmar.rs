//! Levenberg-Marquardt with a central-difference Jacobian.
//!
//! The model is smooth but has no closed-form derivatives through the thermal
//! sum, so the Jacobian is numeric. Damping multiplies diag(J^T J), which
//! makes the step invariant under a uniform rescaling of all residuals.

use super::linalg::solve;

#[derive(Debug, Clone)]
pub(crate) struct LmConfig {
    pub max_iterations: usize,
    /// Converged when the relative objective decrease over one accepted
    /// iteration falls below this.
    pub ftol: f64,
    /// Converged when the infinity norm of J^T r falls below this.
    pub gtol: f64,
    /// Relative finite-difference step.
    pub step: f64,
    /// Characteristic magnitude per parameter, for differencing steps.
    pub scales: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum LmStop {
    GradientNorm,
    ObjectiveDecrease,
    /// No descent step found at maximal damping; the iterate is a local
    /// minimum to evaluation noise.
    Stalled,
    IterationCap,
}

#[derive(Debug, Clone)]
pub(crate) struct LmResult {
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub stop: LmStop,
    pub history: Vec<f64>,
    pub n_evals: usize,
}

fn sum_sq(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

pub(crate) fn minimize<F: Fn(&[f64]) -> Vec<f64>>(
    residuals: &F,
    x0: &[f64],
    cfg: &LmConfig,
) -> LmResult {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut r = residuals(&x);
    let mut obj = sum_sq(&r);
    let mut n_evals = 1;
    let mut history = vec![obj];
    let mut lambda = 1e-3;

    for iteration in 0..cfg.max_iterations {
        let npts = r.len();
        // central-difference Jacobian, column-major per parameter
        let mut jac = vec![0.0; npts * n];
        for j in 0..n {
            let h = cfg.step * cfg.scales[j].max(x[j].abs());
            let mut xp = x.clone();
            xp[j] += h;
            let rp = residuals(&xp);
            let mut xm = x.clone();
            xm[j] -= h;
            let rm = residuals(&xm);
            n_evals += 2;
            let inv = 0.5 / h;
            for k in 0..npts {
                jac[k * n + j] = (rp[k] - rm[k]) * inv;
            }
        }

        // g = J^T r, A = J^T J
        let mut g = vec![0.0; n];
        let mut a = vec![0.0; n * n];
        for k in 0..npts {
            let row = &jac[k * n..(k + 1) * n];
            for i in 0..n {
                g[i] += row[i] * r[k];
                for j in i..n {
                    a[i * n + j] += row[i] * row[j];
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                a[i * n + j] = a[j * n + i];
            }
        }

        let gnorm = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if gnorm < cfg.gtol {
            return LmResult { x, objective: obj, iterations: iteration, stop: LmStop::GradientNorm, history, n_evals };
        }

        // inner damping loop
        let mut accepted = false;
        for _ in 0..40 {
            let mut damped = a.clone();
            let diag_floor = (0..n).map(|i| a[i * n + i]).fold(0.0f64, f64::max) * 1e-14 + 1e-300;
            for i in 0..n {
                damped[i * n + i] += lambda * a[i * n + i].max(diag_floor);
            }
            let rhs: Vec<f64> = g.iter().map(|v| -v).collect();
            let Some(delta) = solve(&damped, &rhs, n) else {
                lambda *= 10.0;
                continue;
            };
            let xt: Vec<f64> = x.iter().zip(&delta).map(|(xi, di)| xi + di).collect();
            let rt = residuals(&xt);
            n_evals += 1;
            let objt = sum_sq(&rt);
            if objt < obj {
                let decrease = (obj - objt) / obj.max(1e-300);
                x = xt;
                r = rt;
                obj = objt;
                history.push(obj);
                lambda = (lambda / 3.0).max(1e-14);
                accepted = true;
                if decrease < cfg.ftol {
                    return LmResult { x, objective: obj, iterations: iteration + 1, stop: LmStop::ObjectiveDecrease, history, n_evals };
                }
                break;
            }
            lambda *= 10.0;
            if lambda > 1e14 {
                break;
            }
        }
        if !accepted {
            return LmResult { x, objective: obj, iterations: iteration, stop: LmStop::Stalled, history, n_evals };
        }
    }
    LmResult {
        iterations: cfg.max_iterations,
        stop: LmStop::IterationCap,
        objective: obj,
        x,
        history,
        n_evals,
    }
}
