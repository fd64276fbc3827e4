//! Downhill-simplex fallback for when Levenberg-Marquardt stalls.

#[derive(Debug, Clone)]
pub(crate) struct NmResult {
    pub x: Vec<f64>,
    pub objective: f64,
    pub n_evals: usize,
}

/// Standard Nelder-Mead (reflection 1, expansion 2, contraction 1/2,
/// shrink 1/2). The initial simplex steps 5% of each parameter's scale.
pub(crate) fn minimize<F: Fn(&[f64]) -> f64>(
    objective: &F,
    x0: &[f64],
    scales: &[f64],
    max_evals: usize,
) -> NmResult {
    let n = x0.len();
    let mut evals = 0;
    let eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        objective(x)
    };

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for j in 0..n {
        let mut v = x0.to_vec();
        v[j] += 0.05 * scales[j].max(x0[j].abs() * 0.05);
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| eval(v, &mut evals)).collect();

    while evals < max_evals {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
        let best = order[0];
        let worst = order[n];
        let second_worst = order[n - 1];

        let spread = (values[worst] - values[best]).abs();
        if spread <= 1e-14 * values[best].abs().max(1e-300) {
            break;
        }

        // centroid of all but the worst
        let mut centroid = vec![0.0; n];
        for (i, v) in simplex.iter().enumerate() {
            if i == worst {
                continue;
            }
            for k in 0..n {
                centroid[k] += v[k] / n as f64;
            }
        }

        let lerp = |t: f64| -> Vec<f64> {
            (0..n)
                .map(|k| centroid[k] + t * (centroid[k] - simplex[worst][k]))
                .collect()
        };

        let reflected = lerp(1.0);
        let f_reflected = eval(&reflected, &mut evals);
        if f_reflected < values[best] {
            let expanded = lerp(2.0);
            let f_expanded = eval(&expanded, &mut evals);
            if f_expanded < f_reflected {
                simplex[worst] = expanded;
                values[worst] = f_expanded;
            } else {
                simplex[worst] = reflected;
                values[worst] = f_reflected;
            }
        } else if f_reflected < values[second_worst] {
            simplex[worst] = reflected;
            values[worst] = f_reflected;
        } else {
            let contracted = lerp(-0.5);
            let f_contracted = eval(&contracted, &mut evals);
            if f_contracted < values[worst] {
                simplex[worst] = contracted;
                values[worst] = f_contracted;
            } else {
                // shrink toward the best vertex
                let best_vertex = simplex[best].clone();
                for i in 0..=n {
                    if i == best {
                        continue;
                    }
                    for k in 0..n {
                        simplex[i][k] = 0.5 * (simplex[i][k] + best_vertex[k]);
                    }
                    values[i] = eval(&simplex[i].clone(), &mut evals);
                }
            }
        }
    }

    let best = (0..=n).min_by(|&i, &j| values[i].total_cmp(&values[j])).unwrap();
    NmResult { x: simplex[best].clone(), objective: values[best], n_evals: evals }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimizes_rosenbrock() {
        let f = |p: &[f64]| (1.0 - p[0]).powi(2) + 100.0 * (p[1] - p[0] * p[0]).powi(2);
        let out = minimize(&f, &[-1.2, 1.0], &[1.0, 1.0], 4000);
        assert!((out.x[0] - 1.0).abs() < 1e-3, "x = {:?}", out.x);
        assert!((out.x[1] - 1.0).abs() < 1e-3);
    }

    #[test]
    fn respects_eval_budget() {
        let f = |p: &[f64]| p.iter().map(|v| v * v).sum::<f64>();
        let out = minimize(&f, &[5.0, -3.0, 2.0], &[1.0; 3], 50);
        assert!(out.n_evals <= 55); // budget plus one shrink round
    }
}
