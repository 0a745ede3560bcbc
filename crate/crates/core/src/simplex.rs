//! Nelder-Mead downhill simplex minimizer.

/// Tuning and termination settings.
#[derive(Debug, Clone)]
pub struct SimplexOptions {
    /// Initial step along each coordinate axis.
    pub step: Vec<f64>,
    /// Stop once `max f − min f` over the vertices falls to this value...
    pub f_tol: f64,
    /// ...and every vertex lies within this distance of the best one.
    pub x_tol: f64,
    pub max_iterations: usize,
}

#[derive(Debug, Clone)]
pub struct SimplexOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

/// Minimizes `f` starting from `x0`. Non-finite objective values are treated
/// as `+∞`.
pub fn minimize<F>(mut f: F, x0: &[f64], options: &SimplexOptions) -> SimplexOutcome
where
    F: FnMut(&[f64]) -> f64,
{
    let dim = x0.len();
    assert!(dim >= 1, "simplex needs at least one dimension");
    assert_eq!(options.step.len(), dim, "one step per coordinate");

    let mut evaluations = 0usize;
    let mut eval = |x: &[f64]| {
        evaluations += 1;
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };

    let mut vertices: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    vertices.push((x0.to_vec(), eval(x0)));
    for i in 0..dim {
        let mut x = x0.to_vec();
        x[i] += options.step[i];
        let v = eval(&x);
        vertices.push((x, v));
    }

    let mut iterations = 0usize;
    let mut converged = false;
    loop {
        vertices.sort_by(|a, b| a.1.total_cmp(&b.1));
        if has_converged(&vertices, options) {
            converged = true;
            break;
        }
        if iterations >= options.max_iterations {
            break;
        }
        iterations += 1;

        let worst = dim;
        let centroid: Vec<f64> = (0..dim)
            .map(|j| vertices[..worst].iter().map(|(x, _)| x[j]).sum::<f64>() / dim as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&vertices[worst].0)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let reflected = along(REFLECT);
        let f_reflected = eval(&reflected);
        let f_best = vertices[0].1;
        let f_second_worst = vertices[worst - 1].1;
        let f_worst = vertices[worst].1;

        if f_reflected < f_best {
            let expanded = along(REFLECT * EXPAND);
            let f_expanded = eval(&expanded);
            vertices[worst] = if f_expanded < f_reflected {
                (expanded, f_expanded)
            } else {
                (reflected, f_reflected)
            };
            continue;
        }
        if f_reflected < f_second_worst {
            vertices[worst] = (reflected, f_reflected);
            continue;
        }

        let (candidate, threshold) = if f_reflected < f_worst {
            (along(REFLECT * CONTRACT), f_reflected)
        } else {
            (along(-CONTRACT), f_worst)
        };
        let f_candidate = eval(&candidate);
        if f_candidate < threshold {
            vertices[worst] = (candidate, f_candidate);
            continue;
        }

        let best = vertices[0].0.clone();
        for vertex in vertices.iter_mut().skip(1) {
            for (xj, bj) in vertex.0.iter_mut().zip(&best) {
                *xj = bj + SHRINK * (*xj - bj);
            }
            vertex.1 = eval(&vertex.0);
        }
    }

    let (x, value) = vertices.swap_remove(0);
    SimplexOutcome {
        x,
        value,
        iterations,
        evaluations,
        converged,
    }
}

// A NaN spread must read as not converged, hence the negated comparison.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
fn has_converged(sorted: &[(Vec<f64>, f64)], options: &SimplexOptions) -> bool {
    let best = &sorted[0];
    let worst = &sorted[sorted.len() - 1];
    if !(worst.1 - best.1 <= options.f_tol) {
        return false;
    }
    sorted[1..].iter().all(|(x, _)| {
        x.iter()
            .zip(&best.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
            <= options.x_tol
    })
}
