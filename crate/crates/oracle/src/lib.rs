//! Numerical oracles that share no code with `pfp-core`.
//!
//! * [`quadrature_posterior`]: posterior mean and SD of a Normal mean by
//!   Simpson integration of prior × likelihood on a dense grid.
//! * [`brute_force_fit`]: dense grid search followed by coordinate
//!   refinement of an arbitrary RMSD function.

/// Unnormalized log posterior for `θ` given `n` observations with mean
/// `ybar` and known SD `s`, under a `N(mu0, sigma0²)` prior.
fn log_density(theta: f64, mu0: f64, sigma0: f64, n: f64, ybar: f64, s: f64) -> f64 {
    let prior = -0.5 * ((theta - mu0) / sigma0).powi(2);
    let likelihood = -0.5 * n * ((theta - ybar) / s).powi(2);
    prior + likelihood
}

/// Ternary search for the mode of a unimodal function on `[lo, hi]`.
fn mode(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..300 {
        let a = lo + (hi - lo) / 3.0;
        let b = hi - (hi - lo) / 3.0;
        if f(a) < f(b) {
            lo = a;
        } else {
            hi = b;
        }
    }
    0.5 * (lo + hi)
}

/// Distance from `start` in direction `dir` at which `f` has dropped by
/// `drop` below `f(start)`.
fn half_width(f: &impl Fn(f64) -> f64, start: f64, dir: f64, drop: f64) -> f64 {
    let top = f(start);
    let mut step = 1e-6;
    while top - f(start + dir * step) < drop {
        step *= 2.0;
    }
    let (mut lo, mut hi) = (step / 2.0, step);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if top - f(start + dir * mid) < drop {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// `(mean, sd)` of the posterior by composite Simpson quadrature.
pub fn quadrature_posterior(mu0: f64, sigma0: f64, n: u32, ybar: f64, s: f64) -> (f64, f64) {
    let n = n as f64;
    let f = |t: f64| log_density(t, mu0, sigma0, n, ybar, s);
    let span = 10.0 * (sigma0 + s + mu0.abs() + ybar.abs());
    let centre = mode(f, mu0.min(ybar) - span, mu0.max(ybar) + span);
    // exp(-60) is far below any tolerance we check against.
    let left = centre - half_width(&f, centre, -1.0, 60.0);
    let right = centre + half_width(&f, centre, 1.0, 60.0);

    let intervals = 4000usize;
    let h = (right - left) / intervals as f64;
    let peak = f(centre);
    let (mut z, mut m1, mut m2) = (0.0, 0.0, 0.0);
    for i in 0..=intervals {
        let t = left + h * i as f64;
        let w = if i == 0 || i == intervals {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let d = w * (f(t) - peak).exp();
        z += d;
        m1 += d * (t - centre);
        m2 += d * (t - centre) * (t - centre);
    }
    let offset = m1 / z;
    let variance = m2 / z - offset * offset;
    (centre + offset, variance.max(0.0).sqrt())
}

/// Minimizes `objective(mu0, sigma0)` over a box by a dense grid followed by
/// repeated local grid refinement around the incumbent. Returns
/// `(mu0, sigma0, value)`.
pub fn brute_force_fit(
    objective: impl Fn(f64, f64) -> f64,
    mu_range: (f64, f64),
    sigma_range: (f64, f64),
    step: f64,
) -> (f64, f64, f64) {
    let mut best = (mu_range.0, sigma_range.0, f64::INFINITY);
    let mu_steps = ((mu_range.1 - mu_range.0) / step).round() as usize;
    let sigma_steps = ((sigma_range.1 - sigma_range.0) / step).round() as usize;
    for i in 0..=mu_steps {
        let m = mu_range.0 + step * i as f64;
        for j in 0..=sigma_steps {
            let s = sigma_range.0 + step * j as f64;
            let v = objective(m, s);
            if v < best.2 {
                best = (m, s, v);
            }
        }
    }
    let mut radius = step;
    while radius > 1e-10 {
        let (cm, cs, _) = best;
        for i in -10..=10 {
            for j in -10..=10 {
                let m = cm + radius * i as f64 / 10.0;
                let s = (cs + radius * j as f64 / 10.0).clamp(sigma_range.0, sigma_range.1);
                let v = objective(m, s);
                if v < best.2 {
                    best = (m, s, v);
                }
            }
        }
        radius /= 4.0;
    }
    best
}
