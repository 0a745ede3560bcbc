//! Fits the prior `(μ₀, σ₀)` that minimizes the RMSD between an expert's
//! responses and the posterior means that prior implies.
//!
//! The search combines three sources of candidates and keeps the best:
//!
//! * the two boundaries, `σ₀ = 0` (closed-form `μ₀` = mean response) and
//!   `σ₀ = cap` (with `μ₀` optimized exactly for that `σ₀`);
//! * a Nelder-Mead simplex over `(μ₀, softplus⁻¹(σ₀))`, restarted from a
//!   fixed log-spaced ladder of `σ₀` seeds.
//!
//! For fixed `σ₀` every posterior mean is affine in `μ₀`, so the best `μ₀` is
//! a weighted least-squares solution. Each simplex result is polished with it.
//!
//! All coordinates are measured relative to the mean response and in units
//! of the sampling SD, which makes the search path invariant under
//! shifting and rescaling the problem. Rows are sorted canonically before
//! any arithmetic, so scenario order cannot affect the result.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    conjugate_mean, discrepancy, posterior_mean, prior_weight, DataModelConfig, NormalPrior,
    ResponseSet, ScenarioSet,
};
use crate::simplex::{self, SimplexOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitOptions {
    /// Upper bound on `σ₀`, in the same units as the responses.
    pub sigma0_cap: f64,
    /// Number of simplex restarts.
    pub multistart_count: usize,
    /// Termination tolerance on RMSD.
    pub convergence_tol: f64,
    /// Iteration limit per simplex run.
    pub max_iterations: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            sigma0_cap: 1000.0,
            multistart_count: 9,
            convergence_tol: 1e-10,
            max_iterations: 10_000,
        }
    }
}

impl FitOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma0_cap.is_finite() && self.sigma0_cap > 0.0) {
            return Err(Error::InvalidOptions("sigma0_cap must be positive and finite".into()));
        }
        if self.multistart_count == 0 {
            return Err(Error::InvalidOptions("multistart_count must be at least 1".into()));
        }
        if !(self.convergence_tol.is_finite() && self.convergence_tol > 0.0) {
            return Err(Error::InvalidOptions("convergence_tol must be positive".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidOptions("max_iterations must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitFlag {
    PointMassBoundary,
    SigmaCapReached,
    Mu0WeaklyIdentified,
    Converged,
}

/// Fitted value and discrepancy for one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFit {
    pub scenario_id: String,
    pub theta_tilde: f64,
    pub fitted_mean: f64,
    pub discrepancy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    #[serde(flatten)]
    pub prior: NormalPrior,
    pub rmsd: f64,
    /// One entry per scenario, in scenario-set order.
    pub per_scenario: Vec<ScenarioFit>,
    pub flags: BTreeSet<FitFlag>,
}

impl FitResult {
    pub fn has_flag(&self, flag: FitFlag) -> bool {
        self.flags.contains(&flag)
    }
}

#[derive(Debug, Clone, Copy)]
struct Row {
    n: f64,
    ybar: f64,
    theta: f64,
}

/// The RMSD objective over canonically ordered rows.
#[derive(Debug, Clone)]
struct Objective {
    rows: Vec<Row>,
    sigma_data: f64,
}

impl Objective {
    fn new(responses: &ResponseSet, scenarios: &ScenarioSet, config: &DataModelConfig) -> Result<Self> {
        let values = responses.values_in_order(scenarios)?;
        let mut rows: Vec<Row> = scenarios
            .iter()
            .zip(values)
            .map(|(s, theta)| {
                let (n, ybar) = s.data().map_or((0.0, 0.0), |(n, y)| (n as f64, y));
                Row { n, ybar, theta }
            })
            .collect();
        rows.sort_by(|a, b| {
            a.n.total_cmp(&b.n)
                .then(a.ybar.total_cmp(&b.ybar))
                .then(a.theta.total_cmp(&b.theta))
        });
        Ok(Self {
            rows,
            sigma_data: config.sigma_data,
        })
    }

    fn rmsd(&self, mu0: f64, sigma0: f64) -> f64 {
        let total: f64 = self
            .rows
            .iter()
            .map(|r| {
                let fitted = if r.n == 0.0 {
                    mu0
                } else {
                    conjugate_mean(mu0, sigma0, r.n, r.ybar, self.sigma_data)
                };
                let d = r.theta - fitted;
                d * d
            })
            .sum();
        (total / self.rows.len() as f64).sqrt()
    }

    /// Least-squares `μ₀` for a fixed `σ₀`.
    fn best_mu0(&self, sigma0: f64) -> f64 {
        let (num, den) = self.rows.iter().fold((0.0, 0.0), |(num, den), r| {
            let w = prior_weight(sigma0, r.n, self.sigma_data);
            (num + w * (r.theta - (1.0 - w) * r.ybar), den + w * w)
        });
        num / den
    }

    /// Mean response, accumulated about the first value so that constant
    /// responses give that constant exactly.
    fn mean_theta(&self) -> f64 {
        let origin = self.rows[0].theta;
        origin + self.rows.iter().map(|r| r.theta - origin).sum::<f64>() / self.rows.len() as f64
    }
}

fn softplus(z: f64) -> f64 {
    if z > 30.0 {
        z
    } else {
        z.exp().ln_1p()
    }
}

fn softplus_inv(y: f64) -> f64 {
    if y > 30.0 {
        y
    } else {
        y.exp_m1().ln()
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    prior: NormalPrior,
    rmsd: f64,
    converged: bool,
}

fn check_preconditions(
    responses: &ResponseSet,
    scenarios: &ScenarioSet,
    config: &DataModelConfig,
    options: &FitOptions,
) -> Result<()> {
    options.validate()?;
    config.validate()?;
    responses.validate_against(scenarios)?;
    if scenarios.distinct_designs() < 2 {
        return Err(Error::Unidentifiable(
            "need at least two scenarios with distinct (sample size, mean change)".into(),
        ));
    }
    Ok(())
}

fn boundaries(objective: &Objective, options: &FitOptions) -> [Candidate; 2] {
    let point_mu = objective.mean_theta();
    let cap = options.sigma0_cap;
    let cap_mu = objective.best_mu0(cap);
    [
        Candidate {
            prior: NormalPrior::point_mass(point_mu),
            rmsd: objective.rmsd(point_mu, 0.0),
            converged: true,
        },
        Candidate {
            prior: NormalPrior {
                mu0: cap_mu,
                sigma0: cap,
            },
            rmsd: objective.rmsd(cap_mu, cap),
            converged: true,
        },
    ]
}

/// The closed-form boundary optima: the point mass at the mean response and
/// the `σ₀ = sigma0_cap` prior with its best `μ₀`, each with its RMSD.
pub fn boundary_candidates(
    responses: &ResponseSet,
    scenarios: &ScenarioSet,
    config: &DataModelConfig,
    options: &FitOptions,
) -> Result<Vec<(NormalPrior, f64)>> {
    check_preconditions(responses, scenarios, config, options)?;
    let objective = Objective::new(responses, scenarios, config)?;
    Ok(boundaries(&objective, options)
        .iter()
        .map(|c| (c.prior, c.rmsd))
        .collect())
}

fn seed_sigmas(sigma_data: f64, options: &FitOptions) -> Vec<f64> {
    let m = options.multistart_count;
    (0..m)
        .map(|i| {
            let exponent = if m == 1 {
                0.0
            } else {
                -2.0 + 4.0 * i as f64 / (m - 1) as f64
            };
            (sigma_data * 10f64.powf(exponent)).min(options.sigma0_cap)
        })
        .collect()
}

fn simplex_run(objective: &Objective, seed_sigma: f64, options: &FitOptions) -> Candidate {
    let s = objective.sigma_data;
    let cap = options.sigma0_cap;
    let center = objective.mean_theta();
    let to_prior = |x: &[f64]| -> (f64, f64) { (center + s * x[0], (s * softplus(x[1])).min(cap)) };

    let x0 = [
        (objective.best_mu0(seed_sigma) - center) / s,
        softplus_inv(seed_sigma / s),
    ];
    let simplex_options = SimplexOptions {
        step: vec![0.1, 0.5],
        f_tol: options.convergence_tol,
        x_tol: 1e-9,
        max_iterations: options.max_iterations,
    };
    let outcome = simplex::minimize(
        |x| {
            let (mu0, sigma0) = to_prior(x);
            objective.rmsd(mu0, sigma0)
        },
        &x0,
        &simplex_options,
    );

    let (mu0, sigma0) = to_prior(&outcome.x);
    let polished_mu0 = objective.best_mu0(sigma0);
    let polished = objective.rmsd(polished_mu0, sigma0);
    let (mu0, rmsd) = if polished <= outcome.value {
        (polished_mu0, polished)
    } else {
        (mu0, outcome.value)
    };
    Candidate {
        prior: NormalPrior { mu0, sigma0 },
        rmsd,
        converged: outcome.converged,
    }
}

/// Finds the RMSD-minimizing prior over `μ₀ ∈ ℝ`, `σ₀ ∈ [0, sigma0_cap]`.
pub fn fit_prior(
    responses: &ResponseSet,
    scenarios: &ScenarioSet,
    config: &DataModelConfig,
    options: &FitOptions,
) -> Result<FitResult> {
    check_preconditions(responses, scenarios, config, options)?;
    let objective = Objective::new(responses, scenarios, config)?;

    let mut best = boundaries(&objective, options)[0];
    let [_, cap_candidate] = boundaries(&objective, options);
    let interior = seed_sigmas(config.sigma_data, options)
        .into_iter()
        .map(|seed| simplex_run(&objective, seed, options));
    for candidate in std::iter::once(cap_candidate).chain(interior) {
        if candidate.rmsd < best.rmsd {
            best = candidate;
        }
    }

    let prior = best.prior;
    let mut flags = BTreeSet::new();
    if prior.sigma0 == 0.0 {
        flags.insert(FitFlag::PointMassBoundary);
    }
    if prior.sigma0 >= options.sigma0_cap {
        flags.insert(FitFlag::SigmaCapReached);
    }
    let sensitivity = [-1.0, 1.0]
        .iter()
        .map(|d| (objective.rmsd(prior.mu0 + d, prior.sigma0) - best.rmsd).abs())
        .fold(0.0, f64::max);
    if sensitivity < options.convergence_tol {
        flags.insert(FitFlag::Mu0WeaklyIdentified);
    }
    if best.converged {
        flags.insert(FitFlag::Converged);
    }

    let values = responses.values_in_order(scenarios)?;
    let per_scenario = scenarios
        .iter()
        .zip(values)
        .map(|(scenario, theta)| {
            let fitted = posterior_mean(&prior, scenario, config)?;
            Ok(ScenarioFit {
                scenario_id: scenario.id.clone(),
                theta_tilde: theta,
                fitted_mean: fitted,
                discrepancy: discrepancy(theta, fitted)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(FitResult {
        prior,
        rmsd: best.rmsd,
        per_scenario,
        flags,
    })
}

/// Points to evaluate in [`grid_search`].
#[derive(Debug, Clone, PartialEq)]
pub enum GridSpec {
    /// Cartesian product of the two axes.
    Product { mu0: Vec<f64>, sigma0: Vec<f64> },
    /// An explicit list of `(μ₀, σ₀)` points.
    Points(Vec<(f64, f64)>),
}

impl GridSpec {
    /// `count`-point evenly spaced axes spanning both closed ranges.
    pub fn linspace(mu0: (f64, f64), sigma0: (f64, f64), count: usize) -> Self {
        GridSpec::Product {
            mu0: linspace(mu0.0, mu0.1, count),
            sigma0: linspace(sigma0.0, sigma0.1, count),
        }
    }

    fn points(&self) -> Vec<(f64, f64)> {
        match self {
            GridSpec::Product { mu0, sigma0 } => sigma0
                .iter()
                .flat_map(|&s| mu0.iter().map(move |&m| (m, s)))
                .collect(),
            GridSpec::Points(points) => points.clone(),
        }
    }
}

pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..count)
            .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
            .collect(),
    }
}

/// Exhaustive search over a grid. Ties go to the smallest `σ₀`, then the
/// smallest `μ₀`.
pub fn grid_search(
    responses: &ResponseSet,
    scenarios: &ScenarioSet,
    config: &DataModelConfig,
    grid: &GridSpec,
) -> Result<(NormalPrior, f64)> {
    config.validate()?;
    let points = grid.points();
    if points.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let objective = Objective::new(responses, scenarios, config)?;
    let mut best: Option<(NormalPrior, f64)> = None;
    for (mu0, sigma0) in points {
        let prior = NormalPrior::new(mu0, sigma0)?;
        let value = objective.rmsd(mu0, sigma0);
        let better = match &best {
            None => true,
            Some((b, v)) => value
                .total_cmp(v)
                .then(sigma0.total_cmp(&b.sigma0))
                .then(mu0.total_cmp(&b.mu0))
                .is_lt(),
        };
        if better {
            best = Some((prior, value));
        }
    }
    Ok(best.expect("nonempty grid"))
}
