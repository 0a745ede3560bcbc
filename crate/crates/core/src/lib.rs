//! Prior-from-posteriors elicitation.
//!
//! An expert gives point estimates of the quantity of interest under a set
//! of hypothetical data scenarios. [`fitting::fit_prior`] finds the Normal
//! prior whose conjugate posterior means best reproduce those estimates
//! (minimum RMSD), and [`diagnostics`] turns the fit and two consistency
//! rules into feedback the expert can use to revise.

pub mod diagnostics;
pub mod error;
pub mod fitting;
pub mod io;
pub mod model;
pub mod session;
pub mod simplex;
pub mod store;
pub mod synthetic;

pub use diagnostics::{
    build_feedback_report, check_boundedness, check_monotone_shrinkage, cohort_summary, CohortRow,
    CohortSummary, FeedbackReport, Interval, PlotPoint, RoundSummary, Rule, RuleViolation, SummaryRow,
};
pub use error::{Error, Result};
pub use fitting::{
    boundary_candidates, fit_prior, grid_search, FitFlag, FitOptions, FitResult, GridSpec, ScenarioFit,
};
pub use model::{
    discrepancy, posterior_mean, posterior_sd, rmsd, DataModelConfig, ElicitedResponse, NormalPrior,
    ResponseSet, Round, Scenario, ScenarioSet,
};
pub use session::{ExpertRecord, ExpertState, RoundRecord, Session};
pub use store::SessionStore;
pub use synthetic::{generate_responses, recovery_experiment, RecoveryStats, SyntheticSpec};

/// Pretty JSON with a trailing newline. Every JSON payload the CLI and the
/// service emit goes through this, so equal values give equal bytes.
pub fn to_json_pretty<T: serde::Serialize + ?Sized>(value: &T) -> serde_json::Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}
