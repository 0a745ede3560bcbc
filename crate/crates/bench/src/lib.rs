//! Fixtures shared by the criterion benches.

use pfp_core::{posterior_mean, DataModelConfig, NormalPrior, ResponseSet, Round, ScenarioSet};

/// Case-study design, `s = 50`, and exact responses from `prior` with a
/// deterministic ripple so the fit has a nonzero RMSD.
pub fn case_study_fixture(prior: NormalPrior) -> (ScenarioSet, DataModelConfig, ResponseSet) {
    let set = ScenarioSet::case_study_default();
    let config = DataModelConfig::case_study_default();
    let values: Vec<f64> = set
        .iter()
        .enumerate()
        .map(|(i, s)| posterior_mean(&prior, s, &config).expect("valid") + ((i * 7) % 5) as f64 - 2.0)
        .collect();
    let responses = ResponseSet::from_values("bench", Round::Initial, &set, &values);
    (set, config, responses)
}
