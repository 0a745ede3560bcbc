//! Consistency checks on elicited responses and the feedback package sent
//! back to an expert.
//!
//! Two rules are checked directly on the responses:
//!
//! * **boundedness**: each data-scenario answer lies between the expert's
//!   no-data answer and the data mean;
//! * **monotone shrinkage**: for scenarios sharing a data mean, the answer
//!   for a larger sample lies between the answer for the next smaller sample
//!   and the data mean.
//!
//! Interval endpoints are inclusive. Expert-facing text says "consistency".

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fitting::FitResult;
use crate::model::{ResponseSet, Round, Scenario, ScenarioSet};

pub const GENERAL_TEXT_VERSION: &str = "consistency-guidance/v1";

pub const GENERAL_TEXT: &str = "\
There are no right or wrong answers for any single scenario, but your answers \
should hang together across scenarios. Two examples of what we mean by consistency:

Example 1. Say that with no outcome data (scenario 1) you expect the average \
change to be -10 m, and that scenario 2 shows data suggesting no change. A \
consistent answer for scenario 2 then lies between -10 m and 0 m. An answer below \
-10 m would be inconsistent, because data showing no change cannot support a larger \
decrease than you expected beforehand. An answer above 0 m would also be \
inconsistent, because neither your starting judgment nor the data point to an increase.

Example 2. Say you answered 0 m for scenario 1 and +5 m for scenario 3, where the \
data show +10 m from 10 participants. For scenario 8, where the data again show \
+10 m but from 30 participants, a consistent answer lies between +5 m and +10 m. \
Ten participants were already enough to move you from 0 m to +5 m, so more \
participants should move you at least as far, up to the +10 m shown in the data.

Rule of thumb: place each answer between your no-data judgment and the value \
shown in the data, and move closer to the data as the sample size grows.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    Boundedness,
    MonotoneShrinkage,
}

/// A closed interval with `low <= high`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub low: f64,
    pub high: f64,
}

impl Interval {
    pub fn spanning(a: f64, b: f64) -> Self {
        Self {
            low: a.min(b),
            high: a.max(b),
        }
    }

    /// Inclusive containment with a rounding allowance of about 1e-9,
    /// relative to the endpoint magnitudes.
    pub fn contains(&self, x: f64) -> bool {
        let slack = 1e-9 * (1.0 + self.low.abs().max(self.high.abs()));
        x >= self.low - slack && x <= self.high + slack
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleViolation {
    pub rule: Rule,
    /// The reference scenario first, then the offending one.
    pub scenario_ids: Vec<String>,
    pub coherent_interval: Interval,
    pub observed: f64,
    pub narrative: String,
}

/// Formats a length without trailing noise: `-10`, `0`, `2.86`.
pub fn format_value(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    if (x - x.round()).abs() < 1e-9 {
        format!("{:.0}", x.round() + 0.0)
    } else {
        let s = format!("{x:.2}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        if s == "-0" {
            "0".to_string()
        } else {
            s.to_string()
        }
    }
}

fn signed(x: f64) -> String {
    let s = format_value(x);
    if x > 0.0 && s != "0" {
        format!("+{s}")
    } else {
        s
    }
}

fn describe(s: &Scenario) -> String {
    format!("{} [{}]", s.label, s.id)
}

/// Returns whether the boundedness rule can be evaluated, i.e. the set has
/// a no-data scenario and the expert answered it.
pub fn boundedness_applicable(responses: &ResponseSet, scenarios: &ScenarioSet) -> bool {
    scenarios
        .no_data_scenario()
        .and_then(|s| responses.get(&s.id))
        .is_some()
}

pub fn check_boundedness(responses: &ResponseSet, scenarios: &ScenarioSet) -> Vec<RuleViolation> {
    let Some(anchor) = scenarios.no_data_scenario() else {
        return Vec::new();
    };
    let Some(anchor_value) = responses.get(&anchor.id) else {
        return Vec::new();
    };
    let units = scenarios.units();
    let values = responses.as_map();

    scenarios
        .iter()
        .filter_map(|s| {
            let (_, ybar) = s.data()?;
            let observed = *values.get(s.id.as_str())?;
            let interval = Interval::spanning(anchor_value, ybar);
            if interval.contains(observed) {
                return None;
            }
            let narrative = format!(
                "{}: your answer of {} {units} is outside the consistent range from {} {units} to {} {units}. \
                 A consistent answer lies between your answer with no data ({} {units}, {}) and the value \
                 shown in the data ({} {units}).",
                describe(s),
                signed(observed),
                signed(interval.low),
                signed(interval.high),
                signed(anchor_value),
                describe(anchor),
                signed(ybar),
            );
            Some(RuleViolation {
                rule: Rule::Boundedness,
                scenario_ids: vec![anchor.id.clone(), s.id.clone()],
                coherent_interval: interval,
                observed,
                narrative,
            })
        })
        .collect()
}

/// Chain check: within each group of data scenarios sharing a mean, each
/// answer is compared with the answer for the next smaller sample size.
pub fn check_monotone_shrinkage(responses: &ResponseSet, scenarios: &ScenarioSet) -> Vec<RuleViolation> {
    let units = scenarios.units();
    let values = responses.as_map();
    let position: BTreeMap<&str, usize> = scenarios
        .iter()
        .enumerate()
        .map(|(i, s)| (s.id.as_str(), i))
        .collect();

    let mut groups: BTreeMap<u64, Vec<(&Scenario, u32, f64)>> = BTreeMap::new();
    for s in scenarios {
        let Some((n, ybar)) = s.data() else { continue };
        if values.contains_key(s.id.as_str()) {
            groups.entry(ybar.to_bits()).or_default().push((s, n, ybar));
        }
    }

    let mut violations = Vec::new();
    for members in groups.values_mut() {
        members.sort_by_key(|(s, n, _)| (*n, position[s.id.as_str()]));
        let mut previous: Option<(&Scenario, u32)> = None;
        for &(s, n, ybar) in members.iter() {
            if let Some((smaller, smaller_n)) = previous {
                if smaller_n < n {
                    let reference = values[smaller.id.as_str()];
                    let observed = values[s.id.as_str()];
                    let interval = Interval::spanning(reference, ybar);
                    if !interval.contains(observed) {
                        let narrative = format!(
                            "{}: your answer of {} {units} is outside the consistent range from {} {units} to {} {units}. \
                             The data show the same value ({} {units}) as in {}, where you answered {} {units}, but \
                             now from more participants ({n} instead of {smaller_n}), so a consistent answer moves at \
                             least as far toward the data.",
                            describe(s),
                            signed(observed),
                            signed(interval.low),
                            signed(interval.high),
                            signed(ybar),
                            describe(smaller),
                            signed(reference),
                        );
                        violations.push(RuleViolation {
                            rule: Rule::MonotoneShrinkage,
                            scenario_ids: vec![smaller.id.clone(), s.id.clone()],
                            coherent_interval: interval,
                            observed,
                            narrative,
                        });
                    }
                    previous = Some((s, n));
                }
            } else {
                previous = Some((s, n));
            }
        }
    }
    violations.sort_by_key(|v| position[v.scenario_ids[1].as_str()]);
    violations
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub scenario_id: String,
    pub scenario_label: String,
    pub elicited: f64,
    pub best_fit: f64,
    /// `elicited - best_fit`.
    pub difference: f64,
    /// Squared difference.
    pub discrepancy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotPoint {
    pub scenario_label: String,
    pub elicited: f64,
    pub best_fit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackReport {
    pub expert_id: String,
    pub round: Round,
    pub general_text_version: String,
    pub general_text: String,
    pub summary_table: Vec<SummaryRow>,
    pub plot_points: Vec<PlotPoint>,
    pub violations: Vec<RuleViolation>,
    /// Rules that could not be evaluated for these responses.
    pub skipped_rules: Vec<Rule>,
    pub overall_rmsd: f64,
}

pub fn build_feedback_report(
    fit: &FitResult,
    responses: &ResponseSet,
    scenarios: &ScenarioSet,
) -> Result<FeedbackReport> {
    let values = responses
        .values_in_order(scenarios)
        .map_err(|e| Error::Mismatch(e.to_string()))?;
    if fit.per_scenario.len() != scenarios.len() {
        return Err(Error::Mismatch(format!(
            "fit covers {} scenarios, scenario set has {}",
            fit.per_scenario.len(),
            scenarios.len()
        )));
    }

    let mut summary_table = Vec::with_capacity(scenarios.len());
    let mut plot_points = Vec::with_capacity(scenarios.len());
    for ((scenario, row), elicited) in scenarios.iter().zip(&fit.per_scenario).zip(values) {
        if row.scenario_id != scenario.id {
            return Err(Error::Mismatch(format!(
                "fit row `{}` where scenario `{}` was expected",
                row.scenario_id, scenario.id
            )));
        }
        if row.theta_tilde != elicited {
            return Err(Error::Mismatch(format!(
                "fit was computed from a different response for scenario `{}`",
                scenario.id
            )));
        }
        summary_table.push(SummaryRow {
            scenario_id: scenario.id.clone(),
            scenario_label: scenario.label.clone(),
            elicited,
            best_fit: row.fitted_mean,
            difference: elicited - row.fitted_mean,
            discrepancy: row.discrepancy,
        });
        plot_points.push(PlotPoint {
            scenario_label: scenario.label.clone(),
            elicited,
            best_fit: row.fitted_mean,
        });
    }

    let mut violations = check_boundedness(responses, scenarios);
    violations.extend(check_monotone_shrinkage(responses, scenarios));
    let skipped_rules = if boundedness_applicable(responses, scenarios) {
        Vec::new()
    } else {
        vec![Rule::Boundedness]
    };

    Ok(FeedbackReport {
        expert_id: responses.expert_id.clone(),
        round: responses.round,
        general_text_version: GENERAL_TEXT_VERSION.to_string(),
        general_text: GENERAL_TEXT.to_string(),
        summary_table,
        plot_points,
        violations,
        skipped_rules,
        overall_rmsd: fit.rmsd,
    })
}

impl FeedbackReport {
    /// Plain-text rendering for email-style delivery. `plot_data` names
    /// where the scatter CSV was written, if anywhere.
    pub fn render_text(&self, plot_data: Option<&str>) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "Feedback for {} ({} responses)", self.expert_id, self.round);
        let _ = writeln!(out);
        let _ = writeln!(out, "{}", self.general_text);
        let _ = writeln!(out);
        let _ = writeln!(out, "Your responses compared with the best-fit values");
        let label_width = self
            .summary_table
            .iter()
            .map(|r| r.scenario_label.chars().count())
            .max()
            .unwrap_or(8)
            .max("Scenario".len());
        let _ = writeln!(
            out,
            "{:<label_width$}  {:>10}  {:>10}  {:>10}",
            "Scenario", "Yours", "Best fit", "Difference"
        );
        for row in &self.summary_table {
            let _ = writeln!(
                out,
                "{:<label_width$}  {:>10.2}  {:>10.2}  {:>10.2}",
                row.scenario_label, row.elicited, row.best_fit, row.difference
            );
        }
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "Overall consistency score (root mean square difference): {:.2}",
            self.overall_rmsd
        );
        let _ = writeln!(out);
        if self.violations.is_empty() {
            let _ = writeln!(out, "No consistency issues found.");
        } else {
            let _ = writeln!(out, "Scenarios to revisit for consistency:");
            for (i, v) in self.violations.iter().enumerate() {
                let _ = writeln!(out, "{}. {}", i + 1, v.narrative);
            }
        }
        for rule in &self.skipped_rules {
            let name = match rule {
                Rule::Boundedness => "between-no-data-and-data",
                Rule::MonotoneShrinkage => "more-data-moves-further",
            };
            let _ = writeln!(out, "Note: the {name} check was not applicable to these responses.");
        }
        let _ = writeln!(out);
        match plot_data {
            Some(path) => {
                let _ = writeln!(out, "Plot data (your answers against best-fit values): {path}");
            }
            None => {
                let _ = writeln!(
                    out,
                    "Plot data (your answers against best-fit values) is available as CSV with --plot-csv."
                );
            }
        }
        out
    }

    /// Scatter data with columns `scenario_label, elicited_m, best_fit_m`.
    pub fn plot_points_csv(&self) -> Result<String> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(["scenario_label", "elicited_m", "best_fit_m"])?;
        for p in &self.plot_points {
            writer.write_record([
                p.scenario_label.clone(),
                p.elicited.to_string(),
                p.best_fit.to_string(),
            ])?;
        }
        let bytes = writer.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundSummary {
    pub mean: f64,
    pub sd: f64,
    pub rmsd: f64,
}

impl From<&FitResult> for RoundSummary {
    fn from(fit: &FitResult) -> Self {
        Self {
            mean: fit.prior.mu0,
            sd: fit.prior.sigma0,
            rmsd: fit.rmsd,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortRow {
    pub expert_id: String,
    pub initial: Option<RoundSummary>,
    pub revised: Option<RoundSummary>,
}

/// Initial and revised fits side by side, one row per expert, in ascending
/// order of initial RMSD.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CohortSummary {
    pub rows: Vec<CohortRow>,
}

pub fn cohort_summary<'a, I>(fits: I) -> CohortSummary
where
    I: IntoIterator<Item = (&'a str, Round, &'a FitResult)>,
{
    let mut by_expert: BTreeMap<&str, CohortRow> = BTreeMap::new();
    for (expert_id, round, fit) in fits {
        let row = by_expert.entry(expert_id).or_insert_with(|| CohortRow {
            expert_id: expert_id.to_string(),
            initial: None,
            revised: None,
        });
        let summary = Some(RoundSummary::from(fit));
        match round {
            Round::Initial => row.initial = summary,
            Round::Revised => row.revised = summary,
        }
    }
    let mut rows: Vec<CohortRow> = by_expert.into_values().collect();
    rows.sort_by(|a, b| {
        let key = |r: &CohortRow| r.initial.map_or(f64::INFINITY, |s| s.rmsd);
        key(a).total_cmp(&key(b)).then_with(|| a.expert_id.cmp(&b.expert_id))
    });
    CohortSummary { rows }
}

impl CohortSummary {
    /// One entry per `(expert, round)` fit.
    pub fn long_rows(&self) -> Vec<(&str, Round, RoundSummary)> {
        self.rows
            .iter()
            .flat_map(|r| {
                [(Round::Initial, r.initial), (Round::Revised, r.revised)]
                    .into_iter()
                    .filter_map(move |(round, s)| s.map(|s| (r.expert_id.as_str(), round, s)))
            })
            .collect()
    }

    /// CSV with initial and revised column pairs; absent rounds are empty cells.
    pub fn to_csv(&self) -> Result<String> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record([
            "expert_id",
            "initial_mean_m",
            "revised_mean_m",
            "initial_sd_m",
            "revised_sd_m",
            "initial_rmsd_m",
            "revised_rmsd_m",
        ])?;
        let cell = |s: Option<RoundSummary>, f: fn(RoundSummary) -> f64| s.map(|s| f(s).to_string()).unwrap_or_default();
        for row in &self.rows {
            writer.write_record([
                row.expert_id.clone(),
                cell(row.initial, |s| s.mean),
                cell(row.revised, |s| s.mean),
                cell(row.initial, |s| s.sd),
                cell(row.revised, |s| s.sd),
                cell(row.initial, |s| s.rmsd),
                cell(row.revised, |s| s.rmsd),
            ])?;
        }
        let bytes = writer.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fitting::{fit_prior, FitOptions};
    use crate::model::{posterior_mean, DataModelConfig, NormalPrior};

    fn case_study() -> ScenarioSet {
        ScenarioSet::case_study_default()
    }

    fn responses(pairs: &[(&str, f64)]) -> ResponseSet {
        ResponseSet::new(
            "e1",
            Round::Initial,
            pairs
                .iter()
                .map(|(id, v)| crate::model::ElicitedResponse::new(*id, *v))
                .collect(),
        )
    }

    #[test]
    fn example_one_interval() {
        let set = case_study();
        let ok = check_boundedness(&responses(&[("s1", -10.0), ("s2", -5.0)]), &set);
        assert!(ok.is_empty());
        let bad = check_boundedness(&responses(&[("s1", -10.0), ("s2", -15.0)]), &set);
        assert_eq!(bad.len(), 1);
        assert_eq!(bad[0].coherent_interval, Interval { low: -10.0, high: 0.0 });
        assert_eq!(bad[0].scenario_ids, vec!["s1", "s2"]);
        assert_eq!(bad[0].observed, -15.0);
        assert!(bad[0].narrative.contains("-10 m to 0 m"), "{}", bad[0].narrative);
        assert!(bad[0].narrative.contains("[s2]"));
        assert!(!bad[0].narrative.to_lowercase().contains("coheren"));
        let above = check_boundedness(&responses(&[("s1", -10.0), ("s2", 1.0)]), &set);
        assert_eq!(above.len(), 1);
    }

    #[test]
    fn singleton_interval_and_endpoints_are_consistent() {
        let set = case_study();
        assert!(check_boundedness(&responses(&[("s1", 10.0), ("s3", 10.0)]), &set).is_empty());
        assert!(check_boundedness(&responses(&[("s1", -10.0), ("s2", -10.0)]), &set).is_empty());
        assert!(check_boundedness(&responses(&[("s1", -10.0), ("s2", 0.0)]), &set).is_empty());
    }

    #[test]
    fn boundedness_skipped_without_anchor() {
        let set = case_study();
        let rs = responses(&[("s2", 100.0)]);
        assert!(check_boundedness(&rs, &set).is_empty());
        assert!(!boundedness_applicable(&rs, &set));
    }

    #[test]
    fn example_two_interval() {
        let set = case_study();
        let ok = check_monotone_shrinkage(&responses(&[("s1", 0.0), ("s3", 5.0), ("s8", 7.0)]), &set);
        assert!(ok.is_empty());
        let bad = check_monotone_shrinkage(&responses(&[("s1", 0.0), ("s3", 5.0), ("s8", 3.0)]), &set);
        assert_eq!(bad.len(), 1);
        assert_eq!(bad[0].coherent_interval, Interval { low: 5.0, high: 10.0 });
        assert_eq!(bad[0].scenario_ids, vec!["s3", "s8"]);
        assert!(bad[0].narrative.contains("+5 m to +10 m"), "{}", bad[0].narrative);
    }

    #[test]
    fn monotone_chain_uses_nearest_smaller_sample() {
        let set = case_study();
        // ybar = +10: n=10 -> 5, n=30 -> 8, n=100 -> 6 (moves back toward 5).
        let v = check_monotone_shrinkage(&responses(&[("s3", 5.0), ("s8", 8.0), ("s13", 6.0)]), &set);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].scenario_ids, vec!["s8", "s13"]);
        assert_eq!(v[0].coherent_interval, Interval { low: 8.0, high: 10.0 });
        // Missing middle response chains to the one below.
        let v = check_monotone_shrinkage(&responses(&[("s3", 5.0), ("s13", 4.0)]), &set);
        assert_eq!(v[0].scenario_ids, vec!["s3", "s13"]);
    }

    #[test]
    fn exact_posterior_means_are_consistent() {
        let set = case_study();
        let config = DataModelConfig::new(50.0).unwrap();
        for (mu0, sigma0) in [(0.0, 10.0), (-30.8, 4.3), (3.8, 118.6), (-0.3, 0.2), (12.0, 1e4)] {
            let prior = NormalPrior::new(mu0, sigma0).unwrap();
            let values: Vec<f64> = set.iter().map(|s| posterior_mean(&prior, s, &config).unwrap()).collect();
            let rs = ResponseSet::from_values("e", Round::Initial, &set, &values);
            assert!(check_boundedness(&rs, &set).is_empty());
            assert!(check_monotone_shrinkage(&rs, &set).is_empty());
        }
    }

    #[test]
    fn report_structure() {
        let set = case_study();
        let config = DataModelConfig::new(50.0).unwrap();
        let mut values = vec![0.0; 16];
        values[0] = -10.0;
        values[1] = -15.0;
        let rs = ResponseSet::from_values("e1", Round::Initial, &set, &values);
        let fit = fit_prior(&rs, &set, &config, &FitOptions::default()).unwrap();
        let report = build_feedback_report(&fit, &rs, &set).unwrap();
        assert_eq!(report.summary_table.len(), 16);
        assert_eq!(report.plot_points.len(), 16);
        for (p, s) in report.plot_points.iter().zip(set.iter()) {
            assert_eq!(p.scenario_label, s.label);
        }
        assert_eq!(report.overall_rmsd, fit.rmsd);
        assert!(report.violations.iter().any(|v| v.scenario_ids == ["s1", "s2"]
            && v.coherent_interval == Interval { low: -10.0, high: 0.0 }));
        let text = report.render_text(None);
        assert!(text.contains("Example 1"));
        assert!(!text.to_lowercase().contains("coheren"));
        assert!(!text.to_lowercase().contains("prior"));
        let a = serde_json::to_string(&report).unwrap();
        let b = serde_json::to_string(&build_feedback_report(&fit, &rs, &set).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn report_rejects_mismatched_fit() {
        let set = case_study();
        let config = DataModelConfig::new(50.0).unwrap();
        let rs = ResponseSet::from_values("e1", Round::Initial, &set, &[1.0; 16]);
        let fit = fit_prior(&rs, &set, &config, &FitOptions::default()).unwrap();
        let other = ResponseSet::from_values("e1", Round::Initial, &set, &[2.0; 16]);
        assert!(matches!(build_feedback_report(&fit, &other, &set), Err(Error::Mismatch(_))));
    }

    #[test]
    fn perfect_coherence_report() {
        let set = case_study();
        let rs = ResponseSet::from_values("e1", Round::Initial, &set, &[0.0; 16]);
        let fit = fit_prior(&rs, &set, &DataModelConfig::new(50.0).unwrap(), &FitOptions::default()).unwrap();
        let report = build_feedback_report(&fit, &rs, &set).unwrap();
        assert!(report.violations.is_empty());
        assert!(report.plot_points.iter().all(|p| p.elicited == p.best_fit));
        assert_eq!(report.overall_rmsd, 0.0);
        assert!(report.render_text(None).contains("No consistency issues found."));
        let csv = report.plot_points_csv().unwrap();
        assert!(csv.starts_with("scenario_label,elicited_m,best_fit_m\n"));
        assert_eq!(csv.lines().count(), 17);
    }

    fn fake_fit(mean: f64, sd: f64, rmsd: f64) -> FitResult {
        FitResult {
            prior: NormalPrior { mu0: mean, sigma0: sd },
            rmsd,
            per_scenario: Vec::new(),
            flags: Default::default(),
        }
    }

    #[test]
    fn cohort_ordering_and_gaps() {
        let a = fake_fit(1.0, 2.0, 5.0);
        let b = fake_fit(-1.0, 3.0, 1.0);
        let b2 = fake_fit(-1.5, 2.5, 0.5);
        let table = cohort_summary([
            ("a", Round::Initial, &a),
            ("b", Round::Initial, &b),
            ("b", Round::Revised, &b2),
        ]);
        assert_eq!(table.rows.len(), 2);
        assert_eq!(table.rows[0].expert_id, "b");
        assert_eq!(table.rows[0].revised.unwrap().rmsd, 0.5);
        assert!(table.rows[1].revised.is_none());
        assert_eq!(table.long_rows().len(), 3);
        let csv = table.to_csv().unwrap();
        assert_eq!(csv.lines().nth(2).unwrap(), "a,1,,2,,5,");
        let json = serde_json::to_value(&table).unwrap();
        assert!(json["rows"][1]["revised"].is_null());
        assert!(cohort_summary(std::iter::empty()).rows.is_empty());
    }

    #[test]
    fn value_formatting() {
        assert_eq!(format_value(-10.0), "-10");
        assert_eq!(format_value(-0.0), "0");
        assert_eq!(format_value(2.857142), "2.86");
        assert_eq!(format_value(-0.001), "0");
        assert_eq!(signed(5.0), "+5");
        assert_eq!(signed(0.0), "0");
    }
}
