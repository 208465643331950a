//! Aggregation of run records and report emission (CSV and markdown).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use num_rational::Rational64;
use num_traits::ToPrimitive;
use serde::Serialize;
use thiserror::Error;

use super::{candidate_counts, Category, RunRecord, ScenarioSpec};
use crate::actions::baseline_grade;
use crate::engine::PromptStyle;
use crate::render::Representation;

/// Aggregates for one (model, representation, style) cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSummary {
    pub model_label: String,
    pub representation: Representation,
    pub style: PromptStyle,
    /// Average grade per execution per scenario; failures stay in the mean.
    pub avg_grade: f64,
    pub avg_processing_seconds: f64,
    pub failure_ratio: f64,
    pub per_scenario: Vec<ScenarioSummary>,
    pub per_category: Vec<(Category, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioSummary {
    pub scenario: String,
    pub category: Category,
    pub avg_grade: f64,
    pub avg_processing_seconds: f64,
    pub failure_ratio: f64,
}

/// Random-choice baseline for one scenario.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioBaseline {
    pub scenario: String,
    pub category: Category,
    pub candidates: u64,
    /// Exact expected grade of a uniform random pick.
    pub exact: Rational64,
    pub grade: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateReport {
    pub cells: Vec<CellSummary>,
    pub baselines: Vec<ScenarioBaseline>,
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("cell {model}/{representation}/{style} covers a different scenario set than the first cell")]
    MixedScenarioSets {
        model: String,
        representation: Representation,
        style: PromptStyle,
    },
    #[error("record for unknown scenario `{0}`")]
    UnknownScenario(String),
    #[error(transparent)]
    Actions(#[from] crate::actions::ActionError),
    #[error(transparent)]
    Baseline(#[from] crate::actions::BaselineError),
    #[error("cannot write `{path}`: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

/// Aggregate records into per-cell means, failure ratios, per-category
/// breakdowns and per-scenario baselines. Every cell must cover the same
/// scenario set.
pub fn aggregate(
    records: &[RunRecord],
    scenarios: &[ScenarioSpec],
) -> Result<AggregateReport, ReportError> {
    let category_of: BTreeMap<&str, Category> = scenarios
        .iter()
        .map(|s| (s.name.as_str(), s.category))
        .collect();

    type CellKey = (String, Representation, PromptStyle);
    let mut by_cell: BTreeMap<CellKey, Vec<&RunRecord>> = BTreeMap::new();
    for record in records {
        category_of
            .get(record.scenario.as_str())
            .ok_or_else(|| ReportError::UnknownScenario(record.scenario.clone()))?;
        by_cell
            .entry((
                record.model_label.clone(),
                record.representation,
                record.style,
            ))
            .or_default()
            .push(record);
    }

    let mut reference_set: Option<Vec<&str>> = None;
    let mut cells = Vec::new();
    for ((model_label, representation, style), cell_records) in &by_cell {
        let mut scenario_set: Vec<&str> = cell_records
            .iter()
            .map(|r| r.scenario.as_str())
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        scenario_set.sort_unstable();
        match &reference_set {
            None => reference_set = Some(scenario_set),
            Some(reference) if *reference == scenario_set => {}
            Some(_) => {
                return Err(ReportError::MixedScenarioSets {
                    model: model_label.clone(),
                    representation: *representation,
                    style: *style,
                })
            }
        }

        let mut per_scenario = Vec::new();
        let mut by_scenario: BTreeMap<&str, Vec<&RunRecord>> = BTreeMap::new();
        for record in cell_records {
            by_scenario.entry(record.scenario.as_str()).or_default().push(record);
        }
        for (scenario, scenario_records) in &by_scenario {
            per_scenario.push(ScenarioSummary {
                scenario: scenario.to_string(),
                category: category_of[scenario],
                avg_grade: mean(scenario_records.iter().map(|r| r.grade as f64)),
                avg_processing_seconds: mean(
                    scenario_records.iter().map(|r| r.processing_seconds),
                ),
                failure_ratio: mean(
                    scenario_records.iter().map(|r| if r.failed { 1.0 } else { 0.0 }),
                ),
            });
        }

        let per_category = Category::ALL
            .iter()
            .filter_map(|category| {
                let grades: Vec<f64> = cell_records
                    .iter()
                    .filter(|r| category_of[r.scenario.as_str()] == *category)
                    .map(|r| r.grade as f64)
                    .collect();
                if grades.is_empty() {
                    None
                } else {
                    Some((*category, mean(grades.iter().copied())))
                }
            })
            .collect();

        cells.push(CellSummary {
            model_label: model_label.clone(),
            representation: *representation,
            style: *style,
            avg_grade: mean(cell_records.iter().map(|r| r.grade as f64)),
            avg_processing_seconds: mean(cell_records.iter().map(|r| r.processing_seconds)),
            failure_ratio: mean(
                cell_records.iter().map(|r| if r.failed { 1.0 } else { 0.0 }),
            ),
            per_scenario,
            per_category,
        });
    }

    let mut baselines = Vec::new();
    for scenario in scenarios {
        let counts = candidate_counts(scenario)?;
        let exact = baseline_grade(counts)?;
        baselines.push(ScenarioBaseline {
            scenario: scenario.name.clone(),
            category: scenario.category,
            candidates: counts.n_total,
            exact,
            grade: exact.to_f64().unwrap_or_default(),
        });
    }

    Ok(AggregateReport { cells, baselines })
}

fn mean(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let count = values.clone().count();
    if count == 0 {
        return 0.0;
    }
    values.sum::<f64>() / count as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Markdown,
}

/// Write the report to `out_dir`. CSV emits `report.csv` (one row per cell,
/// stable header) plus `report_scenarios.csv`; markdown emits `report.md`.
/// Returns the written paths.
pub fn emit_report(
    report: &AggregateReport,
    format: ReportFormat,
    out_dir: impl AsRef<Path>,
) -> Result<Vec<PathBuf>, ReportError> {
    let out_dir = out_dir.as_ref();
    std::fs::create_dir_all(out_dir).map_err(|source| ReportError::Io {
        path: out_dir.display().to_string(),
        source,
    })?;
    match format {
        ReportFormat::Csv => {
            let cells_path = out_dir.join("report.csv");
            let mut writer = csv::Writer::from_path(&cells_path)?;
            writer.write_record([
                "model_label",
                "representation",
                "style",
                "avg_grade",
                "avg_processing_s",
                "failure_ratio",
            ])?;
            for cell in &report.cells {
                writer.write_record([
                    cell.model_label.as_str(),
                    cell.representation.as_str(),
                    cell.style.as_str(),
                    &format!("{:.6}", cell.avg_grade),
                    &format!("{:.6}", cell.avg_processing_seconds),
                    &format!("{:.6}", cell.failure_ratio),
                ])?;
            }
            writer.flush().map_err(|source| ReportError::Io {
                path: cells_path.display().to_string(),
                source,
            })?;

            let scenarios_path = out_dir.join("report_scenarios.csv");
            let mut writer = csv::Writer::from_path(&scenarios_path)?;
            writer.write_record([
                "model_label",
                "representation",
                "style",
                "scenario",
                "category",
                "avg_grade",
                "avg_processing_s",
                "failure_ratio",
                "baseline_grade",
            ])?;
            for cell in &report.cells {
                for summary in &cell.per_scenario {
                    let baseline = report
                        .baselines
                        .iter()
                        .find(|b| b.scenario == summary.scenario)
                        .map(|b| b.grade)
                        .unwrap_or_default();
                    writer.write_record([
                        cell.model_label.as_str(),
                        cell.representation.as_str(),
                        cell.style.as_str(),
                        summary.scenario.as_str(),
                        summary.category.as_str(),
                        &format!("{:.6}", summary.avg_grade),
                        &format!("{:.6}", summary.avg_processing_seconds),
                        &format!("{:.6}", summary.failure_ratio),
                        &format!("{:.6}", baseline),
                    ])?;
                }
            }
            writer.flush().map_err(|source| ReportError::Io {
                path: scenarios_path.display().to_string(),
                source,
            })?;
            Ok(vec![cells_path, scenarios_path])
        }
        ReportFormat::Markdown => {
            let path = out_dir.join("report.md");
            std::fs::write(&path, render_markdown(report)).map_err(|source| ReportError::Io {
                path: path.display().to_string(),
                source,
            })?;
            Ok(vec![path])
        }
    }
}

/// Markdown report: the model × style grade/latency table, per-category
/// averages, and the random baseline per scenario.
pub fn render_markdown(report: &AggregateReport) -> String {
    let mut text = String::from("# Benchmark report\n\n");

    text.push_str("## Average grade and processing time\n\n");
    text.push_str("| Model | Prompting style | Average grade | Proces. time (s) | Failure ratio |\n");
    text.push_str("|---|---|---|---|---|\n");
    for cell in &report.cells {
        let model = match cell.representation {
            Representation::Natural => cell.model_label.clone(),
            Representation::Json => format!("{} JSON", cell.model_label),
        };
        text.push_str(&format!(
            "| {} | {} | {:.2} | {:.2} | {:.2} |\n",
            model,
            cell.style.as_str(),
            cell.avg_grade,
            cell.avg_processing_seconds,
            cell.failure_ratio
        ));
    }

    text.push_str("\n## Average grade per category\n\n");
    text.push_str("| Model | Prompting style | Safety | Comfort | Preference |\n");
    text.push_str("|---|---|---|---|---|\n");
    for cell in &report.cells {
        let model = match cell.representation {
            Representation::Natural => cell.model_label.clone(),
            Representation::Json => format!("{} JSON", cell.model_label),
        };
        let grade_for = |category: Category| -> String {
            cell.per_category
                .iter()
                .find(|(c, _)| *c == category)
                .map(|(_, grade)| format!("{grade:.2}"))
                .unwrap_or_else(|| "—".into())
        };
        text.push_str(&format!(
            "| {} | {} | {} | {} | {} |\n",
            model,
            cell.style.as_str(),
            grade_for(Category::Safety),
            grade_for(Category::Comfort),
            grade_for(Category::Preference)
        ));
    }

    text.push_str("\n## Random baseline per scenario\n\n");
    text.push_str("| Scenario | Category | Candidates | Baseline grade |\n");
    text.push_str("|---|---|---|---|\n");
    for baseline in &report.baselines {
        text.push_str(&format!(
            "| {} | {} | {} | {:.3} |\n",
            baseline.scenario,
            baseline.category.as_str(),
            baseline.candidates,
            baseline.grade
        ));
    }
    text
}
