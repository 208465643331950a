//! Benchmark execution: the experiment matrix over models, representations
//! and prompting styles, with per-repetition records.

use std::sync::mpsc;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{grade_outcome, ScenarioSpec};
use crate::engine::{decide, DecideRequest, PromptStyle, PromptTemplates};
use crate::llm::{Backend, GenerationParams};
use crate::prefs::{Embedder, VectorIndex};
use crate::render::Representation;

/// One benchmark execution of one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub scenario: String,
    pub style: PromptStyle,
    pub representation: Representation,
    pub model_label: String,
    pub repetition: u32,
    pub grade: u8,
    pub processing_seconds: f64,
    pub failed: bool,
}

/// Matrix configuration. Defaults follow the benchmark protocol: 10
/// repetitions per scenario and style, top-3 retrieval.
#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub representations: Vec<Representation>,
    pub styles: Vec<PromptStyle>,
    pub reps: u32,
    pub seed: u64,
    pub params: GenerationParams,
    pub top_k: usize,
    /// Worker threads over (model, representation, style) cells.
    /// Repetitions within a cell always run sequentially.
    pub jobs: usize,
    /// Record processing time as 0.0 so scripted runs are byte-reproducible.
    pub zero_timing: bool,
    /// Abort after this many consecutive transport failures (0 disables).
    pub abort_after_transport_failures: u32,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            representations: vec![Representation::Natural, Representation::Json],
            styles: PromptStyle::ALL.to_vec(),
            reps: 10,
            seed: 0,
            params: GenerationParams::default(),
            top_k: 3,
            jobs: 1,
            zero_timing: false,
            abort_after_transport_failures: 5,
        }
    }
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Engine(#[from] crate::engine::EngineError),
    #[error("backend `{model}` unreachable ({failures} consecutive transport failures): {last_error}")]
    BackendUnreachable {
        model: String,
        failures: u32,
        last_error: String,
        /// Records completed before the abort, already in stable order.
        partial: Vec<RunRecord>,
    },
}

struct Cell {
    model_label: String,
    backend: Arc<dyn Backend>,
    representation: Representation,
    style: PromptStyle,
}

/// Run the full matrix: every backend × representation × style × scenario ×
/// repetition. Records come back in a stable order regardless of `jobs`.
pub fn run_benchmark(
    scenarios: &[ScenarioSpec],
    backends: &[(String, Arc<dyn Backend>)],
    prefs: &VectorIndex,
    embedder: &dyn Embedder,
    templates: &PromptTemplates,
    config: &BenchConfig,
) -> Result<Vec<RunRecord>, BenchError> {
    let mut cells = Vec::new();
    for (model_label, backend) in backends {
        for &representation in &config.representations {
            for &style in &config.styles {
                cells.push(Cell {
                    model_label: model_label.clone(),
                    backend: Arc::clone(backend),
                    representation,
                    style,
                });
            }
        }
    }

    let jobs = config.jobs.max(1);
    let (sink, collected) = mpsc::channel::<Result<Vec<RunRecord>, BenchError>>();
    let next_cell = std::sync::atomic::AtomicUsize::new(0);

    std::thread::scope(|scope| {
        for _ in 0..jobs.min(cells.len().max(1)) {
            let sink = sink.clone();
            let cells = &cells;
            let next_cell = &next_cell;
            scope.spawn(move || loop {
                let index = next_cell.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                let Some(cell) = cells.get(index) else { break };
                let result = run_cell(cell, scenarios, prefs, embedder, templates, config);
                if sink.send(result).is_err() {
                    break;
                }
            });
        }
        drop(sink);
    });

    let mut records = Vec::new();
    let mut abort: Option<BenchError> = None;
    for result in collected {
        match result {
            Ok(cell_records) => records.extend(cell_records),
            Err(error) => abort = Some(error),
        }
    }
    sort_records(&mut records);
    match abort {
        Some(BenchError::BackendUnreachable {
            model,
            failures,
            last_error,
            partial,
        }) => {
            records.extend(partial);
            sort_records(&mut records);
            Err(BenchError::BackendUnreachable {
                model,
                failures,
                last_error,
                partial: records,
            })
        }
        Some(other) => Err(other),
        None => Ok(records),
    }
}

fn sort_records(records: &mut [RunRecord]) {
    records.sort_by(|a, b| {
        (
            &a.model_label,
            a.representation.as_str(),
            a.style.as_str(),
            &a.scenario,
            a.repetition,
        )
            .cmp(&(
                &b.model_label,
                b.representation.as_str(),
                b.style.as_str(),
                &b.scenario,
                b.repetition,
            ))
    });
}

fn run_cell(
    cell: &Cell,
    scenarios: &[ScenarioSpec],
    prefs: &VectorIndex,
    embedder: &dyn Embedder,
    templates: &PromptTemplates,
    config: &BenchConfig,
) -> Result<Vec<RunRecord>, BenchError> {
    let mut records = Vec::with_capacity(scenarios.len() * config.reps as usize);
    let mut consecutive_transport_failures = 0u32;
    for scenario in scenarios {
        for repetition in 0..config.reps {
            let request = DecideRequest {
                style: cell.style,
                state: &scenario.house,
                user_id: scenario.user_id,
                representation: cell.representation,
                prefs,
                backend: cell.backend.as_ref(),
                embedder,
                params: &config.params,
                templates,
                top_k: config.top_k,
            };
            let (outcome, trace) = decide(&request)?;
            if let Some(error) = &trace.transport_error {
                consecutive_transport_failures += 1;
                if config.abort_after_transport_failures > 0
                    && consecutive_transport_failures >= config.abort_after_transport_failures
                {
                    return Err(BenchError::BackendUnreachable {
                        model: cell.model_label.clone(),
                        failures: consecutive_transport_failures,
                        last_error: error.clone(),
                        partial: records,
                    });
                }
            } else {
                consecutive_transport_failures = 0;
            }
            let grade = grade_outcome(&scenario.rubric, &outcome, &scenario.house);
            records.push(RunRecord {
                scenario: scenario.name.clone(),
                style: cell.style,
                representation: cell.representation,
                model_label: cell.model_label.clone(),
                repetition,
                grade,
                processing_seconds: if config.zero_timing {
                    0.0
                } else {
                    trace.total_seconds
                },
                failed: outcome.failed,
            });
        }
    }
    Ok(records)
}
