//! End-to-end orchestration: load the corpus, run the selected workflows
//! over each case, assess every weak catch, rank and filter, harvest
//! hardening tests, compute statistics, and assemble the report.

use std::path::Path;
use std::sync::Mutex;
use std::time::Duration;

use rayon::prelude::*;
use thiserror::Error;

use crate::assessors::{
    assess_catch, rank_catches, review_filter, Assessment, CatchBundle, ExternalJudge,
    GroundTruthJudge, HeuristicJudge, JudgeBackend, PatternRule, ScriptedJudge,
};
use crate::config::{ConfigError, RunConfig};
use crate::corpus::{compute_diff, load_corpus, CorpusError, DiffCase};
use crate::generation::{
    BackendError, ExternalBackend, GenerationContext, GeneratorBackend, ScriptedFixture,
    ScriptedMock, TemplateGenerator,
};
use crate::report::{
    build_stat_report, compute_summary, CaseRecord, QueueEntry, RunReport, REPORT_SCHEMA,
};
use crate::workflows::{
    harvest_hardening, infer_intent, CatchVerdict, WorkflowContext, WorkflowRegistry, WorkflowTag,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("corpus error: {0}")]
    Corpus(#[from] CorpusError),
    #[error("backend error: {0}")]
    Backend(String),
}

/// Wraps the configured generation backend; on unavailability the template
/// generator takes over and the fallback is recorded.
struct FallbackBackend {
    primary: Box<dyn GeneratorBackend>,
    template: TemplateGenerator,
    allow_fallback: bool,
    notices: Mutex<Vec<String>>,
}

impl FallbackBackend {
    fn new(primary: Box<dyn GeneratorBackend>, allow_fallback: bool) -> Self {
        FallbackBackend {
            primary,
            template: TemplateGenerator,
            allow_fallback,
            notices: Mutex::new(Vec::new()),
        }
    }

    fn take_notices(&self) -> Vec<String> {
        std::mem::take(&mut self.notices.lock().expect("notices lock"))
    }
}

impl GeneratorBackend for FallbackBackend {
    fn name(&self) -> &str {
        self.primary.name()
    }

    fn propose_tests(&self, ctx: &GenerationContext<'_>) -> Result<Vec<String>, BackendError> {
        match self.primary.propose_tests(ctx) {
            Ok(tests) => Ok(tests),
            Err(BackendError::Unavailable(reason)) if self.allow_fallback => {
                self.notices
                    .lock()
                    .expect("notices lock")
                    .push(format!("case {}: backend unavailable ({reason}); fell back to template", ctx.case_id));
                self.template.propose_tests(ctx)
            }
            Err(err) => Err(err),
        }
    }

    fn infer_intent(
        &self,
        case: &DiffCase,
        changed: &[String],
    ) -> Result<Option<String>, BackendError> {
        match self.primary.infer_intent(case, changed) {
            Err(BackendError::Unavailable(_)) if self.allow_fallback => Ok(None),
            other => other,
        }
    }

    fn enumerate_risks(
        &self,
        case_id: &str,
        intent: &crate::workflows::IntentDescription,
        diff: &crate::corpus::Diff,
        cap: usize,
    ) -> Result<Option<Vec<crate::mutation::Risk>>, BackendError> {
        match self.primary.enumerate_risks(case_id, intent, diff, cap) {
            Err(BackendError::Unavailable(_)) if self.allow_fallback => Ok(None),
            other => other,
        }
    }
}

fn build_generation_backend(
    config: &RunConfig,
) -> Result<Box<dyn GeneratorBackend>, PipelineError> {
    let timeout = Duration::from_secs(config.backend_timeout_secs);
    if config.backend == "template" {
        return Ok(Box::new(TemplateGenerator));
    }
    if let Some(path) = config.backend.strip_prefix("scripted:") {
        let mock = ScriptedMock::load(Path::new(path))
            .map_err(|e| PipelineError::Backend(e.to_string()))?;
        return Ok(Box::new(mock));
    }
    if let Some(endpoint) = config.backend.strip_prefix("external:") {
        let backend = ExternalBackend::new(endpoint, timeout)
            .map_err(|e| PipelineError::Backend(e.to_string()))?;
        return Ok(Box::new(backend));
    }
    Err(PipelineError::Backend(format!("unknown backend spec `{}`", config.backend)))
}

fn build_judges(config: &RunConfig) -> Result<Vec<Box<dyn JudgeBackend>>, PipelineError> {
    let timeout = Duration::from_secs(config.backend_timeout_secs);
    let mut judges: Vec<Box<dyn JudgeBackend>> = Vec::new();
    for (index, spec) in config.judges.iter().cycle().take(config.ensemble_size).enumerate() {
        let judge: Box<dyn JudgeBackend> = if spec == "heuristic" {
            Box::new(HeuristicJudge::new(index as i32))
        } else if spec == "ground_truth" {
            Box::new(GroundTruthJudge)
        } else if let Some(path) = spec.strip_prefix("scripted:") {
            let fixture = ScriptedFixture::load(Path::new(path))
                .map_err(|e| PipelineError::Backend(e.to_string()))?;
            Box::new(ScriptedJudge::new(fixture, index.to_string()))
        } else if let Some(endpoint) = spec.strip_prefix("external:") {
            Box::new(
                ExternalJudge::new(endpoint, timeout, index.to_string())
                    .map_err(|e| PipelineError::Backend(e.to_string()))?,
            )
        } else {
            return Err(PipelineError::Backend(format!("unknown judge spec `{spec}`")));
        };
        judges.push(judge);
    }
    Ok(judges)
}

fn load_rules(config: &RunConfig) -> Result<Vec<PatternRule>, PipelineError> {
    match &config.rules_file {
        None => Ok(crate::assessors::default_rules()),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| PipelineError::Backend(format!("rules file {}: {e}", path.display())))?;
            crate::assessors::parse_rules(&text)
                .map_err(|e| PipelineError::Backend(format!("rules file {}: {e}", path.display())))
        }
    }
}

pub fn run_pipeline(config: &RunConfig, corpus_path: &Path) -> Result<RunReport, PipelineError> {
    config.validate()?;
    let cases = load_corpus(corpus_path)?;
    let rules = load_rules(config)?;
    let backend = FallbackBackend::new(build_generation_backend(config)?, config.allow_backend_fallback);
    let judges = build_judges(config)?;
    let registry = WorkflowRegistry::default();
    let operators = crate::mutation::default_operator_registry();

    let selected = config.selected_workflows();
    let runnable: Vec<WorkflowTag> = selected
        .iter()
        .copied()
        .filter(|tag| *tag != WorkflowTag::CoincidentalCatch)
        .collect();

    // Scripted generation consumes fixture batches in call order, so case
    // processing stays serial for it.
    let parallelism = if config.backend.starts_with("scripted:") { 1 } else { config.parallelism };

    let workflow_ctx =
        WorkflowContext { backend: &backend, budgets: &config.budgets, operators: &operators };
    let run_case = |case: &DiffCase| -> CaseRecord {
        let processed = case.risk_score >= config.risk_threshold;
        let mut results = Vec::new();
        if processed {
            for tag in &runnable {
                let workflow = registry.get(tag.name()).expect("registered workflow");
                results.push(workflow.run(case, &workflow_ctx));
            }
        }
        CaseRecord {
            id: case.id.clone(),
            title: case.title.clone(),
            status: case.status,
            risk_score: case.risk_score,
            ground_truth: case.ground_truth.clone(),
            processed,
            results,
        }
    };

    let records: Vec<CaseRecord> = if parallelism > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(parallelism)
            .build()
            .map_err(|e| PipelineError::Backend(e.to_string()))?;
        pool.install(|| cases.par_iter().map(run_case).collect())
    } else {
        cases.iter().map(run_case).collect()
    };

    // Assess every retained weak catch. The assessors always see the diff
    // and the intent, whichever workflow produced the catch.
    let judge_refs: Vec<&dyn JudgeBackend> = judges.iter().map(|b| b.as_ref()).collect();
    let binary_judge = judge_refs[0];
    let mut assessments: Vec<Assessment> = Vec::new();
    for (case, record) in cases.iter().zip(&records) {
        if !record.processed {
            continue;
        }
        let diff = compute_diff(&case.parent, &case.child);
        let intent = record
            .results
            .iter()
            .find_map(|r| r.intent.clone())
            .unwrap_or_else(|| infer_intent(case, &diff, &TemplateGenerator));
        for result in &record.results {
            for executed in result.executed.iter() {
                if !(executed.retained && executed.verdict == CatchVerdict::WeakCatch) {
                    continue;
                }
                let bundle = CatchBundle::new(
                    case,
                    &executed.test,
                    &executed.parent_outcome,
                    &executed.child_outcome,
                    &diff,
                    &intent,
                );
                assessments.push(assess_catch(
                    &bundle,
                    &rules,
                    binary_judge,
                    &judge_refs,
                    &config.rank_weights,
                ));
            }
        }
    }

    let ranked = rank_catches(assessments);
    let review_queue: Vec<QueueEntry> = ranked
        .iter()
        .map(|assessment| QueueEntry {
            catch_id: assessment.catch_id.clone(),
            case_id: assessment.case_id.clone(),
            rank_key: assessment.final_rank_key,
            decision: review_filter(assessment, config.filter_policy),
        })
        .collect();

    let all_results: Vec<_> =
        records.iter().flat_map(|r| r.results.iter().cloned()).collect();
    let harvested = harvest_hardening(&all_results);

    let summary = compute_summary(&records, &selected);
    let stats = build_stat_report(&records, &ranked, &config.permutation, config.seed);

    let mut notes = backend.take_notices();
    notes.sort();

    Ok(RunReport {
        schema: REPORT_SCHEMA.to_string(),
        timestamp_unix: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        config: config.clone(),
        cases: records,
        assessments: ranked,
        review_queue,
        harvested_hardening: harvested,
        summary,
        stats,
        notes,
    })
}
