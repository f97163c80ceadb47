//! Run configuration: validated up front, echoed verbatim into the report.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assessors::{FilterPolicy, RankWeights};
use crate::workflows::{Budgets, WorkflowTag};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PermutationConfig {
    pub iterations: u32,
    /// Zero means: derive group sizes from the assessed pool.
    pub group_min: usize,
    pub group_max: usize,
    pub alpha: f64,
}

impl Default for PermutationConfig {
    fn default() -> Self {
        PermutationConfig { iterations: 10_000, group_min: 0, group_max: 0, alpha: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    /// Corpus directory; the CLI flag takes precedence.
    pub corpus: Option<PathBuf>,
    /// Workflow names to run. Naming `coincidental_catch` pulls in
    /// `harden_no_coverage`, which it is derived from.
    pub workflows: Vec<String>,
    pub budgets: Budgets,
    /// Generation backend: `template`, `scripted:<fixture>`, or
    /// `external:<endpoint>` with endpoint `cmd:...` or `tcp:...`.
    pub backend: String,
    /// Judge backends: `heuristic`, `ground_truth`, `scripted:<fixture>`,
    /// `external:<endpoint>`. The first entry answers the binary
    /// classification; the list is cycled up to `ensemble_size` for buckets.
    pub judges: Vec<String>,
    pub ensemble_size: usize,
    pub rank_weights: RankWeights,
    pub filter_policy: FilterPolicy,
    /// Cases below this risk score are skipped.
    pub risk_threshold: f64,
    pub seed: u64,
    /// Case-level parallelism cap. Scripted generation backends are
    /// stateful, so they force serial case processing.
    pub parallelism: usize,
    pub backend_timeout_secs: u64,
    /// On external-backend failure, fall back to the template generator
    /// (recorded in the report) instead of aborting.
    pub allow_backend_fallback: bool,
    /// Pattern rules file; the embedded default set when absent.
    pub rules_file: Option<PathBuf>,
    pub permutation: PermutationConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            corpus: None,
            workflows: vec![
                "coincidental_catch".to_string(),
                "harden_no_coverage".to_string(),
                "harden_mutation_guided".to_string(),
                "dodgy_diff".to_string(),
                "intent_aware".to_string(),
            ],
            budgets: Budgets::default(),
            backend: "template".to_string(),
            judges: vec!["heuristic".to_string()],
            ensemble_size: 3,
            rank_weights: RankWeights::default(),
            filter_policy: FilterPolicy::default(),
            risk_threshold: 0.0,
            seed: 17,
            parallelism: 1,
            backend_timeout_secs: 10,
            allow_backend_fallback: true,
            rules_file: None,
            permutation: PermutationConfig::default(),
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config file {0}: {1}")]
    Unreadable(PathBuf, std::io::Error),
    #[error("config file {0}: {1}")]
    Invalid(PathBuf, serde_json::Error),
    #[error("unknown workflow `{0}`")]
    UnknownWorkflow(String),
    #[error("no workflows selected")]
    NoWorkflows,
    #[error("bad backend spec `{0}`: {1}")]
    BadBackend(String, String),
    #[error("bad judge spec `{0}`: {1}")]
    BadJudge(String, String),
    #[error("{0}")]
    BadValue(String),
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Unreadable(path.to_path_buf(), e))?;
        let config: RunConfig =
            serde_json::from_str(&text).map_err(|e| ConfigError::Invalid(path.to_path_buf(), e))?;
        Ok(config)
    }

    /// CATCHJIT_SEED overrides the configured seed.
    pub fn apply_env_seed(&mut self) {
        if let Ok(seed) = std::env::var("CATCHJIT_SEED") {
            if let Ok(seed) = seed.parse::<u64>() {
                self.seed = seed;
            }
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.workflows.is_empty() {
            return Err(ConfigError::NoWorkflows);
        }
        for name in &self.workflows {
            if WorkflowTag::from_name(name).is_none() {
                return Err(ConfigError::UnknownWorkflow(name.clone()));
            }
        }
        for (spec, what) in [(&self.backend, "backend")] {
            let _ = what;
            validate_backend_spec(spec)?;
        }
        if self.judges.is_empty() {
            return Err(ConfigError::BadValue("at least one judge required".to_string()));
        }
        for judge in &self.judges {
            validate_judge_spec(judge)?;
        }
        if self.ensemble_size == 0 {
            return Err(ConfigError::BadValue("ensemble_size must be at least 1".to_string()));
        }
        if !(0.0..=1.01).contains(&self.risk_threshold) && self.risk_threshold < 0.0 {
            return Err(ConfigError::BadValue("risk_threshold must be non-negative".to_string()));
        }
        if self.parallelism == 0 {
            return Err(ConfigError::BadValue("parallelism must be at least 1".to_string()));
        }
        if self.budgets.observation_tests == 0
            || self.budgets.mutants == 0
            || self.budgets.risks == 0
            || self.budgets.mutants_per_risk == 0
            || self.budgets.tests_per_mutant == 0
            || self.budgets.step_limit == 0
        {
            return Err(ConfigError::BadValue("budgets must be positive".to_string()));
        }
        if !(0.0 < self.permutation.alpha && self.permutation.alpha < 1.0) {
            return Err(ConfigError::BadValue("permutation alpha must be in (0, 1)".to_string()));
        }
        Ok(())
    }

    /// Selected workflow tags in canonical order, with the derived
    /// coincidental view implying its source workflow.
    pub fn selected_workflows(&self) -> Vec<WorkflowTag> {
        let mut requested: Vec<WorkflowTag> =
            self.workflows.iter().filter_map(|n| WorkflowTag::from_name(n)).collect();
        if requested.contains(&WorkflowTag::CoincidentalCatch)
            && !requested.contains(&WorkflowTag::HardenNoCoverage)
        {
            requested.push(WorkflowTag::HardenNoCoverage);
        }
        WorkflowTag::ALL.into_iter().filter(|tag| requested.contains(tag)).collect()
    }
}

fn validate_backend_spec(spec: &str) -> Result<(), ConfigError> {
    if spec == "template" {
        return Ok(());
    }
    if let Some(path) = spec.strip_prefix("scripted:") {
        if path.is_empty() {
            return Err(ConfigError::BadBackend(spec.to_string(), "missing fixture path".into()));
        }
        return Ok(());
    }
    if let Some(endpoint) = spec.strip_prefix("external:") {
        if endpoint.starts_with("cmd:") || endpoint.starts_with("tcp:") {
            return Ok(());
        }
        return Err(ConfigError::BadBackend(
            spec.to_string(),
            "endpoint must be cmd:... or tcp:...".into(),
        ));
    }
    Err(ConfigError::BadBackend(spec.to_string(), "unknown backend kind".into()))
}

fn validate_judge_spec(spec: &str) -> Result<(), ConfigError> {
    if spec == "heuristic" || spec == "ground_truth" {
        return Ok(());
    }
    if let Some(path) = spec.strip_prefix("scripted:") {
        if path.is_empty() {
            return Err(ConfigError::BadJudge(spec.to_string(), "missing fixture path".into()));
        }
        return Ok(());
    }
    if let Some(endpoint) = spec.strip_prefix("external:") {
        if endpoint.starts_with("cmd:") || endpoint.starts_with("tcp:") {
            return Ok(());
        }
        return Err(ConfigError::BadJudge(
            spec.to_string(),
            "endpoint must be cmd:... or tcp:...".into(),
        ));
    }
    Err(ConfigError::BadJudge(spec.to_string(), "unknown judge kind".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_validates() {
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn unknown_workflow_rejected() {
        let config = RunConfig { workflows: vec!["sideways".into()], ..Default::default() };
        assert!(matches!(config.validate(), Err(ConfigError::UnknownWorkflow(_))));
    }

    #[test]
    fn coincidental_view_implies_harden() {
        let config = RunConfig { workflows: vec!["coincidental_catch".into()], ..Default::default() };
        let selected = config.selected_workflows();
        assert!(selected.contains(&WorkflowTag::HardenNoCoverage));
        assert!(selected.contains(&WorkflowTag::CoincidentalCatch));
    }

    #[test]
    fn backend_specs() {
        assert!(validate_backend_spec("template").is_ok());
        assert!(validate_backend_spec("scripted:fixtures/a.json").is_ok());
        assert!(validate_backend_spec("external:cmd:python3 gen.py").is_ok());
        assert!(validate_backend_spec("external:http://x").is_err());
        assert!(validate_backend_spec("llm").is_err());
    }

    #[test]
    fn config_roundtrips_through_json() {
        let config = RunConfig::default();
        let json = serde_json::to_string_pretty(&config).unwrap();
        let back: RunConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(config, back);
    }
}
