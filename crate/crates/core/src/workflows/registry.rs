//! The workflow trait and name-keyed registry. Pipelines select workflows
//! at runtime from config by these names.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::corpus::DiffCase;
use crate::generation::GeneratorBackend;
use crate::mutation::OperatorRegistry;

use super::harden::{HardenMutationGuidedWorkflow, HardenNoCoverageWorkflow};
use super::runs::{DodgyDiffWorkflow, IntentAwareWorkflow, WorkflowResult};
use super::WorkflowTag;

/// Per-case generation budgets. All knobs, none load-bearing for
/// correctness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Budgets {
    /// Candidate tests per case per workflow.
    pub observation_tests: usize,
    /// Mutants per case.
    pub mutants: usize,
    /// Mutants materialized per risk.
    pub mutants_per_risk: usize,
    /// Risks enumerated per case.
    pub risks: usize,
    /// Proposals per mutant in mutation-guided generation.
    pub tests_per_mutant: usize,
    /// Argument tuples sampled per entry point.
    pub tuple_cap: usize,
    /// Interpreter step budget per execution.
    pub step_limit: u64,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            observation_tests: 20,
            mutants: 50,
            mutants_per_risk: 5,
            risks: 10,
            tests_per_mutant: 1,
            tuple_cap: 12,
            step_limit: minilang::DEFAULT_STEP_LIMIT,
        }
    }
}

pub struct WorkflowContext<'a> {
    pub backend: &'a dyn GeneratorBackend,
    pub budgets: &'a Budgets,
    pub operators: &'a OperatorRegistry,
}

/// One catch-generation strategy, selectable by name.
pub trait Workflow: Send + Sync {
    fn tag(&self) -> WorkflowTag;

    fn name(&self) -> &'static str {
        self.tag().name()
    }

    fn run(&self, case: &DiffCase, ctx: &WorkflowContext<'_>) -> WorkflowResult;
}

pub struct WorkflowRegistry {
    workflows: IndexMap<&'static str, Box<dyn Workflow>>,
}

impl WorkflowRegistry {
    pub fn new() -> Self {
        WorkflowRegistry { workflows: IndexMap::new() }
    }

    pub fn register(&mut self, workflow: Box<dyn Workflow>) {
        self.workflows.insert(workflow.name(), workflow);
    }

    pub fn get(&self, name: &str) -> Option<&dyn Workflow> {
        self.workflows.get(name).map(|b| b.as_ref())
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.workflows.keys().copied().collect()
    }
}

impl Default for WorkflowRegistry {
    fn default() -> Self {
        let mut registry = WorkflowRegistry::new();
        registry.register(Box::new(CoincidentalCatchView));
        registry.register(Box::new(HardenNoCoverageWorkflow));
        registry.register(Box::new(HardenMutationGuidedWorkflow));
        registry.register(Box::new(DodgyDiffWorkflow));
        registry.register(Box::new(IntentAwareWorkflow));
        registry
    }
}

/// The coincidental-catch baseline is a reporting view over the
/// harden-no-coverage candidate pool, not an execution pass of its own.
/// Running it directly produces nothing; the report derives its row.
pub struct CoincidentalCatchView;

impl Workflow for CoincidentalCatchView {
    fn tag(&self) -> WorkflowTag {
        WorkflowTag::CoincidentalCatch
    }

    fn run(&self, case: &DiffCase, _ctx: &WorkflowContext<'_>) -> WorkflowResult {
        let mut result = WorkflowResult::new(&case.id, self.tag());
        result
            .notes
            .push("coincidental_catch is derived from harden_no_coverage candidates".to_string());
        result
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_registry_has_all_five_names() {
        let registry = WorkflowRegistry::default();
        for tag in WorkflowTag::ALL {
            assert!(registry.get(tag.name()).is_some(), "{} missing", tag.name());
        }
    }

    #[test]
    fn lookup_by_config_name() {
        let registry = WorkflowRegistry::default();
        assert_eq!(registry.get("dodgy_diff").unwrap().tag(), WorkflowTag::DodgyDiff);
        assert!(registry.get("unknown").is_none());
    }
}
