//! Diff-unaware baselines. Both generate against the parent only, with no
//! diff, intent or risk information; their catches are whatever happens to
//! fail on the child afterwards.

use std::collections::BTreeSet;

use crate::corpus::DiffCase;
use crate::generation::{
    generate_speculative_tests, generate_via_backend, kill_filter, GenerationContext, IdGen,
    Provenance,
};
use crate::mutation::enumerate_mutants;

use super::registry::{Workflow, WorkflowContext};
use super::runs::{execute_and_classify, with_transitive_callers, WorkflowResult};
use super::WorkflowTag;

fn all_entries(case: &DiffCase) -> Vec<String> {
    let mut entries: Vec<String> = case
        .parent
        .files
        .values()
        .flat_map(|p| p.functions.keys().cloned())
        .collect();
    entries.sort();
    entries
}

/// Variant A: any test that builds and passes on the parent is emitted, no
/// coverage requirement. Unverified speculative candidates are executed too
/// (never emitted); they exist so the coincidental-catch view has the full
/// fail-on-child pool the paper measures against.
pub struct HardenNoCoverageWorkflow;

impl Workflow for HardenNoCoverageWorkflow {
    fn tag(&self) -> WorkflowTag {
        WorkflowTag::HardenNoCoverage
    }

    fn run(&self, case: &DiffCase, ctx: &WorkflowContext<'_>) -> WorkflowResult {
        let mut result = WorkflowResult::new(&case.id, self.tag());
        let entries = all_entries(case);
        if entries.is_empty() {
            return result;
        }
        let seed_pool = crate::generation::derive_seed_pool(&case.parent);
        let mut ids = IdGen::new(format!("{}-{}", case.id, self.tag().name()));
        let provenance = Provenance::new(self.tag(), ctx.backend.name());
        let generation_ctx = GenerationContext {
            case_id: &case.id,
            target: &case.parent,
            entry_points: &entries,
            seed_pool: &seed_pool,
            tuple_cap: ctx.budgets.tuple_cap,
            budget: ctx.budgets.observation_tests,
            step_limit: ctx.budgets.step_limit,
            mutant: None,
            intent: None,
            risks: &[],
        };
        let output = match generate_via_backend(
            ctx.backend,
            &generation_ctx,
            ctx.budgets.observation_tests,
            &mut ids,
            &provenance,
        ) {
            Ok(output) => output,
            Err(err) => {
                result.notes.push(format!("backend failed: {err}"));
                return result;
            }
        };
        result.dropped_proposals = output.dropped;

        for test in &output.tests {
            let executed = execute_and_classify(
                test,
                &case.parent,
                &case.child,
                ctx.budgets.step_limit,
                false,
                None,
            );
            // Emission rule: passes on the parent.
            let retained = executed.parent_outcome.status.is_pass();
            result.executed.push(super::runs::ExecutedTest { retained, ..executed });
        }

        // The unverified candidate pool runs well past the emitted set, the
        // way raw generation outnumbers verified survivors.
        let speculative = generate_speculative_tests(
            &case.parent,
            &entries,
            &seed_pool,
            ctx.budgets.tuple_cap,
            ctx.budgets.observation_tests * 2,
            ctx.budgets.step_limit,
            &mut ids,
            ctx.backend.name(),
        );
        for test in &speculative {
            result.executed.push(execute_and_classify(
                test,
                &case.parent,
                &case.child,
                ctx.budgets.step_limit,
                false,
                None,
            ));
        }
        result
    }
}

/// Variant B: mutation-guided hardening. Mutants of the parent (not the
/// child) are enumerated blindly; emitted tests are the mutant killers.
pub struct HardenMutationGuidedWorkflow;

impl Workflow for HardenMutationGuidedWorkflow {
    fn tag(&self) -> WorkflowTag {
        WorkflowTag::HardenMutationGuided
    }

    fn run(&self, case: &DiffCase, ctx: &WorkflowContext<'_>) -> WorkflowResult {
        let mut result = WorkflowResult::new(&case.id, self.tag());
        let seed_pool = crate::generation::derive_seed_pool(&case.parent);
        let operators = ctx.operators.all();
        let mutants = enumerate_mutants(&case.parent, &operators, ctx.budgets.mutants);
        let mut ids = IdGen::new(format!("{}-{}", case.id, self.tag().name()));
        let mut seen_sources: BTreeSet<String> = BTreeSet::new();
        let mut candidate_count = 0usize;

        for mutant in &mutants {
            if candidate_count >= ctx.budgets.observation_tests {
                break;
            }
            let targets: BTreeSet<String> = mutant.function_name().into_iter().collect();
            if targets.is_empty() {
                continue;
            }
            let reachable = with_transitive_callers(&case.parent, &targets);
            let mut entries: Vec<String> = targets.iter().cloned().collect();
            entries.extend(reachable.difference(&targets).cloned());

            let provenance =
                Provenance::new(self.tag(), ctx.backend.name()).with_mutant(mutant);
            let generation_ctx = GenerationContext {
                case_id: &case.id,
                target: &case.parent,
                entry_points: &entries,
                seed_pool: &seed_pool,
                tuple_cap: ctx.budgets.tuple_cap,
                budget: 1,
                step_limit: ctx.budgets.step_limit,
                mutant: Some(mutant),
                intent: None,
                risks: &[],
            };
            let output = match generate_via_backend(
                ctx.backend,
                &generation_ctx,
                1,
                &mut ids,
                &provenance,
            ) {
                Ok(output) => output,
                Err(err) => {
                    result.notes.push(format!("backend failed on {}: {err}", mutant.key()));
                    continue;
                }
            };
            result.dropped_proposals += output.dropped;

            let fresh: Vec<_> = output
                .tests
                .into_iter()
                .filter(|t| seen_sources.insert(t.source.clone()))
                .take(ctx.budgets.observation_tests - candidate_count)
                .collect();
            candidate_count += fresh.len();

            let killers =
                kill_filter(&fresh, &case.parent, &mutant.mutated, ctx.budgets.step_limit);
            let killer_ids: BTreeSet<&str> = killers.iter().map(|(t, _)| t.id.as_str()).collect();
            for test in &fresh {
                let kill = killers
                    .iter()
                    .find(|(t, _)| t.id == test.id)
                    .map(|(_, evidence)| evidence.clone());
                result.executed.push(execute_and_classify(
                    test,
                    &case.parent,
                    &case.child,
                    ctx.budgets.step_limit,
                    killer_ids.contains(test.id.as_str()),
                    kill,
                ));
            }
        }
        result
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{DiffStatus, ProgramSet};
    use crate::generation::TemplateGenerator;
    use crate::mutation::default_operator_registry;
    use crate::workflows::registry::Budgets;
    use crate::workflows::CatchVerdict;
    use minilang::parse;

    fn set(src: &str) -> ProgramSet {
        let mut s = ProgramSet::new();
        s.files.insert("m.ml0".to_string(), parse(src).unwrap());
        s
    }

    fn case(parent: &str, child: &str) -> DiffCase {
        DiffCase {
            id: "case-h".to_string(),
            parent: set(parent),
            child: set(child),
            title: "t".to_string(),
            summary: String::new(),
            status: DiffStatus::Unlabelled,
            ground_truth: None,
            risk_score: 1.0,
        }
    }

    fn run_workflow(workflow: &dyn Workflow, case: &DiffCase) -> WorkflowResult {
        let registry = default_operator_registry();
        let budgets = Budgets::default();
        let ctx = WorkflowContext {
            backend: &TemplateGenerator,
            budgets: &budgets,
            operators: &registry,
        };
        workflow.run(case, &ctx)
    }

    #[test]
    fn empty_diff_case_yields_hardens_only() {
        let case = case("fn f(x){ return x + 1; }", "fn f(x){ return x + 1; }");
        let result = run_workflow(&HardenNoCoverageWorkflow, &case);
        assert_eq!(result.weak_catches().count(), 0);
        assert!(result
            .executed
            .iter()
            .filter(|t| !t.test.provenance.speculative)
            .all(|t| t.verdict == CatchVerdict::CoincidentalHarden));
        // Speculative pool exists and fails on both sides.
        assert!(result.executed.iter().any(|t| t.test.provenance.speculative));
    }

    #[test]
    fn harden_generation_never_reads_the_child() {
        // The child adds a function; harden entries come from the parent, so
        // no test can mention it.
        let case = case(
            "fn f(x){ return x + 1; }",
            "fn f(x){ return x + 1; }\nfn fresh(){ return 2; }",
        );
        let result = run_workflow(&HardenNoCoverageWorkflow, &case);
        assert!(result.executed.iter().all(|t| !t.test.source.contains("fresh")));
    }

    #[test]
    fn mutation_guided_emits_killers_that_pass_on_parent() {
        let case = case(
            "fn f(x){ return x + 1; }\nfn g(x){ if (x < 2) { return true; } return false; }",
            "fn f(x){ return x + 1; }\nfn g(x){ if (x < 2) { return true; } return false; }",
        );
        let result = run_workflow(&HardenMutationGuidedWorkflow, &case);
        assert!(!result.executed.is_empty());
        for test in result.executed.iter().filter(|t| t.retained) {
            assert!(test.parent_outcome.status.is_pass());
            assert!(test.kill.is_some());
        }
    }
}
