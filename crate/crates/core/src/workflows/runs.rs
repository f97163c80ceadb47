//! Workflow execution results and the two diff-aware workflows: dodgy diff
//! (treat the whole child as a mutant of the parent) and intent-aware
//! (infer intent, enumerate risks, materialize risk mutants, kill them).

use std::collections::BTreeSet;

use minilang::{execute, Expr, TestOutcome};
use serde::{Deserialize, Serialize};

use crate::corpus::{ChangeKind, compute_diff, DiffCase, ProgramSet};
use crate::generation::{
    generate_via_backend, kill_filter, GenerationContext, IdGen, KillEvidence, Provenance,
    TestCase,
};
use crate::mutation::rewrite::for_each_expr;
use crate::mutation::{materialize_risk, Mutant};

use super::intent::{enumerate_risks, infer_intent, IntentDescription};
use super::registry::{Workflow, WorkflowContext};
use super::{classify, CatchVerdict, WorkflowTag};

/// A candidate test with both outcomes and its verdict. `retained` marks
/// tests that survived the workflow's own filter (emitted output); the rest
/// stay recorded for counting and for the coincidental-catch view.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecutedTest {
    pub test: TestCase,
    pub parent_outcome: TestOutcome,
    pub child_outcome: TestOutcome,
    pub verdict: CatchVerdict,
    pub retained: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kill: Option<KillEvidence>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct WorkflowResult {
    pub case_id: String,
    pub workflow: Option<WorkflowTag>,
    pub executed: Vec<ExecutedTest>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub intent: Option<IntentDescription>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub risks: Vec<crate::mutation::Risk>,
    /// (risk id, reason) pairs for risks no operator could materialize.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub unmaterialized: Vec<(String, String)>,
    pub dropped_proposals: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl WorkflowResult {
    pub fn new(case_id: &str, workflow: WorkflowTag) -> Self {
        WorkflowResult {
            case_id: case_id.to_string(),
            workflow: Some(workflow),
            ..Default::default()
        }
    }

    pub fn weak_catches(&self) -> impl Iterator<Item = &ExecutedTest> {
        self.executed
            .iter()
            .filter(|t| t.retained && t.verdict == CatchVerdict::WeakCatch)
    }

    /// Countable candidates: everything the workflow generated except
    /// speculative filler.
    pub fn counted_tests(&self) -> impl Iterator<Item = &ExecutedTest> {
        self.executed.iter().filter(|t| !t.test.provenance.speculative)
    }
}

/// Execute a candidate on both sides and classify it.
pub fn execute_and_classify(
    test: &TestCase,
    parent: &ProgramSet,
    child: &ProgramSet,
    step_limit: u64,
    retained: bool,
    kill: Option<KillEvidence>,
) -> ExecutedTest {
    let parent_outcome = execute(&parent.programs(), &test.source, step_limit);
    let child_outcome = execute(&child.programs(), &test.source, step_limit);
    let verdict = classify(&parent_outcome, &child_outcome);
    ExecutedTest { test: test.clone(), parent_outcome, child_outcome, verdict, retained, kill }
}

/// Direct callees of each function in the set.
fn callees(set: &ProgramSet) -> Vec<(String, BTreeSet<String>)> {
    let mut out = Vec::new();
    for program in set.files.values() {
        for decl in program.functions.values() {
            let mut called = BTreeSet::new();
            for_each_expr(decl, &mut |expr| {
                if let Expr::Call { callee, .. } = expr {
                    called.insert(callee.clone());
                }
            });
            out.push((decl.name.clone(), called));
        }
    }
    out
}

/// Targets plus every function that transitively calls one of them.
pub fn with_transitive_callers(set: &ProgramSet, targets: &BTreeSet<String>) -> BTreeSet<String> {
    let graph = callees(set);
    let mut result = targets.clone();
    loop {
        let mut grew = false;
        for (name, called) in &graph {
            if !result.contains(name) && called.iter().any(|c| result.contains(c)) {
                result.insert(name.clone());
                grew = true;
            }
        }
        if !grew {
            return result;
        }
    }
}

/// Entry list for a diff-aware run: changed functions first, then their
/// callers, both sorted, all existing on the parent.
fn diff_aware_entries(case: &DiffCase) -> Vec<String> {
    let diff = compute_diff(&case.parent, &case.child);
    let changed: BTreeSet<String> = diff
        .changed_decls
        .iter()
        .filter(|d| d.kind != ChangeKind::Added)
        .map(|d| d.function.clone())
        .filter(|f| case.parent.find_function(f).is_some())
        .collect();
    let reachable = with_transitive_callers(&case.parent, &changed);
    let mut entries: Vec<String> = changed.iter().cloned().collect();
    entries.extend(reachable.difference(&changed).cloned());
    entries
}

/// Dodgy diff: the child is treated as a mutant of the parent, with no
/// intent inference. Tests are generated on the parent over the changed
/// entry points; the retained output is exactly the child-killing subset.
pub struct DodgyDiffWorkflow;

impl Workflow for DodgyDiffWorkflow {
    fn tag(&self) -> WorkflowTag {
        WorkflowTag::DodgyDiff
    }

    fn run(&self, case: &DiffCase, ctx: &WorkflowContext<'_>) -> WorkflowResult {
        let mut result = WorkflowResult::new(&case.id, self.tag());
        let entries = diff_aware_entries(case);
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

        // Child-as-mutant: killers are the retained set.
        let killers = kill_filter(&output.tests, &case.parent, &case.child, ctx.budgets.step_limit);
        let killer_ids: BTreeSet<&str> =
            killers.iter().map(|(t, _)| t.id.as_str()).collect();
        for test in &output.tests {
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
        result
    }
}

/// Intent-aware: infer the intent, enumerate risks, materialize each risk
/// as parent mutants, generate killer tests for those mutants, then run the
/// killers against the child.
pub struct IntentAwareWorkflow;

impl Workflow for IntentAwareWorkflow {
    fn tag(&self) -> WorkflowTag {
        WorkflowTag::IntentAware
    }

    fn run(&self, case: &DiffCase, ctx: &WorkflowContext<'_>) -> WorkflowResult {
        let mut result = WorkflowResult::new(&case.id, self.tag());
        let diff = compute_diff(&case.parent, &case.child);
        let intent = infer_intent(case, &diff, ctx.backend);
        let risks = enumerate_risks(case, &intent, &diff, ctx.backend, ctx.budgets.risks);
        result.intent = Some(intent.clone());
        result.risks = risks.clone();
        if risks.is_empty() {
            return result;
        }

        let mut mutants: Vec<Mutant> = Vec::new();
        for risk in &risks {
            if mutants.len() >= ctx.budgets.mutants {
                break;
            }
            let cap = ctx
                .budgets
                .mutants_per_risk
                .min(ctx.budgets.mutants - mutants.len());
            match materialize_risk(risk, &case.parent, ctx.operators, cap) {
                Ok(risk_mutants) => mutants.extend(risk_mutants),
                Err(err) => result.unmaterialized.push((err.risk_id.clone(), err.reason.clone())),
            }
        }

        let seed_pool = crate::generation::derive_seed_pool(&case.parent);
        let mut ids = IdGen::new(format!("{}-{}", case.id, self.tag().name()));
        let mut seen_sources: BTreeSet<String> = BTreeSet::new();
        let mut candidate_count = 0usize;

        for mutant in &mutants {
            if candidate_count >= ctx.budgets.observation_tests {
                break;
            }
            let targets: BTreeSet<String> =
                mutant.function_name().into_iter().collect();
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
                budget: ctx.budgets.tests_per_mutant,
                step_limit: ctx.budgets.step_limit,
                mutant: Some(mutant),
                intent: Some(&intent),
                risks: &risks,
            };
            let output = match generate_via_backend(
                ctx.backend,
                &generation_ctx,
                ctx.budgets.tests_per_mutant,
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

            let fresh: Vec<TestCase> = output
                .tests
                .into_iter()
                .filter(|t| seen_sources.insert(t.source.clone()))
                .take(ctx.budgets.observation_tests - candidate_count)
                .collect();
            candidate_count += fresh.len();

            let killers =
                kill_filter(&fresh, &case.parent, &mutant.mutated, ctx.budgets.step_limit);
            let killer_ids: BTreeSet<&str> =
                killers.iter().map(|(t, _)| t.id.as_str()).collect();
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

impl Mutant {
    /// Name of the function containing the mutated node. Node ids are
    /// preorder, so the containing declaration is the last one whose id is
    /// at or below the target.
    pub fn function_name(&self) -> Option<String> {
        let program = self.base.files.get(&self.file)?;
        let mut best: Option<&minilang::FunctionDecl> = None;
        for decl in program.functions.values() {
            if decl.id <= self.node_id {
                best = Some(decl);
            }
        }
        best.map(|d| d.name.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::DiffStatus;
    use crate::generation::TemplateGenerator;
    use crate::mutation::default_operator_registry;
    use crate::workflows::registry::Budgets;
    use minilang::parse;

    fn set(src: &str) -> ProgramSet {
        let mut s = ProgramSet::new();
        s.files.insert("m.ml0".to_string(), parse(src).unwrap());
        s
    }

    fn case(parent: &str, child: &str, title: &str) -> DiffCase {
        DiffCase {
            id: "case-1".to_string(),
            parent: set(parent),
            child: set(child),
            title: title.to_string(),
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
    fn dodgy_diff_catches_seeded_increment_change() {
        let case = case(
            "fn f(x){ return x + 1; }",
            "fn f(x){ return x + 2; }",
            "refactor",
        );
        let result = run_workflow(&DodgyDiffWorkflow, &case);
        let catches: Vec<_> = result.weak_catches().collect();
        assert!(!catches.is_empty());
        assert!(catches.iter().any(|t| t.test.source.contains("f(1), 2")
            || t.test.source.contains("f(0), 1")));
        // Soundness: re-verify outcomes.
        for catch in catches {
            assert!(catch.parent_outcome.status.is_pass());
            assert!(catch.child_outcome.status.is_fail());
        }
    }

    #[test]
    fn dodgy_diff_empty_diff_means_no_catches() {
        let case = case("fn f(x){ return x; }", "fn f(x){ return x; }", "noop");
        let result = run_workflow(&DodgyDiffWorkflow, &case);
        assert_eq!(result.weak_catches().count(), 0);
        assert!(result.executed.is_empty());
    }

    #[test]
    fn dodgy_diff_ignores_added_unused_function() {
        let case = case(
            "fn f(x){ return x; }",
            "fn f(x){ return x; }\nfn fresh(){ return 1; }",
            "add helper",
        );
        let result = run_workflow(&DodgyDiffWorkflow, &case);
        assert_eq!(result.weak_catches().count(), 0);
    }

    #[test]
    fn intent_aware_boundary_bug_names_a_risk_and_kills_its_mutant() {
        let case = case(
            "fn scan(n){\n    let i = 0;\n    let t = 0;\n    while (i <= n) {\n        t = t + i;\n        i = i + 1;\n    }\n    return t;\n}",
            "fn scan(n){\n    let i = 0;\n    let t = 0;\n    while (i < n) {\n        t = t + i;\n        i = i + 1;\n    }\n    return t;\n}",
            "refactor",
        );
        let result = run_workflow(&IntentAwareWorkflow, &case);
        assert!(!result.risks.is_empty());
        let catches: Vec<_> = result.weak_catches().collect();
        assert!(!catches.is_empty(), "executed: {}", result.executed.len());
        for catch in &catches {
            assert!(catch.test.provenance.risk_id.is_some(), "intent-aware catch must carry a risk");
            assert!(catch.test.provenance.operator_id.is_some());
            assert!(catch.kill.is_some(), "intent-aware catch must kill its mutant");
        }
    }

    #[test]
    fn intent_aware_zero_risks_means_no_tests() {
        let case = case("fn f(x){ return x; }", "fn f(x){ return x; }", "noop");
        let result = run_workflow(&IntentAwareWorkflow, &case);
        assert!(result.risks.is_empty());
        assert!(result.executed.is_empty());
    }

    #[test]
    fn caller_closure_reaches_indirect_entries() {
        let set = set(
            "fn leaf(x){ return x + 1; }\nfn mid(x){ return leaf(x) * 2; }\nfn top(x){ return mid(x); }\nfn lonely(){ return 0; }",
        );
        let targets: BTreeSet<String> = ["leaf".to_string()].into_iter().collect();
        let reachable = with_transitive_callers(&set, &targets);
        assert!(reachable.contains("mid"));
        assert!(reachable.contains("top"));
        assert!(!reachable.contains("lonely"));
    }
}
