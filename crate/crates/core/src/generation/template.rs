//! The deterministic default generator. Observation style: run the entry on
//! seed inputs, assert whatever the parent did. Given a mutant, it proposes
//! only the (entry, input) pairs whose outcome differs between parent and
//! mutant, which makes every proposal a killer by construction.

use minilang::{observed_outputs, value_literal, ObservedOutcome, Value};

use crate::corpus::ProgramSet;
use crate::workflows::WorkflowTag;

use super::{
    tuples_for_arity, BackendError, GenerationContext, GeneratorBackend, GenerationOutput, IdGen,
    Provenance, TestCase,
};

pub struct TemplateGenerator;

fn quote(text: &str) -> String {
    value_literal(&Value::Text(text.to_string()))
}

fn call_source(entry: &str, args: &[Value]) -> String {
    let rendered: Vec<String> = args.iter().map(value_literal).collect();
    format!("{}({})", entry, rendered.join(", "))
}

fn assertion_for(entry: &str, args: &[Value], outcome: &ObservedOutcome) -> Option<String> {
    let call = call_source(entry, args);
    match outcome {
        // Guard form: the trap assertion turns a raised exception on the
        // other side into an assertion failure with the exception recorded
        // in the trace, instead of an error outcome.
        ObservedOutcome::Value(value) => Some(format!(
            "assert_eq(trap({call}), null);\nassert_eq({call}, {});",
            value_literal(value)
        )),
        ObservedOutcome::Exception(kind) => {
            Some(format!("assert_eq(trap({call}), {});", quote(kind)))
        }
        ObservedOutcome::StepLimit => None,
    }
}

struct ObservedPair {
    entry: String,
    args: Vec<Value>,
    outcome: ObservedOutcome,
}

fn observe_entries(
    programs: &ProgramSet,
    entries: &[String],
    seed_pool: &[Value],
    tuple_cap: usize,
    step_limit: u64,
) -> Vec<ObservedPair> {
    let mut pairs = Vec::new();
    let refs = programs.programs();
    for entry in entries {
        let Some((_, decl)) = programs.find_function(entry) else { continue };
        let tuples = tuples_for_arity(seed_pool, decl.params.len(), tuple_cap);
        let Ok(observations) = observed_outputs(&refs, entry, &tuples, step_limit) else {
            continue;
        };
        for observation in observations {
            pairs.push(ObservedPair {
                entry: entry.clone(),
                args: observation.args,
                outcome: observation.outcome,
            });
        }
    }
    pairs
}

impl GeneratorBackend for TemplateGenerator {
    fn name(&self) -> &str {
        "template"
    }

    fn propose_tests(&self, ctx: &GenerationContext<'_>) -> Result<Vec<String>, BackendError> {
        let pairs =
            observe_entries(ctx.target, ctx.entry_points, ctx.seed_pool, ctx.tuple_cap, ctx.step_limit);

        let mut proposals = Vec::new();
        match ctx.mutant {
            Some(mutant) => {
                // Difference scanning: keep only pairs the mutant answers
                // differently, so each proposal kills it by construction.
                let mutant_refs = mutant.mutated.programs();
                for pair in &pairs {
                    if proposals.len() >= ctx.budget {
                        break;
                    }
                    let Ok(mutant_obs) = observed_outputs(
                        &mutant_refs,
                        &pair.entry,
                        std::slice::from_ref(&pair.args),
                        ctx.step_limit,
                    ) else {
                        continue;
                    };
                    let differs = mutant_obs
                        .first()
                        .map_or(false, |observation| observation.outcome != pair.outcome);
                    if differs {
                        if let Some(source) = assertion_for(&pair.entry, &pair.args, &pair.outcome)
                        {
                            proposals.push(source);
                        }
                    }
                }
            }
            None => {
                // Plain observation: normal values make better assertions
                // than exception expectations, so emit them first.
                let (values, exceptions): (Vec<&ObservedPair>, Vec<&ObservedPair>) = pairs
                    .iter()
                    .partition(|pair| matches!(pair.outcome, ObservedOutcome::Value(_)));
                for pair in values.into_iter().chain(exceptions) {
                    if proposals.len() >= ctx.budget {
                        break;
                    }
                    if let Some(source) = assertion_for(&pair.entry, &pair.args, &pair.outcome) {
                        proposals.push(source);
                    }
                }
            }
        }
        Ok(proposals)
    }
}

/// Observation tests on the parent: every emitted test is re-executed and
/// must pass on the parent before emission.
#[allow(clippy::too_many_arguments)]
pub fn generate_observation_tests(
    parent: &ProgramSet,
    entries: &[String],
    seed_pool: &[Value],
    tuple_cap: usize,
    budget: usize,
    step_limit: u64,
    ids: &mut IdGen,
    provenance: &Provenance,
) -> Vec<TestCase> {
    assert!(budget > 0, "test budget must be positive");
    let ctx = GenerationContext {
        case_id: "",
        target: parent,
        entry_points: entries,
        seed_pool,
        tuple_cap,
        budget,
        step_limit,
        mutant: None,
        intent: None,
        risks: &[],
    };
    let GenerationOutput { tests, .. } = super::generate_via_backend(
        &TemplateGenerator,
        &ctx,
        budget,
        ids,
        provenance,
    )
    .expect("template generator cannot be unavailable");

    let refs = parent.programs();
    tests
        .into_iter()
        .filter(|test| {
            minilang::execute(&refs, &test.source, step_limit).status.is_pass()
        })
        .collect()
}

fn perturb(value: &Value) -> Value {
    match value {
        Value::Int(v) => Value::Int(v.wrapping_add(1)),
        Value::Bool(v) => Value::Bool(!v),
        Value::Text(v) => Value::Text(format!("{v}x")),
        Value::List(items) => {
            let mut items = items.clone();
            items.push(Value::Int(0));
            Value::List(items)
        }
        Value::Map(entries) => {
            let mut entries = entries.clone();
            entries.insert("zz".to_string(), Value::Int(0));
            Value::Map(entries)
        }
        Value::Null => Value::Int(0),
    }
}

/// Speculative candidates with deliberately wrong expectations, modelling
/// the generated-test failure modes a verification step would discard.
/// They fail on the parent by construction and exist only so the
/// coincidental-catch view has a fail-on-child pool to be measured against.
pub fn generate_speculative_tests(
    parent: &ProgramSet,
    entries: &[String],
    seed_pool: &[Value],
    tuple_cap: usize,
    budget: usize,
    step_limit: u64,
    ids: &mut IdGen,
    backend_name: &str,
) -> Vec<TestCase> {
    let pairs = observe_entries(parent, entries, seed_pool, tuple_cap, step_limit);
    let mut tests = Vec::new();
    for pair in pairs {
        if tests.len() >= budget {
            break;
        }
        let source = match &pair.outcome {
            ObservedOutcome::Value(value) => format!(
                "assert_eq({}, {});",
                call_source(&pair.entry, &pair.args),
                value_literal(&perturb(value))
            ),
            ObservedOutcome::Exception(kind) => format!(
                "assert_eq(trap({}), {});",
                call_source(&pair.entry, &pair.args),
                quote(&format!("{kind}x"))
            ),
            ObservedOutcome::StepLimit => continue,
        };
        let mut provenance = Provenance::new(WorkflowTag::HardenNoCoverage, backend_name)
            .with_entry(&pair.entry);
        provenance.speculative = true;
        if let Ok(test) = TestCase::new(ids.next_id(), source, provenance) {
            tests.push(test);
        }
    }
    tests
}

#[cfg(test)]
mod tests {
    use super::*;
    use minilang::parse;

    fn set(src: &str) -> ProgramSet {
        let mut s = ProgramSet::new();
        s.files.insert("m.ml0".to_string(), parse(src).unwrap());
        s
    }

    fn seed_ints() -> Vec<Value> {
        vec![Value::Int(1)]
    }

    #[test]
    fn observation_test_passes_on_parent_by_construction() {
        let parent = set("fn f(x){ return x + 1; }");
        let mut ids = IdGen::new("c-harden");
        let tests = generate_observation_tests(
            &parent,
            &["f".to_string()],
            &seed_ints(),
            8,
            10,
            10_000,
            &mut ids,
            &Provenance::new(WorkflowTag::HardenNoCoverage, "template"),
        );
        assert_eq!(tests.len(), 1);
        assert_eq!(tests[0].source, "assert_eq(trap(f(1)), null);\nassert_eq(f(1), 2);");
        let outcome = minilang::execute(&parent.programs(), &tests[0].source, 10_000);
        assert!(outcome.status.is_pass());
    }

    #[test]
    fn child_exception_becomes_assert_failure_with_trace_evidence() {
        let parent = set("fn f(x){ return x + 1; }");
        let child = set("fn f(x){ throw \"key_out_of_bounds\"; }");
        let mut ids = IdGen::new("c");
        let tests = generate_observation_tests(
            &parent,
            &["f".to_string()],
            &seed_ints(),
            8,
            10,
            10_000,
            &mut ids,
            &Provenance::new(WorkflowTag::DodgyDiff, "template"),
        );
        let outcome = minilang::execute(&child.programs(), &tests[0].source, 10_000);
        assert!(outcome.status.is_fail(), "status: {:?}", outcome.status);
        assert!(outcome.trace.is_well_formed(), "trace: {}", outcome.trace.render());
        assert!(outcome
            .trace
            .exceptions()
            .any(|e| matches!(e, minilang::TraceEvent::Exception { kind, .. } if kind == "key_out_of_bounds")));
    }

    #[test]
    fn throwing_entry_yields_exception_assertion() {
        let parent = set("fn f(x){ throw \"boom\"; }");
        let mut ids = IdGen::new("c");
        let tests = generate_observation_tests(
            &parent,
            &["f".to_string()],
            &seed_ints(),
            8,
            10,
            10_000,
            &mut ids,
            &Provenance::new(WorkflowTag::HardenNoCoverage, "template"),
        );
        assert_eq!(tests.len(), 1);
        assert_eq!(tests[0].source, "assert_eq(trap(f(1)), \"boom\");");
        assert!(minilang::execute(&parent.programs(), &tests[0].source, 10_000).status.is_pass());
    }

    #[test]
    fn budget_is_exact_and_selection_deterministic() {
        let parent = set("fn f(x){ return x; }");
        let pool: Vec<Value> = (0..10).map(Value::Int).collect();
        let mut ids = IdGen::new("c");
        let run = |ids: &mut IdGen| {
            generate_observation_tests(
                &parent,
                &["f".to_string()],
                &pool,
                32,
                3,
                10_000,
                ids,
                &Provenance::new(WorkflowTag::HardenNoCoverage, "template"),
            )
        };
        let first = run(&mut ids);
        assert_eq!(first.len(), 3);
        let mut ids2 = IdGen::new("c");
        let second = run(&mut ids2);
        let sources: Vec<_> = first.iter().map(|t| &t.source).collect();
        let sources2: Vec<_> = second.iter().map(|t| &t.source).collect();
        assert_eq!(sources, sources2);
    }

    #[test]
    fn speculative_tests_fail_on_parent() {
        let parent = set("fn f(x){ return x + 1; }");
        let mut ids = IdGen::new("c-spec");
        let tests = generate_speculative_tests(
            &parent,
            &["f".to_string()],
            &seed_ints(),
            8,
            10,
            10_000,
            &mut ids,
            "template",
        );
        assert!(!tests.is_empty());
        for test in &tests {
            assert!(test.provenance.speculative);
            let outcome = minilang::execute(&parent.programs(), &test.source, 10_000);
            assert!(outcome.status.is_fail(), "speculative test passed: {}", test.source);
        }
    }
}
