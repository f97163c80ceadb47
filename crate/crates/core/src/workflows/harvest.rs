//! Coincidental-hardening harvest: tests that passed on both sides are a
//! useful byproduct and can land as ordinary hardening tests.

use indexmap::IndexSet;
use minilang::parse_test_statements;

use crate::generation::TestCase;

use super::runs::WorkflowResult;
use super::CatchVerdict;

/// Canonical (entry, assertion) shape used for deduplication: the parsed and
/// reprinted statement list, so formatting differences collapse.
fn shape_of(test: &TestCase) -> String {
    let entry = test.entry_function().unwrap_or_default();
    let body = match parse_test_statements(&test.source) {
        Ok(script) => {
            let mut out = String::new();
            for stmt in &script.stmts {
                minilang::printer::print_stmt(&mut out, stmt, 0);
            }
            out
        }
        Err(_) => test.source.clone(),
    };
    format!("{entry}\n{body}")
}

/// All pass-on-both tests across results, deduplicated by (entry, assertion)
/// shape. Speculative candidates never qualify (they cannot pass the
/// parent).
pub fn harvest_hardening(results: &[WorkflowResult]) -> Vec<TestCase> {
    let mut seen: IndexSet<String> = IndexSet::new();
    let mut harvested = Vec::new();
    for result in results {
        for executed in &result.executed {
            if executed.verdict != CatchVerdict::CoincidentalHarden
                || executed.test.provenance.speculative
            {
                continue;
            }
            if seen.insert(shape_of(&executed.test)) {
                harvested.push(executed.test.clone());
            }
        }
    }
    harvested
}
