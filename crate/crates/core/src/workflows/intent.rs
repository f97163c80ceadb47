//! Intent inference and risk enumeration. The default inferrer builds a
//! canonical template from the title, summary and changed declarations; the
//! default risk heuristic maps diff features to risk categories. A backend
//! may replace either.

use serde::{Deserialize, Serialize};

use minilang::Program;

use crate::corpus::{ChangeKind, Diff, DiffCase, ProgramSet};
use crate::generation::GeneratorBackend;
use crate::mutation::{Risk, RiskCategory};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntentSources {
    pub title: String,
    pub summary: String,
    pub changed_decls: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntentDescription {
    pub text: String,
    pub derived_from: IntentSources,
}

/// Build the intent description. The default template concatenates title,
/// summary and changed declaration names; a backend may supply richer text,
/// which is used verbatim.
pub fn infer_intent(
    case: &DiffCase,
    diff: &Diff,
    backend: &dyn GeneratorBackend,
) -> IntentDescription {
    let changed: Vec<String> = diff.changed_decls.iter().map(|d| d.function.clone()).collect();
    let derived_from = IntentSources {
        title: case.title.clone(),
        summary: case.summary.clone(),
        changed_decls: changed.clone(),
    };

    if let Ok(Some(text)) = backend.infer_intent(case, &changed) {
        return IntentDescription { text, derived_from };
    }

    let mut parts = Vec::new();
    if !case.title.is_empty() {
        parts.push(format!("title: {}", case.title));
    }
    if !case.summary.is_empty() {
        parts.push(format!("summary: {}", case.summary));
    }
    if !changed.is_empty() {
        parts.push(format!("changed: {}", changed.join(", ")));
    }
    if parts.is_empty() {
        parts.push("no stated intent; no declarations changed".to_string());
    }
    IntentDescription { text: parts.join("\n"), derived_from }
}

/// 1-based line range a function's span covers.
fn decl_line_ranges(program: &Program) -> Vec<(String, u32, u32)> {
    let line_of = |offset: usize| -> u32 {
        program.source_text[..offset.min(program.source_text.len())]
            .bytes()
            .filter(|&b| b == b'\n')
            .count() as u32
            + 1
    };
    program
        .functions
        .values()
        .filter_map(|decl| {
            let span = program.span(decl.id)?;
            Some((decl.name.clone(), line_of(span.start), line_of(span.end.saturating_sub(1))))
        })
        .collect()
}

fn quoted_tokens(line: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut rest = line;
    while let Some(start) = rest.find('"') {
        let Some(len) = rest[start + 1..].find('"') else { break };
        tokens.push(rest[start + 1..start + 1 + len].to_string());
        rest = &rest[start + 1 + len + 1..];
    }
    tokens
}

fn let_binding_name(line: &str) -> Option<&str> {
    let trimmed = line.trim_start();
    let rest = trimmed.strip_prefix("let ")?;
    let name_len = rest.find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))?;
    (name_len > 0).then(|| &rest[..name_len])
}

/// Enumerate up to `cap` risks for the diff. The default heuristic maps
/// textual diff features onto categories per changed function: comparison
/// or loop-condition edits imply boundary, boolean-expression edits imply
/// boolean, container-literal or key edits imply container/ordering, new
/// throws imply exception, removed initializations imply null. A fallback
/// "other" risk per changed function keeps every behavioral change covered.
pub fn enumerate_risks(
    case: &DiffCase,
    intent: &IntentDescription,
    diff: &Diff,
    backend: &dyn GeneratorBackend,
    cap: usize,
) -> Vec<Risk> {
    assert!(cap > 0, "risk cap must be positive");
    if let Ok(Some(mut risks)) = backend.enumerate_risks(&case.id, intent, diff, cap) {
        risks.truncate(cap);
        return risks;
    }
    default_risks(&case.parent, &case.child, diff, cap)
}

fn default_risks(parent: &ProgramSet, child: &ProgramSet, diff: &Diff, cap: usize) -> Vec<Risk> {
    let mut found: Vec<(RiskCategory, String, String)> = Vec::new(); // (category, file, function)
    let mut push = |category: RiskCategory, file: &str, function: &str| {
        let entry = (category, file.to_string(), function.to_string());
        if !found.contains(&entry) {
            found.push(entry);
        }
    };

    for hunk in &diff.hunks {
        // Functions of the parent (and child) whose lines this hunk touches.
        let mut touched: Vec<String> = Vec::new();
        if let Some(program) = parent.files.get(&hunk.file) {
            let hunk_end = hunk.parent_start + hunk.parent_len.max(1) - 1;
            for (name, start, end) in decl_line_ranges(program) {
                if hunk.parent_start <= end && hunk_end >= start {
                    touched.push(name);
                }
            }
        }
        if let Some(program) = child.files.get(&hunk.file) {
            let hunk_end = hunk.child_start + hunk.child_len.max(1) - 1;
            for (name, start, end) in decl_line_ranges(program) {
                // Only functions that also exist on the parent can anchor a
                // mutant.
                if hunk.child_start <= end
                    && hunk_end >= start
                    && parent.find_function(&name).is_some()
                    && !touched.contains(&name)
                {
                    touched.push(name);
                }
            }
        }
        if touched.is_empty() {
            continue;
        }

        let changed: Vec<&str> = hunk
            .removed
            .iter()
            .chain(hunk.added.iter())
            .map(String::as_str)
            .collect();
        let has = |needle: &str| changed.iter().any(|line| line.contains(needle));
        let boundary =
            has("while (") || has("<") || has(">") || has("<=") || has(">=");
        let boolean = has("true") || has("false") || has("&&") || has("||") || has("!");
        let container = has("[") || has("{\"") || has("keys(") || has("len(");
        let exception = hunk.added.iter().any(|line| line.contains("throw"));
        let null_risk = hunk.removed.iter().any(|line| {
            let Some(name) = let_binding_name(line) else { return false };
            !hunk.added.iter().any(|added| {
                let_binding_name(added).map_or(false, |added_name| added_name == name)
            })
        });
        // Same quoted keys on both sides of a hunk in a different order
        // suggests a reorder rather than a content change.
        let ordering = hunk.removed.iter().any(|removed| {
            let mut keys = quoted_tokens(removed);
            if keys.len() < 2 {
                return false;
            }
            hunk.added.iter().any(|added| {
                let added_keys = quoted_tokens(added);
                if added_keys.len() != keys.len() || added_keys == keys {
                    return false;
                }
                keys.sort();
                let mut sorted_added = added_keys;
                sorted_added.sort();
                sorted_added == keys
            })
        });

        for function in &touched {
            if boundary {
                push(RiskCategory::Boundary, &hunk.file, function);
            }
            if boolean {
                push(RiskCategory::Boolean, &hunk.file, function);
            }
            if ordering {
                push(RiskCategory::Ordering, &hunk.file, function);
            }
            if container {
                push(RiskCategory::Container, &hunk.file, function);
            }
            if exception {
                push(RiskCategory::Exception, &hunk.file, function);
            }
            if null_risk {
                push(RiskCategory::Null, &hunk.file, function);
            }
        }
    }

    // Fallback coverage: every modified declaration carries at least an
    // unclassified risk.
    for decl in &diff.changed_decls {
        if decl.kind == ChangeKind::Modified {
            let entry = (RiskCategory::Other, decl.file.clone(), decl.function.clone());
            if !found.contains(&entry) {
                found.push(entry);
            }
        }
    }

    found.sort_by(|a, b| (a.0, &a.1, &a.2).cmp(&(b.0, &b.1, &b.2)));
    found.truncate(cap);
    found
        .into_iter()
        .map(|(category, file, function)| Risk {
            id: format!("r-{}-{}", category.label(), function),
            description: describe_risk(category, &function),
            locations: vec![(file, function)],
            category,
        })
        .collect()
}

fn describe_risk(category: RiskCategory, function: &str) -> String {
    match category {
        RiskCategory::Boundary => format!("boundary or off-by-one slip in conditions of `{function}`"),
        RiskCategory::Boolean => format!("boolean logic inverted or miswired in `{function}`"),
        RiskCategory::Container => format!("container contents or keys broken in `{function}`"),
        RiskCategory::Null => format!("missing initialization leaves a null in `{function}`"),
        RiskCategory::Exception => format!("new exception path escapes from `{function}`"),
        RiskCategory::Ordering => format!("map entry order changed in `{function}`"),
        RiskCategory::Other => format!("unclassified behavioral slip in `{function}`"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{compute_diff, DiffStatus};
    use crate::generation::TemplateGenerator;
    use minilang::parse;

    fn set(src: &str) -> ProgramSet {
        let mut s = ProgramSet::new();
        s.files.insert("m.ml0".to_string(), parse(src).unwrap());
        s
    }

    fn case(parent: &str, child: &str, title: &str, summary: &str) -> DiffCase {
        DiffCase {
            id: "case-1".to_string(),
            parent: set(parent),
            child: set(child),
            title: title.to_string(),
            summary: summary.to_string(),
            status: DiffStatus::Unlabelled,
            ground_truth: None,
            risk_score: 0.5,
        }
    }

    #[test]
    fn default_intent_concatenates_sources() {
        let case = case(
            "fn f(x){ return x + 1; }",
            "fn f(x){ return x + 2; }",
            "fix loop bound",
            "",
        );
        let diff = compute_diff(&case.parent, &case.child);
        let intent = infer_intent(&case, &diff, &TemplateGenerator);
        assert!(intent.text.contains("fix loop bound"));
        assert!(intent.text.contains("f"));
        assert_eq!(intent.derived_from.changed_decls, vec!["f".to_string()]);
    }

    #[test]
    fn empty_title_and_summary_still_yield_intent() {
        let case = case("fn f(x){ return x + 1; }", "fn f(x){ return x + 2; }", "", "");
        let diff = compute_diff(&case.parent, &case.child);
        let intent = infer_intent(&case, &diff, &TemplateGenerator);
        assert!(intent.text.contains("changed: f"));
    }

    #[test]
    fn boundary_risk_from_loop_condition_edit() {
        let case = case(
            "fn f(n){\n    let i = 0;\n    let t = 0;\n    while (i <= n) {\n        t = t + i;\n        i = i + 1;\n    }\n    return t;\n}",
            "fn f(n){\n    let i = 0;\n    let t = 0;\n    while (i < n) {\n        t = t + i;\n        i = i + 1;\n    }\n    return t;\n}",
            "tidy",
            "",
        );
        let diff = compute_diff(&case.parent, &case.child);
        let intent = infer_intent(&case, &diff, &TemplateGenerator);
        let risks = enumerate_risks(&case, &intent, &diff, &TemplateGenerator, 10);
        assert!(
            risks.iter().any(|r| r.category == RiskCategory::Boundary
                && r.locations.contains(&("m.ml0".to_string(), "f".to_string()))),
            "risks: {risks:?}"
        );
    }

    #[test]
    fn empty_diff_has_no_risks() {
        let case = case("fn f(x){ return x; }", "fn f(x){ return x; }", "noop", "");
        let diff = compute_diff(&case.parent, &case.child);
        let intent = infer_intent(&case, &diff, &TemplateGenerator);
        assert!(enumerate_risks(&case, &intent, &diff, &TemplateGenerator, 10).is_empty());
    }

    #[test]
    fn added_throw_is_an_exception_risk() {
        let case = case(
            "fn f(x){\n    return x;\n}",
            "fn f(x){\n    throw \"not_implemented\";\n}",
            "rework f",
            "",
        );
        let diff = compute_diff(&case.parent, &case.child);
        let intent = infer_intent(&case, &diff, &TemplateGenerator);
        let risks = enumerate_risks(&case, &intent, &diff, &TemplateGenerator, 10);
        assert!(
            risks.iter().any(|r| r.category == RiskCategory::Exception),
            "risks: {risks:?}"
        );
    }

    #[test]
    fn risks_respect_cap_and_order() {
        let case = case(
            "fn f(n){\n    let keep = 1;\n    if (n > keep) {\n        return true;\n    }\n    return false;\n}",
            "fn f(n){\n    if (n >= 1) {\n        return false;\n    }\n    return true;\n}",
            "rewrite",
            "",
        );
        let diff = compute_diff(&case.parent, &case.child);
        let intent = infer_intent(&case, &diff, &TemplateGenerator);
        let risks = enumerate_risks(&case, &intent, &diff, &TemplateGenerator, 2);
        assert_eq!(risks.len(), 2);
        // Sorted by category: boundary before boolean.
        assert_eq!(risks[0].category, RiskCategory::Boundary);
    }
}
