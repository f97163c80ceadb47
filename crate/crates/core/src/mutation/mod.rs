//! AST mutation: an operator registry, mutant enumeration over program sets,
//! and materialization of risks into targeted mutants.
//!
//! Every mutant differs from its base at exactly one AST node, reparses
//! cleanly, and records which operator produced it at which node.

pub mod ast_diff;
pub mod operators;
pub mod rewrite;
pub mod risk;

pub use ast_diff::edit_site_count;
pub use operators::{default_operator_registry, OperatorRegistry};
pub use rewrite::{apply_rewrite, Rewrite};
pub use risk::{operators_for_category, Risk, RiskCategory};

use indexmap::IndexMap;
use minilang::{FunctionDecl, NodeId};
use thiserror::Error;

use crate::corpus::ProgramSet;

/// One applicable rewrite, registered by a named operator.
pub trait MutationOperator: Send + Sync {
    fn id(&self) -> &'static str;
    fn description(&self) -> &'static str;
    /// All rewrites the operator proposes within one function, in source
    /// (node id) order.
    fn propose(&self, decl: &FunctionDecl) -> Vec<Rewrite>;
}

/// A single-edit variant of a base program set.
#[derive(Debug, Clone)]
pub struct Mutant {
    pub base: ProgramSet,
    pub mutated: ProgramSet,
    pub operator_id: String,
    pub node_id: NodeId,
    pub file: String,
    /// Set when the mutant was materialized from a risk.
    pub risk_id: Option<String>,
    pub description: String,
}

impl Mutant {
    /// Stable identity within a case: file, node, operator, disambiguator.
    pub fn key(&self) -> String {
        match &self.risk_id {
            Some(risk) => format!("{}:{}:{}:{}", self.file, self.node_id, self.operator_id, risk),
            None => format!("{}:{}:{}", self.file, self.node_id, self.operator_id),
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("risk {risk_id} unmaterializable: {reason}")]
pub struct RiskUnmaterializable {
    pub risk_id: String,
    pub reason: String,
}

struct Candidate {
    file: String,
    node_id: NodeId,
    operator_id: &'static str,
    rewrite: Rewrite,
    description: String,
}

fn collect_candidates(
    programs: &ProgramSet,
    operators: &[&dyn MutationOperator],
    location_filter: Option<&[(String, String)]>,
) -> Vec<Candidate> {
    let mut candidates = Vec::new();
    for (file, program) in &programs.files {
        for decl in program.functions.values() {
            if let Some(filter) = location_filter {
                let here = filter
                    .iter()
                    .any(|(f, function)| f == file && function == &decl.name);
                if !here {
                    continue;
                }
            }
            for op in operators.iter() {
                for rw in op.propose(decl) {
                    candidates.push(Candidate {
                        file: file.clone(),
                        node_id: rw.target_node(decl),
                        operator_id: op.id(),
                        description: rw.describe(),
                        rewrite: rw,
                    });
                }
            }
        }
    }
    candidates.sort_by(|a, b| {
        (&a.file, a.node_id, a.operator_id, a.describe_key())
            .cmp(&(&b.file, b.node_id, b.operator_id, b.describe_key()))
    });
    candidates
}

impl Candidate {
    fn describe_key(&self) -> &str {
        &self.description
    }
}

fn build_mutants(
    programs: &ProgramSet,
    candidates: Vec<Candidate>,
    budget: usize,
    risk_id: Option<&str>,
) -> Vec<Mutant> {
    // Materialize candidates, dropping rewrites that fail to reparse and
    // duplicates that yield an identical mutated source.
    let mut seen = std::collections::BTreeSet::new();
    let mut built: Vec<Mutant> = Vec::new();
    for candidate in candidates {
        let Some(mutated) = apply_rewrite(programs, &candidate.file, &candidate.rewrite) else {
            continue;
        };
        let fingerprint: String =
            mutated.files.values().map(|p| p.source_text.clone()).collect();
        if !seen.insert(fingerprint) {
            continue;
        }
        built.push(Mutant {
            base: programs.clone(),
            mutated,
            operator_id: candidate.operator_id.to_string(),
            node_id: candidate.node_id,
            file: candidate.file,
            risk_id: risk_id.map(str::to_string),
            description: candidate.description,
        });
    }

    if built.len() > budget {
        // Round-robin across operators so no single operator starves the
        // rest out of the budget.
        let mut by_operator: IndexMap<String, std::collections::VecDeque<Mutant>> =
            IndexMap::new();
        for mutant in built {
            by_operator.entry(mutant.operator_id.clone()).or_default().push_back(mutant);
        }
        let mut selected = Vec::with_capacity(budget);
        while selected.len() < budget {
            let mut took = false;
            for queue in by_operator.values_mut() {
                if selected.len() >= budget {
                    break;
                }
                if let Some(mutant) = queue.pop_front() {
                    selected.push(mutant);
                    took = true;
                }
            }
            if !took {
                break;
            }
        }
        built = selected;
    }

    built.sort_by(|a, b| {
        (&a.file, a.node_id, &a.operator_id, &a.description)
            .cmp(&(&b.file, b.node_id, &b.operator_id, &b.description))
    });
    built
}

/// Enumerate up to `budget` mutants over the program set, deterministically
/// ordered by (file, node id, operator id).
pub fn enumerate_mutants(
    programs: &ProgramSet,
    operators: &[&dyn MutationOperator],
    budget: usize,
) -> Vec<Mutant> {
    assert!(budget > 0, "mutant budget must be positive");
    let candidates = collect_candidates(programs, operators, None);
    build_mutants(programs, candidates, budget, None)
}

/// Materialize a risk into mutants at the locations it names, using the
/// operators its category selects.
pub fn materialize_risk(
    risk: &Risk,
    parent: &ProgramSet,
    registry: &OperatorRegistry,
    cap: usize,
) -> Result<Vec<Mutant>, RiskUnmaterializable> {
    let selected_ids = operators_for_category(risk.category);
    let operators: Vec<&dyn MutationOperator> = selected_ids
        .iter()
        .filter_map(|id| registry.get(id))
        .collect();

    let known_locations: Vec<(String, String)> = risk
        .locations
        .iter()
        .filter(|(file, function)| {
            parent
                .files
                .get(file)
                .map_or(false, |p| p.functions.contains_key(function))
        })
        .cloned()
        .collect();
    if known_locations.is_empty() {
        return Err(RiskUnmaterializable {
            risk_id: risk.id.clone(),
            reason: "no named location exists in the parent".to_string(),
        });
    }

    let candidates = collect_candidates(parent, &operators, Some(&known_locations));
    let mutants = build_mutants(parent, candidates, cap, Some(&risk.id));
    if mutants.is_empty() {
        return Err(RiskUnmaterializable {
            risk_id: risk.id.clone(),
            reason: "no operator applies at the risk's locations".to_string(),
        });
    }
    Ok(mutants)
}

#[cfg(test)]
mod tests {
    use super::*;
    use minilang::parse;

    fn program_set(src: &str) -> ProgramSet {
        let mut set = ProgramSet::new();
        set.files.insert("m.ml0".to_string(), parse(src).unwrap());
        set
    }

    fn all_ops(registry: &OperatorRegistry) -> Vec<&dyn MutationOperator> {
        registry.all()
    }

    #[test]
    fn arithmetic_replacement_includes_minus() {
        let set = program_set("fn f(x){ return x + 1; }");
        let registry = default_operator_registry();
        let mutants = enumerate_mutants(&set, &all_ops(&registry), 50);
        assert!(
            mutants.iter().any(|m| {
                m.operator_id == "arith_op_replace"
                    && m.mutated.files["m.ml0"].source_text.contains("x - 1")
            }),
            "mutants: {:?}",
            mutants.iter().map(|m| &m.description).collect::<Vec<_>>()
        );
    }

    #[test]
    fn boolean_negation_flips_return_true() {
        let set = program_set("fn f(){ return true; }");
        let registry = default_operator_registry();
        let mutants = enumerate_mutants(&set, &all_ops(&registry), 50);
        assert!(mutants.iter().any(|m| {
            m.operator_id == "bool_negate"
                && m.mutated.files["m.ml0"].source_text.contains("return false;")
        }));
    }

    #[test]
    fn empty_bodies_have_no_mutants() {
        let set = program_set("fn f(){}");
        let registry = default_operator_registry();
        let mutants = enumerate_mutants(&set, &all_ops(&registry), 50);
        assert!(mutants.is_empty(), "got {:?}", mutants.iter().map(|m| &m.description).collect::<Vec<_>>());
    }

    #[test]
    fn every_mutant_is_a_single_edit_and_reparses() {
        let set = program_set(
            "fn scan(xs, limit){\n    let i = 0;\n    let total = 0;\n    while (i < limit) {\n        total = total + xs[i];\n        i = i + 1;\n    }\n    return total;\n}\nfn flag(x){ if (x >= 10) { return true; } return false; }\nfn build(){ return {\"a\": 1, \"b\": \"\"}; }",
        );
        let registry = default_operator_registry();
        let mutants = enumerate_mutants(&set, &all_ops(&registry), 500);
        assert!(mutants.len() > 10);
        for mutant in &mutants {
            let sites = edit_site_count(&mutant.base, &mutant.mutated);
            assert_eq!(
                sites, 1,
                "mutant {} ({}) has {} edit sites:\n{}",
                mutant.key(),
                mutant.description,
                sites,
                mutant.mutated.files["m.ml0"].source_text
            );
        }
    }

    #[test]
    fn enumeration_is_deterministic_and_budgeted() {
        let set = program_set(
            "fn f(x){ return x + 1; }\nfn g(x){ if (x < 3) { return x * 2; } return 0; }",
        );
        let registry = default_operator_registry();
        let a = enumerate_mutants(&set, &all_ops(&registry), 5);
        let b = enumerate_mutants(&set, &all_ops(&registry), 5);
        assert_eq!(a.len(), 5);
        let keys_a: Vec<String> = a.iter().map(Mutant::key).collect();
        let keys_b: Vec<String> = b.iter().map(Mutant::key).collect();
        assert_eq!(keys_a, keys_b);
        // Budget overflow is shared round-robin: more than one operator
        // appears in the truncated list.
        let ops: std::collections::BTreeSet<_> = a.iter().map(|m| m.operator_id.clone()).collect();
        assert!(ops.len() > 1, "operators: {ops:?}");
    }

    #[test]
    fn risk_on_boolean_return_yields_exactly_negation_mutants() {
        let set = program_set("fn g(){ return true; }\nfn h(){ return 5; }");
        let registry = default_operator_registry();
        let risk = Risk {
            id: "r1".to_string(),
            description: "boolean inversion in g".to_string(),
            locations: vec![("m.ml0".to_string(), "g".to_string())],
            category: RiskCategory::Boolean,
        };
        let mutants = materialize_risk(&risk, &set, &registry, 10).unwrap();
        assert_eq!(mutants.len(), 1, "{:?}", mutants.iter().map(|m| &m.description).collect::<Vec<_>>());
        assert_eq!(mutants[0].operator_id, "bool_negate");
        assert!(mutants[0].mutated.files["m.ml0"].source_text.contains("return false;"));
        assert_eq!(mutants[0].risk_id.as_deref(), Some("r1"));
    }

    #[test]
    fn boundary_risk_targets_loop_condition() {
        let set = program_set(
            "fn f(n){\n    let i = 0;\n    let total = 0;\n    while (i <= n) {\n        total = total + i;\n        i = i + 1;\n    }\n    return total;\n}",
        );
        let registry = default_operator_registry();
        let risk = Risk {
            id: "r2".to_string(),
            description: "off-by-one in loop bound of f".to_string(),
            locations: vec![("m.ml0".to_string(), "f".to_string())],
            category: RiskCategory::Boundary,
        };
        let mutants = materialize_risk(&risk, &set, &registry, 20).unwrap();
        assert!(mutants.iter().any(|m| m.operator_id == "rel_op_replace"
            && m.mutated.files["m.ml0"].source_text.contains("i < n")));
    }

    #[test]
    fn risk_on_missing_function_is_unmaterializable() {
        let set = program_set("fn f(x){ return x; }");
        let registry = default_operator_registry();
        let risk = Risk {
            id: "r3".to_string(),
            description: "missing".to_string(),
            locations: vec![("m.ml0".to_string(), "absent".to_string())],
            category: RiskCategory::Other,
        };
        let err = materialize_risk(&risk, &set, &registry, 5).unwrap_err();
        assert_eq!(err.risk_id, "r3");
    }
}
