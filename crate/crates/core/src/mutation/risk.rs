//! Risks: plausible ways an implementation of a diff's intent could go
//! wrong. A risk names locations and a category; the category selects which
//! mutation operators materialize it.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RiskCategory {
    Boundary,
    Boolean,
    Container,
    Null,
    Exception,
    Ordering,
    Other,
}

impl RiskCategory {
    pub const ALL: [RiskCategory; 7] = [
        RiskCategory::Boundary,
        RiskCategory::Boolean,
        RiskCategory::Container,
        RiskCategory::Null,
        RiskCategory::Exception,
        RiskCategory::Ordering,
        RiskCategory::Other,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            RiskCategory::Boundary => "boundary",
            RiskCategory::Boolean => "boolean",
            RiskCategory::Container => "container",
            RiskCategory::Null => "null",
            RiskCategory::Exception => "exception",
            RiskCategory::Ordering => "ordering",
            RiskCategory::Other => "other",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Risk {
    pub id: String,
    pub description: String,
    /// (file, function) pairs the risk implicates; at least one.
    pub locations: Vec<(String, String)>,
    pub category: RiskCategory,
}

/// Operator ids a category materializes through, in priority order.
pub fn operators_for_category(category: RiskCategory) -> &'static [&'static str] {
    match category {
        RiskCategory::Boundary => &["rel_op_replace", "const_perturb"],
        RiskCategory::Boolean => &["bool_negate"],
        RiskCategory::Container => &["map_key_rename", "stmt_delete"],
        RiskCategory::Null => &["early_return", "stmt_delete"],
        RiskCategory::Exception => &["const_perturb", "early_return", "arith_op_replace"],
        RiskCategory::Ordering => &["map_key_rename", "stmt_delete"],
        RiskCategory::Other => &[
            "arith_op_replace",
            "rel_op_replace",
            "bool_negate",
            "const_perturb",
            "stmt_delete",
            "early_return",
            "map_key_rename",
        ],
    }
}
