//! Declarative pattern rules. Rules load from a JSON rules file (a default
//! set ships embedded) so new patterns can be added without rebuilding.
//!
//! A rule fires when any of its sign matchers (trace, test code, diff) hits
//! AND its corroboration matcher (if any) passes. Every hit yields an
//! evidence excerpt that is literally present in the cited source text.

use serde::{Deserialize, Serialize};

use minilang::{TraceEvent, Value};

use super::bundle::{BundleText, CatchBundle};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Fp,
    Tp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Likelihood {
    High,
    Medium,
    Low,
}

impl Likelihood {
    /// Ordinal likelihood to score magnitude: high 0.9, medium 0.5, low 0.2.
    pub fn magnitude(&self) -> f64 {
        match self {
            Likelihood::High => 0.9,
            Likelihood::Medium => 0.5,
            Likelihood::Low => 0.2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DismissalCost {
    Trivial,
    Moderate,
    Heavy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    ExecutionLog,
    TestCode,
    Diff,
    /// Only corroboration matchers cite the inferred intent.
    Intent,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Evidence {
    pub source: SourceKind,
    pub excerpt: String,
}

/// Matchers over the child execution trace.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TraceMatcher {
    /// External-runner event of the given kind; optional message filter.
    RunnerEvent {
        event: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        message_contains: Option<String>,
    },
    /// Terminal exception whose kind is one of these.
    ExceptionKindIn { kinds: Vec<String> },
    /// Terminal assertion failure where a boolean flipped.
    AssertBoolFlip,
    /// Terminal assertion failure with a null actual against a non-null
    /// expectation.
    AssertActualNull,
    /// Terminal assertion failure where expected and actual are maps with
    /// the same pairs in a different order.
    AssertMapReorder,
    /// Terminal assertion failure whose asserted expression contains one of
    /// these fragments.
    AssertExpressionContainsAny { fragments: Vec<String> },
    /// Step budget exhausted.
    StepLimit,
    /// Any terminal failure event at all.
    AnyFailure,
    /// Disjunction.
    Any { of: Vec<TraceMatcher> },
}

fn event_line(event: &TraceEvent) -> String {
    let text = minilang::ExecutionTrace { events: vec![event.clone()] }.render();
    text.trim_end().to_string()
}

impl TraceMatcher {
    /// Evidence line when the matcher hits the trace.
    pub fn matches(&self, bundle: &CatchBundle<'_>) -> Option<Evidence> {
        let trace = &bundle.child_outcome.trace;
        let hit = |event: &TraceEvent| Evidence {
            source: SourceKind::ExecutionLog,
            excerpt: event_line(event),
        };
        match self {
            TraceMatcher::RunnerEvent { event, message_contains } => {
                trace.events.iter().find_map(|e| match e {
                    TraceEvent::Runner { kind, message }
                        if kind == event
                            && message_contains
                                .as_ref()
                                .map_or(true, |needle| message.contains(needle)) =>
                    {
                        Some(hit(e))
                    }
                    _ => None,
                })
            }
            // Trapped exceptions count: the event is in the trace whether
            // the test converted it into an assertion failure or not.
            TraceMatcher::ExceptionKindIn { kinds } => trace.exceptions().find_map(|event| {
                match event {
                    TraceEvent::Exception { kind, .. } if kinds.contains(kind) => {
                        Some(hit(event))
                    }
                    _ => None,
                }
            }),
            TraceMatcher::AssertBoolFlip => match trace.terminal() {
                Some(event @ TraceEvent::AssertFail { expected, actual, .. }) => {
                    match (expected, actual) {
                        (Value::Bool(e), Value::Bool(a)) if e != a => Some(hit(event)),
                        _ => None,
                    }
                }
                _ => None,
            },
            TraceMatcher::AssertActualNull => match trace.terminal() {
                Some(event @ TraceEvent::AssertFail { expected, actual, .. })
                    if actual.is_null() && !expected.is_null() =>
                {
                    Some(hit(event))
                }
                _ => None,
            },
            TraceMatcher::AssertMapReorder => match trace.terminal() {
                Some(event @ TraceEvent::AssertFail { expected, actual, .. })
                    if actual.is_reordered_map_of(expected) =>
                {
                    Some(hit(event))
                }
                _ => None,
            },
            TraceMatcher::AssertExpressionContainsAny { fragments } => match trace.terminal() {
                Some(event @ TraceEvent::AssertFail { expression_text, .. })
                    if fragments.iter().any(|f| expression_text.contains(f)) =>
                {
                    Some(hit(event))
                }
                _ => None,
            },
            TraceMatcher::StepLimit => match trace.terminal() {
                Some(event @ TraceEvent::StepLimitExceeded) => Some(hit(event)),
                _ => None,
            },
            TraceMatcher::AnyFailure => trace.terminal().map(hit),
            TraceMatcher::Any { of } => of.iter().find_map(|m| m.matches(bundle)),
        }
    }
}

/// Matchers over the test source text.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TextMatcher {
    ContainsAny { fragments: Vec<String> },
}

impl TextMatcher {
    pub fn matches(&self, text: &str, source: SourceKind) -> Option<Evidence> {
        match self {
            TextMatcher::ContainsAny { fragments } => fragments
                .iter()
                .find(|f| text.contains(f.as_str()))
                .map(|f| Evidence { source, excerpt: f.clone() }),
        }
    }
}

/// Matchers over the diff.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DiffMatcher {
    AddedLineContains { fragment: String },
    RemovedLineContains { fragment: String },
    AnyChangedLineContains { fragment: String },
}

impl DiffMatcher {
    pub fn matches(&self, bundle: &CatchBundle<'_>) -> Option<Evidence> {
        let hit = |line: &str| Evidence { source: SourceKind::Diff, excerpt: line.to_string() };
        match self {
            DiffMatcher::AddedLineContains { fragment } => {
                bundle.diff.added_lines().find(|l| l.contains(fragment)).map(hit)
            }
            DiffMatcher::RemovedLineContains { fragment } => {
                bundle.diff.removed_lines().find(|l| l.contains(fragment)).map(hit)
            }
            DiffMatcher::AnyChangedLineContains { fragment } => {
                bundle.diff.changed_lines().find(|l| l.contains(fragment)).map(hit)
            }
        }
    }
}

/// Where a corroboration token is extracted from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenFrom {
    /// Message of the terminal exception (the failing key, container
    /// expression, and so on).
    ExceptionMessage,
    /// Innermost function still open when the terminal exception fired.
    ExceptionFunction,
    /// Entry function named by the failing assertion.
    AssertEntry,
    /// First string literal inside the failing assertion's expression.
    AssertFirstString,
}

/// Corroboration: the cross-check against code and intent that separates a
/// promising true positive sign from noise.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Corroboration {
    /// No changed line mentions the extracted token: the behavior changed
    /// although its definition site was not directly edited.
    DiffLacksToken { token_from: TokenFrom },
    /// The inferred intent mentions one of these words.
    IntentMentionsAny { words: Vec<String> },
    /// The assertion's entry function is not a newly added declaration.
    EntryNotAddedDecl,
    /// All sub-corroborations must pass.
    All { of: Vec<Corroboration> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PatternRule {
    pub id: String,
    pub polarity: Polarity,
    pub likelihood: Likelihood,
    pub sources: Vec<SourceKind>,
    pub description: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<TraceMatcher>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_source: Option<TextMatcher>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diff: Option<DiffMatcher>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corroboration: Option<Corroboration>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dismissal_cost: Option<DismissalCost>,
}

impl PatternRule {
    /// Evaluate against a bundle: sign evidence plus corroboration evidence,
    /// or None when the rule does not fire.
    pub fn evaluate(&self, bundle: &CatchBundle<'_>, text: &BundleText) -> Option<Vec<Evidence>> {
        let mut evidence = Vec::new();
        if let Some(matcher) = &self.trace {
            if let Some(hit) = matcher.matches(bundle) {
                evidence.push(hit);
            }
        }
        if let Some(matcher) = &self.test_source {
            if let Some(hit) = matcher.matches(&text.test_code, SourceKind::TestCode) {
                evidence.push(hit);
            }
        }
        if let Some(matcher) = &self.diff {
            if let Some(hit) = matcher.matches(bundle) {
                evidence.push(hit);
            }
        }
        if evidence.is_empty() {
            return None;
        }
        if let Some(corroboration) = &self.corroboration {
            let mut corroboration_evidence = Vec::new();
            if !corroborate(corroboration, bundle, text, &mut corroboration_evidence) {
                return None;
            }
            evidence.extend(corroboration_evidence);
        }
        Some(evidence)
    }
}

fn extract_token(from: TokenFrom, bundle: &CatchBundle<'_>) -> Option<(String, Evidence)> {
    let trace = &bundle.child_outcome.trace;
    match from {
        TokenFrom::ExceptionMessage => trace.exceptions().find_map(|event| match event {
            TraceEvent::Exception { message, .. } if !message.is_empty() => Some((
                message.clone(),
                Evidence { source: SourceKind::ExecutionLog, excerpt: event_line(event) },
            )),
            _ => None,
        }),
        TokenFrom::ExceptionFunction => {
            // Innermost call still open when the first exception fired.
            let mut stack: Vec<&TraceEvent> = Vec::new();
            for event in &trace.events {
                match event {
                    TraceEvent::Call { .. } => stack.push(event),
                    TraceEvent::Return { .. } => {
                        stack.pop();
                    }
                    TraceEvent::Exception { .. } => break,
                    _ => {}
                }
            }
            let innermost = stack.last()?;
            let TraceEvent::Call { name, .. } = innermost else { return None };
            Some((
                name.clone(),
                Evidence { source: SourceKind::ExecutionLog, excerpt: event_line(innermost) },
            ))
        }
        TokenFrom::AssertEntry => {
            let entry = bundle.test.entry_function()?;
            Some((
                entry.clone(),
                Evidence { source: SourceKind::TestCode, excerpt: entry },
            ))
        }
        TokenFrom::AssertFirstString => match trace.terminal() {
            Some(event @ TraceEvent::AssertFail { expression_text, .. }) => {
                let start = expression_text.find('"')?;
                let rest = &expression_text[start + 1..];
                let len = rest.find('"')?;
                Some((
                    rest[..len].to_string(),
                    Evidence { source: SourceKind::ExecutionLog, excerpt: event_line(event) },
                ))
            }
            _ => None,
        },
    }
}

fn corroborate(
    corroboration: &Corroboration,
    bundle: &CatchBundle<'_>,
    text: &BundleText,
    evidence: &mut Vec<Evidence>,
) -> bool {
    match corroboration {
        Corroboration::DiffLacksToken { token_from } => {
            let Some((token, token_evidence)) = extract_token(*token_from, bundle) else {
                return false;
            };
            let untouched = !bundle.diff.changed_lines().any(|line| line.contains(&token));
            if untouched {
                evidence.push(token_evidence);
            }
            untouched
        }
        Corroboration::IntentMentionsAny { words } => {
            let intent = text.intent_text.to_lowercase();
            match words.iter().find(|w| intent.contains(&w.to_lowercase())) {
                Some(word) => {
                    evidence.push(Evidence {
                        source: SourceKind::Intent,
                        excerpt: word.to_lowercase(),
                    });
                    true
                }
                None => false,
            }
        }
        Corroboration::EntryNotAddedDecl => {
            let Some(entry) = bundle.test.entry_function() else { return false };
            let added = bundle.diff.changed_decls.iter().any(|d| {
                d.kind == crate::corpus::ChangeKind::Added && d.function == entry
            });
            if !added {
                evidence.push(Evidence { source: SourceKind::TestCode, excerpt: entry });
            }
            !added
        }
        Corroboration::All { of } => {
            of.iter().all(|c| corroborate(c, bundle, text, evidence))
        }
    }
}

/// Load rules from JSON text.
pub fn parse_rules(json: &str) -> Result<Vec<PatternRule>, serde_json::Error> {
    serde_json::from_str(json)
}

/// The built-in rule set, embedded at compile time.
pub fn default_rules() -> Vec<PatternRule> {
    parse_rules(include_str!("default_rules.json")).expect("embedded rules are valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_rules_parse_and_cover_both_tables() {
        let rules = default_rules();
        let fp = rules.iter().filter(|r| r.polarity == Polarity::Fp).count();
        let tp = rules.iter().filter(|r| r.polarity == Polarity::Tp).count();
        assert_eq!(fp, 14, "false-positive rule count");
        assert_eq!(tp, 9, "true-positive rule count");
        // Every TP rule carries a corroboration matcher and a dismissal cost.
        for rule in rules.iter().filter(|r| r.polarity == Polarity::Tp) {
            assert!(rule.corroboration.is_some(), "{} lacks corroboration", rule.id);
            assert!(rule.dismissal_cost.is_some(), "{} lacks dismissal cost", rule.id);
        }
        // FP rules cite only the three Table-2 source kinds.
        for rule in rules.iter().filter(|r| r.polarity == Polarity::Fp) {
            assert!(!rule.sources.is_empty());
            assert!(!rule.sources.contains(&SourceKind::Intent), "{}", rule.id);
        }
        // Ids are unique.
        let mut ids: Vec<&str> = rules.iter().map(|r| r.id.as_str()).collect();
        ids.sort();
        let len = ids.len();
        ids.dedup();
        assert_eq!(ids.len(), len);
    }

    #[test]
    fn likelihood_magnitudes() {
        assert_eq!(Likelihood::High.magnitude(), 0.9);
        assert_eq!(Likelihood::Medium.magnitude(), 0.5);
        assert_eq!(Likelihood::Low.magnitude(), 0.2);
    }
}
