//! Scripted mock backend: replays canned outputs from a fixture file.
//! Deterministic by construction; the generation side consumes test batches
//! in call order (that cursor is the mock's only state), while intents,
//! risks, and judgments are keyed lookups.

use std::path::Path;
use std::sync::Mutex;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::corpus::{Diff, DiffCase};
use crate::mutation::Risk;
use crate::workflows::IntentDescription;

use super::{BackendError, GenerationContext, GeneratorBackend};

/// One canned judge response.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScriptedJudgment {
    /// "yes" or "no".
    pub answer: String,
    /// Probability of the answer token, in (0, 1].
    pub probability: f64,
    /// "High", "Medium" or "Low".
    pub bucket: String,
    #[serde(default)]
    pub rationale: String,
}

/// Fixture file shape shared by the scripted generator and scripted judge.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ScriptedFixture {
    /// Batches of test sources, one batch per propose_tests call.
    #[serde(default)]
    pub tests: Vec<Vec<String>>,
    /// Canned intent text per case id.
    #[serde(default)]
    pub intents: IndexMap<String, String>,
    /// Canned risks per case id.
    #[serde(default)]
    pub risks: IndexMap<String, Vec<Risk>>,
    /// Judgments keyed by "<case>/<test-id>", with an optional "default".
    #[serde(default)]
    pub judgments: IndexMap<String, ScriptedJudgment>,
}

impl ScriptedFixture {
    pub fn load(path: &Path) -> Result<Self, BackendError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| BackendError::Unavailable(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| BackendError::Protocol(format!("{}: {e}", path.display())))
    }
}

pub struct ScriptedMock {
    fixture: ScriptedFixture,
    cursor: Mutex<usize>,
}

impl ScriptedMock {
    pub fn new(fixture: ScriptedFixture) -> Self {
        ScriptedMock { fixture, cursor: Mutex::new(0) }
    }

    pub fn load(path: &Path) -> Result<Self, BackendError> {
        Ok(Self::new(ScriptedFixture::load(path)?))
    }

    pub fn fixture(&self) -> &ScriptedFixture {
        &self.fixture
    }
}

impl GeneratorBackend for ScriptedMock {
    fn name(&self) -> &str {
        "scripted"
    }

    fn propose_tests(&self, _ctx: &GenerationContext<'_>) -> Result<Vec<String>, BackendError> {
        let mut cursor = self.cursor.lock().expect("mock cursor poisoned");
        let batch = self.fixture.tests.get(*cursor).cloned().unwrap_or_default();
        if *cursor < self.fixture.tests.len() {
            *cursor += 1;
        }
        Ok(batch)
    }

    fn infer_intent(
        &self,
        case: &DiffCase,
        _changed: &[String],
    ) -> Result<Option<String>, BackendError> {
        Ok(self.fixture.intents.get(&case.id).cloned())
    }

    fn enumerate_risks(
        &self,
        case_id: &str,
        _intent: &IntentDescription,
        _diff: &Diff,
        cap: usize,
    ) -> Result<Option<Vec<Risk>>, BackendError> {
        Ok(self
            .fixture
            .risks
            .get(case_id)
            .map(|risks| risks.iter().take(cap).cloned().collect()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::ProgramSet;

    fn ctx<'a>(target: &'a ProgramSet) -> GenerationContext<'a> {
        GenerationContext {
            case_id: "case-1",
            target,
            entry_points: &[],
            seed_pool: &[],
            tuple_cap: 8,
            budget: 10,
            step_limit: 1_000,
            mutant: None,
            intent: None,
            risks: &[],
        }
    }

    #[test]
    fn batches_are_consumed_in_order_then_empty() {
        let fixture: ScriptedFixture = serde_json::from_str(
            r#"{"tests": [["assert_eq(f(1), 2);", "assert_true(g());"], ["assert_eq(h(), 0);"]]}"#,
        )
        .unwrap();
        let mock = ScriptedMock::new(fixture);
        let target = ProgramSet::new();
        assert_eq!(mock.propose_tests(&ctx(&target)).unwrap().len(), 2);
        assert_eq!(mock.propose_tests(&ctx(&target)).unwrap().len(), 1);
        assert!(mock.propose_tests(&ctx(&target)).unwrap().is_empty());
    }

    #[test]
    fn fixture_parses_judgments_and_risks() {
        let fixture: ScriptedFixture = serde_json::from_str(
            r#"{
                "risks": {"case-1": [{"id": "r1", "description": "boundary slip",
                          "locations": [["m.ml0", "f"]], "category": "boundary"}]},
                "judgments": {"case-1/t1": {"answer": "yes", "probability": 0.9,
                               "bucket": "High", "rationale": "looks real"}}
            }"#,
        )
        .unwrap();
        assert_eq!(fixture.risks["case-1"][0].id, "r1");
        assert_eq!(fixture.judgments["case-1/t1"].answer, "yes");
    }
}
