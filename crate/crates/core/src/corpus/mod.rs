//! Revision-pair corpus: the data model for parent/child cases, loading and
//! validation, diff computation and risk scoring.
//!
//! Corpus layout on disk: `<corpus>/<case-id>/{parent/*.ml0, child/*.ml0,
//! meta.json}`. The meta file carries title, summary, a status string (exact
//! uppercase spelling) and an optional ground-truth block for seeded bugs.

pub mod diff;
pub mod risk;

pub use diff::{compute_diff, ChangeKind, ChangedDecl, Diff, Hunk};
pub use risk::{DiffSizeScorer, RiskScorer};

use std::fs;
use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use minilang::{parse, Program};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// One side of a case: parsed programs keyed by file name, in sorted order.
#[derive(Debug, Clone, PartialEq)]
pub struct ProgramSet {
    pub files: IndexMap<String, Program>,
}

impl ProgramSet {
    pub fn new() -> Self {
        ProgramSet { files: IndexMap::new() }
    }

    pub fn programs(&self) -> Vec<&Program> {
        self.files.values().collect()
    }

    /// All function names across files, with their file of definition.
    pub fn function_files(&self) -> IndexMap<String, String> {
        let mut map = IndexMap::new();
        for (file, program) in &self.files {
            for name in program.functions.keys() {
                map.insert(name.clone(), file.clone());
            }
        }
        map
    }

    pub fn find_function(&self, name: &str) -> Option<(&str, &minilang::FunctionDecl)> {
        for (file, program) in &self.files {
            if let Some(decl) = program.functions.get(name) {
                return Some((file.as_str(), decl));
            }
        }
        None
    }
}

impl Default for ProgramSet {
    fn default() -> Self {
        Self::new()
    }
}

/// Human review outcome of a case. Good = {CLOSED, ACCEPTED}; Bad =
/// {ABANDONED, CHANGES_PLANNED, NEEDS_REVISION, REVERTED}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DiffStatus {
    #[serde(rename = "CLOSED")]
    Closed,
    #[serde(rename = "ACCEPTED")]
    Accepted,
    #[serde(rename = "ABANDONED")]
    Abandoned,
    #[serde(rename = "CHANGES_PLANNED")]
    ChangesPlanned,
    #[serde(rename = "NEEDS_REVISION")]
    NeedsRevision,
    #[serde(rename = "REVERTED")]
    Reverted,
    #[serde(rename = "UNLABELLED")]
    Unlabelled,
}

impl DiffStatus {
    pub const ALL: [DiffStatus; 7] = [
        DiffStatus::Closed,
        DiffStatus::Accepted,
        DiffStatus::Abandoned,
        DiffStatus::ChangesPlanned,
        DiffStatus::NeedsRevision,
        DiffStatus::Reverted,
        DiffStatus::Unlabelled,
    ];

    pub fn is_good(&self) -> bool {
        matches!(self, DiffStatus::Closed | DiffStatus::Accepted)
    }

    pub fn is_bad(&self) -> bool {
        matches!(
            self,
            DiffStatus::Abandoned
                | DiffStatus::ChangesPlanned
                | DiffStatus::NeedsRevision
                | DiffStatus::Reverted
        )
    }

    pub fn abbrev(&self) -> &'static str {
        match self {
            DiffStatus::Closed => "CLS",
            DiffStatus::Accepted => "ACC",
            DiffStatus::Abandoned => "ABD",
            DiffStatus::ChangesPlanned => "CHP",
            DiffStatus::NeedsRevision => "NRS",
            DiffStatus::Reverted => "REV",
            DiffStatus::Unlabelled => "UNL",
        }
    }
}

/// Machine-readable seeded-bug record, present when a case was authored with
/// a known defect.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub buggy: bool,
    #[serde(default)]
    pub description: String,
    /// Function whose behavior carries the seeded bug.
    #[serde(default)]
    pub culprit: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
struct CaseMeta {
    title: String,
    #[serde(default)]
    summary: String,
    status: DiffStatus,
    #[serde(default)]
    ground_truth: Option<GroundTruth>,
}

/// A parent/child revision pair: the unit of pipeline work.
#[derive(Debug, Clone)]
pub struct DiffCase {
    pub id: String,
    pub parent: ProgramSet,
    pub child: ProgramSet,
    pub title: String,
    pub summary: String,
    pub status: DiffStatus,
    pub ground_truth: Option<GroundTruth>,
    /// Heuristic risk in [0, 1], normalized over the corpus at load time.
    pub risk_score: f64,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("corpus directory {0} not readable: {1}")]
    Unreadable(PathBuf, std::io::Error),
    #[error("case {case}: missing meta.json")]
    MissingMeta { case: String },
    #[error("case {case}: invalid meta.json: {reason}")]
    BadMeta { case: String, reason: String },
    #[error("case {case}: missing {side} directory")]
    MissingSide { case: String, side: &'static str },
    #[error("case {case}: file {file} fails to parse: {reason}")]
    BadProgram { case: String, file: String, reason: String },
    #[error("case {case}: function `{function}` defined in more than one file of {side}")]
    DuplicateFunction { case: String, side: &'static str, function: String },
    #[error("duplicate case id {0}")]
    DuplicateCase(String),
    #[error("corpus {0} contains no cases")]
    Empty(PathBuf),
}

/// Load and validate every case under `path`, in sorted id order, then
/// assign normalized risk scores with the given scorer.
pub fn load_corpus_with(
    path: &Path,
    scorer: &dyn RiskScorer,
) -> Result<Vec<DiffCase>, CorpusError> {
    let entries =
        fs::read_dir(path).map_err(|e| CorpusError::Unreadable(path.to_path_buf(), e))?;
    let mut case_dirs: Vec<PathBuf> = entries
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.is_dir())
        .collect();
    case_dirs.sort();

    let mut cases = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for dir in case_dirs {
        let case = load_case(&dir)?;
        if !seen.insert(case.id.clone()) {
            return Err(CorpusError::DuplicateCase(case.id));
        }
        cases.push(case);
    }
    if cases.is_empty() {
        return Err(CorpusError::Empty(path.to_path_buf()));
    }

    // Min-max normalization over the corpus: the empty diff scores 0, the
    // largest diff scores 1.
    let raws: Vec<f64> =
        cases.iter().map(|c| scorer.raw(&compute_diff(&c.parent, &c.child))).collect();
    let max = raws.iter().cloned().fold(0.0f64, f64::max);
    for (case, raw) in cases.iter_mut().zip(raws) {
        case.risk_score = if max > 0.0 { raw / max } else { 0.0 };
    }
    Ok(cases)
}

pub fn load_corpus(path: &Path) -> Result<Vec<DiffCase>, CorpusError> {
    load_corpus_with(path, &DiffSizeScorer)
}

fn load_case(dir: &Path) -> Result<DiffCase, CorpusError> {
    let case_id = dir
        .file_name()
        .map(|n| n.to_string_lossy().to_string())
        .unwrap_or_else(|| dir.display().to_string());

    let meta_path = dir.join("meta.json");
    if !meta_path.is_file() {
        return Err(CorpusError::MissingMeta { case: case_id });
    }
    let meta_text = fs::read_to_string(&meta_path)
        .map_err(|e| CorpusError::BadMeta { case: case_id.clone(), reason: e.to_string() })?;
    let meta: CaseMeta = serde_json::from_str(&meta_text)
        .map_err(|e| CorpusError::BadMeta { case: case_id.clone(), reason: e.to_string() })?;

    let parent = load_side(dir, "parent", &case_id)?;
    let child = load_side(dir, "child", &case_id)?;

    Ok(DiffCase {
        id: case_id,
        parent,
        child,
        title: meta.title,
        summary: meta.summary,
        status: meta.status,
        ground_truth: meta.ground_truth,
        risk_score: 0.0,
    })
}

fn load_side(dir: &Path, side: &'static str, case_id: &str) -> Result<ProgramSet, CorpusError> {
    let side_dir = dir.join(side);
    if !side_dir.is_dir() {
        return Err(CorpusError::MissingSide { case: case_id.to_string(), side });
    }
    let mut files: Vec<PathBuf> = fs::read_dir(&side_dir)
        .map_err(|e| CorpusError::Unreadable(side_dir.clone(), e))?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().map_or(false, |ext| ext == "ml0"))
        .collect();
    files.sort();

    let mut set = ProgramSet::new();
    let mut seen_functions: IndexMap<String, String> = IndexMap::new();
    for file in files {
        let name = file.file_name().unwrap().to_string_lossy().to_string();
        let text = fs::read_to_string(&file).map_err(|e| CorpusError::BadProgram {
            case: case_id.to_string(),
            file: name.clone(),
            reason: e.to_string(),
        })?;
        let program = parse(&text).map_err(|e| CorpusError::BadProgram {
            case: case_id.to_string(),
            file: name.clone(),
            reason: e.to_string(),
        })?;
        for function in program.functions.keys() {
            if seen_functions.insert(function.clone(), name.clone()).is_some() {
                return Err(CorpusError::DuplicateFunction {
                    case: case_id.to_string(),
                    side,
                    function: function.clone(),
                });
            }
        }
        set.files.insert(name, program);
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn good_bad_partition_is_exhaustive_and_disjoint() {
        for status in DiffStatus::ALL {
            let unlabelled = status == DiffStatus::Unlabelled;
            assert_eq!(status.is_good() || status.is_bad() || unlabelled, true);
            assert!(!(status.is_good() && status.is_bad()));
        }
    }

    #[test]
    fn status_strings_are_exact() {
        assert_eq!(serde_json::to_string(&DiffStatus::ChangesPlanned).unwrap(), "\"CHANGES_PLANNED\"");
        let status: DiffStatus = serde_json::from_str("\"REVERTED\"").unwrap();
        assert_eq!(status, DiffStatus::Reverted);
        assert!(serde_json::from_str::<DiffStatus>("\"reverted\"").is_err());
    }
}
