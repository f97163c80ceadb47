//! Line diff (longest common subsequence) and AST-level changed-declaration
//! analysis between the two sides of a case.

use minilang::ast::functions_struct_eq;
use serde::{Deserialize, Serialize};

use super::ProgramSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChangeKind {
    Added,
    Removed,
    Modified,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChangedDecl {
    pub file: String,
    pub function: String,
    pub kind: ChangeKind,
}

/// One contiguous run of removed/added lines. Line numbers are 1-based;
/// a zero length marks a pure insertion/deletion point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hunk {
    pub file: String,
    pub parent_start: u32,
    pub parent_len: u32,
    pub child_start: u32,
    pub child_len: u32,
    pub removed: Vec<String>,
    pub added: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diff {
    pub hunks: Vec<Hunk>,
    pub changed_decls: Vec<ChangedDecl>,
}

impl Diff {
    pub fn is_empty(&self) -> bool {
        self.hunks.is_empty()
    }

    pub fn changed_line_count(&self) -> usize {
        self.hunks.iter().map(|h| h.removed.len() + h.added.len()).sum()
    }

    /// All added/removed lines, for feature matching.
    pub fn changed_lines(&self) -> impl Iterator<Item = &str> {
        self.hunks
            .iter()
            .flat_map(|h| h.removed.iter().chain(h.added.iter()))
            .map(String::as_str)
    }

    pub fn added_lines(&self) -> impl Iterator<Item = &str> {
        self.hunks.iter().flat_map(|h| h.added.iter()).map(String::as_str)
    }

    pub fn removed_lines(&self) -> impl Iterator<Item = &str> {
        self.hunks.iter().flat_map(|h| h.removed.iter()).map(String::as_str)
    }

    /// Unified-style text rendering; rule evidence quotes excerpts of this.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for hunk in &self.hunks {
            out.push_str(&format!(
                "@@ {} -{},{} +{},{} @@\n",
                hunk.file, hunk.parent_start, hunk.parent_len, hunk.child_start, hunk.child_len
            ));
            for line in &hunk.removed {
                out.push_str(&format!("- {line}\n"));
            }
            for line in &hunk.added {
                out.push_str(&format!("+ {line}\n"));
            }
        }
        for decl in &self.changed_decls {
            out.push_str(&format!("decl {:?} {}::{}\n", decl.kind, decl.file, decl.function));
        }
        out
    }
}

/// Diff two parsed sides: textual hunks per file plus per-function AST
/// comparison.
pub fn compute_diff(parent: &ProgramSet, child: &ProgramSet) -> Diff {
    let mut files: Vec<&String> = parent.files.keys().chain(child.files.keys()).collect();
    files.sort();
    files.dedup();

    let mut diff = Diff::default();
    for file in files {
        let parent_text = parent.files.get(file).map(|p| p.source_text.as_str()).unwrap_or("");
        let child_text = child.files.get(file).map(|p| p.source_text.as_str()).unwrap_or("");
        if parent_text != child_text {
            diff.hunks.extend(line_hunks(file, parent_text, child_text));
        }

        let empty = indexmap::IndexMap::new();
        let parent_fns = parent.files.get(file).map(|p| &p.functions).unwrap_or(&empty);
        let child_fns = child.files.get(file).map(|p| &p.functions).unwrap_or(&empty);
        for (name, parent_decl) in parent_fns {
            match child_fns.get(name) {
                None => diff.changed_decls.push(ChangedDecl {
                    file: file.clone(),
                    function: name.clone(),
                    kind: ChangeKind::Removed,
                }),
                Some(child_decl) => {
                    if !functions_struct_eq(parent_decl, child_decl) {
                        diff.changed_decls.push(ChangedDecl {
                            file: file.clone(),
                            function: name.clone(),
                            kind: ChangeKind::Modified,
                        });
                    }
                }
            }
        }
        for name in child_fns.keys() {
            if !parent_fns.contains_key(name) {
                diff.changed_decls.push(ChangedDecl {
                    file: file.clone(),
                    function: name.clone(),
                    kind: ChangeKind::Added,
                });
            }
        }
    }
    diff.changed_decls.sort_by(|a, b| (&a.file, &a.function).cmp(&(&b.file, &b.function)));
    diff
}

#[derive(Clone, Copy, PartialEq)]
enum Op {
    Keep,
    Del,
    Add,
}

/// Classic LCS diff over lines, grouped into hunks of consecutive edits.
fn line_hunks(file: &str, parent: &str, child: &str) -> Vec<Hunk> {
    let a: Vec<&str> = parent.lines().collect();
    let b: Vec<&str> = child.lines().collect();
    let ops = lcs_ops(&a, &b);

    let mut hunks = Vec::new();
    let mut i = 0usize; // parent line index (0-based)
    let mut j = 0usize; // child line index
    let mut k = 0usize;
    while k < ops.len() {
        if ops[k] == Op::Keep {
            i += 1;
            j += 1;
            k += 1;
            continue;
        }
        let parent_start = i;
        let child_start = j;
        let mut removed = Vec::new();
        let mut added = Vec::new();
        while k < ops.len() && ops[k] != Op::Keep {
            match ops[k] {
                Op::Del => {
                    removed.push(a[i].to_string());
                    i += 1;
                }
                Op::Add => {
                    added.push(b[j].to_string());
                    j += 1;
                }
                Op::Keep => unreachable!(),
            }
            k += 1;
        }
        hunks.push(Hunk {
            file: file.to_string(),
            parent_start: parent_start as u32 + 1,
            parent_len: removed.len() as u32,
            child_start: child_start as u32 + 1,
            child_len: added.len() as u32,
            removed,
            added,
        });
    }
    hunks
}

fn lcs_ops(a: &[&str], b: &[&str]) -> Vec<Op> {
    let n = a.len();
    let m = b.len();
    // lcs[i][j] = LCS length of a[i..], b[j..].
    let mut lcs = vec![vec![0u32; m + 1]; n + 1];
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            lcs[i][j] = if a[i] == b[j] {
                lcs[i + 1][j + 1] + 1
            } else {
                lcs[i + 1][j].max(lcs[i][j + 1])
            };
        }
    }
    let mut ops = Vec::with_capacity(n + m);
    let (mut i, mut j) = (0, 0);
    while i < n && j < m {
        if a[i] == b[j] {
            ops.push(Op::Keep);
            i += 1;
            j += 1;
        } else if lcs[i + 1][j] >= lcs[i][j + 1] {
            ops.push(Op::Del);
            i += 1;
        } else {
            ops.push(Op::Add);
            j += 1;
        }
    }
    ops.extend(std::iter::repeat(Op::Del).take(n - i));
    ops.extend(std::iter::repeat(Op::Add).take(m - j));
    ops
}

#[cfg(test)]
mod tests {
    use super::*;
    use minilang::parse;

    fn side(files: &[(&str, &str)]) -> ProgramSet {
        let mut set = ProgramSet::new();
        for (name, src) in files {
            set.files.insert(name.to_string(), parse(src).unwrap());
        }
        set
    }

    #[test]
    fn identical_sides_empty_diff() {
        let a = side(&[("m.ml0", "fn f(x){ return x; }")]);
        let diff = compute_diff(&a, &a.clone());
        assert!(diff.is_empty());
        assert!(diff.changed_decls.is_empty());
    }

    #[test]
    fn edited_body_is_modified_decl_with_hunk() {
        let a = side(&[("m.ml0", "fn f(x){\n    return x + 1;\n}\n")]);
        let b = side(&[("m.ml0", "fn f(x){\n    return x + 2;\n}\n")]);
        let diff = compute_diff(&a, &b);
        assert_eq!(diff.hunks.len(), 1);
        assert_eq!(diff.changed_decls.len(), 1);
        assert_eq!(diff.changed_decls[0].kind, ChangeKind::Modified);
        assert_eq!(diff.hunks[0].removed, vec!["    return x + 1;".to_string()]);
        assert_eq!(diff.hunks[0].added, vec!["    return x + 2;".to_string()]);
    }

    #[test]
    fn new_function_is_added_decl() {
        let a = side(&[("m.ml0", "fn f(x){ return x; }")]);
        let b = side(&[("m.ml0", "fn f(x){ return x; }\nfn g(){ return 1; }")]);
        let diff = compute_diff(&a, &b);
        let added: Vec<_> =
            diff.changed_decls.iter().filter(|d| d.kind == ChangeKind::Added).collect();
        assert_eq!(added.len(), 1);
        assert_eq!(added[0].function, "g");
    }

    #[test]
    fn diff_emptiness_is_symmetric() {
        let a = side(&[("m.ml0", "fn f(x){ return x + 1; }")]);
        let b = side(&[("m.ml0", "fn f(x){ return x * 1; }")]);
        assert_eq!(
            compute_diff(&a, &b).is_empty(),
            compute_diff(&b, &a).is_empty()
        );
        assert_eq!(compute_diff(&a, &a.clone()).is_empty(), compute_diff(&a, &a.clone()).is_empty());
        assert!(!compute_diff(&a, &b).is_empty());
    }
}
