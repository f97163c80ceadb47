//! A small imperative language with a tracing interpreter.
//!
//! The language covers integers, booleans, text, lists, insertion-ordered
//! maps and null, plus functions, `if`/`while`, thrown exceptions with text
//! kinds, and two assertion intrinsics (`assert_eq`, `assert_true`). Source
//! files use the `.ml0` extension, test files `.test.ml0`. The interpreter
//! records an execution trace of every call, return, exception and assertion
//! failure, and enforces a step budget so every run terminates.

pub mod ast;
pub mod interp;
pub mod lexer;
pub mod parser;
pub mod printer;
pub mod trace;
pub mod value;

pub use ast::{BinaryOp, Expr, FunctionDecl, NodeId, Program, Span, Stmt, UnaryOp};
pub use interp::{execute, observed_outputs, ExecError, Observation, ObservedOutcome};
pub use parser::{parse, parse_test_statements, SyntaxError};
pub use printer::{print_program, render_value, value_literal};
pub use trace::{ErrorKind, ExecutionTrace, OutcomeStatus, TestOutcome, TraceEvent};
pub use value::Value;

/// Default per-execution step budget.
pub const DEFAULT_STEP_LIMIT: u64 = 100_000;
