//! Tree-walking interpreter with execution tracing and a step budget.
//!
//! Interpreter state lives for a single run and is discarded afterwards, so
//! any number of executions may proceed concurrently. Runs are fully
//! deterministic: the same programs, test source and step limit produce the
//! same trace, event for event.

use indexmap::IndexMap;
use thiserror::Error;

use crate::ast::{BinaryOp, Expr, FunctionDecl, NodeId, Program, Stmt, UnaryOp};
use crate::parser::{parse_test_statements, Script};
use crate::trace::{ErrorKind, ExecutionTrace, OutcomeStatus, TestOutcome, TraceEvent};
use crate::value::Value;

// Kept small so deep mini-language recursion cannot exhaust the host stack
// even in debug builds with 2 MiB test threads.
const MAX_CALL_DEPTH: u32 = 48;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ExecError {
    #[error("entry function `{0}` not found")]
    MissingEntry(String),
    #[error("function `{0}` defined in more than one file")]
    DuplicateFunction(String),
}

/// Result of observing one input tuple.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ObservedOutcome {
    Value(Value),
    Exception(String),
    StepLimit,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Observation {
    pub args: Vec<Value>,
    pub outcome: ObservedOutcome,
}

/// Execute a test script against the merged function table of `programs`.
///
/// A test source that fails to parse, or a program set with duplicate
/// function names, yields `Error(ParseFailure)`; all other failures surface
/// as `Fail` (assertion) or `Error` (exception / step limit) with the trace
/// ending in the corresponding terminal event.
pub fn execute(programs: &[&Program], test_source: &str, step_limit: u64) -> TestOutcome {
    let script = match parse_test_statements(test_source) {
        Ok(script) => script,
        Err(_) => {
            return TestOutcome {
                status: OutcomeStatus::Error { kind: ErrorKind::ParseFailure },
                trace: ExecutionTrace::default(),
                steps_used: 0,
            }
        }
    };
    let table = match FunctionTable::build(programs) {
        Ok(table) => table,
        Err(_) => {
            return TestOutcome {
                status: OutcomeStatus::Error { kind: ErrorKind::ParseFailure },
                trace: ExecutionTrace::default(),
                steps_used: 0,
            }
        }
    };

    let mut interp = Interpreter::new(&table, step_limit);
    let mut frame = Frame::default();
    let mut result = Ok(());
    for stmt in &script.stmts {
        result = interp.eval_stmt(stmt, &mut frame, &Source::Script(&script));
        if result.is_err() {
            break;
        }
    }
    interp.into_outcome(result)
}

/// Run `entry` over each input tuple, recording the value or exception each
/// produces. Failures are data here, not errors; only a missing entry (or a
/// malformed program set) is rejected.
pub fn observed_outputs(
    programs: &[&Program],
    entry: &str,
    inputs: &[Vec<Value>],
    step_limit: u64,
) -> Result<Vec<Observation>, ExecError> {
    let table = FunctionTable::build(programs)?;
    if !table.map.contains_key(entry) {
        return Err(ExecError::MissingEntry(entry.to_string()));
    }
    let mut observations = Vec::with_capacity(inputs.len());
    for args in inputs {
        let mut interp = Interpreter::new(&table, step_limit);
        let outcome = match interp.call_function(entry, args.clone(), 0) {
            Ok(value) => ObservedOutcome::Value(value),
            Err(Interrupt::Exception { kind, .. }) => ObservedOutcome::Exception(kind),
            Err(Interrupt::AssertFail { .. }) => ObservedOutcome::Exception("assert_fail".into()),
            Err(Interrupt::StepLimit) => ObservedOutcome::StepLimit,
            Err(Interrupt::Return(_)) => unreachable!("return is consumed by call_function"),
        };
        observations.push(Observation { args: args.clone(), outcome });
    }
    Ok(observations)
}

struct FunctionTable<'a> {
    map: IndexMap<String, (&'a FunctionDecl, &'a Program)>,
}

impl<'a> FunctionTable<'a> {
    fn build(programs: &[&'a Program]) -> Result<Self, ExecError> {
        let mut map = IndexMap::new();
        for program in programs {
            for (name, decl) in &program.functions {
                if map.insert(name.clone(), (decl, *program)).is_some() {
                    return Err(ExecError::DuplicateFunction(name.clone()));
                }
            }
        }
        Ok(FunctionTable { map })
    }
}

enum Source<'a> {
    Program(&'a Program),
    Script(&'a Script),
}

impl<'a> Source<'a> {
    fn node_text(&self, id: NodeId) -> String {
        match self {
            Source::Program(p) => p.node_text(id).unwrap_or("<unknown>").to_string(),
            Source::Script(s) => s.node_text(id).unwrap_or("<unknown>").to_string(),
        }
    }
}

#[derive(Debug)]
enum Interrupt {
    Return(Value),
    Exception { kind: String, message: String, node_id: NodeId },
    AssertFail { expected: Value, actual: Value, expression_text: String },
    StepLimit,
}

#[derive(Default)]
struct Frame {
    vars: IndexMap<String, Value>,
}

struct Interpreter<'a> {
    table: &'a FunctionTable<'a>,
    events: Vec<TraceEvent>,
    steps: u64,
    step_limit: u64,
    depth: u32,
}

impl<'a> Interpreter<'a> {
    fn new(table: &'a FunctionTable<'a>, step_limit: u64) -> Self {
        Interpreter { table, events: Vec::new(), steps: 0, step_limit, depth: 0 }
    }

    fn into_outcome(self, result: Result<(), Interrupt>) -> TestOutcome {
        let mut events = self.events;
        let status = match result {
            Ok(()) | Err(Interrupt::Return(_)) => OutcomeStatus::Pass,
            Err(Interrupt::AssertFail { expected, actual, expression_text }) => {
                events.push(TraceEvent::AssertFail { expected, actual, expression_text });
                OutcomeStatus::Fail
            }
            Err(Interrupt::Exception { kind, message, node_id }) => {
                events.push(TraceEvent::Exception { kind, message, node_id });
                OutcomeStatus::Error { kind: ErrorKind::Exception }
            }
            Err(Interrupt::StepLimit) => {
                events.push(TraceEvent::StepLimitExceeded);
                OutcomeStatus::Error { kind: ErrorKind::StepLimit }
            }
        };
        TestOutcome { status, trace: ExecutionTrace { events }, steps_used: self.steps }
    }

    fn step(&mut self) -> Result<(), Interrupt> {
        if self.steps >= self.step_limit {
            return Err(Interrupt::StepLimit);
        }
        self.steps += 1;
        Ok(())
    }

    fn raise(kind: &str, message: impl Into<String>, node_id: NodeId) -> Interrupt {
        Interrupt::Exception { kind: kind.to_string(), message: message.into(), node_id }
    }

    fn eval_stmt(
        &mut self,
        stmt: &Stmt,
        frame: &mut Frame,
        src: &Source<'_>,
    ) -> Result<(), Interrupt> {
        self.step()?;
        match stmt {
            Stmt::Let { name, value, .. } => {
                let value = self.eval_expr(value, frame, src)?;
                frame.vars.insert(name.clone(), value);
                Ok(())
            }
            Stmt::Assign { id, name, value } => {
                let value = self.eval_expr(value, frame, src)?;
                if !frame.vars.contains_key(name) {
                    return Err(Self::raise("undefined_variable", name.clone(), *id));
                }
                frame.vars.insert(name.clone(), value);
                Ok(())
            }
            Stmt::IndexAssign { id, target, index, value } => {
                let index = self.eval_expr(index, frame, src)?;
                let value = self.eval_expr(value, frame, src)?;
                let Some(container) = frame.vars.get_mut(target) else {
                    return Err(Self::raise("undefined_variable", target.clone(), *id));
                };
                match (container, index) {
                    (Value::List(items), Value::Int(i)) => {
                        if i < 0 || i as usize >= items.len() {
                            return Err(Self::raise("key_out_of_bounds", i.to_string(), *id));
                        }
                        items[i as usize] = value;
                        Ok(())
                    }
                    (Value::Map(entries), Value::Text(key)) => {
                        entries.insert(key, value);
                        Ok(())
                    }
                    (container, index) => Err(Self::raise(
                        "type_error",
                        format!(
                            "cannot index {} with {}",
                            container.type_name(),
                            index.type_name()
                        ),
                        *id,
                    )),
                }
            }
            Stmt::If { id, cond, then_body, else_body } => {
                let cond = self.eval_expr(cond, frame, src)?;
                let branch = match cond {
                    Value::Bool(true) => then_body,
                    Value::Bool(false) => else_body,
                    other => {
                        return Err(Self::raise(
                            "type_error",
                            format!("if condition must be bool, got {}", other.type_name()),
                            *id,
                        ))
                    }
                };
                for stmt in branch {
                    self.eval_stmt(stmt, frame, src)?;
                }
                Ok(())
            }
            Stmt::While { id, cond, body } => {
                loop {
                    let value = self.eval_expr(cond, frame, src)?;
                    match value {
                        Value::Bool(true) => {}
                        Value::Bool(false) => break,
                        other => {
                            return Err(Self::raise(
                                "type_error",
                                format!("while condition must be bool, got {}", other.type_name()),
                                *id,
                            ))
                        }
                    }
                    for stmt in body {
                        self.eval_stmt(stmt, frame, src)?;
                    }
                }
                Ok(())
            }
            Stmt::Return { value, .. } => {
                let value = match value {
                    Some(expr) => self.eval_expr(expr, frame, src)?,
                    None => Value::Null,
                };
                Err(Interrupt::Return(value))
            }
            Stmt::Throw { id, value } => {
                let value = self.eval_expr(value, frame, src)?;
                match value {
                    Value::Text(kind) => Err(Interrupt::Exception {
                        message: kind.clone(),
                        kind,
                        node_id: *id,
                    }),
                    other => Err(Self::raise(
                        "type_error",
                        format!("throw expects text, got {}", other.type_name()),
                        *id,
                    )),
                }
            }
            Stmt::Expr { expr, .. } => {
                self.eval_expr(expr, frame, src)?;
                Ok(())
            }
        }
    }

    fn eval_expr(
        &mut self,
        expr: &Expr,
        frame: &mut Frame,
        src: &Source<'_>,
    ) -> Result<Value, Interrupt> {
        self.step()?;
        match expr {
            Expr::Int { value, .. } => Ok(Value::Int(*value)),
            Expr::Bool { value, .. } => Ok(Value::Bool(*value)),
            Expr::Text { value, .. } => Ok(Value::Text(value.clone())),
            Expr::Null { .. } => Ok(Value::Null),
            Expr::Var { id, name } => frame
                .vars
                .get(name)
                .cloned()
                .ok_or_else(|| Self::raise("undefined_variable", name.clone(), *id)),
            Expr::List { items, .. } => {
                let mut values = Vec::with_capacity(items.len());
                for item in items {
                    values.push(self.eval_expr(item, frame, src)?);
                }
                Ok(Value::List(values))
            }
            Expr::Map { entries, .. } => {
                let mut map = IndexMap::with_capacity(entries.len());
                for (key, value) in entries {
                    map.insert(key.clone(), self.eval_expr(value, frame, src)?);
                }
                Ok(Value::Map(map))
            }
            Expr::Unary { id, op, operand } => {
                let value = self.eval_expr(operand, frame, src)?;
                match (op, value) {
                    (UnaryOp::Not, Value::Bool(b)) => Ok(Value::Bool(!b)),
                    (UnaryOp::Neg, Value::Int(v)) => v
                        .checked_neg()
                        .map(Value::Int)
                        .ok_or_else(|| Self::raise("overflow", "integer overflow", *id)),
                    (op, value) => Err(Self::raise(
                        "type_error",
                        format!(
                            "cannot apply `{}` to {}",
                            match op {
                                UnaryOp::Not => "!",
                                UnaryOp::Neg => "-",
                            },
                            value.type_name()
                        ),
                        *id,
                    )),
                }
            }
            Expr::Binary { id, op, left, right } => self.eval_binary(*id, *op, left, right, frame, src),
            Expr::Index { id, target, index } => {
                let container = self.eval_expr(target, frame, src)?;
                let key = self.eval_expr(index, frame, src)?;
                match (&container, &key) {
                    (Value::List(items), Value::Int(i)) => {
                        if items.is_empty() {
                            return Err(Self::raise(
                                "empty_container",
                                src.node_text(target.id()),
                                *id,
                            ));
                        }
                        let i = *i;
                        if i < 0 || i as usize >= items.len() {
                            return Err(Self::raise("key_out_of_bounds", i.to_string(), *id));
                        }
                        Ok(items[i as usize].clone())
                    }
                    (Value::Map(entries), Value::Text(k)) => {
                        if entries.is_empty() {
                            return Err(Self::raise(
                                "empty_container",
                                src.node_text(target.id()),
                                *id,
                            ));
                        }
                        entries
                            .get(k)
                            .cloned()
                            .ok_or_else(|| Self::raise("key_out_of_bounds", k.clone(), *id))
                    }
                    _ => Err(Self::raise(
                        "type_error",
                        format!("cannot index {} with {}", container.type_name(), key.type_name()),
                        *id,
                    )),
                }
            }
            Expr::Trap { inner, .. } => {
                let before = self.events.len();
                match self.eval_expr(inner, frame, src) {
                    Ok(_) => Ok(Value::Null),
                    Err(Interrupt::Exception { kind, message, node_id }) => {
                        // Record the trapped exception where it happened,
                        // then close the frames it aborted.
                        self.events.push(TraceEvent::Exception {
                            kind: kind.clone(),
                            message,
                            node_id,
                        });
                        self.close_aborted_calls(before);
                        Ok(Value::Text(kind))
                    }
                    Err(other) => Err(other),
                }
            }
            Expr::CallCount { inner, name, .. } => {
                let before = self.events.len();
                self.eval_expr(inner, frame, src)?;
                let count = self.events[before..]
                    .iter()
                    .filter(|e| matches!(e, TraceEvent::Call { name: n, .. } if n == name))
                    .count();
                Ok(Value::Int(count as i64))
            }
            Expr::Call { id, callee, args } => {
                let mut values = Vec::with_capacity(args.len());
                for arg in args {
                    values.push(self.eval_expr(arg, frame, src)?);
                }
                self.dispatch_call(*id, callee, values, src)
            }
        }
    }

    fn eval_binary(
        &mut self,
        id: NodeId,
        op: BinaryOp,
        left: &Expr,
        right: &Expr,
        frame: &mut Frame,
        src: &Source<'_>,
    ) -> Result<Value, Interrupt> {
        // Short-circuit logical operators evaluate the right side lazily.
        if op.is_logical() {
            let lhs = self.eval_expr(left, frame, src)?;
            let Value::Bool(lhs) = lhs else {
                return Err(Self::raise(
                    "type_error",
                    format!("`{}` expects bool operands, got {}", op.symbol(), lhs.type_name()),
                    id,
                ));
            };
            match (op, lhs) {
                (BinaryOp::And, false) => return Ok(Value::Bool(false)),
                (BinaryOp::Or, true) => return Ok(Value::Bool(true)),
                _ => {}
            }
            let rhs = self.eval_expr(right, frame, src)?;
            let Value::Bool(rhs) = rhs else {
                return Err(Self::raise(
                    "type_error",
                    format!("`{}` expects bool operands, got {}", op.symbol(), rhs.type_name()),
                    id,
                ));
            };
            return Ok(Value::Bool(rhs));
        }

        let lhs = self.eval_expr(left, frame, src)?;
        let rhs = self.eval_expr(right, frame, src)?;
        match op {
            BinaryOp::Eq => Ok(Value::Bool(lhs == rhs)),
            BinaryOp::Ne => Ok(Value::Bool(lhs != rhs)),
            BinaryOp::Add => match (lhs, rhs) {
                (Value::Int(a), Value::Int(b)) => a
                    .checked_add(b)
                    .map(Value::Int)
                    .ok_or_else(|| Self::raise("overflow", "integer overflow", id)),
                (Value::Text(a), Value::Text(b)) => Ok(Value::Text(a + &b)),
                (Value::List(mut a), Value::List(b)) => {
                    a.extend(b);
                    Ok(Value::List(a))
                }
                (a, b) => Err(Self::raise(
                    "type_error",
                    format!("cannot apply `+` to {} and {}", a.type_name(), b.type_name()),
                    id,
                )),
            },
            BinaryOp::Sub | BinaryOp::Mul | BinaryOp::Div | BinaryOp::Mod => {
                let (Value::Int(a), Value::Int(b)) = (&lhs, &rhs) else {
                    return Err(Self::raise(
                        "type_error",
                        format!(
                            "cannot apply `{}` to {} and {}",
                            op.symbol(),
                            lhs.type_name(),
                            rhs.type_name()
                        ),
                        id,
                    ));
                };
                let (a, b) = (*a, *b);
                let result = match op {
                    BinaryOp::Sub => a.checked_sub(b),
                    BinaryOp::Mul => a.checked_mul(b),
                    BinaryOp::Div => {
                        if b == 0 {
                            return Err(Self::raise("div_zero", "division by zero", id));
                        }
                        a.checked_div(b)
                    }
                    BinaryOp::Mod => {
                        if b == 0 {
                            return Err(Self::raise("div_zero", "division by zero", id));
                        }
                        a.checked_rem(b)
                    }
                    _ => unreachable!(),
                };
                result.map(Value::Int).ok_or_else(|| Self::raise("overflow", "integer overflow", id))
            }
            BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge => {
                let (Value::Int(a), Value::Int(b)) = (&lhs, &rhs) else {
                    return Err(Self::raise(
                        "type_error",
                        format!(
                            "cannot apply `{}` to {} and {}",
                            op.symbol(),
                            lhs.type_name(),
                            rhs.type_name()
                        ),
                        id,
                    ));
                };
                let result = match op {
                    BinaryOp::Lt => a < b,
                    BinaryOp::Le => a <= b,
                    BinaryOp::Gt => a > b,
                    BinaryOp::Ge => a >= b,
                    _ => unreachable!(),
                };
                Ok(Value::Bool(result))
            }
            BinaryOp::And | BinaryOp::Or => unreachable!("handled above"),
        }
    }

    fn dispatch_call(
        &mut self,
        id: NodeId,
        callee: &str,
        args: Vec<Value>,
        src: &Source<'_>,
    ) -> Result<Value, Interrupt> {
        match callee {
            "assert_eq" => {
                if args.len() != 2 {
                    return Err(Self::raise("arity_mismatch", "assert_eq expects 2 arguments", id));
                }
                let mut it = args.into_iter();
                let actual = it.next().unwrap();
                let expected = it.next().unwrap();
                if actual == expected {
                    Ok(Value::Null)
                } else {
                    Err(Interrupt::AssertFail {
                        expected,
                        actual,
                        expression_text: src.node_text(id),
                    })
                }
            }
            "assert_true" => {
                if args.len() != 1 {
                    return Err(Self::raise("arity_mismatch", "assert_true expects 1 argument", id));
                }
                let actual = args.into_iter().next().unwrap();
                if actual == Value::Bool(true) {
                    Ok(Value::Null)
                } else {
                    Err(Interrupt::AssertFail {
                        expected: Value::Bool(true),
                        actual,
                        expression_text: src.node_text(id),
                    })
                }
            }
            "len" => {
                if args.len() != 1 {
                    return Err(Self::raise("arity_mismatch", "len expects 1 argument", id));
                }
                match &args[0] {
                    Value::List(items) => Ok(Value::Int(items.len() as i64)),
                    Value::Map(entries) => Ok(Value::Int(entries.len() as i64)),
                    Value::Text(text) => Ok(Value::Int(text.chars().count() as i64)),
                    other => Err(Self::raise(
                        "type_error",
                        format!("len expects a container or text, got {}", other.type_name()),
                        id,
                    )),
                }
            }
            "keys" => {
                if args.len() != 1 {
                    return Err(Self::raise("arity_mismatch", "keys expects 1 argument", id));
                }
                match &args[0] {
                    Value::Map(entries) => Ok(Value::List(
                        entries.keys().map(|k| Value::Text(k.clone())).collect(),
                    )),
                    other => Err(Self::raise(
                        "type_error",
                        format!("keys expects a map, got {}", other.type_name()),
                        id,
                    )),
                }
            }
            "str" => {
                if args.len() != 1 {
                    return Err(Self::raise("arity_mismatch", "str expects 1 argument", id));
                }
                Ok(Value::Text(crate::printer::render_value(&args[0])))
            }
            _ => self.call_function(callee, args, id),
        }
    }

    fn call_function(
        &mut self,
        name: &str,
        args: Vec<Value>,
        call_node: NodeId,
    ) -> Result<Value, Interrupt> {
        let Some((decl, program)) = self.table.map.get(name).copied() else {
            return Err(Self::raise("undefined_function", name.to_string(), call_node));
        };
        if decl.params.len() != args.len() {
            return Err(Self::raise(
                "arity_mismatch",
                format!("{} expects {} arguments, got {}", name, decl.params.len(), args.len()),
                call_node,
            ));
        }
        if self.depth >= MAX_CALL_DEPTH {
            return Err(Self::raise("stack_overflow", name.to_string(), call_node));
        }
        self.depth += 1;
        self.events.push(TraceEvent::Call { name: name.to_string(), args: args.clone() });

        let mut frame = Frame::default();
        for (param, arg) in decl.params.iter().zip(args) {
            frame.vars.insert(param.clone(), arg);
        }
        let src = Source::Program(program);
        let mut result = Ok(());
        for stmt in &decl.body {
            result = self.eval_stmt(stmt, &mut frame, &src);
            if result.is_err() {
                break;
            }
        }
        self.depth -= 1;
        let value = match result {
            Ok(()) => Value::Null,
            Err(Interrupt::Return(value)) => value,
            Err(other) => return Err(other),
        };
        self.events.push(TraceEvent::Return { name: name.to_string(), value: value.clone() });
        Ok(value)
    }

    /// After `trap` swallows an exception, calls entered since `start` never
    /// returned. Close them with null returns so the trace keeps its
    /// stack-replay shape; aborted frames are recorded as returning null.
    fn close_aborted_calls(&mut self, start: usize) {
        let mut open: Vec<String> = Vec::new();
        for event in &self.events[start..] {
            match event {
                TraceEvent::Call { name, .. } => open.push(name.clone()),
                TraceEvent::Return { .. } => {
                    open.pop();
                }
                _ => {}
            }
        }
        // Depth was already restored while the interrupt unwound through
        // call_function; only the trace needs closing here.
        while let Some(name) = open.pop() {
            self.events.push(TraceEvent::Return { name, value: Value::Null });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse;
    use crate::DEFAULT_STEP_LIMIT;

    fn program(src: &str) -> Program {
        parse(src).unwrap()
    }

    fn run(prog_src: &str, test_src: &str) -> TestOutcome {
        let program = program(prog_src);
        execute(&[&program], test_src, DEFAULT_STEP_LIMIT)
    }

    #[test]
    fn passing_assertion() {
        let outcome = run("fn f(x){ return x + 1; }", "assert_eq(f(1), 2);");
        assert_eq!(outcome.status, OutcomeStatus::Pass);
        assert!(outcome.trace.is_well_formed());
    }

    #[test]
    fn failing_assertion_records_values() {
        let outcome = run("fn f(x){ return x + 1; }", "assert_eq(f(1), 3);");
        assert_eq!(outcome.status, OutcomeStatus::Fail);
        let Some(TraceEvent::AssertFail { expected, actual, expression_text }) =
            outcome.trace.terminal()
        else {
            panic!("expected assert failure terminal, got {:?}", outcome.trace);
        };
        assert_eq!(expected, &Value::Int(3));
        assert_eq!(actual, &Value::Int(2));
        assert_eq!(expression_text, "assert_eq(f(1), 3)");
    }

    #[test]
    fn step_limit_is_enforced() {
        let outcome = execute(
            &[&program("fn spin(){ while (true) { let x = 1; } }")],
            "spin();",
            10_000,
        );
        assert_eq!(outcome.status, OutcomeStatus::Error { kind: ErrorKind::StepLimit });
        assert!(outcome.steps_used <= 10_000);
        assert!(matches!(outcome.trace.terminal(), Some(TraceEvent::StepLimitExceeded)));
    }

    #[test]
    fn uncaught_throw_is_exception_error() {
        let outcome = run("fn f(){ throw \"boom\"; }", "f();");
        assert_eq!(outcome.status, OutcomeStatus::Error { kind: ErrorKind::Exception });
        let Some(TraceEvent::Exception { kind, .. }) = outcome.trace.terminal() else {
            panic!();
        };
        assert_eq!(kind, "boom");
        assert!(outcome.trace.is_well_formed());
    }

    #[test]
    fn unparseable_test_is_parse_failure() {
        let outcome = run("fn f(){ return 1; }", "assert_eq(f(1), ;");
        assert_eq!(outcome.status, OutcomeStatus::Error { kind: ErrorKind::ParseFailure });
    }

    #[test]
    fn division_by_zero_kind() {
        let outcome = run("fn f(x){ return 10 / x; }", "f(0);");
        let Some(TraceEvent::Exception { kind, .. }) = outcome.trace.terminal() else { panic!() };
        assert_eq!(kind, "div_zero");
    }

    #[test]
    fn key_out_of_bounds_and_empty_container() {
        let outcome = run("fn f(m){ return m[\"missing\"]; }", "f({\"a\": 1});");
        let Some(TraceEvent::Exception { kind, message, .. }) = outcome.trace.terminal() else {
            panic!()
        };
        assert_eq!(kind, "key_out_of_bounds");
        assert_eq!(message, "missing");

        let outcome = run("fn g(m){ return m[\"a\"]; }", "g({});");
        let Some(TraceEvent::Exception { kind, .. }) = outcome.trace.terminal() else { panic!() };
        assert_eq!(kind, "empty_container");
    }

    #[test]
    fn trap_captures_exception_kind() {
        let outcome = run(
            "fn f(){ throw \"boom\"; } fn g(){ return 7; }",
            "assert_eq(trap(f()), \"boom\");\nassert_eq(trap(g()), null);",
        );
        assert_eq!(outcome.status, OutcomeStatus::Pass);
        assert!(outcome.trace.is_well_formed(), "trace: {:?}", outcome.trace);
    }

    #[test]
    fn calls_counts_nested_invocations() {
        let outcome = run(
            "fn helper(x){ return x; } fn f(x){ return helper(x) + helper(x); }",
            "assert_eq(calls(f(1), \"helper\"), 2);",
        );
        assert_eq!(outcome.status, OutcomeStatus::Pass);
    }

    #[test]
    fn observed_outputs_records_values_and_exceptions() {
        let p = program("fn f(x){ return x + 1; }");
        let obs = observed_outputs(
            &[&p],
            "f",
            &[vec![Value::Int(0)], vec![Value::Int(1)]],
            DEFAULT_STEP_LIMIT,
        )
        .unwrap();
        assert_eq!(obs[0].outcome, ObservedOutcome::Value(Value::Int(1)));
        assert_eq!(obs[1].outcome, ObservedOutcome::Value(Value::Int(2)));

        let p = program("fn f(x){ throw \"boom\"; }");
        let obs = observed_outputs(&[&p], "f", &[vec![Value::Int(0)]], DEFAULT_STEP_LIMIT).unwrap();
        assert_eq!(obs[0].outcome, ObservedOutcome::Exception("boom".into()));
    }

    #[test]
    fn observed_outputs_missing_entry() {
        let p = program("fn f(x){ return x; }");
        let err = observed_outputs(&[&p], "g", &[], DEFAULT_STEP_LIMIT).unwrap_err();
        assert_eq!(err, ExecError::MissingEntry("g".into()));
    }

    #[test]
    fn execution_is_deterministic() {
        let p = program("fn f(x){ if (x > 0) { return f(x - 1) + 1; } return 0; }");
        let a = execute(&[&p], "assert_eq(f(5), 5);", DEFAULT_STEP_LIMIT);
        let b = execute(&[&p], "assert_eq(f(5), 5);", DEFAULT_STEP_LIMIT);
        assert_eq!(a, b);
        assert_eq!(a.trace, b.trace);
    }

    #[test]
    fn stack_overflow_is_an_exception() {
        let p = program("fn f(x){ return f(x); }");
        let outcome = execute(&[&p], "f(1);", DEFAULT_STEP_LIMIT);
        let Some(TraceEvent::Exception { kind, .. }) = outcome.trace.terminal() else { panic!() };
        assert_eq!(kind, "stack_overflow");
    }

    #[test]
    fn map_insertion_order_is_observable() {
        let outcome = run(
            "fn a(){ let m = {\"x\": 1}; m[\"y\"] = 2; return m; } fn b(){ let m = {\"y\": 2}; m[\"x\"] = 1; return m; }",
            "assert_true(a() != b());\nassert_eq(keys(a()), [\"x\", \"y\"]);",
        );
        assert_eq!(outcome.status, OutcomeStatus::Pass, "trace: {}", outcome.trace.render());
    }
}
