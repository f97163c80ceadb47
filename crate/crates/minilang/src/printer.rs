//! Canonical source printer. `parse(print(parse(s)))` yields the same AST as
//! `parse(s)`: the printer emits constructs in the order the parser builds
//! nodes, so reparsing reassigns identical node ids.

use crate::ast::{BinaryOp, Expr, FunctionDecl, Program, Stmt, UnaryOp};
use crate::value::Value;

pub fn print_program(program: &Program) -> String {
    let mut out = String::new();
    for (i, (_, decl)) in program.functions.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        print_function(&mut out, decl);
    }
    out
}

pub fn print_function(out: &mut String, decl: &FunctionDecl) {
    out.push_str(&format!("fn {}({}) {{\n", decl.name, decl.params.join(", ")));
    for stmt in &decl.body {
        print_stmt(out, stmt, 1);
    }
    out.push_str("}\n");
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("    ");
    }
}

pub fn print_stmt(out: &mut String, stmt: &Stmt, depth: usize) {
    indent(out, depth);
    match stmt {
        Stmt::Let { name, value, .. } => {
            out.push_str(&format!("let {} = {};\n", name, print_expr(value)));
        }
        Stmt::Assign { name, value, .. } => {
            out.push_str(&format!("{} = {};\n", name, print_expr(value)));
        }
        Stmt::IndexAssign { target, index, value, .. } => {
            out.push_str(&format!("{}[{}] = {};\n", target, print_expr(index), print_expr(value)));
        }
        Stmt::If { cond, then_body, else_body, .. } => {
            out.push_str(&format!("if ({}) {{\n", print_expr(cond)));
            for s in then_body {
                print_stmt(out, s, depth + 1);
            }
            indent(out, depth);
            out.push('}');
            if !else_body.is_empty() {
                if else_body.len() == 1 && matches!(else_body[0], Stmt::If { .. }) {
                    out.push_str(" else ");
                    // Re-print the nested if inline, without leading indent.
                    let mut nested = String::new();
                    print_stmt(&mut nested, &else_body[0], depth);
                    out.push_str(nested.trim_start());
                    return;
                }
                out.push_str(" else {\n");
                for s in else_body {
                    print_stmt(out, s, depth + 1);
                }
                indent(out, depth);
                out.push('}');
            }
            out.push('\n');
        }
        Stmt::While { cond, body, .. } => {
            out.push_str(&format!("while ({}) {{\n", print_expr(cond)));
            for s in body {
                print_stmt(out, s, depth + 1);
            }
            indent(out, depth);
            out.push_str("}\n");
        }
        Stmt::Return { value, .. } => match value {
            Some(expr) => out.push_str(&format!("return {};\n", print_expr(expr))),
            None => out.push_str("return;\n"),
        },
        Stmt::Throw { value, .. } => {
            out.push_str(&format!("throw {};\n", print_expr(value)));
        }
        Stmt::Expr { expr, .. } => {
            let text = print_expr(expr);
            // A statement opening with `name[` parses as an index
            // assignment; parenthesize to keep it an expression statement.
            if starts_with_indexed_ident(&text) {
                out.push_str(&format!("({text});\n"));
            } else {
                out.push_str(&format!("{text};\n"));
            }
        }
    }
}

pub fn print_expr(expr: &Expr) -> String {
    print_expr_prec(expr, 0)
}

fn precedence(op: BinaryOp) -> u8 {
    match op {
        BinaryOp::Or => 1,
        BinaryOp::And => 2,
        BinaryOp::Eq | BinaryOp::Ne => 3,
        BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge => 4,
        BinaryOp::Add | BinaryOp::Sub => 5,
        BinaryOp::Mul | BinaryOp::Div | BinaryOp::Mod => 6,
    }
}

/// Binding strength of a printed expression: binaries 1..=6, unary 7,
/// indexing 8, atoms 9. A subexpression is parenthesized whenever its own
/// strength is below what its context requires.
fn own_precedence(expr: &Expr) -> u8 {
    match expr {
        Expr::Binary { op, .. } => precedence(*op),
        Expr::Unary { .. } => 7,
        Expr::Index { .. } => 8,
        // Negative literals reparse as unary negation, so they print
        // parenthesized and count as atoms.
        _ => 9,
    }
}

fn print_expr_prec(expr: &Expr, parent_prec: u8) -> String {
    let text = match expr {
        Expr::Int { value, .. } => {
            if *value < 0 {
                format!("({value})")
            } else {
                value.to_string()
            }
        }
        Expr::Bool { value, .. } => value.to_string(),
        Expr::Text { value, .. } => quote_text(value),
        Expr::Null { .. } => "null".to_string(),
        Expr::Var { name, .. } => name.clone(),
        Expr::List { items, .. } => {
            let inner: Vec<String> = items.iter().map(|e| print_expr_prec(e, 0)).collect();
            format!("[{}]", inner.join(", "))
        }
        Expr::Map { entries, .. } => {
            let inner: Vec<String> = entries
                .iter()
                .map(|(k, v)| format!("{}: {}", quote_text(k), print_expr_prec(v, 0)))
                .collect();
            format!("{{{}}}", inner.join(", "))
        }
        Expr::Unary { op, operand, .. } => {
            let symbol = match op {
                UnaryOp::Not => "!",
                UnaryOp::Neg => "-",
            };
            format!("{}{}", symbol, print_expr_prec(operand, 7))
        }
        Expr::Binary { op, left, right, .. } => {
            let prec = precedence(*op);
            format!(
                "{} {} {}",
                print_expr_prec(left, prec),
                op.symbol(),
                // Right operand binds tighter: the parser is left-associative.
                print_expr_prec(right, prec + 1)
            )
        }
        Expr::Call { callee, args, .. } => {
            let inner: Vec<String> = args.iter().map(|e| print_expr_prec(e, 0)).collect();
            format!("{}({})", callee, inner.join(", "))
        }
        Expr::Index { target, index, .. } => {
            format!("{}[{}]", print_expr_prec(target, 8), print_expr_prec(index, 0))
        }
        Expr::Trap { inner, .. } => format!("trap({})", print_expr_prec(inner, 0)),
        Expr::CallCount { inner, name, .. } => {
            format!("calls({}, {})", print_expr_prec(inner, 0), quote_text(name))
        }
    };
    if own_precedence(expr) < parent_prec {
        format!("({text})")
    } else {
        text
    }
}

fn starts_with_indexed_ident(text: &str) -> bool {
    let rest = text.trim_start_matches(|c: char| c.is_ascii_alphanumeric() || c == '_');
    rest.len() < text.len() && rest.starts_with('[')
}

fn quote_text(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 2);
    out.push('"');
    for ch in text.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            other => out.push(other),
        }
    }
    out.push('"');
    out
}

/// Human-readable value rendering (strings unquoted at top level).
pub fn render_value(value: &Value) -> String {
    match value {
        Value::Text(text) => text.clone(),
        other => value_literal(other),
    }
}

/// Source-literal rendering: the returned text parses back to an expression
/// that evaluates to the value.
pub fn value_literal(value: &Value) -> String {
    match value {
        Value::Int(v) => {
            if *v < 0 {
                format!("({v})")
            } else {
                v.to_string()
            }
        }
        Value::Bool(v) => v.to_string(),
        Value::Text(v) => quote_text(v),
        Value::List(items) => {
            let inner: Vec<String> = items.iter().map(value_literal).collect();
            format!("[{}]", inner.join(", "))
        }
        Value::Map(entries) => {
            let inner: Vec<String> = entries
                .iter()
                .map(|(k, v)| format!("{}: {}", quote_text(k), value_literal(v)))
                .collect();
            format!("{{{}}}", inner.join(", "))
        }
        Value::Null => "null".to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse;

    #[test]
    fn roundtrip_simple() {
        let src = "fn f(x){ return x + 1; }";
        let first = parse(src).unwrap();
        let printed = print_program(&first);
        let second = parse(&printed).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn roundtrip_control_flow() {
        let src = r#"
fn classify(x) {
    if (x < 0) { return "neg"; }
    else if (x == 0) { return "zero"; }
    else { return "pos"; }
}
fn sum(xs) {
    let total = 0;
    let i = 0;
    while (i < len(xs)) {
        total = total + xs[i];
        i = i + 1;
    }
    return total;
}
fn build() {
    let m = {"a": 1, "b": [true, null]};
    m["c"] = "x";
    return m;
}
"#;
        let first = parse(src).unwrap();
        let printed = print_program(&first);
        let second = parse(&printed).unwrap();
        assert_eq!(first, second);
        // And printing is a fixpoint.
        assert_eq!(printed, print_program(&second));
    }

    #[test]
    fn precedence_parenthesization() {
        let src = "fn f(a, b, c){ return (a + b) * c - -a; }";
        let first = parse(src).unwrap();
        let printed = print_program(&first);
        let second = parse(&printed).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn value_literals_reparse() {
        let script =
            format!("assert_true({} == {});", value_literal(&Value::Int(-3)), "(0 - 3)");
        assert!(crate::parser::parse_test_statements(&script).is_ok());
    }
}
