//! Node-targeted rewrites and their application. A rewrite addresses a node
//! by id in the base AST; applying it rebuilds the tree, prints it, and
//! reparses so the mutated program has fresh dense node ids and is valid by
//! construction.

use minilang::{parse, print_program, Expr, FunctionDecl, NodeId, Stmt};

use crate::corpus::ProgramSet;

#[derive(Debug, Clone)]
pub enum Rewrite {
    /// Replace the expression with the given id.
    ReplaceExpr { node_id: NodeId, with: Expr, note: String },
    /// Remove the statement with the given id.
    DeleteStmt { node_id: NodeId, note: String },
    /// Insert `return null;` at the start of the named function's body.
    InsertReturnNull { function_node: NodeId, note: String },
}

impl Rewrite {
    pub fn describe(&self) -> String {
        match self {
            Rewrite::ReplaceExpr { note, .. }
            | Rewrite::DeleteStmt { note, .. }
            | Rewrite::InsertReturnNull { note, .. } => note.clone(),
        }
    }

    /// Node the rewrite is anchored at, for provenance and ordering.
    pub fn target_node(&self, _decl: &FunctionDecl) -> NodeId {
        match self {
            Rewrite::ReplaceExpr { node_id, .. } | Rewrite::DeleteStmt { node_id, .. } => *node_id,
            Rewrite::InsertReturnNull { function_node, .. } => *function_node,
        }
    }
}

/// Apply a rewrite to one file of the set. Returns None when the rewrite
/// does not land (unknown node) or the result fails to reparse.
pub fn apply_rewrite(base: &ProgramSet, file: &str, rewrite: &Rewrite) -> Option<ProgramSet> {
    let program = base.files.get(file)?;
    let mut applied = false;
    let mut edited = program.clone();
    let functions = edited
        .functions
        .iter()
        .map(|(name, decl)| {
            let mut decl = decl.clone();
            decl.body = edit_stmt_list(&decl.body, rewrite, &mut applied);
            if let Rewrite::InsertReturnNull { function_node, .. } = rewrite {
                if decl.id == *function_node && !applied {
                    let mut body = vec![Stmt::Return {
                        id: 0,
                        value: Some(Expr::Null { id: 0 }),
                    }];
                    body.extend(decl.body);
                    decl.body = body;
                    applied = true;
                }
            }
            (name.clone(), decl)
        })
        .collect();
    edited.functions = functions;
    if !applied {
        return None;
    }

    let printed = print_program(&edited);
    let reparsed = parse(&printed).ok()?;
    let mut mutated = base.clone();
    mutated.files.insert(file.to_string(), reparsed);
    Some(mutated)
}

fn edit_stmt_list(stmts: &[Stmt], rewrite: &Rewrite, applied: &mut bool) -> Vec<Stmt> {
    let mut out = Vec::with_capacity(stmts.len());
    for stmt in stmts {
        if let Rewrite::DeleteStmt { node_id, .. } = rewrite {
            if stmt.id() == *node_id {
                *applied = true;
                continue;
            }
        }
        out.push(edit_stmt(stmt, rewrite, applied));
    }
    out
}

fn edit_stmt(stmt: &Stmt, rewrite: &Rewrite, applied: &mut bool) -> Stmt {
    match stmt {
        Stmt::Let { id, name, value } => Stmt::Let {
            id: *id,
            name: name.clone(),
            value: edit_expr(value, rewrite, applied),
        },
        Stmt::Assign { id, name, value } => Stmt::Assign {
            id: *id,
            name: name.clone(),
            value: edit_expr(value, rewrite, applied),
        },
        Stmt::IndexAssign { id, target, index, value } => Stmt::IndexAssign {
            id: *id,
            target: target.clone(),
            index: edit_expr(index, rewrite, applied),
            value: edit_expr(value, rewrite, applied),
        },
        Stmt::If { id, cond, then_body, else_body } => Stmt::If {
            id: *id,
            cond: edit_expr(cond, rewrite, applied),
            then_body: edit_stmt_list(then_body, rewrite, applied),
            else_body: edit_stmt_list(else_body, rewrite, applied),
        },
        Stmt::While { id, cond, body } => Stmt::While {
            id: *id,
            cond: edit_expr(cond, rewrite, applied),
            body: edit_stmt_list(body, rewrite, applied),
        },
        Stmt::Return { id, value } => Stmt::Return {
            id: *id,
            value: value.as_ref().map(|v| edit_expr(v, rewrite, applied)),
        },
        Stmt::Throw { id, value } => {
            Stmt::Throw { id: *id, value: edit_expr(value, rewrite, applied) }
        }
        Stmt::Expr { id, expr } => Stmt::Expr { id: *id, expr: edit_expr(expr, rewrite, applied) },
    }
}

fn edit_expr(expr: &Expr, rewrite: &Rewrite, applied: &mut bool) -> Expr {
    if let Rewrite::ReplaceExpr { node_id, with, .. } = rewrite {
        if expr.id() == *node_id {
            *applied = true;
            return with.clone();
        }
    }
    match expr {
        Expr::Int { .. }
        | Expr::Bool { .. }
        | Expr::Text { .. }
        | Expr::Null { .. }
        | Expr::Var { .. } => expr.clone(),
        Expr::List { id, items } => Expr::List {
            id: *id,
            items: items.iter().map(|e| edit_expr(e, rewrite, applied)).collect(),
        },
        Expr::Map { id, entries } => Expr::Map {
            id: *id,
            entries: entries
                .iter()
                .map(|(k, v)| (k.clone(), edit_expr(v, rewrite, applied)))
                .collect(),
        },
        Expr::Unary { id, op, operand } => Expr::Unary {
            id: *id,
            op: *op,
            operand: Box::new(edit_expr(operand, rewrite, applied)),
        },
        Expr::Binary { id, op, left, right } => Expr::Binary {
            id: *id,
            op: *op,
            left: Box::new(edit_expr(left, rewrite, applied)),
            right: Box::new(edit_expr(right, rewrite, applied)),
        },
        Expr::Call { id, callee, args } => Expr::Call {
            id: *id,
            callee: callee.clone(),
            args: args.iter().map(|e| edit_expr(e, rewrite, applied)).collect(),
        },
        Expr::Index { id, target, index } => Expr::Index {
            id: *id,
            target: Box::new(edit_expr(target, rewrite, applied)),
            index: Box::new(edit_expr(index, rewrite, applied)),
        },
        Expr::Trap { id, inner } => {
            Expr::Trap { id: *id, inner: Box::new(edit_expr(inner, rewrite, applied)) }
        }
        Expr::CallCount { id, inner, name } => Expr::CallCount {
            id: *id,
            inner: Box::new(edit_expr(inner, rewrite, applied)),
            name: name.clone(),
        },
    }
}

/// Walk every expression in a function, preorder.
pub fn for_each_expr(decl: &FunctionDecl, visit: &mut impl FnMut(&Expr)) {
    for_each_expr_in_stmts(&decl.body, visit);
}

/// Walk every expression under a statement list, preorder.
pub fn for_each_expr_in_stmts(stmts: &[Stmt], visit: &mut impl FnMut(&Expr)) {
    fn walk_stmts(stmts: &[Stmt], visit: &mut impl FnMut(&Expr)) {
        for stmt in stmts {
            match stmt {
                Stmt::Let { value, .. } | Stmt::Assign { value, .. } | Stmt::Throw { value, .. } => {
                    walk_expr(value, visit)
                }
                Stmt::IndexAssign { index, value, .. } => {
                    walk_expr(index, visit);
                    walk_expr(value, visit);
                }
                Stmt::If { cond, then_body, else_body, .. } => {
                    walk_expr(cond, visit);
                    walk_stmts(then_body, visit);
                    walk_stmts(else_body, visit);
                }
                Stmt::While { cond, body, .. } => {
                    walk_expr(cond, visit);
                    walk_stmts(body, visit);
                }
                Stmt::Return { value, .. } => {
                    if let Some(value) = value {
                        walk_expr(value, visit);
                    }
                }
                Stmt::Expr { expr, .. } => walk_expr(expr, visit),
            }
        }
    }
    fn walk_expr(expr: &Expr, visit: &mut impl FnMut(&Expr)) {
        visit(expr);
        match expr {
            Expr::List { items, .. } => items.iter().for_each(|e| walk_expr(e, visit)),
            Expr::Map { entries, .. } => entries.iter().for_each(|(_, e)| walk_expr(e, visit)),
            Expr::Unary { operand, .. } => walk_expr(operand, visit),
            Expr::Binary { left, right, .. } => {
                walk_expr(left, visit);
                walk_expr(right, visit);
            }
            Expr::Call { args, .. } => args.iter().for_each(|e| walk_expr(e, visit)),
            Expr::Index { target, index, .. } => {
                walk_expr(target, visit);
                walk_expr(index, visit);
            }
            Expr::Trap { inner, .. } | Expr::CallCount { inner, .. } => walk_expr(inner, visit),
            _ => {}
        }
    }
    walk_stmts(stmts, visit);
}

/// Every statement in a function, preorder, nested bodies included.
pub fn for_each_stmt(decl: &FunctionDecl, visit: &mut impl FnMut(&Stmt)) {
    fn walk(stmts: &[Stmt], visit: &mut impl FnMut(&Stmt)) {
        for stmt in stmts {
            visit(stmt);
            match stmt {
                Stmt::If { then_body, else_body, .. } => {
                    walk(then_body, visit);
                    walk(else_body, visit);
                }
                Stmt::While { body, .. } => walk(body, visit),
                _ => {}
            }
        }
    }
    walk(&decl.body, visit);
}
