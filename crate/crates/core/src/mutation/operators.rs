//! The built-in mutation operator family. Each operator lives behind the
//! [`MutationOperator`] trait and is registered by id, so pipelines can
//! select subsets by name at runtime.

use indexmap::IndexMap;
use minilang::{BinaryOp, Expr, FunctionDecl, Stmt, UnaryOp};

use super::rewrite::{for_each_expr, for_each_stmt, Rewrite};
use super::MutationOperator;

pub struct OperatorRegistry {
    operators: IndexMap<&'static str, Box<dyn MutationOperator>>,
}

impl OperatorRegistry {
    pub fn new() -> Self {
        OperatorRegistry { operators: IndexMap::new() }
    }

    pub fn register(&mut self, op: Box<dyn MutationOperator>) {
        self.operators.insert(op.id(), op);
    }

    pub fn get(&self, id: &str) -> Option<&dyn MutationOperator> {
        self.operators.get(id).map(|b| b.as_ref())
    }

    pub fn all(&self) -> Vec<&dyn MutationOperator> {
        self.operators.values().map(|b| b.as_ref()).collect()
    }

    pub fn ids(&self) -> Vec<&'static str> {
        self.operators.keys().copied().collect()
    }
}

impl Default for OperatorRegistry {
    fn default() -> Self {
        default_operator_registry()
    }
}

/// Registry with the full built-in operator set, in canonical order.
pub fn default_operator_registry() -> OperatorRegistry {
    let mut registry = OperatorRegistry::new();
    registry.register(Box::new(ArithOpReplace));
    registry.register(Box::new(RelOpReplace));
    registry.register(Box::new(BoolNegate));
    registry.register(Box::new(ConstPerturb));
    registry.register(Box::new(StmtDelete));
    registry.register(Box::new(EarlyReturn));
    registry.register(Box::new(MapKeyRename));
    registry
}

fn replace(expr: &Expr, with: Expr, note: String) -> Rewrite {
    Rewrite::ReplaceExpr { node_id: expr.id(), with, note }
}

/// `+ - * / %` swapped for a counterpart.
pub struct ArithOpReplace;

impl MutationOperator for ArithOpReplace {
    fn id(&self) -> &'static str {
        "arith_op_replace"
    }

    fn description(&self) -> &'static str {
        "replace an arithmetic operator with a counterpart"
    }

    fn propose(&self, decl: &FunctionDecl) -> Vec<Rewrite> {
        let mut rewrites = Vec::new();
        for_each_expr(decl, &mut |expr| {
            if let Expr::Binary { op, left, right, .. } = expr {
                let swapped = match op {
                    BinaryOp::Add => Some(BinaryOp::Sub),
                    BinaryOp::Sub => Some(BinaryOp::Add),
                    BinaryOp::Mul => Some(BinaryOp::Div),
                    BinaryOp::Div => Some(BinaryOp::Mul),
                    BinaryOp::Mod => Some(BinaryOp::Mul),
                    _ => None,
                };
                if let Some(new_op) = swapped {
                    rewrites.push(replace(
                        expr,
                        Expr::Binary {
                            id: 0,
                            op: new_op,
                            left: left.clone(),
                            right: right.clone(),
                        },
                        format!("`{}` -> `{}`", op.symbol(), new_op.symbol()),
                    ));
                }
            }
        });
        rewrites
    }
}

/// Relational operators swapped with their boundary neighbor and complement.
pub struct RelOpReplace;

impl MutationOperator for RelOpReplace {
    fn id(&self) -> &'static str {
        "rel_op_replace"
    }

    fn description(&self) -> &'static str {
        "replace a relational operator (boundary and complement variants)"
    }

    fn propose(&self, decl: &FunctionDecl) -> Vec<Rewrite> {
        let mut rewrites = Vec::new();
        for_each_expr(decl, &mut |expr| {
            if let Expr::Binary { op, left, right, .. } = expr {
                let swaps: &[BinaryOp] = match op {
                    BinaryOp::Lt => &[BinaryOp::Le, BinaryOp::Ge],
                    BinaryOp::Le => &[BinaryOp::Lt, BinaryOp::Gt],
                    BinaryOp::Gt => &[BinaryOp::Ge, BinaryOp::Le],
                    BinaryOp::Ge => &[BinaryOp::Gt, BinaryOp::Lt],
                    BinaryOp::Eq => &[BinaryOp::Ne],
                    BinaryOp::Ne => &[BinaryOp::Eq],
                    _ => &[],
                };
                for new_op in swaps {
                    rewrites.push(replace(
                        expr,
                        Expr::Binary {
                            id: 0,
                            op: *new_op,
                            left: left.clone(),
                            right: right.clone(),
                        },
                        format!("`{}` -> `{}`", op.symbol(), new_op.symbol()),
                    ));
                }
            }
        });
        rewrites
    }
}

/// Boolean-valued expressions negated; literal booleans flipped.
pub struct BoolNegate;

impl MutationOperator for BoolNegate {
    fn id(&self) -> &'static str {
        "bool_negate"
    }

    fn description(&self) -> &'static str {
        "negate a boolean expression"
    }

    fn propose(&self, decl: &FunctionDecl) -> Vec<Rewrite> {
        let mut rewrites = Vec::new();
        for_each_expr(decl, &mut |expr| match expr {
            Expr::Bool { value, .. } => {
                rewrites.push(replace(
                    expr,
                    Expr::Bool { id: 0, value: !value },
                    format!("`{}` -> `{}`", value, !value),
                ));
            }
            Expr::Binary { op, .. } if op.is_comparison() || op.is_logical() => {
                rewrites.push(replace(
                    expr,
                    Expr::Unary { id: 0, op: UnaryOp::Not, operand: Box::new(expr.clone()) },
                    "negate condition".to_string(),
                ));
            }
            Expr::Unary { op: UnaryOp::Not, operand, .. } => {
                rewrites.push(replace(expr, (**operand).clone(), "drop negation".to_string()));
            }
            _ => {}
        });
        rewrites
    }
}

/// Constants nudged: ints by one in each direction, booleans flipped, text
/// emptied or seeded.
pub struct ConstPerturb;

impl MutationOperator for ConstPerturb {
    fn id(&self) -> &'static str {
        "const_perturb"
    }

    fn description(&self) -> &'static str {
        "perturb a literal constant"
    }

    fn propose(&self, decl: &FunctionDecl) -> Vec<Rewrite> {
        let mut rewrites = Vec::new();
        for_each_expr(decl, &mut |expr| match expr {
            Expr::Int { value, .. } => {
                for delta in [1i64, -1] {
                    if let Some(new_value) = value.checked_add(delta) {
                        rewrites.push(replace(
                            expr,
                            Expr::Int { id: 0, value: new_value },
                            format!("`{}` -> `{}`", value, new_value),
                        ));
                    }
                }
            }
            Expr::Bool { value, .. } => {
                rewrites.push(replace(
                    expr,
                    Expr::Bool { id: 0, value: !value },
                    format!("`{}` -> `{}`", value, !value),
                ));
            }
            Expr::Text { value, .. } => {
                let new_value = if value.is_empty() { "x".to_string() } else { String::new() };
                rewrites.push(replace(
                    expr,
                    Expr::Text { id: 0, value: new_value.clone() },
                    format!("`\"{}\"` -> `\"{}\"`", value, new_value),
                ));
            }
            _ => {}
        });
        rewrites
    }
}

/// Whole-statement deletion.
pub struct StmtDelete;

impl MutationOperator for StmtDelete {
    fn id(&self) -> &'static str {
        "stmt_delete"
    }

    fn description(&self) -> &'static str {
        "delete a statement"
    }

    fn propose(&self, decl: &FunctionDecl) -> Vec<Rewrite> {
        let mut rewrites = Vec::new();
        for_each_stmt(decl, &mut |stmt| {
            let note = match stmt {
                Stmt::Let { name, .. } => format!("delete `let {name} = ...`"),
                Stmt::Assign { name, .. } => format!("delete assignment to `{name}`"),
                Stmt::IndexAssign { target, .. } => format!("delete index assignment to `{target}`"),
                Stmt::If { .. } => "delete if statement".to_string(),
                Stmt::While { .. } => "delete while loop".to_string(),
                Stmt::Return { .. } => "delete return".to_string(),
                Stmt::Throw { .. } => "delete throw".to_string(),
                Stmt::Expr { .. } => "delete expression statement".to_string(),
            };
            rewrites.push(Rewrite::DeleteStmt { node_id: stmt.id(), note });
        });
        rewrites
    }
}

/// Insert `return null;` at the top of a function body.
pub struct EarlyReturn;

impl MutationOperator for EarlyReturn {
    fn id(&self) -> &'static str {
        "early_return"
    }

    fn description(&self) -> &'static str {
        "insert an early return at function entry"
    }

    fn propose(&self, decl: &FunctionDecl) -> Vec<Rewrite> {
        if decl.body.is_empty() {
            return Vec::new();
        }
        // Pointless when the body already opens with a plain return.
        if let Stmt::Return { .. } = decl.body[0] {
            return Vec::new();
        }
        vec![Rewrite::InsertReturnNull {
            function_node: decl.id,
            note: format!("insert `return null;` at entry of `{}`", decl.name),
        }]
    }
}

/// Rename one key of a map literal.
pub struct MapKeyRename;

impl MutationOperator for MapKeyRename {
    fn id(&self) -> &'static str {
        "map_key_rename"
    }

    fn description(&self) -> &'static str {
        "rename a key in a map literal"
    }

    fn propose(&self, decl: &FunctionDecl) -> Vec<Rewrite> {
        let mut rewrites = Vec::new();
        for_each_expr(decl, &mut |expr| {
            if let Expr::Map { entries, .. } = expr {
                for (index, (key, _)) in entries.iter().enumerate() {
                    let renamed = format!("{key}_renamed");
                    if entries.iter().any(|(k, _)| k == &renamed) {
                        continue;
                    }
                    let new_entries: Vec<(String, Expr)> = entries
                        .iter()
                        .enumerate()
                        .map(|(i, (k, v))| {
                            let k = if i == index { renamed.clone() } else { k.clone() };
                            (k, v.clone())
                        })
                        .collect();
                    rewrites.push(replace(
                        expr,
                        Expr::Map { id: 0, entries: new_entries },
                        format!("rename key `{key}` -> `{renamed}`"),
                    ));
                }
            }
        });
        rewrites
    }
}
