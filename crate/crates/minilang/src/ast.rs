//! Syntax tree types. Every node carries a dense, program-unique id so that
//! mutation tooling can address individual nodes, and a span into the source
//! text so evidence excerpts can quote the original expression.

use indexmap::IndexMap;

pub type NodeId = u32;

/// Byte range into the source text a node was parsed from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone)]
pub struct Program {
    /// Functions in declaration order, keyed by name.
    pub functions: IndexMap<String, FunctionDecl>,
    pub source_text: String,
    spans: Vec<Span>,
}

impl Program {
    pub fn new(functions: IndexMap<String, FunctionDecl>, source_text: String, spans: Vec<Span>) -> Self {
        Program { functions, source_text, spans }
    }

    /// Number of AST nodes; node ids are dense in `0..node_count()`.
    pub fn node_count(&self) -> usize {
        self.spans.len()
    }

    pub fn span(&self, id: NodeId) -> Option<Span> {
        self.spans.get(id as usize).copied()
    }

    /// Source text of the node, as written.
    pub fn node_text(&self, id: NodeId) -> Option<&str> {
        let span = self.span(id)?;
        self.source_text.get(span.start..span.end)
    }
}

/// Structural comparison: same functions in the same order with the same
/// node ids. Source text and spans are formatting detail and do not count.
impl PartialEq for Program {
    fn eq(&self, other: &Self) -> bool {
        self.functions.len() == other.functions.len()
            && self
                .functions
                .iter()
                .zip(other.functions.iter())
                .all(|((an, af), (bn, bf))| an == bn && af == bf)
    }
}

impl Eq for Program {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionDecl {
    pub id: NodeId,
    pub name: String,
    pub params: Vec<String>,
    pub body: Vec<Stmt>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stmt {
    Let { id: NodeId, name: String, value: Expr },
    Assign { id: NodeId, name: String, value: Expr },
    IndexAssign { id: NodeId, target: String, index: Expr, value: Expr },
    If { id: NodeId, cond: Expr, then_body: Vec<Stmt>, else_body: Vec<Stmt> },
    While { id: NodeId, cond: Expr, body: Vec<Stmt> },
    Return { id: NodeId, value: Option<Expr> },
    Throw { id: NodeId, value: Expr },
    Expr { id: NodeId, expr: Expr },
}

impl Stmt {
    pub fn id(&self) -> NodeId {
        match self {
            Stmt::Let { id, .. }
            | Stmt::Assign { id, .. }
            | Stmt::IndexAssign { id, .. }
            | Stmt::If { id, .. }
            | Stmt::While { id, .. }
            | Stmt::Return { id, .. }
            | Stmt::Throw { id, .. }
            | Stmt::Expr { id, .. } => *id,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Not,
    Neg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

impl BinaryOp {
    pub fn symbol(&self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Mod => "%",
            BinaryOp::Eq => "==",
            BinaryOp::Ne => "!=",
            BinaryOp::Lt => "<",
            BinaryOp::Le => "<=",
            BinaryOp::Gt => ">",
            BinaryOp::Ge => ">=",
            BinaryOp::And => "&&",
            BinaryOp::Or => "||",
        }
    }

    pub fn is_comparison(&self) -> bool {
        matches!(
            self,
            BinaryOp::Eq | BinaryOp::Ne | BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge
        )
    }

    pub fn is_arithmetic(&self) -> bool {
        matches!(
            self,
            BinaryOp::Add | BinaryOp::Sub | BinaryOp::Mul | BinaryOp::Div | BinaryOp::Mod
        )
    }

    pub fn is_logical(&self) -> bool {
        matches!(self, BinaryOp::And | BinaryOp::Or)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Int { id: NodeId, value: i64 },
    Bool { id: NodeId, value: bool },
    Text { id: NodeId, value: String },
    Null { id: NodeId },
    Var { id: NodeId, name: String },
    List { id: NodeId, items: Vec<Expr> },
    Map { id: NodeId, entries: Vec<(String, Expr)> },
    Unary { id: NodeId, op: UnaryOp, operand: Box<Expr> },
    Binary { id: NodeId, op: BinaryOp, left: Box<Expr>, right: Box<Expr> },
    Call { id: NodeId, callee: String, args: Vec<Expr> },
    Index { id: NodeId, target: Box<Expr>, index: Box<Expr> },
    /// `trap(e)` evaluates `e`, converting a raised exception into its kind
    /// text and a normal completion into null.
    Trap { id: NodeId, inner: Box<Expr> },
    /// `calls(e, "f")` evaluates `e` and yields how many calls to `f`
    /// happened while doing so.
    CallCount { id: NodeId, inner: Box<Expr>, name: String },
}

impl Expr {
    pub fn id(&self) -> NodeId {
        match self {
            Expr::Int { id, .. }
            | Expr::Bool { id, .. }
            | Expr::Text { id, .. }
            | Expr::Null { id }
            | Expr::Var { id, .. }
            | Expr::List { id, .. }
            | Expr::Map { id, .. }
            | Expr::Unary { id, .. }
            | Expr::Binary { id, .. }
            | Expr::Call { id, .. }
            | Expr::Index { id, .. }
            | Expr::Trap { id, .. }
            | Expr::CallCount { id, .. } => *id,
        }
    }
}

/// Structural equality that ignores node ids. Used to compare trees whose
/// ids were assigned by different parses (for example a mutant against its
/// base program).
pub fn exprs_struct_eq(a: &Expr, b: &Expr) -> bool {
    use Expr::*;
    match (a, b) {
        (Int { value: x, .. }, Int { value: y, .. }) => x == y,
        (Bool { value: x, .. }, Bool { value: y, .. }) => x == y,
        (Text { value: x, .. }, Text { value: y, .. }) => x == y,
        (Null { .. }, Null { .. }) => true,
        (Var { name: x, .. }, Var { name: y, .. }) => x == y,
        (List { items: x, .. }, List { items: y, .. }) => {
            x.len() == y.len() && x.iter().zip(y).all(|(a, b)| exprs_struct_eq(a, b))
        }
        (Map { entries: x, .. }, Map { entries: y, .. }) => {
            x.len() == y.len()
                && x.iter()
                    .zip(y)
                    .all(|((ka, va), (kb, vb))| ka == kb && exprs_struct_eq(va, vb))
        }
        (Unary { op: oa, operand: xa, .. }, Unary { op: ob, operand: xb, .. }) => {
            oa == ob && exprs_struct_eq(xa, xb)
        }
        (
            Binary { op: oa, left: la, right: ra, .. },
            Binary { op: ob, left: lb, right: rb, .. },
        ) => oa == ob && exprs_struct_eq(la, lb) && exprs_struct_eq(ra, rb),
        (Call { callee: ca, args: aa, .. }, Call { callee: cb, args: ab, .. }) => {
            ca == cb && aa.len() == ab.len() && aa.iter().zip(ab).all(|(a, b)| exprs_struct_eq(a, b))
        }
        (Index { target: ta, index: ia, .. }, Index { target: tb, index: ib, .. }) => {
            exprs_struct_eq(ta, tb) && exprs_struct_eq(ia, ib)
        }
        (Trap { inner: xa, .. }, Trap { inner: xb, .. }) => exprs_struct_eq(xa, xb),
        (
            CallCount { inner: xa, name: na, .. },
            CallCount { inner: xb, name: nb, .. },
        ) => na == nb && exprs_struct_eq(xa, xb),
        _ => false,
    }
}

pub fn stmts_struct_eq(a: &Stmt, b: &Stmt) -> bool {
    use Stmt::*;
    match (a, b) {
        (Let { name: na, value: va, .. }, Let { name: nb, value: vb, .. }) => {
            na == nb && exprs_struct_eq(va, vb)
        }
        (Assign { name: na, value: va, .. }, Assign { name: nb, value: vb, .. }) => {
            na == nb && exprs_struct_eq(va, vb)
        }
        (
            IndexAssign { target: ta, index: ia, value: va, .. },
            IndexAssign { target: tb, index: ib, value: vb, .. },
        ) => ta == tb && exprs_struct_eq(ia, ib) && exprs_struct_eq(va, vb),
        (
            If { cond: ca, then_body: ta, else_body: ea, .. },
            If { cond: cb, then_body: tb, else_body: eb, .. },
        ) => {
            exprs_struct_eq(ca, cb)
                && stmt_lists_struct_eq(ta, tb)
                && stmt_lists_struct_eq(ea, eb)
        }
        (While { cond: ca, body: ba, .. }, While { cond: cb, body: bb, .. }) => {
            exprs_struct_eq(ca, cb) && stmt_lists_struct_eq(ba, bb)
        }
        (Return { value: va, .. }, Return { value: vb, .. }) => match (va, vb) {
            (None, None) => true,
            (Some(a), Some(b)) => exprs_struct_eq(a, b),
            _ => false,
        },
        (Throw { value: va, .. }, Throw { value: vb, .. }) => exprs_struct_eq(va, vb),
        (Expr { expr: ea, .. }, Expr { expr: eb, .. }) => exprs_struct_eq(ea, eb),
        _ => false,
    }
}

pub fn stmt_lists_struct_eq(a: &[Stmt], b: &[Stmt]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| stmts_struct_eq(x, y))
}

pub fn functions_struct_eq(a: &FunctionDecl, b: &FunctionDecl) -> bool {
    a.name == b.name && a.params == b.params && stmt_lists_struct_eq(&a.body, &b.body)
}
