//! Recursive-descent parser. Produces a [`Program`] (or a test script, which
//! is a bare statement list) with dense node ids and a span table back into
//! the source text.

use indexmap::IndexMap;
use thiserror::Error;

use crate::ast::{BinaryOp, Expr, FunctionDecl, NodeId, Program, Span, Stmt, UnaryOp};
use crate::lexer::{tokenize, Token, TokenKind};

/// Names reserved for interpreter intrinsics; programs may not declare them.
pub const INTRINSIC_NAMES: &[&str] =
    &["assert_eq", "assert_true", "trap", "calls", "len", "keys", "str"];

const MAX_NESTING: u32 = 200;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("syntax error at {line}:{col}: {message}")]
pub struct SyntaxError {
    pub line: u32,
    pub col: u32,
    pub message: String,
}

/// A parsed test script: a statement list with its own span table.
#[derive(Debug, Clone)]
pub struct Script {
    pub stmts: Vec<Stmt>,
    pub source_text: String,
    spans: Vec<Span>,
}

impl Script {
    pub fn node_count(&self) -> usize {
        self.spans.len()
    }

    pub fn node_text(&self, id: NodeId) -> Option<&str> {
        let span = self.spans.get(id as usize)?;
        self.source_text.get(span.start..span.end)
    }
}

pub fn parse(source: &str) -> Result<Program, SyntaxError> {
    let tokens = tokenize(source)?;
    let mut parser = Parser::new(source, tokens);
    let mut functions: IndexMap<String, FunctionDecl> = IndexMap::new();
    while !parser.at(&TokenKind::Eof) {
        let decl = parser.function_decl()?;
        if functions.contains_key(&decl.name) {
            return Err(parser.error_at_prev(format!("function `{}` already defined", decl.name)));
        }
        functions.insert(decl.name.clone(), decl);
    }
    Ok(Program::new(functions, source.to_string(), parser.spans))
}

/// Parse a test script: top-level statements executed against a program's
/// function table.
pub fn parse_test_statements(source: &str) -> Result<Script, SyntaxError> {
    let tokens = tokenize(source)?;
    let mut parser = Parser::new(source, tokens);
    let mut stmts = Vec::new();
    while !parser.at(&TokenKind::Eof) {
        stmts.push(parser.statement()?);
    }
    Ok(Script { stmts, source_text: source.to_string(), spans: parser.spans })
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    spans: Vec<Span>,
    depth: u32,
}

impl Parser {
    fn new(_source: &str, tokens: Vec<Token>) -> Self {
        Parser { tokens, pos: 0, spans: Vec::new(), depth: 0 }
    }

    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek2(&self) -> &Token {
        &self.tokens[(self.pos + 1).min(self.tokens.len() - 1)]
    }

    fn at(&self, kind: &TokenKind) -> bool {
        &self.peek().kind == kind
    }

    fn bump(&mut self) -> Token {
        let tok = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        tok
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.at(kind) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, kind: TokenKind) -> Result<Token, SyntaxError> {
        if self.at(&kind) {
            Ok(self.bump())
        } else {
            let found = self.peek();
            Err(SyntaxError {
                line: found.line,
                col: found.col,
                message: format!("expected {}, found {}", kind.describe(), found.kind.describe()),
            })
        }
    }

    fn expect_ident(&mut self) -> Result<String, SyntaxError> {
        match &self.peek().kind {
            TokenKind::Ident(name) => {
                let name = name.clone();
                self.bump();
                Ok(name)
            }
            other => {
                let found = self.peek();
                Err(SyntaxError {
                    line: found.line,
                    col: found.col,
                    message: format!("expected identifier, found {}", other.describe()),
                })
            }
        }
    }

    fn error_here(&self, message: String) -> SyntaxError {
        let tok = self.peek();
        SyntaxError { line: tok.line, col: tok.col, message }
    }

    fn error_at_prev(&self, message: String) -> SyntaxError {
        let tok = &self.tokens[self.pos.saturating_sub(1)];
        SyntaxError { line: tok.line, col: tok.col, message }
    }

    fn reserve(&mut self, start: usize) -> NodeId {
        let id = self.spans.len() as NodeId;
        self.spans.push(Span { start, end: start });
        id
    }

    fn finish(&mut self, id: NodeId, end: usize) {
        self.spans[id as usize].end = end;
    }

    fn prev_end(&self) -> usize {
        self.tokens[self.pos.saturating_sub(1)].end
    }

    fn function_decl(&mut self) -> Result<FunctionDecl, SyntaxError> {
        let start = self.peek().offset;
        self.expect(TokenKind::KwFn)?;
        let id = self.reserve(start);
        let name = self.expect_ident()?;
        if INTRINSIC_NAMES.contains(&name.as_str()) {
            return Err(self.error_at_prev(format!("`{name}` is a reserved intrinsic name")));
        }
        self.expect(TokenKind::LParen)?;
        let mut params = Vec::new();
        if !self.at(&TokenKind::RParen) {
            loop {
                let param = self.expect_ident()?;
                if params.contains(&param) {
                    return Err(self.error_at_prev(format!("duplicate parameter `{param}`")));
                }
                params.push(param);
                if !self.eat(&TokenKind::Comma) {
                    break;
                }
            }
        }
        self.expect(TokenKind::RParen)?;
        let body = self.block()?;
        self.finish(id, self.prev_end());
        Ok(FunctionDecl { id, name, params, body })
    }

    fn block(&mut self) -> Result<Vec<Stmt>, SyntaxError> {
        self.expect(TokenKind::LBrace)?;
        let mut stmts = Vec::new();
        while !self.at(&TokenKind::RBrace) {
            if self.at(&TokenKind::Eof) {
                return Err(self.error_here("expected `}`, found end of input".to_string()));
            }
            stmts.push(self.statement()?);
        }
        self.expect(TokenKind::RBrace)?;
        Ok(stmts)
    }

    fn statement(&mut self) -> Result<Stmt, SyntaxError> {
        self.depth += 1;
        if self.depth > MAX_NESTING {
            return Err(self.error_here("nesting too deep".to_string()));
        }
        let result = self.statement_inner();
        self.depth -= 1;
        result
    }

    fn statement_inner(&mut self) -> Result<Stmt, SyntaxError> {
        let start = self.peek().offset;
        match self.peek().kind.clone() {
            TokenKind::KwLet => {
                let id = self.reserve(start);
                self.bump();
                let name = self.expect_ident()?;
                self.expect(TokenKind::Assign)?;
                let value = self.expression()?;
                self.expect(TokenKind::Semi)?;
                self.finish(id, self.prev_end());
                Ok(Stmt::Let { id, name, value })
            }
            TokenKind::KwIf => {
                let id = self.reserve(start);
                self.bump();
                self.expect(TokenKind::LParen)?;
                let cond = self.expression()?;
                self.expect(TokenKind::RParen)?;
                let then_body = self.block()?;
                let else_body = if self.eat(&TokenKind::KwElse) {
                    if self.at(&TokenKind::KwIf) {
                        vec![self.statement()?]
                    } else {
                        self.block()?
                    }
                } else {
                    Vec::new()
                };
                self.finish(id, self.prev_end());
                Ok(Stmt::If { id, cond, then_body, else_body })
            }
            TokenKind::KwWhile => {
                let id = self.reserve(start);
                self.bump();
                self.expect(TokenKind::LParen)?;
                let cond = self.expression()?;
                self.expect(TokenKind::RParen)?;
                let body = self.block()?;
                self.finish(id, self.prev_end());
                Ok(Stmt::While { id, cond, body })
            }
            TokenKind::KwReturn => {
                let id = self.reserve(start);
                self.bump();
                let value =
                    if self.at(&TokenKind::Semi) { None } else { Some(self.expression()?) };
                self.expect(TokenKind::Semi)?;
                self.finish(id, self.prev_end());
                Ok(Stmt::Return { id, value })
            }
            TokenKind::KwThrow => {
                let id = self.reserve(start);
                self.bump();
                let value = self.expression()?;
                self.expect(TokenKind::Semi)?;
                self.finish(id, self.prev_end());
                Ok(Stmt::Throw { id, value })
            }
            TokenKind::Ident(name) if self.peek2().kind == TokenKind::Assign => {
                let id = self.reserve(start);
                self.bump();
                self.bump();
                let value = self.expression()?;
                self.expect(TokenKind::Semi)?;
                self.finish(id, self.prev_end());
                Ok(Stmt::Assign { id, name, value })
            }
            // A statement opening with `name[` is always an index assignment.
            TokenKind::Ident(name) if self.peek2().kind == TokenKind::LBracket => {
                let id = self.reserve(start);
                self.bump();
                self.bump();
                let index = self.expression()?;
                self.expect(TokenKind::RBracket)?;
                self.expect(TokenKind::Assign)?;
                let value = self.expression()?;
                self.expect(TokenKind::Semi)?;
                self.finish(id, self.prev_end());
                Ok(Stmt::IndexAssign { id, target: name, index, value })
            }
            TokenKind::Ident(_) | TokenKind::Int(_) | TokenKind::Text(_) | TokenKind::KwTrue
            | TokenKind::KwFalse | TokenKind::KwNull | TokenKind::LParen | TokenKind::LBracket
            | TokenKind::Bang | TokenKind::Minus => {
                let id = self.reserve(start);
                let expr = self.expression()?;
                self.expect(TokenKind::Semi)?;
                self.finish(id, self.prev_end());
                Ok(Stmt::Expr { id, expr })
            }
            other => Err(self.error_here(format!("expected statement, found {}", other.describe()))),
        }
    }

    fn expression(&mut self) -> Result<Expr, SyntaxError> {
        self.depth += 1;
        if self.depth > MAX_NESTING {
            return Err(self.error_here("nesting too deep".to_string()));
        }
        let result = self.binary_level(0);
        self.depth -= 1;
        result
    }

    /// Precedence levels, loosest first.
    fn binary_level(&mut self, level: u8) -> Result<Expr, SyntaxError> {
        const LEVELS: &[&[(TokenKind, BinaryOp)]] = &[
            &[(TokenKind::OrOr, BinaryOp::Or)],
            &[(TokenKind::AndAnd, BinaryOp::And)],
            &[(TokenKind::EqEq, BinaryOp::Eq), (TokenKind::NotEq, BinaryOp::Ne)],
            &[
                (TokenKind::Lt, BinaryOp::Lt),
                (TokenKind::Le, BinaryOp::Le),
                (TokenKind::Gt, BinaryOp::Gt),
                (TokenKind::Ge, BinaryOp::Ge),
            ],
            &[(TokenKind::Plus, BinaryOp::Add), (TokenKind::Minus, BinaryOp::Sub)],
            &[
                (TokenKind::Star, BinaryOp::Mul),
                (TokenKind::Slash, BinaryOp::Div),
                (TokenKind::Percent, BinaryOp::Mod),
            ],
        ];
        if level as usize >= LEVELS.len() {
            return self.unary();
        }
        let start = self.peek().offset;
        let mut left = self.binary_level(level + 1)?;
        loop {
            let op = LEVELS[level as usize]
                .iter()
                .find(|(kind, _)| self.at(kind))
                .map(|(_, op)| *op);
            let Some(op) = op else { break };
            self.bump();
            let id = self.reserve(start);
            let right = self.binary_level(level + 1)?;
            self.finish(id, self.prev_end());
            left = Expr::Binary { id, op, left: Box::new(left), right: Box::new(right) };
        }
        Ok(left)
    }

    fn unary(&mut self) -> Result<Expr, SyntaxError> {
        let start = self.peek().offset;
        let op = match self.peek().kind {
            TokenKind::Bang => Some(UnaryOp::Not),
            TokenKind::Minus => Some(UnaryOp::Neg),
            _ => None,
        };
        if let Some(op) = op {
            let id = self.reserve(start);
            self.bump();
            let operand = self.unary()?;
            self.finish(id, self.prev_end());
            return Ok(Expr::Unary { id, op, operand: Box::new(operand) });
        }
        self.postfix()
    }

    fn postfix(&mut self) -> Result<Expr, SyntaxError> {
        let start = self.peek().offset;
        let mut expr = self.primary()?;
        while self.at(&TokenKind::LBracket) {
            self.bump();
            let id = self.reserve(start);
            let index = self.expression()?;
            self.expect(TokenKind::RBracket)?;
            self.finish(id, self.prev_end());
            expr = Expr::Index { id, target: Box::new(expr), index: Box::new(index) };
        }
        Ok(expr)
    }

    fn primary(&mut self) -> Result<Expr, SyntaxError> {
        let start = self.peek().offset;
        match self.peek().kind.clone() {
            TokenKind::Int(value) => {
                let id = self.reserve(start);
                self.bump();
                self.finish(id, self.prev_end());
                Ok(Expr::Int { id, value })
            }
            TokenKind::Text(value) => {
                let id = self.reserve(start);
                self.bump();
                self.finish(id, self.prev_end());
                Ok(Expr::Text { id, value })
            }
            TokenKind::KwTrue => {
                let id = self.reserve(start);
                self.bump();
                self.finish(id, self.prev_end());
                Ok(Expr::Bool { id, value: true })
            }
            TokenKind::KwFalse => {
                let id = self.reserve(start);
                self.bump();
                self.finish(id, self.prev_end());
                Ok(Expr::Bool { id, value: false })
            }
            TokenKind::KwNull => {
                let id = self.reserve(start);
                self.bump();
                self.finish(id, self.prev_end());
                Ok(Expr::Null { id })
            }
            TokenKind::Ident(name) => {
                if self.peek2().kind == TokenKind::LParen {
                    self.call(start, name)
                } else {
                    let id = self.reserve(start);
                    self.bump();
                    self.finish(id, self.prev_end());
                    Ok(Expr::Var { id, name })
                }
            }
            TokenKind::LParen => {
                self.bump();
                let expr = self.expression()?;
                self.expect(TokenKind::RParen)?;
                Ok(expr)
            }
            TokenKind::LBracket => {
                let id = self.reserve(start);
                self.bump();
                let mut items = Vec::new();
                if !self.at(&TokenKind::RBracket) {
                    loop {
                        items.push(self.expression()?);
                        if !self.eat(&TokenKind::Comma) {
                            break;
                        }
                    }
                }
                self.expect(TokenKind::RBracket)?;
                self.finish(id, self.prev_end());
                Ok(Expr::List { id, items })
            }
            TokenKind::LBrace => {
                let id = self.reserve(start);
                self.bump();
                let mut entries: Vec<(String, Expr)> = Vec::new();
                if !self.at(&TokenKind::RBrace) {
                    loop {
                        let key = match self.peek().kind.clone() {
                            TokenKind::Text(key) => {
                                self.bump();
                                key
                            }
                            other => {
                                return Err(self.error_here(format!(
                                    "expected string map key, found {}",
                                    other.describe()
                                )))
                            }
                        };
                        if entries.iter().any(|(k, _)| k == &key) {
                            return Err(
                                self.error_at_prev(format!("duplicate map key `{key}`"))
                            );
                        }
                        self.expect(TokenKind::Colon)?;
                        let value = self.expression()?;
                        entries.push((key, value));
                        if !self.eat(&TokenKind::Comma) {
                            break;
                        }
                    }
                }
                self.expect(TokenKind::RBrace)?;
                self.finish(id, self.prev_end());
                Ok(Expr::Map { id, entries })
            }
            other => Err(self.error_here(format!("expected expression, found {}", other.describe()))),
        }
    }

    fn call(&mut self, start: usize, name: String) -> Result<Expr, SyntaxError> {
        let id = self.reserve(start);
        self.bump(); // ident
        self.bump(); // (
        let mut args = Vec::new();
        if !self.at(&TokenKind::RParen) {
            loop {
                args.push(self.expression()?);
                if !self.eat(&TokenKind::Comma) {
                    break;
                }
            }
        }
        self.expect(TokenKind::RParen)?;
        self.finish(id, self.prev_end());

        // `trap` and `calls` are special forms: `trap` controls evaluation of
        // its argument, `calls` takes a literal function name.
        match name.as_str() {
            "trap" => {
                if args.len() != 1 {
                    return Err(self.error_at_prev("trap expects exactly 1 argument".to_string()));
                }
                Ok(Expr::Trap { id, inner: Box::new(args.into_iter().next().unwrap()) })
            }
            "calls" => {
                if args.len() != 2 {
                    return Err(
                        self.error_at_prev("calls expects exactly 2 arguments".to_string())
                    );
                }
                let mut it = args.into_iter();
                let inner = it.next().unwrap();
                let target = match it.next().unwrap() {
                    Expr::Text { value, .. } => value,
                    _ => {
                        return Err(self.error_at_prev(
                            "second argument of calls must be a string literal".to_string(),
                        ))
                    }
                };
                Ok(Expr::CallCount { id, inner: Box::new(inner), name: target })
            }
            _ => Ok(Expr::Call { id, callee: name, args }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_simple_function() {
        let program = parse("fn f(x){ return x + 1; }").unwrap();
        assert_eq!(program.functions.len(), 1);
        let f = &program.functions["f"];
        assert_eq!(f.params, vec!["x".to_string()]);
        assert_eq!(f.body.len(), 1);
    }

    #[test]
    fn empty_source_is_empty_program() {
        let program = parse("").unwrap();
        assert_eq!(program.functions.len(), 0);
        assert_eq!(program.node_count(), 0);
    }

    #[test]
    fn malformed_input_reports_location() {
        let err = parse("fn f( { }").unwrap_err();
        assert_eq!(err.line, 1);
        assert!(err.message.contains("{"), "message was: {}", err.message);
    }

    #[test]
    fn node_ids_are_dense() {
        let program = parse("fn f(x){ if (x < 2) { return x; } return f(x - 1) + f(x - 2); }").unwrap();
        let count = program.node_count();
        assert!(count > 5);
        for id in 0..count as NodeId {
            let span = program.span(id).unwrap();
            assert!(span.end >= span.start);
        }
    }

    #[test]
    fn node_text_recovers_source() {
        let src = "fn f(x){ return x + 1; }";
        let program = parse(src).unwrap();
        let f = &program.functions["f"];
        let Stmt::Return { value: Some(expr), .. } = &f.body[0] else { panic!() };
        assert_eq!(program.node_text(expr.id()).unwrap(), "x + 1");
    }

    #[test]
    fn rejects_duplicate_function() {
        assert!(parse("fn f(){} fn f(){}").is_err());
    }

    #[test]
    fn rejects_reserved_names() {
        assert!(parse("fn trap(x){ return x; }").is_err());
    }

    #[test]
    fn test_script_parses_assertions() {
        let script = parse_test_statements("assert_eq(f(1), 2);\nassert_true(g());").unwrap();
        assert_eq!(script.stmts.len(), 2);
    }

    #[test]
    fn calls_requires_literal_name() {
        assert!(parse_test_statements("assert_eq(calls(f(1), g), 2);").is_err());
        assert!(parse_test_statements("assert_eq(calls(f(1), \"g\"), 2);").is_ok());
    }

    #[test]
    fn index_assignment_statement() {
        let program = parse("fn f(){ let m = {\"a\": 1}; m[\"a\"] = 2; return m; }").unwrap();
        let f = &program.functions["f"];
        assert!(matches!(f.body[1], Stmt::IndexAssign { .. }));
    }
}
