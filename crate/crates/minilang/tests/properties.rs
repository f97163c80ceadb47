//! Property tests: print/parse round-trips, deterministic execution, trace
//! well-formedness and step accounting over randomly generated programs.

use indexmap::IndexMap;
use minilang::{
    execute, parse, print_program, BinaryOp, Expr, FunctionDecl, Program, Stmt, UnaryOp, Value,
};
use proptest::prelude::*;

fn leaf_expr(params: Vec<String>) -> BoxedStrategy<Expr> {
    let mut options: Vec<BoxedStrategy<Expr>> = vec![
        (-5i64..5).prop_map(|value| Expr::Int { id: 0, value }).boxed(),
        any::<bool>().prop_map(|value| Expr::Bool { id: 0, value }).boxed(),
        prop::sample::select(vec!["", "x", "key", "boom"])
            .prop_map(|s| Expr::Text { id: 0, value: s.to_string() })
            .boxed(),
        Just(Expr::Null { id: 0 }).boxed(),
    ];
    if !params.is_empty() {
        options.push(
            prop::sample::select(params)
                .prop_map(|name| Expr::Var { id: 0, name })
                .boxed(),
        );
    }
    prop::strategy::Union::new(options).boxed()
}

fn arb_expr(params: Vec<String>) -> BoxedStrategy<Expr> {
    leaf_expr(params.clone())
        .prop_recursive(3, 24, 4, move |inner| {
            let binop = prop::sample::select(vec![
                BinaryOp::Add,
                BinaryOp::Sub,
                BinaryOp::Mul,
                BinaryOp::Div,
                BinaryOp::Mod,
                BinaryOp::Eq,
                BinaryOp::Ne,
                BinaryOp::Lt,
                BinaryOp::Le,
                BinaryOp::Gt,
                BinaryOp::Ge,
                BinaryOp::And,
                BinaryOp::Or,
            ]);
            prop_oneof![
                (binop, inner.clone(), inner.clone()).prop_map(|(op, left, right)| Expr::Binary {
                    id: 0,
                    op,
                    left: Box::new(left),
                    right: Box::new(right),
                }),
                (prop::sample::select(vec![UnaryOp::Not, UnaryOp::Neg]), inner.clone())
                    .prop_map(|(op, operand)| Expr::Unary { id: 0, op, operand: Box::new(operand) }),
                prop::collection::vec(inner.clone(), 0..3)
                    .prop_map(|items| Expr::List { id: 0, items }),
                (inner.clone(), inner.clone()).prop_map(|(target, index)| Expr::Index {
                    id: 0,
                    target: Box::new(target),
                    index: Box::new(index),
                }),
                prop::collection::vec(inner.clone(), 0..3).prop_map(|args| Expr::Call {
                    id: 0,
                    callee: "helper".to_string(),
                    args,
                }),
                inner
                    .clone()
                    .prop_map(|e| Expr::Trap { id: 0, inner: Box::new(e) }),
            ]
        })
        .boxed()
}

fn arb_stmt(params: Vec<String>) -> BoxedStrategy<Stmt> {
    let expr = arb_expr(params.clone());
    let locals = prop::sample::select(vec!["tmp", "acc"]);
    prop_oneof![
        (locals.clone(), expr.clone())
            .prop_map(|(name, value)| Stmt::Let { id: 0, name: name.to_string(), value }),
        expr.clone().prop_map(|value| Stmt::Return { id: 0, value: Some(value) }),
        (expr.clone(), prop::collection::vec(expr.clone().prop_map(|e| Stmt::Expr { id: 0, expr: e }), 0..2))
            .prop_map(|(cond, body)| Stmt::If { id: 0, cond, then_body: body, else_body: vec![] }),
        expr.clone().prop_map(|e| Stmt::Expr { id: 0, expr: e }),
        prop::sample::select(vec!["boom", "oops"]).prop_map(|kind| Stmt::Throw {
            id: 0,
            value: Expr::Text { id: 0, value: kind.to_string() },
        }),
    ]
    .boxed()
}

fn arb_program() -> impl Strategy<Value = Program> {
    let params = vec!["a".to_string(), "b".to_string()];
    (
        prop::collection::vec(arb_stmt(params.clone()), 0..4),
        prop::collection::vec(arb_stmt(params.clone()), 1..3),
    )
        .prop_map(move |(main_body, helper_body)| {
            let mut functions = IndexMap::new();
            functions.insert(
                "entry".to_string(),
                FunctionDecl {
                    id: 0,
                    name: "entry".to_string(),
                    params: params.clone(),
                    body: main_body,
                },
            );
            functions.insert(
                "helper".to_string(),
                FunctionDecl {
                    id: 0,
                    name: "helper".to_string(),
                    params: vec![],
                    body: helper_body,
                },
            );
            // Build a real Program by printing and reparsing; the generated
            // ids above are placeholders.
            let printed = {
                let program = Program::new(functions, String::new(), Vec::new());
                print_program(&program)
            };
            parse(&printed).expect("printer output must parse")
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn print_parse_roundtrip(program in arb_program()) {
        let printed = print_program(&program);
        let reparsed = parse(&printed).expect("printed program must parse");
        prop_assert_eq!(&program, &reparsed);
        // Printing is a fixpoint.
        prop_assert_eq!(printed, print_program(&reparsed));
    }

    #[test]
    fn execution_is_deterministic_and_bounded(program in arb_program(), x in -3i64..3, y in -3i64..3) {
        let test_src = format!("entry({x}, {y});");
        let limit = 2_000u64;
        let first = execute(&[&program], &test_src, limit);
        let second = execute(&[&program], &test_src, limit);
        prop_assert_eq!(&first, &second);
        prop_assert!(first.steps_used <= limit);
        prop_assert!(first.trace.is_well_formed(), "trace: {}", first.trace.render());
        // Helper arity errors, type errors etc. are all legal outcomes; the
        // status space is closed.
        match first.status {
            minilang::OutcomeStatus::Pass
            | minilang::OutcomeStatus::Fail
            | minilang::OutcomeStatus::Error { .. } => {}
        }
    }

    #[test]
    fn trap_asserts_do_not_break_traces(program in arb_program(), x in -3i64..3) {
        let test_src = format!("let k = trap(entry({x}, 0));\nassert_true(k == null || k != null);");
        let outcome = execute(&[&program], &test_src, 2_000);
        prop_assert!(outcome.trace.is_well_formed(), "trace: {}", outcome.trace.render());
    }

    #[test]
    fn observed_outputs_never_panics(program in arb_program(), x in -3i64..3) {
        let inputs = vec![vec![Value::Int(x), Value::Null], vec![Value::Bool(true), Value::Int(0)]];
        let obs = minilang::observed_outputs(&[&program], "entry", &inputs, 2_000).unwrap();
        prop_assert_eq!(obs.len(), 2);
    }
}
