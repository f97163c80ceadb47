//! Structural edit counting between two program sets, used to enforce the
//! single-edit property of mutants. An "edit site" is the shallowest node at
//! which the trees disagree; disagreements below a counted site do not count
//! again.

use minilang::ast::{exprs_struct_eq, stmts_struct_eq};
use minilang::{Expr, Stmt};

use crate::corpus::ProgramSet;

pub fn edit_site_count(a: &ProgramSet, b: &ProgramSet) -> usize {
    let mut count = 0;
    let mut files: Vec<&String> = a.files.keys().chain(b.files.keys()).collect();
    files.sort();
    files.dedup();
    for file in files {
        match (a.files.get(file), b.files.get(file)) {
            (Some(pa), Some(pb)) => {
                let mut names: Vec<&String> =
                    pa.functions.keys().chain(pb.functions.keys()).collect();
                names.sort();
                names.dedup();
                for name in names {
                    match (pa.functions.get(name), pb.functions.get(name)) {
                        (Some(fa), Some(fb)) => {
                            if fa.params != fb.params {
                                count += 1;
                            } else {
                                count += stmt_list_edits(&fa.body, &fb.body);
                            }
                        }
                        _ => count += 1,
                    }
                }
            }
            _ => count += 1,
        }
    }
    count
}

fn stmt_list_edits(a: &[Stmt], b: &[Stmt]) -> usize {
    if a.len() == b.len() {
        return a.iter().zip(b).map(|(x, y)| stmt_edits(x, y)).sum();
    }
    // Off-by-one lengths: a single insertion or deletion counts as one site
    // when the remainder aligns exactly.
    let (longer, shorter) = if a.len() > b.len() { (a, b) } else { (b, a) };
    if longer.len() == shorter.len() + 1 {
        for skip in 0..longer.len() {
            let aligned = longer
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != skip)
                .map(|(_, s)| s)
                .zip(shorter)
                .all(|(x, y)| stmts_struct_eq(x, y));
            if aligned {
                return 1;
            }
        }
    }
    2
}

fn stmt_edits(a: &Stmt, b: &Stmt) -> usize {
    if stmts_struct_eq(a, b) {
        return 0;
    }
    match (a, b) {
        (Stmt::Let { name: na, value: va, .. }, Stmt::Let { name: nb, value: vb, .. })
        | (Stmt::Assign { name: na, value: va, .. }, Stmt::Assign { name: nb, value: vb, .. }) => {
            if na != nb {
                1
            } else {
                expr_edits(va, vb)
            }
        }
        (
            Stmt::IndexAssign { target: ta, index: ia, value: va, .. },
            Stmt::IndexAssign { target: tb, index: ib, value: vb, .. },
        ) => {
            if ta != tb {
                1
            } else {
                expr_edits(ia, ib) + expr_edits(va, vb)
            }
        }
        (
            Stmt::If { cond: ca, then_body: ta, else_body: ea, .. },
            Stmt::If { cond: cb, then_body: tb, else_body: eb, .. },
        ) => expr_edits(ca, cb) + stmt_list_edits(ta, tb) + stmt_list_edits(ea, eb),
        (Stmt::While { cond: ca, body: ba, .. }, Stmt::While { cond: cb, body: bb, .. }) => {
            expr_edits(ca, cb) + stmt_list_edits(ba, bb)
        }
        (Stmt::Return { value: va, .. }, Stmt::Return { value: vb, .. }) => match (va, vb) {
            (Some(x), Some(y)) => expr_edits(x, y),
            (None, None) => 0,
            _ => 1,
        },
        (Stmt::Throw { value: va, .. }, Stmt::Throw { value: vb, .. }) => expr_edits(va, vb),
        (Stmt::Expr { expr: ea, .. }, Stmt::Expr { expr: eb, .. }) => expr_edits(ea, eb),
        _ => 1,
    }
}

fn expr_edits(a: &Expr, b: &Expr) -> usize {
    if exprs_struct_eq(a, b) {
        return 0;
    }
    match (a, b) {
        (
            Expr::Binary { op: oa, left: la, right: ra, .. },
            Expr::Binary { op: ob, left: lb, right: rb, .. },
        ) => {
            if oa != ob {
                // Operator change at this node is the site; operand changes
                // underneath would be extra sites.
                1 + expr_edits(la, lb) + expr_edits(ra, rb)
            } else {
                expr_edits(la, lb) + expr_edits(ra, rb)
            }
        }
        (Expr::Unary { op: oa, operand: xa, .. }, Expr::Unary { op: ob, operand: xb, .. }) => {
            if oa != ob {
                1
            } else {
                expr_edits(xa, xb)
            }
        }
        (Expr::List { items: xa, .. }, Expr::List { items: xb, .. }) if xa.len() == xb.len() => {
            xa.iter().zip(xb).map(|(x, y)| expr_edits(x, y)).sum()
        }
        (Expr::Map { entries: ea, .. }, Expr::Map { entries: eb, .. }) if ea.len() == eb.len() => {
            ea.iter()
                .zip(eb)
                .map(|((ka, va), (kb, vb))| if ka != kb { 1 } else { expr_edits(va, vb) })
                .sum()
        }
        (Expr::Call { callee: ca, args: aa, .. }, Expr::Call { callee: cb, args: ab, .. })
            if ca == cb && aa.len() == ab.len() =>
        {
            aa.iter().zip(ab).map(|(x, y)| expr_edits(x, y)).sum()
        }
        (Expr::Index { target: ta, index: ia, .. }, Expr::Index { target: tb, index: ib, .. }) => {
            expr_edits(ta, tb) + expr_edits(ia, ib)
        }
        (Expr::Trap { inner: xa, .. }, Expr::Trap { inner: xb, .. }) => expr_edits(xa, xb),
        _ => 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use minilang::parse;

    fn set(src: &str) -> ProgramSet {
        let mut s = ProgramSet::new();
        s.files.insert("m.ml0".to_string(), parse(src).unwrap());
        s
    }

    #[test]
    fn identical_sets_have_zero_edits() {
        let a = set("fn f(x){ return x + 1; }");
        assert_eq!(edit_site_count(&a, &a.clone()), 0);
    }

    #[test]
    fn operator_swap_is_one_edit() {
        let a = set("fn f(x){ return x + 1; }");
        let b = set("fn f(x){ return x - 1; }");
        assert_eq!(edit_site_count(&a, &b), 1);
    }

    #[test]
    fn two_changes_are_two_edits() {
        let a = set("fn f(x){ return x + 1; }\nfn g(){ return true; }");
        let b = set("fn f(x){ return x - 1; }\nfn g(){ return false; }");
        assert_eq!(edit_site_count(&a, &b), 2);
    }

    #[test]
    fn statement_insertion_is_one_edit() {
        let a = set("fn f(x){ let y = 1; return x; }");
        let b = set("fn f(x){ let y = 1; let z = 2; return x; }");
        assert_eq!(edit_site_count(&a, &b), 1);
    }
}
