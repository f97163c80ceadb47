//! Input seed derivation: a small fixed scalar grid plus constants harvested
//! from the program text, expanded into argument tuples per entry arity.

use minilang::{Expr, Value};

use crate::corpus::ProgramSet;
use crate::mutation::rewrite::for_each_expr;

const HARVEST_INT_CAP: usize = 6;
const HARVEST_TEXT_CAP: usize = 4;

/// Fixed grid {-1, 0, 1, 2}, booleans, empty/one-element containers, plus
/// integer and text constants harvested from the programs.
pub fn derive_seed_pool(programs: &ProgramSet) -> Vec<Value> {
    let mut ints: Vec<i64> = vec![-1, 0, 1, 2];
    let mut texts: Vec<String> = vec![String::new(), "x".to_string()];

    let mut harvested_ints = Vec::new();
    let mut harvested_texts = Vec::new();
    for program in programs.files.values() {
        for decl in program.functions.values() {
            for_each_expr(decl, &mut |expr| match expr {
                Expr::Int { value, .. } => harvested_ints.push(*value),
                Expr::Text { value, .. } => harvested_texts.push(value.clone()),
                _ => {}
            });
        }
    }
    harvested_ints.sort_unstable();
    harvested_ints.dedup();
    harvested_texts.sort();
    harvested_texts.dedup();

    for value in harvested_ints.into_iter().take(HARVEST_INT_CAP) {
        if !ints.contains(&value) {
            ints.push(value);
        }
        // Boundary neighbors catch off-by-one mutants.
        for neighbor in [value - 1, value + 1] {
            if ints.len() < 4 + HARVEST_INT_CAP * 3 && !ints.contains(&neighbor) {
                ints.push(neighbor);
            }
        }
    }
    for value in harvested_texts.into_iter().take(HARVEST_TEXT_CAP) {
        if !texts.contains(&value) {
            texts.push(value);
        }
    }

    let mut pool: Vec<Value> = ints.into_iter().map(Value::Int).collect();
    pool.push(Value::Bool(true));
    pool.push(Value::Bool(false));
    pool.extend(texts.into_iter().map(Value::Text));
    pool.push(Value::List(Vec::new()));
    pool.push(Value::List(vec![Value::Int(0)]));
    pool.push(Value::Map(indexmap::IndexMap::new()));
    pool.push(Value::Map(indexmap::indexmap! {"k".to_string() => Value::Int(0)}));
    pool.push(Value::Null);
    pool
}

/// Argument tuples for an arity, lexicographic over the pool, capped.
pub fn tuples_for_arity(pool: &[Value], arity: usize, cap: usize) -> Vec<Vec<Value>> {
    if arity == 0 {
        return vec![Vec::new()];
    }
    let mut tuples = Vec::new();
    let mut indices = vec![0usize; arity];
    loop {
        tuples.push(indices.iter().map(|&i| pool[i].clone()).collect());
        if tuples.len() >= cap {
            break;
        }
        // Odometer increment, last position fastest.
        let mut position = arity;
        loop {
            if position == 0 {
                return tuples;
            }
            position -= 1;
            indices[position] += 1;
            if indices[position] < pool.len() {
                break;
            }
            indices[position] = 0;
        }
    }
    tuples
}

#[cfg(test)]
mod tests {
    use super::*;
    use minilang::parse;

    #[test]
    fn pool_contains_grid_and_harvested_constants() {
        let mut set = ProgramSet::new();
        set.files.insert(
            "m.ml0".to_string(),
            parse("fn f(x){ if (x >= 10) { return \"big\"; } return \"small\"; }").unwrap(),
        );
        let pool = derive_seed_pool(&set);
        assert!(pool.contains(&Value::Int(0)));
        assert!(pool.contains(&Value::Int(10)), "harvested constant");
        assert!(pool.contains(&Value::Int(9)), "boundary neighbor of harvested constant");
        assert!(pool.contains(&Value::Text("big".to_string())));
        assert!(pool.contains(&Value::Null));
    }

    #[test]
    fn tuples_respect_cap_and_arity() {
        let pool = vec![Value::Int(0), Value::Int(1), Value::Int(2)];
        assert_eq!(tuples_for_arity(&pool, 0, 10), vec![Vec::<Value>::new()]);
        let pairs = tuples_for_arity(&pool, 2, 5);
        assert_eq!(pairs.len(), 5);
        assert_eq!(pairs[0], vec![Value::Int(0), Value::Int(0)]);
        assert_eq!(pairs[1], vec![Value::Int(0), Value::Int(1)]);
        // Exhaustive when under the cap.
        assert_eq!(tuples_for_arity(&pool, 1, 100).len(), 3);
    }
}
