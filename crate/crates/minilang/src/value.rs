//! Runtime values. Maps keep insertion order, and map equality is
//! order-sensitive: two maps with the same pairs in a different order are not
//! equal. That makes "same pairs, different order" an observable (and
//! assertable) behavior difference.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "snake_case")]
pub enum Value {
    Int(i64),
    Bool(bool),
    Text(String),
    List(Vec<Value>),
    Map(IndexMap<String, Value>),
    Null,
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Value::Int(a), Value::Int(b)) => a == b,
            (Value::Bool(a), Value::Bool(b)) => a == b,
            (Value::Text(a), Value::Text(b)) => a == b,
            (Value::List(a), Value::List(b)) => a == b,
            (Value::Map(a), Value::Map(b)) => {
                // IndexMap's own == ignores order; compare entry sequences.
                a.len() == b.len()
                    && a.iter().zip(b.iter()).all(|((ka, va), (kb, vb))| ka == kb && va == vb)
            }
            (Value::Null, Value::Null) => true,
            _ => false,
        }
    }
}

impl Eq for Value {}

impl Value {
    pub fn type_name(&self) -> &'static str {
        match self {
            Value::Int(_) => "int",
            Value::Bool(_) => "bool",
            Value::Text(_) => "text",
            Value::List(_) => "list",
            Value::Map(_) => "map",
            Value::Null => "null",
        }
    }

    pub fn is_null(&self) -> bool {
        matches!(self, Value::Null)
    }

    /// True when the value is a map whose pairs equal `other`'s pairs up to
    /// reordering, while the maps themselves differ.
    pub fn is_reordered_map_of(&self, other: &Value) -> bool {
        let (Value::Map(a), Value::Map(b)) = (self, other) else { return false };
        if a.len() != b.len() || self == other {
            return false;
        }
        a.iter().all(|(k, v)| b.get(k) == Some(v))
    }
}
