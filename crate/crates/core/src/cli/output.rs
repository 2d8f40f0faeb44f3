//! JSON emission with floats rounded to 12 significant digits.

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::error::Error;

pub const SIGNIFICANT_DIGITS: usize = 12;

pub fn round_sig(v: f64) -> f64 {
    if v == 0.0 {
        return 0.0;
    }
    if !v.is_finite() {
        return v;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, v)
        .parse()
        .unwrap_or(v)
}

fn round_value(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let f = round_sig(n.as_f64().unwrap_or(f64::NAN));
            serde_json::Number::from_f64(f).map_or(Value::Null, Value::Number)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_value).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_value(v))).collect()),
        other => other,
    }
}

pub fn to_value<T: Serialize>(v: &T) -> Value {
    round_value(serde_json::to_value(v).unwrap_or(Value::Null))
}

pub fn success(command: &str, result: Value) -> String {
    let mut obj = Map::new();
    obj.insert("command".into(), json!(command));
    obj.insert("status".into(), json!("ok"));
    obj.insert("result".into(), round_value(result));
    serde_json::to_string_pretty(&Value::Object(obj)).expect("serializable")
}

pub fn failure(command: &str, err: &Error) -> String {
    let body = json!({
        "command": command,
        "status": "error",
        "error": {
            "kind": err.kind(),
            "validation": err.is_validation(),
            "message": err.to_string(),
        }
    });
    serde_json::to_string_pretty(&body).expect("serializable")
}

pub fn exit_code(err: &Error) -> i32 {
    if err.is_validation() {
        1
    } else {
        2
    }
}
