use serde_json::{Map, Number, Value};

/// Fixed 17-significant-digit JSON number; non-finite values become null.
pub fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    serde_json::from_str::<Number>(&fmt_num(x)).map_or(Value::Null, Value::Number)
}

/// Text rendering with the same precision as the JSON numbers.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    format!("{x:.16e}")
}

pub fn obj<const N: usize>(fields: [(&str, Value); N]) -> Value {
    Value::Object(fields.into_iter().map(|(k, v)| (k.to_string(), v)).collect::<Map<_, _>>())
}

pub fn strs<S: AsRef<str>>(xs: &[S]) -> Value {
    Value::Array(xs.iter().map(|s| Value::String(s.as_ref().to_string())).collect())
}

/// Envelope shared by every command.
pub fn envelope(command: &[String], results: Value, wall_time: Option<f64>) -> Value {
    let mut m = Map::new();
    m.insert("schema".into(), Value::from(1));
    m.insert("engine".into(), Value::String(format!("relhist {}", env!("CARGO_PKG_VERSION"))));
    m.insert("command".into(), strs(command));
    m.insert("results".into(), results);
    if let Some(t) = wall_time {
        m.insert("wall_time_s".into(), num(t));
    }
    Value::Object(m)
}

/// One CSV field, quoted when needed.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn csv_row(fields: &[String]) -> String {
    fields.iter().map(|f| csv_field(f)).collect::<Vec<_>>().join(",")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_keep_seventeen_digits() {
        let v = num(1.0 / 12.0);
        assert_eq!(v.to_string(), "8.3333333333333329e-2");
        assert_eq!(num(f64::NAN), Value::Null);
        assert_eq!(num(0.0).to_string(), "0");
        assert_eq!(num(-0.0).to_string(), "0");
    }

    #[test]
    fn csv_quoting() {
        assert_eq!(csv_row(&["a".into(), "b,c".into(), "d\"e".into()]), "a,\"b,c\",\"d\"\"e\"");
    }
}
