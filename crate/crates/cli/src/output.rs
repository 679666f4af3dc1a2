use std::fmt::Write as _;

use serde_json::{Map, Value};

/// Rounds to 12 significant digits and prints the shortest representation
/// that reads back to the rounded value.
pub fn fmt_float(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    let r = round12(v);
    if r == 0.0 {
        "0".to_string()
    } else if r.abs() < 1e-4 || r.abs() >= 1e15 {
        format!("{r:e}")
    } else {
        r.to_string()
    }
}

pub fn round12(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return v;
    }
    let r: f64 = format!("{v:.11e}").parse().expect("formatted float parses");
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

#[derive(Clone, Debug)]
pub enum Cell {
    Float(f64),
    Int(usize),
    Bool(bool),
    Text(String),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Float(v) => fmt_float(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Float(v) => float_value(*v),
            Cell::Int(v) => Value::from(*v),
            Cell::Bool(v) => Value::from(*v),
            Cell::Text(s) => Value::from(s.as_str()),
            Cell::Empty => Value::Null,
        }
    }
}

fn float_value(v: f64) -> Value {
    serde_json::Number::from_f64(round12(v)).map_or(Value::Null, Value::Number)
}

/// Rounds every float in a JSON tree to 12 significant digits.
pub fn round_json(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => float_value(n.as_f64().expect("f64 number")),
        Value::Array(a) => Value::Array(a.into_iter().map(round_json).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_json(v))).collect()),
        other => other,
    }
}

#[derive(Clone, Debug)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    pub fn csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::csv).collect();
            let _ = writeln!(out, "{}", line.join(","));
        }
        out
    }

    pub fn json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> = self
                        .header
                        .iter()
                        .zip(row)
                        .map(|(k, c)| (k.to_string(), c.json()))
                        .collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting() {
        assert_eq!(fmt_float(3.0 / 7.0), "0.428571428571");
        assert_eq!(fmt_float(0.2), "0.2");
        assert_eq!(fmt_float(-0.0), "0");
        assert_eq!(fmt_float(1e-20), "1e-20");
        assert_eq!(fmt_float(-2.467162276941e-17), "-2.46716227694e-17");
        assert_eq!(fmt_float(0.125), "0.125");
        let s = 3f64.sqrt() / (4.0 + 3f64.sqrt());
        assert_eq!(fmt_float(s), "0.302169479252");
    }

    #[test]
    fn csv_quoting() {
        let mut t = Table::new(vec!["a", "b"]);
        t.rows.push(vec![Cell::Text("x,y".into()), Cell::Empty]);
        assert_eq!(t.csv(), "a,b\n\"x,y\",\n");
    }
}
