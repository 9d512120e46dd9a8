use std::str::FromStr;

use serde_json::{Map, Number, Value};

pub const SCHEMA: &str = "rellich-lab/report/1";

/// A float printed with 17 significant digits; non-finite values become null.
pub fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    Number::from_str(&format!("{x:.16e}")).map(Value::Number).unwrap_or(Value::Null)
}

pub fn int(x: impl Into<u64>) -> Value {
    Value::Number(Number::from(x.into()))
}

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), passed, detail: detail.into() }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Row(pub Map<String, Value>);

impl Row {
    pub fn new() -> Self {
        Row::default()
    }

    pub fn with(mut self, key: &str, value: Value) -> Self {
        self.0.insert(key.to_owned(), value);
        self
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub command: String,
    pub parameters: Map<String, Value>,
    pub results: Vec<Row>,
    pub checks: Vec<Check>,
    pub seed: u64,
    pub precision: String,
    pub wall_time_ms: u64,
}

impl RunReport {
    pub fn new(command: &str, precision: &str, seed: u64) -> Self {
        RunReport {
            command: command.to_owned(),
            parameters: Map::new(),
            results: Vec::new(),
            checks: Vec::new(),
            seed,
            precision: precision.to_owned(),
            wall_time_ms: 0,
        }
    }

    pub fn param(&mut self, key: &str, value: Value) {
        self.parameters.insert(key.to_owned(), value);
    }

    pub fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check::new(name, passed, detail));
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_json(&self) -> Value {
        let checks = self
            .checks
            .iter()
            .map(|c| {
                let mut m = Map::new();
                m.insert("name".into(), Value::String(c.name.clone()));
                m.insert("passed".into(), Value::Bool(c.passed));
                m.insert("detail".into(), Value::String(c.detail.clone()));
                Value::Object(m)
            })
            .collect();
        let mut m = Map::new();
        m.insert("schema".into(), Value::String(SCHEMA.into()));
        m.insert("command".into(), Value::String(self.command.clone()));
        m.insert("parameters".into(), Value::Object(self.parameters.clone()));
        m.insert("results".into(), Value::Array(self.results.iter().map(|r| Value::Object(r.0.clone())).collect()));
        m.insert("checks".into(), Value::Array(checks));
        m.insert("seed".into(), int(self.seed));
        m.insert("precision".into(), Value::String(self.precision.clone()));
        m.insert("wall_time_ms".into(), int(self.wall_time_ms));
        Value::Object(m)
    }

    pub fn render_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json()).expect("report serializes");
        s.push('\n');
        s
    }

    /// Results only, columns from the first row.
    pub fn render_csv(&self) -> String {
        let Some(first) = self.results.first() else {
            return String::new();
        };
        let header: Vec<&String> = first.0.keys().collect();
        let mut out = header.iter().map(|h| h.as_str()).collect::<Vec<_>>().join(",");
        out.push('\n');
        for row in &self.results {
            let cells: Vec<String> = header.iter().map(|h| csv_cell(row.0.get(*h))).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

fn csv_cell(v: Option<&Value>) -> String {
    match v {
        None | Some(Value::Null) => String::new(),
        Some(Value::String(s)) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
        Some(Value::String(s)) => s.clone(),
        Some(other) => other.to_string(),
    }
}
