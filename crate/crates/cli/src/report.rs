use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde_json::{json, Value};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    AtMost,
    AtLeast,
}

impl Relation {
    fn symbol(&self) -> &'static str {
        match self {
            Relation::AtMost => "<=",
            Relation::AtLeast => ">=",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Criterion {
    pub name: String,
    pub value: f64,
    pub relation: Relation,
    pub tolerance: f64,
    pub passed: bool,
}

impl Criterion {
    /// NaN never passes.
    pub fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Criterion {
            name: name.into(),
            value,
            relation: Relation::AtMost,
            tolerance,
            passed: value <= tolerance,
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Criterion {
            name: name.into(),
            value,
            relation: Relation::AtLeast,
            tolerance,
            passed: value >= tolerance,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Table {
            name: name.into(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for row in &self.rows {
            s.push_str(&row.iter().map(|x| num(*x)).collect::<Vec<_>>().join(","));
            s.push('\n');
        }
        s
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    pub command: String,
    pub inputs: BTreeMap<String, Value>,
    pub criteria: Vec<Criterion>,
    pub tables: Vec<Table>,
}

/// 17 significant digits; `inf`, `-inf`, `nan` otherwise.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn json_num(x: f64) -> Value {
    if x.is_finite() {
        Value::Number(serde_json::Number::from_str(&num(x)).expect("formatted float is valid JSON"))
    } else {
        Value::Null
    }
}

/// Flattens nested tables into dotted keys.
pub fn flatten(prefix: &str, v: &Value, out: &mut BTreeMap<String, Value>) {
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, x, out);
            }
        }
        _ => {
            out.insert(prefix.to_string(), v.clone());
        }
    }
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report {
            command: command.into(),
            ..Default::default()
        }
    }

    pub fn push(&mut self, c: Criterion) {
        self.criteria.push(c);
    }

    pub fn passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&Criterion> {
        self.criteria.iter().filter(|c| !c.passed).collect()
    }

    pub fn criteria_csv(&self) -> String {
        let mut s = String::from("criterion,value,relation,tolerance,verdict\n");
        for c in &self.criteria {
            s.push_str(&format!(
                "{},{},{},{},{}\n",
                c.name,
                num(c.value),
                c.relation.symbol(),
                num(c.tolerance),
                if c.passed { "pass" } else { "fail" }
            ));
        }
        s
    }

    pub fn to_json(&self) -> String {
        let criteria: Vec<Value> = self
            .criteria
            .iter()
            .map(|c| {
                json!({
                    "name": c.name,
                    "value": json_num(c.value),
                    "relation": c.relation.symbol(),
                    "tolerance": json_num(c.tolerance),
                    "passed": c.passed,
                })
            })
            .collect();
        let tables: serde_json::Map<String, Value> = self
            .tables
            .iter()
            .map(|t| {
                let rows: Vec<Value> = t
                    .rows
                    .iter()
                    .map(|r| Value::Array(r.iter().map(|x| json_num(*x)).collect()))
                    .collect();
                (t.name.clone(), json!({ "header": t.header, "rows": rows }))
            })
            .collect();
        let v = json!({
            "command": self.command,
            "inputs": self.inputs,
            "passed": self.passed(),
            "criteria": criteria,
            "tables": tables,
        });
        let mut s = serde_json::to_string_pretty(&v).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("command: {}\n", self.command);
        s.push_str("inputs:\n");
        for (k, v) in &self.inputs {
            s.push_str(&format!("  {k} = {v}\n"));
        }
        s.push_str("criteria:\n");
        for c in &self.criteria {
            s.push_str(&format!(
                "  [{}] {}: {} {} {}\n",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                num(c.value),
                c.relation.symbol(),
                num(c.tolerance)
            ));
        }
        for t in &self.tables {
            s.push_str(&format!("table {}:\n", t.name));
            for line in t.to_csv().lines() {
                s.push_str(&format!("  {line}\n"));
            }
        }
        s.push_str(&format!(
            "result: {} ({} of {} criteria passed)\n",
            if self.passed() { "PASS" } else { "FAIL" },
            self.criteria.len() - self.failures().len(),
            self.criteria.len()
        ));
        s
    }

    /// File names and contents for `format`, all prefixed by the command.
    pub fn render(&self, format: Format) -> Vec<(String, String)> {
        let stem = &self.command;
        match format {
            Format::Text => vec![(format!("{stem}.report.txt"), self.to_text())],
            Format::Json => vec![(format!("{stem}.report.json"), self.to_json())],
            Format::Csv => {
                let mut inputs = String::from("key,value\n");
                for (k, v) in &self.inputs {
                    inputs.push_str(&format!("{k},{}\n", v.to_string().replace(',', ";")));
                }
                let mut out = vec![
                    (format!("{stem}.report.csv"), self.criteria_csv()),
                    (format!("{stem}.inputs.csv"), inputs),
                ];
                out.extend(
                    self.tables
                        .iter()
                        .map(|t| (format!("{stem}.{}.csv", t.name), t.to_csv())),
                );
                out
            }
        }
    }
}

/// Writes the rendered report plus extra artifacts, one file at a time.
pub fn emit(
    report: &Report,
    format: Format,
    dir: &Path,
    artifacts: &[(String, Vec<u8>)],
) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let files = report
        .render(format)
        .into_iter()
        .map(|(n, s)| (n, s.into_bytes()));
    for (name, bytes) in files.chain(artifacts.iter().cloned()) {
        let path = dir.join(name);
        std::fs::write(&path, bytes)?;
        written.push(path);
    }
    Ok(written)
}
