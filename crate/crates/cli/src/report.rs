//! JSON and CSV emission. Reports carry a schema version and keep field
//! order fixed so equal runs produce equal bytes.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub seed: u64,
    pub parameters: Value,
    pub summary: Value,
    pub results: Vec<Value>,
    pub artifacts: Vec<String>,
}

impl Report {
    pub fn new(command: &str, seed: u64) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            seed,
            parameters: Value::Object(Default::default()),
            summary: Value::Object(Default::default()),
            results: vec![],
            artifacts: vec![],
        }
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        insert(&mut self.parameters, key, value);
        self
    }

    pub fn set(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        insert(&mut self.summary, key, value);
        self
    }

    pub fn push(&mut self, value: impl Serialize) -> &mut Self {
        self.results.push(serde_json::to_value(value).expect("serializable result"));
        self
    }

    pub fn artifact(&mut self, path: &Path) -> &mut Self {
        self.artifacts.push(path.display().to_string());
        self
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable report");
        s.push('\n');
        s
    }

    /// Writes to `path`, or to stdout when `path` is `None`.
    pub fn emit(&self, path: Option<&Path>) -> Result<(), CliError> {
        let json = self.to_json();
        match path {
            Some(p) => std::fs::write(p, json).map_err(|e| unwritable(p, e)),
            None => {
                std::io::stdout().lock().write_all(json.as_bytes())?;
                Ok(())
            }
        }
    }
}

fn insert(obj: &mut Value, key: &str, value: impl Serialize) {
    let v = serde_json::to_value(value).expect("serializable value");
    obj.as_object_mut().expect("object").insert(key.to_string(), v);
}

pub fn unwritable(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("cannot write {}: {e}", path.display()))
}

/// A header row plus numeric rows; `None` cells are written empty.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: vec![] }
    }

    pub fn row(&mut self, values: impl IntoIterator<Item = Option<f64>>) {
        let row: Vec<Option<f64>> = values.into_iter().collect();
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write_to<W: Write>(&self, out: W) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| v.map_or(String::new(), |x| x.to_string())))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        let file = std::fs::File::create(path).map_err(|e| unwritable(path, e))?;
        self.write_to(std::io::BufWriter::new(file))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_report_has_zero_length_arrays() {
        let r = Report::new("verify", 0);
        let v: Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["schema_version"], SCHEMA_VERSION);
        assert_eq!(v["results"].as_array().unwrap().len(), 0);
        assert_eq!(v["artifacts"].as_array().unwrap().len(), 0);
    }

    #[test]
    fn table_keeps_column_order_and_blanks() {
        let mut t = Table::new(&["r", "D", "W_f"]);
        t.row([Some(0.5), Some(1.0), None]);
        let mut buf = vec![];
        t.write_to(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "r,D,W_f\n0.5,1,\n");
    }
}
