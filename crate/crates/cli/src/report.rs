use std::io::Write;
use std::path::Path;

use anyhow::Context;
use serde::Serialize;
use serde_json::Value;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Debug, Serialize)]
pub struct Timing {
    pub wall_seconds: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub parameters: Value,
    pub results: Vec<Value>,
    pub tool_version: String,
    pub timing: Timing,
}

impl Report {
    pub fn new(command: &str, parameters: Value) -> Self {
        Report {
            command: command.to_string(),
            parameters,
            results: Vec::new(),
            tool_version: TOOL_VERSION.to_string(),
            timing: Timing { wall_seconds: 0.0 },
        }
    }

    pub fn push<T: Serialize>(&mut self, result: &T) {
        self.results.push(serde_json::to_value(result).expect("results serialize"));
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }

    /// One row per result; nested objects become dotted columns, arrays stay
    /// JSON text.
    pub fn to_csv(&self) -> anyhow::Result<String> {
        let rows: Vec<Vec<(String, String)>> = self
            .results
            .iter()
            .map(|r| {
                let mut row = Vec::new();
                flatten("", r, &mut row);
                row
            })
            .collect();
        let mut header: Vec<String> = Vec::new();
        for row in &rows {
            for (key, _) in row {
                if !header.contains(key) {
                    header.push(key.clone());
                }
            }
        }
        // a null standing in for an object in some rows
        let nested: Vec<String> = header.iter().filter_map(|h| h.rsplit_once('.').map(|(p, _)| p.to_string())).collect();
        header.retain(|h| !nested.iter().any(|p| p == h || p.starts_with(&format!("{h}."))));
        header.sort();
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(&header)?;
        for row in &rows {
            let record: Vec<&str> = header
                .iter()
                .map(|h| row.iter().find(|(k, _)| k == h).map(|(_, v)| v.as_str()).unwrap_or(""))
                .collect();
            writer.write_record(record)?;
        }
        Ok(String::from_utf8(writer.into_inner()?)?)
    }

    pub fn emit(&self, format: Format, out: Option<&Path>) -> anyhow::Result<()> {
        let text = match format {
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv()?,
        };
        match out {
            Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
            None => {
                std::io::stdout().write_all(text.as_bytes())?;
                Ok(())
            }
        }
    }
}

fn flatten(key: &str, value: &Value, row: &mut Vec<(String, String)>) {
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                let nested = if key.is_empty() { k.clone() } else { format!("{key}.{k}") };
                flatten(&nested, v, row);
            }
        }
        Value::Null => row.push((key.to_string(), String::new())),
        Value::String(s) => row.push((key.to_string(), s.clone())),
        other => row.push((key.to_string(), other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn csv_flattens_nested_results() {
        let mut report = Report::new("count", json!({}));
        report.results.push(json!({"count": 6, "bound": {"value": 6, "holds": true}, "v": null, "witness": [0, 1]}));
        report.results.push(json!({"count": 9, "bound": null}));
        let csv = report.to_csv().unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "bound.holds,bound.value,count,v,witness");
        assert_eq!(lines.next().unwrap(), "true,6,6,,\"[0,1]\"");
        assert_eq!(lines.next().unwrap(), ",,9,,");
    }
}
