//! Tabular artifacts with a metadata header, rendered as CSV, JSON or an
//! aligned text table.

use std::io::Write;

use ffcircle::arcs::NONCONFORMING;
use serde_json::{json, Map, Value};

use crate::config::{Format, RunConfig};

pub struct Artifact {
    pub title: String,
    pub meta: Vec<(String, Value)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Artifact {
    /// A new artifact with the parameter echo every output carries. A rho
    /// override stamps the artifact nonconforming whatever `stamp` says.
    pub fn new(title: &str, cfg: &RunConfig, stamp: &str, columns: &[&str]) -> Self {
        let stamp = if cfg.override_rho.is_some() { NONCONFORMING } else { stamp };
        let meta = vec![
            ("tool".into(), json!(format!("ffcircle {}", env!("CARGO_PKG_VERSION")))),
            ("command".into(), json!(title)),
            ("field".into(), json!(cfg.field_label())),
            ("q".into(), json!(cfg.field.q())),
            ("seed".into(), json!(cfg.seed)),
            ("limit".into(), json!(cfg.limit)),
            ("stamp".into(), json!(stamp)),
        ];
        Artifact {
            title: title.into(),
            meta,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        let value = value.into();
        match self.meta.iter_mut().find(|(k, _)| k == key) {
            Some(slot) => slot.1 = value,
            None => self.meta.push((key.into(), value)),
        }
        self
    }

    pub fn row(&mut self, cells: Vec<Value>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.csv(),
            Format::Json => self.json(),
            Format::Table => self.table(),
        }
    }

    fn csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.meta {
            out.push_str(&format!("# {k}: {}\n", plain(v)));
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).unwrap();
        for row in &self.rows {
            w.write_record(row.iter().map(plain)).unwrap();
        }
        out.push_str(&String::from_utf8(w.into_inner().unwrap()).unwrap());
        out
    }

    fn json(&self) -> String {
        let meta: Map<String, Value> = self.meta.iter().cloned().collect();
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Object(self.columns.iter().cloned().zip(r.iter().cloned()).collect()))
            .collect();
        let mut s =
            serde_json::to_string_pretty(&json!({ "meta": meta, "columns": self.columns, "rows": rows })).unwrap();
        s.push('\n');
        s
    }

    fn table(&self) -> String {
        let mut out = format!("{}\n", self.title);
        for (k, v) in &self.meta {
            out.push_str(&format!("  {k}: {}\n", plain(v)));
        }
        if self.columns.is_empty() {
            return out;
        }
        let cells: Vec<Vec<String>> = self.rows.iter().map(|r| r.iter().map(plain).collect()).collect();
        let widths: Vec<usize> = (0..self.columns.len())
            .map(|i| cells.iter().map(|r| r[i].len()).chain([self.columns[i].len()]).max().unwrap_or(0))
            .collect();
        let line = |vals: &[String]| {
            vals.iter()
                .zip(&widths)
                .map(|(v, w)| format!("{v:<w$}"))
                .collect::<Vec<_>>()
                .join("  ")
                .trim_end()
                .to_string()
        };
        out.push('\n');
        out.push_str(&line(&self.columns));
        out.push('\n');
        for r in &cells {
            out.push_str(&line(r));
            out.push('\n');
        }
        out
    }
}

fn plain(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

/// Writes every artifact once, to `--out` or stdout.
pub fn emit(cfg: &RunConfig, artifacts: &[Artifact]) -> std::io::Result<()> {
    let body: String = match cfg.format {
        Format::Json if artifacts.len() > 1 => {
            let all: Vec<Value> = artifacts.iter().map(|a| serde_json::from_str(&a.json()).unwrap()).collect();
            let mut s = serde_json::to_string_pretty(&all).unwrap();
            s.push('\n');
            s
        }
        f => artifacts.iter().map(|a| a.render(f)).collect::<Vec<_>>().join("\n"),
    };
    match &cfg.out {
        Some(path) => std::fs::write(path, body),
        None => std::io::stdout().lock().write_all(body.as_bytes()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::CommonArgs;

    fn sample() -> Artifact {
        let cfg = RunConfig::resolve(&CommonArgs::default()).unwrap();
        let mut a = Artifact::new("demo", &cfg, "conforming", &["x", "label"]);
        a.meta("pass", true).meta("pass", false);
        a.row(vec![json!(1), json!("a,b")]);
        a
    }

    #[test]
    fn csv_quotes_and_header() {
        let s = sample().render(Format::Csv);
        assert!(s.contains("# pass: false\n"));
        assert_eq!(s.matches("# pass").count(), 1);
        assert!(s.ends_with("x,label\n1,\"a,b\"\n"));
    }

    #[test]
    fn json_rows_are_keyed_by_column() {
        let v: Value = serde_json::from_str(&sample().render(Format::Json)).unwrap();
        assert_eq!(v["rows"][0]["label"], "a,b");
        assert_eq!(v["meta"]["stamp"], "conforming");
    }
}
