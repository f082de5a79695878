//! Result framing: the resolved config and seed travel with every table.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::failure::Failure;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

pub struct Report<R> {
    pub command: &'static str,
    pub config: Value,
    pub seed: u64,
    /// Extra header entries, e.g. per-drop seeds.
    pub extra: Map<String, Value>,
    pub rows: Vec<R>,
}

impl<R: Serialize> Report<R> {
    pub fn new(command: &'static str, config: &impl Serialize, seed: u64, rows: Vec<R>) -> Self {
        Self {
            command,
            config: serde_json::to_value(config).expect("configs serialize"),
            seed,
            extra: Map::new(),
            rows,
        }
    }

    pub fn render(&self, format: Format) -> Result<String, Failure> {
        match format {
            Format::Json => {
                let mut doc = json!({
                    "command": self.command,
                    "seed": self.seed,
                    "config": self.config,
                });
                for (k, v) in &self.extra {
                    doc[k] = v.clone();
                }
                doc["rows"] = serde_json::to_value(&self.rows)
                    .map_err(|e| Failure::Numeric(e.to_string()))?;
                let mut text = serde_json::to_string_pretty(&doc)
                    .map_err(|e| Failure::Numeric(e.to_string()))?;
                text.push('\n');
                Ok(text)
            }
            Format::Csv => {
                let mut text = format!(
                    "# command: {}\n# seed: {}\n# config: {}\n",
                    self.command, self.seed, self.config
                );
                for (k, v) in &self.extra {
                    text.push_str(&format!("# {k}: {v}\n"));
                }
                let mut w = csv::Writer::from_writer(Vec::new());
                for r in &self.rows {
                    w.serialize(r)
                        .map_err(|e| Failure::Numeric(e.to_string()))?;
                }
                let body = w
                    .into_inner()
                    .map_err(|e| Failure::Numeric(e.to_string()))?;
                text.push_str(&String::from_utf8(body).expect("csv output is utf-8"));
                Ok(text)
            }
        }
    }
}

pub fn emit(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Config(format!("cannot write to stdout: {e}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Row {
        a: f64,
        b: Option<u64>,
    }

    #[test]
    fn csv_carries_config_and_seed() {
        let r = Report::new("demo", &json!({"k": 1}), 9, vec![Row { a: 0.5, b: None }]);
        let text = r.render(Format::Csv).unwrap();
        assert_eq!(
            text,
            "# command: demo\n# seed: 9\n# config: {\"k\":1}\na,b\n0.5,\n"
        );
    }

    #[test]
    fn json_has_header_block() {
        let r = Report::new(
            "demo",
            &json!({"k": 1}),
            9,
            vec![Row { a: 0.5, b: Some(3) }],
        );
        let v: Value = serde_json::from_str(&r.render(Format::Json).unwrap()).unwrap();
        assert_eq!(v["seed"], 9);
        assert_eq!(v["config"]["k"], 1);
        assert_eq!(v["rows"][0]["b"], 3);
    }
}
