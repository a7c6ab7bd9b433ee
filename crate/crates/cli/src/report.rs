//! Flat report records and their JSON / CSV encodings.

use std::io::Write;

use anyhow::Result;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::config::Format;

/// One check: enough parameters to re-run it, the measured metric, the
/// threshold it was held to, and the verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub suite: String,
    pub params: Map<String, Value>,
    pub metric: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Record {
    pub fn new(suite: &str, metric: f64, threshold: f64, pass: bool) -> Self {
        Record {
            suite: suite.into(),
            params: Map::new(),
            metric,
            threshold,
            pass,
        }
    }

    pub fn with(mut self, key: &str, value: impl Serialize) -> Self {
        self.params
            .insert(key.into(), serde_json::to_value(value).unwrap_or(Value::Null));
        self
    }
}

#[derive(Serialize)]
struct CsvRow<'a> {
    suite: &'a str,
    param_json: String,
    metric: f64,
    threshold: f64,
    pass: bool,
}

pub fn write_records(records: &[Record], format: Format, out: &mut dyn Write) -> Result<()> {
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, records)?;
            writeln!(out)?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in records {
                w.serialize(CsvRow {
                    suite: &r.suite,
                    param_json: serde_json::to_string(&r.params)?,
                    metric: r.metric,
                    threshold: r.threshold,
                    pass: r.pass,
                })?;
            }
            w.flush()?;
        }
    }
    Ok(())
}
