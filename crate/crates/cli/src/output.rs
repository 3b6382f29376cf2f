use qchaos::qalgebra::rational_to_f64;
use qchaos::{QPoly, Rational, Surd};
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::Format;
use crate::CliError;

/// A command result, renderable as JSON or as one CSV table.
pub struct Output {
    pub json: Value,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Output {
    pub fn new(json: Value, header: &[&str]) -> Self {
        Output {
            json,
            header: header.iter().map(ToString::to_string).collect(),
            rows: Vec::new(),
        }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        self.rows.push(cells);
    }

    pub fn render(&self, format: Format) -> Result<String, CliError> {
        match format {
            Format::Json => {
                let mut text =
                    serde_json::to_string_pretty(&self.json).expect("json value serializes");
                text.push('\n');
                Ok(text)
            }
            Format::Csv => {
                let mut writer = csv::WriterBuilder::new()
                    .flexible(true)
                    .from_writer(Vec::new());
                writer.write_record(&self.header)?;
                for row in &self.rows {
                    writer.write_record(row)?;
                }
                let bytes = writer
                    .into_inner()
                    .map_err(|e| CliError::Usage(e.to_string()))?;
                Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
            }
        }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Value {
    serde_json::to_value(value).expect("report serializes")
}

fn coefficient_strings(p: &QPoly) -> Vec<String> {
    p.coeffs().iter().map(ToString::to_string).collect()
}

/// A moment that is either a polynomial in `q` or its value at the session `q`.
pub fn surd_json(v: &Surd<QPoly>, q: Option<&Rational>) -> Value {
    match q {
        None => json!({
            "exact": v.to_string(),
            "coefficients": coefficient_strings(v.value()),
            "radicand": v.radicand().to_string(),
        }),
        Some(q) => {
            let at = v.eval(q);
            json!({
                "q": q.to_string(),
                "exact": at.to_string(),
                "approx": at.to_f64(),
            })
        }
    }
}

pub fn surd_text(v: &Surd<QPoly>, q: Option<&Rational>) -> String {
    match q {
        None => v.to_string(),
        Some(q) => v.eval(q).to_string(),
    }
}

pub fn poly_json(p: &QPoly, q: Option<&Rational>) -> Value {
    surd_json(&Surd::rational(p.clone()), q)
}

pub fn poly_text(p: &QPoly, q: Option<&Rational>) -> String {
    surd_text(&Surd::rational(p.clone()), q)
}

pub fn rational_json(r: &Rational) -> Value {
    json!({ "exact": r.to_string(), "approx": rational_to_f64(r) })
}
