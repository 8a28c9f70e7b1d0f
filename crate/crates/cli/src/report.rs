//! Versioned reports and their JSON, CSV and text renderings.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;

use crate::config::{ConfigEcho, Format, RunConfig};

pub const SCHEMA_VERSION: u32 = 1;

/// Rows for the CSV and text renderings.
pub trait Table {
    fn header(&self) -> Vec<&'static str>;
    fn rows(&self) -> Vec<Vec<String>>;
}

#[derive(Debug, Clone, Serialize)]
pub struct Report<B> {
    pub schema_version: u32,
    pub command: &'static str,
    pub config: ConfigEcho,
    pub ok: bool,
    pub result: B,
    /// Wall-clock milliseconds per stage; the only nondeterministic field.
    pub timings_ms: BTreeMap<String, f64>,
}

impl<B: Serialize + Table> Report<B> {
    pub fn new(command: &'static str, config: &RunConfig, ok: bool, result: B, timings_ms: BTreeMap<String, f64>) -> Self {
        Self { schema_version: SCHEMA_VERSION, command, config: config.into(), ok, result, timings_ms }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => serde_json::to_string_pretty(self).expect("report serializes") + "\n",
            Format::Csv => self.csv(),
            Format::Text => self.text(),
        }
    }

    fn csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.result.header()).expect("in-memory write");
        for row in self.result.rows() {
            w.write_record(&row).expect("in-memory write");
        }
        let body = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv");
        format!(
            "# fredk2 schema {} command {} seed {} ok {}\n{body}",
            self.schema_version, self.command, self.config.config.seed, self.ok
        )
    }

    fn text(&self) -> String {
        let header = self.result.header();
        let rows = self.result.rows();
        let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
        for row in &rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.len());
            }
        }
        let line = |cells: Vec<&str>| {
            cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect::<Vec<_>>().join("  ").trim_end().to_string()
        };
        let mut out = format!(
            "fredk2 {} (schema {}, seed {}, {} mode): {}\n",
            self.command,
            self.schema_version,
            self.config.config.seed,
            if self.config.strict { "strict" } else { "fast" },
            if self.ok { "ok" } else { "FAILED" }
        );
        out += &line(header.clone());
        out.push('\n');
        for row in &rows {
            out += &line(row.iter().map(String::as_str).collect());
            out.push('\n');
        }
        let total: f64 = self.timings_ms.values().sum();
        out += &format!("elapsed {total:.1} ms\n");
        out
    }
}

/// `|x - y| / max(|x|, |y|)`, zero when both vanish.
pub fn relative_delta(x: Complex64, y: Complex64) -> f64 {
    let scale = x.norm().max(y.norm());
    if scale == 0.0 {
        0.0
    } else {
        (x - y).norm() / scale
    }
}

pub fn fmt_complex(z: Complex64) -> String {
    format!("{:+.15e}{:+.15e}i", z.re, z.im)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_delta_is_symmetric() {
        let (x, y) = (Complex64::new(1.0, 1.0), Complex64::new(1.0, 1.0 + 1e-9));
        assert_eq!(relative_delta(x, y), relative_delta(y, x));
        assert!(relative_delta(x, y) < 1e-9);
        assert_eq!(relative_delta(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)), 0.0);
    }

    #[test]
    fn complex_formatting_keeps_signs() {
        assert_eq!(fmt_complex(Complex64::new(-1.0, 0.0)), "-1.000000000000000e0+0.000000000000000e0i");
    }
}
