//! Scenario results: a numeric table plus metadata.

use std::io::{Read, Write};

use crate::error::{Error, Result};

/// Shortest round-trip decimal, switching to exponent form for very small
/// or very large magnitudes.
pub fn format_number(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

/// Values that can go in the metadata block.
pub trait MetaValue {
    fn render(&self) -> String;
}

impl MetaValue for f64 {
    fn render(&self) -> String {
        format_number(*self)
    }
}

macro_rules! display_meta {
    ($($t:ty),*) => {$(
        impl MetaValue for $t {
            fn render(&self) -> String {
                self.to_string()
            }
        }
    )*};
}
display_meta!(bool, usize, u64, &str, String);

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResultTable {
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
    /// Ordered `key: value` lines: config echo, summary values, version.
    pub metadata: Vec<(String, String)>,
}

impl ResultTable {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        ResultTable {
            columns: columns.into_iter().map(Into::into).collect(),
            ..Default::default()
        }
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn push(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::param(
                "row",
                format!("{} values for {} columns", row.len(), self.columns.len()),
            ));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    /// Appends a column computed from each row.
    pub fn add_column(&mut self, name: impl Into<String>, values: Vec<f64>) -> Result<()> {
        if values.len() != self.rows.len() {
            return Err(Error::param("column", "one value per row"));
        }
        self.columns.push(name.into());
        for (r, v) in self.rows.iter_mut().zip(values) {
            r.push(v);
        }
        Ok(())
    }

    pub fn meta(&mut self, key: impl Into<String>, value: impl MetaValue) {
        self.metadata.push((key.into(), value.render()));
    }

    pub fn get_meta(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// Numeric metadata value.
    pub fn summary(&self, key: &str) -> Option<f64> {
        self.get_meta(key)?.parse().ok()
    }

    /// Numbers are written with Rust's shortest round-trip formatting.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r.iter().map(|&x| format_number(x)))?;
        }
        w.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut table = ResultTable::new(r.headers()?.iter());
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|x| {
                    x.parse::<f64>().map_err(|_| Error::Parse {
                        location: format!("row {}", i + 1),
                        reason: format!("`{x}` is not a number"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            table.push(row)?;
        }
        Ok(table)
    }

    /// One `key: value` line per entry; multi-line values are indented.
    pub fn write_metadata<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for (k, v) in &self.metadata {
            let mut lines = v.lines();
            writeln!(w, "{k}: {}", lines.next().unwrap_or(""))?;
            for l in lines {
                writeln!(w, "  {l}")?;
            }
        }
        Ok(())
    }

    pub fn parse_metadata(text: &str) -> Result<Vec<(String, String)>> {
        let mut out: Vec<(String, String)> = Vec::new();
        for (n, line) in text.lines().enumerate() {
            if let Some(cont) = line.strip_prefix("  ") {
                let last = out.last_mut().ok_or_else(|| Error::Parse {
                    location: format!("metadata line {}", n + 1),
                    reason: "continuation without a key".into(),
                })?;
                last.1.push('\n');
                last.1.push_str(cont);
                continue;
            }
            let (k, v) = line.split_once(": ").or_else(|| line.strip_suffix(':').map(|k| (k, ""))).ok_or_else(|| {
                Error::Parse {
                    location: format!("metadata line {}", n + 1),
                    reason: "expected `key: value`".into(),
                }
            })?;
            out.push((k.to_string(), v.to_string()));
        }
        Ok(out)
    }
}
