use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use crate::error::CliResult;

/// A CSV table: header row with units, then data rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write_to<W: Write>(&self, w: W) -> CliResult<()> {
        let mut csv = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(w);
        csv.write_record(&self.header)?;
        for row in &self.rows {
            csv.write_record(row)?;
        }
        csv.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> CliResult<String> {
        let mut buf = Vec::new();
        self.write_to(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    /// Writes to `path`, or to stdout when `None`.
    pub fn emit(&self, path: Option<&Path>) -> CliResult<()> {
        match path {
            Some(p) => self.write_to(io::BufWriter::new(File::create(p)?)),
            None => match self.write_to(io::stdout().lock()) {
                Err(e) if e.code == "broken_pipe" => Ok(()),
                r => r,
            },
        }
    }
}

/// Shortest decimal representation that round-trips; never uses an exponent.
/// Negative zero prints as `0`.
pub fn num(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else {
        format!("{x}")
    }
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn flag(b: bool) -> String {
    if b { "true" } else { "false" }.to_string()
}
