//! Column-named numeric tables and their CSV encoding.

use std::io::{Read, Write};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TableError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("header mismatch: expected {expected:?}, found {found:?}")]
    Header {
        expected: Vec<String>,
        found: Vec<String>,
    },
    #[error("row {row}, column `{column}`: cannot parse {value:?}")]
    Cell {
        row: usize,
        column: String,
        value: String,
    },
}

/// An ordered table of named real-valued columns. Flags are stored as 0/1.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
}

/// Rounds to 10 significant digits and prints the shortest decimal that
/// reads back as the rounded value.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.9e}").parse().expect("formatted float parses");
    format!("{rounded}")
}

impl SweepTable {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    /// Panics if the row width differs from the header width.
    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match header");
        self.rows.push(row);
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Values of the named column, if present.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), TableError> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|&x| format_number(x)))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)
            .expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    /// Parses CSV whose header must equal `expected`.
    pub fn read_csv<R: Read>(input: R, expected: &[&str]) -> Result<Self, TableError> {
        let mut r = csv::Reader::from_reader(input);
        let found: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        if found
            .iter()
            .map(String::as_str)
            .ne(expected.iter().copied())
        {
            return Err(TableError::Header {
                expected: expected.iter().map(|s| s.to_string()).collect(),
                found,
            });
        }
        let mut table = SweepTable::new(found);
        for (i, record) in r.records().enumerate() {
            let record = record?;
            let mut row = Vec::with_capacity(record.len());
            for (j, cell) in record.iter().enumerate() {
                let v = cell.parse::<f64>().map_err(|_| TableError::Cell {
                    row: i,
                    column: table.columns[j].clone(),
                    value: cell.to_string(),
                })?;
                row.push(v);
            }
            table.push(row);
        }
        Ok(table)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn formatting() {
        assert_eq!(format_number(0.0), "0");
        assert_eq!(format_number(1.0), "1");
        assert_eq!(format_number(0.05), "0.05");
        assert_eq!(format_number(141.128 / 3560.0), "0.03964269663");
        assert_eq!(format_number(12962.72), "12962.72");
        assert_eq!(format_number(1.0 / 3.0), "0.3333333333");
    }

    #[test]
    fn csv_layout() {
        let mut t = SweepTable::new(["a", "b"]);
        t.push(vec![0.5, 1.0]);
        t.push(vec![1e-12, 0.0]);
        assert_eq!(t.to_csv_string(), "a,b\n0.5,1\n0.000000000001,0\n");
    }

    #[test]
    fn header_mismatch_is_reported() {
        let err = SweepTable::read_csv("x,y\n1,2\n".as_bytes(), &["x", "z"]).unwrap_err();
        assert!(matches!(err, TableError::Header { .. }));
    }

    proptest! {
        #[test]
        fn roundtrip_within_formatting(xs in prop::collection::vec(-1e9f64..1e9, 1..20)) {
            let mut t = SweepTable::new(["v"]);
            for &x in &xs {
                t.push(vec![x]);
            }
            let back = SweepTable::read_csv(t.to_csv_string().as_bytes(), &["v"]).unwrap();
            for (a, b) in xs.iter().zip(back.column("v").unwrap()) {
                prop_assert!((a - b).abs() <= 5e-10 * a.abs());
            }
        }
    }
}
