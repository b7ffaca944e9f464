//! Result tables and their CSV form.
//!
//! Numbers are written with the shortest representation that parses back to
//! the same `f64`; NaN is written as `nan` and infinities as `inf` / `-inf`.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Self::Num(v) => Some(*v),
            Self::Text(_) => None,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Self::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Self::Num(v as f64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Self::Text(v.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: vec![] }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.columns.iter().position(|c| c == name).ok_or_else(|| HarnessError::UnknownColumn(name.to_string()))
    }

    /// Numeric column; text cells come back as NaN.
    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let j = self.column_index(name)?;
        Ok(self.rows.iter().map(|r| r[j].as_f64().unwrap_or(f64::NAN)).collect())
    }

    /// Rows whose `name` column equals `value` exactly.
    pub fn filter_eq(&self, name: &str, value: f64) -> Result<Table> {
        let j = self.column_index(name)?;
        let rows = self.rows.iter().filter(|r| r[j].as_f64() == Some(value)).cloned().collect();
        Ok(Table { columns: self.columns.clone(), rows })
    }

    pub fn filter_text(&self, name: &str, value: &str) -> Result<Table> {
        let j = self.column_index(name)?;
        let rows = self.rows.iter().filter(|r| matches!(&r[j], Cell::Text(t) if t == value)).cloned().collect();
        Ok(Table { columns: self.columns.clone(), rows })
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.columns)?;
        for row in &self.rows {
            out.write_record(row.iter().map(format_cell))?;
        }
        out.flush().map_err(|e| HarnessError::Csv(e.into()))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    /// Parses CSV written by [`Table::write_csv`]. Fields that parse as
    /// numbers become [`Cell::Num`].
    pub fn read_csv<R: Read>(r: R) -> Result<Table> {
        let mut rdr = csv::Reader::from_reader(r);
        let columns = rdr.headers()?.iter().map(str::to_string).collect();
        let mut rows = vec![];
        for rec in rdr.records() {
            rows.push(rec?.iter().map(parse_cell).collect());
        }
        Ok(Table { columns, rows })
    }
}

pub fn format_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else if v != 0.0 && !(1e-5..1e16).contains(&v.abs()) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

fn format_cell(c: &Cell) -> String {
    match c {
        Cell::Num(v) => format_f64(*v),
        Cell::Text(t) => t.clone(),
    }
}

fn parse_cell(s: &str) -> Cell {
    match s {
        "nan" => Cell::Num(f64::NAN),
        "inf" => Cell::Num(f64::INFINITY),
        "-inf" => Cell::Num(f64::NEG_INFINITY),
        _ => match s.parse::<f64>() {
            Ok(v) if v.is_finite() => Cell::Num(v),
            _ => Cell::Text(s.to_string()),
        },
    }
}

/// Writes `table` to `path`, creating parent directories.
pub fn emit_csv(table: &Table, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    }
    let file = std::fs::File::create(path).map_err(|e| HarnessError::io(path, e))?;
    table.write_csv(std::io::BufWriter::new(file))
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<Table> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| HarnessError::io(path, e))?;
    Table::read_csv(file)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting_is_shortest_and_exact() {
        for v in [0.1, 1.0 / 3.0, 64.0, 1e-7, 2.5e-300, 1e20, -0.0, 0.0, 123456.789] {
            let s = format_f64(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
        }
        assert_eq!(format_f64(64.0), "64");
        assert_eq!(format_f64(0.1), "0.1");
        assert_eq!(format_f64(1e-7), "1e-7");
        assert_eq!(format_f64(f64::NAN), "nan");
    }

    #[test]
    fn nan_round_trips() {
        let mut t = Table::new(&["n", "gamma", "error"]);
        t.push(vec![64usize.into(), 0.45.into(), f64::NAN.into()]);
        let csv = t.to_csv_string();
        assert_eq!(csv, "n,gamma,error\n64,0.45,nan\n");
        let back = Table::read_csv(csv.as_bytes()).unwrap();
        assert!(back.rows[0][2].as_f64().unwrap().is_nan());
        assert_eq!(back.to_csv_string(), csv);
    }

    #[test]
    fn text_cells_survive() {
        let mut t = Table::new(&["kind", "value"]);
        t.push(vec!["rademacher_l2".into(), 0.25.into()]);
        t.push(vec!["a,b".into(), 1.0.into()]);
        let back = Table::read_csv(t.to_csv_string().as_bytes()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn unknown_column() {
        let t = Table::new(&["n"]);
        assert!(matches!(t.column("x"), Err(HarnessError::UnknownColumn(_))));
    }
}
