//! Tables rendered as CSV or as a JSON array of records with the same fields.
//!
//! Floats are written with 17 significant digits in both formats, so a table
//! read back from either one reproduces the computed doubles exactly.

use std::io::{self, Write};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "csv" => Some(Format::Csv),
            "json" => Some(Format::Json),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i128),
    Float(f64),
    Text(String),
    Missing,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Missing, Cell::Float)
    }
}

macro_rules! int_cell {
    ($($t:ty),*) => {$(
        impl From<$t> for Cell {
            fn from(x: $t) -> Self {
                Cell::Int(x as i128)
            }
        }
    )*};
}
int_cell!(u32, u64, usize, i64);

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_owned())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => float(*x),
            Cell::Text(s) => s.clone(),
            Cell::Missing => String::new(),
        }
    }

    fn json(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) if x.is_finite() => float(*x),
            Cell::Float(_) | Cell::Missing => "null".into(),
            Cell::Text(s) => serde_json::to_string(s).expect("strings serialize"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn write(&self, format: Format, out: &mut dyn Write) -> io::Result<()> {
        match format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(out);
                w.write_record(&self.header)?;
                for row in &self.rows {
                    w.write_record(row.iter().map(Cell::csv))?;
                }
                w.flush()
            }
            Format::Json => {
                writeln!(out, "[")?;
                for (i, row) in self.rows.iter().enumerate() {
                    let fields: Vec<String> = self
                        .header
                        .iter()
                        .zip(row)
                        .map(|(k, v)| format!("{}:{}", serde_json::to_string(k).expect("keys serialize"), v.json()))
                        .collect();
                    let sep = if i + 1 < self.rows.len() { "," } else { "" };
                    writeln!(out, "  {{{}}}{sep}", fields.join(","))?;
                }
                writeln!(out, "]")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn render(t: &Table, f: Format) -> String {
        let mut buf = Vec::new();
        t.write(f, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn csv_and_json_agree() {
        let mut t = Table::new(&["k", "value", "name", "gap"]);
        t.push(vec![1u32.into(), 0.1.into(), "pi".into(), Cell::Missing]);
        t.push(vec![2u32.into(), f64::INFINITY.into(), "a,b".into(), 3.0.into()]);
        let csv = render(&t, Format::Csv);
        assert_eq!(
            csv,
            "k,value,name,gap\n1,1.0000000000000001e-1,pi,\n2,inf,\"a,b\",3.0000000000000000e0\n"
        );
        let json = render(&t, Format::Json);
        let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed[0]["value"].as_f64(), Some(0.1));
        assert!(parsed[0]["gap"].is_null());
        assert!(parsed[1]["value"].is_null());
        assert_eq!(parsed[1]["name"], "a,b");
    }

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, 5e-324, 1.7976931348623157e308, -2.5e-7] {
            assert_eq!(float(x).parse::<f64>().unwrap(), x);
        }
    }
}
