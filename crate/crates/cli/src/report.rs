//! Structured command output and its three renderings.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde_json::{json, Map, Value};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Real(f64),
    Int(u64),
    Complex(Complex64),
    Text(String),
}

impl Cell {
    fn text(&self) -> String {
        match self {
            Cell::Real(x) => format_real(*x),
            Cell::Int(n) => n.to_string(),
            Cell::Complex(z) => {
                // Parts far below the modulus are rounding residue.
                let clean = |p: f64| if p.abs() <= 1e-12 * z.norm() { 0.0 } else { p };
                let (re, im) = (clean(z.re), clean(z.im));
                format!(
                    "{}{}{}i",
                    format_real(re),
                    if im < 0.0 { "-" } else { "+" },
                    format_real(im.abs())
                )
            }
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Real(x) => json!(x),
            Cell::Int(n) => json!(n),
            Cell::Complex(z) => json!([z.re, z.im]),
            Cell::Text(s) => json!(s),
        }
    }
}

fn format_real(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    if x != 0.0 && x.abs() < 1e-4 {
        format!("{x:.3e}")
    } else {
        format!("{x:.6}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub rows: Vec<String>,
    pub columns: Vec<String>,
    pub cells: Vec<Vec<Cell>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Item {
    Value { key: String, value: Cell },
    Table(Table),
    Note(String),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub title: String,
    pub items: Vec<Item>,
}

impl Report {
    pub fn new(title: impl Into<String>) -> Self {
        Report {
            title: title.into(),
            items: Vec::new(),
        }
    }

    pub fn value(&mut self, key: impl Into<String>, value: Cell) {
        self.items.push(Item::Value {
            key: key.into(),
            value,
        });
    }

    pub fn real(&mut self, key: impl Into<String>, x: f64) {
        self.value(key, Cell::Real(x));
    }

    pub fn text(&mut self, key: impl Into<String>, s: impl Into<String>) {
        self.value(key, Cell::Text(s.into()));
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.items.push(Item::Note(s.into()));
    }

    pub fn table<R, C>(
        &mut self,
        name: impl Into<String>,
        rows: R,
        columns: C,
        cells: Vec<Vec<Cell>>,
    ) where
        R: IntoIterator,
        R::Item: Into<String>,
        C: IntoIterator,
        C::Item: Into<String>,
    {
        self.items.push(Item::Table(Table {
            name: name.into(),
            rows: rows.into_iter().map(Into::into).collect(),
            columns: columns.into_iter().map(Into::into).collect(),
            cells,
        }));
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Table => self.render_text(),
            Format::Csv => self.render_csv(),
            Format::Json => {
                let mut s =
                    serde_json::to_string_pretty(&self.to_json()).expect("report serializes");
                s.push('\n');
                s
            }
        }
    }

    fn render_text(&self) -> String {
        let mut out = format!("== {} ==\n", self.title);
        let width = self
            .items
            .iter()
            .filter_map(|i| match i {
                Item::Value { key, .. } => Some(key.len()),
                _ => None,
            })
            .max()
            .unwrap_or(0);
        for item in &self.items {
            match item {
                Item::Value { key, value } => {
                    let _ = writeln!(out, "{key:<width$}  {}", value.text());
                }
                Item::Note(n) => {
                    let _ = writeln!(out, "note: {n}");
                }
                Item::Table(t) => {
                    let _ = writeln!(out, "\n{}", t.name);
                    let texts: Vec<Vec<String>> = t
                        .cells
                        .iter()
                        .map(|r| r.iter().map(Cell::text).collect())
                        .collect();
                    let lw = t.rows.iter().map(String::len).max().unwrap_or(0);
                    let cw = texts
                        .iter()
                        .flatten()
                        .map(String::len)
                        .chain(t.columns.iter().map(String::len))
                        .max()
                        .unwrap_or(0);
                    let _ = write!(out, "{:lw$}", "");
                    for c in &t.columns {
                        let _ = write!(out, "  {c:>cw$}");
                    }
                    out.push('\n');
                    for (label, row) in t.rows.iter().zip(&texts) {
                        let _ = write!(out, "{label:<lw$}");
                        for c in row {
                            let _ = write!(out, "  {c:>cw$}");
                        }
                        out.push('\n');
                    }
                }
            }
        }
        out
    }

    fn render_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut rec = |r: [&str; 4]| w.write_record(r).expect("in-memory write");
        rec(["item", "row", "column", "value"]);
        for item in &self.items {
            match item {
                Item::Value { key, value } => rec([key, "", "", &value.text()]),
                Item::Note(n) => rec(["note", "", "", n]),
                Item::Table(t) => {
                    for (label, row) in t.rows.iter().zip(&t.cells) {
                        for (col, cell) in t.columns.iter().zip(row) {
                            rec([&t.name, label, col, &cell.text()]);
                        }
                    }
                }
            }
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 output")
    }

    fn to_json(&self) -> Value {
        let mut values = Map::new();
        let mut tables = Map::new();
        let mut notes = Vec::new();
        for item in &self.items {
            match item {
                Item::Value { key, value } => {
                    values.insert(key.clone(), value.json());
                }
                Item::Note(n) => notes.push(json!(n)),
                Item::Table(t) => {
                    let cells: Vec<Value> = t
                        .cells
                        .iter()
                        .map(|r| Value::Array(r.iter().map(Cell::json).collect()))
                        .collect();
                    tables.insert(
                        t.name.clone(),
                        json!({ "rows": t.rows, "columns": t.columns, "values": cells }),
                    );
                }
            }
        }
        json!({ "command": self.title, "values": values, "tables": tables, "notes": notes })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    /// Aligned human-readable tables.
    #[default]
    Table,
    Csv,
    Json,
}
