//! Tables and their CSV / newline-delimited JSON encodings. Both encodings
//! are pure functions of the table, so identical inputs give identical bytes.

use std::io::Write;

use serde_json::{Map, Number, Value};

use crate::args::Format;

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    F(f64),
    U(u64),
    S(&'static str),
    B(bool),
    /// Value not available (failed point); empty in CSV, null in JSON.
    Missing,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

/// Shortest round-trip decimal; scientific notation outside [1e-5, 1e16).
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        return "NaN".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let a = v.abs();
    if a == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn csv_field(c: &Cell) -> String {
    match c {
        Cell::F(v) => fmt_f64(*v),
        Cell::U(v) => v.to_string(),
        Cell::S(s) => (*s).to_string(),
        Cell::B(b) => b.to_string(),
        Cell::Missing => String::new(),
    }
}

fn json_value(c: &Cell) -> Value {
    match c {
        Cell::F(v) => Number::from_f64(*v).map_or(Value::Null, Value::Number),
        Cell::U(v) => Value::from(*v),
        Cell::S(s) => Value::from(*s),
        Cell::B(b) => Value::from(*b),
        Cell::Missing => Value::Null,
    }
}

/// Header row then one record per row, LF-terminated, quoted only when needed.
pub fn write_csv<W: Write>(t: &Table, out: W) -> anyhow::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(&t.headers)?;
    for row in &t.rows {
        w.write_record(row.iter().map(csv_field))?;
    }
    w.flush()?;
    Ok(())
}

/// One JSON object per row, keys in column order, one per line.
pub fn write_ndjson<W: Write>(t: &Table, mut out: W) -> anyhow::Result<()> {
    for row in &t.rows {
        let obj: Map<String, Value> = t
            .headers
            .iter()
            .zip(row)
            .map(|(h, c)| ((*h).to_string(), json_value(c)))
            .collect();
        serde_json::to_writer(&mut out, &obj)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_table<W: Write>(t: &Table, format: Format, out: W) -> anyhow::Result<()> {
    match format {
        Format::Csv => write_csv(t, out),
        Format::Json => write_ndjson(t, out),
    }
}
