//! Field-map and summary serialization.
//!
//! CSV layout is fixed: header `x_m,y_m,z_m,re,im,abs`, one row per grid
//! point in scan order, LF line endings, every float written with 17
//! significant digits so that reading it back is lossless.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;

use super::config::FieldFormat;
use crate::error::{Error, Result};
use crate::field_engine::FieldMap;
use crate::geometry::Point3;

pub const CSV_HEADER: &str = "x_m,y_m,z_m,re,im,abs";

/// 17 significant digits in scientific notation.
fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn field_map_csv(map: &FieldMap) -> Result<String> {
    if map.values.is_empty() {
        return Err(Error::invalid("refusing to write an empty field map"));
    }
    if map.values.len() != map.grid.len() {
        return Err(Error::invalid(format!(
            "field map has {} values for {} grid points",
            map.values.len(),
            map.grid.len()
        )));
    }
    let mut out = String::with_capacity(map.values.len() * 150);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for (i, v) in map.values.iter().enumerate() {
        let p = map.point(i);
        let row = [p.x, p.y, p.z, v.re, v.im, v.norm()].map(fmt17).join(",");
        writeln!(out, "{row}").expect("writing to a String cannot fail");
    }
    Ok(out)
}

/// Pretty JSON with a trailing newline. Key order follows struct field order.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| Error::invalid(format!("JSON serialization failed: {e}")))?;
    s.push('\n');
    Ok(s)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn write_field_map(map: &FieldMap, path: &Path, format: FieldFormat) -> Result<()> {
    let text = match format {
        FieldFormat::Csv => field_map_csv(map)?,
        FieldFormat::Json => {
            if map.values.is_empty() {
                return Err(Error::invalid("refusing to write an empty field map"));
            }
            to_json(map)?
        }
    };
    write_file(path, &text)
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    write_file(path, &to_json(value)?)
}

pub fn write_summary(summary: &super::run::RunSummary, path: &Path) -> Result<()> {
    write_json(summary, path)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CsvRow {
    pub position: Point3,
    pub value: Complex64,
    pub abs: f64,
}

pub fn parse_field_csv(text: &str) -> Result<Vec<CsvRow>> {
    let mut lines = text.split('\n');
    if lines.next() != Some(CSV_HEADER) {
        return Err(Error::invalid("field CSV: missing or wrong header"));
    }
    let mut rows = Vec::new();
    for (n, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let vals = line
            .split(',')
            .map(str::parse::<f64>)
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::invalid(format!("field CSV row {}: {e}", n + 1)))?;
        let [x, y, z, re, im, abs] = vals[..] else {
            return Err(Error::invalid(format!("field CSV row {}: expected 6 columns", n + 1)));
        };
        rows.push(CsvRow {
            position: Point3::new(x, y, z),
            value: Complex64::new(re, im),
            abs,
        });
    }
    Ok(rows)
}

pub fn read_field_csv(path: &Path) -> Result<Vec<CsvRow>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_field_csv(&text)
}
