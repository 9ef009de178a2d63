//! Reading and writing tables as JSON or CSV.
//!
//! JSON: `{"d": 3, "kind": "counts" | "probabilities", "cells": [...], "labels": [...]}`.
//! Cells may be JSON numbers or exact strings such as `"97/500"`. `kind` and
//! `labels` are optional.
//!
//! CSV: header `x1,...,xd,value` in any column order, one row per cell, rows
//! in any order.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use bintab_core::datasets::Dataset;
use bintab_core::numeric::{format_rational, parse_rational, rationalize, Rational};
use bintab_core::table::{Configuration, ExactPmf, MAX_DIM};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};

/// Probabilities may miss unit mass by this much before exact normalization.
pub const MASS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Counts,
    Probabilities,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableDocument {
    pub d: usize,
    pub kind: Kind,
    /// Raw values in lexicographic cell order.
    pub cells: Vec<Rational>,
    pub labels: Option<Vec<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(format!("unknown format {other:?} (expected json or csv)")),
        }
    }
}

impl TableDocument {
    pub fn from_dataset(ds: Dataset) -> Self {
        let (kind, cells) = match ds.counts() {
            Some(c) => (
                Kind::Counts,
                c.iter()
                    .map(|&n| Rational::from_integer(n.into()))
                    .collect(),
            ),
            None => (Kind::Probabilities, ds.pmf().into_cells()),
        };
        TableDocument {
            d: ds.dim(),
            kind,
            cells,
            labels: Some(ds.labels().iter().map(|s| s.to_string()).collect()),
        }
    }

    /// `builtin:NAME`, or a path ending in `.json` or `.csv`.
    pub fn load(input: &str) -> CliResult<Self> {
        if let Some(name) = input.strip_prefix("builtin:") {
            return Ok(Self::from_dataset(name.parse()?));
        }
        let text = fs::read_to_string(input).map_err(|source| CliError::Read {
            path: input.to_string(),
            source,
        })?;
        match format_of(input)? {
            Format::Json => Self::from_json(input, &text),
            Format::Csv => Self::from_csv(input, &text),
        }
    }

    pub fn from_json(input: &str, text: &str) -> CliResult<Self> {
        let v: Value =
            serde_json::from_str(text).map_err(|e| CliError::parse(input, None, e.to_string()))?;
        let cells_json = v
            .get("cells")
            .and_then(Value::as_array)
            .ok_or_else(|| CliError::parse(input, None, "missing \"cells\" array"))?;
        let cells = cells_json
            .iter()
            .enumerate()
            .map(|(k, c)| json_number(c).map_err(|m| CliError::parse(input, Some(k), m)))
            .collect::<CliResult<Vec<_>>>()?;
        let d = match v.get("d") {
            Some(d) => d
                .as_u64()
                .ok_or_else(|| CliError::parse(input, None, "\"d\" must be a positive integer"))?
                as usize,
            None => dim_from_len(input, cells.len())?,
        };
        let kind = match v.get("kind").and_then(Value::as_str) {
            Some("counts") => Some(Kind::Counts),
            Some("probabilities") => Some(Kind::Probabilities),
            Some(other) => {
                return Err(CliError::parse(
                    input,
                    None,
                    format!("unknown kind {other:?}"),
                ))
            }
            None => None,
        };
        let labels = match v.get("labels") {
            None | Some(Value::Null) => None,
            Some(Value::Array(a)) => Some(
                a.iter()
                    .map(|s| {
                        s.as_str()
                            .map(str::to_string)
                            .ok_or_else(|| CliError::parse(input, None, "labels must be strings"))
                    })
                    .collect::<CliResult<Vec<_>>>()?,
            ),
            Some(_) => return Err(CliError::parse(input, None, "labels must be an array")),
        };
        Self::validated(input, d, kind, cells, labels)
    }

    pub fn from_csv(input: &str, text: &str) -> CliResult<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = reader
            .headers()
            .map_err(|e| CliError::parse(input, None, e.to_string()))?
            .clone();
        let value_col = headers
            .iter()
            .position(|h| h == "value")
            .ok_or_else(|| CliError::parse(input, None, "missing \"value\" column"))?;
        let mut axis_cols: Vec<(usize, usize)> = Vec::new();
        for (col, h) in headers.iter().enumerate() {
            if col == value_col {
                continue;
            }
            let axis = h
                .strip_prefix('x')
                .and_then(|n| n.parse::<usize>().ok())
                .filter(|&n| n >= 1)
                .ok_or_else(|| CliError::parse(input, None, format!("unexpected column {h:?}")))?;
            axis_cols.push((axis - 1, col));
        }
        let d = axis_cols.len();
        if !(2..=MAX_DIM).contains(&d) || axis_cols.iter().any(|&(a, _)| a >= d) {
            return Err(CliError::parse(
                input,
                None,
                "axis columns must be exactly x1..xd with 2 <= d",
            ));
        }
        let mut found: BTreeMap<usize, Rational> = BTreeMap::new();
        for (row, record) in reader.records().enumerate() {
            let record = record
                .map_err(|e| CliError::parse(input, None, format!("row {}: {e}", row + 1)))?;
            let mut bits = vec![0u8; d];
            for &(axis, col) in &axis_cols {
                bits[axis] = match record.get(col) {
                    Some("0") => 0,
                    Some("1") => 1,
                    other => {
                        return Err(CliError::parse(
                            input,
                            None,
                            format!(
                                "row {}: x{} must be 0 or 1, got {other:?}",
                                row + 1,
                                axis + 1
                            ),
                        ))
                    }
                };
            }
            let cell = Configuration::new(bits)?.index();
            let raw = record.get(value_col).unwrap_or_default();
            let value = parse_rational(raw).map_err(|_| {
                CliError::parse(input, Some(cell), format!("cannot read value {raw:?}"))
            })?;
            if found.insert(cell, value).is_some() {
                return Err(CliError::parse(
                    input,
                    Some(cell),
                    "duplicate configuration",
                ));
            }
        }
        let n = 1usize << d;
        if let Some(missing) = (0..n).find(|k| !found.contains_key(k)) {
            return Err(CliError::parse(
                input,
                Some(missing),
                "missing configuration",
            ));
        }
        Self::validated(input, d, None, found.into_values().collect(), None)
    }

    fn validated(
        input: &str,
        d: usize,
        kind: Option<Kind>,
        cells: Vec<Rational>,
        labels: Option<Vec<String>>,
    ) -> CliResult<Self> {
        if !(2..=MAX_DIM).contains(&d) {
            return Err(CliError::parse(
                input,
                None,
                format!("d must be between 2 and {MAX_DIM}, got {d}"),
            ));
        }
        if cells.len() != 1 << d {
            return Err(CliError::parse(
                input,
                None,
                format!(
                    "expected {} cells for d = {d}, found {}",
                    1 << d,
                    cells.len()
                ),
            ));
        }
        if let Some(k) = cells.iter().position(|c| c.is_negative()) {
            return Err(CliError::parse(input, Some(k), "negative value"));
        }
        if labels.as_ref().is_some_and(|l| l.len() != d) {
            return Err(CliError::parse(input, None, format!("expected {d} labels")));
        }
        let total: Rational = cells.iter().sum();
        let near_one = (total.to_f64().unwrap_or(f64::NAN) - 1.0).abs() <= MASS_TOL;
        let all_integer = cells.iter().all(|c| c.is_integer());
        let kind = match kind {
            Some(k) => k,
            None if near_one => Kind::Probabilities,
            None if all_integer => Kind::Counts,
            None => {
                return Err(CliError::parse(
                    input,
                    None,
                    "values are neither integer counts nor probabilities summing to 1",
                ))
            }
        };
        match kind {
            Kind::Counts => {
                if let Some(k) = cells.iter().position(|c| !c.is_integer()) {
                    return Err(CliError::parse(input, Some(k), "counts must be integers"));
                }
                if total.is_zero() {
                    return Err(CliError::parse(input, None, "counts sum to zero"));
                }
            }
            Kind::Probabilities => {
                if !near_one {
                    return Err(CliError::parse(
                        input,
                        None,
                        format!(
                            "probabilities sum to {}, not 1 within {MASS_TOL:e}",
                            format_rational(&total)
                        ),
                    ));
                }
            }
        }
        Ok(TableDocument {
            d,
            kind,
            cells,
            labels,
        })
    }

    /// The exact pmf; counts are normalized, probabilities rescaled to unit mass.
    pub fn pmf(&self) -> CliResult<ExactPmf> {
        if self.kind == Kind::Probabilities && self.cells.iter().sum::<Rational>().is_one() {
            return Ok(ExactPmf::new(self.d, self.cells.clone())?);
        }
        Ok(ExactPmf::normalized(self.d, self.cells.clone())?)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "d": self.d,
            "kind": match self.kind { Kind::Counts => "counts", Kind::Probabilities => "probabilities" },
            "cells": self.cells.iter().map(format_rational).collect::<Vec<_>>(),
            "labels": self.labels,
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = (1..=self.d)
            .map(|a| format!("x{a}"))
            .collect::<Vec<_>>()
            .join(",");
        out.push_str(",value\n");
        for (k, c) in self.cells.iter().enumerate() {
            let bits = Configuration::from_index(k, self.d);
            for b in bits.bits() {
                out.push_str(&format!("{b},"));
            }
            out.push_str(&format_rational(c));
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &str) -> CliResult<()> {
        let text = match format_of(path)? {
            Format::Json => {
                serde_json::to_string_pretty(&self.to_json()).expect("serializable") + "\n"
            }
            Format::Csv => self.to_csv(),
        };
        fs::write(path, text).map_err(|source| CliError::Write {
            path: path.to_string(),
            source,
        })
    }
}

pub fn format_of(path: &str) -> CliResult<Format> {
    match Path::new(path).extension().and_then(|e| e.to_str()) {
        Some("json") => Ok(Format::Json),
        Some("csv") => Ok(Format::Csv),
        _ => Err(CliError::Usage(format!(
            "{path}: expected a .json or .csv file, or builtin:NAME"
        ))),
    }
}

fn dim_from_len(input: &str, n: usize) -> CliResult<usize> {
    if n.is_power_of_two() && n >= 4 {
        Ok(n.trailing_zeros() as usize)
    } else {
        Err(CliError::parse(
            input,
            None,
            format!("{n} cells is not 2^d for any d >= 2"),
        ))
    }
}

/// Exact value of a JSON cell: strings are parsed exactly, numbers through
/// their shortest decimal form.
pub fn json_number(v: &Value) -> Result<Rational, String> {
    match v {
        Value::String(s) => parse_rational(s).map_err(|e| e.to_string()),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(Rational::from_integer(i.into()))
            } else if let Some(u) = n.as_u64() {
                Ok(Rational::from_integer(u.into()))
            } else {
                rationalize(n.as_f64().unwrap_or(f64::NAN)).map_err(|e| e.to_string())
            }
        }
        other => Err(format!("expected a number, got {other}")),
    }
}
