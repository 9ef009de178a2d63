//! JSON shapes and text formatting shared by the subcommands.

use std::collections::BTreeMap;
use std::fs;

use bintab_core::constraints::{build_h, MarginTargets};
use bintab_core::geometry::VertexSet;
use bintab_core::numeric::{format_rational, parse_rational, rational_to_f64, Rational};
use bintab_core::table::{ExactPmf, OddsRatio};
use serde_json::{json, Map, Value};

use crate::error::{CliError, CliResult};

/// How exact quantities are shown in text output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Precision {
    /// Exact fractions.
    Rational,
    /// Decimals.
    Float,
}

/// `x` rounded to `places` decimals, as a JSON number.
pub fn decimal(x: f64, places: usize) -> Value {
    let rounded: f64 = format!("{x:.places$}").parse().unwrap_or(x);
    json!(rounded)
}

pub fn pair_key(i: usize, j: usize) -> String {
    format!("{}{}", i + 1, j + 1)
}

pub fn show(r: &Rational, precision: Precision, places: usize) -> String {
    match precision {
        Precision::Rational => format_rational(r),
        Precision::Float => format!("{:.places$}", rational_to_f64(r)),
    }
}

pub fn show_odds(or: &OddsRatio<Rational>, places: usize) -> String {
    match or {
        OddsRatio::Finite(v) => format!("{:.places$}", rational_to_f64(v)),
        OddsRatio::Infinite => "inf".into(),
        OddsRatio::Undefined => "undefined".into(),
    }
}

pub fn odds_json(or: &OddsRatio<Rational>) -> Value {
    match or {
        OddsRatio::Finite(v) => json!(rational_to_f64(v)),
        OddsRatio::Infinite => json!("inf"),
        OddsRatio::Undefined => Value::Null,
    }
}

pub fn targets_json(t: &MarginTargets) -> Value {
    let moments: Map<String, Value> = t
        .moments()
        .map(|((i, j), m)| (pair_key(i, j), json!(format_rational(m))))
        .collect();
    json!({
        "d": t.dim(),
        "univariate": t.univariate().iter().map(format_rational).collect::<Vec<_>>(),
        "moments": moments,
    })
}

pub fn targets_from_json(v: &Value, input: &str) -> CliResult<MarginTargets> {
    let bad = |m: &str| CliError::parse(input, None, m.to_string());
    let uni = v
        .get("univariate")
        .and_then(Value::as_array)
        .ok_or_else(|| bad("targets need a \"univariate\" array"))?
        .iter()
        .map(|x| {
            x.as_str()
                .ok_or_else(|| bad("margins must be strings"))
                .and_then(|s| parse_rational(s).map_err(|e| bad(&e.to_string())))
        })
        .collect::<CliResult<Vec<Rational>>>()?;
    let d = uni.len();
    let mut moments = BTreeMap::new();
    let obj = v
        .get("moments")
        .and_then(Value::as_object)
        .ok_or_else(|| bad("targets need a \"moments\" object"))?;
    for (key, val) in obj {
        let digits: Vec<usize> = key
            .chars()
            .filter_map(|c| c.to_digit(10))
            .map(|x| x as usize)
            .collect();
        let [i, j] = digits[..] else {
            return Err(bad(&format!("moment key {key:?} must name two axes")));
        };
        if i == 0 || j == 0 || i > d || j > d {
            return Err(bad(&format!("moment key {key:?} out of range")));
        }
        let s = val.as_str().ok_or_else(|| bad("moments must be strings"))?;
        moments.insert(
            (i - 1, j - 1),
            parse_rational(s).map_err(|e| bad(&e.to_string()))?,
        );
    }
    Ok(MarginTargets::new(uni, moments)?)
}

pub fn pmf_json(p: &ExactPmf, places: usize) -> Value {
    json!({
        "exact": p.cells().iter().map(format_rational).collect::<Vec<_>>(),
        "decimal": p.cells().iter().map(|c| decimal(rational_to_f64(c), places)).collect::<Vec<_>>(),
    })
}

/// Canonical vertex-set document.
pub fn vertex_set_json(
    targets: &MarginTargets,
    v: &VertexSet,
    dimension: usize,
    places: usize,
) -> Value {
    json!({
        "d": targets.dim(),
        "count": v.len(),
        "dimension": dimension,
        "targets": targets_json(targets),
        "vertices": v.vertices().iter().map(|r| pmf_json(r, places)).collect::<Vec<_>>(),
    })
}

pub fn load_vertex_set(path: &str) -> CliResult<(MarginTargets, VertexSet)> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_string(),
        source,
    })?;
    let v: Value =
        serde_json::from_str(&text).map_err(|e| CliError::parse(path, None, e.to_string()))?;
    vertex_set_from_json(&v, path)
}

pub fn vertex_set_from_json(v: &Value, input: &str) -> CliResult<(MarginTargets, VertexSet)> {
    let targets = targets_from_json(
        v.get("targets")
            .ok_or_else(|| CliError::parse(input, None, "missing \"targets\""))?,
        input,
    )?;
    let d = targets.dim();
    let list = v
        .get("vertices")
        .and_then(Value::as_array)
        .ok_or_else(|| CliError::parse(input, None, "missing \"vertices\" array"))?;
    let mut vertices = Vec::with_capacity(list.len());
    for (k, item) in list.iter().enumerate() {
        let cells = item
            .get("exact")
            .and_then(Value::as_array)
            .ok_or_else(|| CliError::parse(input, None, format!("vertex {k} lacks exact cells")))?
            .iter()
            .enumerate()
            .map(|(c, x)| {
                x.as_str()
                    .and_then(|s| parse_rational(s).ok())
                    .ok_or_else(|| {
                        CliError::parse(
                            input,
                            Some(c),
                            format!("vertex {k}: cell is not an exact number"),
                        )
                    })
            })
            .collect::<CliResult<Vec<Rational>>>()?;
        vertices.push(ExactPmf::new(d, cells)?);
    }
    let set = VertexSet::new(build_h(&targets), vertices)?;
    Ok((targets, set))
}

/// Right-aligned table with a header row.
pub fn grid(header: &[String], rows: &[Vec<String>]) -> String {
    let cols = header.len();
    let width: Vec<usize> = (0..cols)
        .map(|c| {
            rows.iter()
                .map(|r| r[c].chars().count())
                .chain([header[c].chars().count()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let line = |cells: &[String]| {
        cells
            .iter()
            .enumerate()
            .map(|(c, s)| format!("{s:>w$}", w = width[c]))
            .collect::<Vec<_>>()
            .join("  ")
    };
    let mut out = line(header);
    out.push('\n');
    for r in rows {
        out.push_str(&line(r));
        out.push('\n');
    }
    out
}

pub fn cell_header(d: usize) -> Vec<String> {
    (0..1usize << d)
        .map(|k| format!("p{:0d$b}", k, d = d))
        .collect()
}
