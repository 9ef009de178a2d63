use std::fs;
use std::io::Write;

use bintab_core::baselines::ipf_max_entropy;
use bintab_core::constraints::{build_h, targets_from_pmf, MarginMode, MarginTargets};
use bintab_core::geometry::{
    decompose, enumerate_vertices, mixture, polytope_dimension, MixtureWeights, VertexSet,
};
use bintab_core::loglinear::{corner_params, zero_mean_params, LogLinearParams, Parametrization};
use bintab_core::numeric::{format_rational, parse_rational, rational_to_f64, Rational};
use bintab_core::sampling::{sample_dirichlet, sample_hit_and_run, SamplerConfig};
use bintab_core::table::{axis_pairs, ExactPmf, FloatPmf};
use serde_json::{json, Map, Value};

use crate::document::TableDocument;
use crate::error::{CliError, CliResult};
use crate::render::*;

/// Settings shared by every subcommand.
#[derive(Debug, Clone, Copy)]
pub struct Globals {
    pub digits: u32,
    pub precision: Precision,
    pub tol: f64,
    pub seed: u64,
}

/// Text and JSON renderings of a command result.
pub struct Output {
    pub text: String,
    pub json: Value,
}

fn targets_for(
    input: &str,
    g: &Globals,
    mode: MarginMode,
) -> CliResult<(TableDocument, MarginTargets)> {
    let doc = TableDocument::load(input)?;
    let t = targets_from_pmf(&doc.pmf()?, g.digits, mode)?;
    Ok((doc, t))
}

pub fn analyze(input: &str) -> CliResult<Output> {
    let doc = TableDocument::load(input)?;
    let p = doc.pmf()?;
    let d = p.dim();
    let mut text = format!(
        "d = {d}, {} cells\n\nunivariate margins P(X_i = 1):\n",
        p.cells().len()
    );
    let mut margins = Vec::new();
    for axis in 0..d {
        let (_, m1) = p.univariate_margin(axis)?;
        text.push_str(&format!("  X{}: {:.6}\n", axis + 1, rational_to_f64(&m1)));
        margins.push(json!(rational_to_f64(&m1)));
    }
    text.push_str("\npair  correlation  odds ratio\n");
    let (mut cors, mut ors) = (Map::new(), Map::new());
    for (i, j) in axis_pairs(d) {
        let cor = p.correlation(i, j).ok();
        let or = p.marginal_odds_ratio(i, j)?;
        let cor_text = cor.map_or("undefined".to_string(), |c| format!("{c:.6}"));
        text.push_str(&format!(
            "{:>4}  {cor_text:>11}  {:>10}\n",
            pair_key(i, j),
            show_odds(&or, 6)
        ));
        cors.insert(pair_key(i, j), cor.map_or(Value::Null, |c| json!(c)));
        ors.insert(pair_key(i, j), odds_json(&or));
    }
    text.push_str("\nconditional odds ratios (pair | remaining coordinates):\n");
    let mut conditional = Vec::new();
    for ((i, j), rest, or) in p.conditional_odds_ratios() {
        let rest_text: String = rest.bits().iter().map(|b| b.to_string()).collect();
        text.push_str(&format!(
            "  {} | {:<width$} {}\n",
            pair_key(i, j),
            rest_text,
            show_odds(&or, 6),
            width = d - 2
        ));
        conditional
            .push(json!({"pair": pair_key(i, j), "rest": rest_text, "odds_ratio": odds_json(&or)}));
    }
    let top = p.top_order_odds_ratio();
    text.push_str(&format!("\ntop-order odds ratio: {}\n", show_odds(&top, 6)));
    let json = json!({
        "d": d,
        "margins": margins,
        "correlations": cors,
        "odds_ratios": ors,
        "conditional_odds_ratios": conditional,
        "top_order_odds_ratio": odds_json(&top),
    });
    Ok(Output { text, json })
}

pub fn targets(input: &str, g: &Globals, mode: MarginMode) -> CliResult<Output> {
    let (doc, t) = targets_for(input, g, mode)?;
    let p = doc.pmf()?;
    let mut text = format!(
        "{mode} margins, moments rounded to {} digits\n\naxis  P(X_i = 1)\n",
        g.digits
    );
    for (axis, m) in t.univariate().iter().enumerate() {
        text.push_str(&format!("{:>4}  {}\n", axis + 1, show(m, g.precision, 6)));
    }
    text.push_str("\npair  odds ratio  moment\n");
    for ((i, j), mu) in t.moments() {
        let or = p.marginal_odds_ratio(i, j)?;
        text.push_str(&format!(
            "{:>4}  {:>10}  {}\n",
            pair_key(i, j),
            show_odds(&or, 4),
            show(mu, g.precision, g.digits as usize)
        ));
    }
    let mut json = targets_json(&t);
    json["margins"] = json!(mode.to_string());
    json["digits"] = json!(g.digits);
    Ok(Output { text, json })
}

pub fn constraints(input: &str, g: &Globals, mode: MarginMode) -> CliResult<Output> {
    let (_, t) = targets_for(input, g, mode)?;
    let h = build_h(&t);
    let rows: Vec<Vec<String>> = h
        .rows()
        .iter()
        .zip(h.labels())
        .map(|(r, l)| {
            std::iter::once(l.to_string())
                .chain(r.iter().map(|x| show(x, g.precision, g.digits as usize)))
                .collect()
        })
        .collect();
    let mut header = vec!["row".to_string()];
    header.extend(cell_header(h.dim()));
    let json = json!({
        "d": h.dim(),
        "labels": h.labels().iter().map(|l| l.to_string()).collect::<Vec<_>>(),
        "rows": h.rows().iter().map(|r| r.iter().map(format_rational).collect::<Vec<_>>()).collect::<Vec<_>>(),
    });
    Ok(Output {
        text: grid(&header, &rows),
        json,
    })
}

fn vertex_rows(v: &VertexSet, g: &Globals, places: usize) -> Vec<Vec<String>> {
    v.vertices()
        .iter()
        .enumerate()
        .map(|(k, r)| {
            std::iter::once(format!("r{}", k + 1))
                .chain(r.cells().iter().map(|c| show(c, g.precision, places)))
                .collect()
        })
        .collect()
}

pub fn vertices(
    input: &str,
    g: &Globals,
    mode: MarginMode,
    output: Option<&str>,
    places: usize,
) -> CliResult<Output> {
    let (_, t) = targets_for(input, g, mode)?;
    let h = build_h(&t);
    let v = enumerate_vertices(&h)?;
    let dimension = polytope_dimension(&h)?;
    let json = vertex_set_json(&t, &v, dimension, places);
    if let Some(path) = output {
        let text = serde_json::to_string_pretty(&json).expect("serializable") + "\n";
        fs::write(path, text).map_err(|source| CliError::Write {
            path: path.to_string(),
            source,
        })?;
    }
    let mut header = vec!["".to_string()];
    header.extend(cell_header(t.dim()));
    let mut text = format!(
        "{} extreme pmfs, polytope dimension {dimension}\n\n",
        v.len()
    );
    text.push_str(&grid(&header, &vertex_rows(&v, g, places)));
    Ok(Output { text, json })
}

fn parse_weights(list: &str) -> CliResult<Vec<Rational>> {
    list.split(',')
        .enumerate()
        .map(|(k, s)| {
            parse_rational(s).map_err(|_| {
                CliError::parse("--weights", Some(k), format!("cannot read weight {s:?}"))
            })
        })
        .collect()
}

pub fn mixture_cmd(vertex_file: &str, weights: &str, g: &Globals) -> CliResult<Output> {
    let (_, v) = load_vertex_set(vertex_file)?;
    let theta = MixtureWeights::new(parse_weights(weights)?)?;
    let p = mixture(&theta, &v)?;
    let mut header = vec!["".to_string()];
    header.extend(cell_header(p.dim()));
    let row = std::iter::once("p".to_string())
        .chain(p.cells().iter().map(|c| show(c, g.precision, 6)))
        .collect();
    Ok(Output {
        text: grid(&header, &[row]),
        json: pmf_json(&p, 12),
    })
}

pub fn decompose_cmd(vertex_file: &str, table: &str, g: &Globals) -> CliResult<Output> {
    let (_, v) = load_vertex_set(vertex_file)?;
    let p = TableDocument::load(table)?.pmf()?;
    let theta = decompose(&p, &v, g.tol)?;
    let rebuilt = mixture(&theta, &v)?;
    let residual = rebuilt
        .cells()
        .iter()
        .zip(p.cells())
        .map(|(a, b)| (a - rational_to_f64(b)).abs())
        .fold(0.0, f64::max);
    let mut text = String::from("vertex  weight\n");
    for (k, t) in theta.theta().iter().enumerate() {
        text.push_str(&format!("{:>6}  {t:.9}\n", format!("r{}", k + 1)));
    }
    text.push_str(&format!("\nmax cell residual {residual:.3e}\n"));
    Ok(Output {
        text,
        json: json!({"weights": theta.theta(), "residual": residual}),
    })
}

fn params_json(p: &LogLinearParams) -> Value {
    let coefficients: Map<String, Value> = p
        .labelled()
        .into_iter()
        .map(|(s, v)| (if s.is_empty() { "∅".to_string() } else { s }, json!(v)))
        .collect();
    json!({"parametrization": p.parametrization().to_string(), "eps": p.eps(), "coefficients": coefficients})
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ParamChoice {
    ZeroMean,
    Corner,
    Both,
}

pub fn loglinear(input: &str, choice: ParamChoice, eps: f64) -> CliResult<Output> {
    let tables: Vec<ExactPmf> = if input.ends_with(".json") && !input.starts_with("builtin:") {
        let text = fs::read_to_string(input).map_err(|source| CliError::Read {
            path: input.to_string(),
            source,
        })?;
        let value: Value =
            serde_json::from_str(&text).map_err(|e| CliError::parse(input, None, e.to_string()))?;
        if value.get("vertices").is_some() {
            vertex_set_from_json(&value, input)?.1.vertices().to_vec()
        } else {
            vec![TableDocument::from_json(input, &text)?.pmf()?]
        }
    } else {
        vec![TableDocument::load(input)?.pmf()?]
    };
    let kinds: &[Parametrization] = match choice {
        ParamChoice::ZeroMean => &[Parametrization::ZeroMean],
        ParamChoice::Corner => &[Parametrization::Corner],
        ParamChoice::Both => &[Parametrization::ZeroMean, Parametrization::Corner],
    };
    let mut text = String::new();
    let mut out = Vec::new();
    for &kind in kinds {
        let mut rows = Vec::new();
        let mut header = vec![String::new()];
        for (k, p) in tables.iter().enumerate() {
            let params = match kind {
                Parametrization::ZeroMean => zero_mean_params(p, eps)?,
                Parametrization::Corner => corner_params(p, eps)?,
            };
            let labelled = params.labelled();
            if header.len() == 1 {
                header.extend(labelled.iter().map(|(s, _)| {
                    if s.is_empty() {
                        "λ".to_string()
                    } else {
                        format!("λ{s}")
                    }
                }));
            }
            let name = if tables.len() == 1 {
                "p".to_string()
            } else {
                format!("r{}", k + 1)
            };
            rows.push(
                std::iter::once(name)
                    .chain(labelled.iter().map(|(_, v)| format!("{v:.2}")))
                    .collect(),
            );
            out.push(params_json(&params));
        }
        text.push_str(&format!("{kind} (eps = {eps:e})\n"));
        text.push_str(&grid(&header, &rows));
        text.push('\n');
    }
    let json = if out.len() == 1 {
        out.remove(0)
    } else {
        Value::Array(out)
    };
    Ok(Output { text, json })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Method {
    Dirichlet,
    HitAndRun,
}

/// Writes JSON lines: a header record, then one draw per line.
pub fn sample(
    input: &str,
    g: &Globals,
    mode: MarginMode,
    method: Method,
    cfg: SamplerConfig,
    mut sink: impl Write,
) -> CliResult<()> {
    let (_, t) = targets_for(input, g, mode)?;
    let h = build_h(&t);
    let v = enumerate_vertices(&h)?;
    let draws: Vec<FloatPmf> = match method {
        Method::Dirichlet => sample_dirichlet(&v, &cfg)?,
        Method::HitAndRun => {
            let n = v.len();
            let centre = MixtureWeights::new(vec![Rational::new(1.into(), n.into()); n])?;
            sample_hit_and_run(&h, &mixture(&centre, &v)?, &cfg)?
        }
    };
    let header = json!({
        "seed": cfg.seed,
        "count": cfg.count,
        "method": match method { Method::Dirichlet => "dirichlet", Method::HitAndRun => "hit-and-run" },
        "burn_in": cfg.burn_in,
        "thinning": cfg.thinning,
        "rng": "ChaCha20 (rand_chacha 0.9, seed_from_u64)",
        "targets": targets_json(&t),
    });
    let io = |source| CliError::Write {
        path: "output".into(),
        source,
    };
    writeln!(sink, "{header}").map_err(io)?;
    for (k, p) in draws.iter().enumerate() {
        writeln!(sink, "{}", json!({"index": k, "cells": p.cells()})).map_err(io)?;
    }
    Ok(())
}

pub fn ipf(input: &str, g: &Globals, mode: MarginMode, max_iter: usize) -> CliResult<Output> {
    let (_, t) = targets_for(input, g, mode)?;
    let r = ipf_max_entropy(&t, g.tol, max_iter)?;
    let lambda_top = zero_mean_params(&r.table, 0.0)
        .ok()
        .map(|p| p.by_mask((1 << t.dim()) - 1));
    let top = r.table.top_order_odds_ratio().to_f64();
    let mut header = vec![String::new()];
    header.extend(cell_header(t.dim()));
    let row = std::iter::once("p".to_string())
        .chain(r.table.cells().iter().map(|c| format!("{c:.6}")))
        .collect();
    let mut text = grid(&header, &[row]);
    text.push_str(&format!(
        "\nconverged: {} after {} sweeps, residual {:.3e}\ntop-order odds ratio {top:.9}\n",
        r.converged, r.iterations, r.final_residual
    ));
    if let Some(l) = lambda_top {
        text.push_str(&format!("highest-order zero-mean coefficient {l:.3e}\n"));
    }
    let json = json!({
        "table": r.table.cells(),
        "iterations": r.iterations,
        "final_residual": r.final_residual,
        "converged": r.converged,
        "history": r.history,
        "top_order_odds_ratio": top,
        "highest_order_coefficient": lambda_top,
    });
    Ok(Output { text, json })
}

pub fn export(input: &str, output: &str) -> CliResult<Output> {
    let doc = TableDocument::load(input)?;
    doc.write(output)?;
    Ok(Output {
        text: format!("wrote {output}\n"),
        json: doc.to_json(),
    })
}
