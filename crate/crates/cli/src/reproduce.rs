//! Published figures next to recomputed ones for the built-in datasets.

use bintab_core::constraints::{build_h, targets_from_pmf, MarginMode};
use bintab_core::datasets::{reference as refv, Dataset};
use bintab_core::geometry::{enumerate_vertices, polytope_dimension, VertexSet};
use bintab_core::loglinear::{corner_params, zero_mean_params, DEFAULT_EPS};
use bintab_core::numeric::{parse_rational, rational_to_f64};
use bintab_core::table::{axis_pairs, ExactPmf};
use serde_json::{json, Value};

use crate::commands::Output;
use crate::error::CliResult;
use crate::render::{grid, pair_key};

/// Rounding used for the four-way moments, whose vertex count is pinned to it.
const WATER_DIGITS: u32 = 3;

struct Section {
    title: String,
    rows: Vec<(String, f64, f64)>,
}

impl Section {
    fn new(title: impl Into<String>) -> Self {
        Section {
            title: title.into(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, label: impl Into<String>, reference: f64, computed: f64) {
        self.rows.push((label.into(), reference, computed));
    }
}

fn cell_label(k: usize, d: usize) -> String {
    format!("p{:0d$b}", k, d = d)
}

/// Orders computed vertices to line up with the published rows.
fn align<'a>(v: &'a VertexSet, reference: &[[f64; 8]]) -> Vec<&'a ExactPmf> {
    let mut used = vec![false; v.len()];
    reference
        .iter()
        .filter_map(|r| {
            let best = v
                .vertices()
                .iter()
                .enumerate()
                .filter(|(k, _)| !used[*k])
                .min_by(|a, b| dev(a.1, r).total_cmp(&dev(b.1, r)))?;
            used[best.0] = true;
            Some(best.1)
        })
        .collect()
}

fn dev(p: &ExactPmf, r: &[f64; 8]) -> f64 {
    p.cells()
        .iter()
        .zip(r)
        .map(|(c, x)| (rational_to_f64(c) - x).abs())
        .fold(0.0, f64::max)
}

fn vertex_section(title: &str, v: &VertexSet, reference: &[[f64; 8]]) -> Section {
    let mut s = Section::new(format!(
        "{title} ({} computed, {} published)",
        v.len(),
        reference.len()
    ));
    for (k, (p, r)) in align(v, reference).into_iter().zip(reference).enumerate() {
        for (c, (x, y)) in p.cells().iter().zip(r).enumerate() {
            s.push(
                format!("r{} {}", k + 1, cell_label(c, 3)),
                *y,
                rational_to_f64(x),
            );
        }
    }
    s
}

fn loglinear_section(
    title: &str,
    v: &VertexSet,
    zero_mean: &[[f64; 8]; 2],
    corner: &[[f64; 8]; 2],
) -> CliResult<Section> {
    let mut s = Section::new(format!("{title} (eps = {DEFAULT_EPS:e})"));
    // Each published row is matched to the vertex whose coefficients it is closest to.
    for (name, refs, corner_param) in [("zero-mean", zero_mean, false), ("corner", corner, true)] {
        for (k, r) in refs.iter().enumerate() {
            let candidates: Vec<Vec<f64>> = v
                .vertices()
                .iter()
                .map(|p| {
                    let params = if corner_param {
                        corner_params(p, DEFAULT_EPS)
                    } else {
                        zero_mean_params(p, DEFAULT_EPS)
                    };
                    params.map(|q| q.coefficients().into_iter().map(|(_, x)| x).collect())
                })
                .collect::<Result<_, _>>()?;
            let best = candidates
                .iter()
                .min_by(|a, b| {
                    let da = a
                        .iter()
                        .zip(r)
                        .map(|(x, y)| (x - y).abs())
                        .fold(0.0, f64::max);
                    let db = b
                        .iter()
                        .zip(r)
                        .map(|(x, y)| (x - y).abs())
                        .fold(0.0, f64::max);
                    da.total_cmp(&db)
                })
                .expect("non-empty vertex set");
            let labels = ["λ", "λ1", "λ2", "λ3", "λ12", "λ13", "λ23", "λ123"];
            for ((l, x), y) in labels.iter().zip(best).zip(r) {
                s.push(format!("{name} r{} {l}", k + 1), *y, *x);
            }
        }
    }
    Ok(s)
}

fn example1(digits: u32) -> CliResult<Vec<Section>> {
    let p = Dataset::Example1.pmf();
    let mut ors = Section::new("marginal odds ratios of the example table");
    for ((i, j), r) in axis_pairs(3).zip(refv::EXAMPLE1_ODDS_RATIOS) {
        ors.push(
            format!("ω{}", pair_key(i, j)),
            r,
            p.marginal_odds_ratio(i, j)?.to_f64(),
        );
    }
    let t3 = targets_from_pmf(&p, 3, MarginMode::Uniform)?;
    let mut mus = Section::new("uniform-margin moments at 3 digits");
    for (((i, j), mu), r) in t3.moments().zip(refv::EXAMPLE1_MOMENTS) {
        mus.push(
            format!("μ{}", pair_key(i, j)),
            rational_to_f64(&parse_rational(r)?),
            rational_to_f64(mu),
        );
    }
    let uniform = enumerate_vertices(&build_h(&targets_from_pmf(
        &p,
        digits,
        MarginMode::Uniform,
    )?))?;
    let observed = enumerate_vertices(&build_h(&targets_from_pmf(
        &p,
        digits,
        MarginMode::Observed,
    )?))?;
    Ok(vec![
        ors,
        mus,
        vertex_section(
            &format!("extreme pmfs, uniform margins, {digits}-digit moments"),
            &uniform,
            &refv::EXAMPLE1_UNIFORM_VERTICES,
        ),
        loglinear_section(
            "log-linear coefficients of the uniform-margin extreme pmfs",
            &uniform,
            &refv::EXAMPLE1_ZERO_MEAN,
            &refv::EXAMPLE1_CORNER,
        )?,
        vertex_section(
            &format!("extreme pmfs, observed margins, {digits}-digit moments"),
            &observed,
            &refv::EXAMPLE1_OBSERVED_VERTICES,
        ),
    ])
}

fn water() -> CliResult<Vec<Section>> {
    let p = Dataset::Water.pmf();
    let t = targets_from_pmf(&p, WATER_DIGITS, MarginMode::Uniform)?;
    let mut pairs = Section::new(format!(
        "marginal odds ratios and uniform-margin moments at {WATER_DIGITS} digits"
    ));
    for ((i, j), or, mu) in refv::WATER_PAIRS {
        pairs.push(
            format!("ω{i}{j}"),
            or,
            p.marginal_odds_ratio(i - 1, j - 1)?.to_f64(),
        );
        pairs.push(
            format!("μ{i}{j}"),
            rational_to_f64(&parse_rational(mu)?),
            rational_to_f64(t.moment(i - 1, j - 1)),
        );
    }
    let h = build_h(&t);
    let v = enumerate_vertices(&h)?;
    let mut count = Section::new(format!(
        "extreme pmfs (polytope dimension {})",
        polytope_dimension(&h)?
    ));
    count.push("count", refv::WATER_VERTEX_COUNT as f64, v.len() as f64);
    Ok(vec![pairs, count])
}

fn raters(digits: u32) -> CliResult<Vec<Section>> {
    let p = Dataset::Raters.pmf();
    let mut table = Section::new("rater pmf");
    for (k, (c, r)) in p.cells().iter().zip(refv::RATERS_PMF).enumerate() {
        table.push(cell_label(k, 3), r, rational_to_f64(c));
    }
    let mut ors = Section::new("marginal and three-way odds ratios");
    for ((i, j), r) in axis_pairs(3).zip(refv::RATERS_ODDS_RATIOS) {
        ors.push(
            format!("ω{}", pair_key(i, j)),
            r,
            p.marginal_odds_ratio(i, j)?.to_f64(),
        );
    }
    ors.push(
        "ω123",
        refv::RATERS_TOP_ORDER,
        p.top_order_odds_ratio().to_f64(),
    );
    let v = enumerate_vertices(&build_h(&targets_from_pmf(
        &p,
        digits,
        MarginMode::Uniform,
    )?))?;
    Ok(vec![
        table,
        ors,
        vertex_section(
            &format!("extreme pmfs, uniform margins, {digits}-digit moments"),
            &v,
            &refv::RATERS_VERTICES,
        ),
        loglinear_section(
            "log-linear coefficients of the extreme pmfs",
            &v,
            &refv::RATERS_ZERO_MEAN,
            &refv::RATERS_CORNER,
        )?,
    ])
}

pub fn reproduce(example: Dataset, digits: u32) -> CliResult<Output> {
    let sections = match example {
        Dataset::Example1 => example1(digits)?,
        Dataset::Water => water()?,
        Dataset::Raters => raters(digits)?,
    };
    let mut text = String::new();
    let mut json_sections = Vec::new();
    for s in &sections {
        text.push_str(&format!("== {}\n", s.title));
        let header: Vec<String> = ["entry", "published", "computed", "deviation"]
            .iter()
            .map(|h| h.to_string())
            .collect();
        let rows: Vec<Vec<String>> = s
            .rows
            .iter()
            .map(|(l, r, c)| {
                vec![
                    l.clone(),
                    format!("{r:.4}"),
                    format!("{c:.4}"),
                    format!("{:.1e}", (c - r).abs()),
                ]
            })
            .collect();
        text.push_str(&grid(&header, &rows));
        text.push('\n');
        json_sections.push(json!({
            "title": s.title,
            "rows": s.rows.iter().map(|(l, r, c)| json!({"entry": l, "published": r, "computed": c, "deviation": (c - r).abs()})).collect::<Vec<Value>>(),
        }));
    }
    Ok(Output {
        text,
        json: json!({"example": example.name(), "sections": json_sections}),
    })
}
