//! Test-only oracles, written independently of the library's linear algebra.
#![allow(dead_code)]

use bintab_core::numeric::{int, Rational};
use bintab_core::prelude::*;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

/// Solves the square-or-tall system `a x = b` by Gauss-Jordan elimination.
/// Returns `None` unless the solution exists and is unique.
pub fn solve_unique(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut m: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .map(|(r, v)| {
            let mut r = r.clone();
            r.push(v.clone());
            r
        })
        .collect();
    let mut pivot_row = 0;
    for c in 0..cols {
        let Some(p) = (pivot_row..rows).find(|&r| !m[r][c].is_zero()) else {
            return None;
        };
        m.swap(pivot_row, p);
        let inv = Rational::one() / &m[pivot_row][c];
        for x in m[pivot_row].iter_mut() {
            *x = &*x * &inv;
        }
        for r in 0..rows {
            if r != pivot_row && !m[r][c].is_zero() {
                let f = m[r][c].clone();
                for k in 0..=cols {
                    let delta = &f * &m[pivot_row][k];
                    m[r][k] = &m[r][k] - delta;
                }
            }
        }
        pivot_row += 1;
    }
    // Remaining rows must read 0 = 0.
    if m[pivot_row..].iter().any(|r| !r[cols].is_zero()) {
        return None;
    }
    Some((0..cols).map(|c| m[c][cols].clone()).collect())
}

/// Vertices of `{p >= 0 : H p = 0, sum p = 1}` by trying every support:
/// a point is a vertex iff it is the unique solution on its own support.
pub fn brute_force_vertices(h: &ConstraintMatrix) -> Vec<Vec<Rational>> {
    let n = h.ncols();
    let mut system: Vec<Vec<Rational>> = h.rows().to_vec();
    system.push(vec![int(1); n]);
    let mut rhs = vec![int(0); h.rows().len()];
    rhs.push(int(1));
    let mut out = Vec::new();
    for mask in 1usize..(1 << n) {
        let support: Vec<usize> = (0..n).filter(|&c| mask & (1 << c) != 0).collect();
        let a: Vec<Vec<Rational>> = system
            .iter()
            .map(|r| support.iter().map(|&c| r[c].clone()).collect())
            .collect();
        if let Some(x) = solve_unique(&a, &rhs) {
            if x.iter().all(|v| v.is_positive()) {
                let mut full = vec![int(0); n];
                for (&c, v) in support.iter().zip(x) {
                    full[c] = v;
                }
                out.push(full);
            }
        }
    }
    out.sort();
    out
}

pub fn sorted_cells(v: &VertexSet) -> Vec<Vec<Rational>> {
    let mut cells: Vec<Vec<Rational>> = v.vertices().iter().map(|p| p.cells().to_vec()).collect();
    cells.sort();
    cells
}

/// Symmetrizing nonnegative integer weights against their reversal gives
/// uniform univariate margins.
pub fn uniform_margin_pmf(d: usize, weights: &[u32]) -> ExactPmf {
    let n = 1 << d;
    let cells: Vec<Rational> = (0..n)
        .map(|k| int(i64::from(weights[k] + weights[n - 1 - k])))
        .collect();
    ExactPmf::normalized(d, cells).expect("positive total")
}

/// Weight vectors for `uniform_margin_pmf`, never all zero.
pub fn weights(d: usize, max: u32) -> impl Strategy<Value = Vec<u32>> {
    prop::collection::vec(0..=max, 1 << d).prop_filter("nonzero", |w| w.iter().any(|x| *x > 0))
}

/// Strictly positive general pmf.
pub fn positive_pmf(d: usize) -> impl Strategy<Value = ExactPmf> {
    prop::collection::vec(1u32..=50, 1 << d).prop_map(move |w| {
        ExactPmf::normalized(d, w.into_iter().map(|x| int(i64::from(x))).collect()).unwrap()
    })
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Uniform-margin targets taken exactly from a pmf with uniform margins.
pub fn exact_uniform_targets(p: &ExactPmf) -> MarginTargets {
    let moments = bintab_core::table::axis_pairs(p.dim())
        .map(|(i, j)| p.second_moment(i, j).unwrap())
        .collect();
    MarginTargets::uniform(p.dim(), moments).unwrap()
}
