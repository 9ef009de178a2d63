//! Saturated log-linear coefficients of binary tables.
//!
//! Subsets `S` of the axes are encoded as bitmasks with axis `i` at bit
//! `d - 1 - i`, the same orientation as cell indices, so the subset mask of
//! the cell `1_S` is its cell index.
//!
//! * Zero-mean: `log p_alpha = sum_S lambda^S prod_{i in S} s(alpha_i)` with
//!   `s(1) = +1`, `s(0) = -1`. `lambda^S` is the coefficient at the all-ones
//!   level of `S`; the other levels follow by sign flips, so every index sums
//!   to zero.
//! * Corner: `log p_alpha = sum_{S subset of supp(alpha)} lambda^S`, the
//!   all-zeros cell being the reference.

use std::fmt;

use crate::error::{Error, Result};
use crate::numeric::Scalar;
use crate::table::{FloatPmf, Pmf};

/// Smoothing constant added to every cell before taking logarithms.
pub const DEFAULT_EPS: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parametrization {
    ZeroMean,
    Corner,
}

impl fmt::Display for Parametrization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::ZeroMean => "zero-mean",
            Self::Corner => "corner",
        })
    }
}

impl std::str::FromStr for Parametrization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero-mean" => Ok(Self::ZeroMean),
            "corner" => Ok(Self::Corner),
            other => Err(Error::Domain(format!("unknown parametrization {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogLinearParams {
    d: usize,
    parametrization: Parametrization,
    eps: f64,
    /// Indexed by subset mask.
    lambda: Vec<f64>,
}

impl LogLinearParams {
    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn parametrization(&self) -> Parametrization {
        self.parametrization
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Coefficient for the subset of 0-based `axes` (empty slice: intercept).
    pub fn get(&self, axes: &[usize]) -> f64 {
        self.lambda[subset_mask(axes, self.d)]
    }

    pub fn by_mask(&self, mask: usize) -> f64 {
        self.lambda[mask]
    }

    /// `(axes, coefficient)` ordered by subset size, then lexicographically.
    pub fn coefficients(&self) -> Vec<(Vec<usize>, f64)> {
        subsets_in_order(self.d)
            .into_iter()
            .map(|s| {
                let v = self.get(&s);
                (s, v)
            })
            .collect()
    }

    /// Digit-string subset labels ("" for the intercept, "13" for axes 1 and 3).
    pub fn labelled(&self) -> Vec<(String, f64)> {
        self.coefficients()
            .into_iter()
            .map(|(s, v)| (s.iter().map(|a| (a + 1).to_string()).collect::<String>(), v))
            .collect()
    }
}

pub fn subset_mask(axes: &[usize], d: usize) -> usize {
    axes.iter().fold(0, |m, &a| m | 1 << (d - 1 - a))
}

/// All subsets of `0..d` ordered by size, then lexicographically.
pub fn subsets_in_order(d: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = (0..1usize << d)
        .map(|m| (0..d).filter(|&a| m & (1 << (d - 1 - a)) != 0).collect())
        .collect();
    out.sort_by(|a: &Vec<usize>, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}

fn smoothed_logs<T: Scalar>(p: &Pmf<T>, eps: f64) -> Result<Vec<f64>> {
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::Domain(format!(
            "smoothing constant must be finite and nonnegative, got {eps}"
        )));
    }
    p.cells()
        .iter()
        .enumerate()
        .map(|(index, c)| {
            let v = c.to_f64() + eps;
            if v > 0.0 {
                Ok(v.ln())
            } else {
                Err(Error::NonPositiveCell { index })
            }
        })
        .collect()
}

pub fn zero_mean_params<T: Scalar>(p: &Pmf<T>, eps: f64) -> Result<LogLinearParams> {
    let logs = smoothed_logs(p, eps)?;
    let d = p.dim();
    let n = logs.len();
    // Walsh-Hadamard transform with the +1 sign on level one.
    let mut lambda = logs;
    let mut h = 1;
    while h < n {
        for block in (0..n).step_by(2 * h) {
            for k in block..block + h {
                let (zero, one) = (lambda[k], lambda[k + h]);
                lambda[k] = zero + one;
                lambda[k + h] = one - zero;
            }
        }
        h *= 2;
    }
    for v in lambda.iter_mut() {
        *v /= n as f64;
    }
    Ok(LogLinearParams {
        d,
        parametrization: Parametrization::ZeroMean,
        eps,
        lambda,
    })
}

pub fn corner_params<T: Scalar>(p: &Pmf<T>, eps: f64) -> Result<LogLinearParams> {
    let mut lambda = smoothed_logs(p, eps)?;
    let d = p.dim();
    let n = lambda.len();
    // Moebius inversion over the subset lattice.
    for axis_bit in 0..d {
        let b = 1 << axis_bit;
        for m in 0..n {
            if m & b != 0 {
                lambda[m] -= lambda[m ^ b];
            }
        }
    }
    Ok(LogLinearParams {
        d,
        parametrization: Parametrization::Corner,
        eps,
        lambda,
    })
}

/// Exponentiates the represented log-table and renormalizes to unit mass.
pub fn reconstruct(params: &LogLinearParams) -> FloatPmf {
    let n = params.lambda.len();
    let mut logs = params.lambda.clone();
    match params.parametrization {
        Parametrization::ZeroMean => {
            let mut h = 1;
            while h < n {
                for block in (0..n).step_by(2 * h) {
                    for k in block..block + h {
                        let (zero, one) = (logs[k], logs[k + h]);
                        logs[k] = zero - one;
                        logs[k + h] = zero + one;
                    }
                }
                h *= 2;
            }
        }
        Parametrization::Corner => {
            for axis_bit in 0..params.d {
                let b = 1 << axis_bit;
                for m in 0..n {
                    if m & b != 0 {
                        logs[m] += logs[m ^ b];
                    }
                }
            }
        }
    }
    let peak = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = logs.iter().map(|l| (l - peak).exp()).collect();
    Pmf::normalized(params.d, weights).expect("exponentials are positive")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::parse_rational;
    use crate::table::ExactPmf;

    fn brute_zero_mean(p: &[f64], d: usize, axes: &[usize]) -> f64 {
        let n = p.len();
        (0..n)
            .map(|k| {
                let sign: f64 = axes
                    .iter()
                    .map(|&a| {
                        if crate::table::bit(k, a, d) == 1 {
                            1.0
                        } else {
                            -1.0
                        }
                    })
                    .product();
                sign * p[k].ln()
            })
            .sum::<f64>()
            / n as f64
    }

    #[test]
    fn uniform_table_has_only_an_intercept() {
        for d in 2..6 {
            let p = ExactPmf::uniform(d).unwrap();
            for params in [
                zero_mean_params(&p, 0.0).unwrap(),
                corner_params(&p, 0.0).unwrap(),
            ] {
                for (s, v) in params.coefficients() {
                    let expected = if s.is_empty() {
                        -(d as f64) * 2f64.ln()
                    } else {
                        0.0
                    };
                    assert!((v - expected).abs() < 1e-12, "{s:?} {v}");
                }
            }
        }
    }

    #[test]
    fn transform_matches_direct_sum() {
        let cells: Vec<f64> = (1..=8).map(|k| k as f64 / 36.0).collect();
        let p = Pmf::new(3, cells.clone()).unwrap();
        let params = zero_mean_params(&p, 0.0).unwrap();
        for s in subsets_in_order(3) {
            assert!((params.get(&s) - brute_zero_mean(&cells, 3, &s)).abs() < 1e-12);
        }
        // Corner: lambda^{12} = log p110 - log p100 - log p010 + log p000.
        let corner = corner_params(&p, 0.0).unwrap();
        let l = |k: usize| cells[k].ln();
        assert!((corner.get(&[0, 1]) - (l(6) - l(4) - l(2) + l(0))).abs() < 1e-12);
        assert!((corner.get(&[]) - l(0)).abs() < 1e-12);
    }

    #[test]
    fn zero_cell_without_smoothing_fails() {
        let p = Pmf::new(2, vec![0.0, 0.5, 0.5, 0.0]).unwrap();
        assert_eq!(
            zero_mean_params(&p, 0.0),
            Err(Error::NonPositiveCell { index: 0 })
        );
        assert!(corner_params(&p, 1e-8).is_ok());
        assert!(zero_mean_params(&p, -1.0).is_err());
    }

    #[test]
    fn corner_round_trip_is_exact() {
        let cells = ["0.1", "0.05", "0.3", "0.2", "0.1", "0.05", "0.15", "0.05"]
            .iter()
            .map(|s| parse_rational(s).unwrap())
            .collect();
        let p = ExactPmf::new(3, cells).unwrap();
        let back = reconstruct(&corner_params(&p, 0.0).unwrap());
        for (a, b) in back.cells().iter().zip(p.to_f64().cells()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn labels_use_one_based_digits() {
        let p = FloatPmf::uniform(3).unwrap();
        let labels: Vec<String> = zero_mean_params(&p, 0.0)
            .unwrap()
            .labelled()
            .into_iter()
            .map(|x| x.0)
            .collect();
        assert_eq!(labels, ["", "1", "2", "3", "12", "13", "23", "123"]);
    }
}
