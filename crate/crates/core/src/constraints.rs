//! Dependence targets and the homogeneous constraint system `H p = 0`.
//!
//! The system has one row per axis fixing the univariate margin and one row
//! per axis pair fixing the second-order moment `mu_ij = P(X_i = 1, X_j = 1)`.
//! Both kinds of row are written so that the right-hand side is zero, which
//! makes the feasible tables a polyhedral cone intersected with the simplex.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::numeric::{int, ratio, round_to_digits, Rational, Scalar};
use crate::table::{axis_pairs, bit, ExactPmf, OddsRatio, Pmf};

/// Default number of decimal places moments are rounded to.
pub const DEFAULT_DIGITS: u32 = 6;

/// How univariate margins are prescribed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MarginMode {
    /// Every margin is (1/2, 1/2).
    Uniform,
    /// Margins are copied from a source table.
    Observed,
}

impl std::str::FromStr for MarginMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Self::Uniform),
            "observed" => Ok(Self::Observed),
            other => Err(Error::Domain(format!("unknown margin mode {other:?}"))),
        }
    }
}

impl fmt::Display for MarginMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Uniform => "uniform",
            Self::Observed => "observed",
        })
    }
}

/// Target univariate margins `P(X_i = 1)` and second-order moments.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginTargets {
    d: usize,
    univariate: Vec<Rational>,
    moments: BTreeMap<(usize, usize), Rational>,
}

impl MarginTargets {
    /// Validates `0 < m_i < 1` and the Fréchet bounds
    /// `max(0, m_i + m_j - 1) <= mu_ij <= min(m_i, m_j)` for every pair.
    pub fn new(
        univariate: Vec<Rational>,
        moments: BTreeMap<(usize, usize), Rational>,
    ) -> Result<Self> {
        let d = univariate.len();
        if d < 2 {
            return Err(Error::DimensionTooSmall(d));
        }
        for (axis, m) in univariate.iter().enumerate() {
            if !(*m > Rational::zero() && *m < Rational::one()) {
                return Err(Error::InfeasibleTargets(format!(
                    "margin of axis {axis} must lie in (0, 1), got {m}"
                )));
            }
        }
        let expected: Vec<(usize, usize)> = axis_pairs(d).collect();
        let given: Vec<(usize, usize)> = moments.keys().copied().collect();
        if given != expected {
            return Err(Error::InvalidConfig(format!(
                "moments must be given for exactly the pairs {expected:?}"
            )));
        }
        for (&(i, j), mu) in &moments {
            let (a, b) = (&univariate[i], &univariate[j]);
            let lower = (a + b - int(1)).max(Rational::zero());
            let upper = a.min(b).clone();
            if *mu < lower || *mu > upper {
                return Err(Error::InfeasibleTargets(format!(
                    "moment of pair ({i}, {j}) is {mu}, outside its Fréchet interval [{lower}, {upper}]"
                )));
            }
        }
        Ok(Self {
            d,
            univariate,
            moments,
        })
    }

    /// Uniform margins with the given moments (pair-lexicographic order).
    pub fn uniform(d: usize, moments: Vec<Rational>) -> Result<Self> {
        let pairs: Vec<_> = axis_pairs(d).collect();
        if moments.len() != pairs.len() {
            return Err(Error::DimensionMismatch {
                expected: pairs.len(),
                found: moments.len(),
            });
        }
        Self::new(
            vec![ratio(1, 2); d],
            pairs.into_iter().zip(moments).collect(),
        )
    }

    /// Uniform margins, every pair independent (`mu_ij = 1/4`).
    pub fn independence(d: usize) -> Result<Self> {
        Self::uniform(d, vec![ratio(1, 4); d * (d - 1) / 2])
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn univariate(&self) -> &[Rational] {
        &self.univariate
    }

    pub fn moment(&self, i: usize, j: usize) -> &Rational {
        let key = if i < j { (i, j) } else { (j, i) };
        &self.moments[&key]
    }

    /// Moments in pair-lexicographic order.
    pub fn moments(&self) -> impl Iterator<Item = ((usize, usize), &Rational)> {
        self.moments.iter().map(|(k, v)| (*k, v))
    }

    pub fn is_uniform(&self) -> bool {
        self.univariate.iter().all(|m| *m == ratio(1, 2))
    }

    /// The 2x2 table implied for pair `(i, j)`: `entries[k1][k2]`.
    pub fn pair_table(&self, i: usize, j: usize) -> [[Rational; 2]; 2] {
        let mu = self.moment(i, j).clone();
        let (a, b) = (&self.univariate[i], &self.univariate[j]);
        [[int(1) - a - b + &mu, b - &mu], [a - &mu, mu]]
    }
}

/// Moment of the uniform-margin 2x2 table with odds ratio `omega`:
/// `sqrt(omega) / (2 (sqrt(omega) + 1))`, rounded to `digits` places.
pub fn moment_from_odds_ratio(omega: f64, digits: u32) -> Result<Rational> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::Domain(format!(
            "odds ratio must be positive and finite, got {omega}"
        )));
    }
    let s = omega.sqrt();
    round_to_digits(s / (2.0 * (s + 1.0)), digits)
}

/// Moment `mu` of the 2x2 table with margins `P(X_i=1) = a`, `P(X_j=1) = b`
/// and odds ratio `omega`: the root of
/// `(1 - omega) mu^2 + (1 - a - b + omega (a + b)) mu - omega a b = 0`
/// inside the Fréchet interval.
pub fn moment_with_margins(omega: f64, a: f64, b: f64) -> Result<f64> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::Domain(format!(
            "odds ratio must be positive and finite, got {omega}"
        )));
    }
    if !(a > 0.0 && a < 1.0 && b > 0.0 && b < 1.0) {
        return Err(Error::Domain(format!(
            "margins must lie in (0, 1), got {a}, {b}"
        )));
    }
    let lower = (a + b - 1.0).max(0.0);
    let upper = a.min(b);
    let qa = 1.0 - omega;
    let qb = 1.0 - a - b + omega * (a + b);
    let qc = -omega * a * b;
    let root = if qa.abs() < 1e-15 {
        -qc / qb
    } else {
        let disc = (qb * qb - 4.0 * qa * qc).max(0.0).sqrt();
        // Numerically stable pair of roots.
        let q = -0.5 * (qb + qb.signum() * disc);
        let roots = [q / qa, if q != 0.0 { qc / q } else { f64::NAN }];
        let slack = 1e-12;
        roots
            .into_iter()
            .filter(|r| r.is_finite() && *r >= lower - slack && *r <= upper + slack)
            .min_by(|x, y| {
                distance_inside(*x, lower, upper).total_cmp(&distance_inside(*y, lower, upper))
            })
            .ok_or_else(|| Error::Domain(format!("no admissible moment for odds ratio {omega}")))?
    };
    Ok(root.clamp(lower, upper))
}

fn distance_inside(x: f64, lower: f64, upper: f64) -> f64 {
    (lower - x).max(0.0) + (x - upper).max(0.0)
}

/// Targets reproducing the pairwise marginal odds ratios of `p`, with either
/// uniform margins or the margins of `p` itself. Moments are rounded to
/// `digits` decimal places; observed margins are kept exact.
pub fn targets_from_pmf(p: &ExactPmf, digits: u32, mode: MarginMode) -> Result<MarginTargets> {
    let d = p.dim();
    let univariate: Vec<Rational> = match mode {
        MarginMode::Uniform => vec![ratio(1, 2); d],
        MarginMode::Observed => (0..d)
            .map(|axis| p.univariate_margin(axis).map(|m| m.1))
            .collect::<Result<_>>()?,
    };
    let mut moments = BTreeMap::new();
    for (i, j) in axis_pairs(d) {
        let omega = match p.marginal_odds_ratio(i, j)? {
            OddsRatio::Finite(w) if w > Rational::zero() => w.to_f64(),
            other => {
                return Err(Error::UnsupportedTarget {
                    i,
                    j,
                    reason: format!("marginal odds ratio is {other}"),
                })
            }
        };
        let mu = match mode {
            MarginMode::Uniform => moment_from_odds_ratio(omega, digits)?,
            MarginMode::Observed => {
                let m = moment_with_margins(omega, univariate[i].to_f64(), univariate[j].to_f64())?;
                round_to_digits(m, digits)?
            }
        };
        moments.insert((i, j), mu);
    }
    MarginTargets::new(univariate, moments)
}

/// What a row of the constraint matrix fixes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RowLabel {
    Margin(usize),
    Moment(usize, usize),
}

impl fmt::Display for RowLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RowLabel::Margin(i) => write!(f, "margin {}", i + 1),
            RowLabel::Moment(i, j) => write!(f, "moment {}{}", i + 1, j + 1),
        }
    }
}

/// The `(d + d(d-1)/2) x 2^d` matrix `H` with `H p = 0` for feasible tables.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintMatrix {
    d: usize,
    rows: Vec<Vec<Rational>>,
    labels: Vec<RowLabel>,
}

/// Assembles `H`. Margin rows come first, then moment rows in
/// pair-lexicographic order.
///
/// A uniform margin row is `+1` on cells with `alpha_i = 0` and `-1` on cells
/// with `alpha_i = 1`. A general margin `m` gives `m` and `m - 1` instead.
/// Moment rows are `mu - 1` on cells with `alpha_i alpha_j = 1` and `mu`
/// elsewhere.
pub fn build_h(targets: &MarginTargets) -> ConstraintMatrix {
    let d = targets.dim();
    let n = 1usize << d;
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (axis, m) in targets.univariate().iter().enumerate() {
        let (zero, one) = if *m == ratio(1, 2) {
            (int(1), int(-1))
        } else {
            (m.clone(), m - int(1))
        };
        rows.push(
            (0..n)
                .map(|k| {
                    if bit(k, axis, d) == 1 {
                        one.clone()
                    } else {
                        zero.clone()
                    }
                })
                .collect(),
        );
        labels.push(RowLabel::Margin(axis));
    }
    for ((i, j), mu) in targets.moments() {
        let both = mu - int(1);
        rows.push(
            (0..n)
                .map(|k| {
                    if bit(k, i, d) == 1 && bit(k, j, d) == 1 {
                        both.clone()
                    } else {
                        mu.clone()
                    }
                })
                .collect(),
        );
        labels.push(RowLabel::Moment(i, j));
    }
    ConstraintMatrix { d, rows, labels }
}

impl ConstraintMatrix {
    /// Wraps raw rows; every row must have `2^d` entries.
    pub fn from_rows(d: usize, rows: Vec<Vec<Rational>>, labels: Vec<RowLabel>) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: rows.len(),
                found: labels.len(),
            });
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != 1 << d) {
            return Err(Error::DimensionMismatch {
                expected: 1 << d,
                found: bad.len(),
            });
        }
        Ok(Self { d, rows, labels })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn ncols(&self) -> usize {
        1 << self.d
    }

    pub fn rows(&self) -> &[Vec<Rational>] {
        &self.rows
    }

    pub fn labels(&self) -> &[RowLabel] {
        &self.labels
    }

    /// `H p`.
    pub fn residual<T: Scalar>(&self, p: &Pmf<T>) -> Result<Vec<T>> {
        if p.cells().len() != self.ncols() {
            return Err(Error::DimensionMismatch {
                expected: self.ncols(),
                found: p.cells().len(),
            });
        }
        Ok(self
            .rows
            .iter()
            .map(|row| {
                row.iter().zip(p.cells()).fold(T::zero(), |acc, (h, c)| {
                    acc + T::from_rational(h) * c.clone()
                })
            })
            .collect())
    }

    /// Max-norm of `H p` is at most `tol` (exactly zero for rationals).
    pub fn satisfies<T: Scalar>(&self, p: &Pmf<T>, tol: f64) -> Result<bool> {
        let r = self.residual(p)?;
        Ok(if T::EXACT {
            r.iter().all(Zero::is_zero)
        } else {
            r.iter().all(|x| x.to_f64().abs() <= tol)
        })
    }

    /// `H` with a final all-ones row appended (the affine hull of the polytope).
    pub fn with_mass_row(&self) -> Vec<Vec<Rational>> {
        let mut rows = self.rows.clone();
        rows.push(vec![int(1); self.ncols()]);
        rows
    }
}
