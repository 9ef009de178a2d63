//! Binary tables: cell indexing, margins, correlations and odds ratios.
//!
//! Cells of a `d`-way table are stored in lexicographic order over
//! `{0,1}^d`, with axis 0 as the most significant bit: the cell at position
//! `k` carries the configuration whose binary representation is `k`.
//! Axes are 0-based throughout the library.

use std::fmt;

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::numeric::{Rational, Scalar};

/// Largest supported table dimension.
pub const MAX_DIM: usize = 20;

/// A cell label in `{0,1}^d`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration(Vec<u8>);

impl Configuration {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if let Some(pos) = bits.iter().position(|&b| b > 1) {
            return Err(Error::Domain(format!(
                "configuration entry {pos} is {}, not 0/1",
                bits[pos]
            )));
        }
        Ok(Self(bits))
    }

    /// Configuration of the cell at 0-based position `index` in a `d`-way table.
    pub fn from_index(index: usize, d: usize) -> Self {
        Self((0..d).map(|axis| bit(index, axis, d)).collect())
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// 0-based lexicographic position.
    pub fn index(&self) -> usize {
        self.0.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
    }

    /// 1-based cell number `k`, with `k - 1` the binary value of the bits.
    pub fn cell_number(&self) -> usize {
        self.index() + 1
    }

    pub fn complement(&self) -> Self {
        Self(self.0.iter().map(|b| 1 - b).collect())
    }

    pub fn ones(&self) -> usize {
        self.0.iter().filter(|&&b| b == 1).count()
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

/// Value of `axis` in the cell at position `index`.
#[inline]
pub fn bit(index: usize, axis: usize, d: usize) -> u8 {
    ((index >> (d - 1 - axis)) & 1) as u8
}

/// Axis pairs `(i, j)`, `i < j`, in pair-lexicographic order.
pub fn axis_pairs(d: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..d).flat_map(move |i| (i + 1..d).map(move |j| (i, j)))
}

/// A probability mass function over the `2^d` cells of a binary table.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf<T> {
    d: usize,
    cells: Vec<T>,
}

pub type ExactPmf = Pmf<Rational>;
pub type FloatPmf = Pmf<f64>;

impl<T: Scalar> Pmf<T> {
    /// Validates cell count, nonnegativity and unit mass (exact for rationals,
    /// within [`crate::numeric::FLOAT_MASS_TOL`] for floats).
    pub fn new(d: usize, cells: Vec<T>) -> Result<Self> {
        check_dim(d)?;
        if cells.len() != 1 << d {
            return Err(Error::CellCount {
                expected: 1 << d,
                found: cells.len(),
            });
        }
        if let Some(index) = cells.iter().position(|c| *c < T::zero()) {
            return Err(Error::NegativeCell { index });
        }
        let total = sum(&cells);
        if !T::is_unit_mass(&total) {
            return Err(Error::NotNormalized {
                sum: format!("{total:?}"),
            });
        }
        Ok(Self { d, cells })
    }

    /// Infers `d` from the cell count.
    pub fn from_cells(cells: Vec<T>) -> Result<Self> {
        let n = cells.len();
        if n < 4 || !n.is_power_of_two() {
            return Err(Error::CellCount {
                expected: n.next_power_of_two().max(4),
                found: n,
            });
        }
        Self::new(n.trailing_zeros() as usize, cells)
    }

    /// Divides nonnegative weights by their total.
    pub fn normalized(d: usize, weights: Vec<T>) -> Result<Self> {
        check_dim(d)?;
        if weights.len() != 1 << d {
            return Err(Error::CellCount {
                expected: 1 << d,
                found: weights.len(),
            });
        }
        if let Some(index) = weights.iter().position(|c| *c < T::zero()) {
            return Err(Error::NegativeCell { index });
        }
        let total = sum(&weights);
        if total.is_zero() {
            return Err(Error::NotNormalized { sum: "0".into() });
        }
        let cells = weights.into_iter().map(|w| w / total.clone()).collect();
        Ok(Self { d, cells })
    }

    pub fn uniform(d: usize) -> Result<Self> {
        check_dim(d)?;
        let n = 1usize << d;
        let cell = T::one() / T::from_usize(n);
        Ok(Self {
            d,
            cells: vec![cell; n],
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn cells(&self) -> &[T] {
        &self.cells
    }

    pub fn into_cells(self) -> Vec<T> {
        self.cells
    }

    pub fn cell(&self, alpha: &Configuration) -> &T {
        &self.cells[alpha.index()]
    }

    pub fn to_f64(&self) -> FloatPmf {
        Pmf {
            d: self.d,
            cells: self.cells.iter().map(Scalar::to_f64).collect(),
        }
    }

    fn check_axis(&self, axis: usize) -> Result<()> {
        if axis >= self.d {
            Err(Error::AxisOutOfRange { axis, d: self.d })
        } else {
            Ok(())
        }
    }

    fn check_pair(&self, i: usize, j: usize) -> Result<()> {
        self.check_axis(i)?;
        self.check_axis(j)?;
        if i == j {
            return Err(Error::SameAxis(i));
        }
        Ok(())
    }

    /// `(m^0, m^1)` for `axis`.
    pub fn univariate_margin(&self, axis: usize) -> Result<(T, T)> {
        self.check_axis(axis)?;
        let one = self
            .cells
            .iter()
            .enumerate()
            .filter(|(k, _)| bit(*k, axis, self.d) == 1)
            .fold(T::zero(), |acc, (_, c)| acc + c.clone());
        Ok((T::one() - one.clone(), one))
    }

    pub fn bivariate_margin(&self, i: usize, j: usize) -> Result<BivariateMargin<T>> {
        self.check_pair(i, j)?;
        let mut entries = [[T::zero(), T::zero()], [T::zero(), T::zero()]];
        for (k, c) in self.cells.iter().enumerate() {
            let slot = &mut entries[bit(k, i, self.d) as usize][bit(k, j, self.d) as usize];
            *slot = slot.clone() + c.clone();
        }
        Ok(BivariateMargin { entries })
    }

    /// `P(X_i = 1, X_j = 1)`.
    pub fn second_moment(&self, i: usize, j: usize) -> Result<T> {
        Ok(self.bivariate_margin(i, j)?.entries[1][1].clone())
    }

    /// Covariance of `X_i` and `X_j`.
    pub fn covariance(&self, i: usize, j: usize) -> Result<T> {
        let m = self.bivariate_margin(i, j)?;
        let (_, mi) = self.univariate_margin(i)?;
        let (_, mj) = self.univariate_margin(j)?;
        Ok(m.entries[1][1].clone() - mi * mj)
    }

    /// Pearson correlation of `X_i` and `X_j`.
    pub fn correlation(&self, i: usize, j: usize) -> Result<f64> {
        let (num, den) = self.correlation_parts(i, j)?;
        Ok(num.to_f64() / den.to_f64().sqrt())
    }

    /// The correlation as an exact value when the variance product is a
    /// perfect square in this numeric mode (always for uniform margins).
    pub fn exact_correlation(&self, i: usize, j: usize) -> Result<Option<T>> {
        let (num, den) = self.correlation_parts(i, j)?;
        Ok(den.sqrt_exact().map(|s| num / s))
    }

    fn correlation_parts(&self, i: usize, j: usize) -> Result<(T, T)> {
        self.check_pair(i, j)?;
        let (ai0, ai1) = self.univariate_margin(i)?;
        let (aj0, aj1) = self.univariate_margin(j)?;
        for (axis, (m0, m1)) in [(i, (&ai0, &ai1)), (j, (&aj0, &aj1))] {
            if m0.is_zero() || m1.is_zero() {
                return Err(Error::DegenerateMargin { axis });
            }
        }
        let cov = self.second_moment(i, j)? - ai1.clone() * aj1.clone();
        Ok((cov, ai1 * ai0 * aj1 * aj0))
    }

    /// Odds ratio of the collapsed 2x2 table of `(X_i, X_j)`.
    pub fn marginal_odds_ratio(&self, i: usize, j: usize) -> Result<OddsRatio<T>> {
        Ok(self.bivariate_margin(i, j)?.odds_ratio())
    }

    /// Odds ratio of `(X_i, X_j)` given the remaining axes fixed at `rest`
    /// (listed in increasing axis order).
    pub fn conditional_odds_ratio(
        &self,
        i: usize,
        j: usize,
        rest: &Configuration,
    ) -> Result<OddsRatio<T>> {
        self.check_pair(i, j)?;
        if rest.dim() != self.d - 2 {
            return Err(Error::DimensionMismatch {
                expected: self.d - 2,
                found: rest.dim(),
            });
        }
        let cell = |bi: u8, bj: u8| {
            let mut others = rest.bits().iter();
            let bits: Vec<u8> = (0..self.d)
                .map(|axis| match axis {
                    a if a == i => bi,
                    a if a == j => bj,
                    _ => *others.next().expect("rest has d-2 entries"),
                })
                .collect();
            self.cells[Configuration(bits).index()].clone()
        };
        Ok(OddsRatio::from_products(
            &[cell(1, 1), cell(0, 0)],
            &[cell(1, 0), cell(0, 1)],
        ))
    }

    /// Every conditional odds ratio, pair-lexicographic, then by `rest` index.
    pub fn conditional_odds_ratios(&self) -> Vec<((usize, usize), Configuration, OddsRatio<T>)> {
        let mut out = Vec::new();
        for (i, j) in axis_pairs(self.d) {
            for r in 0..1usize << (self.d - 2) {
                let rest = Configuration::from_index(r, self.d - 2);
                let or = self
                    .conditional_odds_ratio(i, j, &rest)
                    .expect("valid pair");
                out.push(((i, j), rest, or));
            }
        }
        out
    }

    /// Alternating product of all cells: cell `alpha` enters the numerator
    /// when `|alpha|` is even and the denominator otherwise. At d = 3 this is
    /// `p000 p011 p101 p110 / (p111 p100 p010 p001)`; at d = 2 the odds ratio.
    pub fn top_order_odds_ratio(&self) -> OddsRatio<T> {
        let (mut num, mut den) = (Vec::new(), Vec::new());
        for (k, c) in self.cells.iter().enumerate() {
            if k.count_ones() % 2 == 0 {
                num.push(c.clone());
            } else {
                den.push(c.clone());
            }
        }
        OddsRatio::from_products(&num, &den)
    }

    /// The complement map `p'_alpha = p_{1 - alpha}`: reverses the cell vector.
    pub fn reflect(&self) -> Self {
        Pmf {
            d: self.d,
            cells: self.cells.iter().rev().cloned().collect(),
        }
    }

    pub fn has_uniform_margins(&self) -> bool {
        let half = T::one() / T::from_usize(2);
        (0..self.d).all(|axis| {
            let (_, m1) = self.univariate_margin(axis).expect("axis in range");
            if T::EXACT {
                m1 == half
            } else {
                (m1.to_f64() - 0.5).abs() <= 1e-12
            }
        })
    }
}

impl ExactPmf {
    /// Normalizes integer counts to an exact pmf.
    pub fn from_counts(d: usize, counts: &[u64]) -> Result<Self> {
        let weights = counts
            .iter()
            .map(|&c| Rational::from_integer(BigInt::from(c)))
            .collect();
        Self::normalized(d, weights)
    }
}

impl<T: fmt::Display> fmt::Display for Pmf<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (k, c) in self.cells.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::DimensionTooSmall(d));
    }
    if d > MAX_DIM {
        return Err(Error::DimensionTooLarge { d, max: MAX_DIM });
    }
    Ok(())
}

fn sum<T: Scalar>(cells: &[T]) -> T {
    cells.iter().fold(T::zero(), |acc, c| acc + c.clone())
}

/// The 2x2 table `entries[k1][k2] = P(X_i = k1, X_j = k2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BivariateMargin<T> {
    pub entries: [[T; 2]; 2],
}

impl<T: Scalar> BivariateMargin<T> {
    pub fn odds_ratio(&self) -> OddsRatio<T> {
        let e = &self.entries;
        OddsRatio::from_products(
            &[e[1][1].clone(), e[0][0].clone()],
            &[e[1][0].clone(), e[0][1].clone()],
        )
    }

    pub fn total(&self) -> T {
        self.entries
            .iter()
            .flatten()
            .fold(T::zero(), |acc, c| acc + c.clone())
    }
}

/// Ratio of products of nonnegative cells, with zero denominators kept apart.
#[derive(Debug, Clone, PartialEq)]
pub enum OddsRatio<T> {
    Finite(T),
    /// Denominator zero, numerator positive.
    Infinite,
    /// Both numerator and denominator zero.
    Undefined,
}

impl<T: Scalar> OddsRatio<T> {
    pub fn from_products(numerator: &[T], denominator: &[T]) -> Self {
        let num_zero = numerator.iter().any(|c| c.is_zero());
        let den_zero = denominator.iter().any(|c| c.is_zero());
        match (num_zero, den_zero) {
            (true, true) => OddsRatio::Undefined,
            (false, true) => OddsRatio::Infinite,
            (true, false) => OddsRatio::Finite(T::zero()),
            (false, false) => {
                if T::EXACT {
                    let n = numerator.iter().fold(T::one(), |acc, c| acc * c.clone());
                    let d = denominator.iter().fold(T::one(), |acc, c| acc * c.clone());
                    OddsRatio::Finite(n / d)
                } else {
                    // Interleave to keep intermediate magnitudes near one.
                    let mut value = T::one();
                    for (n, d) in numerator.iter().zip(denominator) {
                        value = value * (n.clone() / d.clone());
                    }
                    OddsRatio::Finite(value)
                }
            }
        }
    }

    pub fn finite(&self) -> Option<&T> {
        match self {
            OddsRatio::Finite(v) => Some(v),
            _ => None,
        }
    }

    /// `+inf` for infinite, `NaN` for undefined.
    pub fn to_f64(&self) -> f64 {
        match self {
            OddsRatio::Finite(v) => v.to_f64(),
            OddsRatio::Infinite => f64::INFINITY,
            OddsRatio::Undefined => f64::NAN,
        }
    }
}

impl<T: Scalar> fmt::Display for OddsRatio<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OddsRatio::Finite(v) => write!(f, "{}", v.to_f64()),
            OddsRatio::Infinite => write!(f, "inf"),
            OddsRatio::Undefined => write!(f, "undefined"),
        }
    }
}
