//! Built-in tables and the published reference values they are checked against.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::numeric::parse_rational;
use crate::table::ExactPmf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dataset {
    /// Three-way table given directly as probabilities.
    Example1,
    /// Four-way consumer survey: water softness, brand preference (X/M),
    /// previous use of M, water temperature (High/Low).
    Water,
    /// Three raters, binary classification of 164 responses.
    Raters,
}

impl Dataset {
    pub const ALL: [Dataset; 3] = [Dataset::Example1, Dataset::Water, Dataset::Raters];

    pub fn name(self) -> &'static str {
        match self {
            Dataset::Example1 => "example1",
            Dataset::Water => "water",
            Dataset::Raters => "raters",
        }
    }

    pub fn dim(self) -> usize {
        match self {
            Dataset::Water => 4,
            _ => 3,
        }
    }

    /// Raw counts in lexicographic cell order, for count data.
    pub fn counts(self) -> Option<&'static [u64]> {
        match self {
            Dataset::Example1 => None,
            Dataset::Water => Some(&[
                19, 57, 29, 63, 29, 49, 27, 53, 47, 84, 75, 134, 90, 107, 53, 92,
            ]),
            Dataset::Raters => Some(&[113, 5, 5, 7, 4, 3, 3, 24]),
        }
    }

    /// Probabilities as exact decimal strings, for probability data.
    pub fn probabilities(self) -> Option<&'static [&'static str]> {
        match self {
            Dataset::Example1 => {
                Some(&["0.1", "0.05", "0.3", "0.2", "0.1", "0.05", "0.15", "0.05"])
            }
            _ => None,
        }
    }

    pub fn labels(self) -> &'static [&'static str] {
        match self {
            Dataset::Example1 => &["X1", "X2", "X3"],
            Dataset::Water => &["softness", "preference", "previous_M", "temperature"],
            Dataset::Raters => &["R1", "R2", "R3"],
        }
    }

    pub fn pmf(self) -> ExactPmf {
        match (self.counts(), self.probabilities()) {
            (Some(c), _) => {
                ExactPmf::from_counts(self.dim(), c).expect("built-in counts are valid")
            }
            (None, Some(p)) => {
                let cells = p
                    .iter()
                    .map(|s| parse_rational(s).expect("built-in decimals parse"))
                    .collect();
                ExactPmf::new(self.dim(), cells).expect("built-in probabilities are valid")
            }
            (None, None) => unreachable!("every dataset carries data"),
        }
    }
}

impl FromStr for Dataset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Dataset::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| {
                Error::Domain(format!(
                    "unknown dataset {s:?} (expected example1, water or raters)"
                ))
            })
    }
}

impl fmt::Display for Dataset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Published values, rounded as printed.
pub mod reference {
    /// Marginal odds ratios (12, 13, 23) of the example table.
    pub const EXAMPLE1_ODDS_RATIOS: [f64; 3] = [0.40, 0.64, 1.11];
    /// Uniform-margin moments (12, 13, 23) at three digits.
    pub const EXAMPLE1_MOMENTS: [&str; 3] = ["0.194", "0.222", "0.257"];
    /// Extreme pmfs with uniform margins.
    pub const EXAMPLE1_UNIFORM_VERTICES: [[f64; 8]; 2] = [
        [0.0, 0.194, 0.222, 0.084, 0.257, 0.05, 0.021, 0.173],
        [0.173, 0.021, 0.05, 0.257, 0.084, 0.222, 0.194, 0.0],
    ];
    /// Log-linear coefficients (intercept, 1, 2, 3, 12, 13, 23, 123) of the
    /// two uniform-margin vertices, smoothed by 1e-8.
    pub const EXAMPLE1_CORNER: [[f64; 8]; 2] = [
        [-18.42, 17.06, 16.92, 16.78, -19.41, -18.42, -17.75, 21.49],
        [-1.76, -0.72, -1.24, -2.10, 2.08, 3.07, 3.74, -21.49],
    ];
    pub const EXAMPLE1_ZERO_MEAN: [[f64; 8]; 2] = [
        [-4.25, 1.76, 1.85, 2.03, -2.17, -1.92, -1.75, 2.69],
        [-4.25, -1.76, -1.85, -2.03, -2.17, -1.92, -1.75, -2.69],
    ];
    /// Extreme pmfs with the observed margins of the example table.
    pub const EXAMPLE1_OBSERVED_VERTICES: [[f64; 8]; 2] = [
        [0.050, 0.100, 0.350, 0.150, 0.150, 0.0, 0.100, 0.100],
        [0.150, 0.0, 0.250, 0.250, 0.050, 0.100, 0.200, 0.0],
    ];

    /// Water survey: ((i, j) 1-based, odds ratio, moment).
    pub const WATER_PAIRS: [((usize, usize), f64, &str); 6] = [
        ((1, 2), 1.070, "0.254"),
        ((2, 3), 0.563, "0.214"),
        ((1, 3), 0.966, "0.248"),
        ((3, 4), 1.158, "0.259"),
        ((2, 4), 0.761, "0.233"),
        ((1, 4), 0.737, "0.231"),
    ];
    pub const WATER_VERTEX_COUNT: usize = 96;

    pub const RATERS_PMF: [f64; 8] = [0.689, 0.03, 0.03, 0.043, 0.024, 0.018, 0.018, 0.146];
    pub const RATERS_ODDS_RATIOS: [f64; 3] = [37.929, 37.929, 56.672];
    pub const RATERS_TOP_ORDER: f64 = 2.96625;
    pub const RATERS_VERTICES: [[f64; 8]; 2] = [
        [0.372, 0.059, 0.059, 0.011, 0.07, 0.0, 0.0, 0.43],
        [0.43, 0.0, 0.0, 0.07, 0.011, 0.059, 0.059, 0.372],
    ];
    pub const RATERS_CORNER: [[f64; 8]; 2] = [
        [-0.99, -1.67, -1.85, -1.85, -13.91, -13.91, 0.19, 33.14],
        [-0.84, -3.65, -17.58, -17.58, 19.23, 19.23, 33.34, -33.14],
    ];
    pub const RATERS_ZERO_MEAN: [[f64; 8]; 2] = [
        [-6.44, -3.65, -0.21, -0.21, 0.66, 0.66, 4.19, 4.14],
        [-6.44, 3.65, 0.21, 0.21, 0.66, 0.66, 4.19, -4.14],
    ];
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn datasets_load() {
        for ds in Dataset::ALL {
            let p = ds.pmf();
            assert_eq!(p.dim(), ds.dim());
            assert_eq!(ds.labels().len(), ds.dim());
            assert_eq!(ds.name().parse::<Dataset>().unwrap(), ds);
        }
        assert!("nope".parse::<Dataset>().is_err());
        assert_eq!(Dataset::Water.counts().unwrap().iter().sum::<u64>(), 1008);
        assert_eq!(Dataset::Raters.counts().unwrap().iter().sum::<u64>(), 164);
    }

    #[test]
    fn rater_pmf_matches_published_rounding() {
        let p = Dataset::Raters.pmf().to_f64();
        for (a, b) in p.cells().iter().zip(reference::RATERS_PMF) {
            assert!((a - b).abs() < 5e-4);
        }
    }
}
