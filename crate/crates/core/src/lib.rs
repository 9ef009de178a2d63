//! Binary probability tables with prescribed margins and pairwise moments.
//!
//! For `d` binary variables, fixing the univariate margins and every
//! second-order moment `P(X_i = 1, X_j = 1)` leaves a convex polytope of
//! admissible joint pmfs. This crate builds the linear system describing that
//! polytope, enumerates its vertices exactly, and works with the polytope:
//! mixtures and decompositions over the vertices, saturated log-linear
//! coefficients, random sampling, and the iterative-proportional-fitting
//! table that a single-table generator would return.
//!
//! ```
//! use bintab_core::prelude::*;
//!
//! let p = Dataset::Example1.pmf();
//! let targets = targets_from_pmf(&p, 3, MarginMode::Uniform).unwrap();
//! let h = build_h(&targets);
//! let vertices = enumerate_vertices(&h).unwrap();
//! assert_eq!(vertices.len(), 2);
//! assert!(vertices.is_reflection_closed());
//! ```

pub mod baselines;
pub mod constraints;
pub mod datasets;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod loglinear;
pub mod nnls;
pub mod numeric;
pub mod sampling;
pub mod table;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::baselines::{ipf_max_entropy, IpfReport};
    pub use crate::constraints::{
        build_h, moment_from_odds_ratio, targets_from_pmf, ConstraintMatrix, MarginMode,
        MarginTargets, RowLabel, DEFAULT_DIGITS,
    };
    pub use crate::datasets::Dataset;
    pub use crate::error::{Error, Result};
    pub use crate::geometry::{
        decompose, enumerate_vertices, extreme_rays, mixture, normalize, polytope_dimension,
        MixtureWeights, RaySet, VertexSet,
    };
    pub use crate::loglinear::{
        corner_params, reconstruct, zero_mean_params, LogLinearParams, Parametrization,
    };
    pub use crate::numeric::{Rational, Scalar};
    pub use crate::sampling::{sample_dirichlet, sample_hit_and_run, SamplerConfig};
    pub use crate::table::{Configuration, ExactPmf, FloatPmf, OddsRatio, Pmf};
}
