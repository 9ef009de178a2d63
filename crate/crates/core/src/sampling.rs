//! Random pmfs from the feasible polytope.
//!
//! Two samplers are provided:
//!
//! * [`sample_dirichlet`] mixes the vertices with symmetric Dirichlet(1)
//!   weights. It covers the whole polytope and is cheap, but for polytopes of
//!   dimension two or more it is **not** uniform over the polytope.
//! * [`sample_hit_and_run`] is a hit-and-run random walk whose stationary
//!   distribution is uniform over the polytope.
//!
//! Randomness comes from ChaCha20 (`rand_chacha::ChaCha20Rng`, version 0.9)
//! seeded with the configured 64-bit seed via `seed_from_u64`, so draws are
//! reproducible across platforms.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::constraints::ConstraintMatrix;
use crate::error::{Error, Result};
use crate::geometry::{mixture, MixtureWeights, VertexSet};
use crate::linalg::kernel_basis;
use crate::numeric::Scalar;
use crate::table::{FloatPmf, Pmf};

pub const DEFAULT_BURN_IN: usize = 500;
pub const DEFAULT_THINNING: usize = 10;

/// Feasibility tolerance a hit-and-run start must meet.
pub const START_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplerConfig {
    pub seed: u64,
    pub count: usize,
    /// Walk steps discarded before the first kept draw.
    pub burn_in: usize,
    /// Extra walk steps between consecutive kept draws.
    pub thinning: usize,
}

impl SamplerConfig {
    pub fn new(seed: u64, count: usize) -> Self {
        Self {
            seed,
            count,
            burn_in: DEFAULT_BURN_IN,
            thinning: DEFAULT_THINNING,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::InvalidConfig("count must be at least 1".into()));
        }
        Ok(())
    }
}

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// `count` mixtures of the vertices with Dirichlet(1, ..., 1) weights.
pub fn sample_dirichlet(vertices: &VertexSet, cfg: &SamplerConfig) -> Result<Vec<FloatPmf>> {
    cfg.validate()?;
    if vertices.is_empty() {
        return Err(Error::EmptyVertexSet);
    }
    let mut rng = rng(cfg.seed);
    (0..cfg.count)
        .map(|_| {
            let mut theta: Vec<f64> = (0..vertices.len())
                .map(|_| rng.sample::<f64, _>(Exp1))
                .collect();
            let total: f64 = theta.iter().sum();
            theta.iter_mut().for_each(|t| *t /= total);
            let w = MixtureWeights::new(theta)?;
            mixture(&w, vertices)
        })
        .collect()
}

/// Orthonormal directions spanning `{x : H x = 0, sum x = 0}`.
fn chart(h: &ConstraintMatrix) -> Vec<DVector<f64>> {
    let basis = kernel_basis(&h.with_mass_row(), h.ncols());
    if basis.is_empty() {
        return Vec::new();
    }
    let m = DMatrix::from_fn(h.ncols(), basis.len(), |r, c| basis[c][r].to_f64());
    let q = m.qr().q();
    (0..basis.len()).map(|c| q.column(c).into_owned()).collect()
}

/// Hit-and-run over `{p >= 0 : H p = 0, sum p = 1}` from a feasible `start`.
///
/// Each step draws an isotropic direction in the affine hull, intersects the
/// line with the nonnegative orthant and moves to a uniform point of the
/// resulting chord. Positions are tracked in chart coordinates, so the
/// equality constraints never drift.
pub fn sample_hit_and_run<T: Scalar>(
    h: &ConstraintMatrix,
    start: &Pmf<T>,
    cfg: &SamplerConfig,
) -> Result<Vec<FloatPmf>> {
    cfg.validate()?;
    let d = h.dim();
    let origin = start.to_f64();
    let residual = h
        .residual(&origin)?
        .iter()
        .fold(0.0f64, |m, x| m.max(x.abs()));
    if residual > START_TOL {
        return Err(Error::InfeasibleStart { residual });
    }
    let origin: Vec<f64> = origin.into_cells();

    let dirs = chart(h);
    if dirs.is_empty() {
        let point = Pmf::new(d, origin)?;
        return Ok(vec![point; cfg.count]);
    }
    let n = origin.len();
    let k = dirs.len();
    let basis = DMatrix::from_columns(&dirs);
    let origin_v = DVector::from_vec(origin);
    let mut z = DVector::<f64>::zeros(k);
    let mut rng = rng(cfg.seed);

    let step = |z: &mut DVector<f64>, rng: &mut ChaCha20Rng| {
        let u = DVector::from_fn(k, |_, _| rng.sample::<f64, _>(StandardNormal));
        let x = &origin_v + &basis * &*z;
        let dir = &basis * &u;
        let scale = dir.amax();
        if scale == 0.0 {
            return;
        }
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for c in 0..n {
            let v = dir[c];
            if v.abs() <= 1e-14 * scale {
                continue;
            }
            let t = -x[c].max(0.0) / v;
            if v > 0.0 {
                lo = lo.max(t);
            } else {
                hi = hi.min(t);
            }
        }
        if !(lo.is_finite() && hi.is_finite()) || hi <= lo {
            return;
        }
        let t = rng.random_range(lo..hi);
        *z += u * t;
    };

    for _ in 0..cfg.burn_in {
        step(&mut z, &mut rng);
    }
    let mut out = Vec::with_capacity(cfg.count);
    for i in 0..cfg.count {
        let extra = if i == 0 { 0 } else { cfg.thinning };
        for _ in 0..extra + 1 {
            step(&mut z, &mut rng);
        }
        let x = &origin_v + &basis * &z;
        let cells: Vec<f64> = x.iter().map(|v| v.max(0.0)).collect();
        out.push(Pmf::normalized(d, cells)?);
    }
    Ok(out)
}

/// Position of `p` along the segment from `b` (0) to `a` (1).
pub fn segment_coordinate(p: &FloatPmf, a: &FloatPmf, b: &FloatPmf) -> f64 {
    let (num, den) = p
        .cells()
        .iter()
        .zip(a.cells())
        .zip(b.cells())
        .fold((0.0, 0.0), |(n, d), ((x, ai), bi)| {
            (n + (x - bi) * (ai - bi), d + (ai - bi) * (ai - bi))
        });
    num / den
}

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut best) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        best = best.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::{build_h, MarginTargets};
    use crate::geometry::enumerate_vertices;
    use crate::numeric::parse_rational;

    fn example1_h() -> ConstraintMatrix {
        let mus = ["0.194", "0.222", "0.257"]
            .iter()
            .map(|s| parse_rational(s).unwrap())
            .collect();
        build_h(&MarginTargets::uniform(3, mus).unwrap())
    }

    #[test]
    fn dirichlet_draws_are_feasible_and_reproducible() {
        let v = enumerate_vertices(&example1_h()).unwrap();
        let cfg = SamplerConfig::new(7, 100);
        let draws = sample_dirichlet(&v, &cfg).unwrap();
        assert_eq!(draws.len(), 100);
        for p in &draws {
            assert!(v.constraints().satisfies(p, 1e-12).unwrap());
            assert!(p.cells().iter().all(|c| *c >= 0.0));
        }
        assert_eq!(draws, sample_dirichlet(&v, &cfg).unwrap());
        assert_ne!(
            draws,
            sample_dirichlet(&v, &SamplerConfig::new(8, 100)).unwrap()
        );
    }

    #[test]
    fn point_polytope_repeats_its_point() {
        let h = build_h(&MarginTargets::independence(2).unwrap());
        let v = enumerate_vertices(&h).unwrap();
        let uniform = FloatPmf::uniform(2).unwrap();
        for p in sample_dirichlet(&v, &SamplerConfig::new(1, 5)).unwrap() {
            assert_eq!(p, uniform);
        }
        let walk = sample_hit_and_run(&h, &uniform, &SamplerConfig::new(1, 5)).unwrap();
        assert!(walk.iter().all(|p| *p == uniform));
    }

    #[test]
    fn infeasible_start_rejected() {
        let h = example1_h();
        let start = FloatPmf::uniform(3).unwrap();
        assert!(matches!(
            sample_hit_and_run(&h, &start, &SamplerConfig::new(1, 1)),
            Err(Error::InfeasibleStart { .. })
        ));
        let v = enumerate_vertices(&h).unwrap();
        assert!(sample_dirichlet(&v, &SamplerConfig::new(1, 0)).is_err());
    }

    #[test]
    fn ks_statistic_basics() {
        let a: Vec<f64> = (0..100).map(|i| i as f64).collect();
        assert_eq!(ks_statistic(&a, &a), 0.0);
        let b: Vec<f64> = (0..100).map(|i| i as f64 + 1000.0).collect();
        assert_eq!(ks_statistic(&a, &b), 1.0);
    }
}
