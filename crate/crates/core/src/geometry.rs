//! Extreme rays of `{y >= 0 : H y = 0}` and the vertex representation of the
//! feasible polytope.
//!
//! Rays are enumerated with the double description method in exact integer
//! arithmetic. The cone starts as the nonnegative orthant (generated by the
//! unit vectors) and each row of `H` is inserted as a hyperplane: rays on the
//! hyperplane survive, rays strictly on either side are dropped, and every
//! adjacent pair of rays on opposite sides contributes the combination lying
//! on the hyperplane. Two rays are adjacent when the smallest face containing
//! both is two-dimensional, which is decided by the rank of the constraints
//! active at both.

use std::cmp::Ordering;
use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::constraints::ConstraintMatrix;
use crate::error::{Error, Result};
use crate::linalg::{self, dot_int, integer_rank, make_primitive, primitive_integer, sign};
use crate::numeric::{Rational, Scalar};
use crate::table::{ExactPmf, FloatPmf, Pmf};

/// Largest dimension the enumerator accepts (`2^d` cells must fit a `u128` mask).
pub const MAX_ENUMERATION_DIM: usize = 7;

/// Extreme rays as primitive nonnegative integer vectors, in canonical order.
#[derive(Debug, Clone, PartialEq)]
pub struct RaySet {
    constraints: ConstraintMatrix,
    rays: Vec<Vec<BigInt>>,
    emptied_by: Option<usize>,
}

impl RaySet {
    pub fn rays(&self) -> &[Vec<BigInt>] {
        &self.rays
    }

    pub fn len(&self) -> usize {
        self.rays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rays.is_empty()
    }

    pub fn constraints(&self) -> &ConstraintMatrix {
        &self.constraints
    }

    /// Index of the constraint row whose insertion left only the zero cone.
    pub fn emptied_by(&self) -> Option<usize> {
        self.emptied_by
    }
}

#[derive(Clone)]
struct Ray {
    coords: Vec<BigInt>,
    zeros: u128,
}

impl Ray {
    fn new(coords: Vec<BigInt>) -> Self {
        let zeros = coords
            .iter()
            .enumerate()
            .filter(|(_, x)| x.is_zero())
            .fold(0u128, |acc, (k, _)| acc | 1 << k);
        Self { coords, zeros }
    }
}

/// Extreme rays of the cone `{y >= 0 : H y = 0}`, rows inserted in matrix order.
pub fn extreme_rays(h: &ConstraintMatrix) -> Result<RaySet> {
    let order: Vec<usize> = (0..h.rows().len()).collect();
    extreme_rays_with_order(h, &order)
}

/// As [`extreme_rays`], inserting the rows in the given order (a permutation
/// of the row indices). The result does not depend on the order.
pub fn extreme_rays_with_order(h: &ConstraintMatrix, order: &[usize]) -> Result<RaySet> {
    let d = h.dim();
    if d > MAX_ENUMERATION_DIM {
        return Err(Error::DimensionTooLarge {
            d,
            max: MAX_ENUMERATION_DIM,
        });
    }
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    if sorted != (0..h.rows().len()).collect::<Vec<_>>() {
        return Err(Error::InvalidConfig(
            "insertion order must be a permutation of the rows".into(),
        ));
    }
    let n = h.ncols();
    let rows: Vec<Vec<BigInt>> = h.rows().iter().map(|r| primitive_integer(r)).collect();

    let mut rays: Vec<Ray> = (0..n)
        .map(|k| {
            Ray::new(
                (0..n)
                    .map(|c| {
                        if c == k {
                            BigInt::one()
                        } else {
                            BigInt::zero()
                        }
                    })
                    .collect(),
            )
        })
        .collect();
    let mut inserted: Vec<&[BigInt]> = Vec::new();
    let mut emptied_by = None;

    for &ri in order {
        let row = &rows[ri];
        let values: Vec<BigInt> = rays.par_iter().map(|r| dot_int(row, &r.coords)).collect();
        let mut kept = Vec::new();
        let (mut pos, mut neg) = (Vec::new(), Vec::new());
        for (ray, value) in rays.into_iter().zip(values) {
            match sign(&value) {
                0 => kept.push(ray),
                1 => pos.push((ray, value)),
                _ => neg.push((ray, value)),
            }
        }

        // Cheap necessary condition before any rank computation: the face
        // spanned by an adjacent pair has n - 2 independent active constraints,
        // at most `inserted.len()` of which are equalities.
        let needed = (n - 2).saturating_sub(inserted.len()) as u32;
        let candidates: Vec<(usize, usize, u128)> = (0..pos.len())
            .flat_map(|a| {
                let pos = &pos;
                neg.iter().enumerate().filter_map(move |(b, (nr, _))| {
                    let common = pos[a].0.zeros & nr.zeros;
                    (common.count_ones() >= needed).then_some((a, b, common))
                })
            })
            .collect();

        let mut masks: Vec<u128> = candidates.iter().map(|c| c.2).collect();
        masks.sort_unstable();
        masks.dedup();
        let ranks: HashMap<u128, usize> = masks
            .par_iter()
            .map(|&mask| {
                (
                    mask,
                    mask.count_ones() as usize + restricted_rank(&inserted, mask, n),
                )
            })
            .collect();

        let created: Vec<Ray> = candidates
            .par_iter()
            .filter(|(_, _, mask)| ranks[mask] == n - 2)
            .map(|&(a, b, _)| {
                let (pr, pv) = &pos[a];
                let (nr, nv) = &neg[b];
                let coords = pr
                    .coords
                    .iter()
                    .zip(&nr.coords)
                    .map(|(x, y)| pv * y - nv * x)
                    .collect();
                Ray::new(make_primitive(coords))
            })
            .collect();

        kept.extend(created);
        rays = kept;
        inserted.push(row);
        if rays.is_empty() {
            emptied_by = Some(ri);
            break;
        }
    }

    let mut rays: Vec<Vec<BigInt>> = rays.into_iter().map(|r| r.coords).collect();
    rays.sort_by(|a, b| compare_normalized(b, a));
    Ok(RaySet {
        constraints: h.clone(),
        rays,
        emptied_by,
    })
}

/// Rank of the inserted rows restricted to the columns outside `zeros`.
fn restricted_rank(rows: &[&[BigInt]], zeros: u128, n: usize) -> usize {
    let free: Vec<usize> = (0..n).filter(|k| zeros & (1 << k) == 0).collect();
    let m: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|r| free.iter().map(|&k| r[k].clone()).collect())
        .collect();
    integer_rank(&m)
}

/// Lexicographic comparison of `a / sum(a)` and `b / sum(b)` without division.
fn compare_normalized(a: &[BigInt], b: &[BigInt]) -> Ordering {
    let sa: BigInt = a.iter().sum();
    let sb: BigInt = b.iter().sum();
    for (x, y) in a.iter().zip(b) {
        match (x * &sb).cmp(&(y * &sa)) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    Ordering::Equal
}

/// The extreme pmfs `r_i` of the feasible polytope.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexSet {
    constraints: ConstraintMatrix,
    vertices: Vec<ExactPmf>,
}

impl VertexSet {
    /// Wraps vertices given explicitly; each must satisfy `H r = 0` exactly.
    pub fn new(constraints: ConstraintMatrix, vertices: Vec<ExactPmf>) -> Result<Self> {
        for v in &vertices {
            if v.dim() != constraints.dim() {
                return Err(Error::DimensionMismatch {
                    expected: constraints.dim(),
                    found: v.dim(),
                });
            }
            if !constraints.satisfies(v, 0.0)? {
                return Err(Error::InvalidConfig(
                    "vertex violates the constraint system".into(),
                ));
            }
        }
        Ok(Self {
            constraints,
            vertices,
        })
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[ExactPmf] {
        &self.vertices
    }

    pub fn constraints(&self) -> &ConstraintMatrix {
        &self.constraints
    }

    pub fn to_f64(&self) -> Vec<FloatPmf> {
        self.vertices.iter().map(Pmf::to_f64).collect()
    }

    /// Whether the complement map permutes the vertices.
    pub fn is_reflection_closed(&self) -> bool {
        self.vertices
            .iter()
            .all(|v| self.vertices.contains(&v.reflect()))
    }

    /// Largest number of strictly positive cells over all vertices.
    pub fn max_support(&self) -> usize {
        self.vertices
            .iter()
            .map(|v| v.cells().iter().filter(|c| !c.is_zero()).count())
            .max()
            .unwrap_or(0)
    }
}

/// Scales every ray to unit mass.
pub fn normalize(rays: &RaySet) -> Result<VertexSet> {
    let d = rays.constraints.dim();
    let vertices = rays
        .rays
        .iter()
        .map(|ray| {
            let weights: Vec<Rational> = ray
                .iter()
                .map(|x| Rational::from_integer(x.clone()))
                .collect();
            Pmf::normalized(d, weights)
                .map_err(|_| Error::InvalidConfig("ray with zero coordinate sum".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(VertexSet {
        constraints: rays.constraints.clone(),
        vertices,
    })
}

/// Extreme rays followed by normalization.
pub fn enumerate_vertices(h: &ConstraintMatrix) -> Result<VertexSet> {
    normalize(&extreme_rays(h)?)
}

/// Affine dimension of the feasible polytope, from the rank of its extreme rays.
pub fn polytope_dimension(h: &ConstraintMatrix) -> Result<usize> {
    let rays = extreme_rays(h)?;
    if rays.is_empty() {
        return Err(Error::EmptyFeasibleSet {
            row: rays.emptied_by,
        });
    }
    let rows: Vec<Vec<Rational>> = rays
        .rays
        .iter()
        .map(|r| {
            r.iter()
                .map(|x| Rational::from_integer(x.clone()))
                .collect()
        })
        .collect();
    Ok(linalg::rank(&rows) - 1)
}

/// `2^d - rank([H; 1])`: the dimension of the affine hull of `{H p = 0, sum p = 1}`.
/// Equals [`polytope_dimension`] whenever a strictly positive feasible table exists.
pub fn affine_hull_dimension(h: &ConstraintMatrix) -> usize {
    h.ncols() - linalg::rank(&h.with_mass_row())
}

/// Convex weights `theta` over a vertex set.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureWeights<T> {
    theta: Vec<T>,
}

impl<T: Scalar> MixtureWeights<T> {
    pub fn new(theta: Vec<T>) -> Result<Self> {
        if let Some(index) = theta.iter().position(|t| *t < T::zero()) {
            return Err(Error::NegativeWeight { index });
        }
        let total = theta.iter().fold(T::zero(), |acc, t| acc + t.clone());
        if !T::is_unit_mass(&total) {
            return Err(Error::WeightsNotNormalized {
                sum: format!("{total:?}"),
            });
        }
        Ok(Self { theta })
    }

    pub fn theta(&self) -> &[T] {
        &self.theta
    }
}

/// `sum_i theta_i r_i`.
pub fn mixture<T: Scalar>(weights: &MixtureWeights<T>, vertices: &VertexSet) -> Result<Pmf<T>> {
    if vertices.is_empty() {
        return Err(Error::EmptyVertexSet);
    }
    if weights.theta.len() != vertices.len() {
        return Err(Error::DimensionMismatch {
            expected: vertices.len(),
            found: weights.theta.len(),
        });
    }
    let n = vertices.constraints.ncols();
    let mut cells = vec![T::zero(); n];
    for (t, v) in weights.theta.iter().zip(&vertices.vertices) {
        if t.is_zero() {
            continue;
        }
        for (c, x) in cells.iter_mut().zip(v.cells()) {
            *c = c.clone() + t.clone() * T::from_rational(x);
        }
    }
    // Float round-off can push the total a hair away from one.
    if T::EXACT {
        Pmf::new(vertices.constraints.dim(), cells)
    } else {
        Pmf::normalized(vertices.constraints.dim(), cells)
    }
}

/// Convex weights reproducing `p` within `tol` (max-norm), preferring the
/// minimum-Euclidean-norm weight vector among exact fits.
pub fn decompose<T: Scalar>(
    p: &Pmf<T>,
    vertices: &VertexSet,
    tol: f64,
) -> Result<MixtureWeights<f64>> {
    if vertices.is_empty() {
        return Err(Error::EmptyVertexSet);
    }
    if p.dim() != vertices.constraints.dim() {
        return Err(Error::DimensionMismatch {
            expected: vertices.constraints.dim(),
            found: p.dim(),
        });
    }
    let target: Vec<f64> = p.cells().iter().map(Scalar::to_f64).collect();
    let columns: Vec<Vec<f64>> = vertices
        .vertices
        .iter()
        .map(|v| v.cells().iter().map(Scalar::to_f64).collect())
        .collect();
    let theta = crate::nnls::min_norm_convex_weights(&columns, &target);
    let residual = max_residual(&columns, &theta, &target);
    if residual > tol {
        return Err(Error::NotInPolytope { residual });
    }
    Ok(MixtureWeights { theta })
}

fn max_residual(columns: &[Vec<f64>], theta: &[f64], target: &[f64]) -> f64 {
    target
        .iter()
        .enumerate()
        .map(|(k, t)| {
            (columns
                .iter()
                .zip(theta)
                .map(|(c, w)| c[k] * w)
                .sum::<f64>()
                - t)
                .abs()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::{build_h, MarginTargets};
    use crate::numeric::{int, parse_rational, ratio};

    fn example1_h() -> ConstraintMatrix {
        let mus = ["0.194", "0.222", "0.257"]
            .iter()
            .map(|s| parse_rational(s).unwrap())
            .collect();
        build_h(&MarginTargets::uniform(3, mus).unwrap())
    }

    #[test]
    fn two_way_independence_is_a_point() {
        let h = build_h(&MarginTargets::independence(2).unwrap());
        let rays = extreme_rays(&h).unwrap();
        assert_eq!(rays.rays(), &[vec![BigInt::one(); 4]]);
        let v = normalize(&rays).unwrap();
        assert_eq!(v.vertices()[0], ExactPmf::uniform(2).unwrap());
        assert_eq!(polytope_dimension(&h).unwrap(), 0);
    }

    #[test]
    fn example1_is_a_segment() {
        let h = example1_h();
        let v = enumerate_vertices(&h).unwrap();
        assert_eq!(v.len(), 2);
        assert_eq!(polytope_dimension(&h).unwrap(), 1);
        assert_eq!(affine_hull_dimension(&h), 1);
        assert!(v.is_reflection_closed());
        assert_eq!(v.vertices()[0].reflect(), v.vertices()[1]);
        // Canonical order: lexicographically largest first.
        assert!(v.vertices()[0].cells()[0] > v.vertices()[1].cells()[0]);
    }

    #[test]
    fn empty_cone_is_a_value() {
        // mu = 0 forces p11 = 0 and uniform margins then force p00 = 0 too;
        // add a contradictory third axis pair structure at d = 3.
        let t = MarginTargets::uniform(3, vec![int(0), int(0), int(0)]).unwrap();
        let h = build_h(&t);
        let rays = extreme_rays(&h).unwrap();
        assert!(rays.is_empty());
        assert!(rays.emptied_by().is_some());
        assert!(matches!(
            polytope_dimension(&h),
            Err(Error::EmptyFeasibleSet { .. })
        ));
    }

    #[test]
    fn mixture_and_decompose_on_segment() {
        let v = enumerate_vertices(&example1_h()).unwrap();
        let half = MixtureWeights::new(vec![ratio(1, 2), ratio(1, 2)]).unwrap();
        let mid = mixture(&half, &v).unwrap();
        assert!(v.constraints().satisfies(&mid, 0.0).unwrap());
        let w = decompose(&mid, &v, 1e-9).unwrap();
        assert!((w.theta()[0] - 0.5).abs() < 1e-9 && (w.theta()[1] - 0.5).abs() < 1e-9);
        let first = mixture(&MixtureWeights::new(vec![int(1), int(0)]).unwrap(), &v).unwrap();
        assert_eq!(first, v.vertices()[0]);
        let w = decompose(&first, &v, 1e-9).unwrap();
        assert!((w.theta()[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn weight_validation() {
        assert!(matches!(
            MixtureWeights::new(vec![ratio(3, 2), ratio(-1, 2)]),
            Err(Error::NegativeWeight { index: 1 })
        ));
        assert!(matches!(
            MixtureWeights::new(vec![0.3, 0.3]),
            Err(Error::WeightsNotNormalized { .. })
        ));
        let v = enumerate_vertices(&example1_h()).unwrap();
        let w = MixtureWeights::new(vec![1.0]).unwrap();
        assert!(matches!(
            mixture(&w, &v),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn insertion_order_is_irrelevant() {
        let h = example1_h();
        let base = extreme_rays(&h).unwrap();
        let reversed: Vec<usize> = (0..6).rev().collect();
        assert_eq!(
            extreme_rays_with_order(&h, &reversed).unwrap().rays(),
            base.rays()
        );
        assert!(extreme_rays_with_order(&h, &[0, 0, 1, 2, 3, 4]).is_err());
    }
}
