//! Iterative proportional fitting onto the pairwise margins implied by a set
//! of targets, starting from the uniform table.
//!
//! Every update multiplies the table by a factor depending on one axis pair
//! only, so the fitted table never acquires interactions of order three or
//! more: its higher-order log odds ratios stay at zero (odds ratios at one).
//! The limit is the maximum-entropy table among those meeting the targets.

use crate::constraints::{build_h, MarginTargets};
use crate::error::{Error, Result};
use crate::geometry::extreme_rays;
use crate::numeric::Scalar;
use crate::table::{axis_pairs, bit, FloatPmf, Pmf};

pub const DEFAULT_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct IpfReport {
    pub table: FloatPmf,
    /// Completed sweeps over all pairs.
    pub iterations: usize,
    /// Max absolute deviation over all target 2x2 entries after the last sweep.
    pub final_residual: f64,
    pub converged: bool,
    /// Deviation after each sweep.
    pub history: Vec<f64>,
}

/// Max absolute deviation between the pairwise margins of `p` and the targets.
pub fn margin_deviation(p: &FloatPmf, targets: &MarginTargets) -> f64 {
    let mut worst = 0.0f64;
    for (i, j) in axis_pairs(targets.dim()) {
        let m = p.bivariate_margin(i, j).expect("pair in range");
        let t = targets.pair_table(i, j);
        for a in 0..2 {
            for b in 0..2 {
                worst = worst.max((m.entries[a][b] - t[a][b].to_f64()).abs());
            }
        }
    }
    worst
}

pub fn ipf_max_entropy(targets: &MarginTargets, tol: f64, max_iter: usize) -> Result<IpfReport> {
    if !(tol > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let d = targets.dim();
    let n = 1usize << d;
    let pairs: Vec<(usize, usize)> = axis_pairs(d).collect();
    let goals: Vec<[[f64; 2]; 2]> = pairs
        .iter()
        .map(|&(i, j)| {
            let t = targets.pair_table(i, j);
            [
                [t[0][0].to_f64(), t[0][1].to_f64()],
                [t[1][0].to_f64(), t[1][1].to_f64()],
            ]
        })
        .collect();

    let mut cells = vec![1.0 / n as f64; n];
    let mut history = Vec::new();
    let mut converged = false;
    let mut collapsed = false;
    'sweeps: for _ in 0..max_iter {
        for (&(i, j), goal) in pairs.iter().zip(&goals) {
            let mut current = [[0.0; 2]; 2];
            for (k, c) in cells.iter().enumerate() {
                current[bit(k, i, d) as usize][bit(k, j, d) as usize] += c;
            }
            for (k, c) in cells.iter_mut().enumerate() {
                let (a, b) = (bit(k, i, d) as usize, bit(k, j, d) as usize);
                *c = if current[a][b] > 0.0 {
                    *c * goal[a][b] / current[a][b]
                } else {
                    0.0
                };
            }
            let total: f64 = cells.iter().sum();
            if !(total > 0.0) {
                // Every cell was zeroed out: the pair targets contradict each other.
                collapsed = true;
                break 'sweeps;
            }
            cells.iter_mut().for_each(|c| *c /= total);
        }
        let table = Pmf::new(d, cells.clone())?;
        let deviation = margin_deviation(&table, targets);
        history.push(deviation);
        if deviation <= tol {
            converged = true;
            break;
        }
    }

    if !converged && d <= crate::geometry::MAX_ENUMERATION_DIM {
        let rays = extreme_rays(&build_h(targets))?;
        if rays.is_empty() {
            return Err(Error::EmptyFeasibleSet {
                row: rays.emptied_by(),
            });
        }
    }
    if collapsed {
        return Err(Error::InfeasibleTargets(
            "fitting zeroed out every cell".into(),
        ));
    }
    let table = Pmf::new(d, cells)?;
    let final_residual = history
        .last()
        .copied()
        .unwrap_or_else(|| margin_deviation(&table, targets));
    Ok(IpfReport {
        table,
        iterations: history.len(),
        final_residual,
        converged,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{int, ratio};

    #[test]
    fn independence_targets_give_uniform_table() {
        let t = MarginTargets::independence(3).unwrap();
        let r = ipf_max_entropy(&t, 1e-12, 100).unwrap();
        assert!(r.converged);
        assert_eq!(r.iterations, 1);
        for c in r.table.cells() {
            assert!((c - 0.125).abs() < 1e-15);
        }
    }

    #[test]
    fn infeasible_targets_signal_empty_set() {
        let t = MarginTargets::uniform(3, vec![int(0), int(0), int(0)]).unwrap();
        let r = ipf_max_entropy(&t, 1e-10, 50);
        assert!(matches!(r, Err(Error::EmptyFeasibleSet { .. })), "{r:?}");
    }

    #[test]
    fn non_convergence_is_reported_not_an_error() {
        let t = MarginTargets::uniform(3, vec![ratio(1, 5), ratio(1, 5), ratio(3, 10)]).unwrap();
        let r = ipf_max_entropy(&t, 1e-15, 1).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations, 1);
        assert!(ipf_max_entropy(&t, 0.0, 1).is_err());
    }
}
