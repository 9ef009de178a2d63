//! Nonnegative least squares (Lawson-Hanson) and the convex-weight fit used
//! by vertex decomposition.
//!
//! The solver works on the normal equations `G x = c` with `G = A^T A`, so
//! each passive-set solve is a small dense system regardless of how many
//! rows `A` has.

use nalgebra::{DMatrix, DVector};

/// Solves `min ||A x - b||` subject to `x >= 0`.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    nnls_gram(&(a.transpose() * a), &(a.transpose() * b))
}

/// Lawson-Hanson on `min x^T G x / 2 - c^T x` subject to `x >= 0`, with `G`
/// symmetric positive semidefinite.
pub fn nnls_gram(g: &DMatrix<f64>, c: &DVector<f64>) -> DVector<f64> {
    let n = g.ncols();
    let mut x = DVector::zeros(n);
    let mut passive = vec![false; n];
    let tol = 1e-13 * g.amax().max(1.0) * c.amax().max(1.0) * (n.max(1) as f64);
    let max_outer = 3 * n + 10;

    for _ in 0..max_outer {
        let w = c - g * &x;
        let Some((j, wj)) = (0..n)
            .filter(|&j| !passive[j])
            .map(|j| (j, w[j]))
            .max_by(|p, q| p.1.total_cmp(&q.1))
        else {
            break;
        };
        if wj <= tol {
            break;
        }
        passive[j] = true;

        for _ in 0..max_outer {
            let s = solve_passive(g, c, &passive);
            if (0..n).filter(|&i| passive[i]).all(|i| s[i] > 0.0) {
                x = s;
                break;
            }
            let alpha = (0..n)
                .filter(|&i| passive[i] && s[i] <= 0.0)
                .map(|i| x[i] / (x[i] - s[i]))
                .fold(f64::INFINITY, f64::min);
            x += alpha * (&s - &x);
            for i in 0..n {
                if passive[i] && x[i] <= 1e-15 {
                    passive[i] = false;
                    x[i] = 0.0;
                }
            }
        }
    }
    x
}

/// Solves `G_PP x_P = c_P` on the passive set, zero elsewhere.
fn solve_passive(g: &DMatrix<f64>, c: &DVector<f64>, passive: &[bool]) -> DVector<f64> {
    let idx: Vec<usize> = (0..g.ncols()).filter(|&j| passive[j]).collect();
    let mut out = DVector::zeros(g.ncols());
    if idx.is_empty() {
        return out;
    }
    let sub = DMatrix::from_fn(idx.len(), idx.len(), |r, k| g[(idx[r], idx[k])]);
    let rhs = DVector::from_fn(idx.len(), |r, _| c[idx[r]]);
    let z = match sub.clone().cholesky() {
        Some(ch) => ch.solve(&rhs),
        None => min_norm_solve(&sub, &rhs),
    };
    for (k, &j) in idx.iter().enumerate() {
        out[j] = z[k];
    }
    out
}

/// Least-squares solution restricted to the selected columns (others zero).
fn solve_on(a: &DMatrix<f64>, b: &DVector<f64>, selected: &[bool]) -> DVector<f64> {
    let cols: Vec<usize> = (0..a.ncols()).filter(|&j| selected[j]).collect();
    let mut out = DVector::zeros(a.ncols());
    if cols.is_empty() {
        return out;
    }
    let sub = a.select_columns(&cols);
    let z = min_norm_solve(&sub, b);
    for (k, &j) in cols.iter().enumerate() {
        out[j] = z[k];
    }
    out
}

/// Minimum-norm least-squares solution via SVD.
fn min_norm_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let svd = a.clone().svd(true, true);
    let cutoff = svd.singular_values.max() * 1e-12 * (a.nrows().max(a.ncols()) as f64);
    svd.solve(b, cutoff)
        .unwrap_or_else(|_| DVector::zeros(a.ncols()))
}

/// Convex weights `theta` over `columns` approximating `target`.
///
/// Fits `[V; 1] theta = [p; 1]` with a small ridge term so that, among
/// weight vectors fitting equally well, the smallest one is chosen; then
/// polishes by taking the exact minimum-norm solution on the support found.
pub fn min_norm_convex_weights(columns: &[Vec<f64>], target: &[f64]) -> Vec<f64> {
    let m = target.len();
    let n = columns.len();
    let ridge = 1e-6;
    let mut a = DMatrix::zeros(m + 1, n);
    for (j, col) in columns.iter().enumerate() {
        for (i, x) in col.iter().enumerate() {
            a[(i, j)] = *x;
        }
        a[(m, j)] = 1.0;
    }
    let mut b = DVector::zeros(m + 1);
    for (i, t) in target.iter().enumerate() {
        b[i] = *t;
    }
    b[m] = 1.0;
    let gram = a.transpose() * &a;
    let rhs = a.transpose() * &b;
    let ridged = nnls_gram(&(&gram + DMatrix::identity(n, n) * ridge), &rhs);

    let peak = ridged.amax();
    let support: Vec<bool> = ridged
        .iter()
        .map(|&t| t > 1e-9 * peak.max(1e-300))
        .collect();
    let polished = solve_on(&a, &b, &support);

    let err = |x: &DVector<f64>| (&a * x - &b).amax();
    let candidate =
        if polished.iter().all(|&t| t >= -1e-13) && err(&polished) <= err(&ridged).max(1e-13) {
            polished
        } else {
            // The ridge biases the fit; refine the plain problem from scratch.
            let plain = nnls_gram(&gram, &rhs);
            if err(&plain) < err(&ridged) {
                plain
            } else {
                ridged
            }
        };

    let mut theta: Vec<f64> = candidate.iter().map(|&t| t.max(0.0)).collect();
    let total: f64 = theta.iter().sum();
    if total > 0.0 {
        for t in theta.iter_mut() {
            *t /= total;
        }
    } else if n > 0 {
        theta = vec![1.0 / n as f64; n];
    }
    theta
}
