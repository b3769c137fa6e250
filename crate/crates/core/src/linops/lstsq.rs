//! Real least squares through a one-sided Jacobi SVD.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Solution of `min ‖M x − b‖₂` together with the spectral data that
/// decides whether the system was well posed.
#[derive(Clone, Debug)]
pub struct LeastSquares<T> {
    pub solution: Vec<T>,
    /// Descending.
    pub singular_values: Vec<T>,
    pub rank: usize,
    /// `σ_max / σ_min` over all columns; infinite when rank deficient.
    pub condition_number: T,
    pub residual_norm: T,
}

/// Solves the least-squares problem for a dense `rows.len() × n` system.
///
/// Singular values at or below `rank_tol · σ_max` are treated as zero
/// (pseudo-inverse solution).
pub fn least_squares<T: Real>(rows: &[Vec<T>], rhs: &[T], rank_tol: T) -> Result<LeastSquares<T>> {
    let m = rows.len();
    if rhs.len() != m {
        return Err(Error::DimensionMismatch(format!("{m} rows but {} right-hand sides", rhs.len())));
    }
    let n = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::DimensionMismatch("ragged least-squares system".into()));
    }

    // Work column-wise: u holds the columns of M, v accumulates rotations.
    let mut u: Vec<Vec<T>> = (0..n).map(|j| rows.iter().map(|r| r[j]).collect()).collect();
    let mut v: Vec<Vec<T>> = (0..n).map(|j| (0..n).map(|i| if i == j { T::one() } else { T::zero() }).collect()).collect();
    let eps = T::epsilon();
    let mut converged = false;
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: T = u[p].iter().map(|&x| x * x).sum();
                let beta: T = u[q].iter().map(|&x| x * x).sum();
                let gamma: T = u[p].iter().zip(&u[q]).map(|(&x, &y)| x * y).sum();
                if gamma == T::zero() || gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (T::lit(2.0) * gamma);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                rotate(&mut u, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence("one-sided Jacobi SVD did not converge in 80 sweeps".into()));
    }

    let sigma: Vec<T> = u.iter().map(|col| col.iter().map(|&x| x * x).sum::<T>().sqrt()).collect();
    let sigma_max = sigma.iter().fold(T::zero(), |a, &b| a.max(b));
    let sigma_min = sigma.iter().fold(T::infinity(), |a, &b| a.min(b));
    let cutoff = rank_tol * sigma_max;

    let mut x = vec![T::zero(); n];
    let mut rank = 0;
    for k in 0..n {
        if sigma[k] <= cutoff || sigma[k] == T::zero() {
            continue;
        }
        rank += 1;
        // coefficient = (u_k · b) / σ_k², since u_k = σ_k · (unit left vector)
        let coef = u[k].iter().zip(rhs).map(|(&a, &b)| a * b).sum::<T>() / (sigma[k] * sigma[k]);
        for i in 0..n {
            x[i] = x[i] + v[k][i] * coef;
        }
    }

    let residual_norm = rows
        .iter()
        .zip(rhs)
        .map(|(r, &b)| {
            let ax: T = r.iter().zip(&x).map(|(&a, &xi)| a * xi).sum();
            (ax - b) * (ax - b)
        })
        .sum::<T>()
        .sqrt();

    let mut singular_values = sigma;
    singular_values.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let condition_number = if rank < n || sigma_min == T::zero() { T::infinity() } else { sigma_max / sigma_min };
    Ok(LeastSquares { solution: x, singular_values, rank, condition_number, residual_norm })
}

fn rotate<T: Real>(cols: &mut [Vec<T>], p: usize, q: usize, c: T, s: T) {
    let (left, right) = cols.split_at_mut(q);
    let (a, b) = (&mut left[p], &mut right[0]);
    for (x, y) in a.iter_mut().zip(b.iter_mut()) {
        let (xp, yq) = (*x, *y);
        *x = c * xp - s * yq;
        *y = s * xp + c * yq;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_square_system() {
        let m = vec![vec![2.0, 1.0], vec![1.0, 3.0]];
        let b = vec![3.0, 5.0];
        let ls: LeastSquares<f64> = least_squares(&m, &b, 1e-12).unwrap();
        assert!((ls.solution[0] - 0.8).abs() < 1e-14);
        assert!((ls.solution[1] - 1.4).abs() < 1e-14);
        assert_eq!(ls.rank, 2);
        assert!(ls.residual_norm < 1e-13);
    }

    #[test]
    fn overdetermined_fit() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [1.1, 2.9, 5.1, 6.9];
        let m: Vec<Vec<f64>> = xs.iter().map(|&x| vec![1.0, x]).collect();
        let ls: LeastSquares<f64> = least_squares(&m, &ys, 1e-12).unwrap();
        // normal equations [[4, 6], [6, 14]] c = [Σy, Σxy]
        let sy: f64 = ys.iter().sum();
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
        let det = 4.0 * 14.0 - 36.0;
        let c0 = (14.0 * sy - 6.0 * sxy) / det;
        let c1 = (4.0 * sxy - 6.0 * sy) / det;
        assert!((ls.solution[0] - c0).abs() < 1e-12 && (ls.solution[1] - c1).abs() < 1e-12);
    }

    #[test]
    fn rank_deficiency_is_reported() {
        let m = vec![vec![1.0, 2.0, 3.0], vec![2.0, 4.0, 6.0]];
        let ls: LeastSquares<f64> = least_squares(&m, &[1.0, 2.0], 1e-12).unwrap();
        assert_eq!(ls.rank, 1);
        assert!(ls.condition_number.is_infinite());
    }

    #[test]
    fn condition_number_of_diagonal() {
        let m = vec![vec![10.0, 0.0], vec![0.0, 0.01]];
        let ls: LeastSquares<f64> = least_squares(&m, &[1.0, 1.0], 1e-15).unwrap();
        assert!((ls.condition_number - 1000.0).abs() < 1e-9);
        assert_eq!(ls.singular_values, vec![10.0, 0.01]);
    }
}
