//! Dense Hermitian eigensolver.
//!
//! Householder reduction to a Hermitian tridiagonal matrix, a diagonal phase
//! change that makes the tridiagonal real, then implicit QL with Wilkinson
//! shifts on the real tridiagonal (the EISPACK `tql2` scheme), rotating the
//! accumulated complex basis along the way.

use crate::error::{Error, Result};
use crate::scalar::{cr, Real, C};

use super::ComplexMatrix;

/// Spectral decomposition `h = V·diag(values)·V†` with ascending values.
#[derive(Clone, Debug)]
pub struct Eigen<T> {
    pub values: Vec<T>,
    /// Orthonormal eigenvectors stored as columns.
    pub vectors: ComplexMatrix<T>,
}

impl<T: Real> Eigen<T> {
    pub fn vector(&self, k: usize) -> Vec<C<T>> {
        self.vectors.column(k)
    }

    /// `V·diag(values)·V†`.
    pub fn reassemble(&self) -> ComplexMatrix<T> {
        self.weighted_sum(|_, lam| lam)
    }

    /// Orthogonal projector onto the span of the listed eigenvectors.
    pub fn projector(&self, indices: &[usize]) -> ComplexMatrix<T> {
        let n = self.vectors.rows();
        let mut p = ComplexMatrix::zeros(n, n);
        for &k in indices {
            add_outer(&mut p, &self.vector(k), T::one());
        }
        p
    }

    /// `Σ_k f(k, λ_k) v_k v_k†`.
    pub fn weighted_sum(&self, mut f: impl FnMut(usize, T) -> T) -> ComplexMatrix<T> {
        let n = self.vectors.rows();
        let mut m = ComplexMatrix::zeros(n, n);
        for (k, &lam) in self.values.iter().enumerate() {
            let w = f(k, lam);
            if w != T::zero() {
                add_outer(&mut m, &self.vector(k), w);
            }
        }
        m
    }
}

fn add_outer<T: Real>(m: &mut ComplexMatrix<T>, v: &[C<T>], w: T) {
    let n = v.len();
    for i in 0..n {
        let vi = v[i] * w;
        for j in 0..n {
            m[(i, j)] = m[(i, j)] + vi * v[j].conj();
        }
    }
}

/// Eigendecomposition of a square matrix assumed Hermitian; only the lower
/// triangle is read.
pub fn hermitian_eigen<T: Real>(m: &ComplexMatrix<T>) -> Result<Eigen<T>> {
    let (values, q) = decompose(m, true)?;
    let q = q.expect("vectors requested");
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap_or(std::cmp::Ordering::Equal));
    let sorted = order.iter().map(|&i| values[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| q[(r, order[c])]);
    Ok(Eigen { values: sorted, vectors })
}

/// Ascending eigenvalues only; several times cheaper than [`hermitian_eigen`].
pub fn hermitian_eigenvalues<T: Real>(m: &ComplexMatrix<T>) -> Result<Vec<T>> {
    let (mut values, _) = decompose(m, false)?;
    values.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    Ok(values)
}

/// Householder tridiagonalisation then implicit QL. Eigenvalues come back
/// unsorted, with matching eigenvector columns when `vectors` is set.
fn decompose<T: Real>(m: &ComplexMatrix<T>, vectors: bool) -> Result<(Vec<T>, Option<ComplexMatrix<T>>)> {
    if !m.is_square() {
        return Err(Error::NotSquare { rows: m.rows(), cols: m.cols() });
    }
    let n = m.rows();
    if n == 0 {
        return Ok((Vec::new(), vectors.then(|| ComplexMatrix::zeros(0, 0))));
    }
    let mut a = ComplexMatrix::from_fn(n, n, |i, j| if i >= j { m[(i, j)] } else { m[(j, i)].conj() });
    let mut q = if vectors { ComplexMatrix::<T>::identity(n) } else { ComplexMatrix::zeros(0, 0) };
    let q_rows = q.rows();
    let two = T::lit(2.0);

    for k in 0..n.saturating_sub(2) {
        let len = n - k - 1;
        let mut v: Vec<C<T>> = (0..len).map(|i| a[(k + 1 + i, k)]).collect();
        let xnorm = v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        if xnorm == T::zero() {
            continue;
        }
        let x0 = v[0];
        let phase = if x0.norm() == T::zero() { cr(T::one()) } else { x0 / x0.norm() };
        let alpha = -phase * xnorm;
        v[0] = v[0] - alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        if vnorm == T::zero() {
            continue;
        }
        for z in v.iter_mut() {
            *z = *z / vnorm;
        }

        a[(k + 1, k)] = alpha;
        a[(k, k + 1)] = alpha.conj();
        for i in k + 2..n {
            a[(i, k)] = cr(T::zero());
            a[(k, i)] = cr(T::zero());
        }

        // Trailing block B ← H B H with H = I − 2vv†.
        let off = k + 1;
        let data = a.as_mut_slice();
        let p: Vec<C<T>> = (0..len)
            .map(|i| {
                let row = &data[(off + i) * n + off..(off + i) * n + n];
                row.iter().zip(&v).fold(cr(T::zero()), |acc, (&x, &vj)| acc + x * vj)
            })
            .collect();
        let kappa = v.iter().zip(&p).fold(cr(T::zero()), |acc, (&vi, &pi)| acc + vi.conj() * pi).re;
        let w: Vec<C<T>> = p.iter().zip(&v).map(|(&pi, &vi)| pi - vi * kappa).collect();
        let vc: Vec<C<T>> = v.iter().map(|z| z.conj() * two).collect();
        let wc: Vec<C<T>> = w.iter().map(|z| z.conj() * two).collect();
        for i in 0..len {
            let (vi, wi) = (v[i], w[i]);
            let row = &mut data[(off + i) * n + off..(off + i) * n + n];
            for ((x, &wcj), &vcj) in row.iter_mut().zip(&wc).zip(&vc) {
                *x = *x - (vi * wcj + wi * vcj);
            }
        }

        // Q ← Q H.
        let qd = q.as_mut_slice();
        for r in 0..q_rows {
            let row = &mut qd[r * n + off..r * n + n];
            let s = row.iter().zip(&v).fold(cr(T::zero()), |acc, (&x, &vj)| acc + x * vj) * two;
            for (x, &vj) in row.iter_mut().zip(&v) {
                *x = *x - s * vj.conj();
            }
        }
    }

    // Make the tridiagonal real with non-negative couplings.
    let mut diag: Vec<T> = (0..n).map(|i| a[(i, i)].re).collect();
    let mut off_diag = vec![T::zero(); n];
    let mut phase = cr(T::one());
    for k in 0..n - 1 {
        let t = a[(k + 1, k)];
        let mag = t.norm();
        off_diag[k] = mag;
        if mag > T::zero() {
            phase = phase * (t / mag);
        }
        for r in 0..q_rows {
            q[(r, k + 1)] = q[(r, k + 1)] * phase;
        }
    }

    // Rotations act on eigenvector columns; work on the transpose so each
    // column is a contiguous row.
    let mut qt = q.transpose();
    tql2(&mut diag, &mut off_diag, &mut qt)?;
    let q = qt.transpose();
    Ok((diag, vectors.then_some(q)))
}

/// Implicit QL on the real symmetric tridiagonal (`d`, `e`), where `e[i]`
/// couples `i` and `i+1`. Rotations are applied to the rows of `zt`, the
/// transposed eigenvector matrix (skipped when it is empty).
fn tql2<T: Real>(d: &mut [T], e: &mut [T], zt: &mut ComplexMatrix<T>) -> Result<()> {
    let n = d.len();
    let eps = T::epsilon();
    let two = T::lit(2.0);
    let max_iter = 30 * n.max(1) + 30;
    let mut f = T::zero();
    let mut tst1 = T::zero();
    e[n - 1] = T::zero();

    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iter = 0usize;
            loop {
                iter += 1;
                if iter > max_iter {
                    return Err(Error::NoConvergence(format!(
                        "QL iteration for eigenvalue {l} exceeded {max_iter} steps (n = {n})"
                    )));
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (two * e[l]);
                let mut r = p.hypot(T::one());
                if p < T::zero() {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di = *di - h;
                }
                f = f + h;

                p = d[m];
                let mut c = T::one();
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = T::zero();
                let mut s2 = T::zero();
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if zt.rows() > 0 {
                        let (head, tail) = zt.as_mut_slice().split_at_mut((i + 1) * n);
                        let zi_row = &mut head[i * n..];
                        let zh_row = &mut tail[..n];
                        for (zi, zh) in zi_row.iter_mut().zip(zh_row.iter_mut()) {
                            let (a, b) = (*zi, *zh);
                            *zh = a * s + b * c;
                            *zi = a * c - b * s;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] = d[l] + f;
        e[l] = T::zero();
    }
    Ok(())
}
