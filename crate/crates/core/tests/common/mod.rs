//! Reference computations for the integration tests: nested `Vec` matrices,
//! explicit loops, no shared code with the library.

#![allow(dead_code)]

use num_complex::Complex64;
use qobs::{ComplexMatrix, DensityMatrix, HermitianOperator, Povm};

pub type M = Vec<Vec<Complex64>>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn dense(m: &ComplexMatrix<f64>) -> M {
    (0..m.rows()).map(|i| (0..m.cols()).map(|j| m[(i, j)]).collect()).collect()
}

pub fn zeros(n: usize) -> M {
    vec![vec![c(0.0, 0.0); n]; n]
}

pub fn eye(n: usize) -> M {
    let mut m = zeros(n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = c(1.0, 0.0);
    }
    m
}

pub fn kron(a: &M, b: &M) -> M {
    let (n, k) = (a.len(), b.len());
    let mut out = zeros(n * k);
    for i in 0..n {
        for j in 0..n {
            for p in 0..k {
                for q in 0..k {
                    out[i * k + p][j * k + q] = a[i][j] * b[p][q];
                }
            }
        }
    }
    out
}

pub fn kron_vecs(vs: &[Vec<Complex64>]) -> Vec<Complex64> {
    let mut out = vec![c(1.0, 0.0)];
    for v in vs {
        out = out.iter().flat_map(|&a| v.iter().map(move |&b| a * b)).collect();
    }
    out
}

pub fn power(rho: &M, n: usize) -> M {
    let mut out = eye(1);
    for _ in 0..n {
        out = kron(&out, rho);
    }
    out
}

pub fn matmul(a: &M, b: &M) -> M {
    let n = a.len();
    let mut out = zeros(n);
    for i in 0..n {
        for k in 0..n {
            for j in 0..n {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

/// `Σ_ij a[i][j]·b[j][i]`.
pub fn trace_prod(a: &M, b: &M) -> Complex64 {
    let mut s = c(0.0, 0.0);
    for i in 0..a.len() {
        for j in 0..a.len() {
            s += a[i][j] * b[j][i];
        }
    }
    s
}

pub fn quad(x: &M, w: &[Complex64]) -> Complex64 {
    let mut s = c(0.0, 0.0);
    for i in 0..w.len() {
        for j in 0..w.len() {
            s += w[i].conj() * x[i][j] * w[j];
        }
    }
    s
}

pub fn max_diff(a: &M, b: &M) -> f64 {
    a.iter().flatten().zip(b.iter().flatten()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn frobenius_diff(a: &M, b: &M) -> f64 {
    a.iter().flatten().zip(b.iter().flatten()).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

/// All permutations of `0..n` by recursive insertion.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..n {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

fn digits(mut i: usize, d: usize, n: usize) -> Vec<usize> {
    let mut out = vec![0; n];
    for slot in out.iter_mut().rev() {
        *slot = i % d;
        i /= d;
    }
    out
}

fn undigits(ds: &[usize], d: usize) -> usize {
    ds.iter().fold(0, |acc, &x| acc * d + x)
}

/// Index with the digit at position `i` moved to `perm[i]`.
pub fn permute_index(i: usize, perm: &[usize], d: usize) -> usize {
    let ds = digits(i, d, perm.len());
    let mut out = vec![0; perm.len()];
    for (pos, &digit) in ds.iter().enumerate() {
        out[perm[pos]] = digit;
    }
    undigits(&out, d)
}

/// `(1/N!) Σ_σ Π_σ X Π_σ†` by brute force.
pub fn twirl(x: &M, d: usize, n: usize) -> M {
    let dim = x.len();
    let perms = permutations(n);
    let mut out = zeros(dim);
    for p in &perms {
        for a in 0..dim {
            for b in 0..dim {
                out[permute_index(a, p, d)][permute_index(b, p, d)] += x[a][b];
            }
        }
    }
    let inv = 1.0 / perms.len() as f64;
    out.iter_mut().flatten().for_each(|z| *z *= inv);
    out
}

/// `(1/N) Σ_k I⊗…⊗A⊗…⊗I`, built from Kronecker products.
pub fn theta(a: &M, n: usize) -> M {
    let d = a.len();
    let dim = d.pow(n as u32);
    let id = eye(d);
    let mut out = zeros(dim);
    for k in 0..n {
        let mut term = eye(1);
        for j in 0..n {
            term = kron(&term, if j == k { a } else { &id });
        }
        for i in 0..dim {
            for j in 0..dim {
                out[i][j] += term[i][j] / n as f64;
            }
        }
    }
    out
}

/// `(⟨A⟩, ⟨(A − ⟨A⟩)²⟩)`.
pub fn mean_and_variance(a: &M, rho: &M) -> (f64, f64) {
    let mean = trace_prod(a, rho).re;
    let mut centered = a.clone();
    for (i, row) in centered.iter_mut().enumerate() {
        row[i] -= mean;
    }
    (mean, trace_prod(&matmul(&centered, &centered), rho).re)
}

/// Born-rule probabilities of every outcome on `ρ^⊗N`, element by element.
pub fn born(p: &Povm<f64>, rho: &DensityMatrix<f64>) -> Vec<f64> {
    let joint = power(&dense(rho.matrix()), p.space().n_copies());
    p.outcomes().iter().map(|o| trace_prod(&dense(o.element.matrix()), &joint).re).collect()
}

/// `√(Σ_m p_m r_m² − ⟨A⟩²)` from the element-wise Born rule.
pub fn povm_error(p: &Povm<f64>, a: &HermitianOperator<f64>, rho: &DensityMatrix<f64>) -> f64 {
    let probs = born(p, rho);
    let mean = trace_prod(&dense(a.matrix()), &dense(rho.matrix())).re;
    let second: f64 = probs.iter().zip(p.outcomes()).map(|(q, o)| q * o.value * o.value).sum();
    let first: f64 = probs.iter().zip(p.outcomes()).map(|(q, o)| q * o.value).sum();
    assert!((first - mean).abs() < 1e-8, "POVM is biased on this state: {first} vs {mean}");
    (second - mean * mean).max(0.0).sqrt()
}
