//! Seeded generators for test instances and probe states.
//!
//! Everything draws from ChaCha8 streams so that a seed fixes the output
//! across platforms and runs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::linops::{ComplexMatrix, DensityMatrix, HermitianOperator};
use crate::povm::{Outcome, Povm};
use crate::scalar::{Real, C};
use crate::symspace::{CopySpace, PermutationIndex};

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard complex Gaussian: real and imaginary parts `N(0, 1/2)`.
pub fn complex_gaussian<T: Real, R: Rng + ?Sized>(rng: &mut R) -> C<T> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C::new(T::lit(re * s), T::lit(im * s))
}

pub fn gaussian_matrix<T: Real, R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix<T> {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

pub fn gaussian_vector<T: Real, R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<C<T>> {
    (0..d).map(|_| complex_gaussian(rng)).collect()
}

/// `(G + G†)/2` for a complex Gaussian `G`.
pub fn random_hermitian<T: Real, R: Rng + ?Sized>(d: usize, rng: &mut R) -> HermitianOperator<T> {
    HermitianOperator::trusted(gaussian_matrix::<T, R>(d, d, rng).hermitian_part())
}

/// Wishart-type state `G G† / Tr[G G†]`; full rank with probability one.
pub fn random_density<T: Real, R: Rng + ?Sized>(d: usize, rng: &mut R) -> DensityMatrix<T> {
    let g = gaussian_matrix::<T, R>(d, d, rng);
    let w = (&g * &g.adjoint()).hermitian_part();
    let tr = w.trace().re;
    DensityMatrix::trusted(w.scale_real(T::one() / tr))
}

/// Uniformly random permutation of `n` positions (Fisher–Yates).
pub fn random_permutation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> PermutationIndex {
    let mut m: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        m.swap(i, j);
    }
    PermutationIndex::new(m).expect("shuffle is a bijection")
}

/// Random full-rank POVM with `outcomes` elements and values in `[-1, 1]`:
/// `E_m = S^{-1/2} W_m S^{-1/2}` with Wishart `W_m` and `S = Σ W_m`.
pub fn random_povm<T: Real, R: Rng + ?Sized>(space: &CopySpace, outcomes: usize, rng: &mut R) -> Result<Povm<T>> {
    let dim = space.total_dim();
    let ws: Vec<ComplexMatrix<T>> = (0..outcomes)
        .map(|_| {
            let g = gaussian_matrix::<T, R>(dim, dim, rng);
            (&g * &g.adjoint()).hermitian_part()
        })
        .collect();
    let mut s = ComplexMatrix::zeros(dim, dim);
    for w in &ws {
        s += w;
    }
    let eig = HermitianOperator::trusted(s).spectrum()?.clone();
    let inv_sqrt = eig.weighted_sum(|_, lam| T::one() / lam.sqrt());
    let items = ws
        .iter()
        .map(|w| {
            let e = (&(&inv_sqrt * w) * &inv_sqrt).hermitian_part();
            let value = T::lit(rng.random_range(-1.0..=1.0));
            Outcome::new(value, HermitianOperator::trusted(e))
        })
        .collect();
    Povm::new(*space, items)
}
