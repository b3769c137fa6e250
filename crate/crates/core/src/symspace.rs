//! Permutations of the `N` copies acting on `H^⊗N`: permutation operators,
//! single-site lifting, twirling, the symmetrised observable `Θ`, and a
//! basis of the permutation-invariant operators.

use std::collections::BTreeMap;

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::linops::{kron_capped, ComplexMatrix, HermitianOperator, DEFAULT_DIM_CAP};
use crate::scalar::{cone, Real};

/// Largest copy count for which [`twirl`] enumerates `N!` permutations.
pub const MAX_TWIRL_COPIES: usize = 8;

/// A permutation `σ` of the copy positions, stored 0-based: `σ(i) = mapping[i]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PermutationIndex {
    mapping: Vec<usize>,
}

impl PermutationIndex {
    pub fn new(mapping: Vec<usize>) -> Result<Self> {
        let n = mapping.len();
        let mut seen = vec![false; n];
        for &m in &mapping {
            if m >= n || seen[m] {
                return Err(Error::InvalidPermutation(format!("{mapping:?} is not a bijection of 0..{n}")));
            }
            seen[m] = true;
        }
        Ok(Self { mapping })
    }

    /// From the conventional 1-based image list `σ(1), …, σ(N)`.
    pub fn from_one_based(images: &[usize]) -> Result<Self> {
        if images.contains(&0) {
            return Err(Error::InvalidPermutation("1-based images must be positive".into()));
        }
        Self::new(images.iter().map(|&i| i - 1).collect())
    }

    pub fn identity(n: usize) -> Self {
        Self { mapping: (0..n).collect() }
    }

    /// Swap of positions `i` and `j` (0-based).
    pub fn transposition(n: usize, i: usize, j: usize) -> Result<Self> {
        if i >= n || j >= n {
            return Err(Error::InvalidPermutation(format!("transposition ({i} {j}) on {n} copies")));
        }
        let mut mapping: Vec<usize> = (0..n).collect();
        mapping.swap(i, j);
        Ok(Self { mapping })
    }

    /// Every permutation of `n` positions in lexicographic order.
    pub fn all(n: usize) -> impl Iterator<Item = PermutationIndex> {
        (0..n).permutations(n).map(|mapping| PermutationIndex { mapping })
    }

    pub fn n_copies(&self) -> usize {
        self.mapping.len()
    }

    pub fn mapping(&self) -> &[usize] {
        &self.mapping
    }

    pub fn apply(&self, i: usize) -> usize {
        self.mapping[i]
    }

    /// `σ∘τ`, i.e. `i ↦ σ(τ(i))`.
    pub fn compose(&self, tau: &PermutationIndex) -> Result<Self> {
        if self.n_copies() != tau.n_copies() {
            return Err(Error::DimensionMismatch(format!(
                "composing permutations of {} and {} copies",
                self.n_copies(),
                tau.n_copies()
            )));
        }
        Ok(Self { mapping: tau.mapping.iter().map(|&t| self.mapping[t]).collect() })
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.mapping.len()];
        for (i, &m) in self.mapping.iter().enumerate() {
            inv[m] = i;
        }
        Self { mapping: inv }
    }
}

/// The joint space of `n_copies` systems of dimension `local_dim`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CopySpace {
    local_dim: usize,
    n_copies: usize,
    total_dim: usize,
}

impl CopySpace {
    pub fn new(local_dim: usize, n_copies: usize) -> Result<Self> {
        Self::with_cap(local_dim, n_copies, DEFAULT_DIM_CAP)
    }

    pub fn with_cap(local_dim: usize, n_copies: usize, cap: usize) -> Result<Self> {
        if n_copies == 0 {
            return Err(Error::ZeroCopies);
        }
        if local_dim == 0 {
            return Err(Error::InvalidArgument("local dimension must be positive".into()));
        }
        let exp = u32::try_from(n_copies).map_err(|_| Error::InvalidArgument("copy count too large".into()))?;
        match local_dim.checked_pow(exp) {
            Some(total_dim) if total_dim <= cap => Ok(Self { local_dim, n_copies, total_dim }),
            _ => Err(Error::Capacity { requested: format!("{local_dim}^{n_copies}"), cap }),
        }
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn n_copies(&self) -> usize {
        self.n_copies
    }

    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    /// Big-endian digits `(i₁, …, i_N)` of a joint basis index.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.n_copies];
        for slot in out.iter_mut().rev() {
            *slot = index % self.local_dim;
            index /= self.local_dim;
        }
        out
    }

    pub fn index(&self, digits: &[usize]) -> usize {
        digits.iter().fold(0, |acc, &d| acc * self.local_dim + d)
    }

    /// Basis image under `Π_σ`: the digit at position `i` moves to `σ(i)`.
    pub fn permuted_index(&self, sigma: &PermutationIndex, index: usize) -> usize {
        let digits = self.digits(index);
        let mut out = vec![0; self.n_copies];
        for (i, &d) in digits.iter().enumerate() {
            out[sigma.apply(i)] = d;
        }
        self.index(&out)
    }

    /// `b ↦ Π_σ(b)` for every basis index.
    pub fn index_map(&self, sigma: &PermutationIndex) -> Vec<usize> {
        (0..self.total_dim).map(|b| self.permuted_index(sigma, b)).collect()
    }

    fn check_copies(&self, sigma: &PermutationIndex) -> Result<()> {
        if sigma.n_copies() != self.n_copies {
            return Err(Error::DimensionMismatch(format!(
                "permutation of {} copies on a space of {} copies",
                sigma.n_copies(),
                self.n_copies
            )));
        }
        Ok(())
    }

    fn check_operator<T: Real>(&self, x: &ComplexMatrix<T>) -> Result<()> {
        if x.rows() != self.total_dim || x.cols() != self.total_dim {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} operator on a {}-dimensional joint space",
                x.rows(),
                x.cols(),
                self.total_dim
            )));
        }
        Ok(())
    }
}

/// `Π_σ`, with `Π_σ(v₁⊗…⊗v_N) = v_{σ⁻¹(1)}⊗…⊗v_{σ⁻¹(N)}`.
pub fn permutation_operator<T: Real>(sigma: &PermutationIndex, space: &CopySpace) -> Result<ComplexMatrix<T>> {
    space.check_copies(sigma)?;
    let mut p = ComplexMatrix::zeros(space.total_dim, space.total_dim);
    for (b, image) in space.index_map(sigma).into_iter().enumerate() {
        p[(image, b)] = cone();
    }
    Ok(p)
}

/// `Π† X Π` for the permutation whose basis map is `map`.
fn conjugate_by_map<T: Real>(x: &ComplexMatrix<T>, map: &[usize]) -> ComplexMatrix<T> {
    ComplexMatrix::from_fn(x.rows(), x.cols(), |a, b| x[(map[a], map[b])])
}

/// `A^(k) = I^⊗(k−1) ⊗ A ⊗ I^⊗(N−k)` for a 1-based position `k`.
pub fn lift<T: Real>(a: &HermitianOperator<T>, k: usize, space: &CopySpace) -> Result<HermitianOperator<T>> {
    let n = space.n_copies;
    if k == 0 || k > n {
        return Err(Error::PositionOutOfRange { position: k, copies: n });
    }
    if a.dim() != space.local_dim {
        return Err(Error::DimensionMismatch(format!(
            "observable of dimension {} lifted into copies of dimension {}",
            a.dim(),
            space.local_dim
        )));
    }
    let id = ComplexMatrix::identity(space.local_dim);
    let cap = space.total_dim;
    let mut acc = if k == 1 { a.matrix().clone() } else { id.clone() };
    for pos in 2..=n {
        let factor = if pos == k { a.matrix() } else { &id };
        acc = kron_capped(&acc, factor, cap)?;
    }
    Ok(HermitianOperator::trusted_with_tol(acc, a.tol()))
}

/// `(1/N!) Σ_σ Π_σ† X Π_σ`, enumerated exactly for `N ≤ 8`.
pub fn twirl<T: Real>(x: &ComplexMatrix<T>, space: &CopySpace) -> Result<ComplexMatrix<T>> {
    space.check_operator(x)?;
    let n = space.n_copies;
    if n > MAX_TWIRL_COPIES {
        return Err(Error::Capacity { requested: format!("{n}! permutations"), cap: MAX_TWIRL_COPIES });
    }
    let mut acc = ComplexMatrix::zeros(x.rows(), x.cols());
    let mut count = 0usize;
    for sigma in PermutationIndex::all(n) {
        let map = space.index_map(&sigma);
        let dim = x.rows();
        let out = acc.as_mut_slice();
        for a in 0..dim {
            for b in 0..dim {
                out[a * dim + b] = out[a * dim + b] + x[(map[a], map[b])];
            }
        }
        count += 1;
    }
    Ok(acc.scale_real(T::one() / T::from_count(count)))
}

/// `Θ = (1/N) Σ_k A^(k)`.
pub fn theta<T: Real>(a: &HermitianOperator<T>, space: &CopySpace) -> Result<HermitianOperator<T>> {
    let dim = space.total_dim;
    let mut acc = ComplexMatrix::zeros(dim, dim);
    for k in 1..=space.n_copies {
        acc += lift(a, k, space)?.matrix();
    }
    let scaled = acc.scale_real(T::one() / T::from_count(space.n_copies));
    Ok(HermitianOperator::trusted_with_tol(scaled, a.tol()))
}

/// Invariance under all adjacent transpositions (which generate `S_N`).
pub fn is_perm_invariant<T: Real>(x: &ComplexMatrix<T>, space: &CopySpace, tol: T) -> bool {
    if space.check_operator(x).is_err() {
        return false;
    }
    (0..space.n_copies.saturating_sub(1)).all(|i| {
        let tau = PermutationIndex::transposition(space.n_copies, i, i + 1).expect("in range");
        let map = space.index_map(&tau);
        conjugate_by_map(x, &map).max_abs_diff(x) <= tol
    })
}

/// One orbit of basis-index pairs `(row, col)` under the simultaneous
/// permutation action.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Orbit {
    /// Sorted per-copy digit pairs `(j_p, k_p)`; identifies the orbit and is
    /// the lexicographically smallest representative.
    pub key: Vec<(usize, usize)>,
    /// Joint `(row, col)` indices in the orbit, ascending.
    pub members: Vec<(usize, usize)>,
}

impl Orbit {
    /// Key of the orbit containing the transposed pairs.
    pub fn adjoint_key(&self) -> Vec<(usize, usize)> {
        let mut k: Vec<_> = self.key.iter().map(|&(j, k)| (k, j)).collect();
        k.sort_unstable();
        k
    }

    pub fn is_self_adjoint(&self) -> bool {
        self.adjoint_key() == self.key
    }

    /// Unnormalised orbit sum of matrix units.
    pub fn matrix<T: Real>(&self, dim: usize) -> ComplexMatrix<T> {
        let mut m = ComplexMatrix::zeros(dim, dim);
        for &(r, c) in &self.members {
            m[(r, c)] = cone();
        }
        m
    }
}

type PairList = Vec<(usize, usize)>;

/// Orbits in ascending key order.
pub fn invariant_orbits(space: &CopySpace) -> Result<Vec<Orbit>> {
    let dim = space.total_dim;
    let mut orbits: BTreeMap<PairList, PairList> = BTreeMap::new();
    let digits: Vec<Vec<usize>> = (0..dim).map(|i| space.digits(i)).collect();
    for r in 0..dim {
        for c in 0..dim {
            let mut key: Vec<(usize, usize)> = digits[r].iter().copied().zip(digits[c].iter().copied()).collect();
            key.sort_unstable();
            orbits.entry(key).or_default().push((r, c));
        }
    }
    Ok(orbits.into_iter().map(|(key, members)| Orbit { key, members }).collect())
}

/// Basis of the permutation-invariant operators on the joint space: one
/// orbit sum of matrix units per orbit, ordered by canonical representative.
pub fn invariant_basis<T: Real>(space: &CopySpace) -> Result<Vec<ComplexMatrix<T>>> {
    let dim = space.total_dim;
    Ok(invariant_orbits(space)?.iter().map(|o| o.matrix(dim)).collect())
}
