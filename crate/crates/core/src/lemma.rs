//! Permutation-invariant operators are fixed by their product-state data.
//!
//! Two constructive directions are provided. [`reconstruct_from_diagonal`]
//! recovers every matrix element of an arbitrary operator from its quadratic
//! form on product vectors through an `N`-fold complex polarization sum.
//! [`reconstruct_from_moments`] recovers a permutation-invariant Hermitian
//! operator from the ensemble averages `Tr[X ρ^⊗N]` on a set of probe states
//! by least squares over the invariant basis. The multilinear coefficient of
//! `∏_j λ_j` in `Tr[X (Σ_j λ_j |ψ_j⟩⟨ψ_j|)^⊗N]` is available both by
//! inclusion–exclusion ([`coefficient_extract`]) and as the direct sum over
//! permutations ([`symmetrized_product_sum`]).

use rand::Rng;

use crate::error::{Error, Result};
use crate::linops::{kron_capped, least_squares, ComplexMatrix, DensityMatrix, HermitianOperator, DEFAULT_DIM_CAP};
use crate::random::{gaussian_vector, random_density, random_hermitian, seeded};
use crate::scalar::{cone, czero, i_pow, Real, C};
use crate::symspace::{invariant_orbits, twirl, CopySpace, PermutationIndex};

/// Default limits for the `4^N · d^{2N}`-call polarization reconstruction.
pub const MAX_POLARIZATION_COPIES: usize = 4;
pub const MAX_POLARIZATION_DIM: usize = 3;

/// Probe systems with a larger condition number are rejected.
pub const DEFAULT_MAX_CONDITION: f64 = 1e8;

/// Relative singular-value cutoff used to decide the probe-system rank.
pub const DEFAULT_RANK_TOL: f64 = 1e-12;

/// `|ψ₁⟩ ⊗ … ⊗ |ψ_N⟩` with factors of equal dimension; factors need not be
/// normalised or orthogonal.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductVector<T> {
    factors: Vec<Vec<C<T>>>,
}

impl<T: Real> ProductVector<T> {
    pub fn new(factors: Vec<Vec<C<T>>>) -> Result<Self> {
        let d = factors.first().map(Vec::len).ok_or_else(|| Error::InvalidArgument("no factors".into()))?;
        if d == 0 || factors.iter().any(|f| f.len() != d) {
            return Err(Error::DimensionMismatch("product vector factors must share a positive dimension".into()));
        }
        if factors.iter().flatten().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidArgument("product vector has non-finite entries".into()));
        }
        Ok(Self { factors })
    }

    pub fn factors(&self) -> &[Vec<C<T>>] {
        &self.factors
    }

    pub fn local_dim(&self) -> usize {
        self.factors[0].len()
    }

    pub fn n_copies(&self) -> usize {
        self.factors.len()
    }

    /// `Π_σ† |ψ₁…ψ_N⟩`, i.e. the product with factor `ψ_{σ(p)}` at position `p`.
    pub fn permuted(&self, sigma: &PermutationIndex) -> Self {
        Self { factors: (0..self.n_copies()).map(|p| self.factors[sigma.apply(p)].clone()).collect() }
    }

    /// Amplitude on the joint basis state with the given digits.
    fn amplitude(&self, digits: &[usize]) -> C<T> {
        self.factors.iter().zip(digits).fold(cone(), |acc, (f, &d)| acc * f[d])
    }
}

/// A weighted family `Σ_j λ_j |ψ_j⟩⟨ψ_j|` (weights and vectors unnormalised).
#[derive(Clone, Debug, PartialEq)]
pub struct MixtureSpec<T> {
    weights: Vec<T>,
    vectors: Vec<Vec<C<T>>>,
}

impl<T: Real> MixtureSpec<T> {
    pub fn new(weights: Vec<T>, vectors: Vec<Vec<C<T>>>) -> Result<Self> {
        if weights.len() != vectors.len() {
            return Err(Error::DimensionMismatch(format!("{} weights for {} vectors", weights.len(), vectors.len())));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidArgument("mixture weights must be finite".into()));
        }
        ProductVector::new(vectors.clone())?;
        Ok(Self { weights, vectors })
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn vectors(&self) -> &[Vec<C<T>>] {
        &self.vectors
    }

    pub fn matrix(&self) -> ComplexMatrix<T> {
        self.matrix_with(&self.weights)
    }

    /// `Σ_j w_j |ψ_j⟩⟨ψ_j|` for replacement weights.
    pub fn matrix_with(&self, weights: &[T]) -> ComplexMatrix<T> {
        let d = self.vectors[0].len();
        let mut m = ComplexMatrix::zeros(d, d);
        for (v, &w) in self.vectors.iter().zip(weights) {
            if w != T::zero() {
                m += &ComplexMatrix::outer(v, v).scale_real(w);
            }
        }
        m
    }

    pub fn as_product_vector(&self) -> ProductVector<T> {
        ProductVector { factors: self.vectors.clone() }
    }
}

fn space_for<T: Real>(x: &ComplexMatrix<T>, d: usize, n: usize) -> Result<CopySpace> {
    let space = CopySpace::with_cap(d, n, DEFAULT_DIM_CAP.max(x.rows()))?;
    if !x.is_square() || x.rows() != space.total_dim() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} operator for {n} copies of dimension {d}",
            x.rows(),
            x.cols()
        )));
    }
    Ok(space)
}

/// `⟨ψ₁…ψ_N| X |ψ₁…ψ_N⟩`.
pub fn product_expectation<T: Real>(x: &ComplexMatrix<T>, v: &ProductVector<T>) -> Result<C<T>> {
    let space = space_for(x, v.local_dim(), v.n_copies())?;
    let w: Vec<C<T>> = (0..space.total_dim()).map(|i| v.amplitude(&space.digits(i))).collect();
    let xw = x.apply(&w);
    Ok(w.iter().zip(&xw).fold(czero(), |acc, (a, b)| acc + a.conj() * b))
}

/// Recovers `X` from its quadratic form on product vectors, with the
/// default size limits.
pub fn reconstruct_from_diagonal<T: Real>(
    oracle: impl FnMut(&ProductVector<T>) -> C<T>,
    d: usize,
    n: usize,
) -> Result<ComplexMatrix<T>> {
    reconstruct_from_diagonal_capped(oracle, d, n, MAX_POLARIZATION_DIM, MAX_POLARIZATION_COPIES)
}

/// Every element `⟨φ_J|X|φ_K⟩` equals
/// `4^{-N} Σ_{p ∈ {0..3}^N} ∏_l i^{-p_l} · q(φ_{j_l} + i^{p_l} φ_{k_l})`
/// where `q` is the product-vector quadratic form supplied by `oracle`.
pub fn reconstruct_from_diagonal_capped<T: Real>(
    mut oracle: impl FnMut(&ProductVector<T>) -> C<T>,
    d: usize,
    n: usize,
    max_dim: usize,
    max_copies: usize,
) -> Result<ComplexMatrix<T>> {
    if d > max_dim || n > max_copies {
        return Err(Error::Capacity { requested: format!("polarization over {d}^{n}"), cap: max_dim.pow(max_copies as u32) });
    }
    let space = CopySpace::new(d, n)?;
    let dim = space.total_dim();
    let phases = 4usize.pow(n as u32);
    let norm = T::one() / T::from_count(phases);
    let unit = |k: usize| -> Vec<C<T>> { (0..d).map(|i| if i == k { cone() } else { czero() }).collect() };

    let mut out = ComplexMatrix::zeros(dim, dim);
    for row in 0..dim {
        let js = space.digits(row);
        for col in 0..dim {
            let ks = space.digits(col);
            let mut acc: C<T> = czero();
            for code in 0..phases {
                let mut weight: C<T> = cone();
                let mut factors = Vec::with_capacity(n);
                for l in 0..n {
                    let p = ((code >> (2 * l)) & 3) as i64;
                    let phase = i_pow::<T>(p);
                    weight = weight * i_pow::<T>(-p);
                    let mut f = unit(js[l]);
                    f[ks[l]] = f[ks[l]] + phase;
                    factors.push(f);
                }
                acc = acc + weight * oracle(&ProductVector { factors });
            }
            out[(row, col)] = acc * norm;
        }
    }
    Ok(out)
}

/// Least-squares recovery of an invariant Hermitian operator.
#[derive(Clone, Debug)]
pub struct MomentFit<T> {
    pub operator: ComplexMatrix<T>,
    pub condition_number: T,
    pub rank: usize,
    /// Real dimension of the invariant Hermitian operators.
    pub unknowns: usize,
    pub residual_norm: T,
}

/// Hermitian spanning set of the invariant operators: each self-adjoint
/// orbit sum, and for each adjoint pair of orbits `B + B†` and `i(B − B†)`.
/// Entries are `(matrix, members, kind)` where `kind` selects how
/// `Tr[B ρ]` maps to the real moment.
fn hermitian_invariant_basis<T: Real>(space: &CopySpace) -> Result<Vec<BasisEntry<T>>> {
    let dim = space.total_dim();
    let mut out = Vec::new();
    for orbit in invariant_orbits(space)? {
        let adj = orbit.adjoint_key();
        if adj == orbit.key {
            out.push((orbit.matrix(dim), orbit.members.clone(), BasisKind::SelfAdjoint));
        } else if orbit.key < adj {
            let b: ComplexMatrix<T> = orbit.matrix(dim);
            let bt = b.adjoint();
            out.push((&b + &bt, orbit.members.clone(), BasisKind::RealPart));
            out.push(((&b - &bt).scale(C::new(T::zero(), T::one())), orbit.members.clone(), BasisKind::ImagPart));
        }
    }
    Ok(out)
}

type BasisEntry<T> = (ComplexMatrix<T>, Vec<(usize, usize)>, BasisKind);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum BasisKind {
    SelfAdjoint,
    RealPart,
    ImagPart,
}

/// Recovers `X` from `oracle(ρ) = Tr[X ρ^⊗N]` with default rank and
/// conditioning thresholds.
pub fn reconstruct_from_moments<T: Real>(
    oracle: impl FnMut(&DensityMatrix<T>) -> T,
    d: usize,
    n: usize,
    probes: &[DensityMatrix<T>],
) -> Result<MomentFit<T>> {
    reconstruct_from_moments_with(oracle, d, n, probes, T::lit(DEFAULT_RANK_TOL), T::lit(DEFAULT_MAX_CONDITION))
}

pub fn reconstruct_from_moments_with<T: Real>(
    mut oracle: impl FnMut(&DensityMatrix<T>) -> T,
    d: usize,
    n: usize,
    probes: &[DensityMatrix<T>],
    rank_tol: T,
    max_condition: T,
) -> Result<MomentFit<T>> {
    let space = CopySpace::new(d, n)?;
    let basis = hermitian_invariant_basis::<T>(&space)?;
    let unknowns = basis.len();
    if probes.len() < unknowns {
        return Err(Error::Conditioning(format!(
            "{} probe states cannot determine the {unknowns}-dimensional invariant space",
            probes.len()
        )));
    }
    let mut rows = Vec::with_capacity(probes.len());
    let mut rhs = Vec::with_capacity(probes.len());
    for rho in probes {
        if rho.dim() != d {
            return Err(Error::DimensionMismatch(format!("probe of dimension {} for copies of dimension {d}", rho.dim())));
        }
        let joint = rho.tensor_power(n, space.total_dim())?;
        let r = joint.matrix();
        let row: Vec<T> = basis
            .iter()
            .map(|(_, members, kind)| {
                let s = members.iter().fold(czero::<T>(), |acc, &(a, b)| acc + r[(b, a)]);
                match kind {
                    BasisKind::SelfAdjoint => s.re,
                    BasisKind::RealPart => s.re + s.re,
                    BasisKind::ImagPart => -(s.im + s.im),
                }
            })
            .collect();
        rows.push(row);
        rhs.push(oracle(rho));
    }
    let ls = least_squares(&rows, &rhs, rank_tol)?;
    if ls.rank < unknowns {
        return Err(Error::Conditioning(format!(
            "probe system has rank {} for {unknowns} unknowns ({} probes); probes are not in general position",
            ls.rank,
            probes.len()
        )));
    }
    if ls.condition_number.is_nan() || ls.condition_number >= max_condition {
        return Err(Error::Conditioning(format!(
            "condition number {:e} exceeds {:e}",
            ls.condition_number.as_f64(),
            max_condition.as_f64()
        )));
    }
    let dim = space.total_dim();
    let mut operator = ComplexMatrix::zeros(dim, dim);
    for ((m, _, _), &c) in basis.iter().zip(&ls.solution) {
        operator += &m.scale_real(c);
    }
    Ok(MomentFit { operator, condition_number: ls.condition_number, rank: ls.rank, unknowns, residual_norm: ls.residual_norm })
}

/// Real dimension of the permutation-invariant Hermitian operators on
/// `d^N` (the number of orbits).
pub fn invariant_dimension(space: &CopySpace) -> Result<usize> {
    Ok(invariant_orbits(space)?.len())
}

/// `Σ_σ ⟨ψ₁…ψ_N| Π_σ X Π_σ† |ψ₁…ψ_N⟩`, summed directly over all `N!`
/// permutations.
pub fn symmetrized_product_sum<T: Real>(x: &ComplexMatrix<T>, v: &ProductVector<T>) -> Result<C<T>> {
    space_for(x, v.local_dim(), v.n_copies())?;
    let mut acc = czero();
    for sigma in PermutationIndex::all(v.n_copies()) {
        acc = acc + product_expectation(x, &v.permuted(&sigma))?;
    }
    Ok(acc)
}

/// Coefficient of `∏_j λ_j` in `g(λ) = Tr[X (Σ_j λ_j |ψ_j⟩⟨ψ_j|)^⊗N]` by
/// inclusion–exclusion over 0/1 weight vectors:
/// `Σ_{S ⊆ {1..N}} (−1)^{N−|S|} g(1_S)`.
pub fn coefficient_extract<T: Real>(x: &ComplexMatrix<T>, m: &MixtureSpec<T>) -> Result<C<T>> {
    let d = m.vectors()[0].len();
    let n = m.vectors().len();
    space_for(x, d, n)
        .map_err(|_| Error::DimensionMismatch(format!("mixture of {n} vectors does not match a {}x{} operator", x.rows(), x.cols())))?;
    let mut acc = czero();
    for mask in 0u64..(1u64 << n) {
        let weights: Vec<T> = (0..n).map(|j| if mask >> j & 1 == 1 { T::one() } else { T::zero() }).collect();
        let size = mask.count_ones() as usize;
        if size == 0 {
            continue;
        }
        let single = m.matrix_with(&weights);
        let mut joint = single.clone();
        for _ in 1..n {
            joint = kron_capped(&joint, &single, DEFAULT_DIM_CAP)?;
        }
        let g = x.trace_product(&joint)?;
        acc = if (n - size).is_multiple_of(2) { acc + g } else { acc - g };
    }
    Ok(acc)
}

/// `count` seeded Wishart-type probe states of dimension `d`.
pub fn probe_states<T: Real>(d: usize, count: usize, seed: u64) -> Vec<DensityMatrix<T>> {
    let mut rng = seeded(seed);
    (0..count).map(|_| random_density(d, &mut rng)).collect()
}

/// Outcome of a self-contained numerical check of the reconstruction
/// identities for one `(d, N)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LemmaDemo<T> {
    pub dim: usize,
    pub copies: usize,
    pub seed: u64,
    pub probes: usize,
    pub invariant_dimension: usize,
    /// Frobenius error of polarization reconstruction of a random operator.
    pub diagonal_reconstruction_error: T,
    /// Frobenius error of moment reconstruction of a random invariant operator.
    pub moment_reconstruction_error: T,
    pub condition_number: T,
    /// Relative gap between inclusion–exclusion and the permutation sum.
    pub coefficient_identity_residual: T,
    /// Frobenius norm of the operator recovered from all-zero moments.
    pub zero_moment_reconstruction_norm: T,
}

pub fn lemma_demo<T: Real>(d: usize, n: usize, seed: u64, probes: usize) -> Result<LemmaDemo<T>> {
    let space = CopySpace::new(d, n)?;
    let dim = space.total_dim();
    let mut rng = seeded(seed);

    let x: ComplexMatrix<T> = ComplexMatrix::from_fn(dim, dim, |_, _| crate::random::complex_gaussian(&mut rng));
    let rec = reconstruct_from_diagonal(|v| product_expectation(&x, v).expect("shape checked"), d, n)?;
    let diagonal_reconstruction_error = (&rec - &x).frobenius_norm();

    let herm = random_hermitian::<T, _>(dim, &mut rng);
    let inv = HermitianOperator::trusted(twirl(herm.matrix(), &space)?.hermitian_part());
    let probe_set = probe_states::<T>(d, probes, rng.random());
    let moment = |rho: &DensityMatrix<T>| -> T {
        let joint = rho.tensor_power(n, dim).expect("within cap");
        joint.matrix().trace_product(inv.matrix()).expect("square").re
    };
    let fit = reconstruct_from_moments(moment, d, n, &probe_set)?;
    let moment_reconstruction_error = (&fit.operator - inv.matrix()).frobenius_norm();
    let zero_fit = reconstruct_from_moments(|_| T::zero(), d, n, &probe_set)?;

    let vectors: Vec<Vec<C<T>>> = (0..n).map(|_| gaussian_vector(d, &mut rng)).collect();
    let mix = MixtureSpec::new(vec![T::one(); n], vectors)?;
    let extracted = coefficient_extract(&x, &mix)?;
    let direct = symmetrized_product_sum(&x, &mix.as_product_vector())?;
    let coefficient_identity_residual = (extracted - direct).norm() / direct.norm().max(T::min_positive_value());

    Ok(LemmaDemo {
        dim: d,
        copies: n,
        seed,
        probes,
        invariant_dimension: invariant_dimension(&space)?,
        diagonal_reconstruction_error,
        moment_reconstruction_error,
        condition_number: fit.condition_number,
        coefficient_identity_residual,
        zero_moment_reconstruction_norm: zero_fit.operator.frobenius_norm(),
    })
}
