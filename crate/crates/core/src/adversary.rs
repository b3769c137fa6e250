//! Competing unbiased POVMs and their comparison against the canonical
//! error.
//!
//! [`random_unbiased_povm`] searches the convex set of POVMs on a fixed
//! value grid whose first moment equals `Θ`, by Dykstra alternating
//! projections between the affine constraint set and the PSD cone.
//! [`smear_povm`] builds the other family of competitors: outcomes split
//! symmetrically around their value, which keeps the first moment and adds
//! exactly `Σ_n p_n δ_n²` to the squared error.

use crate::error::{Error, Result};
use crate::estimators::canonical_error;
use crate::linops::{hermitian_eigen, ComplexMatrix, DensityMatrix, HermitianOperator};
use crate::povm::{Outcome, Povm};
use crate::random::{gaussian_matrix, random_density, seeded};
use crate::scalar::Real;
use crate::symspace::{theta, CopySpace};

pub const DEFAULT_CONVERGENCE_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ITERATIONS: usize = 5000;
/// First-moment residual above which [`compare`] refuses a POVM as biased.
pub const DEFAULT_UNBIASED_TOL: f64 = 1e-8;
/// Smallest gap still counted as consistent with optimality.
pub const GAP_TOL: f64 = 1e-8;

/// Search space and stopping rule for [`random_unbiased_povm`].
#[derive(Clone, Debug, PartialEq)]
pub struct AdversaryConfig<T> {
    pub value_grid: Vec<T>,
    pub max_iterations: usize,
    pub convergence_tol: T,
    pub seed: u64,
}

impl<T: Real> AdversaryConfig<T> {
    pub fn new(value_grid: Vec<T>, seed: u64) -> Self {
        Self {
            value_grid,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            convergence_tol: T::lit(DEFAULT_CONVERGENCE_TOL),
            seed,
        }
    }

    /// `size` equally spaced values from `lo` to `hi` inclusive.
    pub fn uniform(lo: T, hi: T, size: usize, seed: u64) -> Result<Self> {
        if size < 2 {
            return Err(Error::InvalidArgument(format!("uniform grid needs at least 2 values, got {size}")));
        }
        let step = (hi - lo) / T::from_count(size - 1);
        let mut grid: Vec<T> = (0..size).map(|k| lo + step * T::from_count(k)).collect();
        grid[size - 1] = hi;
        Ok(Self::new(grid, seed))
    }

    pub fn grid_size(&self) -> usize {
        self.value_grid.len()
    }

    fn check(&self) -> Result<()> {
        if self.value_grid.is_empty() || self.value_grid.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("value grid must be non-empty and finite".into()));
        }
        if self.convergence_tol.is_nan() || self.convergence_tol <= T::zero() {
            return Err(Error::InvalidArgument("convergence tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// Splits outcome `n` into `(r_n + δ_n, E_n/2)` and `(r_n − δ_n, E_n/2)`.
///
/// With `value_range = Some((lo, hi))` every new value must stay inside it.
pub fn smear_povm<T: Real>(base: &Povm<T>, deltas: &[T], value_range: Option<(T, T)>) -> Result<Povm<T>> {
    base.ensure_valid()?;
    if deltas.len() != base.len() {
        return Err(Error::DimensionMismatch(format!("{} deltas for {} outcomes", deltas.len(), base.len())));
    }
    let half = T::lit(0.5);
    let mut outcomes = Vec::with_capacity(2 * base.len());
    for (o, &delta) in base.outcomes().iter().zip(deltas) {
        let hi_val = o.value + delta;
        let lo_val = o.value - delta;
        if let Some((lo, hi)) = value_range {
            for v in [hi_val, lo_val] {
                if v < lo || v > hi {
                    return Err(Error::ValueRange { value: v.as_f64(), lo: lo.as_f64(), hi: hi.as_f64() });
                }
            }
        }
        let e = o.element.scale(half);
        outcomes.push(Outcome::new(hi_val, e.clone()));
        outcomes.push(Outcome::new(lo_val, e));
    }
    Povm::new(*base.space(), outcomes)
}

/// Result of projecting a starting family onto the unbiased POVMs.
#[derive(Clone, Debug)]
pub struct Projection<T> {
    pub povm: Povm<T>,
    pub iterations: usize,
    /// `max(‖Σ F − I‖_max, ‖Σ r F − Θ‖_max)` of the returned elements.
    pub affine_residual: T,
}

/// Random unbiased POVM on `cfg.value_grid`, started from seeded Wishart
/// elements.
pub fn random_unbiased_povm<T: Real>(a: &HermitianOperator<T>, space: &CopySpace, cfg: &AdversaryConfig<T>) -> Result<Povm<T>> {
    cfg.check()?;
    let dim = space.total_dim();
    let m = cfg.grid_size();
    let mut rng = seeded(cfg.seed);
    let scale = T::one() / (T::from_count(dim) * T::from_count(m));
    let start: Vec<ComplexMatrix<T>> = (0..m)
        .map(|_| {
            let g = gaussian_matrix::<T, _>(dim, dim, &mut rng);
            (&g * &g.adjoint()).hermitian_part().scale_real(scale)
        })
        .collect();
    Ok(project_unbiased(a, space, &cfg.value_grid, start, cfg.max_iterations, cfg.convergence_tol)?.povm)
}

/// Dykstra projection of `start` onto
/// `{F_m ⪰ 0, Σ_m F_m = I, Σ_m r_m F_m = Θ(a)}` for fixed values `r_m`.
pub fn project_unbiased<T: Real>(
    a: &HermitianOperator<T>,
    space: &CopySpace,
    values: &[T],
    start: Vec<ComplexMatrix<T>>,
    max_iterations: usize,
    tol: T,
) -> Result<Projection<T>> {
    if start.len() != values.len() {
        return Err(Error::DimensionMismatch(format!("{} start elements for {} values", start.len(), values.len())));
    }
    let dim = space.total_dim();
    if start.iter().any(|s| s.rows() != dim || s.cols() != dim) {
        return Err(Error::DimensionMismatch("start element does not match the joint space".into()));
    }
    let target = theta(a, space)?.into_matrix();
    let affine = AffineSet::new(values, target.clone(), tol)?;

    let build = |elems: Vec<ComplexMatrix<T>>, iterations: usize, affine_residual: T| -> Result<Projection<T>> {
        let outcomes = values
            .iter()
            .zip(elems)
            .map(|(&v, e)| Outcome::new(v, HermitianOperator::trusted(e.hermitian_part())))
            .collect();
        Ok(Projection { povm: Povm::new(*space, outcomes)?, iterations, affine_residual })
    };

    let psd_tol = T::lit(crate::linops::DEFAULT_TOL);
    if affine.residual(&start) <= tol && min_eig_all(&start)? >= -psd_tol {
        let r = affine.residual(&start);
        return build(start, 0, r);
    }

    let face = Face::new(values, &target, tol)?;
    let mut iterations = 0;
    let reduced = if face.basis.cols() == 0 {
        vec![ComplexMatrix::zeros(0, 0); values.len()]
    } else {
        let sub = AffineSet::new(values, face.restrict(&target), tol)?;
        let mut x: Vec<ComplexMatrix<T>> = start.iter().map(|s| face.restrict(s)).collect();
        let mut q: Vec<ComplexMatrix<T>> = vec![ComplexMatrix::zeros(x[0].rows(), x[0].cols()); values.len()];
        loop {
            if iterations == max_iterations {
                return Err(Error::Infeasible(format!(
                    "affine residual {:e} after {max_iterations} iterations on a grid of {} values",
                    sub.residual(&x).as_f64(),
                    values.len()
                )));
            }
            iterations += 1;
            let y = sub.project(&x);
            let mut next = Vec::with_capacity(x.len());
            for (yi, qi) in y.iter().zip(q.iter_mut()) {
                let shifted = yi + qi;
                let clipped = psd_clip(&shifted)?;
                *qi = &shifted - &clipped;
                next.push(clipped);
            }
            x = next;
            if sub.residual(&x) <= tol {
                break;
            }
        }
        x
    };
    let x = face.extend(&reduced);
    let polished = affine.project(&x);
    if min_eig_all(&polished)? >= -psd_tol {
        let r = affine.residual(&polished);
        return build(polished, iterations, r);
    }
    let r = affine.residual(&x);
    build(x, iterations, r)
}

/// Splits off the extreme eigenspaces of `Θ` that the constraints pin down.
///
/// On the eigenspace of `Θ` at the largest grid value every element with a
/// smaller value must vanish, and likewise at the smallest; those blocks are
/// fixed exactly and the search runs on the complement, where a strictly
/// positive feasible point exists.
struct Face<T> {
    /// Orthonormal columns spanning the free subspace.
    basis: ComplexMatrix<T>,
    /// Fixed contribution to each element.
    fixed: Vec<ComplexMatrix<T>>,
}

impl<T: Real> Face<T> {
    fn new(values: &[T], target: &ComplexMatrix<T>, tol: T) -> Result<Self> {
        let dim = target.rows();
        let eig = hermitian_eigen(target)?;
        let lo = values.iter().copied().fold(T::infinity(), T::min);
        let hi = values.iter().copied().fold(T::neg_infinity(), T::max);
        let slack = tol.max(T::lit(1e-10)) * T::one().max(lo.abs()).max(hi.abs());
        if let (Some(&first), Some(&last)) = (eig.values.first(), eig.values.last()) {
            if first < lo - slack || last > hi + slack {
                return Err(Error::Infeasible(format!(
                    "spectrum [{first}, {last}] of the averaged observable leaves the grid range [{lo}, {hi}]"
                )));
            }
        }
        let (mut top, mut bottom, mut free) = (Vec::new(), Vec::new(), Vec::new());
        for (k, &v) in eig.values.iter().enumerate() {
            if v >= hi - slack {
                top.push(k);
            } else if v <= lo + slack {
                bottom.push(k);
            } else {
                free.push(k);
            }
        }
        let mut fixed = vec![ComplexMatrix::zeros(dim, dim); values.len()];
        for (indices, extreme) in [(&top, hi), (&bottom, lo)] {
            if indices.is_empty() {
                continue;
            }
            let owners: Vec<usize> = (0..values.len()).filter(|&m| values[m] == extreme).collect();
            let share = eig.projector(indices).scale_real(T::one() / T::from_count(owners.len()));
            for m in owners {
                fixed[m] = &fixed[m] + &share;
            }
        }
        let basis = ComplexMatrix::from_fn(dim, free.len(), |i, j| eig.vectors[(i, free[j])]);
        Ok(Self { basis, fixed })
    }

    /// `V† x V`.
    fn restrict(&self, x: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        &(&self.basis.adjoint() * x) * &self.basis
    }

    /// `V f_m V† + fixed_m`.
    fn extend(&self, reduced: &[ComplexMatrix<T>]) -> Vec<ComplexMatrix<T>> {
        reduced
            .iter()
            .zip(&self.fixed)
            .map(|(f, fixed)| {
                let lifted = if self.basis.cols() == 0 {
                    ComplexMatrix::zeros(fixed.rows(), fixed.cols())
                } else {
                    &(&self.basis * f) * &self.basis.adjoint()
                };
                (&lifted + fixed).hermitian_part()
            })
            .collect()
    }
}

fn min_eig_all<T: Real>(elems: &[ComplexMatrix<T>]) -> Result<T> {
    let mut m = T::infinity();
    for e in elems {
        m = m.min(HermitianOperator::trusted(e.hermitian_part()).min_eigenvalue()?);
    }
    Ok(m)
}

/// Nearest PSD matrix in Frobenius norm (negative eigenvalues set to zero).
fn psd_clip<T: Real>(m: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    let h = HermitianOperator::trusted(m.hermitian_part());
    let eig = h.spectrum()?;
    if eig.values.first().is_none_or(|&v| v >= T::zero()) {
        return Ok(h.into_matrix());
    }
    Ok(eig.weighted_sum(|_, lam| lam.max(T::zero())).hermitian_part())
}

/// `{F : Σ F_m = I, Σ r_m F_m = Θ}` with its Frobenius projection.
struct AffineSet<T> {
    values: Vec<T>,
    target: ComplexMatrix<T>,
    count: T,
    s1: T,
    s2: T,
    det: T,
}

impl<T: Real> AffineSet<T> {
    fn new(values: &[T], target: ComplexMatrix<T>, tol: T) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("empty value grid".into()));
        }
        let count = T::from_count(values.len());
        let s1: T = values.iter().copied().sum();
        let s2: T = values.iter().map(|&v| v * v).sum();
        let det = count * s2 - s1 * s1;
        let set = Self { values: values.to_vec(), target, count, s1, s2, det };
        if set.degenerate() {
            // A single distinct value r needs Θ = r·I.
            let r = values[0];
            let dim = set.target.rows();
            let gap = set.target.max_abs_diff(&ComplexMatrix::identity(dim).scale_real(r));
            if gap > tol {
                return Err(Error::Infeasible(format!(
                    "every grid value equals {r}, but Θ differs from {r}·I by {:e}",
                    gap.as_f64()
                )));
            }
        }
        Ok(set)
    }

    fn degenerate(&self) -> bool {
        self.det <= T::epsilon() * self.count * self.s2.max(T::one()) * T::lit(16.0)
    }

    fn residuals(&self, f: &[ComplexMatrix<T>]) -> (ComplexMatrix<T>, ComplexMatrix<T>) {
        let dim = self.target.rows();
        let mut r1 = ComplexMatrix::identity(dim);
        let mut r2 = self.target.clone();
        for (fi, &v) in f.iter().zip(&self.values) {
            r1 = &r1 - fi;
            r2 = &r2 - &fi.scale_real(v);
        }
        (r1, r2)
    }

    fn residual(&self, f: &[ComplexMatrix<T>]) -> T {
        let (r1, r2) = self.residuals(f);
        r1.max_abs().max(r2.max_abs())
    }

    /// `F_m = G_m + Λ₁ + r_m Λ₂` with multipliers solving the 2×2 normal
    /// equations entrywise.
    fn project(&self, g: &[ComplexMatrix<T>]) -> Vec<ComplexMatrix<T>> {
        let (r1, r2) = self.residuals(g);
        let (l1, l2) = if self.degenerate() {
            (r1.scale_real(T::one() / self.count), ComplexMatrix::zeros(r1.rows(), r1.cols()))
        } else {
            let l1 = (&r1.scale_real(self.s2) - &r2.scale_real(self.s1)).scale_real(T::one() / self.det);
            let l2 = (&r2.scale_real(self.count) - &r1.scale_real(self.s1)).scale_real(T::one() / self.det);
            (l1, l2)
        };
        g.iter()
            .zip(&self.values)
            .map(|(gi, &v)| &(gi + &l1) + &l2.scale_real(v))
            .collect()
    }
}

/// Error of a competing POVM against the canonical bound.
#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonReport<T> {
    pub adversary_error: T,
    pub canonical_error: T,
    /// `adversary_error − canonical_error`.
    pub gap: T,
    pub unbiasedness_residual: T,
    pub feasibility_residual: T,
    /// Smallest eigenvalue of `Δ − Θ′²`.
    pub moment_inequality_min_eig: T,
}

impl<T: Real> ComparisonReport<T> {
    pub fn gap_ok(&self) -> bool {
        self.gap >= -T::lit(GAP_TOL)
    }

    pub fn verdict(&self) -> &'static str {
        if self.gap_ok() {
            "consistent: no smaller error than the canonical strategy"
        } else {
            "negative gap beyond tolerance: implementation defect suspected, a valid unbiased POVM cannot beat the canonical error"
        }
    }
}

/// Compares a valid unbiased POVM with the canonical strategy on `rho`.
pub fn compare<T: Real>(p: &Povm<T>, a: &HermitianOperator<T>, rho: &DensityMatrix<T>) -> Result<ComparisonReport<T>> {
    compare_with_tol(p, a, rho, T::lit(DEFAULT_UNBIASED_TOL))
}

pub fn compare_with_tol<T: Real>(
    p: &Povm<T>,
    a: &HermitianOperator<T>,
    rho: &DensityMatrix<T>,
    unbiased_tol: T,
) -> Result<ComparisonReport<T>> {
    let validation = p.validate()?;
    validation.check()?;
    let unbiasedness_residual = p.unbiasedness_residual(a)?;
    if unbiasedness_residual > unbiased_tol {
        return Err(Error::Biased { residual: unbiasedness_residual.as_f64(), tol: unbiased_tol.as_f64() });
    }
    let adversary_error = p.estimation_error(a, rho)?;
    let canonical = canonical_error(a, rho, p.space().n_copies())?;
    let first = p.first_moment();
    let gap_op = p.second_moment().matrix() - &(first.matrix() * first.matrix());
    let moment_inequality_min_eig = HermitianOperator::trusted(gap_op.hermitian_part()).min_eigenvalue()?;
    Ok(ComparisonReport {
        adversary_error,
        canonical_error: canonical,
        gap: adversary_error - canonical,
        unbiasedness_residual,
        feasibility_residual: validation.completeness_residual,
        moment_inequality_min_eig,
    })
}

/// One row of an adversary campaign.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord<T> {
    pub seed: u64,
    pub report: ComparisonReport<T>,
}

/// Runs `trials` seeded searches (seeds `base_seed..base_seed + trials`),
/// comparing each POVM on `rho` or, when absent, on a fresh random state
/// drawn from the trial seed.
pub fn run_trials<T: Real>(
    a: &HermitianOperator<T>,
    space: &CopySpace,
    template: &AdversaryConfig<T>,
    trials: usize,
    base_seed: u64,
    rho: Option<&DensityMatrix<T>>,
) -> Result<Vec<TrialRecord<T>>> {
    (0..trials as u64)
        .map(|t| {
            let seed = base_seed.wrapping_add(t);
            let cfg = AdversaryConfig { seed, ..template.clone() };
            let povm = random_unbiased_povm(a, space, &cfg)?;
            let state = match rho {
                Some(r) => r.clone(),
                None => random_density(space.local_dim(), &mut seeded(seed ^ 0x5eed_5eed)),
            };
            Ok(TrialRecord { seed, report: compare(&povm, a, &state)? })
        })
        .collect()
}
