//! Finite-outcome POVMs on the joint space: validation, Born-rule
//! probabilities, first and second moment operators, unbiasedness, the
//! r.m.s. estimation error and seeded outcome sampling.

use std::sync::OnceLock;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};
use crate::linops::{expect, real_trace_product, ComplexMatrix, DensityMatrix, HermitianOperator, DEFAULT_TOL};
use crate::scalar::Real;
use crate::symspace::{theta, twirl, CopySpace};

/// Probabilities in `[-PROBABILITY_FLOOR, 0)` are eigensolver noise and are
/// reported as zero; anything lower is an error.
pub const PROBABILITY_FLOOR: f64 = 1e-12;

/// One outcome: the estimate `value` reported when `element` clicks.
#[derive(Clone, Debug)]
pub struct Outcome<T> {
    pub value: T,
    pub element: HermitianOperator<T>,
}

impl<T: Real> Outcome<T> {
    pub fn new(value: T, element: HermitianOperator<T>) -> Self {
        Self { value, element }
    }
}

/// Per-element positivity and overall completeness of a POVM.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport<T> {
    pub min_eigenvalues: Vec<T>,
    /// `‖Σ_m E_m − I‖_max`.
    pub completeness_residual: T,
    pub psd_tol: T,
    pub completeness_tol: T,
}

impl<T: Real> ValidationReport<T> {
    pub fn psd_ok(&self) -> bool {
        self.min_eigenvalues.iter().all(|&m| m >= -self.psd_tol)
    }

    pub fn completeness_ok(&self) -> bool {
        self.completeness_residual <= self.completeness_tol
    }

    pub fn passed(&self) -> bool {
        self.psd_ok() && self.completeness_ok()
    }

    /// First failure as an error, if any.
    pub fn check(&self) -> Result<()> {
        if let Some((index, &m)) = self.min_eigenvalues.iter().enumerate().find(|(_, &m)| m < -self.psd_tol) {
            return Err(Error::PovmNotPsd { index, min_eigenvalue: m.as_f64(), tol: self.psd_tol.as_f64() });
        }
        if !self.completeness_ok() {
            return Err(Error::PovmCompleteness {
                residual: self.completeness_residual.as_f64(),
                tol: self.completeness_tol.as_f64(),
            });
        }
        Ok(())
    }
}

/// Finite list of `(r_m, E_m)` on a joint space.
#[derive(Clone, Debug)]
pub struct Povm<T> {
    space: CopySpace,
    outcomes: Vec<Outcome<T>>,
    psd_tol: T,
    completeness_tol: T,
    validation: OnceLock<ValidationReport<T>>,
}

impl<T: Real> Povm<T> {
    /// Checks shapes and values only; positivity and completeness are
    /// checked by [`Povm::validate`].
    pub fn new(space: CopySpace, outcomes: Vec<Outcome<T>>) -> Result<Self> {
        if outcomes.is_empty() {
            return Err(Error::PovmEmpty);
        }
        for (index, o) in outcomes.iter().enumerate() {
            if o.element.dim() != space.total_dim() {
                return Err(Error::DimensionMismatch(format!(
                    "POVM element {index} has dimension {}, joint space has {}",
                    o.element.dim(),
                    space.total_dim()
                )));
            }
            if !o.value.is_finite() {
                return Err(Error::PovmValue { index, value: o.value.as_f64() });
            }
        }
        Ok(Self {
            space,
            outcomes,
            psd_tol: T::lit(DEFAULT_TOL),
            completeness_tol: T::lit(DEFAULT_TOL),
            validation: OnceLock::new(),
        })
    }

    pub fn with_tolerances(mut self, psd_tol: T, completeness_tol: T) -> Self {
        self.psd_tol = psd_tol;
        self.completeness_tol = completeness_tol;
        self.validation = OnceLock::new();
        self
    }

    pub fn space(&self) -> &CopySpace {
        &self.space
    }

    pub fn outcomes(&self) -> &[Outcome<T>] {
        &self.outcomes
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn values(&self) -> Vec<T> {
        self.outcomes.iter().map(|o| o.value).collect()
    }

    /// Positivity and completeness report (cached).
    pub fn validate(&self) -> Result<ValidationReport<T>> {
        if let Some(r) = self.validation.get() {
            return Ok(r.clone());
        }
        let dim = self.space.total_dim();
        let mut sum = ComplexMatrix::zeros(dim, dim);
        let mut min_eigenvalues = Vec::with_capacity(self.outcomes.len());
        for o in &self.outcomes {
            min_eigenvalues.push(o.element.min_eigenvalue()?);
            sum += o.element.matrix();
        }
        let completeness_residual = sum.max_abs_diff(&ComplexMatrix::identity(dim));
        let report = ValidationReport {
            min_eigenvalues,
            completeness_residual,
            psd_tol: self.psd_tol,
            completeness_tol: self.completeness_tol,
        };
        Ok(self.validation.get_or_init(|| report).clone())
    }

    pub fn ensure_valid(&self) -> Result<()> {
        self.validate()?.check()
    }

    /// Indices of outcomes whose value lies outside `[lo, hi]`.
    pub fn values_outside(&self, lo: T, hi: T) -> Vec<usize> {
        self.outcomes.iter().enumerate().filter(|(_, o)| o.value < lo || o.value > hi).map(|(i, _)| i).collect()
    }

    /// Joint state for `rho`: `ρ^⊗N` for a single-copy state, or `rho`
    /// itself when it already lives on the joint space.
    pub fn joint_state(&self, rho: &DensityMatrix<T>) -> Result<DensityMatrix<T>> {
        if rho.dim() == self.space.local_dim() {
            rho.tensor_power(self.space.n_copies(), self.space.total_dim())
        } else if rho.dim() == self.space.total_dim() {
            Ok(rho.clone())
        } else {
            Err(Error::DimensionMismatch(format!(
                "state of dimension {} for copies of dimension {} (joint {})",
                rho.dim(),
                self.space.local_dim(),
                self.space.total_dim()
            )))
        }
    }

    /// Born rule `p_m = Re Tr[E_m ρ^⊗N]`.
    pub fn probabilities(&self, rho: &DensityMatrix<T>) -> Result<OutcomeDistribution<T>> {
        self.ensure_valid()?;
        let joint = self.joint_state(rho)?;
        self.probabilities_unchecked(joint.matrix())
    }

    pub(crate) fn probabilities_unchecked(&self, joint: &ComplexMatrix<T>) -> Result<OutcomeDistribution<T>> {
        let floor = T::lit(PROBABILITY_FLOOR);
        let mut pairs = Vec::with_capacity(self.outcomes.len());
        for (index, o) in self.outcomes.iter().enumerate() {
            let p = real_trace_product(o.element.matrix(), joint)?;
            let p = if p < T::zero() {
                if p < -floor {
                    return Err(Error::NegativeProbability { index, probability: p.as_f64() });
                }
                T::zero()
            } else {
                p
            };
            pairs.push((o.value, p));
        }
        Ok(OutcomeDistribution { pairs })
    }

    /// `Θ′ = Σ_m r_m E_m`.
    pub fn first_moment(&self) -> HermitianOperator<T> {
        self.moment(|r| r)
    }

    /// `Δ = Σ_m r_m² E_m`.
    pub fn second_moment(&self) -> HermitianOperator<T> {
        self.moment(|r| r * r)
    }

    fn moment(&self, f: impl Fn(T) -> T) -> HermitianOperator<T> {
        let dim = self.space.total_dim();
        let mut acc = ComplexMatrix::zeros(dim, dim);
        for o in &self.outcomes {
            acc += &o.element.matrix().scale_real(f(o.value));
        }
        HermitianOperator::trusted(acc)
    }

    /// `‖Θ′ − Θ(a)‖_max`.
    pub fn unbiasedness_residual(&self, a: &HermitianOperator<T>) -> Result<T> {
        let target = theta(a, &self.space)?;
        Ok(self.first_moment().matrix().max_abs_diff(target.matrix()))
    }

    /// Unbiased for every state iff the first moment equals `Θ(a)`.
    pub fn is_unbiased(&self, a: &HermitianOperator<T>, tol: T) -> Result<bool> {
        Ok(self.unbiasedness_residual(a)? <= tol)
    }

    /// `√(Σ_m p_m (r_m − ⟨A⟩_ρ)²)` for a single-copy state `rho`.
    pub fn estimation_error(&self, a: &HermitianOperator<T>, rho: &DensityMatrix<T>) -> Result<T> {
        if rho.dim() != self.space.local_dim() {
            return Err(Error::DimensionMismatch(format!(
                "estimation error needs a single-copy state of dimension {}, got {}",
                self.space.local_dim(),
                rho.dim()
            )));
        }
        let mean = expect(a, rho)?;
        let dist = self.probabilities(rho)?;
        Ok(dist.second_moment_about(mean).sqrt())
    }

    /// Multinomial draw of `shots` outcomes from the Born-rule distribution.
    ///
    /// Counts are drawn outcome by outcome as conditional binomials from a
    /// ChaCha8 stream seeded with `seed`, so equal seeds give equal counts.
    pub fn sample(&self, rho: &DensityMatrix<T>, shots: u64, seed: u64) -> Result<OutcomeCounts<T>> {
        let dist = self.probabilities(rho)?;
        Ok(dist.sample(shots, seed))
    }

    /// POVM with every element replaced by its permutation twirl.
    pub fn twirled(&self) -> Result<Povm<T>> {
        let outcomes = self
            .outcomes
            .iter()
            .map(|o| {
                let t = twirl(o.element.matrix(), &self.space)?.hermitian_part();
                Ok(Outcome::new(o.value, HermitianOperator::trusted(t)))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Povm::new(self.space, outcomes)?.with_tolerances(self.psd_tol, self.completeness_tol))
    }
}

/// Finite distribution of estimate values.
#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeDistribution<T> {
    pairs: Vec<(T, T)>,
}

impl<T: Real> OutcomeDistribution<T> {
    pub fn new(pairs: Vec<(T, T)>) -> Self {
        Self { pairs }
    }

    pub fn pairs(&self) -> &[(T, T)] {
        &self.pairs
    }

    pub fn values(&self) -> Vec<T> {
        self.pairs.iter().map(|p| p.0).collect()
    }

    pub fn probabilities(&self) -> Vec<T> {
        self.pairs.iter().map(|p| p.1).collect()
    }

    pub fn total(&self) -> T {
        self.pairs.iter().map(|p| p.1).sum()
    }

    pub fn mean(&self) -> T {
        self.pairs.iter().map(|&(v, p)| v * p).sum()
    }

    /// `Σ p (v − c)²`.
    pub fn second_moment_about(&self, c: T) -> T {
        self.pairs.iter().map(|&(v, p)| p * (v - c) * (v - c)).sum()
    }

    /// Sorted by value, with values closer than `tol` (single linkage)
    /// merged into their arithmetic mean and probabilities summed.
    pub fn merged(&self, tol: T) -> Self {
        let mut sorted = self.pairs.clone();
        sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
        let mut out: Vec<(T, T)> = Vec::new();
        let mut cluster: Vec<(T, T)> = Vec::new();
        let flush = |cluster: &mut Vec<(T, T)>, out: &mut Vec<(T, T)>| {
            if cluster.is_empty() {
                return;
            }
            let n = T::from_count(cluster.len());
            let v = cluster.iter().map(|c| c.0).sum::<T>() / n;
            let p = cluster.iter().map(|c| c.1).sum::<T>();
            out.push((v, p));
            cluster.clear();
        };
        for pair in sorted {
            if let Some(last) = cluster.last() {
                if pair.0 - last.0 > tol {
                    flush(&mut cluster, &mut out);
                }
            }
            cluster.push(pair);
        }
        flush(&mut cluster, &mut out);
        Self { pairs: out }
    }

    /// `½ Σ |p − q|` after matching values that lie within `value_tol` of
    /// each other (single linkage over the union of both supports).
    pub fn total_variation(&self, other: &Self, value_tol: T) -> T {
        let mut tagged: Vec<(T, T, bool)> = self
            .pairs
            .iter()
            .map(|&(v, p)| (v, p, true))
            .chain(other.pairs.iter().map(|&(v, q)| (v, q, false)))
            .collect();
        tagged.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
        let mut tv = T::zero();
        let mut diff = T::zero();
        let mut last: Option<T> = None;
        for (v, w, mine) in tagged {
            if let Some(prev) = last {
                if v - prev > value_tol {
                    tv = tv + diff.abs();
                    diff = T::zero();
                }
            }
            diff = if mine { diff + w } else { diff - w };
            last = Some(v);
        }
        (tv + diff.abs()) * T::lit(0.5)
    }

    /// Seeded multinomial draw.
    pub fn sample(&self, shots: u64, seed: u64) -> OutcomeCounts<T> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut counts = vec![0u64; self.pairs.len()];
        let mut remaining_shots = shots;
        let mut remaining_mass: f64 = self.pairs.iter().map(|p| p.1.as_f64().max(0.0)).sum();
        let last = self.pairs.iter().rposition(|p| p.1 > T::zero());
        for (m, &(_, p)) in self.pairs.iter().enumerate() {
            if remaining_shots == 0 {
                break;
            }
            let p = p.as_f64().max(0.0);
            if Some(m) == last {
                counts[m] = remaining_shots;
                break;
            }
            let q = if remaining_mass > 0.0 { (p / remaining_mass).clamp(0.0, 1.0) } else { 0.0 };
            let draw = Binomial::new(remaining_shots, q).map(|b| b.sample(&mut rng)).unwrap_or(0);
            counts[m] = draw;
            remaining_shots -= draw;
            remaining_mass -= p;
        }
        OutcomeCounts { values: self.values(), counts, shots }
    }
}

/// Histogram of sampled outcomes.
#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeCounts<T> {
    pub values: Vec<T>,
    pub counts: Vec<u64>,
    pub shots: u64,
}

impl<T: Real> OutcomeCounts<T> {
    pub fn frequencies(&self) -> Vec<f64> {
        let n = self.shots.max(1) as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }

    pub fn mean(&self) -> Option<f64> {
        if self.shots == 0 {
            return None;
        }
        let s: f64 = self.values.iter().zip(&self.counts).map(|(v, &c)| v.as_f64() * c as f64).sum();
        Some(s / self.shots as f64)
    }

    /// Sample standard deviation with the `n − 1` denominator.
    pub fn stddev(&self) -> Option<f64> {
        let mean = self.mean()?;
        if self.shots < 2 {
            return Some(0.0);
        }
        let ss: f64 = self
            .values
            .iter()
            .zip(&self.counts)
            .map(|(v, &c)| {
                let d = v.as_f64() - mean;
                d * d * c as f64
            })
            .sum();
        Some((ss / (self.shots - 1) as f64).sqrt())
    }
}
