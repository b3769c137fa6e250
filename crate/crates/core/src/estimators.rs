//! The optimal joint strategy (spectral measurement of `Θ`), the canonical
//! repeat-and-average procedure, and their closed-form error.

use std::collections::BTreeMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;

use crate::error::{Error, Result};
use crate::linops::{expect, ComplexMatrix, DensityMatrix, HermitianOperator};
use crate::povm::{Outcome, OutcomeDistribution, Povm};
use crate::random::seeded;
use crate::scalar::Real;
use crate::symspace::{theta, CopySpace};

/// `1e-8 · max(1, ‖op‖)`: merges binomially degenerate eigenvalues while
/// keeping genuinely distinct ones apart.
pub fn default_merge_tol<T: Real>(spectral_norm: T) -> T {
    T::lit(1e-8) * spectral_norm.max(T::one())
}

/// Single-linkage clusters of an ascending sequence.
pub(crate) fn cluster_sorted<T: Real>(values: &[T], tol: T) -> Vec<Vec<usize>> {
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        match clusters.last_mut() {
            Some(c) if v - values[*c.last().expect("non-empty")] <= tol => c.push(i),
            _ => clusters.push(vec![i]),
        }
    }
    clusters
}

fn cluster_mean<T: Real>(values: &[T], idx: &[usize]) -> T {
    idx.iter().map(|&i| values[i]).sum::<T>() / T::from_count(idx.len())
}

/// Projective measurement onto the eigenspaces of `Θ(a)`, one outcome per
/// eigenvalue cluster, ascending by value.
pub fn canonical_povm<T: Real>(a: &HermitianOperator<T>, space: &CopySpace, merge_tol: Option<T>) -> Result<Povm<T>> {
    let th = theta(a, space)?;
    spectral_povm(&th, space, merge_tol)
}

/// Spectral measurement of any Hermitian operator on the joint space.
pub fn spectral_povm<T: Real>(op: &HermitianOperator<T>, space: &CopySpace, merge_tol: Option<T>) -> Result<Povm<T>> {
    let eig = op.spectrum()?;
    let tol = merge_tol.unwrap_or_else(|| default_merge_tol(op.spectral_norm().unwrap_or(T::zero())));
    let outcomes = cluster_sorted(&eig.values, tol)
        .into_iter()
        .map(|idx| {
            let value = cluster_mean(&eig.values, &idx);
            let element = HermitianOperator::trusted(eig.projector(&idx).hermitian_part());
            Outcome::new(value, element)
        })
        .collect();
    Povm::new(*space, outcomes)
}

/// `√((⟨A²⟩_ρ − ⟨A⟩²_ρ)/N)`, evaluated as `⟨(A − ⟨A⟩)²⟩_ρ` to avoid
/// cancellation.
pub fn canonical_error<T: Real>(a: &HermitianOperator<T>, rho: &DensityMatrix<T>, n: usize) -> Result<T> {
    if n == 0 {
        return Err(Error::ZeroCopies);
    }
    let mean = expect(a, rho)?;
    let centered = HermitianOperator::trusted(a.matrix() - &ComplexMatrix::identity(a.dim()).scale_real(mean));
    let var = expect(&centered.square(), rho)?.max(T::zero());
    Ok((var / T::from_count(n)).sqrt())
}

/// Outcome distribution of measuring `a` once on `rho`, with degenerate
/// eigenvalues merged.
pub fn single_copy_distribution<T: Real>(
    a: &HermitianOperator<T>,
    rho: &DensityMatrix<T>,
    merge_tol: Option<T>,
) -> Result<OutcomeDistribution<T>> {
    if a.dim() != rho.dim() {
        return Err(Error::DimensionMismatch(format!("observable {} vs state {}", a.dim(), rho.dim())));
    }
    let eig = a.spectrum()?;
    let tol = merge_tol.unwrap_or_else(|| default_merge_tol(a.spectral_norm().unwrap_or(T::zero())));
    let mut pairs = Vec::new();
    for idx in cluster_sorted(&eig.values, tol) {
        let p: T = idx
            .iter()
            .map(|&k| {
                let v = eig.vector(k);
                let rv = rho.matrix().apply(&v);
                v.iter().zip(&rv).map(|(x, y)| (x.conj() * y).re).sum::<T>()
            })
            .sum();
        pairs.push((cluster_mean(&eig.values, &idx), p.max(T::zero())));
    }
    Ok(OutcomeDistribution::new(pairs))
}

/// Exact distribution of `(1/N) Σ_k x_k` for `N` independent single-copy
/// measurements of `a`, by convolution over eigenvalue occupation counts.
pub fn repeated_measurement_distribution<T: Real>(
    a: &HermitianOperator<T>,
    rho: &DensityMatrix<T>,
    n: usize,
    merge_tol: Option<T>,
) -> Result<OutcomeDistribution<T>> {
    if n == 0 {
        return Err(Error::ZeroCopies);
    }
    let tol = merge_tol.unwrap_or_else(|| default_merge_tol(a.spectral_norm().unwrap_or(T::zero())));
    let single = single_copy_distribution(a, rho, Some(tol))?;
    let k = single.pairs().len();
    let mut states: BTreeMap<Vec<u32>, T> = BTreeMap::new();
    states.insert(vec![0; k], T::one());
    for _ in 0..n {
        let mut next: BTreeMap<Vec<u32>, T> = BTreeMap::new();
        for (occ, &w) in &states {
            for (j, &(_, p)) in single.pairs().iter().enumerate() {
                let mut o = occ.clone();
                o[j] += 1;
                let e = next.entry(o).or_insert(T::zero());
                *e = *e + w * p;
            }
        }
        states = next;
    }
    let nn = T::from_count(n);
    let pairs = states
        .into_iter()
        .map(|(occ, w)| {
            let sum: T = occ.iter().zip(single.pairs()).map(|(&c, &(v, _))| T::from_count(c as usize) * v).sum();
            (sum / nn, w)
        })
        .collect();
    Ok(OutcomeDistribution::new(pairs).merged(tol))
}

/// Summary of one estimation run.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimationReport<T> {
    pub n_copies: usize,
    pub ensemble_average: T,
    pub closed_form_error: T,
    /// r.m.s. error of the joint POVM, when one was built.
    pub povm_error: Option<T>,
    pub distribution: OutcomeDistribution<T>,
    pub sample_mean: Option<f64>,
    pub sample_stddev: Option<f64>,
    pub shots: Option<u64>,
    pub seed: Option<u64>,
}

/// Builds the optimal joint POVM and reports its exact error and outcome
/// distribution, optionally with a seeded sample of `shots` outcomes.
pub fn canonical_report<T: Real>(
    a: &HermitianOperator<T>,
    rho: &DensityMatrix<T>,
    space: &CopySpace,
    merge_tol: Option<T>,
    sampling: Option<(u64, u64)>,
) -> Result<(Povm<T>, EstimationReport<T>)> {
    let povm = canonical_povm(a, space, merge_tol)?;
    let distribution = povm.probabilities(rho)?;
    let povm_error = povm.estimation_error(a, rho)?;
    let mut report = EstimationReport {
        n_copies: space.n_copies(),
        ensemble_average: expect(a, rho)?,
        closed_form_error: canonical_error(a, rho, space.n_copies())?,
        povm_error: Some(povm_error),
        distribution,
        sample_mean: None,
        sample_stddev: None,
        shots: None,
        seed: None,
    };
    if let Some((shots, seed)) = sampling {
        if shots > 0 {
            let counts = report.distribution.sample(shots, seed);
            report.sample_mean = counts.mean();
            report.sample_stddev = counts.stddev();
        }
        report.shots = Some(shots);
        report.seed = Some(seed);
    }
    Ok((povm, report))
}

/// Monte Carlo of the repeat-and-average procedure: each shot measures `a`
/// on `n` fresh copies and records the mean outcome.
pub fn simulate_repeated<T: Real>(
    a: &HermitianOperator<T>,
    rho: &DensityMatrix<T>,
    n: usize,
    shots: u64,
    seed: u64,
) -> Result<EstimationReport<T>> {
    if shots == 0 {
        return Err(Error::ZeroShots);
    }
    if n == 0 {
        return Err(Error::ZeroCopies);
    }
    let single = single_copy_distribution(a, rho, None)?;
    let weights: Vec<f64> = single.probabilities().iter().map(|p| p.as_f64()).collect();
    let values: Vec<f64> = single.values().iter().map(|v| v.as_f64()).collect();
    let picker = WeightedIndex::new(&weights).map_err(|e| Error::Numeric(format!("single-copy distribution: {e}")))?;
    let mut rng = seeded(seed);
    let averages: Vec<f64> = (0..shots)
        .map(|_| {
            let first = values[picker.sample(&mut rng)];
            let mut sum = first;
            let mut all_equal = true;
            for _ in 1..n {
                let x = values[picker.sample(&mut rng)];
                all_equal &= x == first;
                sum += x;
            }
            if all_equal {
                first
            } else {
                sum / n as f64
            }
        })
        .collect();
    let count = averages.len() as f64;
    let mean = averages.iter().sum::<f64>() / count;
    let var = if averages.len() > 1 {
        averages.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (count - 1.0)
    } else {
        0.0
    };
    Ok(EstimationReport {
        n_copies: n,
        ensemble_average: expect(a, rho)?,
        closed_form_error: canonical_error(a, rho, n)?,
        povm_error: None,
        distribution: repeated_measurement_distribution(a, rho, n, None)?,
        sample_mean: Some(mean),
        sample_stddev: Some(var.sqrt()),
        shots: Some(shots),
        seed: Some(seed),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linops::ComplexMatrix;
    use crate::scalar::C;

    fn z() -> HermitianOperator<f64> {
        HermitianOperator::from_real_diagonal(&[1.0, -1.0])
    }

    fn plus() -> DensityMatrix<f64> {
        DensityMatrix::pure(&[C::new(1.0, 0.0), C::new(1.0, 0.0)]).unwrap()
    }

    #[test]
    fn canonical_povm_z_two_copies() {
        let space = CopySpace::new(2, 2).unwrap();
        let p = canonical_povm(&z(), &space, None).unwrap();
        let values = p.values();
        assert_eq!(values, vec![-1.0, 0.0, 1.0]);
        let elems: Vec<_> = p.outcomes().iter().map(|o| o.element.matrix().clone()).collect();
        assert!(elems[0].max_abs_diff(&ComplexMatrix::from_real_diagonal(&[0.0, 0.0, 0.0, 1.0])) < 1e-14);
        assert!(elems[1].max_abs_diff(&ComplexMatrix::from_real_diagonal(&[0.0, 1.0, 1.0, 0.0])) < 1e-14);
        assert!(elems[2].max_abs_diff(&ComplexMatrix::from_real_diagonal(&[1.0, 0.0, 0.0, 0.0])) < 1e-14);
        let d = p.probabilities(&plus()).unwrap();
        let probs = d.probabilities();
        for (got, want) in probs.iter().zip([0.25, 0.5, 0.25]) {
            assert!((got - want).abs() < 1e-14);
        }
    }

    #[test]
    fn canonical_povm_single_copy_is_spectral_measurement() {
        let space = CopySpace::new(2, 1).unwrap();
        let p = canonical_povm(&z(), &space, None).unwrap();
        assert_eq!(p.values(), vec![-1.0, 1.0]);
    }

    #[test]
    fn closed_form_error_values() {
        assert!((canonical_error(&z(), &plus(), 4).unwrap() - 0.5).abs() < 1e-15);
        let zero = DensityMatrix::pure(&[C::new(1.0, 0.0), C::new(0.0, 0.0)]).unwrap();
        assert_eq!(canonical_error(&z(), &zero, 3).unwrap(), 0.0);
        assert_eq!(canonical_error(&z(), &zero, 0).unwrap_err().code(), "ZERO_COPIES");
    }

    #[test]
    fn canonical_povm_error_for_four_copies() {
        let space = CopySpace::new(2, 4).unwrap();
        let p = canonical_povm(&z(), &space, None).unwrap();
        assert!((p.estimation_error(&z(), &plus()).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn repeated_distribution_small_cases() {
        let d = repeated_measurement_distribution(&z(), &plus(), 2, None).unwrap();
        let pairs = d.pairs();
        assert_eq!(pairs.len(), 3);
        for ((v, p), (wv, wp)) in pairs.iter().zip([(-1.0, 0.25), (0.0, 0.5), (1.0, 0.25)]) {
            assert!((v - wv).abs() < 1e-15 && (p - wp).abs() < 1e-15);
        }
        let one = repeated_measurement_distribution(&z(), &plus(), 1, None).unwrap();
        assert_eq!(one, single_copy_distribution(&z(), &plus(), None).unwrap());
    }

    #[test]
    fn simulate_eigenstate_is_exact() {
        let zero = DensityMatrix::pure(&[C::new(0.0, 0.0), C::new(1.0, 0.0)]).unwrap();
        let r = simulate_repeated(&z(), &zero, 3, 1000, 1).unwrap();
        assert_eq!(r.sample_mean, Some(-1.0));
        assert_eq!(r.sample_stddev, Some(0.0));
        assert_eq!(simulate_repeated(&z(), &zero, 3, 0, 1).unwrap_err().code(), "ZERO_SHOTS");
    }

    #[test]
    fn simulate_is_seed_deterministic() {
        let a = simulate_repeated(&z(), &plus(), 4, 5000, 42).unwrap();
        let b = simulate_repeated(&z(), &plus(), 4, 5000, 42).unwrap();
        assert_eq!(a, b);
        let c = simulate_repeated(&z(), &plus(), 4, 5000, 43).unwrap();
        assert_ne!(a.sample_mean, c.sample_mean);
    }

    #[test]
    fn cluster_single_linkage() {
        let v = [0.0, 1e-9, 2e-9, 1.0, 1.0 + 5e-9, 3.0];
        assert_eq!(cluster_sorted(&v, 1e-8), vec![vec![0, 1, 2], vec![3, 4], vec![5]]);
    }
}
