//! Deterministic report emission: JSON with fixed key order and every float
//! printed with 17 significant digits, plus CSV tables.

use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

use crate::adversary::{ComparisonReport, TrialRecord};
use crate::estimators::EstimationReport;
use crate::lemma::LemmaDemo;
use crate::povm::{OutcomeCounts, OutcomeDistribution, ValidationReport};
use crate::scalar::Real;

/// `x` in scientific notation with 17 significant digits; `null` when not
/// finite (JSON has no representation for NaN or infinities).
pub fn fmt_sig17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".to_string()
    }
}

/// Float that serialises through [`fmt_sig17`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sig17(pub f64);

impl Sig17 {
    pub fn of<T: Real>(x: T) -> Self {
        Sig17(x.as_f64())
    }
}

impl Serialize for Sig17 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let raw = RawValue::from_string(fmt_sig17(self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

pub fn sig_vec<T: Real>(xs: &[T]) -> Vec<Sig17> {
    xs.iter().map(|&x| Sig17::of(x)).collect()
}

pub fn sig_rows<T: Real>(rows: &[Vec<T>]) -> Vec<Vec<Sig17>> {
    rows.iter().map(|r| sig_vec(r)).collect()
}

/// Pretty-printed JSON followed by a newline.
pub fn to_json<S: Serialize>(value: &S) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types always serialise");
    s.push('\n');
    s
}

#[derive(Serialize)]
pub struct DistributionEntry {
    pub value: Sig17,
    pub probability: Sig17,
}

pub fn distribution_entries<T: Real>(d: &OutcomeDistribution<T>) -> Vec<DistributionEntry> {
    d.pairs().iter().map(|&(v, p)| DistributionEntry { value: Sig17::of(v), probability: Sig17::of(p) }).collect()
}

#[derive(Serialize)]
pub struct EstimationReportJson {
    pub n_copies: usize,
    pub ensemble_average: Sig17,
    pub closed_form_error: Sig17,
    pub povm_error: Option<Sig17>,
    pub shots: Option<u64>,
    pub seed: Option<u64>,
    pub sample_mean: Option<Sig17>,
    pub sample_stddev: Option<Sig17>,
    pub distribution: Vec<DistributionEntry>,
}

impl<T: Real> From<&EstimationReport<T>> for EstimationReportJson {
    fn from(r: &EstimationReport<T>) -> Self {
        Self {
            n_copies: r.n_copies,
            ensemble_average: Sig17::of(r.ensemble_average),
            closed_form_error: Sig17::of(r.closed_form_error),
            povm_error: r.povm_error.map(Sig17::of),
            shots: r.shots,
            seed: r.seed,
            sample_mean: r.sample_mean.map(Sig17),
            sample_stddev: r.sample_stddev.map(Sig17),
            distribution: distribution_entries(&r.distribution),
        }
    }
}

#[derive(Serialize)]
pub struct ValidationReportJson {
    pub passed: bool,
    pub psd_ok: bool,
    pub completeness_ok: bool,
    pub completeness_residual: Sig17,
    pub completeness_tol: Sig17,
    pub psd_tol: Sig17,
    pub min_eigenvalues: Vec<Sig17>,
    pub warnings: Vec<String>,
}

impl ValidationReportJson {
    pub fn new<T: Real>(r: &ValidationReport<T>, warnings: Vec<String>) -> Self {
        Self {
            passed: r.passed(),
            psd_ok: r.psd_ok(),
            completeness_ok: r.completeness_ok(),
            completeness_residual: Sig17::of(r.completeness_residual),
            completeness_tol: Sig17::of(r.completeness_tol),
            psd_tol: Sig17::of(r.psd_tol),
            min_eigenvalues: sig_vec(&r.min_eigenvalues),
            warnings,
        }
    }
}

#[derive(Serialize)]
pub struct ComparisonJson {
    pub adversary_error: Sig17,
    pub canonical_error: Sig17,
    pub gap: Sig17,
    pub unbiasedness_residual: Sig17,
    pub feasibility_residual: Sig17,
    pub moment_inequality_min_eig: Sig17,
    pub verdict: &'static str,
}

impl<T: Real> From<&ComparisonReport<T>> for ComparisonJson {
    fn from(r: &ComparisonReport<T>) -> Self {
        Self {
            adversary_error: Sig17::of(r.adversary_error),
            canonical_error: Sig17::of(r.canonical_error),
            gap: Sig17::of(r.gap),
            unbiasedness_residual: Sig17::of(r.unbiasedness_residual),
            feasibility_residual: Sig17::of(r.feasibility_residual),
            moment_inequality_min_eig: Sig17::of(r.moment_inequality_min_eig),
            verdict: r.verdict(),
        }
    }
}

#[derive(Serialize)]
pub struct CountsJson {
    pub shots: u64,
    pub seed: u64,
    pub sample_mean: Option<Sig17>,
    pub sample_stddev: Option<Sig17>,
    pub outcomes: Vec<CountEntry>,
}

#[derive(Serialize)]
pub struct CountEntry {
    pub value: Sig17,
    pub count: u64,
    pub frequency: Sig17,
}

impl CountsJson {
    pub fn new<T: Real>(c: &OutcomeCounts<T>, seed: u64) -> Self {
        Self {
            shots: c.shots,
            seed,
            sample_mean: c.mean().map(Sig17),
            sample_stddev: c.stddev().map(Sig17),
            outcomes: c
                .values
                .iter()
                .zip(&c.counts)
                .zip(c.frequencies())
                .map(|((&v, &n), f)| CountEntry { value: Sig17::of(v), count: n, frequency: Sig17(f) })
                .collect(),
        }
    }
}

#[derive(Serialize)]
pub struct LemmaDemoJson {
    pub dim: usize,
    pub copies: usize,
    pub seed: u64,
    pub probes: usize,
    pub invariant_dimension: usize,
    pub diagonal_reconstruction_error: Sig17,
    pub moment_reconstruction_error: Sig17,
    pub condition_number: Sig17,
    pub coefficient_identity_residual: Sig17,
    pub zero_moment_reconstruction_norm: Sig17,
}

impl<T: Real> From<&LemmaDemo<T>> for LemmaDemoJson {
    fn from(r: &LemmaDemo<T>) -> Self {
        Self {
            dim: r.dim,
            copies: r.copies,
            seed: r.seed,
            probes: r.probes,
            invariant_dimension: r.invariant_dimension,
            diagonal_reconstruction_error: Sig17::of(r.diagonal_reconstruction_error),
            moment_reconstruction_error: Sig17::of(r.moment_reconstruction_error),
            condition_number: Sig17::of(r.condition_number),
            coefficient_identity_residual: Sig17::of(r.coefficient_identity_residual),
            zero_moment_reconstruction_norm: Sig17::of(r.zero_moment_reconstruction_norm),
        }
    }
}

pub fn distribution_csv<T: Real>(d: &OutcomeDistribution<T>) -> String {
    let mut s = String::from("value,probability\n");
    for &(v, p) in d.pairs() {
        s.push_str(&format!("{},{}\n", fmt_sig17(v.as_f64()), fmt_sig17(p.as_f64())));
    }
    s
}

pub fn counts_csv<T: Real>(c: &OutcomeCounts<T>) -> String {
    let mut s = String::from("value,count,frequency\n");
    for ((&v, &n), f) in c.values.iter().zip(&c.counts).zip(c.frequencies()) {
        s.push_str(&format!("{},{},{}\n", fmt_sig17(v.as_f64()), n, fmt_sig17(f)));
    }
    s
}

pub const TRIALS_CSV_HEADER: &str =
    "seed,unbiasedness_residual,feasibility_residual,moment_inequality_min_eig,adversary_error,canonical_error,gap\n";

pub fn trials_csv<T: Real>(records: &[TrialRecord<T>]) -> String {
    let mut s = String::from(TRIALS_CSV_HEADER);
    for rec in records {
        let r = &rec.report;
        let cells = [
            r.unbiasedness_residual,
            r.feasibility_residual,
            r.moment_inequality_min_eig,
            r.adversary_error,
            r.canonical_error,
            r.gap,
        ];
        s.push_str(&rec.seed.to_string());
        for c in cells {
            s.push(',');
            s.push_str(&fmt_sig17(c.as_f64()));
        }
        s.push('\n');
    }
    s
}
