//! Operator and POVM JSON formats.
//!
//! Operator: `{"dim": d, "re": [[...]], "im": [[...]]}`, row-major and
//! rectangular. POVM: `{"dim": D, "outcomes": [{"value": r, "re": ..., "im": ...}]}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linops::ComplexMatrix;
use crate::povm::{Outcome, Povm};
use crate::report::{sig_rows, to_json, Sig17};
use crate::scalar::Real;
use crate::symspace::CopySpace;
use crate::HermitianOperator;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OperatorIn {
    dim: usize,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct OperatorOut {
    dim: usize,
    re: Vec<Vec<Sig17>>,
    im: Vec<Vec<Sig17>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OutcomeIn {
    value: f64,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PovmIn {
    dim: usize,
    outcomes: Vec<OutcomeIn>,
}

#[derive(Serialize)]
struct OutcomeOut {
    value: Sig17,
    re: Vec<Vec<Sig17>>,
    im: Vec<Vec<Sig17>>,
}

#[derive(Serialize)]
struct PovmOut {
    dim: usize,
    outcomes: Vec<OutcomeOut>,
}

fn to_t<T: Real>(rows: Vec<Vec<f64>>) -> Vec<Vec<T>> {
    rows.into_iter().map(|r| r.into_iter().map(T::lit).collect()).collect()
}

fn square_from_parts<T: Real>(dim: usize, re: Vec<Vec<f64>>, im: Vec<Vec<f64>>) -> Result<ComplexMatrix<T>> {
    let m = ComplexMatrix::from_parts(&to_t::<T>(re), &to_t::<T>(im))?;
    if m.rows() != dim || m.cols() != dim {
        return Err(Error::DimensionMismatch(format!("declared dim {dim} but arrays are {}x{}", m.rows(), m.cols())));
    }
    Ok(m)
}

pub fn parse_operator<T: Real>(text: &str) -> Result<ComplexMatrix<T>> {
    let raw: OperatorIn = serde_json::from_str(text).map_err(|e| Error::Parse(format!("operator JSON: {e}")))?;
    square_from_parts(raw.dim, raw.re, raw.im)
}

pub fn operator_to_json<T: Real>(m: &ComplexMatrix<T>) -> String {
    to_json(&OperatorOut { dim: m.rows(), re: sig_rows(&m.real_parts()), im: sig_rows(&m.imag_parts()) })
}

/// Integer `n`-th root of `total`, if exact.
fn exact_root(total: usize, n: usize) -> Option<usize> {
    let guess = (total as f64).powf(1.0 / n as f64).round() as usize;
    (guess.saturating_sub(1)..=guess + 1).find(|&d| d > 0 && d.checked_pow(n as u32) == Some(total))
}

/// Copy structure of a `total`-dimensional joint space.
///
/// With `copies` given the local dimension is the exact root; otherwise the
/// space is read as a single system.
pub fn resolve_space(total: usize, copies: Option<usize>, cap: usize) -> Result<CopySpace> {
    match copies {
        None | Some(1) => CopySpace::with_cap(total, 1, cap.max(total)),
        Some(0) => Err(Error::ZeroCopies),
        Some(n) => {
            let d = exact_root(total, n)
                .ok_or_else(|| Error::DimensionMismatch(format!("{total} is not a {n}-th power of a local dimension")))?;
            CopySpace::with_cap(d, n, cap)
        }
    }
}

/// Parses a POVM; elements must be Hermitian within the default tolerance.
pub fn parse_povm<T: Real>(text: &str, copies: Option<usize>, cap: usize) -> Result<Povm<T>> {
    let raw: PovmIn = serde_json::from_str(text).map_err(|e| Error::Parse(format!("POVM JSON: {e}")))?;
    let space = resolve_space(raw.dim, copies, cap)?;
    let outcomes = raw
        .outcomes
        .into_iter()
        .map(|o| {
            let m = square_from_parts::<T>(raw.dim, o.re, o.im)?;
            Ok(Outcome::new(T::lit(o.value), HermitianOperator::new(m)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Povm::new(space, outcomes)
}

pub fn povm_to_json<T: Real>(p: &Povm<T>) -> String {
    to_json(&PovmOut {
        dim: p.space().total_dim(),
        outcomes: p
            .outcomes()
            .iter()
            .map(|o| OutcomeOut {
                value: Sig17::of(o.value),
                re: sig_rows(&o.element.matrix().real_parts()),
                im: sig_rows(&o.element.matrix().imag_parts()),
            })
            .collect(),
    })
}
