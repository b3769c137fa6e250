//! Named observables and states accepted wherever an operator file is.

use crate::error::{Error, Result};
use crate::linops::{ComplexMatrix, DensityMatrix, HermitianOperator};
use crate::scalar::{Real, C};

/// `pauli-x`, `pauli-y`, `pauli-z`, `spin1-z`, or `identity-<d>`.
pub fn builtin_operator<T: Real>(name: &str) -> Result<HermitianOperator<T>> {
    let (o, l, i) = (T::one(), T::zero(), T::one());
    let m = match name {
        "pauli-x" => ComplexMatrix::from_vec(2, 2, vec![C::new(l, l), C::new(o, l), C::new(o, l), C::new(l, l)])?,
        "pauli-y" => ComplexMatrix::from_vec(2, 2, vec![C::new(l, l), C::new(l, -i), C::new(l, i), C::new(l, l)])?,
        "pauli-z" => ComplexMatrix::from_real_diagonal(&[o, -o]),
        "spin1-z" => ComplexMatrix::from_real_diagonal(&[o, l, -o]),
        _ => match name.strip_prefix("identity-").map(str::parse::<usize>) {
            Some(Ok(d)) if d > 0 => ComplexMatrix::identity(d),
            _ => return Err(Error::UnknownPreset(name.to_string())),
        },
    };
    HermitianOperator::new(m)
}

/// `zero`, `one`, `plus`, `minus`, `plus-i`, `minus-i`, or `mixed-<d>`.
pub fn builtin_state<T: Real>(name: &str) -> Result<DensityMatrix<T>> {
    let (o, l) = (T::one(), T::zero());
    let psi = match name {
        "zero" => vec![C::new(o, l), C::new(l, l)],
        "one" => vec![C::new(l, l), C::new(o, l)],
        "plus" => vec![C::new(o, l), C::new(o, l)],
        "minus" => vec![C::new(o, l), C::new(-o, l)],
        "plus-i" => vec![C::new(o, l), C::new(l, o)],
        "minus-i" => vec![C::new(o, l), C::new(l, -o)],
        _ => {
            return match name.strip_prefix("mixed-").map(str::parse::<usize>) {
                Some(Ok(d)) if d > 0 => Ok(DensityMatrix::maximally_mixed(d)),
                _ => Err(Error::UnknownPreset(name.to_string())),
            }
        }
    };
    DensityMatrix::pure(&psi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_matrices() {
        let z: HermitianOperator<f64> = builtin_operator("pauli-z").unwrap();
        assert_eq!(z.matrix(), &ComplexMatrix::from_real_diagonal(&[1.0, -1.0]));
        let s: HermitianOperator<f64> = builtin_operator("spin1-z").unwrap();
        assert_eq!(s.matrix(), &ComplexMatrix::from_real_diagonal(&[1.0, 0.0, -1.0]));
        let id: HermitianOperator<f64> = builtin_operator("identity-3").unwrap();
        assert_eq!(id.matrix(), &ComplexMatrix::identity(3));
        let y: HermitianOperator<f64> = builtin_operator("pauli-y").unwrap();
        assert_eq!(y.matrix()[(1, 0)], C::new(0.0, 1.0));
        assert!(builtin_operator::<f64>("pauli-x").is_ok());
    }

    #[test]
    fn unknown_names() {
        assert_eq!(builtin_operator::<f64>("pauli-w").unwrap_err().code(), "UNKNOWN_PRESET");
        assert_eq!(builtin_operator::<f64>("identity-0").unwrap_err().code(), "UNKNOWN_PRESET");
        assert_eq!(builtin_state::<f64>("mixed-x").unwrap_err().code(), "UNKNOWN_PRESET");
    }

    #[test]
    fn states() {
        let plus: DensityMatrix<f64> = builtin_state("plus").unwrap();
        assert!((plus.matrix()[(0, 1)].re - 0.5).abs() < 1e-15);
        assert_eq!(builtin_state::<f64>("mixed-3").unwrap().dim(), 3);
    }
}
