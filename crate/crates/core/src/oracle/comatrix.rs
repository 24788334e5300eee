//! 2×2 complementary matrices and the codeterminant pairing.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::Field;

fn check<T: Field>(a: &DMatrix<T>) -> Result<()> {
    if a.shape() != (2, 2) {
        return Err(Error::NotTwoByTwo);
    }
    Ok(())
}

pub fn det2<T: Field>(a: &DMatrix<T>) -> Result<T> {
    check(a)?;
    Ok(a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)])
}

/// `Ā`, the transposed matrix of cofactors: `ĀA = AĀ = det(A)·1`.
pub fn comatrix<T: Field>(a: &DMatrix<T>) -> Result<DMatrix<T>> {
    check(a)?;
    Ok(DMatrix::from_row_slice(2, 2, &[a[(1, 1)], -a[(0, 1)], -a[(1, 0)], a[(0, 0)]]))
}

/// `A∗B`: the determinant with the first row of `A` and the second of `B`,
/// plus the one with the rows swapped. `A∗A = 2 det A`.
pub fn codeterminant<T: Field>(a: &DMatrix<T>, b: &DMatrix<T>) -> Result<T> {
    check(a)?;
    check(b)?;
    Ok(a[(0, 0)] * b[(1, 1)] - a[(0, 1)] * b[(1, 0)] + b[(0, 0)] * a[(1, 1)] - b[(0, 1)] * a[(1, 0)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Rational64;

    #[test]
    fn direct_values() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(comatrix(&a).unwrap(), DMatrix::from_row_slice(2, 2, &[4.0, -2.0, -3.0, 1.0]));
        let i = DMatrix::<f64>::identity(2, 2);
        assert_eq!(comatrix(&i).unwrap(), i);
        assert_eq!(codeterminant(&i, &i).unwrap(), 2.0);
        assert_eq!(comatrix(&DMatrix::<f64>::zeros(3, 3)).unwrap_err(), Error::NotTwoByTwo);
        assert_eq!(codeterminant(&i, &DMatrix::zeros(2, 3)).unwrap_err(), Error::NotTwoByTwo);
    }

    #[test]
    fn exact_identities() {
        let r = |n: i64| Rational64::from_integer(n);
        let a = DMatrix::from_row_slice(2, 2, &[r(3), r(-1), r(2), r(5)]);
        let c = DMatrix::from_row_slice(2, 2, &[r(-2), r(7), r(1), r(4)]);
        let abar = comatrix(&a).unwrap();
        let det = det2(&a).unwrap();
        assert_eq!(&abar * &a, DMatrix::identity(2, 2) * det);
        assert_eq!(comatrix(&abar).unwrap(), a);
        assert_eq!(codeterminant(&a, &a).unwrap(), r(2) * det);
        let lhs = &abar * &c * &abar;
        let rhs = &abar * codeterminant(&c, &a).unwrap() - comatrix(&c).unwrap() * det;
        assert_eq!(lhs, rhs);
    }
}
