//! Dense LU helpers with a pivot-ratio singularity test.

use nalgebra::{DMatrix, DVector, Dyn, LU};

use crate::scalar::Real;

/// Smallest accepted ratio `min |u_ii| / max |u_ii|` of the LU pivots.
pub fn singular_threshold<T: Real>(n: usize) -> T {
    T::machine_epsilon() * T::lit(16.0 * n.max(1) as f64)
}

/// Ratio of the smallest to the largest pivot modulus.
pub fn pivot_ratio<T: Real>(lu: &LU<T, Dyn, Dyn>) -> T {
    let u = lu.u();
    let n = u.nrows();
    let mut lo = T::max_value().unwrap_or_else(|| T::lit(f64::MAX));
    let mut hi = T::zero();
    for i in 0..n {
        let p = u[(i, i)].abs();
        lo = lo.min(p);
        hi = hi.max(p);
    }
    if hi.is_zero() {
        T::zero()
    } else {
        lo / hi
    }
}

/// LU factorization, `None` when the matrix is numerically singular.
pub fn factorize<T: Real>(m: &DMatrix<T>) -> Option<LU<T, Dyn, Dyn>> {
    let lu = m.clone().lu();
    if pivot_ratio(&lu) <= singular_threshold(m.nrows()) {
        None
    } else {
        Some(lu)
    }
}

pub fn solve<T: Real>(m: &DMatrix<T>, b: &DVector<T>) -> Option<DVector<T>> {
    factorize(m)?.solve(b)
}

/// Sign of `det m` (0 when numerically singular).
pub fn det_sign<T: Real>(m: &DMatrix<T>) -> i8 {
    let lu = m.clone().lu();
    if pivot_ratio(&lu) <= singular_threshold(m.nrows()) {
        return 0;
    }
    if lu.determinant() > T::zero() {
        1
    } else {
        -1
    }
}

/// Solves the least-squares problem `min ‖A x − b‖` by SVD.
/// Returns the solution and the 2-norm condition number of `A`.
pub fn least_squares<T: Real>(a: &DMatrix<T>, b: &DVector<T>) -> Option<(DVector<T>, T)> {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smin <= smax * singular_threshold(a.ncols()) {
        return None;
    }
    let x = svd.solve(b, T::zero()).ok()?;
    Some((x, smax / smin))
}
