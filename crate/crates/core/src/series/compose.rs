//! Composition of a polynomial family with a power series `z(ε)`.
//!
//! With Taylor coefficients `cₖ` at `z₀ = z(0)`, the composed series has
//! coefficients `(T∘z)ₙ = zₙ·T′ + Tₙ`, where the remainder `Tₙ` only involves
//! `z₁ … zₙ₋₁`: `T₀ = T(z₀)`, `T₁ = 0`, and `Tₙ = Σ_{k≥2} cₖ·[εⁿ](z − z₀)ᵏ`.

use super::ScalarSeries;
use crate::family::{SystemParams, Triple};
use crate::scalar::Field;

fn binomial<T: Field>(n: usize, k: usize) -> T {
    let k = k.min(n - k);
    let mut acc: i64 = 1;
    for i in 0..k {
        acc = acc * (n - i) as i64 / (i + 1) as i64;
    }
    T::from_int(acc)
}

/// Sum over multisets of `k` parts from `{1, …, largest}` adding up to `n`
/// of `k!/Πmⱼ! · Π zⱼ^mⱼ`.
fn partitions<T: Field>(z: &[T], largest: usize, n: usize, k: usize) -> T {
    if k == 0 {
        return if n == 0 { T::one() } else { T::zero() };
    }
    if largest == 0 || n < k || n > k * largest {
        return T::zero();
    }
    let zj = z.get(largest).copied().unwrap_or_else(T::zero);
    let mut total = T::zero();
    let mut power = T::one();
    for m in 0..=k.min(n / largest) {
        if m > 0 {
            power *= zj;
            if power.is_zero() {
                break;
            }
        }
        let rest = partitions(z, largest - 1, n - m * largest, k - m);
        total += binomial::<T>(k, m) * power * rest;
    }
    total
}

/// `[εⁿ] (Σ_{j≥1} zⱼ εʲ)ᵏ` by the multinomial formula; `z[0]` is ignored.
pub fn multinomial_power<T: Field>(z: &[T], n: usize, k: usize) -> T {
    partitions(z, n.min(z.len().saturating_sub(1)), n, k)
}

fn deviation<T: Field>(z: &ScalarSeries<T>) -> Vec<T> {
    let mut dev = z.coeffs().to_vec();
    dev[0] = T::zero();
    dev
}

/// Remainder `Tₙ` from the Taylor coefficients `taylor[k] = T⁽ᵏ⁾(z₀)/k!`.
pub fn remainder_terms<T: Field>(taylor: &[Triple<T>], z: &ScalarSeries<T>, n: usize) -> Triple<T> {
    let dim = taylor[0].dim();
    match n {
        0 => taylor[0].clone(),
        1 => Triple::zeros(dim),
        _ => {
            let dev = deviation(z);
            let dev = &dev[..dev.len().min(n)];
            let mut out = Triple::zeros(dim);
            for (k, c) in taylor.iter().enumerate().skip(2) {
                let w = multinomial_power(dev, n, k);
                if !w.is_zero() {
                    out.axpy(w, c);
                }
            }
            out
        }
    }
}

/// Coefficients `0..=order` of `T∘z`, by truncated powers of `z − z₀`.
pub fn compose<T: Field>(taylor: &[Triple<T>], z: &ScalarSeries<T>, order: usize) -> Vec<Triple<T>> {
    let dim = taylor[0].dim();
    let dev = ScalarSeries::new(deviation(z)).truncated(order);
    let mut out: Vec<Triple<T>> = (0..=order).map(|_| Triple::zeros(dim)).collect();
    let mut power = ScalarSeries::new(vec![T::one()]).truncated(order);
    for (k, c) in taylor.iter().enumerate() {
        if k > 0 {
            power = power.mul(&dev);
        }
        for (n, o) in out.iter_mut().enumerate() {
            let w = power.coeff(n);
            if !w.is_zero() {
                o.axpy(w, c);
            }
        }
    }
    out
}

/// [`compose`] for a family, expanding at `z(0)`.
pub fn compose_family<T: Field>(params: &SystemParams<T>, z: &ScalarSeries<T>) -> Vec<Triple<T>> {
    compose(&params.taylor_at(z.coeff(0)), z, z.order())
}

/// `Tₙ = (T∘z)ₙ − zₙT′`, the composition route to the remainder.
pub fn remainder_from_composition<T: Field>(taylor: &[Triple<T>], z: &ScalarSeries<T>, n: usize) -> Triple<T> {
    let mut out = compose(taylor, z, n).swap_remove(n);
    if n >= 1 && taylor.len() > 1 {
        out.axpy(-z.coeff(n), &taylor[1]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{PolyMatrix, PolyVector};
    use nalgebra::DMatrix;
    use num_rational::Rational64;

    fn scalar_params<T: Field>(coeffs: &[T]) -> SystemParams<T> {
        let l = PolyMatrix::new(1, coeffs.iter().map(|&c| DMatrix::from_element(1, 1, c)).collect()).unwrap();
        SystemParams::new(l, PolyVector::zeros(1), PolyVector::zeros(1)).unwrap()
    }

    fn l_coeffs<T: Field>(v: &[Triple<T>]) -> Vec<T> {
        v.iter().map(|t| t.l[(0, 0)]).collect()
    }

    #[test]
    fn square_of_identity_series() {
        let p = scalar_params(&[0.0, 0.0, 1.0]);
        let z = ScalarSeries::new(vec![0.0, 1.0, 0.0, 0.0, 0.0]);
        assert_eq!(l_coeffs(&compose_family(&p, &z)), vec![0.0, 0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn square_of_binomial_series() {
        let p = scalar_params(&[0.0, 0.0, 1.0]);
        let z = ScalarSeries::new(vec![0.0, 1.0, 1.0, 0.0, 0.0, 0.0]);
        assert_eq!(l_coeffs(&compose_family(&p, &z)), vec![0.0, 0.0, 1.0, 2.0, 1.0, 0.0]);
    }

    #[test]
    fn constant_series_gives_constant_value() {
        let p = scalar_params(&[1.0, -2.0, 0.5, 3.0]);
        let z = ScalarSeries::new(vec![0.7, 0.0, 0.0, 0.0]);
        let c = l_coeffs(&compose_family(&p, &z));
        assert_eq!(c[0], p.eval(0.7).l[(0, 0)]);
        assert!(c[1..].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn linear_family_has_no_remainders() {
        let p = scalar_params(&[1.0, -2.0]);
        let z = ScalarSeries::new(vec![0.0, 0.3, -1.2, 0.8, 2.0, 0.1]);
        let taylor = p.taylor_at(0.0);
        assert!(remainder_terms(&taylor, &z, 5).is_zero());
    }

    #[test]
    fn low_order_remainders_exact() {
        let r = |n: i64, d: i64| Rational64::new(n, d);
        // T(z) = 1 + 2z + 3z² + 5z³, so T″/2 = 3 and T‴/6 = 5.
        let p = scalar_params(&[r(1, 1), r(2, 1), r(3, 1), r(5, 1)]);
        let taylor = p.taylor_at(r(0, 1));
        let z = ScalarSeries::new(vec![r(0, 1), r(1, 3), r(-2, 7), r(4, 5)]);
        let (z1, z2) = (z.coeff(1), z.coeff(2));
        assert_eq!(remainder_terms(&taylor, &z, 0).l[(0, 0)], r(1, 1));
        assert!(remainder_terms(&taylor, &z, 1).is_zero());
        assert_eq!(remainder_terms(&taylor, &z, 2).l[(0, 0)], r(3, 1) * z1 * z1);
        assert_eq!(
            remainder_terms(&taylor, &z, 3).l[(0, 0)],
            r(6, 1) * z1 * z2 + r(5, 1) * z1 * z1 * z1
        );
    }

    #[test]
    fn both_remainder_routes_agree_exactly() {
        let r = |n: i64, d: i64| Rational64::new(n, d);
        let p = scalar_params(&[r(1, 2), r(-1, 3), r(2, 5), r(1, 7), r(-3, 11)]);
        let taylor = p.taylor_at(r(1, 4));
        let z = ScalarSeries::new(vec![r(1, 4), r(1, 2), r(-1, 3), r(2, 9), r(1, 5), r(-1, 6), r(3, 8), r(1, 10)]);
        for n in 0..=7 {
            assert_eq!(remainder_terms(&taylor, &z, n), remainder_from_composition(&taylor, &z, n), "order {n}");
        }
    }

    #[test]
    fn composition_matches_numeric_evaluation() {
        let p = scalar_params(&[0.3, -1.0, 0.7, 0.25]);
        let z = ScalarSeries::new(vec![0.1, 0.5, -0.2, 0.05, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let series = ScalarSeries::new(l_coeffs(&compose_family(&p, &z)));
        for eps in [-0.05f64, 0.02, 0.04] {
            let direct = p.eval(z.eval(eps)).l[(0, 0)];
            assert!((series.eval(eps) - direct as f64).abs() < 1e-14);
        }
    }
}
