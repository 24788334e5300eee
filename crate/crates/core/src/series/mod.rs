//! Truncated power series in the exciting variable and the perturbation
//! recursion built on them.

mod brackets;
mod closed_forms;
mod compose;
mod recursion;

pub use brackets::{bilinear_series, bracket_table, pair_bracket, BracketTable, Derivation};
pub use closed_forms::{first_order_flux, first_order_z, second_order_z};
pub use compose::{compose, compose_family, multinomial_power, remainder_from_composition, remainder_terms};
pub use recursion::{linear_control_series, perturbation_series, Reference, SeriesBundle};

use nalgebra::DVector;

use crate::scalar::{Field, Real};

/// `Σ cₙ εⁿ` truncated at order `N = coeffs.len() − 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarSeries<T: Field> {
    coeffs: Vec<T>,
}

impl<T: Field> ScalarSeries<T> {
    pub fn new(coeffs: Vec<T>) -> Self {
        if coeffs.is_empty() {
            return Self { coeffs: vec![T::zero()] };
        }
        Self { coeffs }
    }

    pub fn zeros(order: usize) -> Self {
        Self { coeffs: vec![T::zero(); order + 1] }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    /// Coefficient `n`, zero past the order.
    pub fn coeff(&self, n: usize) -> T {
        self.coeffs.get(n).copied().unwrap_or_else(T::zero)
    }

    pub fn eval(&self, x: T) -> T {
        self.coeffs.iter().rev().fold(T::zero(), |acc, &c| acc * x + c)
    }

    /// Product truncated at `self.order()`.
    pub fn mul(&self, other: &Self) -> Self {
        let n = self.order();
        let mut out = vec![T::zero(); n + 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate().take(n + 1 - i) {
                out[i + j] += a * b;
            }
        }
        Self { coeffs: out }
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.order().max(other.order());
        Self::new((0..=n).map(|k| self.coeff(k) + other.coeff(k)).collect())
    }

    pub fn truncated(&self, order: usize) -> Self {
        Self::new((0..=order).map(|k| self.coeff(k)).collect())
    }
}

/// Vector-valued truncated series.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorSeries<T: Field> {
    coeffs: Vec<DVector<T>>,
}

impl<T: Field> VectorSeries<T> {
    pub fn new(coeffs: Vec<DVector<T>>) -> Self {
        assert!(!coeffs.is_empty(), "a vector series needs its order-0 coefficient");
        Self { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn dim(&self) -> usize {
        self.coeffs[0].nrows()
    }

    pub fn coeffs(&self) -> &[DVector<T>] {
        &self.coeffs
    }

    pub fn coeff(&self, n: usize) -> &DVector<T> {
        &self.coeffs[n]
    }

    pub fn eval(&self, x: T) -> DVector<T> {
        let mut acc = DVector::zeros(self.dim());
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn component(&self, i: usize) -> ScalarSeries<T> {
        ScalarSeries::new(self.coeffs.iter().map(|c| c[i]).collect())
    }
}

/// Ratio-test estimate `|cₙ / cₙ₊₁|` of the radius of convergence, from the
/// last pair of non-negligible coefficients of order ≥ 1. `None` when the
/// tail vanishes (the series looks polynomial).
pub fn ratio_radius<T: Real>(coeffs: &[T]) -> Option<T> {
    let scale = coeffs.iter().fold(T::zero(), |m, c| m.max(c.abs()));
    let floor = scale * T::lit(1e-13);
    let significant = |c: T| c.abs() > floor;
    (1..coeffs.len().saturating_sub(1))
        .rev()
        .find(|&n| significant(coeffs[n]) && significant(coeffs[n + 1]))
        .map(|n| (coeffs[n] / coeffs[n + 1]).abs())
}
