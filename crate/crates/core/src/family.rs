//! Polynomial parameter families `T(z) = (L(z), Q(z), Q†(z))` and the
//! combined family `T₂(ε, z) = T(z) + ε·δT(z)`.
//!
//! Coefficients are stored exactly (index `k` holds the coefficient of
//! `z^k`), so derivatives and Taylor shifts introduce no differentiation
//! error.

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector, Dim, Dyn, OMatrix, U1};

use crate::error::{Error, Result};
use crate::scalar::Field;

/// Polynomial in `z` whose coefficients are dense matrices (`C = Dyn`) or
/// column vectors (`C = U1`).
#[derive(Clone, Debug, PartialEq)]
pub struct Poly<T: Field, C: Dim>
where
    nalgebra::DefaultAllocator: nalgebra::allocator::Allocator<Dyn, C>,
{
    dim: usize,
    coeffs: Vec<OMatrix<T, Dyn, C>>,
}

pub type PolyMatrix<T> = Poly<T, Dyn>;
pub type PolyVector<T> = Poly<T, U1>;

impl<T: Field, C: Dim> Poly<T, C>
where
    nalgebra::DefaultAllocator: nalgebra::allocator::Allocator<Dyn, C>,
{
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coeffs(&self) -> &[OMatrix<T, Dyn, C>] {
        &self.coeffs
    }

    /// Coefficient of `z^k`, zero past the degree.
    pub fn coeff(&self, k: usize) -> OMatrix<T, Dyn, C> {
        match self.coeffs.get(k) {
            Some(c) => c.clone(),
            None => self.zero_coeff(),
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].iter().all(|x| x.is_zero())
    }

    fn zero_coeff(&self) -> OMatrix<T, Dyn, C> {
        let c = &self.coeffs[0];
        OMatrix::<T, Dyn, C>::zeros_generic(Dyn(c.nrows()), C::from_usize(c.ncols()))
    }

    fn from_raw(dim: usize, mut coeffs: Vec<OMatrix<T, Dyn, C>>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.iter().all(|x| x.is_zero())) {
            coeffs.pop();
        }
        Self { dim, coeffs }
    }

    /// Horner evaluation.
    pub fn eval(&self, z: T) -> OMatrix<T, Dyn, C> {
        let mut acc = self.coeffs[self.coeffs.len() - 1].clone();
        for c in self.coeffs.iter().rev().skip(1) {
            acc = acc * z + c;
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Self::from_raw(self.dim, vec![self.zero_coeff()]);
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c * T::from_int(k as i64))
            .collect();
        Self::from_raw(self.dim, coeffs)
    }

    /// Taylor coefficients `f⁽ᵏ⁾(z0)/k!`, `k = 0..=degree`.
    pub fn taylor_at(&self, z0: T) -> Vec<OMatrix<T, Dyn, C>> {
        let n = self.coeffs.len();
        (0..n)
            .map(|k| {
                let mut acc = self.zero_coeff();
                let mut power = T::one();
                for j in k..n {
                    acc += &self.coeffs[j] * (binomial::<T>(j, k) * power);
                    power *= z0;
                }
                acc
            })
            .collect()
    }

    /// The same function in the shifted variable `z ↦ z + z0`.
    pub fn shifted(&self, z0: T) -> Self {
        Self::from_raw(self.dim, self.taylor_at(z0))
    }

    pub fn scaled(&self, alpha: T) -> Self {
        Self::from_raw(self.dim, self.coeffs.iter().map(|c| c * alpha).collect())
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&OMatrix<T, Dyn, C>, &OMatrix<T, Dyn, C>) -> OMatrix<T, Dyn, C>) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::from_raw(self.dim, (0..n).map(|k| f(&self.coeff(k), &other.coeff(k))).collect())
    }
}

impl<T: Field> PolyMatrix<T> {
    pub fn new(dim: usize, coeffs: Vec<DMatrix<T>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DimensionMismatch("dimension must be positive".into()));
        }
        if coeffs.is_empty() {
            return Ok(Self::zeros(dim));
        }
        for (k, c) in coeffs.iter().enumerate() {
            if c.nrows() != dim || c.ncols() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "matrix coefficient {k} is {}x{}, expected {dim}x{dim}",
                    c.nrows(),
                    c.ncols()
                )));
            }
        }
        Ok(Self::from_raw(dim, coeffs))
    }

    pub fn constant(m: DMatrix<T>) -> Self {
        let dim = m.nrows();
        Self::from_raw(dim, vec![m])
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_raw(dim, vec![DMatrix::zeros(dim, dim)])
    }

    pub fn transpose(&self) -> Self {
        Self::from_raw(self.dim, self.coeffs.iter().map(|c| c.transpose()).collect())
    }
}

impl<T: Field> PolyVector<T> {
    pub fn new(dim: usize, coeffs: Vec<DVector<T>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DimensionMismatch("dimension must be positive".into()));
        }
        if coeffs.is_empty() {
            return Ok(Self::zeros(dim));
        }
        for (k, c) in coeffs.iter().enumerate() {
            if c.nrows() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "vector coefficient {k} has length {}, expected {dim}",
                    c.nrows()
                )));
            }
        }
        Ok(Self::from_raw(dim, coeffs))
    }

    pub fn constant(v: DVector<T>) -> Self {
        let dim = v.nrows();
        Self::from_raw(dim, vec![v])
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_raw(dim, vec![DVector::zeros(dim)])
    }
}

impl<T: Field, C: Dim> Add for &Poly<T, C>
where
    nalgebra::DefaultAllocator: nalgebra::allocator::Allocator<Dyn, C>,
{
    type Output = Poly<T, C>;
    fn add(self, rhs: Self) -> Poly<T, C> {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl<T: Field, C: Dim> Sub for &Poly<T, C>
where
    nalgebra::DefaultAllocator: nalgebra::allocator::Allocator<Dyn, C>,
{
    type Output = Poly<T, C>;
    fn sub(self, rhs: Self) -> Poly<T, C> {
        self.zip_with(rhs, |a, b| a - b)
    }
}

fn binomial<T: Field>(n: usize, k: usize) -> T {
    let k = k.min(n - k);
    let mut acc: i64 = 1;
    for i in 0..k {
        acc = acc * (n - i) as i64 / (i + 1) as i64;
    }
    T::from_int(acc)
}

/// Evaluated parameters `(L, Q, Q†)` at one point, or any linear
/// combination of them (derivatives, perturbations, Taylor remainders).
#[derive(Clone, Debug, PartialEq)]
pub struct Triple<T: Field> {
    pub l: DMatrix<T>,
    pub q: DVector<T>,
    pub qdag: DVector<T>,
}

impl<T: Field> Triple<T> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            l: DMatrix::zeros(dim, dim),
            q: DVector::zeros(dim),
            qdag: DVector::zeros(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.q.nrows()
    }

    /// The dual problem's parameters `(Lᵀ, Q†, Q)`.
    pub fn dual(&self) -> Self {
        Self {
            l: self.l.transpose(),
            q: self.qdag.clone(),
            qdag: self.q.clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.l.iter().chain(self.q.iter()).chain(self.qdag.iter()).all(|x| x.is_zero())
    }

    pub fn axpy(&mut self, alpha: T, other: &Self) {
        self.l += &other.l * alpha;
        self.q += &other.q * alpha;
        self.qdag += &other.qdag * alpha;
    }
}

impl<T: Field> Add for &Triple<T> {
    type Output = Triple<T>;
    fn add(self, rhs: Self) -> Triple<T> {
        Triple {
            l: &self.l + &rhs.l,
            q: &self.q + &rhs.q,
            qdag: &self.qdag + &rhs.qdag,
        }
    }
}

impl<T: Field> Mul<T> for &Triple<T> {
    type Output = Triple<T>;
    fn mul(self, alpha: T) -> Triple<T> {
        Triple {
            l: &self.l * alpha,
            q: &self.q * alpha,
            qdag: &self.qdag * alpha,
        }
    }
}

/// System parameters `T = (L, Q, Q†)` as polynomial families in the
/// control variable.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemParams<T: Field> {
    pub l: PolyMatrix<T>,
    pub q: PolyVector<T>,
    pub qdag: PolyVector<T>,
}

impl<T: Field> SystemParams<T> {
    pub fn new(l: PolyMatrix<T>, q: PolyVector<T>, qdag: PolyVector<T>) -> Result<Self> {
        if l.dim() != q.dim() || l.dim() != qdag.dim() {
            return Err(Error::DimensionMismatch(format!(
                "L is {0}x{0}, Q has length {1}, Q† has length {2}",
                l.dim(),
                q.dim(),
                qdag.dim()
            )));
        }
        Ok(Self { l, q, qdag })
    }

    /// Parameters independent of `z`.
    pub fn constant(value: Triple<T>) -> Self {
        Self {
            l: PolyMatrix::constant(value.l),
            q: PolyVector::constant(value.q),
            qdag: PolyVector::constant(value.qdag),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            l: PolyMatrix::zeros(dim),
            q: PolyVector::zeros(dim),
            qdag: PolyVector::zeros(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.l.dim()
    }

    pub fn degree(&self) -> usize {
        self.l.degree().max(self.q.degree()).max(self.qdag.degree())
    }

    pub fn is_zero(&self) -> bool {
        self.l.is_zero() && self.q.is_zero() && self.qdag.is_zero()
    }

    pub fn eval(&self, z: T) -> Triple<T> {
        Triple {
            l: self.l.eval(z),
            q: self.q.eval(z),
            qdag: self.qdag.eval(z),
        }
    }

    pub fn derivative(&self) -> Self {
        Self {
            l: self.l.derivative(),
            q: self.q.derivative(),
            qdag: self.qdag.derivative(),
        }
    }

    /// Taylor coefficients at `z0`, `k = 0..=degree`.
    pub fn taylor_at(&self, z0: T) -> Vec<Triple<T>> {
        let l = self.l.taylor_at(z0);
        let q = self.q.taylor_at(z0);
        let qdag = self.qdag.taylor_at(z0);
        let dim = self.dim();
        (0..=self.degree())
            .map(|k| Triple {
                l: l.get(k).cloned().unwrap_or_else(|| DMatrix::zeros(dim, dim)),
                q: q.get(k).cloned().unwrap_or_else(|| DVector::zeros(dim)),
                qdag: qdag.get(k).cloned().unwrap_or_else(|| DVector::zeros(dim)),
            })
            .collect()
    }

    pub fn shifted(&self, z0: T) -> Self {
        Self {
            l: self.l.shifted(z0),
            q: self.q.shifted(z0),
            qdag: self.qdag.shifted(z0),
        }
    }

    /// Control is linear iff `T'' = 0` identically.
    pub fn is_linear_control(&self) -> bool {
        self.degree() <= 1
    }

    /// A perturbation is remote from control iff `δT' = 0` identically.
    pub fn is_remote(&self) -> bool {
        self.degree() == 0
    }

    /// Unexcited sources: `δQ = δQ† = 0`.
    pub fn has_zero_sources(&self) -> bool {
        self.q.is_zero() && self.qdag.is_zero()
    }

    pub fn with_qdag_scaled(&self, alpha: T) -> Self {
        Self {
            l: self.l.clone(),
            q: self.q.clone(),
            qdag: self.qdag.scaled(alpha),
        }
    }

    pub fn scaled(&self, alpha: T) -> Self {
        Self {
            l: self.l.scaled(alpha),
            q: self.q.scaled(alpha),
            qdag: self.qdag.scaled(alpha),
        }
    }

    /// The dual system's parameters `(Lᵀ, Q†, Q)`.
    pub fn dual(&self) -> Self {
        Self {
            l: self.l.transpose(),
            q: self.qdag.clone(),
            qdag: self.q.clone(),
        }
    }

    fn coeff(&self, k: usize) -> Triple<T> {
        Triple {
            l: self.l.coeff(k),
            q: self.q.coeff(k),
            qdag: self.qdag.coeff(k),
        }
    }

    fn from_coeffs(dim: usize, coeffs: &[Triple<T>]) -> Self {
        Self {
            l: PolyMatrix::from_raw(dim, coeffs.iter().map(|c| c.l.clone()).collect()),
            q: PolyVector::from_raw(dim, coeffs.iter().map(|c| c.q.clone()).collect()),
            qdag: PolyVector::from_raw(dim, coeffs.iter().map(|c| c.qdag.clone()).collect()),
        }
    }
}

impl<T: Field> Add for &SystemParams<T> {
    type Output = SystemParams<T>;
    fn add(self, rhs: Self) -> SystemParams<T> {
        SystemParams {
            l: &self.l + &rhs.l,
            q: &self.q + &rhs.q,
            qdag: &self.qdag + &rhs.qdag,
        }
    }
}

/// `T₂(ε, z) = T(z) + ε·δT(z)`: linear in the exciting variable `ε`.
#[derive(Clone, Debug, PartialEq)]
pub struct CombinedFamily<T: Field> {
    pub base: SystemParams<T>,
    pub pert: SystemParams<T>,
}

impl<T: Field> CombinedFamily<T> {
    pub fn new(base: SystemParams<T>, pert: SystemParams<T>) -> Result<Self> {
        if base.dim() != pert.dim() {
            return Err(Error::DimensionMismatch(format!(
                "base dimension {} differs from perturbation dimension {}",
                base.dim(),
                pert.dim()
            )));
        }
        Ok(Self { base, pert })
    }

    pub fn unperturbed(base: SystemParams<T>) -> Self {
        let pert = SystemParams::zeros(base.dim());
        Self { base, pert }
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn eval(&self, eps: T, z: T) -> Triple<T> {
        let mut value = self.base.eval(z);
        if !eps.is_zero() {
            value.axpy(eps, &self.pert.eval(z));
        }
        value
    }

    /// The partial family `z ↦ T₂(ε, z)`.
    pub fn at_epsilon(&self, eps: T) -> SystemParams<T> {
        &self.base + &self.pert.scaled(eps)
    }

    /// `∂T₂/∂z` as a combined family.
    pub fn control_derivative(&self) -> Self {
        Self {
            base: self.base.derivative(),
            pert: self.pert.derivative(),
        }
    }

    pub fn is_linear_control(&self) -> bool {
        self.base.is_linear_control() && self.pert.is_linear_control()
    }

    pub fn is_remote(&self) -> bool {
        self.pert.is_remote()
    }

    pub fn shifted(&self, z0: T) -> Self {
        Self {
            base: self.base.shifted(z0),
            pert: self.pert.shifted(z0),
        }
    }

    pub fn with_qdag_scaled(&self, alpha: T) -> Self {
        Self {
            base: self.base.with_qdag_scaled(alpha),
            pert: self.pert.with_qdag_scaled(alpha),
        }
    }

    /// Swaps the roles of the exciting and control variables:
    /// `(E T₂)(z, ε) = T₂(ε, z)`.
    ///
    /// With `T = T₀ + zT₁` and `δT = D₀ + zD₁` the exchanged family has base
    /// `T₀ + εD₀` and perturbation `T₁ + εD₁`; coefficients are moved, never
    /// recomputed, so the exchange is an exact involution.
    pub fn exchange(&self) -> Result<Self> {
        if self.base.degree() > 1 || self.pert.degree() > 1 {
            return Err(Error::ExchangeDegree);
        }
        let dim = self.dim();
        let base = SystemParams::from_coeffs(dim, &[self.base.coeff(0), self.pert.coeff(0)]);
        let pert = SystemParams::from_coeffs(dim, &[self.base.coeff(1), self.pert.coeff(1)]);
        Ok(Self { base, pert })
    }
}

/// Reference value `R₀` of the gauge output.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaugeReference<T: Field>(T);

impl<T: Field> GaugeReference<T> {
    pub fn new(r0: T) -> Result<Self> {
        if r0.is_zero() {
            return Err(Error::ZeroGaugeReference);
        }
        Ok(Self(r0))
    }

    pub fn unit() -> Self {
        Self(T::one())
    }

    pub fn value(&self) -> T {
        self.0
    }
}
