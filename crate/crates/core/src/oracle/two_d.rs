//! Two-dimensional instrument `L₂ = A + z′B + εC` with `A = diag(0, −1)`
//! and `det B = det C = B∗C = 0`, for which the control response is linear
//! and the weights form a geometric series.

use nalgebra::{DMatrix, DVector};

use super::comatrix::{codeterminant, comatrix, det2};
use crate::error::{Error, Result};
use crate::family::{CombinedFamily, PolyMatrix, PolyVector, SystemParams};
use crate::scalar::{Field, Real};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoDConstants<T> {
    pub alpha1: T,
    pub alpha2: T,
    pub alpha3: T,
    pub alpha4: T,
    /// Leading weight coefficient.
    pub delta_t0: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TwoDInstance<T: Field> {
    pub a: DMatrix<T>,
    pub b: DMatrix<T>,
    pub c: DMatrix<T>,
    pub q: DVector<T>,
    pub qdag: DVector<T>,
    pub constants: TwoDConstants<T>,
    /// `⟨Q†|B̄Q⟩`.
    pub qbq: T,
    /// `⟨Q†|C̄Q⟩`.
    pub qcq: T,
}

impl<T: Field> TwoDInstance<T> {
    pub fn new(b: DMatrix<T>, c: DMatrix<T>, q: DVector<T>, qdag: DVector<T>) -> Result<Self> {
        if q.nrows() != 2 || qdag.nrows() != 2 {
            return Err(Error::NotTwoByTwo);
        }
        if !det2(&b)?.is_negligible() || !det2(&c)?.is_negligible() || !codeterminant(&b, &c)?.is_negligible() {
            return Err(Error::TwoDConstraintsViolated);
        }
        let (b11, c11) = (b[(0, 0)], c[(0, 0)]);
        let q11 = qdag[0] * q[0];
        let qbq = qdag.dot(&(comatrix(&b)? * &q));
        let qcq = qdag.dot(&(comatrix(&c)? * &q));
        if b11.is_negligible() || q11.is_negligible() || (qbq - b11).is_negligible() {
            return Err(Error::DegenerateTwoD);
        }
        let alpha1 = q11 / (qbq - b11);
        let alpha2 = -(qcq - c11) / (qbq - b11);
        let alpha3 = T::one() / (b11 * alpha1);
        let alpha4 = (b11 * qcq - c11 * qbq) / (b11 * q11);
        let delta_t0 = (qbq - b11) * (qcq - c11) / (q11 * b11);
        let a = DMatrix::from_row_slice(2, 2, &[T::zero(), T::zero(), T::zero(), -T::one()]);
        Ok(Self { a, b, c, q, qdag, constants: TwoDConstants { alpha1, alpha2, alpha3, alpha4, delta_t0 }, qbq, qcq })
    }

    /// `α₁α₄ + α₂ + c₁₁/b₁₁`, zero by construction.
    pub fn identity_residual(&self) -> T {
        let k = &self.constants;
        k.alpha1 * k.alpha4 + k.alpha2 + self.c[(0, 0)] / self.b[(0, 0)]
    }

    /// The instrument in the original control variable `z′`, with `R₀ = 1`.
    pub fn family(&self) -> CombinedFamily<T> {
        let base = SystemParams::new(
            PolyMatrix::new(2, vec![self.a.clone(), self.b.clone()]).expect("2×2"),
            PolyVector::constant(self.q.clone()),
            PolyVector::constant(self.qdag.clone()),
        )
        .expect("consistent dimensions");
        let pert = SystemParams::new(PolyMatrix::constant(self.c.clone()), PolyVector::zeros(2), PolyVector::zeros(2))
            .expect("consistent dimensions");
        CombinedFamily::new(base, pert).expect("consistent dimensions")
    }

    /// `z̲(ε) = α₂ε` in the shifted variable `z = z′ − α₁`.
    pub fn z_bal(&self, eps: T) -> T {
        self.constants.alpha2 * eps
    }

    /// `R*(ε, z)` in the shifted variable.
    pub fn response(&self, eps: T, z: T) -> T {
        let (b11, c11) = (self.b[(0, 0)], self.c[(0, 0)]);
        let q11 = self.qdag[0] * self.q[0];
        let a1 = self.constants.alpha1;
        (self.qbq * z + self.qcq * eps + a1 * self.qbq - q11) / (b11 * z + c11 * eps + b11 * a1)
    }

    fn coefficient(&self, v: &DVector<T>, transpose: bool, p: usize) -> Result<DVector<T>> {
        let k = &self.constants;
        let bar = |m: &DMatrix<T>| comatrix(&if transpose { m.transpose() } else { m.clone() });
        let (abar, bbar, cbar) = (bar(&self.a)?, bar(&self.b)?, bar(&self.c)?);
        if p == 0 {
            return Ok((abar + bbar * k.alpha1) * v * k.alpha3);
        }
        let ratio = self.c[(0, 0)] / self.b[(0, 0)];
        let phi1 = (abar * k.alpha4 - bbar * ratio + cbar) * v * k.alpha3;
        let mut scale = T::one();
        for _ in 1..p {
            scale *= k.alpha4;
        }
        Ok(phi1 * scale)
    }

    /// `Φ̲ₚ`.
    pub fn flux_coeff(&self, p: usize) -> Result<DVector<T>> {
        self.coefficient(&self.q, false, p)
    }

    /// `Φ̲†ₚ`.
    pub fn adjoint_flux_coeff(&self, p: usize) -> Result<DVector<T>> {
        self.coefficient(&self.qdag, true, p)
    }

    /// `δTₙ` assembled from the flux coefficients.
    pub fn weight_coeff(&self, n: usize) -> Result<T> {
        let br = |p1: usize, p2: usize| -> Result<T> {
            Ok(self.adjoint_flux_coeff(p1)?.dot(&(&self.c * self.flux_coeff(p2)?)))
        };
        if n == 0 {
            return br(0, 0);
        }
        let a4 = self.constants.alpha4;
        let mut pow = T::one();
        for _ in 1..n {
            pow *= a4;
        }
        let mut value = pow * (br(0, 1)? + br(1, 0)?);
        if n >= 2 {
            let mut pow2 = T::one();
            for _ in 2..n {
                pow2 *= a4;
            }
            value += pow2 * T::from_int(n as i64 - 1) * br(1, 1)?;
        }
        Ok(value)
    }
}

impl<T: Field + Real> TwoDInstance<T> {
    /// `Z₁(ε) = −(δT₀/α₄)·ln(1 − α₄ε)`.
    pub fn weight_scale(&self, eps: T) -> T {
        let k = &self.constants;
        if k.alpha4.is_zero() {
            return k.delta_t0 * eps;
        }
        -k.delta_t0 / k.alpha4 * (T::one() - k.alpha4 * eps).ln()
    }

    /// `Z₂(z̲(ε)) − Z₂(0) = −Z₁(ε)`.
    pub fn delta_z2(&self, eps: T) -> T {
        -self.weight_scale(eps)
    }
}
