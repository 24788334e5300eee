//! One-dimensional instrument `L = Bz′ + Cε` with scalar sources, where the
//! harmonic subspace is trivial and every quantity has a closed form.

use crate::error::{Error, Result};
use crate::scalar::Field;

/// Closed-form values at one `ε`, with `z = z′ + Q†Q/B` (so `z̲(0) = 0`)
/// and `R₀ = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OneDValues<T> {
    pub z_bal: T,
    pub flux: T,
    pub adjoint_flux: T,
    pub z1: T,
    pub delta_z2: T,
}

pub fn one_d_oracle<T: Field>(b: T, c: T, q: T, qdag: T, eps: T) -> Result<OneDValues<T>> {
    let qq = qdag * q;
    if b.is_negligible() || qq.is_negligible() {
        return Err(Error::DegenerateOneD);
    }
    let z_bal = -c * eps / b;
    Ok(OneDValues {
        z_bal,
        flux: T::one() / qdag,
        adjoint_flux: T::one() / q,
        z1: c * eps / qq,
        delta_z2: b * z_bal / qq,
    })
}
