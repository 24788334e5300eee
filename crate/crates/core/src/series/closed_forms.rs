//! Explicit first- and second-order results, used to cross-check the
//! recursion.

use nalgebra::DVector;

use super::recursion::{raw_bracket, Reference};
use crate::error::Result;
use crate::scalar::Real;
use crate::spectral::harmonic_solve;

/// `z̲₁ = −⟨δT⟩ / ⟨T′⟩`.
pub fn first_order_z<T: Real>(r: &Reference<T>) -> T {
    let dt = raw_bracket(r.pert_at_balance(), &r.adjoint_flux, &r.flux, true, true);
    -dt / r.differential_weight
}

/// `Φ₁`: fundamental amplitude from the harmonic brackets plus the harmonic
/// response to `z̲₁(L′Φ + Q′) + δLΦ + δQ`.
pub fn first_order_flux<T: Real>(r: &Reference<T>) -> Result<DVector<T>> {
    let sd = &r.spectral;
    let tp = r.control_derivative();
    let dt = r.pert_at_balance();
    let adj_tilde = sd.project_harmonic_adjoint(&r.adjoint_flux);
    let tilde = |l: &nalgebra::DMatrix<T>, q: &DVector<T>, qdag: &DVector<T>| {
        adj_tilde.dot(&(l * &r.flux + q)) + qdag.dot(&r.flux)
    };
    let z1 = first_order_z(r);
    let amplitude = -(tilde(&dt.l, &dt.q, &dt.qdag) + z1 * tilde(&tp.l, &tp.q, &tp.qdag)) / r.base[0].qdag.dot(&sd.phi);
    let drive = (&tp.l * &r.flux + &tp.q) * z1 + &dt.l * &r.flux + &dt.q;
    Ok(&sd.phi * amplitude - harmonic_solve(&r.base[0].l, sd, &drive)?)
}

/// `z̲₂` from `−z̲₂⟨T′⟩ = z̲₁(⟨δT′⟩ + ⟨T′⟩₀₁) + z̲₁²⟨T″⟩/2 + ⟨δT⟩₀₁`, with `Φ₁`
/// from [`first_order_flux`].
pub fn second_order_z<T: Real>(r: &Reference<T>) -> Result<T> {
    let phi1 = first_order_flux(r)?;
    let adj = &r.adjoint_flux;
    let bracket00 = |x: &crate::family::Triple<T>| raw_bracket(x, adj, &r.flux, true, true);
    let bracket01 = |x: &crate::family::Triple<T>| raw_bracket(x, adj, &phi1, true, false);
    let z1 = first_order_z(r);
    let tp = r.control_derivative();
    let dt = r.pert_at_balance();
    let mut rhs = z1 * (bracket00(&r.pert_derivative()) + bracket01(&tp)) + bracket01(dt);
    if let Some(t2) = r.base.get(2) {
        rhs += z1 * z1 * bracket00(t2);
    }
    Ok(-rhs / r.differential_weight)
}
