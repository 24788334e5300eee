//! Bilinear brackets `⟨X⟩ₚ₁ₚ₂` between the flux coefficients of a bundle and
//! the bilinear series `⟨DT⟩ₙ` of a derived family along the constrained path.

use nalgebra::DMatrix;

use super::compose::remainder_terms;
use super::recursion::{raw_bracket, SeriesBundle};
use super::ScalarSeries;
use crate::error::{Error, Result};
use crate::family::Triple;
use crate::scalar::{Field, Real};

/// Which derived family `DT₂` a bracket refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Derivation {
    /// `∂z`: `T′ + εδT′`.
    Control,
    /// `∂ε`: `δT`.
    Perturbation,
    /// `T + εδT` itself.
    Identity,
}

fn check_order<T: Real>(bundle: &SeriesBundle<T>, requested: usize) -> Result<()> {
    if requested > bundle.order() {
        return Err(Error::OrderExceeded { requested, available: bundle.order() });
    }
    Ok(())
}

/// `⟨Φ†ₚ₁, XL Φₚ₂⟩ + [p₁=0]⟨XQ†, Φₚ₂⟩ + [p₂=0]⟨Φ†ₚ₁, XQ⟩`.
pub fn pair_bracket<T: Real>(x: &Triple<T>, bundle: &SeriesBundle<T>, p1: usize, p2: usize) -> Result<T> {
    check_order(bundle, p1.max(p2))?;
    Ok(raw_bracket(x, bundle.adjoint_flux.coeff(p1), bundle.flux.coeff(p2), p1 == 0, p2 == 0))
}

#[derive(Clone, Debug, PartialEq)]
pub struct BracketTable<T: Real> {
    entries: DMatrix<T>,
}

impl<T: Real> BracketTable<T> {
    pub fn order(&self) -> usize {
        self.entries.nrows() - 1
    }

    pub fn entry(&self, p1: usize, p2: usize) -> Result<T> {
        let available = self.order();
        if p1.max(p2) > available {
            return Err(Error::OrderExceeded { requested: p1.max(p2), available });
        }
        Ok(self.entries[(p1, p2)])
    }

    /// `⟨X⟩₀ₚ₊ₚ₀ = ⟨X⟩₀ₚ + ⟨X⟩ₚ₀`.
    pub fn sym(&self, p: usize) -> Result<T> {
        Ok(self.entry(0, p)? + self.entry(p, 0)?)
    }

    /// `Σ_{p₁+p₂=n} ⟨X⟩ₚ₁ₚ₂`.
    pub fn diagonal_sum(&self, n: usize) -> Result<T> {
        if n > 2 * self.order() {
            return Err(Error::OrderExceeded { requested: n, available: 2 * self.order() });
        }
        let lo = n.saturating_sub(self.order());
        Ok((lo..=n.min(self.order())).fold(T::zero(), |acc, p1| acc + self.entries[(p1, n - p1)]))
    }

    pub fn entries(&self) -> &DMatrix<T> {
        &self.entries
    }
}

/// The derived family at the reference point, `DT̲`.
fn reference_triple<T: Real>(d: Derivation, bundle: &SeriesBundle<T>) -> Triple<T> {
    let r = &bundle.reference;
    match d {
        Derivation::Control => r.control_derivative(),
        Derivation::Perturbation => r.pert_at_balance().clone(),
        Derivation::Identity => r.base[0].clone(),
    }
}

/// `⟨DT̲⟩ₚ₁ₚ₂` for `0 ≤ p₁, p₂ ≤ order`.
pub fn bracket_table<T: Real>(d: Derivation, bundle: &SeriesBundle<T>, order: usize) -> Result<BracketTable<T>> {
    check_order(bundle, order)?;
    let x = reference_triple(d, bundle);
    let mut entries = DMatrix::zeros(order + 1, order + 1);
    for p1 in 0..=order {
        for p2 in 0..=order {
            entries[(p1, p2)] = pair_bracket(&x, bundle, p1, p2)?;
        }
    }
    Ok(BracketTable { entries })
}

fn derivative_taylor<T: Field>(taylor: &[Triple<T>]) -> Vec<Triple<T>> {
    if taylor.len() <= 1 {
        return vec![Triple::zeros(taylor[0].dim())];
    }
    taylor.iter().enumerate().skip(1).map(|(k, c)| c * T::from_int(k as i64)).collect()
}

/// `⟨DT⟩ₙ` for `n = 0..=order`: the coefficients of `⟨DT₂⟩` along the
/// constrained path, with `DT₂ = F + εG`. Each order sums, over
/// `p₁ + p₂ ≤ n` and `k = n − p₁ − p₂`, the brackets of
/// `zₖF′ + zₖ₋₁G′ + Fₖ + Gₖ₋₁`.
pub fn bilinear_series<T: Real>(d: Derivation, bundle: &SeriesBundle<T>, order: usize) -> Result<ScalarSeries<T>> {
    check_order(bundle, order)?;
    let r = &bundle.reference;
    let (f, g) = match d {
        Derivation::Control => (derivative_taylor(&r.base), derivative_taylor(&r.pert)),
        Derivation::Perturbation => (r.pert.clone(), vec![Triple::zeros(r.dim())]),
        Derivation::Identity => (r.base.clone(), r.pert.clone()),
    };
    let zero = Triple::zeros(r.dim());
    let f1 = f.get(1).cloned().unwrap_or_else(|| zero.clone());
    let g1 = g.get(1).cloned().unwrap_or_else(|| zero.clone());
    let dev = bundle.z_deviation();
    let f_rem: Vec<Triple<T>> = (0..=order).map(|k| remainder_terms(&f, &dev, k)).collect();
    let g_rem: Vec<Triple<T>> = (0..=order).map(|k| remainder_terms(&g, &dev, k)).collect();

    let mut out = Vec::with_capacity(order + 1);
    for n in 0..=order {
        let mut total = T::zero();
        for p1 in 0..=n {
            for p2 in 0..=n - p1 {
                let k = n - p1 - p2;
                let mut x = f_rem[k].clone();
                x.axpy(dev.coeff(k), &f1);
                if k >= 1 {
                    x.axpy(T::one(), &g_rem[k - 1]);
                    x.axpy(dev.coeff(k - 1), &g1);
                }
                total += pair_bracket(&x, bundle, p1, p2)?;
            }
        }
        out.push(total);
    }
    Ok(ScalarSeries::new(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraint::normalize;
    use crate::family::{CombinedFamily, GaugeReference, PolyMatrix, PolyVector, SystemParams};
    use crate::series::perturbation_series;
    use crate::spectral::fundamental_eigenpair;
    use nalgebra::DVector;

    fn worked(pert_scale: f64) -> SeriesBundle<f64> {
        let m = |v: &[f64]| DMatrix::from_row_slice(2, 2, v);
        let base = SystemParams::new(
            PolyMatrix::new(2, vec![m(&[0.0, 0.0, 0.0, -1.0]), m(&[1.0, 1.0, 0.0, 0.0])]).unwrap(),
            PolyVector::constant(DVector::from_vec(vec![1.0, 0.0])),
            PolyVector::constant(DVector::from_vec(vec![2.0, 1.0])),
        )
        .unwrap();
        let pert = SystemParams::new(
            PolyMatrix::constant(m(&[0.0, 0.0, 1.0, 1.0]) * pert_scale),
            PolyVector::zeros(2),
            PolyVector::zeros(2),
        )
        .unwrap();
        let fam = CombinedFamily::new(base, pert).unwrap();
        let norm = normalize(&fam, GaugeReference::unit(), (-3.5, -0.5)).unwrap();
        let sd = fundamental_eigenpair(&norm.family.base.eval(0.0).l).unwrap();
        perturbation_series(&norm.family, &norm.reference, &sd, 6).unwrap()
    }

    #[test]
    fn reference_entry_is_the_differential() {
        let b = worked(1.0);
        let t = bracket_table(Derivation::Perturbation, &b, 3).unwrap();
        let r = &b.reference;
        let expect = r.adjoint_flux.dot(&(&r.pert_at_balance().l * &r.flux));
        assert!((t.entry(0, 0).unwrap() - expect).abs() < 1e-14);
        assert!((t.entry(1, 1).unwrap()).abs() < 1e-14);
        assert_eq!(t.sym(2).unwrap(), t.entry(0, 2).unwrap() + t.entry(2, 0).unwrap());
        assert_eq!(
            t.entry(4, 0).unwrap_err(),
            Error::OrderExceeded { requested: 4, available: 3 }
        );
        assert!(matches!(bracket_table(Derivation::Control, &b, 7), Err(Error::OrderExceeded { .. })));
    }

    #[test]
    fn zero_perturbation_gives_zero_table() {
        let b = worked(0.0);
        let t = bracket_table(Derivation::Perturbation, &b, 4).unwrap();
        assert_eq!(t.entries().amax(), 0.0);
        let s = bilinear_series(Derivation::Perturbation, &b, 4).unwrap();
        assert!(s.coeffs().iter().all(|&c| c == 0.0));
    }

    #[test]
    fn identity_series_is_the_constant_gauge() {
        let b = worked(1.0);
        let s = bilinear_series(Derivation::Identity, &b, 6).unwrap();
        assert!((s.coeff(0) - 1.0).abs() < 1e-13);
        for n in 1..=6 {
            assert!(s.coeff(n).abs() < 1e-13, "order {n}: {}", s.coeff(n));
        }
    }

    #[test]
    fn worked_perturbation_weights_are_geometric() {
        let b = worked(1.0);
        let s = bilinear_series(Derivation::Perturbation, &b, 6).unwrap();
        let t = bracket_table(Derivation::Perturbation, &b, 6).unwrap();
        for n in 0..=6 {
            let expect = -0.5 * 0.5f64.powi(n as i32);
            assert!((s.coeff(n) - expect).abs() < 1e-13, "order {n}");
            assert!((t.diagonal_sum(n).unwrap() - expect).abs() < 1e-13);
        }
    }
}
