//! Order-by-order construction of `z̲ₙ`, `Φ̲ₙ` and `Φ̲†ₙ`.
//!
//! At order `n` the known terms are collected into three sums over the same
//! index set: the plain brackets `⟨X⟩₀ₚ`, the harmonic brackets `⟨X̃⟩₀ₚ` and
//! the projected vectors `π̃(XL Φₚ + [p=0] XQ)`. The control coefficient
//! follows from the plain sum, the harmonic flux from a bordered solve and
//! the fundamental amplitude from the harmonic brackets.
//!
//! The adjoint coefficients come from the same recursion run on the dual
//! system `(Lᵀ, Q†, Q)`, whose control coefficients must coincide with the
//! direct ones.

use nalgebra::DVector;

use super::compose::remainder_terms;
use super::{ratio_radius, ScalarSeries, VectorSeries};
use crate::constraint::BalancePoint;
use crate::error::{Error, Result};
use crate::family::{CombinedFamily, Triple};
use crate::scalar::Real;
use crate::spectral::{harmonic_solve, SpectralData};

/// Quantities at the balanced reference point. `pert` holds the Taylor
/// coefficients of `δT` at `z̲` (the perturbation evaluated at balance),
/// which is distinct from any series coefficient of the constrained
/// perturbation.
#[derive(Clone, Debug, PartialEq)]
pub struct Reference<T: Real> {
    pub z_bal: T,
    pub gauge: T,
    /// Taylor coefficients of `T` at `z̲`.
    pub base: Vec<Triple<T>>,
    /// Taylor coefficients of `δT` at `z̲`.
    pub pert: Vec<Triple<T>>,
    pub spectral: SpectralData<T>,
    pub flux: DVector<T>,
    pub adjoint_flux: DVector<T>,
    /// `⟨T′⟩`.
    pub differential_weight: T,
}

fn coeff_or_zero<T: Real>(v: &[Triple<T>], k: usize) -> Triple<T> {
    v.get(k).cloned().unwrap_or_else(|| Triple::zeros(v[0].dim()))
}

/// `⟨Φ†ₐ, XL Φᵦ⟩ + [a=0]⟨XQ†, Φᵦ⟩ + [b=0]⟨Φ†ₐ, XQ⟩`.
pub(crate) fn raw_bracket<T: Real>(
    x: &Triple<T>,
    adj: &DVector<T>,
    flux: &DVector<T>,
    adj_is_reference: bool,
    flux_is_reference: bool,
) -> T {
    let mut v = adj.dot(&(&x.l * flux));
    if adj_is_reference {
        v += x.qdag.dot(flux);
    }
    if flux_is_reference {
        v += adj.dot(&x.q);
    }
    v
}

impl<T: Real> Reference<T> {
    pub fn new(family: &CombinedFamily<T>, bp: &BalancePoint<T>, sd: &SpectralData<T>) -> Self {
        let base = family.base.taylor_at(bp.z_bal);
        let pert = family.pert.taylor_at(bp.z_bal);
        let flux = bp.flux_pair.flux.clone();
        let adjoint_flux = bp.flux_pair.adjoint_flux.clone();
        let tp = coeff_or_zero(&base, 1);
        let differential_weight = raw_bracket(&tp, &adjoint_flux, &flux, true, true);
        Self {
            z_bal: bp.z_bal,
            gauge: bp.flux_pair.gauge,
            base,
            pert,
            spectral: sd.clone(),
            flux,
            adjoint_flux,
            differential_weight,
        }
    }

    pub fn dim(&self) -> usize {
        self.flux.nrows()
    }

    /// `T̲′`.
    pub fn control_derivative(&self) -> Triple<T> {
        coeff_or_zero(&self.base, 1)
    }

    /// `δT(z̲)`.
    pub fn pert_at_balance(&self) -> &Triple<T> {
        &self.pert[0]
    }

    /// `δT′(z̲)`.
    pub fn pert_derivative(&self) -> Triple<T> {
        coeff_or_zero(&self.pert, 1)
    }

    pub fn is_linear_control(&self) -> bool {
        self.base.len() <= 2 && self.pert.len() <= 2
    }

    pub fn is_remote(&self) -> bool {
        self.pert.len() <= 1
    }

    pub fn has_unexcited_sources(&self) -> bool {
        self.pert.iter().all(|c| c.q.iter().chain(c.qdag.iter()).all(|x| x.is_zero()))
    }

    /// Scale against which `⟨T′⟩` is declared zero.
    fn weight_scale(&self) -> T {
        let tp = self.control_derivative();
        self.adjoint_flux.norm() * (tp.l.norm() * self.flux.norm() + tp.q.norm()) + tp.qdag.norm() * self.flux.norm()
    }

    fn dual(&self) -> Self {
        Self {
            z_bal: self.z_bal,
            gauge: self.gauge,
            base: self.base.iter().map(Triple::dual).collect(),
            pert: self.pert.iter().map(Triple::dual).collect(),
            spectral: self.spectral.dual(),
            flux: self.adjoint_flux.clone(),
            adjoint_flux: self.flux.clone(),
            differential_weight: self.differential_weight,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeriesBundle<T: Real> {
    /// `z̲ₙ`; coefficient 0 is the balanced control value itself.
    pub z: ScalarSeries<T>,
    pub flux: VectorSeries<T>,
    pub adjoint_flux: VectorSeries<T>,
    /// Control coefficients produced by the dual recursion.
    pub adjoint_z: ScalarSeries<T>,
    pub reference: Reference<T>,
}

impl<T: Real> SeriesBundle<T> {
    pub fn order(&self) -> usize {
        self.z.order()
    }

    /// `z̲(ε) − z̲(0)` as a series.
    pub fn z_deviation(&self) -> ScalarSeries<T> {
        let mut c = self.z.coeffs().to_vec();
        c[0] = T::zero();
        ScalarSeries::new(c)
    }

    /// Ratio-test radius estimate of the control response.
    pub fn radius(&self) -> Option<T> {
        ratio_radius(self.z.coeffs())
    }
}

struct Sums<T: Real> {
    plain: T,
    tilde: T,
    fundamental: T,
    act: DVector<T>,
}

impl<T: Real> Sums<T> {
    fn zeros(dim: usize) -> Self {
        Self { plain: T::zero(), tilde: T::zero(), fundamental: T::zero(), act: DVector::zeros(dim) }
    }
}

struct Runner<'a, T: Real> {
    r: &'a Reference<T>,
    adj_tilde: DVector<T>,
    fluxes: Vec<DVector<T>>,
}

impl<T: Real> Runner<'_, T> {
    fn add(&self, s: &mut Sums<T>, coef: T, x: &Triple<T>, p: usize) {
        if coef.is_zero() {
            return;
        }
        let phi_p = &self.fluxes[p];
        let mut a = &x.l * phi_p;
        if p == 0 {
            a += &x.q;
        }
        let source = x.qdag.dot(phi_p);
        s.plain += coef * (self.r.adjoint_flux.dot(&a) + source);
        s.tilde += coef * (self.adj_tilde.dot(&a) + source);
        s.fundamental += coef * self.r.spectral.fundamental_amplitude(&a);
        s.act += self.r.spectral.project_harmonic(&a) * coef;
    }
}

/// How the fundamental amplitude of each order is obtained.
#[derive(Clone, Copy, PartialEq)]
enum Amplitude {
    /// From the constraint, dividing by `⟨Q†, φ⟩`; an error when it vanishes.
    Constraint,
    /// From the constraint when `⟨Q†, φ⟩` is usable, otherwise from the
    /// fundamental component of the flux equation, dividing by `σ`.
    ConstraintOrSpectral,
}

fn run<T: Real>(
    r: &Reference<T>,
    order: usize,
    linear: bool,
    mode: Amplitude,
) -> Result<(Vec<T>, Vec<DVector<T>>)> {
    let sd = &r.spectral;
    let dim = r.dim();
    let l = &r.base[0].l;
    let tp = r.control_derivative();
    let dtp = r.pert_derivative();
    let dt0 = r.pert_at_balance().clone();

    let scale = r.weight_scale();
    let w = raw_bracket(&tp, &r.adjoint_flux, &r.flux, true, true);
    if !(w.abs() > T::lit(1e-12) * scale) {
        return Err(Error::ZeroDifferentialWeight);
    }
    let mut runner = Runner {
        r,
        adj_tilde: sd.project_harmonic_adjoint(&r.adjoint_flux),
        fluxes: vec![r.flux.clone()],
    };
    let mut z = vec![T::zero(); order + 1];
    if order == 0 {
        return Ok((z, runner.fluxes));
    }
    let qphi = r.base[0].qdag.dot(&sd.phi);
    let coupled = qphi.abs() > T::lit(1e-12) * r.base[0].qdag.norm() * sd.phi.norm();
    let spectral = sd.sigma.abs() > T::lit(1e-12) * l.norm();
    if !coupled && (mode == Amplitude::Constraint || !spectral) {
        return Err(Error::ZeroFundamentalCoupling);
    }

    let mut unit = Sums::zeros(dim);
    runner.add(&mut unit, T::one(), &tp, 0);
    let (wt, wf, u) = (unit.tilde, unit.fundamental, unit.act);

    let zero = Triple::zeros(dim);
    // rem_t[k] = Tₖ, rem_dt[k] = δTₖ.
    let mut rem_t: Vec<Triple<T>> = vec![r.base[0].clone(), zero.clone()];
    let mut rem_dt: Vec<Triple<T>> = vec![dt0.clone()];

    for n in 1..=order {
        let mut s = Sums::zeros(dim);
        runner.add(&mut s, z[n - 1], &dtp, 0);
        if linear {
            if n == 1 {
                runner.add(&mut s, T::one(), &dt0, 0);
            } else {
                runner.add(&mut s, T::one(), &dt0, n - 1);
            }
            for p in 1..n {
                runner.add(&mut s, z[n - p], &tp, p);
                runner.add(&mut s, z[n - p - 1], &dtp, p);
            }
        } else {
            let zs = ScalarSeries::new(z[..n].to_vec());
            if n >= 2 {
                rem_t.push(remainder_terms(&r.base, &zs, n));
                rem_dt.push(if n == 2 { zero.clone() } else { remainder_terms(&r.pert, &zs, n - 1) });
            }
            let mut x = rem_t[n].clone();
            x.axpy(T::one(), &rem_dt[n - 1]);
            runner.add(&mut s, T::one(), &x, 0);
            for p in 1..n {
                runner.add(&mut s, z[n - p], &tp, p);
                runner.add(&mut s, z[n - p - 1], &dtp, p);
                let mut x = rem_t[n - p].clone();
                x.axpy(T::one(), &rem_dt[n - p - 1]);
                runner.add(&mut s, T::one(), &x, p);
            }
        }
        let zn = -s.plain / w;
        let g = &u * zn + &s.act;
        let h = s.tilde + zn * wt;
        let harmonic = harmonic_solve(l, sd, &(-g))?;
        let amplitude = if coupled { -h / qphi } else { -(s.fundamental + zn * wf) / sd.sigma };
        z[n] = zn;
        runner.fluxes.push(&sd.phi * amplitude + harmonic);
    }
    Ok((z, runner.fluxes))
}

fn assemble<T: Real>(r: Reference<T>, order: usize, linear: bool) -> Result<SeriesBundle<T>> {
    let (z, flux) = run(&r, order, linear, Amplitude::Constraint)?;
    let (adjoint_z, adjoint_flux) = run(&r.dual(), order, linear, Amplitude::ConstraintOrSpectral)?;
    let mut z = z;
    z[0] = r.z_bal;
    let mut adjoint_z = adjoint_z;
    adjoint_z[0] = r.z_bal;
    Ok(SeriesBundle {
        z: ScalarSeries::new(z),
        flux: VectorSeries::new(flux),
        adjoint_flux: VectorSeries::new(adjoint_flux),
        adjoint_z: ScalarSeries::new(adjoint_z),
        reference: r,
    })
}

/// General recursion, valid for any polynomial control dependence.
pub fn perturbation_series<T: Real>(
    family: &CombinedFamily<T>,
    bp: &BalancePoint<T>,
    sd: &SpectralData<T>,
    order: usize,
) -> Result<SeriesBundle<T>> {
    assemble(Reference::new(family, bp, sd), order, false)
}

/// The recursion specialized to `T″ = δT″ = 0`, where all composition
/// remainders vanish.
pub fn linear_control_series<T: Real>(
    family: &CombinedFamily<T>,
    bp: &BalancePoint<T>,
    sd: &SpectralData<T>,
    order: usize,
) -> Result<SeriesBundle<T>> {
    if !family.is_linear_control() {
        return Err(Error::ControlNotLinear);
    }
    assemble(Reference::new(family, bp, sd), order, true)
}
