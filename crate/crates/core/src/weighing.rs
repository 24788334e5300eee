//! Weights: the differential weight `⟨T′⟩`, the weight scale `Z₁` of the
//! exciting variable, the weighing functional `Z₂` measured along the
//! constrained path, and the recovery of weight coefficients from samples.
//!
//! All weights are expressed in units of the gauge reference `R₀`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::constraint::{balance, BalancePoint};
use crate::error::{Error, Result};
use crate::family::{CombinedFamily, GaugeReference, SystemParams, Triple};
use crate::linalg;
use crate::quadrature;
use crate::roots;
use crate::scalar::Real;
use crate::series::{
    bilinear_series, bracket_table, linear_control_series, perturbation_series, ratio_radius, Derivation,
    ScalarSeries, SeriesBundle,
};
use crate::spectral::{adjoint_flux, flux, fundamental_eigenpair, gauge_output, FluxPair};

/// Scan steps used to check that `z̲(ε)` is monotone before inverting it.
pub const MONOTONE_SCAN: usize = 16;
/// Default relative tolerance of the weighing quadrature.
pub const DEFAULT_QUAD_TOL: f64 = 1e-9;
/// Condition number above which recovery switches to a scaled basis.
pub const SCALED_BASIS_THRESHOLD: f64 = 1e10;

/// A constrained instrument: the two-variable family, the gauge reference
/// it is balanced against and the control bracket.
#[derive(Clone, Debug, PartialEq)]
pub struct Instrument<T: Real> {
    pub family: CombinedFamily<T>,
    pub r0: GaugeReference<T>,
    pub bracket: (T, T),
}

impl<T: Real> Instrument<T> {
    pub fn new(family: CombinedFamily<T>, r0: GaugeReference<T>, bracket: (T, T)) -> Self {
        Self { family, r0, bracket }
    }

    /// Balance at a given value of the exciting variable.
    pub fn balance_at(&self, eps: T) -> Result<BalancePoint<T>> {
        balance(&self.family.at_epsilon(eps), self.r0, self.bracket)
    }

    /// Perturbation series about the unperturbed balance, using the linear
    /// specialization when it applies.
    pub fn series(&self, order: usize) -> Result<SeriesBundle<T>> {
        let bp = self.balance_at(T::zero())?;
        let sd = fundamental_eigenpair(&self.family.base.eval(bp.z_bal).l)?;
        if self.family.is_linear_control() {
            linear_control_series(&self.family, &bp, &sd, order)
        } else {
            perturbation_series(&self.family, &bp, &sd, order)
        }
    }

    /// The same instrument with the control variable measured from the
    /// unperturbed balance.
    pub fn centered(&self) -> Result<(Self, T)> {
        let z0 = self.balance_at(T::zero())?.z_bal;
        let inst = Self {
            family: self.family.shifted(z0),
            r0: self.r0,
            bracket: (self.bracket.0 - z0, self.bracket.1 - z0),
        };
        Ok((inst, z0))
    }
}

impl From<&crate::problem::Problem> for Instrument<f64> {
    fn from(p: &crate::problem::Problem) -> Self {
        Self::new(p.family.clone(), p.r0, p.bracket)
    }
}

/// `dR(X) = ⟨Φ†, XL Φ⟩ + ⟨XQ†, Φ⟩ + ⟨Φ†, XQ⟩`.
fn dr<T: Real>(x: &Triple<T>, flux: &DVector<T>, adjoint_flux: &DVector<T>) -> T {
    adjoint_flux.dot(&(&x.l * flux)) + x.qdag.dot(flux) + adjoint_flux.dot(&x.q)
}

fn differential<T: Real>(x: &Triple<T>, fp: &FluxPair<T>) -> T {
    dr(x, &fp.flux, &fp.adjoint_flux)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DifferentialWeight<T> {
    /// `⟨T′⟩` from the adjoint bracket.
    pub bracket: T,
    /// Centered difference of the unconstrained `R∘T` at `z̲`.
    pub finite_difference: T,
}

/// `⟨T′⟩` at a balance point, by bracket and by finite difference of the
/// observable, in units of `R₀`.
pub fn differential_weight<T: Real>(
    params: &SystemParams<T>,
    r0: GaugeReference<T>,
    bp: &BalancePoint<T>,
) -> Result<DifferentialWeight<T>> {
    let z = bp.z_bal;
    let bracket = differential(&params.derivative().eval(z), &bp.flux_pair) / r0.value();
    let h = T::lit(1e-6) * T::one().max(z.abs());
    let r = |z: T| {
        let t = params.eval(z);
        gauge_output(&t.l, &t.q, &t.qdag)
    };
    let finite_difference = (r(z + h)? - r(z - h)?) / (h + h) / r0.value();
    if (bracket - finite_difference).abs() > T::lit(1e-6) * bracket.abs().max(finite_difference.abs()) {
        return Err(Error::ObservabilityMismatch {
            bracket: bracket.to_f64(),
            finite_difference: finite_difference.to_f64(),
        });
    }
    Ok(DifferentialWeight { bracket, finite_difference })
}

/// `Z₁(ε) = Σ ⟨δT⟩ₙ εⁿ⁺¹/(n+1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightScale<T: Real> {
    coeffs: ScalarSeries<T>,
}

impl<T: Real> WeightScale<T> {
    pub fn new(coeffs: Vec<T>) -> Self {
        Self { coeffs: ScalarSeries::new(coeffs) }
    }

    pub fn order(&self) -> usize {
        self.coeffs.order()
    }

    /// `⟨δT⟩ₙ`.
    pub fn coeffs(&self) -> &[T] {
        self.coeffs.coeffs()
    }

    pub fn eval(&self, eps: T) -> T {
        let mut acc = T::zero();
        for (n, &c) in self.coeffs().iter().enumerate().rev() {
            acc = acc * eps + c / T::lit((n + 1) as f64);
        }
        acc * eps
    }

    /// `dZ₁/dε`.
    pub fn derivative(&self, eps: T) -> T {
        self.coeffs.eval(eps)
    }

    pub fn radius(&self) -> Option<T> {
        ratio_radius(self.coeffs())
    }

    /// Truncation error estimate assuming a geometric tail with the ratio
    /// radius. Infinite outside the radius, zero when the tail vanishes.
    pub fn tail_bound(&self, eps: T) -> T {
        let n = self.order();
        let Some(radius) = self.radius() else { return T::zero() };
        let q = eps.abs() / radius;
        if q >= T::one() {
            return T::max_value().unwrap_or_else(T::one);
        }
        let last = self.coeffs()[n].abs();
        last * eps.abs().powi(n as i32 + 1) * q / (T::one() - q) / T::lit((n + 2) as f64)
    }
}

/// Weight coefficients `⟨δT⟩ₙ` for `n = 0..=order` from a bundle. When the
/// control is remote the diagonal-sum form is cross-checked.
pub fn weight_scale<T: Real>(bundle: &SeriesBundle<T>, order: usize) -> Result<WeightScale<T>> {
    let series = bilinear_series(Derivation::Perturbation, bundle, order)?;
    let gauge = bundle.reference.gauge;
    let coeffs: Vec<T> = series.coeffs().iter().map(|&c| c / gauge).collect();
    if bundle.reference.is_remote() && bundle.reference.is_linear_control() {
        let table = bracket_table(Derivation::Perturbation, bundle, order)?;
        for (n, &c) in coeffs.iter().enumerate() {
            let diag = table.diagonal_sum(n)? / gauge;
            let discrepancy = (diag - c).abs();
            if discrepancy > T::lit(1e-10) * T::one().max(c.abs()) {
                return Err(Error::DiagonalSumViolated { order: n, discrepancy: discrepancy.to_f64() });
            }
        }
    }
    Ok(WeightScale::new(coeffs))
}

fn path_error(e: Error) -> Error {
    match e {
        Error::CriticalityInBracket | Error::SingularOperator => Error::PathCrossesCriticality,
        other => other,
    }
}

/// `∂zR*(ε, z)/R₀` at an arbitrary point of the plane.
fn control_response<T: Real>(inst: &Instrument<T>, eps: T, z: T) -> Result<T> {
    let t = inst.family.eval(eps, z);
    let phi = flux(&t.l, &t.q).map_err(path_error)?;
    let phi_dag = adjoint_flux(&t.l, &t.qdag).map_err(path_error)?;
    Ok(dr(&inst.family.control_derivative().eval(eps, z), &phi, &phi_dag) / inst.r0.value())
}

/// `Z₂(z̲(ε)) − Z₂(z̲(0)) = ∫ ∂zR*(ε̲(z), z) dz / R₀` over the constrained
/// path, with `ε̲` the inverse of `z̲`.
pub fn weighing_integral<T: Real>(inst: &Instrument<T>, eps: T, quad_tol: T) -> Result<T> {
    if eps.is_zero() {
        return Ok(T::zero());
    }
    let z_start = inst.balance_at(T::zero()).map_err(path_error)?.z_bal;
    let z_end = inst.balance_at(eps).map_err(path_error)?.z_bal;
    let span = z_end - z_start;
    if span.abs() <= T::lit(16.0) * T::machine_epsilon() * T::one().max(z_start.abs()) {
        return Ok(T::zero());
    }

    let mut prev = z_start;
    for i in 1..=MONOTONE_SCAN {
        let e = eps * T::lit(i as f64 / MONOTONE_SCAN as f64);
        let z = if i == MONOTONE_SCAN { z_end } else { inst.balance_at(e).map_err(path_error)?.z_bal };
        if (z - prev) * span <= T::zero() {
            return Err(Error::InverseNotResolvable);
        }
        prev = z;
    }

    let r0 = inst.r0.value();
    let residual = |e: T, z: T| -> Result<T> {
        let t = inst.family.eval(e, z);
        Ok(gauge_output(&t.l, &t.q, &t.qdag)? - r0)
    };
    let mut last = (z_start, T::zero());
    let integrand = |z: T| -> Result<T> {
        let (z_prev, e_prev) = last;
        let warm = if (z - z_prev) * span >= T::zero() { e_prev } else { T::zero() };
        let e = match roots::brent(|e| residual(e, z), warm, eps, T::zero()) {
            Ok(e) => e,
            Err(_) => roots::brent(|e| residual(e, z), T::zero(), eps, T::zero())
                .map_err(|_| Error::InverseNotResolvable)?,
        };
        last = (z, e);
        control_response(inst, e, z)
    };
    Ok(quadrature::integrate(integrand, z_start, z_end, quad_tol)?.value)
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeighingSample<T> {
    pub eps: T,
    pub z_bal: T,
    pub r_residual: T,
    /// `Z₁(ε)` from the weight-scale series.
    pub z1_series: T,
    /// `Z₂(z̲(ε)) − Z₂(z̲(0))` by quadrature.
    pub z2_integral: T,
    /// `|Z₁ + ΔZ₂|`.
    pub balance_residual: T,
    pub tail_bound: T,
    /// `w₁ = ⟨δT⟩` at the constrained point.
    pub w1: T,
    /// `∂zR*·dz̲/dε`, which balances `−w₁`.
    pub w2_dz: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeighingReport<T: Real> {
    pub weight_scale: WeightScale<T>,
    /// Sorted by `ε`.
    pub samples: Vec<WeighingSample<T>>,
}

impl<T: Real> WeighingReport<T> {
    /// `(ε, −ΔZ₂)` pairs, the measured counterpart of `Z₁`.
    pub fn measured(&self) -> Vec<(T, T)> {
        self.samples.iter().map(|s| (s.eps, -s.z2_integral)).collect()
    }
}

fn sample<T: Real>(inst: &Instrument<T>, ws: &WeightScale<T>, eps: T, quad_tol: T) -> Result<WeighingSample<T>> {
    let bp = inst.balance_at(eps).map_err(path_error)?;
    let z = bp.z_bal;
    let z1_series = ws.eval(eps);
    let z2_integral = weighing_integral(inst, eps, quad_tol)?;
    let w1 = differential(&inst.family.pert.eval(z), &bp.flux_pair) / inst.r0.value();
    let h = T::lit(1e-6) * T::one().max(eps.abs());
    let dz = (inst.balance_at(eps + h).map_err(path_error)?.z_bal - inst.balance_at(eps - h).map_err(path_error)?.z_bal)
        / (h + h);
    let w2_dz = control_response(inst, eps, z)? * dz;
    Ok(WeighingSample {
        eps,
        z_bal: z,
        r_residual: bp.r_residual,
        z1_series,
        z2_integral,
        balance_residual: (z1_series + z2_integral).abs(),
        tail_bound: ws.tail_bound(eps),
        w1,
        w2_dz,
    })
}

/// Weight scale to `order`, then `Z₁`, `ΔZ₂` and the differential balance at
/// every grid point (computed in parallel).
pub fn balance_check<T: Real>(inst: &Instrument<T>, grid: &[T], order: usize, quad_tol: T) -> Result<WeighingReport<T>> {
    let bundle = inst.series(order)?;
    let ws = weight_scale(&bundle, order)?;
    let mut samples = grid
        .par_iter()
        .map(|&eps| sample(inst, &ws, eps, quad_tol))
        .collect::<Result<Vec<_>>>()?;
    samples.sort_by(|a, b| a.eps.partial_cmp(&b.eps).expect("finite grid"));
    Ok(WeighingReport { weight_scale: ws, samples })
}

/// Weight scale of the exchanged instrument, where `ε` is the control and
/// `z − z̲(0)` the exciting variable. Law invariance requires
/// `Z₁(T₂, ε) + Z₁(ET₂, z̲(ε) − z̲(0)) = 0`.
pub fn exchanged_weight_scale<T: Real>(inst: &Instrument<T>, order: usize) -> Result<WeightScale<T>> {
    let (centered, _) = inst.centered()?;
    let exchanged = centered.family.exchange()?;
    let bp = BalancePoint::at(&exchanged.base, inst.r0, T::zero())?;
    let sd = fundamental_eigenpair(&exchanged.base.eval(T::zero()).l)?;
    let bundle = linear_control_series(&exchanged, &bp, &sd, order)?;
    weight_scale(&bundle, order)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Recovery<T> {
    /// `⟨δT⟩₀..⟨δT⟩_N`.
    pub coeffs: Vec<T>,
    /// Condition number of the fit matrix actually solved.
    pub condition: T,
    /// Whether the `ε/max|ε|` basis replaced raw monomials.
    pub scaled_basis: bool,
    /// Root-mean-square fit residual.
    pub residual: T,
}

impl<T: Copy> Recovery<T> {
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `⟨δT⟩ₙ`, absent beyond the fitted order.
    pub fn get(&self, n: usize) -> Option<T> {
        self.coeffs.get(n).copied()
    }
}

fn fit_matrix<T: Real>(eps: &[T], order: usize, scale: T) -> DMatrix<T> {
    DMatrix::from_fn(eps.len(), order + 1, |i, j| (eps[i] / scale).powi(j as i32 + 1))
}

/// Fits `Z₁(ε) = Σ cⱼ εʲ⁺¹` (degree `N + 1`, zero constant term) to samples
/// and returns `⟨δT⟩ⱼ = (j+1)cⱼ`. Samples at `ε = 0` carry no information
/// and are dropped.
pub fn recover_coefficients<T: Real>(samples: &[(T, T)], order: usize) -> Result<Recovery<T>> {
    let kept: Vec<(T, T)> = samples.iter().copied().filter(|(e, _)| !e.is_zero()).collect();
    let mut sorted: Vec<T> = kept.iter().map(|s| s.0).collect();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::RankDeficientSamples);
    }
    if kept.len() < order + 1 {
        return Err(Error::InsufficientSamples);
    }
    let eps: Vec<T> = kept.iter().map(|s| s.0).collect();
    let values = DVector::from_iterator(kept.len(), kept.iter().map(|s| s.1));

    let raw = linalg::least_squares(&fit_matrix(&eps, order, T::one()), &values);
    let scaled_basis = raw.as_ref().is_none_or(|(_, c)| *c > T::lit(SCALED_BASIS_THRESHOLD));
    let scale = if scaled_basis { eps.iter().fold(T::zero(), |m, e| m.max(e.abs())) } else { T::one() };
    let (x, condition) = match raw {
        Some(fit) if !scaled_basis => fit,
        _ => linalg::least_squares(&fit_matrix(&eps, order, scale), &values).ok_or(Error::RankDeficientSamples)?,
    };
    let fitted = fit_matrix(&eps, order, scale) * &x;
    let residual = ((fitted - &values).norm_squared() / T::lit(kept.len() as f64)).sqrt();
    let coeffs = (0..=order)
        .map(|j| x[j] * T::lit((j + 1) as f64) / scale.powi(j as i32 + 1))
        .collect();
    Ok(Recovery { coeffs, condition, scaled_basis, residual })
}

/// Adds i.i.d. uniform noise in `[−amplitude, amplitude]` to the sample
/// values, reproducibly from `seed`.
pub fn with_uniform_noise<T: Real>(samples: &[(T, T)], amplitude: f64, seed: u64) -> Vec<(T, T)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    samples
        .iter()
        .map(|&(e, v)| {
            let noise = if amplitude > 0.0 { rng.gen_range(-amplitude..=amplitude) } else { 0.0 };
            (e, v + T::lit(noise))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct RealizationSample<T> {
    pub eps: T,
    pub z_ideal: T,
    pub z_real: T,
    pub z2_ideal: T,
    pub z2_real: T,
    /// `ΔZ₂(real) − ΔZ₂(ideal)`.
    pub discrepancy: T,
}

/// Weighing the same exciting variable with two realizations of the
/// instrument, processed identically.
pub fn realization_error<T: Real>(
    ideal: &Instrument<T>,
    real: &Instrument<T>,
    grid: &[T],
    quad_tol: T,
) -> Result<Vec<RealizationSample<T>>> {
    let mut out = grid
        .par_iter()
        .map(|&eps| {
            let z_ideal = ideal.balance_at(eps).map_err(path_error)?.z_bal;
            let z_real = real.balance_at(eps).map_err(path_error)?.z_bal;
            let z2_ideal = weighing_integral(ideal, eps, quad_tol)?;
            let z2_real = weighing_integral(real, eps, quad_tol)?;
            Ok(RealizationSample { eps, z_ideal, z_real, z2_ideal, z2_real, discrepancy: z2_real - z2_ideal })
        })
        .collect::<Result<Vec<_>>>()?;
    out.sort_by(|a, b| a.eps.partial_cmp(&b.eps).expect("finite grid"));
    Ok(out)
}
