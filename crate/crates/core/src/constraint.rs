//! Enforcing the gauge constraint `R(T(z̲)) = R₀` by tuning the control
//! variable.

use crate::error::{Error, Result};
use crate::family::{CombinedFamily, GaugeReference, SystemParams};
use crate::linalg;
use crate::roots;
use crate::scalar::{Field, Real};
use crate::spectral::{self, FluxPair};

/// Number of probe points used to check the bracket before refinement.
pub const SCAN_POINTS: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub struct BalancePoint<T: Real> {
    pub z_bal: T,
    /// `|R(T(z̲)) − R₀| / |R₀|`.
    pub r_residual: T,
    pub flux_pair: FluxPair<T>,
}

impl<T: Real> BalancePoint<T> {
    /// The state at a control value known to balance (no root finding).
    pub fn at(params: &SystemParams<T>, r0: GaugeReference<T>, z: T) -> Result<Self> {
        let flux_pair = FluxPair::solve(&params.eval(z))?;
        let r_residual = ((flux_pair.gauge - r0.value()) / r0.value()).abs();
        Ok(Self { z_bal: z, r_residual, flux_pair })
    }
}

fn gauge_at<T: Real>(params: &SystemParams<T>, z: T) -> Result<T> {
    let t = params.eval(z);
    spectral::gauge_output(&t.l, &t.q, &t.qdag)
}

/// Solves `R(T(z)) = R₀` for `z` inside `bracket`.
///
/// The bracket is probed on [`SCAN_POINTS`] equispaced points: a vanishing
/// or sign-changing `det L` means a pole of `R` (criticality) inside, and
/// more than one sign change of `R − R₀` means the root is not unique.
pub fn balance<T: Real>(params: &SystemParams<T>, r0: GaugeReference<T>, bracket: (T, T)) -> Result<BalancePoint<T>> {
    let (lo, hi) = if bracket.0 <= bracket.1 { bracket } else { (bracket.1, bracket.0) };
    let r0v = r0.value();
    let step = (hi - lo) / T::lit((SCAN_POINTS - 1) as f64);
    let mut nodes = Vec::with_capacity(SCAN_POINTS);
    let mut det_prev = 0i8;
    for i in 0..SCAN_POINTS {
        let z = if i + 1 == SCAN_POINTS { hi } else { lo + step * T::lit(i as f64) };
        let det = linalg::det_sign(&params.l.eval(z));
        if det == 0 || (i > 0 && det != det_prev) {
            return Err(Error::CriticalityInBracket);
        }
        det_prev = det;
        let g = gauge_at(params, z).map_err(|_| Error::CriticalityInBracket)? - r0v;
        nodes.push((z, g));
    }

    let mut root_interval = None;
    let mut changes = 0;
    for w in nodes.windows(2) {
        let ((za, ga), (zb, gb)) = (w[0], w[1]);
        if ga.is_zero() {
            changes += 1;
            root_interval = Some((za, za));
        } else if !gb.is_zero() && (ga > T::zero()) != (gb > T::zero()) {
            changes += 1;
            root_interval = Some((za, zb));
        }
    }
    if let Some(&(z, g)) = nodes.last() {
        if g.is_zero() {
            changes += 1;
            root_interval = Some((z, z));
        }
    }
    let (a, b) = match (changes, root_interval) {
        (0, _) | (_, None) => return Err(Error::NoSignChange),
        (1, Some(iv)) => iv,
        _ => return Err(Error::NonUniqueRoot),
    };
    let z_bal = if a == b {
        a
    } else {
        roots::brent(|z| Ok(gauge_at(params, z)? - r0v), a, b, T::zero())?
    };
    BalancePoint::at(params, r0, z_bal)
}

/// Value of a control-dependent quantity at the balancing point.
pub fn constrained_value<T: Real, V>(f: impl FnOnce(T) -> V, bp: &BalancePoint<T>) -> V {
    f(bp.z_bal)
}

/// Gauge transform `(Q†, R₀) ↦ (αQ†, αR₀)`.
pub fn gauge_rescale<T: Field>(
    params: &SystemParams<T>,
    r0: GaugeReference<T>,
    alpha: T,
) -> Result<(SystemParams<T>, GaugeReference<T>)> {
    if alpha.is_zero() {
        return Err(Error::ZeroGaugeFactor);
    }
    Ok((params.with_qdag_scaled(alpha), GaugeReference::new(r0.value() * alpha)?))
}

/// [`gauge_rescale`] applied to both partial families of `T₂`.
pub fn gauge_rescale_family<T: Field>(
    family: &CombinedFamily<T>,
    r0: GaugeReference<T>,
    alpha: T,
) -> Result<(CombinedFamily<T>, GaugeReference<T>)> {
    if alpha.is_zero() {
        return Err(Error::ZeroGaugeFactor);
    }
    Ok((family.with_qdag_scaled(alpha), GaugeReference::new(r0.value() * alpha)?))
}

/// A problem brought to the working convention: `R₀ = 1` and the control
/// variable shifted so that the unperturbed balance sits at `z = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Normalized<T: Real> {
    pub family: CombinedFamily<T>,
    /// Bracket in the shifted variable.
    pub bracket: (T, T),
    /// Original control value of the unperturbed balance.
    pub shift: T,
    /// Factor applied to `Q†` (`1/R₀`).
    pub gauge_factor: T,
    /// Unperturbed balance in the shifted variable.
    pub reference: BalancePoint<T>,
}

impl<T: Real> Normalized<T> {
    /// Unit gauge reference of the normalized problem.
    pub fn r0(&self) -> GaugeReference<T> {
        GaugeReference::unit()
    }
}

pub fn normalize<T: Real>(family: &CombinedFamily<T>, r0: GaugeReference<T>, bracket: (T, T)) -> Result<Normalized<T>> {
    let gauge_factor = T::one() / r0.value();
    let (scaled, unit) = gauge_rescale_family(family, r0, gauge_factor)?;
    let shift = balance(&scaled.base, unit, bracket)?.z_bal;
    let family = scaled.shifted(shift);
    let bracket = (bracket.0 - shift, bracket.1 - shift);
    let reference = BalancePoint::at(&family.base, unit, T::zero())?;
    Ok(Normalized { family, bracket, shift, gauge_factor, reference })
}
