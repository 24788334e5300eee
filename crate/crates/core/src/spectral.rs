//! Fundamental / harmonic split of the flux-to-source operator.

use nalgebra::{Complex, DMatrix, DVector, Schur};

use crate::error::{Error, Result};
use crate::family::Triple;
use crate::linalg;
use crate::scalar::Real;

/// Fundamental eigenpair of `L` and the spectral separation estimate.
///
/// `gap` is the smallest modulus among the remaining eigenvalues (infinite
/// for a 1×1 operator), a computable stand-in for the harmonic lower bound.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralData<T: Real> {
    pub sigma: T,
    pub phi: DVector<T>,
    pub phi_dag: DVector<T>,
    pub gap: T,
}

impl<T: Real> SpectralData<T> {
    /// `⟨φ†, v⟩`.
    pub fn fundamental_amplitude(&self, v: &DVector<T>) -> T {
        self.phi_dag.dot(v)
    }

    /// `π̃v = v − φ⟨φ†, v⟩`.
    pub fn project_harmonic(&self, v: &DVector<T>) -> DVector<T> {
        v - &self.phi * self.phi_dag.dot(v)
    }

    /// `π̃†v = v − φ†⟨φ, v⟩`.
    pub fn project_harmonic_adjoint(&self, v: &DVector<T>) -> DVector<T> {
        v - &self.phi_dag * self.phi.dot(v)
    }

    /// Spectral data of `Lᵀ`: the roles of `φ` and `φ†` are swapped.
    pub fn dual(&self) -> Self {
        Self {
            sigma: self.sigma,
            phi: self.phi_dag.clone(),
            phi_dag: self.phi.clone(),
            gap: self.gap,
        }
    }
}

fn modulus<T: Real>(c: &Complex<T>) -> T {
    c.re.hypot(c.im)
}

/// Right singular vector of the smallest singular value.
fn null_vector<T: Real>(m: DMatrix<T>) -> Result<DVector<T>> {
    let svd = m.svd(false, true);
    let k = svd.singular_values.imin();
    let v_t = svd.v_t.as_ref().ok_or(Error::EigenNotConverged)?;
    Ok(v_t.row(k).transpose())
}

pub fn fundamental_eigenpair<T: Real>(l: &DMatrix<T>) -> Result<SpectralData<T>> {
    let n = l.nrows();
    if n == 0 || l.ncols() != n {
        return Err(Error::DimensionMismatch("operator must be square and non-empty".into()));
    }
    if n == 1 {
        return Ok(SpectralData {
            sigma: l[(0, 0)],
            phi: DVector::from_element(1, T::one()),
            phi_dag: DVector::from_element(1, T::one()),
            gap: T::max_value().unwrap_or_else(|| T::lit(f64::INFINITY)),
        });
    }
    let scale = l.norm().max(T::min_value().unwrap_or_else(T::zero));
    let schur = Schur::try_new(l.clone(), T::machine_epsilon(), 10_000).ok_or(Error::EigenNotConverged)?;
    let mut eig: Vec<_> = schur.complex_eigenvalues().iter().cloned().collect();
    eig.sort_by(|a, b| modulus(a).partial_cmp(&modulus(b)).unwrap_or(std::cmp::Ordering::Equal));

    let imag_tol = T::lit(1e-10) * scale.max(T::one());
    if eig[0].im.abs() > imag_tol {
        return Err(Error::ComplexFundamental);
    }
    let split = modulus(&(eig[1] - eig[0]));
    if split < T::lit(1e-8) * modulus(&eig[1]) || modulus(&eig[1]) <= T::machine_epsilon() * scale {
        return Err(Error::DegenerateFundamental);
    }
    let gap = modulus(&eig[1]);

    let shifted = l - DMatrix::identity(n, n) * eig[0].re;
    let mut phi = null_vector(shifted.clone())?;
    let mut phi_dag = null_vector(shifted.transpose())?;

    if phi[phi.iamax()] < T::zero() {
        phi = -phi;
    }
    let overlap = phi_dag.dot(&phi);
    if overlap.abs() < T::lit(1e-10) * phi.norm() * phi_dag.norm() {
        return Err(Error::BiorthogonalityBreakdown);
    }
    phi_dag /= overlap;
    let sigma = phi_dag.dot(&(l * &phi));
    Ok(SpectralData { sigma, phi, phi_dag, gap })
}

/// Harmonic solve: `x̃ ∈ φ†⊥` with `L̃x̃ = π̃b`, through the bordered system
/// `[[L, φ], [φ†ᵀ, 0]]`.
pub fn harmonic_solve<T: Real>(l: &DMatrix<T>, sd: &SpectralData<T>, b: &DVector<T>) -> Result<DVector<T>> {
    let n = l.nrows();
    let mut m = DMatrix::zeros(n + 1, n + 1);
    m.view_mut((0, 0), (n, n)).copy_from(l);
    m.view_mut((0, n), (n, 1)).copy_from(&sd.phi);
    m.view_mut((n, 0), (1, n)).copy_from(&sd.phi_dag.transpose());
    let mut rhs = DVector::zeros(n + 1);
    rhs.rows_mut(0, n).copy_from(&sd.project_harmonic(b));
    let sol = linalg::solve(&m, &rhs).ok_or(Error::SingularBordered)?;
    Ok(sol.rows(0, n).into_owned())
}

/// Adjoint harmonic solve with `Lᵀ` and the adjoint projector.
pub fn harmonic_solve_adjoint<T: Real>(l: &DMatrix<T>, sd: &SpectralData<T>, b: &DVector<T>) -> Result<DVector<T>> {
    harmonic_solve(&l.transpose(), &sd.dual(), b)
}

/// `Φ = −L⁻¹Q`.
pub fn flux<T: Real>(l: &DMatrix<T>, q: &DVector<T>) -> Result<DVector<T>> {
    linalg::solve(l, q).map(|x| -x).ok_or(Error::SingularOperator)
}

/// `Φ† = −L⁻ᵀQ†`.
pub fn adjoint_flux<T: Real>(l: &DMatrix<T>, qdag: &DVector<T>) -> Result<DVector<T>> {
    flux(&l.transpose(), qdag)
}

/// `R = ⟨Q†, Φ⟩`.
pub fn gauge_output<T: Real>(l: &DMatrix<T>, q: &DVector<T>, qdag: &DVector<T>) -> Result<T> {
    Ok(qdag.dot(&flux(l, q)?))
}

/// Direct and adjoint fluxes at one point, with the gauge output.
#[derive(Clone, Debug, PartialEq)]
pub struct FluxPair<T: Real> {
    pub flux: DVector<T>,
    pub adjoint_flux: DVector<T>,
    pub gauge: T,
    /// `ω = ⟨Q†, Φ̃⟩ / ⟨Q†, Φ⟩`, `None` when no fundamental eigenpair exists.
    pub harmonicity: Option<T>,
    /// `⟨Φ̃†, Q⟩ / ⟨Φ†, Q⟩`, the same quantity computed adjointly.
    pub adjoint_harmonicity: Option<T>,
}

impl<T: Real> FluxPair<T> {
    pub fn solve(t: &Triple<T>) -> Result<Self> {
        let flux = flux(&t.l, &t.q)?;
        let adjoint_flux = adjoint_flux(&t.l, &t.qdag)?;
        let gauge = t.qdag.dot(&flux);
        let (harmonicity, adjoint_harmonicity) = match fundamental_eigenpair(&t.l) {
            Ok(sd) => (
                Some(t.qdag.dot(&sd.project_harmonic(&flux)) / gauge),
                Some(sd.project_harmonic_adjoint(&adjoint_flux).dot(&t.q) / adjoint_flux.dot(&t.q)),
            ),
            Err(_) => (None, None),
        };
        Ok(Self { flux, adjoint_flux, gauge, harmonicity, adjoint_harmonicity })
    }

    /// `R† = ⟨Φ†, Q⟩`, equal to `gauge` by reciprocity.
    pub fn adjoint_gauge(&self, q: &DVector<T>) -> T {
        self.adjoint_flux.dot(q)
    }
}

/// The flux split into its fundamental and harmonic parts.
#[derive(Clone, Debug, PartialEq)]
pub struct FluxDecomposition<T: Real> {
    /// `⟨φ†, Φ⟩ = −⟨φ†, Q⟩/σ`.
    pub amplitude: T,
    /// `Φ̃ = −L̃⁻¹Q̃`.
    pub harmonic: DVector<T>,
    pub gauge: T,
    pub omega: T,
    /// `σ` recovered from the gauge output and `ω`.
    pub sigma_from_gauge: T,
    /// `Φ` rebuilt from `R`, `ω` and `Φ̃`.
    pub recomposed: DVector<T>,
}

pub fn decompose_flux<T: Real>(t: &Triple<T>, sd: &SpectralData<T>) -> Result<FluxDecomposition<T>> {
    let coupling = sd.fundamental_amplitude(&t.q);
    let scale = t.q.norm() * sd.phi_dag.norm();
    let tiny = T::lit(1e-12);
    if coupling.abs() <= tiny * scale && sd.sigma.abs() <= tiny * t.l.norm() {
        return Err(Error::ZeroFundamentalCoupling);
    }
    let phi_flux = flux(&t.l, &t.q)?;
    let gauge = t.qdag.dot(&phi_flux);
    let amplitude = -coupling / sd.sigma;
    let harmonic = harmonic_solve(&t.l, sd, &(-&t.q))?;
    let omega = t.qdag.dot(&harmonic) / gauge;
    let qphi = t.qdag.dot(&sd.phi);
    let sigma_from_gauge = -qphi * coupling / (gauge * (T::one() - omega));
    let recomposed = if qphi.is_zero() {
        &sd.phi * amplitude + &harmonic
    } else {
        &sd.phi * (gauge * (T::one() - omega) / qphi) + &harmonic
    };
    Ok(FluxDecomposition { amplitude, harmonic, gauge, omega, sigma_from_gauge, recomposed })
}

/// Per-point critical-limit diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct CriticalityReport<T: Real> {
    pub sigma: T,
    pub gap: T,
    /// `|σ| / gap`; small means near-critical with good separation.
    pub separation: T,
    pub omega: T,
    /// `⟨φ†, Q⟩`.
    pub source_coupling: T,
    /// `⟨Q†, φ⟩`.
    pub gauge_coupling: T,
}

pub fn criticality_report<T: Real>(t: &Triple<T>) -> Result<CriticalityReport<T>> {
    let sd = fundamental_eigenpair(&t.l)?;
    let dec = decompose_flux(t, &sd)?;
    Ok(CriticalityReport {
        sigma: sd.sigma,
        gap: sd.gap,
        separation: sd.sigma.abs() / sd.gap,
        omega: dec.omega,
        source_coupling: sd.fundamental_amplitude(&t.q),
        gauge_coupling: t.qdag.dot(&sd.phi),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn diag(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_row_slice(v))
    }

    #[test]
    fn diagonal_fundamental() {
        let sd = fundamental_eigenpair(&diag(&[0.001, -1.0])).unwrap();
        assert_relative_eq!(sd.sigma, 0.001, epsilon = 1e-15);
        assert_relative_eq!(sd.phi, DVector::from_row_slice(&[1.0, 0.0]), epsilon = 1e-14);
        assert_relative_eq!(sd.phi_dag, DVector::from_row_slice(&[1.0, 0.0]), epsilon = 1e-14);
        assert_relative_eq!(sd.gap, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn worked_reference_operator() {
        let sd = fundamental_eigenpair(&diag(&[0.0, -1.0])).unwrap();
        assert_eq!(sd.sigma.abs(), 0.0);
        assert_relative_eq!(sd.phi[0], 1.0, epsilon = 1e-15);
        assert_relative_eq!(sd.gap, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn similarity_preserves_fundamental() {
        let s = DMatrix::from_row_slice(3, 3, &[1.0, 0.3, -0.2, 0.1, 1.2, 0.4, -0.3, 0.2, 0.9]);
        let l = &s * diag(&[0.01, -1.0, -2.0]) * s.clone().try_inverse().unwrap();
        let sd = fundamental_eigenpair(&l).unwrap();
        assert!((sd.sigma - 0.01).abs() < 1e-10);
        assert!((&l * &sd.phi - &sd.phi * sd.sigma).norm() < 1e-10 * l.norm());
        assert!((l.transpose() * &sd.phi_dag - &sd.phi_dag * sd.sigma).norm() < 1e-10 * l.norm() * sd.phi_dag.norm());
        assert_relative_eq!(sd.phi_dag.dot(&sd.phi), 1.0, epsilon = 1e-12);
        assert!(sd.sigma.abs() < sd.gap);
    }

    #[test]
    fn error_paths() {
        let rot = DMatrix::from_row_slice(3, 3, &[0.0, -0.1, 0.0, 0.1, 0.0, 0.0, 0.0, 0.0, -2.0]);
        assert_eq!(fundamental_eigenpair(&rot), Err(Error::ComplexFundamental));
        assert_eq!(fundamental_eigenpair(&diag(&[0.5, 0.5, -2.0])), Err(Error::DegenerateFundamental));
        // Jordan block: left and right eigenvectors are orthogonal.
        let jordan = DMatrix::from_row_slice(3, 3, &[1e-6, 1.0, 0.0, 0.0, 1e-6 + 1e-13, 0.0, 0.0, 0.0, -2.0]);
        assert_eq!(fundamental_eigenpair(&jordan), Err(Error::BiorthogonalityBreakdown));
    }

    #[test]
    fn projections() {
        let sd = fundamental_eigenpair(&diag(&[0.1, -1.0])).unwrap();
        assert!(sd.project_harmonic(&sd.phi).amax() < 1e-15);
        let e2 = DVector::from_row_slice(&[0.0, 1.0]);
        assert_relative_eq!(sd.project_harmonic(&e2), e2);
        let v = DVector::from_row_slice(&[0.3, -0.7]);
        let pv = sd.project_harmonic(&v);
        assert_relative_eq!(sd.project_harmonic(&pv), pv, epsilon = 1e-15);
        assert!(sd.phi_dag.dot(&pv).abs() < 1e-15);
    }

    #[test]
    fn harmonic_solves() {
        let l = diag(&[0.1, -1.0]);
        let sd = fundamental_eigenpair(&l).unwrap();
        assert!(harmonic_solve(&l, &sd, &sd.phi).unwrap().amax() < 1e-15);
        let e2 = DVector::from_row_slice(&[0.0, 1.0]);
        assert_relative_eq!(harmonic_solve(&l, &sd, &e2).unwrap(), -e2, epsilon = 1e-15);
    }

    #[test]
    fn fluxes_and_gauge() {
        let l = -DMatrix::<f64>::identity(2, 2);
        let q = DVector::from_row_slice(&[1.0, 0.0]);
        assert_relative_eq!(flux(&l, &q).unwrap(), q);
        assert_relative_eq!(gauge_output(&l, &q, &q).unwrap(), 1.0);
        assert_eq!(flux(&DMatrix::zeros(2, 2), &q), Err(Error::SingularOperator));
    }

    #[test]
    fn decomposition_recomposes_direct_flux() {
        let sigma = 1e-3;
        let t = Triple {
            l: diag(&[sigma, -1.0]),
            q: DVector::from_row_slice(&[1.0, 1.0]),
            qdag: DVector::from_row_slice(&[1.0, 1.0]),
        };
        let sd = fundamental_eigenpair(&t.l).unwrap();
        let dec = decompose_flux(&t, &sd).unwrap();
        let direct = flux(&t.l, &t.q).unwrap();
        assert_relative_eq!(dec.amplitude, -1.0 / sigma, max_relative = 1e-12);
        assert_relative_eq!(dec.harmonic, DVector::from_row_slice(&[0.0, 1.0]), epsilon = 1e-12);
        assert_relative_eq!(dec.recomposed, direct, max_relative = 1e-9);
        assert_relative_eq!(dec.sigma_from_gauge, sigma, max_relative = 1e-9);
        assert_relative_eq!(dec.omega, sigma / (sigma - 1.0), max_relative = 1e-12);
    }

    #[test]
    fn zero_coupling_at_criticality() {
        let t = Triple {
            l: diag(&[0.0, -1.0]),
            q: DVector::from_row_slice(&[0.0, 1.0]),
            qdag: DVector::from_row_slice(&[1.0, 1.0]),
        };
        let sd = fundamental_eigenpair(&t.l).unwrap();
        assert_eq!(decompose_flux(&t, &sd), Err(Error::ZeroFundamentalCoupling));
    }
}
