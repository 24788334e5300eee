//! Perturbation series and operator weighing for constrained, near-critical
//! linear source problems `L(z, ε)Φ + Q = 0` balanced on a gauge output
//! `R = ⟨Q†, Φ⟩ = R₀`.
//!
//! The numerical core is generic over [`Field`] (exact rationals work for
//! the algebraic pieces) and [`Real`] (`f32`, `f64`) where eigensolves, root
//! finding or quadrature are needed. The `*64` aliases fix the scalar to
//! `f64`.

pub mod constraint;
pub mod error;
pub mod family;
pub mod instances;
pub mod linalg;
pub mod oracle;
pub mod problem;
pub mod quadrature;
pub mod roots;
pub mod scalar;
pub mod series;
pub mod spectral;
pub mod verify;
pub mod weighing;

pub use constraint::{balance, gauge_rescale, gauge_rescale_family, normalize, BalancePoint, Normalized};
pub use error::{Error, Result};
pub use family::{CombinedFamily, GaugeReference, PolyMatrix, PolyVector, SystemParams, Triple};
pub use problem::{Problem, ProblemError};
pub use scalar::{Field, Real};
pub use series::{bilinear_series, perturbation_series, Derivation, ScalarSeries, SeriesBundle, VectorSeries};
pub use spectral::{criticality_report, fundamental_eigenpair, CriticalityReport, FluxPair, SpectralData};
pub use weighing::{
    balance_check, recover_coefficients, weighing_integral, weight_scale, Instrument, Recovery, WeighingReport,
    WeightScale,
};

pub type Family64 = CombinedFamily<f64>;
pub type Params64 = SystemParams<f64>;
pub type Triple64 = Triple<f64>;
pub type Spectral64 = SpectralData<f64>;
pub type Balance64 = BalancePoint<f64>;
pub type Series64 = SeriesBundle<f64>;
pub type Instrument64 = Instrument<f64>;
pub type WeightScale64 = WeightScale<f64>;
pub type Report64 = WeighingReport<f64>;
