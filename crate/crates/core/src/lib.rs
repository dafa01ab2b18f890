//! Pseudospectral simulation and verification toolkit for the BBM equation
//!
//! ```text
//!   u_t - u_txx + u_x + u u_x = 0
//! ```
//!
//! and its fractional generalization, organised around the analytic
//! (Gevrey) machinery used to bound the radius of spatial analyticity:
//! the smooth I-operator `cosh(σD)`, the almost conservation of the
//! I-weighted energy, and the exact hyperplane factorization of
//! `ξ₁^{2k+1} + ξ₂^{2k+1} + ξ₃^{2k+1}` that drives it.
//!
//! The real line is replaced by a periodic domain of length `L`; see
//! [`spectral`] for the transform convention used throughout.

pub mod analytics;
pub mod error;
pub mod evolution;
pub mod fit;
pub mod identities;
pub mod initial;
pub mod keyvalue;
pub mod multipliers;
pub mod norms;
pub mod par;
pub mod spectral;

pub use error::{Error, Result};
pub use evolution::{ModelParams, PicardDiagnostics, PicardOptions, Trajectory};
pub use initial::InitialData;
pub use multipliers::{GevreyWeight, SymbolKind};
pub use norms::NormReport;
pub use spectral::{Grid, SpectralField};
