//! Scalar functionals on spectral fields.
//!
//! Every sum carries the Parseval weight `1/L`, so the values approximate
//! their continuum counterparts on ℝ and the equivalence constants between
//! the I-weighted and Gevrey norms hold unchanged.

use serde::{Deserialize, Serialize};

use crate::multipliers::{GevreyWeight, SymbolKind};
use crate::spectral::SpectralField;

/// Above this value of `σ·ξ_max` the weighted sums accumulate in log space.
pub const LOG_DOMAIN_THRESHOLD: f64 = 300.0;

/// Sum `Σ_j w_j |û_j|²` where `ln w_j = log_weight(ξ_j)`, times `1/L`.
/// `linear` selects direct accumulation; otherwise a log-sum-exp is used and
/// the result may be `+inf` if it exceeds the f64 range.
fn weighted_sum<F>(field: &SpectralField, log_weight: F, linear: bool) -> f64
where
    F: Fn(f64) -> f64,
{
    let grid = field.grid();
    let q = grid.quadrature_weight();
    if linear {
        let s: f64 = field
            .coeffs()
            .iter()
            .enumerate()
            .map(|(i, c)| log_weight(grid.xi(i)).exp() * c.norm_sqr())
            .sum();
        return s * q;
    }
    log_weighted_sum(field, log_weight).exp()
}

/// `ln(Σ_j w_j |û_j|² / L)`, computed without forming any weight.
/// Returns `-inf` for the zero field.
pub(crate) fn log_weighted_sum<F>(field: &SpectralField, log_weight: F) -> f64
where
    F: Fn(f64) -> f64,
{
    let grid = field.grid();
    let logs: Vec<f64> = field
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm_sqr() > 0.0)
        .map(|(i, c)| log_weight(grid.xi(i)) + c.norm_sqr().ln())
        .collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return top;
    }
    let s: f64 = logs.iter().map(|l| (l - top).exp()).sum();
    top + s.ln() + grid.quadrature_weight().ln()
}

/// `‖u‖_{H^s}` with weight `(1+|ξ|)^{2s}`.
pub fn hs_norm(field: &SpectralField, s: f64) -> f64 {
    if s == 0.0 {
        return field.l2_norm();
    }
    weighted_sum(field, |xi| 2.0 * s * xi.abs().ln_1p(), true).sqrt()
}

fn use_linear(field: &SpectralField, sigma: f64) -> bool {
    sigma * field.grid().xi_max() <= LOG_DOMAIN_THRESHOLD
}

/// `‖u‖_{G^{σ,s}}`; for `CoshSymbol` this is `‖Iu‖_{H^s}`.
pub fn gevrey_norm(field: &SpectralField, weight: &GevreyWeight) -> f64 {
    let w = *weight;
    weighted_sum(
        field,
        move |xi| 2.0 * w.s * xi.abs().ln_1p() + 2.0 * w.log_analytic(xi),
        use_linear(field, w.sigma),
    )
    .sqrt()
}

/// `ln ‖u‖_{G^{σ,s}}`, finite even when the norm itself overflows.
pub fn log_gevrey_norm(field: &SpectralField, weight: &GevreyWeight) -> f64 {
    let w = *weight;
    0.5 * log_weighted_sum(field, move |xi| {
        2.0 * w.s * xi.abs().ln_1p() + 2.0 * w.log_analytic(xi)
    })
}

/// I-weighted energy `E = ∫ |Iu|² + |D^{α/2} Iu|² dx`.
pub fn energy(field: &SpectralField, sigma: f64, alpha: f64) -> f64 {
    let w = GevreyWeight::cosh(sigma, 0.0);
    weighted_sum(
        field,
        move |xi| xi.abs().powf(alpha).ln_1p() + 2.0 * w.log_analytic(xi),
        use_linear(field, sigma),
    )
}

/// The conserved quantity `∫ u² + uₓ² dx`.
pub fn h1_invariant(field: &SpectralField) -> f64 {
    let grid = field.grid();
    let s: f64 = field
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let xi = grid.xi(i);
            (1.0 + xi * xi) * c.norm_sqr()
        })
        .sum();
    s * grid.quadrature_weight()
}

/// Snapshot of every scalar diagnostic for one state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub l2: f64,
    pub h1: f64,
    pub h_alpha_half: f64,
    pub gevrey: f64,
    pub energy: f64,
    pub h1_invariant: f64,
}

impl NormReport {
    /// `gevrey` uses `weight` as given; `energy` uses `weight.sigma`.
    pub fn compute(field: &SpectralField, weight: &GevreyWeight, alpha: f64) -> Self {
        Self {
            l2: field.l2_norm(),
            h1: hs_norm(field, 1.0),
            h_alpha_half: hs_norm(field, 0.5 * alpha),
            gevrey: gevrey_norm(field, weight),
            energy: energy(field, weight.sigma, alpha),
            h1_invariant: h1_invariant(field),
        }
    }
}

/// `‖Iu‖_{H^{α/2}}` for the cosh weight of radius `sigma`.
pub fn i_norm(field: &SpectralField, sigma: f64, alpha: f64) -> f64 {
    gevrey_norm(field, &GevreyWeight::cosh(sigma, 0.5 * alpha))
}

/// Same as [`i_norm`] but honouring the kind of `weight`.
pub fn weighted_i_norm(field: &SpectralField, weight: &GevreyWeight, alpha: f64) -> f64 {
    match weight.kind {
        SymbolKind::CoshSymbol => i_norm(field, weight.sigma, alpha),
        SymbolKind::ExpSymbol => gevrey_norm(field, &weight.with_s(0.5 * alpha)),
    }
}
