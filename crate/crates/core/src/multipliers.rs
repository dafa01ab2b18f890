//! Fourier multipliers: the dispersive symbol, its unitary group, the
//! Gevrey weights and fractional derivatives. All of them are diagonal in
//! the coefficient basis, so each operator is a pointwise symbol product.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::SpectralField;

/// Largest `σ·ξ_max` for which weights are applied in linear scale.
pub const LINEAR_WEIGHT_LIMIT: f64 = 700.0;

/// Which analytic weight a [`GevreyWeight`] uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymbolKind {
    /// `m(ξ) = cosh(σξ)`, the smooth symbol of the I-operator.
    CoshSymbol,
    /// `e^{σ|ξ|}(1+|ξ|)^s`, the literal Gevrey weight.
    ExpSymbol,
}

/// Frequency weight defining Gevrey norms and the I-operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GevreyWeight {
    pub sigma: f64,
    pub s: f64,
    pub kind: SymbolKind,
}

impl GevreyWeight {
    pub fn new(sigma: f64, s: f64, kind: SymbolKind) -> Result<Self> {
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "sigma must be finite and nonnegative, got {sigma}"
            )));
        }
        if !s.is_finite() {
            return Err(Error::InvalidInput(format!("s must be finite, got {s}")));
        }
        Ok(Self { sigma, s, kind })
    }

    /// The I-operator weight `cosh(σξ)` with Sobolev index `s`.
    pub fn cosh(sigma: f64, s: f64) -> Self {
        Self {
            sigma,
            s,
            kind: SymbolKind::CoshSymbol,
        }
    }

    pub fn exp(sigma: f64, s: f64) -> Self {
        Self {
            sigma,
            s,
            kind: SymbolKind::ExpSymbol,
        }
    }

    pub fn with_s(self, s: f64) -> Self {
        Self { s, ..self }
    }

    /// `ln` of the analytic factor (without the Sobolev part): `ln cosh(σξ)`
    /// or `σ|ξ|`. Finite for every ξ.
    pub fn log_analytic(&self, xi: f64) -> f64 {
        let x = self.sigma * xi.abs();
        match self.kind {
            SymbolKind::CoshSymbol => log_cosh(x),
            SymbolKind::ExpSymbol => x,
        }
    }

    /// Analytic factor in linear scale.
    pub fn analytic(&self, xi: f64) -> f64 {
        match self.kind {
            SymbolKind::CoshSymbol => (self.sigma * xi).cosh(),
            SymbolKind::ExpSymbol => (self.sigma * xi.abs()).exp(),
        }
    }
}

/// Overflow-free `ln cosh(x)`.
pub fn log_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// `iξ / (1 + |ξ|^α)`, the symbol of `∂ₓ(1 + D^α)^{-1}`.
pub fn phi_symbol(xi: f64, alpha: f64) -> Complex64 {
    Complex64::new(0.0, xi / (1.0 + xi.abs().powf(alpha)))
}

/// The Nyquist slot has no conjugate partner, so the odd symbol acts on it
/// as zero (its derivative vanishes on the grid).
pub fn apply_phi(field: &SpectralField, alpha: f64) -> SpectralField {
    let mut out = field.map_symbol(|xi| phi_symbol(xi, alpha));
    out.clear_nyquist();
    out
}

/// The unitary group `e^{-tφ(D)}`.
pub fn semigroup(field: &SpectralField, t: f64, alpha: f64) -> SpectralField {
    if t == 0.0 {
        return field.clone();
    }
    let mut out = field.map_symbol(|xi| {
        let p = phi_symbol(xi, alpha).im;
        Complex64::from_polar(1.0, -t * p)
    });
    // Same convention as `apply_phi`: the group acts trivially on Nyquist.
    let nyq = field.grid().n_points() / 2;
    out.coeffs_mut()[nyq] = field.coeffs()[nyq];
    out
}

fn check_linear_range(field: &SpectralField, sigma: f64) -> Result<()> {
    let exponent = sigma * field.grid().xi_max();
    if exponent > LINEAR_WEIGHT_LIMIT {
        Err(Error::OverflowRisk {
            exponent,
            limit: LINEAR_WEIGHT_LIMIT,
        })
    } else {
        Ok(())
    }
}

/// Apply the weight as an operator. `CoshSymbol` multiplies by `cosh(σξ)`
/// only (its `s` enters norms, not the operator); `ExpSymbol` multiplies by
/// `e^{σ|ξ|}(1+|ξ|)^s`.
pub fn apply_i_operator(field: &SpectralField, weight: &GevreyWeight) -> Result<SpectralField> {
    check_linear_range(field, weight.sigma)?;
    Ok(match weight.kind {
        SymbolKind::CoshSymbol => {
            if weight.sigma == 0.0 {
                field.clone()
            } else {
                field.map_symbol(|xi| Complex64::new((weight.sigma * xi).cosh(), 0.0))
            }
        }
        SymbolKind::ExpSymbol => field.map_symbol(|xi| {
            let a = xi.abs();
            Complex64::new((weight.sigma * a).exp() * (1.0 + a).powf(weight.s), 0.0)
        }),
    })
}

/// `D^β`: multiply by `|ξ|^β`.
pub fn apply_fractional_derivative(field: &SpectralField, beta: f64) -> Result<SpectralField> {
    if !(beta >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "beta must be >= 0, got {beta}"
        )));
    }
    if beta == 0.0 {
        return Ok(field.clone());
    }
    Ok(field.map_symbol(|xi| Complex64::new(xi.abs().powf(beta), 0.0)))
}

/// `e^{σ|D|}`.
pub fn apply_exp_weight(field: &SpectralField, sigma: f64) -> Result<SpectralField> {
    apply_i_operator(field, &GevreyWeight::exp(sigma, 0.0))
}
