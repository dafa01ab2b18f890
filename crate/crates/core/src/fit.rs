//! Ordinary least squares for the handful of log-linear fits used by the
//! analytics: log-log slopes, exponential decay rates and spectral envelopes.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficients of a linear model with its coefficient of determination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub coeffs: Vec<f64>,
    pub r2: f64,
    pub n: usize,
}

/// Least squares `y ≈ X b` where each row of `design` is one observation.
pub fn least_squares(design: &[Vec<f64>], y: &[f64]) -> Result<LinearModel> {
    let n = y.len();
    let p = design.first().map_or(0, Vec::len);
    if design.len() != n {
        return Err(Error::InvalidInput(format!(
            "{} design rows for {n} observations",
            design.len()
        )));
    }
    if n <= p || p == 0 {
        return Err(Error::InsufficientData(format!(
            "{n} observations for {p} parameters"
        )));
    }
    if design.iter().any(|r| r.len() != p) || y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(
            "ragged or non-finite regression data".into(),
        ));
    }
    let x = DMatrix::from_fn(n, p, |i, j| design[i][j]);
    let yv = DVector::from_column_slice(y);
    let svd = x.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 1e-12 * smax) {
        return Err(Error::InsufficientData(
            "regression design is rank deficient".into(),
        ));
    }
    let b = svd
        .solve(&yv, 0.0)
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    let resid = &yv - &x * &b;
    let mean = yv.mean();
    let ss_tot: f64 = yv.iter().map(|v| (v - mean).powi(2)).sum();
    let ss_res = resid.norm_squared();
    let r2 = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else {
        1.0
    };
    Ok(LinearModel {
        coeffs: b.iter().copied().collect(),
        r2,
        n,
    })
}

/// Straight line `y = intercept + slope x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub intercept: f64,
    pub slope: f64,
    pub r2: f64,
    pub n: usize,
}

pub fn fit_line(x: &[f64], y: &[f64]) -> Result<LineFit> {
    let design: Vec<Vec<f64>> = x.iter().map(|&v| vec![1.0, v]).collect();
    let m = least_squares(&design, y)?;
    Ok(LineFit {
        intercept: m.coeffs[0],
        slope: m.coeffs[1],
        r2: m.r2,
        n: m.n,
    })
}

/// Slope of `ln y` against `ln x`. Non-positive entries are rejected.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> Result<LineFit> {
    if x.iter().chain(y).any(|&v| !(v > 0.0)) {
        return Err(Error::InvalidInput(
            "log-log fit needs positive data".into(),
        ));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    fit_line(&lx, &ly)
}
