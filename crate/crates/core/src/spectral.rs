//! Periodic spectral representation of real fields.
//!
//! Transform convention (used everywhere in the crate): the torus of length
//! `L` is sampled at `x_k = -L/2 + k L / n`, `k = 0..n`, and
//!
//! ```text
//!   û_j = (L/n) Σ_k u(x_k) e^{-i ξ_j x_k},     ξ_j = 2π j / L,
//!   u(x_k) = (1/L) Σ_j û_j e^{i ξ_j x_k},
//! ```
//!
//! so `û_0 = L · mean(u)` approximates the continuum Fourier transform and
//! Parseval reads `∫|u|² dx ≈ (L/n) Σ_k |u_k|² = (1/L) Σ_j |û_j|²`. Every
//! norm multiplies coefficient sums by [`Grid::quadrature_weight`] = `1/L`.
//!
//! Coefficients are stored in FFT order: slot `idx` holds wavenumber
//! `j = idx` for `idx <= n/2` and `j = idx - n` otherwise, so the index range
//! is `j ∈ {-n/2+1, …, n/2}` with `j = n/2` the Nyquist mode.

use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::error::{Error, Result};

/// Relative tolerance for Hermitian symmetry of coefficient vectors.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Relative size of the imaginary residue tolerated by `inverse_transform`.
pub const IMAG_RESIDUE_TOL: f64 = 1e-10;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

/// Uniform periodic grid on a torus of length `domain_length`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    n_points: usize,
    domain_length: f64,
}

impl Grid {
    pub fn new(n_points: usize, domain_length: f64) -> Result<Self> {
        if n_points < 8 || !n_points.is_multiple_of(2) {
            return Err(Error::InvalidInput(format!(
                "n_points must be even and >= 8, got {n_points}"
            )));
        }
        if !(domain_length.is_finite() && domain_length > 0.0) {
            return Err(Error::InvalidInput(format!(
                "domain_length must be positive, got {domain_length}"
            )));
        }
        Ok(Self {
            n_points,
            domain_length,
        })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn domain_length(&self) -> f64 {
        self.domain_length
    }

    /// Integer wavenumber stored in FFT slot `idx`.
    pub fn wavenumber_index(&self, idx: usize) -> i64 {
        let n = self.n_points;
        if idx <= n / 2 {
            idx as i64
        } else {
            idx as i64 - n as i64
        }
    }

    /// FFT slot holding integer wavenumber `j`, if `j` is on the grid.
    pub fn slot(&self, j: i64) -> Option<usize> {
        let half = (self.n_points / 2) as i64;
        if j > half || j <= -half {
            None
        } else if j >= 0 {
            Some(j as usize)
        } else {
            Some((j + self.n_points as i64) as usize)
        }
    }

    /// Angular wavenumber `ξ = 2π j / L` of slot `idx`.
    pub fn xi(&self, idx: usize) -> f64 {
        2.0 * PI * self.wavenumber_index(idx) as f64 / self.domain_length
    }

    /// All angular wavenumbers in FFT order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.xi(i)).collect()
    }

    /// Largest |ξ| on the grid (the Nyquist wavenumber).
    pub fn xi_max(&self) -> f64 {
        PI * self.n_points as f64 / self.domain_length
    }

    /// Physical collocation points `x_k = -L/2 + k L / n`.
    pub fn points(&self) -> Vec<f64> {
        let h = self.domain_length / self.n_points as f64;
        (0..self.n_points)
            .map(|k| -0.5 * self.domain_length + k as f64 * h)
            .collect()
    }

    /// Weight turning `Σ_j |û_j|²` into `∫ |u|² dx`.
    pub fn quadrature_weight(&self) -> f64 {
        1.0 / self.domain_length
    }

    /// Highest |j| kept by the 2/3 rule.
    pub fn dealias_cutoff(&self) -> i64 {
        (self.n_points / 3) as i64
    }
}

/// A real periodic field held by its Fourier coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            coeffs: vec![Complex64::new(0.0, 0.0); grid.n_points()],
        }
    }

    /// Wrap a coefficient vector in FFT order. Symmetry is not checked here;
    /// see [`SpectralField::hermitian_defect`].
    pub fn from_coeffs(grid: Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.n_points() {
            return Err(Error::InvalidInput(format!(
                "expected {} coefficients, got {}",
                grid.n_points(),
                coeffs.len()
            )));
        }
        Ok(Self { grid, coeffs })
    }

    /// Build a field by assigning coefficients for `j >= 0`; negative
    /// wavenumbers are filled by conjugation. The zero and Nyquist modes keep
    /// only their real parts.
    pub fn from_half_spectrum<F>(grid: Grid, mut coeff: F) -> Self
    where
        F: FnMut(i64, f64) -> Complex64,
    {
        let n = grid.n_points();
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
        for idx in 0..=n / 2 {
            let j = idx as i64;
            let c = coeff(j, grid.xi(idx));
            if idx == 0 || idx == n / 2 {
                coeffs[idx] = Complex64::new(c.re, 0.0);
            } else {
                coeffs[idx] = c;
                coeffs[n - idx] = c.conj();
            }
        }
        Self { grid, coeffs }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient at integer wavenumber `j` (zero off the grid).
    pub fn coeff(&self, j: i64) -> Complex64 {
        self.grid
            .slot(j)
            .map(|i| self.coeffs[i])
            .unwrap_or_default()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    /// Largest relative violation of `û(-j) = conj(û(j))` together with the
    /// offending wavenumber (the Nyquist slot must be real).
    pub fn hermitian_defect(&self) -> (f64, i64) {
        let n = self.grid.n_points();
        let scale = self.max_abs();
        if scale == 0.0 {
            return (0.0, 0);
        }
        let mut worst = (self.coeffs[0].im.abs() / scale, 0);
        let nyq = self.coeffs[n / 2].im.abs() / scale;
        if nyq > worst.0 {
            worst = (nyq, (n / 2) as i64);
        }
        for idx in 1..n / 2 {
            let d = (self.coeffs[idx] - self.coeffs[n - idx].conj()).norm() / scale;
            if d > worst.0 {
                worst = (d, idx as i64);
            }
        }
        worst
    }

    pub fn check_hermitian(&self) -> Result<()> {
        let (defect, index) = self.hermitian_defect();
        if defect > HERMITIAN_TOL {
            Err(Error::SymmetryViolation { index, defect })
        } else {
            Ok(())
        }
    }

    /// Plain coefficient-space L² norm with the Parseval weight.
    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.coeffs.iter().map(|c| c.norm_sqr()).sum();
        (s * self.grid.quadrature_weight()).sqrt()
    }

    /// Multiply coefficient `idx` by `symbol(ξ_idx)`.
    pub fn map_symbol<F>(&self, symbol: F) -> Self
    where
        F: Fn(f64) -> Complex64,
    {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * symbol(self.grid.xi(i)))
            .collect();
        Self {
            grid: self.grid,
            coeffs,
        }
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            grid: self.grid,
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    /// `self + factor * other`.
    pub fn axpy(&self, factor: f64, other: &SpectralField) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        Self {
            grid: self.grid,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b * factor)
                .collect(),
        }
    }

    pub fn sub(&self, other: &SpectralField) -> Self {
        self.axpy(-1.0, other)
    }

    /// Zero the Nyquist slot, which has no conjugate partner.
    pub fn clear_nyquist(&mut self) {
        let n = self.grid.n_points();
        self.coeffs[n / 2] = Complex64::new(0.0, 0.0);
    }

    pub fn all_finite(&self) -> bool {
        self.coeffs
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

/// Sample-space to coefficient-space transform.
pub fn forward_transform(samples: &[f64], grid: &Grid) -> Result<SpectralField> {
    let n = grid.n_points();
    if samples.len() != n {
        return Err(Error::InvalidInput(format!(
            "expected {n} samples, got {}",
            samples.len()
        )));
    }
    let mut buf: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    plan(n, false).process(&mut buf);
    let h = grid.domain_length() / n as f64;
    for (idx, c) in buf.iter_mut().enumerate() {
        // e^{-iξ_j x_0} with x_0 = -L/2 is (-1)^j.
        let sign = if grid.wavenumber_index(idx).rem_euclid(2) == 0 {
            h
        } else {
            -h
        };
        *c *= sign;
    }
    // Real input: force exact symmetry of the self-conjugate slots.
    buf[0].im = 0.0;
    buf[n / 2].im = 0.0;
    Ok(SpectralField {
        grid: *grid,
        coeffs: buf,
    })
}

/// Complex reconstruction without any symmetry checks.
fn inverse_complex(field: &SpectralField) -> Vec<Complex64> {
    let grid = field.grid;
    let n = grid.n_points();
    let inv_l = 1.0 / grid.domain_length();
    let mut buf: Vec<Complex64> = field
        .coeffs
        .iter()
        .enumerate()
        .map(|(idx, &c)| {
            if grid.wavenumber_index(idx).rem_euclid(2) == 0 {
                c * inv_l
            } else {
                -c * inv_l
            }
        })
        .collect();
    plan(n, true).process(&mut buf);
    buf
}

/// Coefficient-space to sample-space transform for Hermitian fields.
pub fn inverse_transform(field: &SpectralField) -> Result<Vec<f64>> {
    field.check_hermitian()?;
    let buf = inverse_complex(field);
    let scale = buf.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let residue = buf.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
    if scale > 0.0 && residue > IMAG_RESIDUE_TOL * scale {
        return Err(Error::SymmetryViolation {
            index: 0,
            defect: residue / scale,
        });
    }
    Ok(buf.into_iter().map(|c| c.re).collect())
}

/// Inverse transform for fields that are symmetric by construction.
pub(crate) fn to_physical(field: &SpectralField) -> Vec<f64> {
    inverse_complex(field).into_iter().map(|c| c.re).collect()
}

/// 2/3-rule truncation: zero every mode with |j| > n/3.
pub fn dealias(field: &SpectralField) -> SpectralField {
    let grid = field.grid;
    let cutoff = grid.dealias_cutoff();
    let coeffs = field
        .coeffs
        .iter()
        .enumerate()
        .map(|(idx, &c)| {
            if grid.wavenumber_index(idx).abs() > cutoff {
                Complex64::new(0.0, 0.0)
            } else {
                c
            }
        })
        .collect();
    SpectralField { grid, coeffs }
}

/// The field whose coefficients are `|û_j|`.
pub fn modulus_field(field: &SpectralField) -> SpectralField {
    SpectralField {
        grid: field.grid,
        coeffs: field
            .coeffs
            .iter()
            .map(|c| Complex64::new(c.norm(), 0.0))
            .collect(),
    }
}

/// Pointwise product of two fields, computed on the collocation grid and
/// returned dealiased with the Nyquist slot cleared.
pub fn product(a: &SpectralField, b: &SpectralField) -> SpectralField {
    let ua = to_physical(a);
    let ub = to_physical(b);
    let prod: Vec<f64> = ua.iter().zip(&ub).map(|(x, y)| x * y).collect();
    let mut out = dealias(&forward_transform(&prod, &a.grid).expect("product has grid length"));
    out.clear_nyquist();
    out
}

/// Sample a function on the grid and transform it.
pub fn sample<F: Fn(f64) -> f64>(grid: &Grid, f: F) -> SpectralField {
    let samples: Vec<f64> = grid.points().into_iter().map(f).collect();
    forward_transform(&samples, grid).expect("sample length equals grid size")
}
