//! Growth of the I-weighted energy.
//!
//! Along the flow the linear part drops out and
//!
//! ```text
//!   dE/dt = -2 (u uₓ, I²u)
//!         = (i/6)(1/L²) Σ_{ξ₁+ξ₂+ξ₃=0} S_σ(ξ₁,ξ₂,ξ₃) û(ξ₁)û(ξ₂)û(ξ₃),
//!   S_σ = Σ_{k≥1} (2σ)^{2k}/(2k)! (ξ₁^{2k+1}+ξ₂^{2k+1}+ξ₃^{2k+1}),
//! ```
//!
//! independently of α. Both forms are evaluated here; the second is a
//! brute-force double sum and only runs on small grids.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{simulate, ModelParams};
use crate::fit::log_log_slope;
use crate::identities::{fractional_bound_exponents, series_symmetrized, FreqTriad};
use crate::multipliers::{GevreyWeight, LINEAR_WEIGHT_LIMIT};
use crate::norms::{energy, i_norm};
use crate::par;
use crate::spectral::{inverse_transform, Grid, SpectralField};

/// Largest grid on which the triad double sum is evaluated.
pub const BRUTE_FORCE_MAX_N: usize = 128;
/// Relative agreement required between the two evaluations.
pub const CROSS_CHECK_TOL: f64 = 1e-6;

/// Both evaluations of the defect rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DefectRate {
    pub physical: f64,
    /// `2 h Σ |u u_x I²u|` over the quadrature nodes.
    pub physical_magnitude: f64,
    /// `None` when the grid is too large or the series cannot be summed.
    pub fourier: Option<f64>,
    /// `(1/6L²) Σ |S_σ||û₁û₂û₃|`, the size of the sum before cancellation.
    pub magnitude: Option<f64>,
}

fn strip_nyquist(field: &SpectralField) -> SpectralField {
    let mut f = field.clone();
    f.clear_nyquist();
    f
}

/// Copy a field onto a grid with `factor` times as many points (zero padded).
fn pad(field: &SpectralField, factor: usize) -> SpectralField {
    let g = field.grid();
    let big = Grid::new(g.n_points() * factor, g.domain_length()).expect("padded grid is valid");
    let mut out = SpectralField::zeros(big);
    for (i, c) in field.coeffs().iter().enumerate() {
        let j = g.wavenumber_index(i);
        if let Some(slot) = big.slot(j) {
            out.coeffs_mut()[slot] = *c;
        }
    }
    out
}

/// `-2∫ u uₓ I²u dx` by pointwise products on a doubled grid, where the
/// cubic integrand is free of aliasing.
pub fn defect_rate_physical(field: &SpectralField, sigma: f64) -> Result<f64> {
    physical_parts(field, sigma).map(|(v, _)| v)
}

fn physical_parts(field: &SpectralField, sigma: f64) -> Result<(f64, f64)> {
    let g = field.grid();
    let exponent = 2.0 * sigma * g.xi_max();
    if exponent > LINEAR_WEIGHT_LIMIT {
        return Err(Error::OverflowRisk {
            exponent,
            limit: LINEAR_WEIGHT_LIMIT,
        });
    }
    let u_hat = pad(&strip_nyquist(field), 2);
    let ux_hat = u_hat.map_symbol(|xi| Complex64::new(0.0, xi));
    let i2_hat = u_hat.map_symbol(|xi| {
        let c = (sigma * xi).cosh();
        Complex64::new(c * c, 0.0)
    });
    let u = inverse_transform(&u_hat)?;
    let ux = inverse_transform(&ux_hat)?;
    let i2 = inverse_transform(&i2_hat)?;
    let h = g.domain_length() / u.len() as f64;
    let (sum, abs) = u
        .iter()
        .zip(&ux)
        .zip(&i2)
        .map(|((a, b), c)| a * b * c)
        .fold((0.0, 0.0), |(s, m), v| (s + v, m + v.abs()));
    Ok((-2.0 * h * sum, 2.0 * h * abs))
}

/// The triad double sum. Returns `(value, magnitude)`.
pub fn defect_rate_fourier(field: &SpectralField, sigma: f64) -> Result<(f64, f64)> {
    let g = *field.grid();
    let n = g.n_points() as i64;
    let jmax = n / 2 - 1;
    let l = g.domain_length();
    let k0 = 2.0 * std::f64::consts::PI / l;
    let rows: Vec<Result<(f64, f64)>> = par::map_range((2 * jmax + 1) as usize, |r| {
        let j1 = r as i64 - jmax;
        let c1 = field.coeff(j1);
        let mut acc = 0.0;
        let mut mag = 0.0;
        if c1.norm_sqr() == 0.0 {
            return Ok((0.0, 0.0));
        }
        for j2 in -jmax..=jmax {
            let j3 = -j1 - j2;
            if j3.abs() > jmax {
                continue;
            }
            let prod = c1 * field.coeff(j2) * field.coeff(j3);
            if prod.norm_sqr() == 0.0 {
                continue;
            }
            let t = FreqTriad([k0 * j1 as f64, k0 * j2 as f64, k0 * j3 as f64]);
            let s = series_symmetrized(t, sigma, 1)?.value;
            // (i/6) S û₁û₂û₃; the imaginary parts cancel in the full sum.
            acc += -s * prod.im;
            mag += s.abs() * prod.norm();
        }
        Ok((acc, mag))
    });
    let mut value = 0.0;
    let mut magnitude = 0.0;
    for r in rows {
        let (a, m) = r?;
        value += a;
        magnitude += m;
    }
    let scale = 1.0 / (6.0 * l * l);
    Ok((value * scale, magnitude * scale))
}

/// Evaluate the defect rate both ways where possible.
pub fn defect_rate_both(field: &SpectralField, sigma: f64) -> Result<DefectRate> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "sigma must be >= 0, got {sigma}"
        )));
    }
    let (physical, physical_magnitude) = physical_parts(field, sigma)?;
    if field.grid().n_points() > BRUTE_FORCE_MAX_N {
        return Ok(DefectRate {
            physical,
            physical_magnitude,
            fourier: None,
            magnitude: None,
        });
    }
    match defect_rate_fourier(field, sigma) {
        Ok((f, m)) => Ok(DefectRate {
            physical,
            physical_magnitude,
            fourier: Some(f),
            magnitude: Some(m),
        }),
        Err(Error::SeriesDivergence { .. }) => Ok(DefectRate {
            physical,
            physical_magnitude,
            fourier: None,
            magnitude: None,
        }),
        Err(e) => Err(e),
    }
}

/// `dE/dt` from the physical-space product, after confirming it against the
/// triad sum on grids with at most [`BRUTE_FORCE_MAX_N`] points. The rate
/// does not depend on `alpha`; it is validated only.
pub fn trilinear_defect_rate(field: &SpectralField, sigma: f64, alpha: f64) -> Result<f64> {
    if !(alpha > 1.0) {
        return Err(Error::InvalidInput(format!(
            "alpha must exceed 1, got {alpha}"
        )));
    }
    let r = defect_rate_both(field, sigma)?;
    if let (Some(f), Some(m)) = (r.fourier, r.magnitude) {
        let gap = (r.physical - f).abs();
        // The floor keeps exact cancellations (single modes, σ = 0) from
        // turning round-off into a relative failure.
        let allowed =
            CROSS_CHECK_TOL * r.physical.abs().max(f.abs()) + 1e-13 * (m + r.physical_magnitude);
        if gap > allowed {
            return Err(Error::CrossCheckFailure {
                physical: r.physical,
                fourier: f,
            });
        }
    }
    Ok(r.physical)
}

/// Energy growth over one local window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConservationReport {
    pub sigma: f64,
    pub delta: f64,
    pub alpha: f64,
    pub beta: f64,
    /// `max_{[0,δ]} E(t) - E(0)`.
    pub defect: f64,
    pub energy0: f64,
    /// `‖Iu₀‖_{H^{α/2}}`.
    pub iu0_norm: f64,
    pub c_defect: f64,
    /// `c_defect · δ · σ^β · ‖Iu₀‖³`.
    pub predicted_bound: f64,
    pub bound_satisfied: bool,
    pub energy_series: Vec<(f64, f64)>,
}

/// Simulate on `[0, δ]` with the stepping of `params` and compare the
/// energy defect with `c_defect · δ · σ^β · ‖Iu₀‖³`.
pub fn measure_defect(
    u0: &SpectralField,
    sigma: f64,
    delta: f64,
    params: &ModelParams,
    c_defect: f64,
) -> Result<ConservationReport> {
    if !(sigma >= 0.0 && delta > 0.0) {
        return Err(Error::InvalidInput(format!(
            "need sigma >= 0 and delta > 0, got sigma={sigma}, delta={delta}"
        )));
    }
    let alpha = params.alpha;
    let beta = fractional_bound_exponents(alpha)?.beta;
    let weight = GevreyWeight::cosh(sigma, 0.5 * alpha);
    let traj = simulate(u0, &params.with_t_end(delta), &weight, 1)?;
    let energy_series: Vec<(f64, f64)> = traj
        .times
        .iter()
        .zip(&traj.states)
        .map(|(&t, s)| (t, energy(s, sigma, alpha)))
        .collect();
    let energy0 = energy_series[0].1;
    let defect = energy_series
        .iter()
        .map(|&(_, e)| e - energy0)
        .fold(0.0, f64::max);
    let iu0_norm = i_norm(u0, sigma, alpha);
    let predicted_bound = c_defect * delta * sigma.powf(beta) * iu0_norm.powi(3);
    Ok(ConservationReport {
        sigma,
        delta,
        alpha,
        beta,
        defect,
        energy0,
        iu0_norm,
        c_defect,
        predicted_bound,
        bound_satisfied: defect <= predicted_bound,
        energy_series,
    })
}

/// Relative size below which a defect is treated as discretization noise.
pub const DEFECT_FLOOR: f64 = 1e-11;
/// Minimum number of usable σ values for a slope.
pub const MIN_SCALING_POINTS: usize = 4;

/// Least-squares exponent of defect against σ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub alpha: f64,
    pub beta: f64,
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    /// `(σ, defect)` pairs that entered the fit.
    pub points: Vec<(f64, f64)>,
    /// σ values dropped because their defect sat below the floor.
    pub dropped: Vec<f64>,
    /// Decades spanned by the usable σ values.
    pub decades: f64,
    /// slope ≥ β − 0.1: the measured growth is no faster than the bound allows.
    pub respects_bound_exponent: bool,
    /// slope ≥ 1: beats the cruder σ^{2α}-type estimate, which is at most linear.
    pub beats_linear: bool,
}

/// Fit `ln defect = a + slope · ln σ` over already measured pairs, dropping
/// any defect below `floor`.
pub fn fit_defect_slope(points: &[(f64, f64)], floor: f64, alpha: f64) -> Result<ScalingFit> {
    let beta = fractional_bound_exponents(alpha)?.beta;
    let (kept, dropped): (Vec<(f64, f64)>, Vec<(f64, f64)>) =
        points.iter().partition(|&&(s, d)| s > 0.0 && d > floor);
    if kept.len() < MIN_SCALING_POINTS {
        return Err(Error::InsufficientData(format!(
            "{} of {} sigma values above the defect floor {floor:.3e}; need {MIN_SCALING_POINTS}",
            kept.len(),
            points.len()
        )));
    }
    let s: Vec<f64> = kept.iter().map(|p| p.0).collect();
    let d: Vec<f64> = kept.iter().map(|p| p.1).collect();
    let f = log_log_slope(&s, &d)?;
    let lo = s.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = s.iter().copied().fold(0.0, f64::max);
    Ok(ScalingFit {
        alpha,
        beta,
        slope: f.slope,
        intercept: f.intercept,
        r2: f.r2,
        points: kept,
        dropped: dropped.into_iter().map(|p| p.0).collect(),
        decades: (hi / lo).log10(),
        respects_bound_exponent: f.slope >= beta - 0.1,
        beats_linear: f.slope >= 1.0,
    })
}

/// Measure the defect at every σ (concurrently) and fit its exponent.
pub fn defect_scaling_fit(
    u0: &SpectralField,
    sigma_list: &[f64],
    delta: f64,
    params: &ModelParams,
) -> Result<ScalingFit> {
    let reports: Vec<Result<ConservationReport>> =
        par::map_slice(sigma_list, |&s| measure_defect(u0, s, delta, params, 1.0));
    let mut points = Vec::with_capacity(reports.len());
    let mut floor: f64 = 0.0;
    for r in reports {
        let r = r?;
        floor = floor.max(DEFECT_FLOOR * r.energy0);
        points.push((r.sigma, r.defect));
    }
    fit_defect_slope(&points, floor, params.alpha)
}
