//! Analytic radius from the Fourier tail.
//!
//! A function analytic in the strip `|Im z| < σ` with an algebraic
//! singularity on its boundary has `|û(ξ)| ≈ A e^{-σ|ξ|} |ξ|^{-p}`. The
//! estimator fits
//!
//! ```text
//!   ln|û(ξ_j)| = a - σ ξ_j - p ln(1 + ξ_j²)
//! ```
//!
//! over positive wavenumbers in a band, so the algebraic prefactor does not
//! bias the exponential rate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::Trajectory;
use crate::fit::{fit_line, least_squares};
use crate::identities::fractional_bound_exponents;
use crate::par;
use crate::spectral::SpectralField;

pub const DEFAULT_NOISE_FLOOR: f64 = 1e-14;
/// Modes above this fraction of the peak are treated as non-asymptotic.
pub const UPPER_FRACTION: f64 = 1e-2;
pub const MIN_MODES: usize = 8;
pub const MIN_R2: f64 = 0.98;
pub const DEFAULT_T_MIN: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusEstimate {
    pub sigma_est: f64,
    pub r2: f64,
    /// Fitted algebraic exponent `p`.
    pub power: f64,
    pub modes: usize,
}

/// Fit the decay rate over modes with `xi_lo <= ξ_j <= xi_hi` (ξ_j > 0)
/// whose modulus lies in `[10·noise_floor, 1e-2]` relative to the largest
/// coefficient. `noise_floor` is relative, so rescaling the field does not
/// change the selected modes.
pub fn estimate_radius(
    field: &SpectralField,
    xi_lo: f64,
    xi_hi: f64,
    noise_floor: f64,
) -> Result<RadiusEstimate> {
    let g = field.grid();
    let peak = field.max_abs();
    let lo_amp = 10.0 * noise_floor * peak;
    let hi_amp = UPPER_FRACTION * peak;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for j in 1..(g.n_points() as i64 / 2) {
        let xi = 2.0 * std::f64::consts::PI * j as f64 / g.domain_length();
        if xi < xi_lo || xi > xi_hi {
            continue;
        }
        let a = field.coeff(j).norm();
        if a > 0.0 && a >= lo_amp && a <= hi_amp {
            xs.push(xi);
            ys.push(a.ln());
        }
    }
    if xs.len() < MIN_MODES {
        return Err(Error::SpectrumTooThin {
            usable: xs.len(),
            required: MIN_MODES,
        });
    }
    let design: Vec<Vec<f64>> = xs
        .iter()
        .map(|&x| vec![1.0, -x, -(x * x).ln_1p()])
        .collect();
    let m = least_squares(&design, &ys)?;
    Ok(RadiusEstimate {
        sigma_est: m.coeffs[1],
        r2: m.r2,
        power: m.coeffs[2],
        modes: xs.len(),
    })
}

/// Which wavenumbers the estimator may use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum BandPolicy {
    Fixed {
        xi_lo: f64,
        xi_hi: f64,
    },
    /// Whole grid; only the amplitude window applies.
    Adaptive,
}

impl BandPolicy {
    fn band(&self) -> (f64, f64) {
        match *self {
            BandPolicy::Fixed { xi_lo, xi_hi } => (xi_lo, xi_hi),
            BandPolicy::Adaptive => (0.0, f64::INFINITY),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusSample {
    pub t: f64,
    pub sigma_est: Option<f64>,
    pub fit_r2: Option<f64>,
    pub modes: usize,
    /// Entered the decay-law fit.
    pub accepted: bool,
    /// `c_check · t^{-μ}` for accepted samples.
    pub lower_bound: Option<f64>,
    pub bound_ok: Option<bool>,
}

/// Decay law `σ(t) = c t^{-μ}` fitted to estimated radii.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusFit {
    pub samples: Vec<RadiusSample>,
    pub mu_fit: f64,
    pub c_fit: f64,
    pub fit_r2: f64,
    pub band: (f64, f64),
    pub noise_floor: f64,
    pub t_min: f64,
    /// Exponent of the proven lower bound.
    pub mu_bound: f64,
    /// `σ_est(t₀) · t₀^{μ}` at the earliest accepted sample.
    pub c_check: f64,
    pub all_bounds_hold: bool,
}

/// Estimate the radius at every sampled time and fit `σ = c t^{-μ}` over
/// accepted samples with `t >= t_min`. Each accepted sample is checked
/// against `c_check · t^{-μ}` where μ is the proven exponent for the
/// trajectory's α.
pub fn track_radius(
    traj: &Trajectory,
    policy: BandPolicy,
    noise_floor: f64,
    t_min: f64,
) -> Result<RadiusFit> {
    if traj.len() < 10 {
        return Err(Error::InsufficientData(format!(
            "trajectory has {} samples; need at least 10",
            traj.len()
        )));
    }
    let mu_bound = fractional_bound_exponents(traj.params.alpha)?.mu;
    let (xi_lo, xi_hi) = policy.band();
    let estimates = par::map_slice(&traj.states, |s| {
        estimate_radius(s, xi_lo, xi_hi, noise_floor)
    });
    let mut samples: Vec<RadiusSample> = traj
        .times
        .iter()
        .zip(estimates)
        .map(|(&t, e)| {
            let (sigma_est, fit_r2, modes) = match &e {
                Ok(r) => (Some(r.sigma_est), Some(r.r2), r.modes),
                Err(_) => (None, None, 0),
            };
            let accepted =
                t >= t_min && t > 0.0 && matches!(&e, Ok(r) if r.r2 >= MIN_R2 && r.sigma_est > 0.0);
            RadiusSample {
                t,
                sigma_est,
                fit_r2,
                modes,
                accepted,
                lower_bound: None,
                bound_ok: None,
            }
        })
        .collect();

    let used: Vec<(f64, f64)> = samples
        .iter()
        .filter(|s| s.accepted)
        .map(|s| (s.t, s.sigma_est.expect("accepted samples have estimates")))
        .collect();
    if used.len() < 2 {
        return Err(Error::NoFit);
    }
    let lt: Vec<f64> = used.iter().map(|p| p.0.ln()).collect();
    let ls: Vec<f64> = used.iter().map(|p| p.1.ln()).collect();
    let line = fit_line(&lt, &ls).map_err(|_| Error::NoFit)?;

    let (t0, s0) = used[0];
    let c_check = s0 * t0.powf(mu_bound);
    let mut all_ok = true;
    for s in samples.iter_mut().filter(|s| s.accepted) {
        let bound = c_check * s.t.powf(-mu_bound);
        let ok = s.sigma_est.expect("accepted") >= bound * (1.0 - 1e-12);
        all_ok &= ok;
        s.lower_bound = Some(bound);
        s.bound_ok = Some(ok);
    }
    Ok(RadiusFit {
        samples,
        mu_fit: -line.slope,
        c_fit: line.intercept.exp(),
        fit_r2: line.r2,
        band: (xi_lo, xi_hi.min(traj.params.grid.xi_max())),
        noise_floor,
        t_min,
        mu_bound,
        c_check,
        all_bounds_hold: all_ok,
    })
}

/// Spectrum `e^{-σ|ξ|}/(1+ξ²)` on `grid`, the estimator's reference case.
pub fn planted_spectrum(grid: crate::spectral::Grid, sigma: f64) -> SpectralField {
    SpectralField::from_half_spectrum(grid, |_, xi| {
        num_complex::Complex64::new((-sigma * xi.abs()).exp() / (1.0 + xi * xi), 0.0)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::{simulate, ModelParams};
    use crate::initial::InitialData;
    use crate::multipliers::GevreyWeight;
    use crate::spectral::{sample, Grid};

    #[test]
    fn planted_half() {
        let g = Grid::new(512, 64.0).unwrap();
        let f = planted_spectrum(g, 0.5);
        let r = estimate_radius(&f, 0.0, f64::INFINITY, DEFAULT_NOISE_FLOOR).unwrap();
        assert!((r.sigma_est - 0.5).abs() < 0.01, "{r:?}");
        assert!(r.r2 > 0.999);
        assert!((r.power - 1.0).abs() < 1e-6);
    }

    #[test]
    fn planted_range() {
        let g = Grid::new(1024, 64.0).unwrap();
        for &s in &[0.05, 0.1, 0.3, 1.0, 2.0] {
            let r = estimate_radius(
                &planted_spectrum(g, s),
                0.0,
                f64::INFINITY,
                DEFAULT_NOISE_FLOOR,
            )
            .unwrap();
            assert!((r.sigma_est / s - 1.0).abs() < 0.02, "{s}: {r:?}");
        }
    }

    #[test]
    fn sech_profile_has_strip_pi_w_over_two() {
        // sech(x/w) has poles at ±iπw/2.
        let g = Grid::new(1024, 64.0).unwrap();
        let w = 0.5;
        let f = sample(&g, |x| 1.0 / (x / w).cosh());
        let r = estimate_radius(&f, 0.0, f64::INFINITY, DEFAULT_NOISE_FLOOR).unwrap();
        let want = std::f64::consts::PI * w / 2.0;
        assert!(
            (r.sigma_est / want - 1.0).abs() < 0.02,
            "{} vs {want}",
            r.sigma_est
        );
    }

    #[test]
    fn zero_field_is_too_thin() {
        let g = Grid::new(64, 64.0).unwrap();
        let e =
            estimate_radius(&SpectralField::zeros(g), 0.0, 10.0, DEFAULT_NOISE_FLOOR).unwrap_err();
        assert!(matches!(e, Error::SpectrumTooThin { usable: 0, .. }));
    }

    #[test]
    fn scale_invariant() {
        let g = Grid::new(256, 64.0).unwrap();
        let f = planted_spectrum(g, 0.7);
        let a = estimate_radius(&f, 0.0, 30.0, DEFAULT_NOISE_FLOOR).unwrap();
        let b = estimate_radius(&f.scale(10.0), 0.0, 30.0, DEFAULT_NOISE_FLOOR).unwrap();
        assert!((a.sigma_est - b.sigma_est).abs() < 1e-10);
        assert_eq!(a.modes, b.modes);
    }

    #[test]
    fn fixed_band_restricts_modes() {
        let g = Grid::new(512, 64.0).unwrap();
        let f = planted_spectrum(g, 0.3);
        let all = estimate_radius(&f, 0.0, f64::INFINITY, DEFAULT_NOISE_FLOOR).unwrap();
        let part = estimate_radius(&f, 5.0, 10.0, DEFAULT_NOISE_FLOOR).unwrap();
        assert!(part.modes < all.modes);
        assert!((part.sigma_est - 0.3).abs() < 1e-6);
    }

    #[test]
    fn linear_flow_keeps_radius() {
        let g = Grid::new(512, 64.0).unwrap();
        let u0 = InitialData::Sech2 {
            amplitude: 1.0,
            width: 1.0,
        }
        .sample(&g);
        let p = ModelParams::new(2.0, g, 0.05, 20.0).unwrap().linear();
        let traj = simulate(&u0, &p, &GevreyWeight::cosh(0.0, 1.0), 20).unwrap();
        let fit = track_radius(
            &traj,
            BandPolicy::Adaptive,
            DEFAULT_NOISE_FLOOR,
            DEFAULT_T_MIN,
        )
        .unwrap();
        assert!(fit.mu_fit.abs() < 1e-6, "{}", fit.mu_fit);
        assert!(fit.all_bounds_hold);
        // sech² has double poles at ±iπw/2.
        let s = fit
            .samples
            .iter()
            .find(|s| s.accepted)
            .unwrap()
            .sigma_est
            .unwrap();
        assert!((s / (std::f64::consts::PI / 2.0) - 1.0).abs() < 0.02, "{s}");
    }

    #[test]
    fn short_trajectories_rejected() {
        let g = Grid::new(64, 64.0).unwrap();
        let u0 = InitialData::DEFAULT.sample(&g);
        let p = ModelParams::new(2.0, g, 0.1, 0.5).unwrap();
        let traj = simulate(&u0, &p, &GevreyWeight::cosh(0.0, 1.0), 1).unwrap();
        assert!(track_radius(&traj, BandPolicy::Adaptive, DEFAULT_NOISE_FLOOR, 0.0).is_err());
    }
}
