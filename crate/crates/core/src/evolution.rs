//! Time evolution of the (fractional) BBM equation
//!
//! ```text
//!   u_t + φ(D)u + ½ φ(D)(u²) = 0,     φ(D) = ∂ₓ(1 + D^α)^{-1}.
//! ```
//!
//! Production stepping is classical RK4 on the coefficient ODE system; the
//! symbol of φ(D) is bounded, so the system is not stiff. The Picard solver
//! iterates the Duhamel map on a uniform node set and is meant for
//! verification at short times.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multipliers::{apply_phi, phi_symbol, semigroup, GevreyWeight};
use crate::norms::{weighted_i_norm, NormReport};
use crate::par;
use crate::spectral::{product, Grid, SpectralField};

/// Any coefficient above this magnitude counts as blowup.
pub const BLOWUP_THRESHOLD: f64 = 1e12;

/// PDE parameterization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Dispersion order; 2 is classical BBM.
    pub alpha: f64,
    pub grid: Grid,
    pub dt: f64,
    pub t_end: f64,
    /// Drop the quadratic term (linear flow only).
    #[serde(default)]
    pub linear_only: bool,
}

impl ModelParams {
    pub fn new(alpha: f64, grid: Grid, dt: f64, t_end: f64) -> Result<Self> {
        if !(alpha > 1.0 && alpha.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "alpha must exceed 1, got {alpha}"
            )));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "dt must be positive, got {dt}"
            )));
        }
        if !(t_end >= 0.0 && t_end.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "t_end must be nonnegative, got {t_end}"
            )));
        }
        Ok(Self {
            alpha,
            grid,
            dt,
            t_end,
            linear_only: false,
        })
    }

    pub fn linear(self) -> Self {
        Self {
            linear_only: true,
            ..self
        }
    }

    pub fn with_t_end(self, t_end: f64) -> Self {
        Self { t_end, ..self }
    }
}

/// Sampled solution.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<SpectralField>,
    pub norms: Vec<NormReport>,
    pub params: ModelParams,
}

impl Trajectory {
    pub fn final_state(&self) -> &SpectralField {
        self.states.last().expect("trajectory is never empty")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory is never empty")
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// `u²` evaluated pseudospectrally, dealiased, Nyquist cleared.
pub fn nonlinear_term(field: &SpectralField) -> SpectralField {
    product(field, field)
}

/// `-φ(D)(u + ½u²)`.
pub fn rhs(field: &SpectralField, alpha: f64) -> SpectralField {
    rhs_with(field, alpha, false)
}

fn rhs_with(field: &SpectralField, alpha: f64, linear_only: bool) -> SpectralField {
    let inner = if linear_only {
        field.clone()
    } else {
        field.axpy(0.5, &nonlinear_term(field))
    };
    apply_phi(&inner, alpha).scale(-1.0)
}

/// `max_j |φ(ξ_j)|` over the grid.
pub fn max_phi(grid: &Grid, alpha: f64) -> f64 {
    grid.wavenumbers()
        .into_iter()
        .map(|xi| phi_symbol(xi, alpha).norm())
        .fold(0.0, f64::max)
}

/// One classical RK4 step.
pub fn step_rk4(field: &SpectralField, dt: f64, alpha: f64) -> SpectralField {
    step_rk4_with(field, dt, alpha, false)
}

pub fn step_rk4_with(
    field: &SpectralField,
    dt: f64,
    alpha: f64,
    linear_only: bool,
) -> SpectralField {
    if dt == 0.0 {
        return field.clone();
    }
    let k1 = rhs_with(field, alpha, linear_only);
    let k2 = rhs_with(&field.axpy(0.5 * dt, &k1), alpha, linear_only);
    let k3 = rhs_with(&field.axpy(0.5 * dt, &k2), alpha, linear_only);
    let k4 = rhs_with(&field.axpy(dt, &k3), alpha, linear_only);
    let coeffs = field
        .coeffs()
        .iter()
        .zip(k1.coeffs())
        .zip(k2.coeffs())
        .zip(k3.coeffs())
        .zip(k4.coeffs())
        .map(|((((u, a), b), c), d)| u + (a + (b + c) * 2.0 + d) * (dt / 6.0))
        .collect();
    SpectralField::from_coeffs(*field.grid(), coeffs).expect("same grid")
}

fn check_finite(field: &SpectralField, time: f64) -> Result<()> {
    let ok = field
        .coeffs()
        .iter()
        .all(|c| c.re.is_finite() && c.im.is_finite() && c.norm() <= BLOWUP_THRESHOLD);
    if ok {
        Ok(())
    } else {
        Err(Error::BlowupDetected { time })
    }
}

/// Integrate with RK4 from 0 to `params.t_end`, keeping every
/// `sample_every`-th state plus the initial and final ones. A final partial
/// step absorbs any remainder of `t_end / dt`.
pub fn simulate(
    u0: &SpectralField,
    params: &ModelParams,
    weight: &GevreyWeight,
    sample_every: usize,
) -> Result<Trajectory> {
    if u0.grid() != &params.grid {
        return Err(Error::InvalidInput(
            "initial data grid differs from model grid".into(),
        ));
    }
    let sample_every = sample_every.max(1);
    let dt = params.dt;
    let alpha = params.alpha;
    if dt * max_phi(&params.grid, alpha) >= 1.0 {
        warn!(
            "dt·max|φ| = {} >= 1; RK4 accuracy will suffer",
            dt * max_phi(&params.grid, alpha)
        );
    }
    check_finite(u0, 0.0)?;

    let ratio = params.t_end / dt;
    let mut full_steps = (ratio + 1e-9).floor() as usize;
    let mut remainder = params.t_end - full_steps as f64 * dt;
    if remainder < 0.0 {
        full_steps = full_steps.saturating_sub(1);
        remainder = params.t_end - full_steps as f64 * dt;
    }
    let has_tail = remainder > 1e-12 * dt;

    let mut times = vec![0.0];
    let mut states = vec![u0.clone()];
    let mut u = u0.clone();
    for step in 1..=full_steps {
        u = step_rk4_with(&u, dt, alpha, params.linear_only);
        let t = step as f64 * dt;
        check_finite(&u, t)?;
        let last = step == full_steps && !has_tail;
        if step % sample_every == 0 || last {
            times.push(t);
            states.push(u.clone());
        }
    }
    if has_tail {
        u = step_rk4_with(&u, remainder, alpha, params.linear_only);
        check_finite(&u, params.t_end)?;
        times.push(params.t_end);
        states.push(u);
    }
    let norms = par::map_slice(&states, |s| NormReport::compute(s, weight, alpha));
    Ok(Trajectory {
        times,
        states,
        norms,
        params: *params,
    })
}

/// Local lifespan `δ = 1/(8 c ‖Iu₀‖_{H^{α/2}})`; `+inf` for zero data.
pub fn lifespan(u0: &SpectralField, weight: &GevreyWeight, alpha: f64, c: f64) -> Result<f64> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "bilinear constant must be positive, got {c}"
        )));
    }
    let norm = weighted_i_norm(u0, weight, alpha);
    if norm == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(1.0 / (8.0 * c * norm))
}

/// Per-iteration record of the Duhamel fixed-point iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PicardDiagnostics {
    /// `sup_t ‖I(u_{k} - u_{k-1})‖_{H^{α/2}}` for each iteration.
    pub iterate_distances: Vec<f64>,
    /// Largest ratio of consecutive distances.
    pub contraction_factor: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Number of trapezoidal sub-intervals on `[0, δ]`.
    pub nodes: usize,
}

impl Default for PicardOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 100,
            nodes: 64,
        }
    }
}

/// Solve the Duhamel equation
/// `u(t) = S(t)u₀ - ½∫₀ᵗ S(t-τ)φ(D)(u²)(τ) dτ` on `[0, δ]` by Picard
/// iteration, starting from the free evolution. The τ-integral uses the
/// composite trapezoidal rule; `S(t-τ) = S(t)S(-τ)` turns it into a running
/// sum, so an iteration costs O(nodes) transforms.
pub fn picard_solve(
    u0: &SpectralField,
    delta: f64,
    alpha: f64,
    weight: &GevreyWeight,
    opts: &PicardOptions,
) -> Result<(Trajectory, PicardDiagnostics)> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "delta must be positive, got {delta}"
        )));
    }
    if opts.nodes == 0 || opts.max_iter == 0 {
        return Err(Error::InvalidInput(
            "nodes and max_iter must be positive".into(),
        ));
    }
    let m = opts.nodes;
    let h = delta / m as f64;
    let times: Vec<f64> = (0..=m).map(|i| i as f64 * h).collect();
    let free: Vec<SpectralField> = par::map_slice(&times, |&t| semigroup(u0, t, alpha));

    let mut current = free.clone();
    let mut distances = Vec::new();
    let mut converged = false;
    for _ in 0..opts.max_iter {
        // g_i = S(-t_i) φ(D)(u_i²)
        let g: Vec<SpectralField> = par::map_range(m + 1, |i| {
            semigroup(
                &apply_phi(&nonlinear_term(&current[i]), alpha),
                -times[i],
                alpha,
            )
        });
        let mut running = SpectralField::zeros(*u0.grid());
        let mut integrals = Vec::with_capacity(m + 1);
        integrals.push(running.clone());
        for i in 1..=m {
            running = running.axpy(0.5 * h, &g[i - 1]).axpy(0.5 * h, &g[i]);
            integrals.push(running.clone());
        }
        let next: Vec<SpectralField> = par::map_range(m + 1, |i| {
            free[i].axpy(-0.5, &semigroup(&integrals[i], times[i], alpha))
        });
        let gaps = par::map_range(m + 1, |i| {
            weighted_i_norm(&next[i].sub(&current[i]), weight, alpha)
        });
        let d = gaps.into_iter().fold(0.0, f64::max);
        distances.push(d);
        current = next;
        if d < opts.tol {
            converged = true;
            break;
        }
    }

    let contraction_factor = distances
        .windows(2)
        .filter(|w| w[0] > 0.0)
        .map(|w| w[1] / w[0])
        .fold(0.0, f64::max);
    let diagnostics = PicardDiagnostics {
        iterate_distances: distances,
        contraction_factor,
        converged,
    };
    if !converged {
        return Err(Error::NoConvergence {
            iterations: opts.max_iter,
            last_distance: *diagnostics.iterate_distances.last().unwrap_or(&f64::NAN),
            diagnostics: Box::new(diagnostics),
        });
    }
    let norms = par::map_slice(&current, |s| NormReport::compute(s, weight, alpha));
    let params = ModelParams {
        alpha,
        grid: *u0.grid(),
        dt: h,
        t_end: delta,
        linear_only: false,
    };
    Ok((
        Trajectory {
            times,
            states: current,
            norms,
            params,
        },
        diagnostics,
    ))
}

/// `sup_t ‖Iu(t)‖_{H^{α/2}}` along a trajectory.
pub fn sup_i_norm(traj: &Trajectory, weight: &GevreyWeight) -> f64 {
    let alpha = traj.params.alpha;
    par::map_slice(&traj.states, |s| weighted_i_norm(s, weight, alpha))
        .into_iter()
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::initial::InitialData;
    use crate::norms::{h1_invariant, hs_norm};
    use crate::spectral::sample;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn grid(n: usize) -> Grid {
        Grid::new(n, 64.0).unwrap()
    }

    #[test]
    fn zero_field_is_stationary() {
        let g = grid(64);
        let z = SpectralField::zeros(g);
        assert!(nonlinear_term(&z).is_zero());
        assert!(rhs(&z, 2.0).is_zero());
        assert!(step_rk4(&z, 0.1, 2.0).is_zero());
    }

    #[test]
    fn square_of_cosine() {
        let g = grid(64);
        let l = g.domain_length();
        let k = 3;
        let u = sample(&g, |x| (2.0 * PI * k as f64 * x / l).cos());
        let sq = nonlinear_term(&u);
        for idx in 0..64 {
            let j = g.wavenumber_index(idx);
            let c = sq.coeffs()[idx].norm();
            if j == 0 {
                assert!((c - l / 2.0).abs() < 1e-12);
            } else if j.abs() == 2 * k {
                assert!((c - l / 4.0).abs() < 1e-12);
            } else {
                assert!(c < 1e-12, "j = {j}: {c}");
            }
        }
    }

    #[test]
    fn nonlinear_output_is_dealiased() {
        let g = grid(48);
        let u = sample(&g, |x| (x / 3.0).sin().exp());
        let sq = nonlinear_term(&u);
        for idx in 0..48 {
            if g.wavenumber_index(idx).abs() > 16 {
                assert_eq!(sq.coeffs()[idx], Complex64::new(0.0, 0.0));
            }
        }
        sq.check_hermitian().unwrap();
        rhs(&u, 2.0).check_hermitian().unwrap();
    }

    #[test]
    fn linear_flow_is_a_phase_rotation() {
        let g = grid(64);
        let j0 = 4usize;
        let u = SpectralField::from_half_spectrum(g, |j, _| {
            if j == j0 as i64 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::default()
            }
        });
        let dt = 0.02;
        let mut v = u.clone();
        for _ in 0..1000 {
            v = step_rk4_with(&v, dt, 2.0, true);
        }
        let exact = semigroup(&u, 1000.0 * dt, 2.0);
        assert!((v.coeff(j0 as i64).norm() - 1.0).abs() < 1e-10);
        assert!(v.sub(&exact).l2_norm() < 1e-8);
    }

    #[test]
    fn rk4_dt_zero_is_identity() {
        let g = grid(64);
        let u = InitialData::DEFAULT.sample(&g);
        assert_eq!(step_rk4(&u, 0.0, 2.0), u);
    }

    #[test]
    fn rk4_converges_at_fourth_order() {
        let g = grid(128);
        let u0 = InitialData::Gaussian {
            amplitude: 1.0,
            width: 2.0,
        }
        .sample(&g);
        let t_end = 2.0;
        let run = |dt: f64| {
            let steps = (t_end / dt).round() as usize;
            let mut u = u0.clone();
            for _ in 0..steps {
                u = step_rk4(&u, dt, 2.0);
            }
            u
        };
        let dt = 0.2;
        let reference = run(dt / 16.0);
        let e1 = run(dt).sub(&reference).l2_norm();
        let e2 = run(dt / 2.0).sub(&reference).l2_norm();
        let ratio = e1 / e2;
        assert!((12.0..=20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn simulate_zero_horizon_and_partial_step() {
        let g = grid(64);
        let u0 = InitialData::DEFAULT.sample(&g);
        let w = GevreyWeight::cosh(0.0, 0.0);
        let p = ModelParams::new(2.0, g, 0.1, 0.0).unwrap();
        let tr = simulate(&u0, &p, &w, 1).unwrap();
        assert_eq!(tr.times, vec![0.0]);
        let p = ModelParams::new(2.0, g, 0.1, 0.25).unwrap();
        let tr = simulate(&u0, &p, &w, 1).unwrap();
        assert_eq!(tr.times.len(), 4);
        assert!((tr.final_time() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn simulate_detects_blowup() {
        let g = grid(64);
        let mut u0 = InitialData::DEFAULT.sample(&g);
        u0.coeffs_mut()[1] = Complex64::new(f64::NAN, 0.0);
        let p = ModelParams::new(2.0, g, 0.1, 1.0).unwrap();
        let err = simulate(&u0, &p, &GevreyWeight::cosh(0.0, 0.0), 1).unwrap_err();
        assert!(matches!(err, Error::BlowupDetected { .. }));
    }

    #[test]
    fn simulate_conserves_invariants_short_run() {
        let g = grid(128);
        let u0 = InitialData::DEFAULT.sample(&g);
        let p = ModelParams::new(2.0, g, 1e-2, 5.0).unwrap();
        let tr = simulate(&u0, &p, &GevreyWeight::cosh(0.0, 0.0), 50).unwrap();
        let h0 = h1_invariant(&u0);
        for s in &tr.states {
            assert!((h1_invariant(s) - h0).abs() < 1e-8 * h0);
            s.check_hermitian().unwrap();
        }
        // Mass is invariant; the plain L² norm is not (BBM exchanges it with
        // ‖uₓ‖²), which this run makes visible.
        let m0 = u0.coeff(0).re;
        assert!((tr.final_state().coeff(0).re - m0).abs() < 1e-10 * m0.abs());
        let l2_drift = (hs_norm(tr.final_state(), 0.0) / hs_norm(&u0, 0.0) - 1.0).abs();
        assert!(l2_drift > 1e-4);
    }

    #[test]
    fn lifespan_formula() {
        let g = grid(64);
        let z = SpectralField::zeros(g);
        let w = GevreyWeight::cosh(0.1, 0.0);
        assert_eq!(lifespan(&z, &w, 2.0, 1.0).unwrap(), f64::INFINITY);
        assert!(lifespan(&z, &w, 2.0, 0.0).is_err());

        let u = InitialData::DEFAULT.sample(&g);
        let norm = weighted_i_norm(&u, &w, 2.0);
        let unit = u.scale(1.0 / norm);
        assert!((lifespan(&unit, &w, 2.0, 1.0).unwrap() - 0.125).abs() < 1e-14);
        let d1 = lifespan(&u, &w, 2.0, 0.7).unwrap();
        let d2 = lifespan(&u.scale(2.0), &w, 2.0, 0.7).unwrap();
        assert!((d1 / d2 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn picard_zero_data_converges_immediately() {
        let g = grid(64);
        let z = SpectralField::zeros(g);
        let (tr, diag) = picard_solve(
            &z,
            0.5,
            2.0,
            &GevreyWeight::cosh(0.1, 0.0),
            &PicardOptions::default(),
        )
        .unwrap();
        assert!(diag.converged);
        assert_eq!(diag.iterate_distances, vec![0.0]);
        assert!(tr.states.iter().all(|s| s.is_zero()));
    }

    #[test]
    fn picard_matches_rk4_on_short_window() {
        let g = grid(128);
        let u0 = InitialData::DEFAULT.sample(&g);
        let w = GevreyWeight::cosh(0.1, 0.0);
        let delta = 0.1;
        let (tr, diag) = picard_solve(&u0, delta, 2.0, &w, &PicardOptions::default()).unwrap();
        assert!(diag.converged && diag.contraction_factor < 0.5);
        let p = ModelParams::new(2.0, g, delta / 100.0, delta).unwrap();
        let rk = simulate(&u0, &p, &w, 100).unwrap();
        let dist = hs_norm(&tr.final_state().sub(rk.final_state()), 1.0);
        assert!(dist < 1e-5, "{dist}");
    }

    #[test]
    fn picard_reports_non_convergence() {
        let g = grid(64);
        let u0 = InitialData::DEFAULT.sample(&g);
        let opts = PicardOptions {
            tol: 1e-300,
            max_iter: 3,
            nodes: 8,
        };
        match picard_solve(&u0, 0.1, 2.0, &GevreyWeight::cosh(0.0, 0.0), &opts) {
            Err(Error::NoConvergence { diagnostics, .. }) => {
                assert_eq!(diagnostics.iterate_distances.len(), 3);
                assert!(!diagnostics.converged);
            }
            other => panic!("expected NoConvergence, got {other:?}"),
        }
    }
}
