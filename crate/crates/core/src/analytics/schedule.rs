//! Choice of a uniform radius for the iterated local theory on `[0, T]`.
//!
//! With `δ = 1/(8C₁‖Iu₀‖)` and `n` such that `T ∈ [nδ, (n+1)δ)`, the radius
//! `σ = min(σ₀, (2C₁/(C₂(n+1)))^{1/β})` keeps
//! `‖Iu₀‖² + (k+1)·8C₂δσ^β‖Iu₀‖³ ≤ 4‖Iu₀‖²` for every `k ≤ n`, which is
//! what the induction needs to keep `‖I_σu‖ ≤ 2‖Iu₀‖` on each window.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::Trajectory;
use crate::identities::fractional_bound_exponents;
use crate::norms::i_norm;

/// At most this many induction steps are listed; longer schedules are
/// subsampled evenly, always keeping the first and last.
pub const MAX_LISTED_CHECKS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepCheck {
    pub k: u64,
    /// `‖Iu₀‖² + (k+1)·8·C₂·δ·σ^β·‖Iu₀‖³`.
    pub bound_lhs: f64,
    /// `4‖Iu₀‖²`.
    pub bound_rhs: f64,
    pub ok: bool,
    /// `sup_{[0,(k+1)δ]} ‖I_σu‖²` along a supplied trajectory.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measured: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measured_ok: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleResult {
    pub horizon_t: f64,
    pub sigma0: f64,
    pub c1: f64,
    pub c2: f64,
    pub alpha: f64,
    pub beta: f64,
    pub iu0_norm: f64,
    pub n_steps: u64,
    pub delta: f64,
    pub sigma_assigned: f64,
    pub per_step_checks: Vec<StepCheck>,
    pub all_ok: bool,
}

/// `min(σ₀, (2C₁/(C₂(n+1)))^{1/β})`.
pub fn sigma_formula(sigma0: f64, c1: f64, c2: f64, n: u64, beta: f64) -> f64 {
    sigma0.min((2.0 * c1 / (c2 * (n as f64 + 1.0))).powf(1.0 / beta))
}

fn listed_steps(n: u64) -> Vec<u64> {
    let count = n + 1;
    if count <= MAX_LISTED_CHECKS as u64 {
        return (0..=n).collect();
    }
    let m = MAX_LISTED_CHECKS as u64 - 1;
    let mut ks: Vec<u64> = (0..=m).map(|i| i * n / m).collect();
    ks.dedup();
    ks
}

/// Schedule for horizon `horizon_t`. `iu0_norm` is `‖I_{σ₀}u₀‖_{H^{α/2}}`.
pub fn schedule_sigma(
    horizon_t: f64,
    sigma0: f64,
    c1: f64,
    c2: f64,
    alpha: f64,
    iu0_norm: f64,
) -> Result<ScheduleResult> {
    for (name, v) in [
        ("T", horizon_t),
        ("sigma0", sigma0),
        ("C1", c1),
        ("C2", c2),
        ("norm", iu0_norm),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "{name} must be positive, got {v}"
            )));
        }
    }
    let beta = fractional_bound_exponents(alpha)?.beta;
    let delta = 1.0 / (8.0 * c1 * iu0_norm);
    let ratio = horizon_t / delta;
    if ratio >= u64::MAX as f64 / 2.0 {
        return Err(Error::InvalidInput(format!("T/δ = {ratio:e} is too large")));
    }
    let n_steps = ratio.floor() as u64;
    let sigma = sigma_formula(sigma0, c1, c2, n_steps, beta);
    let a2 = iu0_norm * iu0_norm;
    let a3 = a2 * iu0_norm;
    let per_step_checks: Vec<StepCheck> = listed_steps(n_steps)
        .into_iter()
        .map(|k| {
            let lhs = a2 + (k as f64 + 1.0) * 8.0 * c2 * delta * sigma.powf(beta) * a3;
            let rhs = 4.0 * a2;
            StepCheck {
                k,
                bound_lhs: lhs,
                bound_rhs: rhs,
                ok: lhs <= rhs * (1.0 + 1e-12),
                measured: None,
                measured_ok: None,
            }
        })
        .collect();
    let all_ok = per_step_checks.iter().all(|c| c.ok);
    Ok(ScheduleResult {
        horizon_t,
        sigma0,
        c1,
        c2,
        alpha,
        beta,
        iu0_norm,
        n_steps,
        delta,
        sigma_assigned: sigma,
        per_step_checks,
        all_ok,
    })
}

/// Attach measured `sup_{[0,(k+1)δ]} ‖I_σu‖²` to each check; a check passes
/// when the measurement does not exceed `bound_lhs`.
pub fn check_schedule_against(result: &mut ScheduleResult, traj: &Trajectory) {
    let sigma = result.sigma_assigned;
    let alpha = result.alpha;
    let sq: Vec<(f64, f64)> = traj
        .times
        .iter()
        .zip(&traj.states)
        .map(|(&t, s)| (t, i_norm(s, sigma, alpha).powi(2)))
        .collect();
    for c in result.per_step_checks.iter_mut() {
        let end = (c.k as f64 + 1.0) * result.delta;
        let covered = traj.final_time() >= end.min(result.horizon_t) - 1e-12;
        if !covered {
            continue;
        }
        let m = sq
            .iter()
            .filter(|(t, _)| *t <= end + 1e-12)
            .map(|p| p.1)
            .fold(0.0, f64::max);
        c.measured = Some(m);
        c.measured_ok = Some(m <= c.bound_lhs * (1.0 + 1e-12));
    }
    result.all_ok = result
        .per_step_checks
        .iter()
        .all(|c| c.ok && c.measured_ok != Some(false));
}
