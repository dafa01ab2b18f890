//! Subcommand implementations. Each returns the path of its JSON report.

use std::fs;
use std::path::{Path, PathBuf};

use gevrey_bbm::analytics::calibration::calibrate;
use gevrey_bbm::analytics::defect::{
    defect_rate_both, fit_defect_slope, DefectRate, DEFECT_FLOOR, MIN_SCALING_POINTS,
};
use gevrey_bbm::analytics::radius::RadiusFit;
use gevrey_bbm::analytics::schedule::check_schedule_against;
use gevrey_bbm::analytics::{
    estimate_radius, measure_defect, schedule_sigma, track_radius, trilinear_defect_rate,
    ConservationReport, ScalingFit, ScheduleResult,
};
use gevrey_bbm::evolution::simulate;
use gevrey_bbm::identities::{
    check_fab_bound, fractional_bound_exponents, psi_constant, verify_factor_identity,
    BoundExponents, FabBoundRecord, IdentityReport, TRIAD_SEED,
};
use gevrey_bbm::norms::i_norm;
use gevrey_bbm::{GevreyWeight, ModelParams, NormReport, SpectralField};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Provenance, RunConfig};
use crate::CliError;

#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    #[serde(flatten)]
    provenance: &'a Provenance,
    result: T,
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    #[serde(flatten)]
    provenance: &'a Provenance,
    error: &'a CliError,
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::io(&format!("cannot create '{}'", dir.display()), e))
}

fn write_json<T: Serialize>(
    path: &Path,
    provenance: &Provenance,
    result: T,
) -> Result<(), CliError> {
    let report = Report { provenance, result };
    let mut text = serde_json::to_string_pretty(&report)
        .map_err(|e| CliError::config(format!("cannot serialize report: {e}")))?;
    text.push('\n');
    fs::write(path, text)
        .map_err(|e| CliError::io(&format!("cannot write '{}'", path.display()), e))
}

/// Run `body`; on failure also write `<command>.error.json` next to the
/// regular outputs.
fn guarded<F>(command: &str, cfg: &RunConfig, body: F) -> Result<PathBuf, CliError>
where
    F: FnOnce(&Provenance, &Path) -> Result<PathBuf, CliError>,
{
    let provenance = Provenance::new(command, cfg)?;
    let dir = cfg.output_dir();
    ensure_dir(&dir)?;
    let outcome = body(&provenance, &dir);
    if let Err(e) = &outcome {
        if e.code != crate::exit::CONFIG {
            let path = dir.join(format!("{command}.error.json"));
            let mut text = serde_json::to_string_pretty(&ErrorReport {
                provenance: &provenance,
                error: e,
            })
            .unwrap_or_default();
            text.push('\n');
            let _ = fs::write(path, text);
        }
    }
    outcome
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>, CliError> {
    csv::Writer::from_path(path)
        .map_err(|e| CliError::config(format!("cannot write '{}': {e}", path.display())))
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::config(format!("csv output failed: {e}"))
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

/// Column order of `simulate.csv`.
pub const SIMULATE_HEADER: [&str; 6] = ["t", "l2", "h1", "energy", "h1_invariant", "sigma_est"];

#[derive(Serialize)]
struct SimulateSummary {
    samples: usize,
    final_time: f64,
    initial: NormReport,
    final_norms: NormReport,
    h1_invariant_drift: f64,
    l2_drift: f64,
    csv: String,
}

pub fn cmd_simulate(cfg: &RunConfig) -> Result<PathBuf, CliError> {
    guarded("simulate", cfg, |prov, dir| {
        let params = cfg.model()?;
        let weight = cfg.weight()?;
        let u0 = cfg.initial()?.sample(&params.grid);
        let traj = simulate(&u0, &params, &weight, cfg.usize("sample_every")?)?;
        let (lo, hi) = match cfg.band_policy()? {
            gevrey_bbm::analytics::BandPolicy::Fixed { xi_lo, xi_hi } => (xi_lo, xi_hi),
            gevrey_bbm::analytics::BandPolicy::Adaptive => (0.0, f64::INFINITY),
        };
        let floor = cfg.noise_floor()?;
        let csv_path = dir.join("simulate.csv");
        let mut w = csv_writer(&csv_path)?;
        w.write_record(SIMULATE_HEADER).map_err(csv_err)?;
        for ((t, n), s) in traj.times.iter().zip(&traj.norms).zip(&traj.states) {
            let sigma = estimate_radius(s, lo, hi, floor).ok().map(|r| r.sigma_est);
            w.write_record([
                format!("{t:e}"),
                format!("{:e}", n.l2),
                format!("{:e}", n.h1),
                format!("{:e}", n.energy),
                format!("{:e}", n.h1_invariant),
                opt(sigma),
            ])
            .map_err(csv_err)?;
        }
        w.flush().map_err(|e| CliError::io("csv flush", e))?;
        let first = traj.norms[0];
        let last = *traj.norms.last().expect("nonempty");
        let rel = |a: f64, b: f64| {
            if a == 0.0 {
                (b - a).abs()
            } else {
                (b - a).abs() / a
            }
        };
        let summary = SimulateSummary {
            samples: traj.len(),
            final_time: traj.final_time(),
            initial: first,
            final_norms: last,
            h1_invariant_drift: rel(first.h1_invariant, last.h1_invariant),
            l2_drift: rel(first.l2, last.l2),
            csv: "simulate.csv".into(),
        };
        let path = dir.join("simulate.json");
        write_json(&path, prov, summary)?;
        Ok(path)
    })
}

#[derive(Serialize)]
struct IdentitiesSummary {
    factorization: IdentityReport,
    fab_bound: Vec<FabBoundRecord>,
    /// Largest over smallest `max_ratio` across the sampled σ.
    fab_spread: f64,
    psi_constant: f64,
    triad_seed: u64,
    exponents: BoundExponents,
}

pub fn cmd_verify_identities(cfg: &RunConfig) -> Result<PathBuf, CliError> {
    guarded("verify-identities", cfg, |prov, dir| {
        let k_max = cfg.usize("k_max")? as u32;
        let range = cfg.u64("coordinate_range")? as i64;
        let factorization = verify_factor_identity(k_max, range)?;
        let samples = cfg.usize("fab_samples")?;
        let triad_range = cfg.f64("triad_range")?;
        let fab_bound = cfg
            .list("fab_sigmas")?
            .into_iter()
            .map(|s| check_fab_bound(samples, s, TRIAD_SEED, triad_range))
            .collect::<gevrey_bbm::Result<Vec<_>>>()?;
        let hi = fab_bound.iter().map(|r| r.max_ratio).fold(0.0, f64::max);
        let lo = fab_bound
            .iter()
            .map(|r| r.max_ratio)
            .fold(f64::INFINITY, f64::min);
        let summary = IdentitiesSummary {
            factorization,
            fab_spread: if fab_bound.is_empty() { 1.0 } else { hi / lo },
            fab_bound,
            psi_constant: psi_constant(samples, TRIAD_SEED, triad_range),
            triad_seed: TRIAD_SEED,
            exponents: fractional_bound_exponents(cfg.f64("alpha")?)?,
        };
        let path = dir.join("verify-identities.json");
        write_json(&path, prov, summary)?;
        Ok(path)
    })
}

#[derive(Serialize)]
struct ConservationEntry {
    report: ConservationReport,
    initial_rate: DefectRate,
}

#[derive(Serialize)]
struct ConservationSummary {
    c1: f64,
    c2: f64,
    delta: f64,
    entries: Vec<ConservationEntry>,
    scaling: Option<ScalingFit>,
    all_bounds_satisfied: bool,
}

fn resolve_delta(
    cfg: &RunConfig,
    u0: &SpectralField,
    cal: &gevrey_bbm::analytics::Calibration,
) -> Result<f64, CliError> {
    match cfg.auto_f64("delta")? {
        Some(d) => Ok(d),
        None => {
            let d = cal.delta_for(u0)?;
            if d.is_finite() {
                Ok(d)
            } else {
                Err(CliError::config(
                    "zero initial data has no finite lifespan; set delta",
                ))
            }
        }
    }
}

pub fn cmd_conservation(cfg: &RunConfig) -> Result<PathBuf, CliError> {
    guarded("conservation", cfg, |prov, dir| {
        let params = cfg.model()?;
        let cal = cfg.calibration(params.alpha)?;
        let u0 = cfg.initial()?.sample(&params.grid);
        let delta = resolve_delta(cfg, &u0, &cal)?;
        let sigmas = cfg.list("sigma_list")?;
        let mut entries = Vec::with_capacity(sigmas.len());
        for &s in &sigmas {
            trilinear_defect_rate(&u0, s, params.alpha)?;
            let initial_rate = defect_rate_both(&u0, s)?;
            let report = measure_defect(&u0, s, delta, &params, cal.c2)?;
            entries.push(ConservationEntry {
                report,
                initial_rate,
            });
        }
        let positive = sigmas.iter().filter(|&&s| s > 0.0).count();
        let scaling = if positive >= MIN_SCALING_POINTS {
            let floor = entries
                .iter()
                .map(|e| DEFECT_FLOOR * e.report.energy0)
                .fold(0.0, f64::max);
            let pts: Vec<(f64, f64)> = entries
                .iter()
                .map(|e| (e.report.sigma, e.report.defect))
                .collect();
            Some(fit_defect_slope(&pts, floor, params.alpha)?)
        } else {
            None
        };

        let csv_path = dir.join("conservation.csv");
        let mut w = csv_writer(&csv_path)?;
        w.write_record([
            "sigma",
            "delta",
            "defect",
            "predicted_bound",
            "bound_satisfied",
            "energy0",
        ])
        .map_err(csv_err)?;
        for e in &entries {
            let r = &e.report;
            w.write_record([
                format!("{:e}", r.sigma),
                format!("{:e}", r.delta),
                format!("{:e}", r.defect),
                format!("{:e}", r.predicted_bound),
                r.bound_satisfied.to_string(),
                format!("{:e}", r.energy0),
            ])
            .map_err(csv_err)?;
        }
        w.flush().map_err(|e| CliError::io("csv flush", e))?;

        let summary = ConservationSummary {
            c1: cal.c1,
            c2: cal.c2,
            delta,
            all_bounds_satisfied: entries.iter().all(|e| e.report.bound_satisfied),
            entries,
            scaling,
        };
        let path = dir.join("conservation.json");
        write_json(&path, prov, summary)?;
        Ok(path)
    })
}

pub fn cmd_radius(cfg: &RunConfig) -> Result<PathBuf, CliError> {
    guarded("radius", cfg, |prov, dir| {
        let params = cfg.model()?;
        let u0 = cfg.initial()?.sample(&params.grid);
        let traj = simulate(&u0, &params, &cfg.weight()?, cfg.usize("sample_every")?)?;
        let fit: RadiusFit =
            track_radius(&traj, cfg.band_policy()?, cfg.noise_floor()?, cfg.t_min()?)?;
        let csv_path = dir.join("radius.csv");
        let mut w = csv_writer(&csv_path)?;
        w.write_record([
            "t",
            "sigma_est",
            "fit_r2",
            "accepted",
            "lower_bound",
            "bound_ok",
        ])
        .map_err(csv_err)?;
        for s in &fit.samples {
            w.write_record([
                format!("{:e}", s.t),
                opt(s.sigma_est),
                opt(s.fit_r2),
                s.accepted.to_string(),
                opt(s.lower_bound),
                s.bound_ok.map(|b| b.to_string()).unwrap_or_default(),
            ])
            .map_err(csv_err)?;
        }
        w.flush().map_err(|e| CliError::io("csv flush", e))?;
        let path = dir.join("radius.json");
        write_json(&path, prov, fit)?;
        Ok(path)
    })
}

#[derive(Serialize)]
struct StaircasePoint {
    horizon_t: f64,
    n_steps: u64,
    sigma_assigned: f64,
}

#[derive(Serialize)]
struct ScheduleSummary {
    schedule: ScheduleResult,
    staircase: Vec<StaircasePoint>,
    /// Least-squares slope of ln σ against ln T over the staircase.
    staircase_exponent: Option<f64>,
    inverse_beta: f64,
}

pub fn cmd_schedule(cfg: &RunConfig) -> Result<PathBuf, CliError> {
    guarded("schedule", cfg, |prov, dir| {
        let params = cfg.model()?;
        let alpha = params.alpha;
        let (c1, c2) = match (cfg.auto_f64("c1")?, cfg.auto_f64("c2")?) {
            (Some(a), Some(b)) => (a, b),
            (a, b) => {
                let cal = cfg.calibration(alpha)?;
                (a.unwrap_or(cal.c1), b.unwrap_or(cal.c2))
            }
        };
        let sigma0 = cfg.f64("sigma0")?;
        let u0 = cfg.initial()?.sample(&params.grid);
        let norm = i_norm(&u0, sigma0, alpha);
        let horizon = cfg.f64("horizon")?;
        let mut schedule = schedule_sigma(horizon, sigma0, c1, c2, alpha, norm)?;
        if cfg.bool("schedule_simulate")? {
            let p = params.with_t_end(horizon);
            let traj = simulate(
                &u0,
                &p,
                &GevreyWeight::cosh(schedule.sigma_assigned, 0.5 * alpha),
                cfg.usize("sample_every")?,
            )?;
            check_schedule_against(&mut schedule, &traj);
        }
        let staircase = cfg
            .list("horizons")?
            .into_iter()
            .map(|t| {
                schedule_sigma(t, sigma0, c1, c2, alpha, norm).map(|r| StaircasePoint {
                    horizon_t: t,
                    n_steps: r.n_steps,
                    sigma_assigned: r.sigma_assigned,
                })
            })
            .collect::<gevrey_bbm::Result<Vec<_>>>()?;
        let pts: Vec<(f64, f64)> = staircase
            .iter()
            .filter(|p| p.sigma_assigned < sigma0)
            .map(|p| (p.horizon_t, p.sigma_assigned))
            .collect();
        let staircase_exponent = if pts.len() >= 3 {
            let x: Vec<f64> = pts.iter().map(|p| p.0).collect();
            let y: Vec<f64> = pts.iter().map(|p| p.1).collect();
            gevrey_bbm::fit::log_log_slope(&x, &y).ok().map(|f| f.slope)
        } else {
            None
        };
        let summary = ScheduleSummary {
            inverse_beta: 1.0 / schedule.beta,
            schedule,
            staircase,
            staircase_exponent,
        };
        let path = dir.join("schedule.json");
        write_json(&path, prov, summary)?;
        Ok(path)
    })
}

#[derive(Serialize)]
struct SweepTask {
    alpha: f64,
    sigma: f64,
    delta: f64,
    defect: f64,
    predicted_bound: f64,
    bound_satisfied: bool,
    energy0: f64,
    iu0_norm: f64,
}

#[derive(Serialize)]
struct SweepAlpha {
    alpha: f64,
    c1: f64,
    c2: f64,
    delta: f64,
    scaling: Option<ScalingFit>,
    scaling_error: Option<String>,
}

#[derive(Serialize)]
struct SweepSummary {
    jobs: usize,
    tasks: Vec<SweepTask>,
    per_alpha: Vec<SweepAlpha>,
}

/// Defect measurements over the `(α, σ)` grid, run on at most `jobs`
/// threads and merged in grid order.
pub fn cmd_sweep(cfg: &RunConfig) -> Result<PathBuf, CliError> {
    guarded("sweep", cfg, |prov, dir| {
        let base = cfg.model()?;
        let data = cfg.initial()?;
        let u0 = data.sample(&base.grid);
        let jobs = cfg.usize("jobs")?.max(1);
        let alphas = cfg.list("sweep_alphas")?;
        let sigmas = cfg.list("sweep_sigmas")?;
        let mut setups = Vec::new();
        for &a in &alphas {
            let cal = cfg.calibration(a)?;
            let delta = resolve_delta(cfg, &u0, &cal)?;
            let params = ModelParams { alpha: a, ..base };
            setups.push((a, cal, delta, params));
        }
        let tasks: Vec<(usize, f64)> = (0..setups.len())
            .flat_map(|i| sigmas.iter().map(move |&s| (i, s)))
            .collect();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| CliError::config(format!("cannot start worker pool: {e}")))?;
        let results: Vec<gevrey_bbm::Result<ConservationReport>> = pool.install(|| {
            tasks
                .par_iter()
                .map(|&(i, s)| {
                    let (_, cal, delta, params) = &setups[i];
                    measure_defect(&u0, s, *delta, params, cal.c2)
                })
                .collect()
        });
        let mut out = Vec::with_capacity(results.len());
        for r in results {
            let r = r?;
            out.push(SweepTask {
                alpha: r.alpha,
                sigma: r.sigma,
                delta: r.delta,
                defect: r.defect,
                predicted_bound: r.predicted_bound,
                bound_satisfied: r.bound_satisfied,
                energy0: r.energy0,
                iu0_norm: r.iu0_norm,
            });
        }
        let per_alpha = setups
            .iter()
            .map(|(a, cal, delta, _)| {
                let rows: Vec<&SweepTask> = out.iter().filter(|t| t.alpha == *a).collect();
                let floor = rows
                    .iter()
                    .map(|t| DEFECT_FLOOR * t.energy0)
                    .fold(0.0, f64::max);
                let pts: Vec<(f64, f64)> = rows.iter().map(|t| (t.sigma, t.defect)).collect();
                let (scaling, scaling_error) = match fit_defect_slope(&pts, floor, *a) {
                    Ok(f) => (Some(f), None),
                    Err(e) => (None, Some(e.to_string())),
                };
                SweepAlpha {
                    alpha: *a,
                    c1: cal.c1,
                    c2: cal.c2,
                    delta: *delta,
                    scaling,
                    scaling_error,
                }
            })
            .collect();
        let path = dir.join("sweep.json");
        write_json(
            &path,
            prov,
            SweepSummary {
                jobs,
                tasks: out,
                per_alpha,
            },
        )?;
        Ok(path)
    })
}

/// Measure `C₁`, `C₂` for the configured α and grid and write them as a
/// calibration file at `calibration_out`.
pub fn cmd_calibrate(cfg: &RunConfig) -> Result<PathBuf, CliError> {
    guarded("calibrate", cfg, |prov, dir| {
        let params = cfg.model()?;
        let cal = calibrate(
            params.alpha,
            params.grid,
            params.dt,
            cfg.u64("seed")?,
            cfg.usize("bilinear_samples")?,
        )?;
        let out = cfg.resolve(cfg.get("calibration_out"));
        fs::write(&out, cal.to_text())
            .map_err(|e| CliError::io(&format!("cannot write '{}'", out.display()), e))?;
        let path = dir.join("calibrate.json");
        write_json(&path, prov, &cal)?;
        Ok(path)
    })
}
