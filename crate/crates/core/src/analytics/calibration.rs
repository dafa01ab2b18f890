//! Measured constants `C₁` (bilinear estimate, sets the lifespan) and `C₂`
//! (energy defect), stored as flat key = value files.

use serde::{Deserialize, Serialize};

use crate::analytics::bilinear::calibrate_bilinear_constant;
use crate::analytics::defect::measure_defect;
use crate::error::{Error, Result};
use crate::evolution::{lifespan, ModelParams};
use crate::initial::InitialData;
use crate::keyvalue::KeyValues;
use crate::multipliers::GevreyWeight;
use crate::par;
use crate::spectral::Grid;

pub const DEFAULT_SEED: u64 = 20_240_611;
/// Radius at which the lifespan of each calibration datum is computed.
pub const SIGMA_REF: f64 = 0.3;
pub const CALIBRATION_SIGMAS: [f64; 5] = [0.02, 0.05, 0.1, 0.2, 0.4];
pub const BILINEAR_SIGMAS: [f64; 3] = [0.0, 0.1, 0.3];

const FROZEN_ALPHA2: &str = include_str!("../../calibration/alpha2.cal");
const FROZEN_ALPHA3: &str = include_str!("../../calibration/alpha3.cal");

/// Initial data used to measure `C₂`.
pub fn calibration_suite() -> Vec<InitialData> {
    vec![
        InitialData::DEFAULT,
        InitialData::Gaussian {
            amplitude: -0.5,
            width: 3.0,
        },
        InitialData::Gaussian {
            amplitude: 1.0,
            width: 2.0,
        },
        InitialData::Sech2 {
            amplitude: -1.0,
            width: 2.0,
        },
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub alpha: f64,
    pub c1: f64,
    pub c2: f64,
    pub seed: u64,
    pub n_points: usize,
    pub domain_length: f64,
    pub dt: f64,
    pub bilinear_samples: usize,
    pub sigma_ref: f64,
    pub sigma_grid: Vec<f64>,
}

impl Calibration {
    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.n_points, self.domain_length)
    }

    /// Lifespan `1/(8 C₁ ‖I_{σ_ref} u₀‖)` for `u0` under this calibration.
    pub fn delta_for(&self, u0: &crate::spectral::SpectralField) -> Result<f64> {
        lifespan(
            u0,
            &GevreyWeight::cosh(self.sigma_ref, 0.5 * self.alpha),
            self.alpha,
            self.c1,
        )
    }

    pub fn to_text(&self) -> String {
        let mut kv = KeyValues::default();
        let s = "calibration";
        kv.set(s, "alpha", fmt(self.alpha));
        kv.set(s, "c1", fmt(self.c1));
        kv.set(s, "c2", fmt(self.c2));
        kv.set(s, "seed", self.seed.to_string());
        kv.set(s, "n_points", self.n_points.to_string());
        kv.set(s, "domain_length", fmt(self.domain_length));
        kv.set(s, "dt", fmt(self.dt));
        kv.set(s, "bilinear_samples", self.bilinear_samples.to_string());
        kv.set(s, "sigma_ref", fmt(self.sigma_ref));
        kv.set(
            s,
            "sigma_grid",
            self.sigma_grid
                .iter()
                .map(|v| fmt(*v))
                .collect::<Vec<_>>()
                .join(", "),
        );
        format!("# gevrey-bbm calibration constants\n{}", kv.render())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let kv = KeyValues::parse(text)?;
        let cal = Self {
            alpha: kv.require("alpha")?,
            c1: kv.require("c1")?,
            c2: kv.require("c2")?,
            seed: kv.require("seed")?,
            n_points: kv.require("n_points")?,
            domain_length: kv.require("domain_length")?,
            dt: kv.require("dt")?,
            bilinear_samples: kv.require("bilinear_samples")?,
            sigma_ref: kv.require("sigma_ref")?,
            sigma_grid: kv
                .float_list("sigma_grid")?
                .ok_or_else(|| Error::Calibration("missing key 'sigma_grid'".into()))?,
        };
        if !(cal.c1 > 0.0 && cal.c2 > 0.0) {
            return Err(Error::Calibration("constants must be positive".into()));
        }
        Ok(cal)
    }

    /// Shipped constants for α = 2 and α = 3.
    pub fn frozen(alpha: f64) -> Result<Self> {
        let text = if alpha == 2.0 {
            FROZEN_ALPHA2
        } else if alpha == 3.0 {
            FROZEN_ALPHA3
        } else {
            return Err(Error::Calibration(format!(
                "no shipped calibration for alpha = {alpha}; run `gevrey-bbm calibrate`"
            )));
        };
        Self::from_text(text)
    }
}

fn fmt(v: f64) -> String {
    // Shortest representation that round-trips exactly.
    format!("{v:?}")
}

/// Measure both constants.
///
/// `C₁` is the largest bilinear ratio over [`BILINEAR_SIGMAS`]. `C₂` is the
/// largest `defect / (δ σ^β ‖Iu₀‖³)` over the calibration suite and
/// [`CALIBRATION_SIGMAS`], with `δ` the lifespan at [`SIGMA_REF`].
pub fn calibrate(
    alpha: f64,
    grid: Grid,
    dt: f64,
    seed: u64,
    bilinear_samples: usize,
) -> Result<Calibration> {
    let mut c1: f64 = 0.0;
    for &s in &BILINEAR_SIGMAS {
        let w = GevreyWeight::cosh(s, 0.5 * alpha);
        c1 = c1.max(calibrate_bilinear_constant(bilinear_samples, &w, alpha, grid, seed)?.constant);
    }
    let params = ModelParams::new(alpha, grid, dt, 0.0)?;
    let tasks: Vec<(InitialData, f64)> = calibration_suite()
        .into_iter()
        .flat_map(|d| CALIBRATION_SIGMAS.iter().map(move |&s| (d, s)))
        .collect();
    let ratios: Vec<Result<f64>> = par::map_slice(&tasks, |(d, s)| {
        let u0 = d.sample(&grid);
        let delta = lifespan(&u0, &GevreyWeight::cosh(SIGMA_REF, 0.5 * alpha), alpha, c1)?;
        let r = measure_defect(&u0, *s, delta, &params, 1.0)?;
        Ok(r.defect / (delta * s.powf(r.beta) * r.iu0_norm.powi(3)))
    });
    let mut c2: f64 = 0.0;
    for r in ratios {
        c2 = c2.max(r?);
    }
    if !(c1 > 0.0 && c2 > 0.0) {
        return Err(Error::Calibration(format!(
            "degenerate calibration: c1 = {c1}, c2 = {c2}"
        )));
    }
    Ok(Calibration {
        alpha,
        c1,
        c2,
        seed,
        n_points: grid.n_points(),
        domain_length: grid.domain_length(),
        dt,
        bilinear_samples,
        sigma_ref: SIGMA_REF,
        sigma_grid: CALIBRATION_SIGMAS.to_vec(),
    })
}

/// Reference settings behind the shipped files.
pub fn reference_calibration(alpha: f64) -> Result<Calibration> {
    calibrate(alpha, Grid::new(256, 64.0)?, 1e-3, DEFAULT_SEED, 200)
}
