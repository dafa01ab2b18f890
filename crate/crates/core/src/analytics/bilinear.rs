//! Empirical constant of the bilinear estimate
//! `‖φ(D)I(uv)‖_{H^{α/2}} ≤ C ‖Iu‖_{H^{α/2}} ‖Iv‖_{H^{α/2}}`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::initial::random_band_limited;
use crate::multipliers::{apply_phi, GevreyWeight};
use crate::norms::weighted_i_norm;
use crate::par;
use crate::spectral::{product, Grid, SpectralField};

/// Frequency band of the random pairs. Products stay below the 2/3 cutoff
/// for every grid with `L/n <= 1`, so the ratio does not depend on `n`.
pub const PAIR_BAND: f64 = 1.0;
pub const MIN_SAMPLES: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BilinearCalibration {
    pub constant: f64,
    pub samples: usize,
    pub skipped: usize,
    pub seed: u64,
    pub sigma: f64,
    pub alpha: f64,
    pub n_points: usize,
}

/// `‖φ(D)I(uv)‖ / (‖Iu‖‖Iv‖)`, or `None` if either factor vanishes.
pub fn bilinear_ratio(
    u: &SpectralField,
    v: &SpectralField,
    weight: &GevreyWeight,
    alpha: f64,
) -> Option<f64> {
    let nu = weighted_i_norm(u, weight, alpha);
    let nv = weighted_i_norm(v, weight, alpha);
    if nu == 0.0 || nv == 0.0 {
        return None;
    }
    let top = weighted_i_norm(&apply_phi(&product(u, v), alpha), weight, alpha);
    Some(top / (nu * nv))
}

/// Maximum of [`bilinear_ratio`] over `samples` seeded random pairs.
pub fn calibrate_bilinear_constant(
    samples: usize,
    weight: &GevreyWeight,
    alpha: f64,
    grid: Grid,
    seed: u64,
) -> Result<BilinearCalibration> {
    if samples < MIN_SAMPLES {
        return Err(Error::InvalidInput(format!(
            "need at least {MIN_SAMPLES} samples, got {samples}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs: Vec<(SpectralField, SpectralField)> = (0..samples)
        .map(|_| {
            let u = random_band_limited(grid, PAIR_BAND, &mut rng);
            let v = random_band_limited(grid, PAIR_BAND, &mut rng);
            (u, v)
        })
        .collect();
    let ratios = par::map_slice(&pairs, |(u, v)| bilinear_ratio(u, v, weight, alpha));
    let skipped = ratios.iter().filter(|r| r.is_none()).count();
    let constant = ratios.into_iter().flatten().fold(0.0, f64::max);
    Ok(BilinearCalibration {
        constant,
        samples,
        skipped,
        seed,
        sigma: weight.sigma,
        alpha,
        n_points: grid.n_points(),
    })
}
