//! Initial-data library and seeded random fields.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{sample, Grid, SpectralField};

/// Centered initial profiles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialData {
    /// `a · exp(-x²/w²)`
    Gaussian { amplitude: f64, width: f64 },
    /// `a · cos(2π m x / L)`
    Cosine { amplitude: f64, mode: u32 },
    /// `a · sech²(x/w)`
    Sech2 { amplitude: f64, width: f64 },
}

impl InitialData {
    /// Depression Gaussian used by every default scenario. Its I-weighted
    /// energy grows on short windows, so `max E - E(0)` is a usable defect.
    pub const DEFAULT: InitialData = InitialData::Gaussian {
        amplitude: -1.0,
        width: 2.0,
    };

    pub fn parse(kind: &str, amplitude: f64, width: f64, mode: u32) -> Result<Self> {
        match kind {
            "gaussian" => Ok(Self::Gaussian { amplitude, width }),
            "cosine" => Ok(Self::Cosine { amplitude, mode }),
            "sech2" => Ok(Self::Sech2 { amplitude, width }),
            other => Err(Error::InvalidInput(format!(
                "unknown initial data kind '{other}' (gaussian|cosine|sech2)"
            ))),
        }
    }

    pub fn sample(&self, grid: &Grid) -> SpectralField {
        let l = grid.domain_length();
        match *self {
            Self::Gaussian { amplitude, width } => {
                sample(grid, |x| amplitude * (-(x / width).powi(2)).exp())
            }
            Self::Cosine { amplitude, mode } => sample(grid, |x| {
                amplitude * (2.0 * std::f64::consts::PI * mode as f64 * x / l).cos()
            }),
            Self::Sech2 { amplitude, width } => sample(grid, |x| {
                let c = (x / width).cosh();
                amplitude / (c * c)
            }),
        }
    }
}

/// Random real field with modes only where `|ξ| <= xi_band`; coefficients
/// are uniform in the unit square scaled by `L/√J` so the physical
/// amplitude stays O(1) independent of the band size `J`.
pub fn random_band_limited<R: Rng + ?Sized>(
    grid: Grid,
    xi_band: f64,
    rng: &mut R,
) -> SpectralField {
    let jmax = ((xi_band * grid.domain_length() / (2.0 * std::f64::consts::PI)).floor() as usize)
        .min(grid.n_points() / 2 - 1)
        .max(1);
    let scale = grid.domain_length() / (jmax as f64).sqrt();
    SpectralField::from_half_spectrum(grid, |j, _| {
        if j as usize > jmax {
            Complex64::default()
        } else if j == 0 {
            Complex64::new(scale * rng.random_range(-1.0..1.0), 0.0)
        } else {
            Complex64::new(
                scale * rng.random_range(-1.0..1.0),
                scale * rng.random_range(-1.0..1.0),
            )
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::inverse_transform;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn profiles_are_centered_and_real() {
        let g = Grid::new(128, 64.0).unwrap();
        for d in [
            InitialData::DEFAULT,
            InitialData::Sech2 {
                amplitude: 1.0,
                width: 2.0,
            },
            InitialData::Cosine {
                amplitude: 1.0,
                mode: 2,
            },
        ] {
            let f = d.sample(&g);
            f.check_hermitian().unwrap();
            let u = inverse_transform(&f).unwrap();
            // x = 0 sits at index n/2; every profile is even about it.
            for k in 1..64 {
                assert!((u[64 + k] - u[64 - k]).abs() < 1e-12);
            }
        }
        assert!(InitialData::parse("box", 1.0, 1.0, 1).is_err());
    }

    #[test]
    fn random_fields_respect_band() {
        let g = Grid::new(128, 64.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let f = random_band_limited(g, 2.0, &mut rng);
        f.check_hermitian().unwrap();
        for (i, c) in f.coeffs().iter().enumerate() {
            if g.xi(i).abs() > 2.0 {
                assert_eq!(c.norm(), 0.0);
            }
        }
        assert!(!f.is_zero());
    }
}
