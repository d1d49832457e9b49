//! Time-independent, zero-mean forcing fields.
//!
//! A forcing is either a finite list of cosine modes
//! `A cos(2 pi k . x / L + phi)` or a random band-limited field drawn from a
//! seeded generator. Both build a real, zero-mean `SpectralField` supported
//! inside the dealiased band, so the forcing never injects energy into modes
//! the nonlinear term would alias.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::field::SpectralField;
use crate::grid::Grid;
use crate::{Result, SqgError};

/// One cosine component `amplitude * cos(2 pi k . x / L + phase)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForcingMode {
    pub k: [i64; 2],
    pub amplitude: f64,
    pub phase: f64,
}

/// Declarative forcing description; `build` realizes it on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ForcingSpec {
    /// No forcing (f = 0).
    Zero,
    /// Sum of explicit cosine modes.
    Modes { modes: Vec<ForcingMode> },
    /// Random field with prescribed rms, supported on lattice radii in
    /// `[k_min, k_max]`, drawn reproducibly from `seed`.
    RandomBand {
        k_min: f64,
        k_max: f64,
        rms: f64,
        seed: u64,
    },
}

impl Default for ForcingSpec {
    fn default() -> Self {
        ForcingSpec::Zero
    }
}

impl ForcingSpec {
    /// Realize the forcing on `grid`. The result is exactly Hermitian and
    /// zero-mean; modes outside the dealiased band are rejected.
    pub fn build(&self, grid: Grid) -> Result<SpectralField> {
        match self {
            ForcingSpec::Zero => Ok(SpectralField::zero(grid)),
            ForcingSpec::Modes { modes } => {
                let mut f = SpectralField::zero(grid);
                let kmax = grid.dealias_kmax();
                for m in modes {
                    let [k1, k2] = m.k;
                    if k1 == 0 && k2 == 0 {
                        return Err(SqgError::Validation(
                            "forcing must have zero mean: mode k = (0, 0) is not allowed"
                                .to_string(),
                        ));
                    }
                    if k1.abs() > kmax || k2.abs() > kmax {
                        return Err(SqgError::Validation(format!(
                            "forcing mode k = ({k1}, {k2}) lies outside the dealiased band \
                             |k_i| <= {kmax} for N = {}",
                            grid.n()
                        )));
                    }
                    if !(m.amplitude.is_finite() && m.phase.is_finite()) {
                        return Err(SqgError::Validation(format!(
                            "forcing mode k = ({k1}, {k2}) has non-finite amplitude or phase"
                        )));
                    }
                    // A cos(2 pi k.x/L + phi) = (A/2) e^{i phi} e^{i 2 pi k.x/L} + c.c.
                    let half = 0.5 * m.amplitude * Complex64::new(0.0, m.phase).exp();
                    let existing = f.coeff(k1, k2);
                    f.set_mode(k1, k2, existing + half);
                }
                Ok(f)
            }
            ForcingSpec::RandomBand {
                k_min,
                k_max,
                rms,
                seed,
            } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                SpectralField::random_band(grid, *k_min, *k_max, *rms, &mut rng)
            }
        }
    }
}
