//! Uniform N x N collocation grid on the torus `[0, L]^2` and its Fourier
//! lattice. Wavevectors are integer pairs `k = (k1, k2)` with `|k_i| <= N/2`;
//! index `i` of the FFT layout maps to `k_i = i` for `i <= N/2` and `i - N`
//! above. The continuous frequency behind lattice vector `k` is `2 pi k / L`.

use crate::{Result, SqgError};
use serde::{Deserialize, Serialize};

/// Grid geometry: resolution `n` (samples per axis, even, >= 8) and domain
/// side length `l > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    n: usize,
    l: f64,
}

impl Grid {
    pub fn new(n: usize, l: f64) -> Result<Self> {
        if n < 8 || n % 2 != 0 {
            return Err(SqgError::Validation(format!(
                "grid resolution must be even and >= 8, got {n}"
            )));
        }
        if !(l > 0.0) || !l.is_finite() {
            return Err(SqgError::Validation(format!(
                "domain length must be positive and finite, got {l}"
            )));
        }
        Ok(Grid { n, l })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn domain_length(&self) -> f64 {
        self.l
    }

    /// Grid spacing `L / N`.
    pub fn dx(&self) -> f64 {
        self.l / self.n as f64
    }

    /// Signed lattice component for FFT index `i` (in `[-N/2, N/2]`, with the
    /// shared Nyquist index `N/2` reported as `+N/2`).
    pub fn wavenumber(&self, i: usize) -> i64 {
        debug_assert!(i < self.n);
        if i <= self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// Euclidean lattice radius `|k|` for the coefficient at indices `(i, j)`.
    pub fn lattice_radius(&self, i: usize, j: usize) -> f64 {
        let k1 = self.wavenumber(i) as f64;
        let k2 = self.wavenumber(j) as f64;
        k1.hypot(k2)
    }

    /// Continuous frequency magnitude `2 pi |k| / L` at indices `(i, j)`.
    pub fn frequency(&self, i: usize, j: usize) -> f64 {
        2.0 * std::f64::consts::PI * self.lattice_radius(i, j) / self.l
    }

    /// Largest per-axis lattice component kept by the 2/3-rule dealias mask.
    ///
    /// Quadratic products of fields supported on `|k_i| <= kmax` alias only
    /// onto modes that the mask removes; `floor((N - 1) / 3)` keeps that
    /// property for every `N` (it equals `floor(N / 3)` unless `3 | N`, where
    /// the conventional cutoff would leak the extreme mode pair back in).
    pub fn dealias_kmax(&self) -> i64 {
        ((self.n - 1) / 3) as i64
    }

    /// Whether the mode at `(i, j)` survives dealiasing.
    pub fn dealias_keep(&self, i: usize, j: usize) -> bool {
        let kmax = self.dealias_kmax();
        self.wavenumber(i).abs() <= kmax && self.wavenumber(j).abs() <= kmax
    }

    /// Largest lattice radius present on the grid, `sqrt(2) * N / 2`.
    pub fn max_lattice_radius(&self) -> f64 {
        let half = self.n as f64 / 2.0;
        half.hypot(half)
    }

    /// FFT index pair of the Hermitian partner `-k` of the mode at `(i, j)`.
    pub fn conjugate_index(&self, i: usize, j: usize) -> (usize, usize) {
        ((self.n - i) % self.n, (self.n - j) % self.n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wavenumber_layout_round_trips() {
        let g = Grid::new(8, 1.0).unwrap();
        let ks: Vec<i64> = (0..8).map(|i| g.wavenumber(i)).collect();
        assert_eq!(ks, vec![0, 1, 2, 3, 4, -3, -2, -1]);
    }

    #[test]
    fn dealias_cutoff_matches_two_thirds_rule() {
        // Power-of-two resolutions agree with floor(N/3); multiples of three
        // tighten by one so the extreme product mode cannot alias back.
        assert_eq!(Grid::new(64, 1.0).unwrap().dealias_kmax(), 21);
        assert_eq!(Grid::new(128, 1.0).unwrap().dealias_kmax(), 42);
        assert_eq!(Grid::new(256, 1.0).unwrap().dealias_kmax(), 85);
        assert_eq!(Grid::new(96, 1.0).unwrap().dealias_kmax(), 31);
    }

    #[test]
    fn rejects_bad_geometry() {
        assert!(Grid::new(7, 1.0).is_err());
        assert!(Grid::new(0, 1.0).is_err());
        assert!(Grid::new(64, 0.0).is_err());
        assert!(Grid::new(64, f64::NAN).is_err());
    }

    #[test]
    fn conjugate_index_is_an_involution() {
        let g = Grid::new(16, 2.0).unwrap();
        for i in 0..16 {
            for j in 0..16 {
                let (ci, cj) = g.conjugate_index(i, j);
                assert_eq!(g.conjugate_index(ci, cj), (i, j));
            }
        }
    }
}
