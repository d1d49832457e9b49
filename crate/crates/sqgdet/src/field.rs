//! Spectral and physical representations of real scalar fields on the torus.
//!
//! A [`SpectralField`] stores the full `N x N` array of Fourier-series
//! coefficients `theta_hat(k)` in FFT index order, normalized so that
//!
//! ```text
//!     theta(x) = sum_k theta_hat(k) exp(i 2 pi k . x / L).
//! ```
//!
//! Real fields are kept real through exact Hermitian symmetry
//! `theta_hat(-k) = conj(theta_hat(k))`, enforced on construction together
//! with a zero `k = 0` coefficient (all fields are zero-mean by contract).
//! With this normalization Parseval reads
//! `(L/N)^2 sum_x |theta(x)|^2 = L^2 sum_k |theta_hat(k)|^2`.

use crate::fft::fft2_inplace;
use crate::grid::Grid;
use crate::{Result, SqgError};
use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

/// Fourier-side view of a real zero-mean scalar field.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Array2<Complex64>,
}

/// Collocation samples `theta(x_ij)` at `x_ij = (i, j) * L / N`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalField {
    grid: Grid,
    values: Array2<f64>,
}

impl SpectralField {
    pub fn zero(grid: Grid) -> Self {
        let n = grid.n();
        SpectralField {
            grid,
            coeffs: Array2::zeros((n, n)),
        }
    }

    /// Wraps a raw coefficient array, projecting onto the Hermitian subspace
    /// (`c(k) <- (c(k) + conj(c(-k))) / 2`) and zeroing the mean mode.
    pub fn from_coeffs(grid: Grid, coeffs: Array2<Complex64>) -> Result<Self> {
        if coeffs.dim() != (grid.n(), grid.n()) {
            return Err(SqgError::GridMismatch(format!(
                "coefficient array {:?} does not match grid {}^2",
                coeffs.dim(),
                grid.n()
            )));
        }
        let mut field = SpectralField { grid, coeffs };
        field.enforce_real_invariants();
        Ok(field)
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn coeffs(&self) -> &Array2<Complex64> {
        &self.coeffs
    }

    /// Coefficient at lattice vector `k = (k1, k2)`, `|k_i| <= N/2`.
    pub fn coeff(&self, k1: i64, k2: i64) -> Complex64 {
        let (i, j) = self.index_of(k1, k2);
        self.coeffs[(i, j)]
    }

    /// Sets the conjugate pair `(k, -k)` so the field stays real:
    /// `theta_hat(k) = value`, `theta_hat(-k) = conj(value)`.
    pub fn set_mode(&mut self, k1: i64, k2: i64, value: Complex64) {
        assert!(
            k1 != 0 || k2 != 0,
            "the k = 0 coefficient is pinned to zero for zero-mean fields"
        );
        let (i, j) = self.index_of(k1, k2);
        let (ci, cj) = self.grid.conjugate_index(i, j);
        self.coeffs[(i, j)] = value;
        if (ci, cj) != (i, j) {
            self.coeffs[(ci, cj)] = value.conj();
        } else {
            // Self-conjugate (Nyquist) sites must carry real data.
            self.coeffs[(i, j)] = Complex64::new(value.re, 0.0);
        }
    }

    fn index_of(&self, k1: i64, k2: i64) -> (usize, usize) {
        let n = self.grid.n() as i64;
        assert!(
            k1.abs() <= n / 2 && k2.abs() <= n / 2,
            "lattice vector ({k1}, {k2}) outside grid with N = {n}"
        );
        (k1.rem_euclid(n) as usize, k2.rem_euclid(n) as usize)
    }

    /// Projects onto Hermitian symmetry and zeroes the mean. Idempotent; the
    /// projection is exact for coefficients that already satisfy it.
    pub fn enforce_real_invariants(&mut self) {
        let n = self.grid.n();
        for i in 0..n {
            for j in 0..n {
                let (ci, cj) = self.grid.conjugate_index(i, j);
                if (ci, cj) < (i, j) {
                    continue; // handled when the partner was visited
                }
                if (ci, cj) == (i, j) {
                    self.coeffs[(i, j)].im = 0.0;
                } else {
                    let a = self.coeffs[(i, j)];
                    let b = self.coeffs[(ci, cj)];
                    let sym = 0.5 * (a + b.conj());
                    self.coeffs[(i, j)] = sym;
                    self.coeffs[(ci, cj)] = sym.conj();
                }
            }
        }
        self.coeffs[(0, 0)] = Complex64::new(0.0, 0.0);
    }

    /// Largest Hermitian-symmetry violation `max_k |c(k) - conj(c(-k))|`,
    /// for diagnostics and tests.
    pub fn hermitian_error(&self) -> f64 {
        let n = self.grid.n();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let (ci, cj) = self.grid.conjugate_index(i, j);
                let err = (self.coeffs[(i, j)] - self.coeffs[(ci, cj)].conj()).norm();
                worst = worst.max(err);
            }
        }
        worst
    }

    /// Applies a real multiplier `m(i, j)` to every coefficient in place.
    /// Radial multipliers (functions of `|k|`) preserve Hermitian symmetry.
    pub fn apply_real_multiplier(&mut self, m: impl Fn(usize, usize) -> f64) {
        let n = self.grid.n();
        for i in 0..n {
            for j in 0..n {
                let w = m(i, j);
                self.coeffs[(i, j)] *= w;
            }
        }
    }

    /// Zeroes every mode with a per-axis component beyond the 2/3-rule cutoff.
    pub fn dealias(&mut self) {
        let grid = self.grid;
        self.apply_real_multiplier(|i, j| if grid.dealias_keep(i, j) { 1.0 } else { 0.0 });
    }

    /// Inverse transform to collocation samples. The imaginary residue of the
    /// unnormalized inverse DFT is round-off for Hermitian input and is
    /// discarded.
    pub fn to_physical(&self) -> PhysicalField {
        let n = self.grid.n();
        let mut buf: Vec<Complex64> = self.coeffs.iter().copied().collect();
        fft2_inplace(&mut buf, n, false);
        let values = Array2::from_shape_vec((n, n), buf.iter().map(|c| c.re).collect())
            .expect("shape preserved by transform");
        PhysicalField {
            grid: self.grid,
            values,
        }
    }

    /// `L^2(T^2)` norm via Parseval, `L * sqrt(sum_k |c(k)|^2)`. No transform
    /// is needed, which keeps per-step diagnostics cheap.
    pub fn l2_norm(&self) -> f64 {
        let sum: f64 = self.coeffs.iter().map(|c| c.norm_sqr()).sum();
        self.grid.domain_length() * sum.sqrt()
    }

    /// `L^2` inner product `<self, other> = L^2 sum_k Re(a(k) conj(b(k)))`.
    pub fn l2_inner(&self, other: &SpectralField) -> Result<f64> {
        if self.grid != other.grid {
            return Err(SqgError::GridMismatch(
                "inner product of fields on different grids".into(),
            ));
        }
        let sum: f64 = self
            .coeffs
            .iter()
            .zip(other.coeffs.iter())
            .map(|(a, b)| (a * b.conj()).re)
            .sum();
        Ok(self.grid.domain_length().powi(2) * sum)
    }

    /// Elementwise linear combination `self + scale * other`.
    pub fn axpy(&mut self, scale: f64, other: &SpectralField) {
        debug_assert_eq!(self.grid, other.grid);
        self.coeffs.zip_mut_with(&other.coeffs, |a, b| {
            *a += scale * b;
        });
    }

    pub fn scale(&mut self, s: f64) {
        self.coeffs.mapv_inplace(|c| c * s);
    }

    /// Zero-mean random field with independent Gaussian mode amplitudes on
    /// lattice radii `kmin <= |k| <= kmax` (intersected with the dealias
    /// region), rescaled so that the physical root-mean-square value
    /// `||theta||_2 / L` equals `rms`. Deterministic for a given RNG state.
    pub fn random_band(
        grid: Grid,
        kmin: f64,
        kmax: f64,
        rms: f64,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        if !(kmin >= 0.0 && kmax >= kmin) {
            return Err(SqgError::Validation(format!(
                "random band requires 0 <= kmin <= kmax, got [{kmin}, {kmax}]"
            )));
        }
        let mut field = SpectralField::zero(grid);
        let half = grid.dealias_kmax();
        let mut populated = false;
        for k1 in -half..=half {
            for k2 in -half..=half {
                // One draw per conjugate pair: canonical representative has
                // k1 > 0, or k1 == 0 and k2 > 0.
                if !(k1 > 0 || (k1 == 0 && k2 > 0)) {
                    continue;
                }
                let radius = ((k1 * k1 + k2 * k2) as f64).sqrt();
                if radius < kmin || radius > kmax {
                    continue;
                }
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                field.set_mode(k1, k2, Complex64::new(re, im) * 0.5f64.sqrt());
                populated = true;
            }
        }
        if populated && rms > 0.0 {
            let current = field.l2_norm() / grid.domain_length();
            if current > 0.0 {
                field.scale(rms / current);
            }
        }
        Ok(field)
    }
}

impl PhysicalField {
    pub fn from_values(grid: Grid, values: Array2<f64>) -> Result<Self> {
        if values.dim() != (grid.n(), grid.n()) {
            return Err(SqgError::GridMismatch(format!(
                "value array {:?} does not match grid {}^2",
                values.dim(),
                grid.n()
            )));
        }
        Ok(PhysicalField { grid, values })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut Array2<f64> {
        &mut self.values
    }

    /// Forward transform to series coefficients (forward DFT scaled by
    /// `1/N^2`), projecting away the round-off Hermitian violation and the
    /// mean mode.
    pub fn to_spectral(&self) -> SpectralField {
        let n = self.grid.n();
        let mut buf: Vec<Complex64> = self
            .values
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect();
        fft2_inplace(&mut buf, n, true);
        let scale = 1.0 / (n * n) as f64;
        let coeffs = Array2::from_shape_vec((n, n), buf.into_iter().map(|c| c * scale).collect())
            .expect("shape preserved by transform");
        let mut field = SpectralField {
            grid: self.grid,
            coeffs,
        };
        field.enforce_real_invariants();
        field
    }

    /// Quadrature mean `(1/N^2) sum_x theta(x)`.
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / (self.grid.n() * self.grid.n()) as f64
    }

    /// Discrete `L^p(T^2)` norm `((L/N)^2 sum_x |theta(x)|^p)^{1/p}` for
    /// `1 <= p <= infinity` (pass `f64::INFINITY` for the sup norm). The sum
    /// is evaluated in max-scaled form so large `p` neither overflows nor
    /// underflows.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        if !(p >= 1.0) {
            return Err(SqgError::Validation(format!(
                "lp_norm requires p >= 1, got {p}"
            )));
        }
        let peak = self.values.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        if p.is_infinite() || peak == 0.0 {
            return Ok(peak);
        }
        let sum: f64 = self
            .values
            .iter()
            .map(|&v| (v.abs() / peak).powf(p))
            .sum();
        let cell = self.grid.dx();
        Ok(peak * sum.powf(1.0 / p) * cell.powf(2.0 / p))
    }

    /// Quadrature inner product `(L/N)^2 sum_x a(x) b(x)`.
    pub fn l2_inner(&self, other: &PhysicalField) -> Result<f64> {
        if self.grid != other.grid {
            return Err(SqgError::GridMismatch(
                "inner product of fields on different grids".into(),
            ));
        }
        let sum: f64 = self
            .values
            .iter()
            .zip(other.values.iter())
            .map(|(a, b)| a * b)
            .sum();
        Ok(self.grid.dx().powi(2) * sum)
    }
}
