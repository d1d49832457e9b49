//! Fourier-multiplier operators and the SQG nonlinearity.
//!
//! `Lambda^beta = (-Laplace)^{beta/2}` acts diagonally with symbol
//! `(2 pi |k| / L)^beta`; the Riesz velocity is
//! `u = R^perp(theta) = Lambda^{-1} (-d2 theta, d1 theta)`, i.e.
//! `u_hat(k) = i (-k2, k1) / |k| * theta_hat(k)`, which is divergence-free by
//! construction. The advection term `u . grad(theta)` is evaluated
//! pseudo-spectrally (products on the grid) and dealiased with the 2/3 rule,
//! which makes it exactly energy-neutral for band-limited input.

use crate::field::{PhysicalField, SpectralField};
use crate::{Result, SqgError};
use ndarray::Array2;
use num_complex::Complex64;

/// `Lambda^beta theta`. Negative orders are admissible because the `k = 0`
/// mode is pinned to zero; its multiplier is defined as 0 for every `beta`.
pub fn fractional_laplacian(theta: &SpectralField, beta: f64) -> SpectralField {
    let grid = theta.grid();
    let mut out = theta.clone();
    out.apply_real_multiplier(|i, j| {
        if (i, j) == (0, 0) {
            0.0
        } else {
            grid.frequency(i, j).powf(beta)
        }
    });
    out
}

/// Partial derivative along `axis` (0 or 1), symbol `i 2 pi k_axis / L`.
pub fn derivative(theta: &SpectralField, axis: usize) -> SpectralField {
    assert!(axis < 2, "axis must be 0 or 1");
    let grid = theta.grid();
    let n = grid.n();
    let two_pi_over_l = 2.0 * std::f64::consts::PI / grid.domain_length();
    let mut coeffs = theta.coeffs().clone();
    for i in 0..n {
        for j in 0..n {
            let k = if axis == 0 {
                grid.wavenumber(i)
            } else {
                grid.wavenumber(j)
            } as f64;
            coeffs[(i, j)] *= Complex64::new(0.0, two_pi_over_l * k);
        }
    }
    // The imaginary symbol flips sign with k, so Hermitian symmetry survives;
    // from_coeffs only scrubs round-off.
    SpectralField::from_coeffs(grid, coeffs).expect("same grid")
}

/// Riesz velocity `u = (u1, u2) = R^perp(theta)`:
/// `u1_hat = -i k2 / |k| theta_hat`, `u2_hat = i k1 / |k| theta_hat`.
pub fn riesz_velocity(theta: &SpectralField) -> (SpectralField, SpectralField) {
    let grid = theta.grid();
    let n = grid.n();
    let mut u1 = theta.coeffs().clone();
    let mut u2 = theta.coeffs().clone();
    for i in 0..n {
        for j in 0..n {
            if (i, j) == (0, 0) {
                u1[(0, 0)] = Complex64::new(0.0, 0.0);
                u2[(0, 0)] = Complex64::new(0.0, 0.0);
                continue;
            }
            let k1 = grid.wavenumber(i) as f64;
            let k2 = grid.wavenumber(j) as f64;
            let r = k1.hypot(k2);
            u1[(i, j)] *= Complex64::new(0.0, -k2 / r);
            u2[(i, j)] *= Complex64::new(0.0, k1 / r);
        }
    }
    (
        SpectralField::from_coeffs(grid, u1).expect("same grid"),
        SpectralField::from_coeffs(grid, u2).expect("same grid"),
    )
}

/// Spectral divergence `d1 a + d2 b`, used to audit that the Riesz velocity
/// is solenoidal.
pub fn divergence(a: &SpectralField, b: &SpectralField) -> Result<SpectralField> {
    if a.grid() != b.grid() {
        return Err(SqgError::GridMismatch(
            "divergence of components on different grids".into(),
        ));
    }
    let mut out = derivative(a, 0);
    out.axpy(1.0, &derivative(b, 1));
    Ok(out)
}

/// Pointwise peak speed `max_x |u(x)|` of the Riesz velocity, for CFL audits.
pub fn max_speed(theta: &SpectralField) -> f64 {
    let (u1, u2) = riesz_velocity(theta);
    let u1p = u1.to_physical();
    let u2p = u2.to_physical();
    u1p.values()
        .iter()
        .zip(u2p.values().iter())
        .map(|(a, b)| a.hypot(*b))
        .fold(0.0, f64::max)
}

/// Pseudo-spectral advection term `u . grad(theta)` with `u = R^perp(theta)`,
/// returned in spectral form: products are formed on the grid, transformed
/// back, dealiased (per-axis modes beyond `floor((N-1)/3)` zeroed), and the
/// mean mode is pinned to zero.
pub fn nonlinear_term(theta: &SpectralField) -> SpectralField {
    let (u1, u2) = riesz_velocity(theta);
    let u1p = u1.to_physical();
    let u2p = u2.to_physical();
    let dxp = derivative(theta, 0).to_physical();
    let dyp = derivative(theta, 1).to_physical();

    let n = theta.grid().n();
    let mut values = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            values[(i, j)] =
                u1p.values()[(i, j)] * dxp.values()[(i, j)] + u2p.values()[(i, j)] * dyp.values()[(i, j)];
        }
    }
    let product = PhysicalField::from_values(theta.grid(), values).expect("same grid");
    let mut result = product.to_spectral();
    result.dealias();
    result
}
