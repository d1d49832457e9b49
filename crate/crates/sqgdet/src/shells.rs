//! Littlewood-Paley decomposition on the integer Fourier lattice.
//!
//! The dyadic wavenumbers are `lambda_q = 2^q / L`. A smooth cutoff
//! `chi: [0, inf) -> [0, 1]` with `chi = 1` on `[0, 3/4]` and `chi = 0` on
//! `[1, inf)` generates the shell windows
//!
//! ```text
//!     phi(rho)   = chi(rho / 2) - chi(rho),        supp phi  in (3/4, 2),
//!     phi_q(rho) = phi(2^{-q} rho)  for q >= 0,    phi_{-1} = chi,
//! ```
//!
//! and the shell projection `Delta_q theta` multiplies each coefficient by
//! `phi_q(|k|)` evaluated at the integer lattice radius. The telescoping sum
//! `chi(rho) + sum_{q = 0..Q} phi_q(rho) = chi(2^{-Q-1} rho)` cancels exactly
//! in floating point because every `chi` argument is reproduced bit-for-bit,
//! so the partition of unity holds to machine precision on every lattice
//! point once `Q` clears the grid's top shell.
//!
//! The concrete cutoff is the normalized bump
//! `chi(rho) = g(1 - s) / (g(s) + g(1 - s))` with `s = clamp(4 (rho - 3/4))`
//! and `g(t) = exp(-1/t)` for `t > 0` (0 otherwise): smooth, monotone, and
//! exactly 0/1 outside the transition band.

use crate::field::SpectralField;
use crate::grid::Grid;
use crate::{Result, SqgError};

fn bump(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// Smooth cutoff: 1 on `[0, 3/4]`, 0 on `[1, inf)`, strictly monotone in
/// between.
pub fn chi(rho: f64) -> f64 {
    let s = (4.0 * (rho - 0.75)).clamp(0.0, 1.0);
    if s <= 0.0 {
        1.0
    } else if s >= 1.0 {
        0.0
    } else {
        let rising = bump(s);
        let falling = bump(1.0 - s);
        falling / (rising + falling)
    }
}

/// Shell window `phi_q` at radius `rho`; `q = -1` is the low block `chi`.
/// Arguments are scaled by exact powers of two so sums over consecutive
/// shells telescope without round-off.
pub fn phi_q(q: i32, rho: f64) -> f64 {
    if q == -1 {
        chi(rho)
    } else {
        chi(rho * 2f64.powi(-(q + 1))) - chi(rho * 2f64.powi(-q))
    }
}

/// Dyadic wavenumber `lambda_q = 2^q / L`.
pub fn lambda_q(q: i32, domain_length: f64) -> f64 {
    2f64.powi(q) / domain_length
}

/// Largest shell index with nonempty support on the grid's lattice: the
/// maximal `q >= -1` with `(3/4) 2^q < sqrt(2) N / 2`. Every shell above it
/// is identically zero, and the partition of unity is complete at `q_max`:
/// `sum_{q = -1..q_max} phi_q(rho) = 1` for every lattice radius.
pub fn q_max(grid: &Grid) -> i32 {
    let rho_max = grid.max_lattice_radius();
    let mut q = -1;
    while 0.75 * 2f64.powi(q + 1) < rho_max {
        q += 1;
    }
    q
}

/// Shell projection `Delta_q theta`: multiplies coefficients by
/// `phi_q(|k|)` at the integer lattice radius.
pub fn shell_project(theta: &SpectralField, q: i32) -> SpectralField {
    let grid = theta.grid();
    let mut out = theta.clone();
    out.apply_real_multiplier(|i, j| phi_q(q, grid.lattice_radius(i, j)));
    out
}

/// Low-mode projection `sum_{q = -1..Q} Delta_q theta`, evaluated as the
/// literal multiplier sum (which telescopes to `chi(2^{-Q-1} |k|)` exactly).
/// `Q < -1` yields the zero field.
pub fn low_pass(theta: &SpectralField, q_cut: i32) -> SpectralField {
    let grid = theta.grid();
    let mut out = theta.clone();
    out.apply_real_multiplier(|i, j| {
        let rho = grid.lattice_radius(i, j);
        let mut sum = 0.0;
        for q in -1..=q_cut {
            sum += phi_q(q, rho);
        }
        sum
    });
    out
}

/// All shells of a field, `q = -1 ..= q_max(grid)`.
#[derive(Debug, Clone)]
pub struct ShellSet {
    q_lo: i32,
    shells: Vec<SpectralField>,
}

impl ShellSet {
    pub fn decompose(theta: &SpectralField) -> Self {
        let top = q_max(&theta.grid());
        let shells = (-1..=top).map(|q| shell_project(theta, q)).collect();
        ShellSet { q_lo: -1, shells }
    }

    pub fn q_range(&self) -> std::ops::RangeInclusive<i32> {
        self.q_lo..=(self.q_lo + self.shells.len() as i32 - 1)
    }

    pub fn shell(&self, q: i32) -> &SpectralField {
        let idx = (q - self.q_lo) as usize;
        &self.shells[idx]
    }

    /// Reconstruction `sum_q Delta_q theta`; equals the original field to
    /// round-off by the partition of unity.
    pub fn reconstruct(&self) -> SpectralField {
        let mut sum = self.shells[0].clone();
        for s in &self.shells[1..] {
            sum.axpy(1.0, s);
        }
        sum
    }
}

/// `L^p` norm of a single shell, `|| Delta_q theta ||_p`, via collocation
/// quadrature.
pub fn shell_lp_norm(theta: &SpectralField, q: i32, p: f64) -> Result<f64> {
    shell_project(theta, q).to_physical().lp_norm(p)
}

/// Discrete Besov norm `|| theta ||_{B^0_{l,l}} = (sum_q || Delta_q theta
/// ||_l^l)^{1/l}` over `q = -1 ..= q_max`. The sum is max-scaled so that
/// large `l` (the supercritical exponents reach `2 alpha / (alpha - 1)`)
/// neither overflows nor underflows for small fields.
pub fn besov_norm(theta: &SpectralField, l: f64) -> Result<f64> {
    if !(l >= 1.0) || l.is_infinite() {
        return Err(SqgError::Validation(format!(
            "Besov exponent must satisfy 1 <= l < infinity, got {l}"
        )));
    }
    let top = q_max(&theta.grid());
    let mut norms = Vec::with_capacity((top + 2) as usize);
    for q in -1..=top {
        norms.push(shell_lp_norm(theta, q, l)?);
    }
    let peak = norms.iter().fold(0.0f64, |m, &v| m.max(v));
    if peak == 0.0 {
        return Ok(0.0);
    }
    let sum: f64 = norms.iter().map(|&v| (v / peak).powf(l)).sum();
    Ok(peak * sum.powf(1.0 / l))
}
