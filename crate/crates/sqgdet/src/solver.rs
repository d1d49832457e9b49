//! Time integration of the dissipative SQG equation
//!
//! ```text
//!     d theta / dt + u . grad theta + nu Lambda^alpha theta
//!                                   - epsilon Laplacian theta = f,
//! ```
//!
//! with `u = R_perp theta`, by an integrating-factor Runge-Kutta 4 scheme:
//! in Fourier space the dissipative symbol
//! `D(k) = nu (2 pi |k| / L)^alpha + epsilon (2 pi |k| / L)^2` is removed
//! exactly by the substitution `v = e^{D t} theta_hat`, and classical RK4
//! advances `v` through the nonlinearity and forcing. Dissipation is
//! therefore unconditionally stable at any step size; the step is limited
//! only by the advective CFL condition `dt <= CFL (L/N) / max |u|`.
//!
//! The module also audits the energy identity
//! `d/dt (1/2)||theta||_2^2 = -nu ||Lambda^{alpha/2} theta||_2^2 + <f, theta>`
//! and the L^2 absorbing envelope, and persists checkpoints in a compact
//! binary format with bit-exact round trips.

use std::io::{BufReader, BufWriter, Read as IoRead, Write as IoWrite};
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::field::SpectralField;
use crate::forcing::ForcingSpec;
use crate::grid::Grid;
use crate::operators::{fractional_laplacian, max_speed, nonlinear_term};
use crate::{Result, SqgError};

/// Sup-norm threshold beyond which a run is declared blown up. Relevant for
/// supercritical (`alpha < 1`) experiments, where regularity may genuinely
/// fail; a structured error beats silent garbage.
pub const BLOW_UP_THRESHOLD: f64 = 1e8;

/// Default advective CFL number; the dissipative part is integrated exactly,
/// so only advection limits the step.
pub const DEFAULT_CFL: f64 = 0.5;

/// Steps between CFL re-evaluations (each costs two inverse transforms).
const CFL_CHECK_STRIDE: usize = 10;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverConfig {
    pub grid: Grid,
    /// Dissipation order, in (0, 2].
    pub alpha: f64,
    /// Dissipation coefficient, > 0.
    pub nu: f64,
    /// Extra Laplacian coefficient (vanishing-viscosity regularization), >= 0.
    #[serde(default)]
    pub epsilon: f64,
    pub dt: f64,
    pub t_end: f64,
    #[serde(default)]
    pub forcing: ForcingSpec,
    /// Steps between retained field snapshots (scalar series is per-step).
    pub record_stride: usize,
    /// Seed for any randomized initial data built alongside this config.
    #[serde(default)]
    pub seed: u64,
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if !(self.alpha > 0.0 && self.alpha <= 2.0) {
            problems.push(format!("alpha must lie in (0, 2], got {}", self.alpha));
        }
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            problems.push(format!("nu must be positive and finite, got {}", self.nu));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            problems.push(format!(
                "epsilon must be nonnegative and finite, got {}",
                self.epsilon
            ));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            problems.push(format!("dt must be positive and finite, got {}", self.dt));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            problems.push(format!(
                "t_end must be nonnegative and finite, got {}",
                self.t_end
            ));
        }
        if self.record_stride == 0 {
            problems.push("record_stride must be at least 1".to_string());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(SqgError::Validation(problems.join("; ")))
        }
    }
}

/// Scalar diagnostics recorded at every step.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    /// ||theta||_2
    pub l2: f64,
    /// ||theta||_inf
    pub linf: f64,
    /// ||Lambda^{alpha/2} theta||_2
    pub dissipation_seminorm: f64,
    /// <f, theta>
    pub forcing_power: f64,
}

/// A retained field snapshot.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub t: f64,
    pub field: SpectralField,
}

/// The output of a run: per-step scalar series plus field snapshots every
/// `record_stride` steps (first and last always included). Times are
/// strictly increasing.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub snapshots: Vec<Snapshot>,
}

impl Trajectory {
    pub fn final_field(&self) -> &SpectralField {
        &self.snapshots.last().expect("trajectory is never empty").field
    }

    pub fn final_time(&self) -> f64 {
        self.samples.last().expect("trajectory is never empty").t
    }
}

/// Precomputed integrating-factor stepper for one configuration.
pub struct Stepper {
    grid: Grid,
    dt: f64,
    forcing: SpectralField,
    /// e^{-D dt}
    decay_full: Array2<f64>,
    /// e^{-D dt/2}
    decay_half: Array2<f64>,
}

impl Stepper {
    pub fn new(cfg: &SolverConfig) -> Result<Self> {
        cfg.validate()?;
        let grid = cfg.grid;
        let forcing = cfg.forcing.build(grid)?;
        let n = grid.n();
        let mut decay_full = Array2::zeros((n, n));
        let mut decay_half = Array2::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                let mu = grid.frequency(i, j);
                let d = cfg.nu * mu.powf(cfg.alpha) + cfg.epsilon * mu * mu;
                decay_full[[i, j]] = (-d * cfg.dt).exp();
                decay_half[[i, j]] = (-d * cfg.dt * 0.5).exp();
            }
        }
        Ok(Stepper {
            grid,
            dt: cfg.dt,
            forcing,
            decay_full,
            decay_half,
        })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn forcing(&self) -> &SpectralField {
        &self.forcing
    }

    /// Non-dissipative right-hand side g(theta) = f - u . grad theta.
    fn rhs(&self, theta: &SpectralField) -> SpectralField {
        let mut g = nonlinear_term(theta);
        g.scale(-1.0);
        g.axpy(1.0, &self.forcing);
        g
    }

    fn damp(&self, field: &mut SpectralField, half: bool) {
        let decay = if half { &self.decay_half } else { &self.decay_full };
        field.apply_real_multiplier(|i, j| decay[[i, j]]);
    }

    /// One integrating-factor RK4 step. Zero-mean and Hermitian symmetry are
    /// preserved exactly: every stage is a real-symbol multiplier or a real
    /// linear combination of fields that already satisfy them.
    pub fn step(&self, theta: &SpectralField) -> SpectralField {
        let dt = self.dt;

        let a = self.rhs(theta);

        let mut stage = theta.clone();
        stage.axpy(0.5 * dt, &a);
        self.damp(&mut stage, true); // E2 (theta + dt/2 a)
        let b = self.rhs(&stage);

        let mut stage = theta.clone();
        self.damp(&mut stage, true);
        stage.axpy(0.5 * dt, &b); // E2 theta + dt/2 b
        let c = self.rhs(&stage);

        let mut e2c = c;
        self.damp(&mut e2c, true); // E2 c

        let mut stage = theta.clone();
        self.damp(&mut stage, false);
        stage.axpy(dt, &e2c); // E theta + dt E2 c
        let d = self.rhs(&stage);

        let mut next = theta.clone();
        self.damp(&mut next, false); // E theta
        let mut ea = a;
        self.damp(&mut ea, false);
        next.axpy(dt / 6.0, &ea);
        let mut e2b = b;
        self.damp(&mut e2b, true);
        next.axpy(dt / 3.0, &e2b);
        next.axpy(dt / 3.0, &e2c);
        next.axpy(dt / 6.0, &d);
        next
    }
}

/// One integrating-factor RK4 step of `cfg` applied to `theta`. Convenience
/// wrapper; loops should build a [`Stepper`] once instead.
pub fn step(theta: &SpectralField, cfg: &SolverConfig) -> Result<SpectralField> {
    if theta.grid() != cfg.grid {
        return Err(SqgError::GridMismatch(format!(
            "field grid N = {} does not match config grid N = {}",
            theta.grid().n(),
            cfg.grid.n()
        )));
    }
    Ok(Stepper::new(cfg)?.step(theta))
}

fn sample(t: f64, theta: &SpectralField, forcing: &SpectralField, alpha: f64) -> Sample {
    let phys = theta.to_physical();
    Sample {
        t,
        l2: theta.l2_norm(),
        linf: phys.lp_norm(f64::INFINITY).expect("sup norm is always valid"),
        dissipation_seminorm: fractional_laplacian(theta, 0.5 * alpha).l2_norm(),
        forcing_power: theta
            .l2_inner(forcing)
            .expect("forcing lives on the trajectory's grid"),
    }
}

/// Advance `theta0` to `t_end`, recording scalars every step and snapshots
/// every `record_stride` steps; `observer` sees each retained snapshot. The
/// number of steps is `round(t_end / dt)`, so `t_end` is honored exactly
/// when it is a multiple of `dt`. The initial field is dealiased once up
/// front. Blow-up (`||theta||_inf > 1e8` or non-finite) aborts with a
/// structured error.
pub fn simulate(
    cfg: &SolverConfig,
    theta0: &SpectralField,
    mut observer: impl FnMut(f64, &SpectralField),
) -> Result<Trajectory> {
    let stepper = Stepper::new(cfg)?;
    if theta0.grid() != cfg.grid {
        return Err(SqgError::GridMismatch(format!(
            "initial field grid N = {} does not match config grid N = {}",
            theta0.grid().n(),
            cfg.grid.n()
        )));
    }
    let steps = (cfg.t_end / cfg.dt).round() as usize;
    let mut theta = theta0.clone();
    theta.dealias();

    let mut samples = Vec::with_capacity(steps + 1);
    let mut snapshots = Vec::new();
    samples.push(sample(0.0, &theta, stepper.forcing(), cfg.alpha));
    snapshots.push(Snapshot {
        t: 0.0,
        field: theta.clone(),
    });
    observer(0.0, &theta);

    let dx = cfg.grid.dx();
    for n in 1..=steps {
        if (n - 1) % CFL_CHECK_STRIDE == 0 {
            let speed = max_speed(&theta);
            if speed > 0.0 && cfg.dt > DEFAULT_CFL * dx / speed {
                log::warn!(
                    "advective CFL exceeded at t = {:.6}: dt = {:.3e} > {:.3e} (max |u| = {:.3e})",
                    (n - 1) as f64 * cfg.dt,
                    cfg.dt,
                    DEFAULT_CFL * dx / speed,
                    speed
                );
            }
        }
        theta = stepper.step(&theta);
        let t = n as f64 * cfg.dt;
        let s = sample(t, &theta, stepper.forcing(), cfg.alpha);
        if !s.linf.is_finite() || s.linf > BLOW_UP_THRESHOLD {
            return Err(SqgError::BlowUp {
                t,
                sup_norm: s.linf,
            });
        }
        samples.push(s);
        if n % cfg.record_stride == 0 || n == steps {
            snapshots.push(Snapshot {
                t,
                field: theta.clone(),
            });
            observer(t, &theta);
        }
    }
    Ok(Trajectory { samples, snapshots })
}

/// Per-snapshot verdicts against the L^2 absorbing envelope
///
/// ```text
///     ||theta(t)||_2^2 <= ||theta(0)||_2^2 e^{-nu (2 pi lambda_0)^alpha t}
///         + ||Lambda^{-alpha/2} f||_2^2 / (nu^2 (2 pi lambda_0)^alpha)
///           (1 - e^{-nu (2 pi lambda_0)^alpha t}),    lambda_0 = 1/L.
/// ```
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnvelopeReport {
    /// Asymptotic L^2 radius `R_2 = ||Lambda^{-alpha/2} f||_2 / (nu lambda_0^{alpha/2})`.
    pub r2: f64,
    /// Per-sample: `||theta(t)||_2^2 <= envelope(t) + tol`.
    pub holds: Vec<bool>,
    pub all_hold: bool,
    /// First recorded time from which `||theta||_2 <= R_2 (1 + tol)` holds
    /// for the rest of the run; None if the ball is never entered for good.
    pub entry_time_l2: Option<f64>,
}

pub fn energy_envelope(traj: &Trajectory, cfg: &SolverConfig, tol: f64) -> Result<EnvelopeReport> {
    if traj.samples.is_empty() {
        return Err(SqgError::Validation(
            "energy envelope needs a nonempty trajectory".to_string(),
        ));
    }
    let forcing = cfg.forcing.build(cfg.grid)?;
    let f_neg = fractional_laplacian(&forcing, -0.5 * cfg.alpha).l2_norm();
    let lambda0 = 1.0 / cfg.grid.domain_length();
    let kappa = cfg.nu * (2.0 * std::f64::consts::PI * lambda0).powf(cfg.alpha);
    let r2 = f_neg / (cfg.nu * lambda0.powf(0.5 * cfg.alpha));
    let e0 = traj.samples[0].l2.powi(2);
    let asymptote = f_neg.powi(2) / (cfg.nu * kappa);

    let holds: Vec<bool> = traj
        .samples
        .iter()
        .map(|s| {
            let decay = (-kappa * s.t).exp();
            let envelope = e0 * decay + asymptote * (1.0 - decay);
            s.l2.powi(2) <= envelope + tol
        })
        .collect();
    let all_hold = holds.iter().all(|&h| h);

    // Earliest sample of the trailing run that stays inside the ball.
    let entry_time_l2 = traj
        .samples
        .iter()
        .rev()
        .take_while(|s| s.l2 <= r2 * (1.0 + tol))
        .last()
        .map(|s| s.t);

    Ok(EnvelopeReport {
        r2,
        holds,
        all_hold,
        entry_time_l2,
    })
}

/// Per-interval relative residual of the discrete energy budget
/// `1/2 d||theta||_2^2/dt = -nu ||Lambda^{alpha/2} theta||_2^2 + <f, theta>`,
/// trapezoid-integrated between consecutive recorded samples and reported
/// relative to the dissipation term on the same interval.
pub fn energy_budget_residual(traj: &Trajectory, cfg: &SolverConfig) -> Vec<f64> {
    let mut residuals = Vec::new();
    for pair in traj.samples.windows(2) {
        let (s0, s1) = (&pair[0], &pair[1]);
        let dt = s1.t - s0.t;
        let lhs = 0.5 * (s1.l2.powi(2) - s0.l2.powi(2));
        let dissipation = 0.5
            * dt
            * cfg.nu
            * (s0.dissipation_seminorm.powi(2) + s1.dissipation_seminorm.powi(2));
        let input = 0.5 * dt * (s0.forcing_power + s1.forcing_power);
        let residual = lhs - (input - dissipation);
        if dissipation == 0.0 {
            residuals.push(if residual == 0.0 { 0.0 } else { f64::INFINITY });
        } else {
            residuals.push((residual / dissipation).abs());
        }
    }
    residuals
}

const CHECKPOINT_MAGIC: &[u8; 4] = b"SQGD";
const CHECKPOINT_VERSION: u32 = 1;

/// A persisted solver state.
#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub theta: SpectralField,
    pub alpha: f64,
    pub nu: f64,
    pub t: f64,
}

/// Write `theta` and its run parameters. Layout: magic "SQGD", version u32,
/// N u32, then L, alpha, nu, t as f64, then the half-spectrum
/// (rows i = 0..N, columns j = 0..=N/2) as little-endian (re, im) f64 pairs.
/// The other half is redundant by Hermitian symmetry and is reconstructed
/// exactly on load, so round trips are bit-exact.
pub fn write_checkpoint(path: &Path, cp: &Checkpoint) -> Result<()> {
    let grid = cp.theta.grid();
    let n = grid.n();
    let file = std::fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    w.write_all(CHECKPOINT_MAGIC)?;
    w.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
    w.write_all(&(n as u32).to_le_bytes())?;
    for v in [grid.domain_length(), cp.alpha, cp.nu, cp.t] {
        w.write_all(&v.to_le_bytes())?;
    }
    for i in 0..n {
        for j in 0..=n / 2 {
            let c = cp.theta.coeffs()[[i, j]];
            w.write_all(&c.re.to_le_bytes())?;
            w.write_all(&c.im.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

fn read_u32(r: &mut impl IoRead) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_f64(r: &mut impl IoRead) -> Result<f64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(f64::from_le_bytes(buf))
}

pub fn read_checkpoint(path: &Path) -> Result<Checkpoint> {
    let file = std::fs::File::open(path)?;
    let mut r = BufReader::new(file);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != CHECKPOINT_MAGIC {
        return Err(SqgError::Checkpoint(format!(
            "bad magic {:?}: not a checkpoint file",
            magic
        )));
    }
    let version = read_u32(&mut r)?;
    if version != CHECKPOINT_VERSION {
        return Err(SqgError::Checkpoint(format!(
            "unsupported checkpoint version {version} (expected {CHECKPOINT_VERSION})"
        )));
    }
    let n = read_u32(&mut r)? as usize;
    let l = read_f64(&mut r)?;
    let alpha = read_f64(&mut r)?;
    let nu = read_f64(&mut r)?;
    let t = read_f64(&mut r)?;
    let grid = Grid::new(n, l)
        .map_err(|e| SqgError::Checkpoint(format!("invalid checkpoint geometry: {e}")))?;

    // Fill the stored half verbatim, then complete by conjugate symmetry:
    // for j > N/2, c(i, j) = conj(c((N - i) % N, N - j)).
    let mut coeffs = Array2::from_elem((n, n), num_complex::Complex64::new(0.0, 0.0));
    for i in 0..n {
        for j in 0..=n / 2 {
            let re = read_f64(&mut r)?;
            let im = read_f64(&mut r)?;
            coeffs[[i, j]] = num_complex::Complex64::new(re, im);
        }
    }
    for i in 0..n {
        for j in (n / 2 + 1)..n {
            coeffs[[i, j]] = coeffs[[(n - i) % n, n - j]].conj();
        }
    }
    // For data written by `write_checkpoint` the symmetry projection inside
    // `from_coeffs` is a bit-exact identity: the stored half came from an
    // already-symmetric field, so every pairwise average is (c + c) / 2.
    let theta = SpectralField::from_coeffs(grid, coeffs)?;
    Ok(Checkpoint {
        theta,
        alpha,
        nu,
        t,
    })
}
