//! Master/slave synchronization through low modes.
//!
//! A master trajectory theta_1 evolves freely; a slave theta_2 evolves under
//! the same stepper and forcing but has its modes below a cutoff overwritten
//! by the master's after every step:
//!
//! ```text
//!     theta_2  <-  theta_2 + low_pass(theta_1 - theta_2, Q).
//! ```
//!
//! When Q tracks the measured determining wavenumber of both trajectories,
//! the difference w = theta_1 - theta_2 is predicted to contract like
//! `||w||_{B^0_{l,l}}^l <= ||w(t0)||^l exp(-c nu / L^alpha (t - t0))`, which
//! is what the decay fit extracts: the slope rho of `log ||w||^l` against
//! time and the calibrated rate constant `c = -rho L^alpha / nu`.

use serde::{Deserialize, Serialize};

use crate::determining::{determining_wavenumber, DeterminingParams, WavenumberOutcome};
use crate::field::SpectralField;
use crate::shells::{besov_norm, low_pass};
use crate::solver::{SolverConfig, Stepper, BLOW_UP_THRESHOLD};
use crate::{Result, SqgError};

/// How the slave's low modes are driven.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum CouplingMode {
    /// Q(t) = max of the two measured determining wavenumbers, re-evaluated
    /// every `recompute_stride` steps.
    Measured,
    /// A fixed shell cutoff.
    Fixed { q: i32 },
    /// No slaving — the control experiment.
    Off,
}

/// A synchronization experiment: one solver configuration shared by both
/// trajectories (same grid, nu, alpha, forcing — only the initial conditions
/// differ), the scan parameters, and the coupling policy.
#[derive(Debug, Clone, Serialize)]
pub struct SyncSetup {
    pub solver: SolverConfig,
    pub params: DeterminingParams,
    pub coupling: CouplingMode,
    /// Steps between Q re-evaluations in `Measured` mode. The contraction
    /// argument wants the mode agreement enforced continuously, so 1 is the
    /// default; larger strides trade fidelity for speed and are logged.
    pub recompute_stride: usize,
}

/// One recorded instant of the pair.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SyncSample {
    pub t: f64,
    /// Shell cutoff in force at this step (absent before the first
    /// evaluation and in control runs).
    #[serde(rename = "Q")]
    pub q: Option<i32>,
    /// `||w||_{B^0_{l,l}}` of the difference.
    pub besov: f64,
    /// `||w||_2` of the difference.
    pub l2: f64,
}

/// Fitted contraction of a synchronized pair.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DecayFit {
    /// Least-squares slope of `log ||w||_{B^0_{l,l}}^l` against time.
    pub rho: f64,
    /// `c = -rho L^alpha / nu`.
    pub c_calibrated: f64,
    /// Coefficient of determination of the log-linear fit.
    pub r_squared: f64,
    pub points_used: usize,
    pub window: (f64, f64),
}

/// Difference-norm series of a master/slave run, plus the fit once computed.
#[derive(Debug, Clone, Serialize)]
pub struct SyncTrace {
    pub samples: Vec<SyncSample>,
    pub fit: Option<DecayFit>,
}

/// Overwrite the slave's shells up to and including `q_cut` with the
/// master's: `slave + low_pass(master - slave, q_cut)`. Shells above `q_cut`
/// are untouched; `q_cut < -1` returns the slave unchanged.
pub fn slave_low_modes(
    slave: &SpectralField,
    master: &SpectralField,
    q_cut: i32,
) -> Result<SpectralField> {
    if slave.grid() != master.grid() {
        return Err(SqgError::GridMismatch(format!(
            "slave grid ({} x {}) does not match master grid ({} x {})",
            slave.grid().n(),
            slave.grid().n(),
            master.grid().n(),
            master.grid().n()
        )));
    }
    let mut diff = master.clone();
    diff.axpy(-1.0, slave);
    let mut corrected = slave.clone();
    corrected.axpy(1.0, &low_pass(&diff, q_cut));
    Ok(corrected)
}

fn difference(master: &SpectralField, slave: &SpectralField) -> SpectralField {
    let mut w = master.clone();
    w.axpy(-1.0, slave);
    w
}

fn check_alive(theta: &SpectralField, t: f64) -> Result<()> {
    let l2 = theta.l2_norm();
    if !l2.is_finite() || l2 > BLOW_UP_THRESHOLD {
        let sup = theta.to_physical().lp_norm(f64::INFINITY)?;
        return Err(SqgError::BlowUp { t, sup_norm: sup });
    }
    Ok(())
}

/// Evolve the pair in lock-step and record the difference norms.
///
/// Per step: advance both fields with the shared stepper; in `Measured` mode
/// re-evaluate `Q = max(Lambda_1, Lambda_2)` every `recompute_stride` steps
/// (an `Undefined` scan on either trajectory aborts the run — the scan's
/// finite-capacity contingency); overwrite the slave's low modes with the
/// current Q; record `t`, `Q`, and the Besov/L2 norms of the difference.
pub fn run_synced_pair(
    setup: &SyncSetup,
    master0: &SpectralField,
    slave0: &SpectralField,
) -> Result<SyncTrace> {
    setup.solver.validate()?;
    if setup.recompute_stride == 0 {
        return Err(SqgError::Validation(
            "recompute_stride must be at least 1".into(),
        ));
    }
    if setup.recompute_stride > 1 {
        log::warn!(
            "re-evaluating the slaving cutoff only every {} steps; the contraction \
             hypothesis wants every step",
            setup.recompute_stride
        );
    }
    if master0.grid() != setup.solver.grid || slave0.grid() != setup.solver.grid {
        return Err(SqgError::GridMismatch(
            "initial conditions must live on the solver grid".into(),
        ));
    }
    if setup.params.alpha() != setup.solver.alpha
        || setup.params.nu() != setup.solver.nu
        || setup.params.domain_length() != setup.solver.grid.domain_length()
    {
        return Err(SqgError::Validation(
            "scan parameters must match the solver's alpha, nu, and domain length".into(),
        ));
    }

    let stepper = Stepper::new(&setup.solver)?;
    let steps = (setup.solver.t_end / setup.solver.dt).round() as usize;
    let l = setup.params.l();

    let mut master = master0.clone();
    master.dealias();
    let mut slave = slave0.clone();
    slave.dealias();

    let mut samples = Vec::with_capacity(steps + 1);
    let w0 = difference(&master, &slave);
    samples.push(SyncSample {
        t: 0.0,
        q: None,
        besov: besov_norm(&w0, l)?,
        l2: w0.l2_norm(),
    });

    let mut q_current: Option<i32> = match setup.coupling {
        CouplingMode::Fixed { q } => Some(q),
        _ => None,
    };
    for step in 0..steps {
        let t = (step + 1) as f64 * setup.solver.dt;
        master = stepper.step(&master);
        slave = stepper.step(&slave);
        check_alive(&master, t)?;
        check_alive(&slave, t)?;

        if setup.coupling != CouplingMode::Off {
            if let CouplingMode::Measured = setup.coupling {
                if step % setup.recompute_stride == 0 {
                    let q1 = scan_or_abort(&master, &setup.params, t)?;
                    let q2 = scan_or_abort(&slave, &setup.params, t)?;
                    q_current = Some(q1.max(q2));
                }
            }
            let q = q_current.expect("a cutoff exists whenever slaving is on");
            slave = slave_low_modes(&slave, &master, q)?;
        }

        let w = difference(&master, &slave);
        samples.push(SyncSample {
            t,
            q: q_current,
            besov: besov_norm(&w, l)?,
            l2: w.l2_norm(),
        });
    }
    Ok(SyncTrace { samples, fit: None })
}

fn scan_or_abort(theta: &SpectralField, params: &DeterminingParams, t: f64) -> Result<i32> {
    match determining_wavenumber(theta, params)? {
        WavenumberOutcome::Defined { q, .. } => Ok(q),
        WavenumberOutcome::Undefined {
            q_cap,
            condition1_margin,
            condition2_margin,
        } => Err(SqgError::UndefinedWavenumber {
            t,
            q_cap,
            margin1: condition1_margin,
            margin2: condition2_margin,
        }),
    }
}

/// Least-squares fit of `log ||w||_{B^0_{l,l}}^l` against time over the
/// window. Requires at least 10 samples with positive norm; if the norm
/// underflows to zero inside the window the fit uses the positive prefix.
pub fn fit_decay_rate(
    trace: &SyncTrace,
    window: (f64, f64),
    params: &DeterminingParams,
) -> Result<DecayFit> {
    let (w0, w1) = window;
    if !(w0 < w1) {
        return Err(SqgError::Fit(format!(
            "empty fit window [{w0}, {w1}]"
        )));
    }
    let l = params.l();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for s in trace.samples.iter().filter(|s| s.t >= w0 && s.t <= w1) {
        if !(s.besov > 0.0) || !s.besov.is_finite() {
            break; // underflow: fit the positive prefix
        }
        xs.push(s.t);
        ys.push(l * s.besov.ln());
    }
    let n = xs.len();
    if n < 10 {
        return Err(SqgError::Fit(format!(
            "need at least 10 positive-norm samples in [{w0}, {w1}], found {n}"
        )));
    }
    let nf = n as f64;
    let x_mean = xs.iter().sum::<f64>() / nf;
    let y_mean = ys.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for i in 0..n {
        let dx = xs[i] - x_mean;
        let dy = ys[i] - y_mean;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(SqgError::Fit(
            "all samples in the window share one time; cannot fit a slope".into(),
        ));
    }
    let rho = sxy / sxx;
    let ss_res = (syy - rho * sxy).max(0.0);
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    let big_l = params.domain_length();
    Ok(DecayFit {
        rho,
        c_calibrated: -rho * big_l.powf(params.alpha()) / params.nu(),
        r_squared,
        points_used: n,
        window,
    })
}
