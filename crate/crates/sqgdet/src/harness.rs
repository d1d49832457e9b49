//! Run configuration, orchestration, and on-disk results.
//!
//! A run is described by one JSON document ([`RunConfig`]): which experiment
//! to perform, the solver setup, the determining-scan inputs, the initial
//! data, and where output goes. [`parse_config`] validates the document and
//! resolves defaults in place — the time step from the advective CFL rule,
//! the Lebesgue index `r` from the admissible interval `I_alpha` — so a
//! parsed config is runnable as-is and serializes with every choice explicit.
//!
//! The canonical serialization (sorted keys, resolved defaults) is hashed
//! with SHA-256 and stamped into every [`RunRecord`], so any result file is
//! traceable to the exact configuration that produced it, and re-parsing the
//! canonical form yields the same hash.
//!
//! Series are newline-delimited JSON (one object per line, keys sorted),
//! optionally mirrored to CSV. Wall-clock time lives only in `record.json`,
//! never in series files: two runs with the same seed produce byte-identical
//! series.
//!
//! [`sweep`] runs a list of configs on a bounded worker pool. A failing
//! member — rejected config, blow-up, undefined wavenumber, even a panic —
//! becomes a structured failure record and never aborts its siblings. The
//! `SQGDET_THREADS` environment variable caps both the sweep workers and the
//! global compute pool.

use std::collections::BTreeSet;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::degiorgi::{
    build_ladder, degiorgi_params, level_energies, verify_iteration, TruncationSign,
};
use crate::determining::{index_range, trace_wavenumbers, DeterminingParams};
use crate::field::SpectralField;
use crate::forcing::ForcingSpec;
use crate::grid::Grid;
use crate::operators::max_speed;
use crate::solver::{
    read_checkpoint, simulate, write_checkpoint, Checkpoint, SolverConfig, DEFAULT_CFL,
};
use crate::sync::{fit_decay_rate, run_synced_pair, CouplingMode, SyncSetup};
use crate::{Result, SqgError};

/// Minimum number of steps the CFL default will take, so that a quiescent
/// initial state (zero advective speed) still yields a finite time step.
const MIN_STEPS: f64 = 16.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Simulate,
    Determine,
    Sync,
    Degiorgi,
    Sweep,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Simulate => "simulate",
            Experiment::Determine => "determine",
            Experiment::Sync => "sync",
            Experiment::Degiorgi => "degiorgi",
            Experiment::Sweep => "sweep",
        }
    }
}

/// The Lebesgue index for the determining scan: a number, or `"auto"` to
/// take the midpoint of the admissible interval (its left endpoint plus 4
/// when the interval is unbounded, which recovers the reference value
/// `r = 7` at `alpha = 1`).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RSpec {
    Value(f64),
    Auto(AutoTag),
}

/// The literal string `"auto"`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AutoTag {
    Auto,
}

impl RSpec {
    pub fn value(&self) -> Option<f64> {
        match self {
            RSpec::Value(r) => Some(*r),
            RSpec::Auto(_) => None,
        }
    }
}

/// A Lebesgue exponent that may be infinite: a number or the string `"inf"`.
/// (JSON has no literal for infinity, so the string form is canonical.)
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PNorm {
    Value(f64),
    Name(String),
}

impl PNorm {
    pub fn as_f64(&self) -> Result<f64> {
        match self {
            PNorm::Value(p) => Ok(*p),
            PNorm::Name(s) if s == "inf" => Ok(f64::INFINITY),
            PNorm::Name(s) => Err(SqgError::Validation(format!(
                "degiorgi.p: expected a number or \"inf\", got \"{s}\""
            ))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    /// Grid resolution per axis (even, >= 8).
    pub n: usize,
    pub domain_length: f64,
    pub alpha: f64,
    pub nu: f64,
    #[serde(default)]
    pub epsilon: f64,
    /// Time step; omit to derive one from the advective CFL rule.
    #[serde(default)]
    pub dt: Option<f64>,
    pub t_end: f64,
    #[serde(default)]
    pub forcing: ForcingSpec,
    #[serde(default = "default_stride")]
    pub record_stride: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_stride() -> usize {
    1
}

impl SolverSection {
    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.n, self.domain_length)
    }

    /// Build the validated solver configuration. Requires `dt` to be
    /// resolved (either given explicitly or filled by [`parse_config`]).
    pub fn to_solver_config(&self) -> Result<SolverConfig> {
        let dt = self.dt.ok_or_else(|| {
            SqgError::Validation(
                "solver.dt: unresolved; pass the config through parse_config first".into(),
            )
        })?;
        Ok(SolverConfig {
            grid: self.grid()?,
            alpha: self.alpha,
            nu: self.nu,
            epsilon: self.epsilon,
            dt,
            t_end: self.t_end,
            forcing: self.forcing.clone(),
            record_stride: self.record_stride,
            seed: self.seed,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeterminingSection {
    #[serde(default = "default_rspec")]
    pub r: RSpec,
    #[serde(default = "one")]
    pub c0: f64,
}

fn default_rspec() -> RSpec {
    RSpec::Auto(AutoTag::Auto)
}

fn one() -> f64 {
    1.0
}

impl Default for DeterminingSection {
    fn default() -> Self {
        DeterminingSection {
            r: default_rspec(),
            c0: 1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyncSection {
    #[serde(default = "default_coupling")]
    pub coupling: CouplingMode,
    /// Steps between determining-wavenumber re-scans in measured mode.
    #[serde(default = "default_stride")]
    pub recompute_stride: usize,
    /// Seed for the slave's initial data; defaults to `solver.seed + 1`.
    #[serde(default)]
    pub slave_seed: Option<u64>,
    /// Time window for the decay-rate fit; defaults to the whole run.
    #[serde(default)]
    pub fit_window: Option<(f64, f64)>,
}

fn default_coupling() -> CouplingMode {
    CouplingMode::Measured
}

impl Default for SyncSection {
    fn default() -> Self {
        SyncSection {
            coupling: CouplingMode::Measured,
            recompute_stride: 1,
            slave_seed: None,
            fit_window: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeGiorgiSection {
    /// Ladder start time; defaults to `t_end / 2`.
    #[serde(default)]
    pub t0: Option<f64>,
    /// Force norm index (> 2 / alpha), or `"inf"`.
    #[serde(default = "default_pnorm")]
    pub p: PNorm,
    #[serde(default = "default_k_levels")]
    pub k_levels: usize,
    /// Iteration constant `C` the inequality audit is evaluated at.
    #[serde(default = "one")]
    pub c_iter: f64,
    #[serde(default = "default_sign")]
    pub sign: TruncationSign,
}

fn default_pnorm() -> PNorm {
    PNorm::Name("inf".into())
}

fn default_k_levels() -> usize {
    15
}

fn default_sign() -> TruncationSign {
    TruncationSign::Plus
}

impl Default for DeGiorgiSection {
    fn default() -> Self {
        DeGiorgiSection {
            t0: None,
            p: default_pnorm(),
            k_levels: default_k_levels(),
            c_iter: 1.0,
            sign: default_sign(),
        }
    }
}

/// One random band: lattice radii `[k_min, k_max]`, physical rms value.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandSpec {
    pub k_min: f64,
    pub k_max: f64,
    pub rms: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum InitialCondition {
    Zero,
    /// Seeded Gaussian band on lattice radii `[k_min, k_max]`, rescaled to
    /// the given physical rms value.
    RandomBand { k_min: f64, k_max: f64, rms: f64 },
    /// Sum of independently scaled random bands (one RNG stream, drawn in
    /// order). Lets low shells sit at one amplitude and high shells at
    /// another, e.g. to pin the measured slaving cutoff between them.
    Bands { bands: Vec<BandSpec> },
    /// `amplitude * cos(2 pi k . x / L + phase)`.
    SingleMode {
        k: [i64; 2],
        amplitude: f64,
        #[serde(default)]
        phase: f64,
    },
    /// Resume from a persisted solver state (grid must match).
    Checkpoint { path: PathBuf },
}

impl Default for InitialCondition {
    fn default() -> Self {
        InitialCondition::Zero
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Ndjson,
    Csv,
}

fn default_formats() -> Vec<OutputFormat> {
    vec![OutputFormat::Ndjson]
}

/// One experiment, fully specified.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub solver: SolverSection,
    #[serde(default)]
    pub determining: DeterminingSection,
    #[serde(default)]
    pub initial_condition: InitialCondition,
    #[serde(default)]
    pub sync: SyncSection,
    #[serde(default)]
    pub degiorgi: DeGiorgiSection,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default = "default_formats")]
    pub formats: Vec<OutputFormat>,
}

impl RunConfig {
    fn wants_csv(&self) -> bool {
        self.formats.contains(&OutputFormat::Csv)
    }

    /// The resolved determining parameters (errors if `r` is still `"auto"`).
    pub fn determining_params(&self) -> Result<DeterminingParams> {
        let r = self.determining.r.value().ok_or_else(|| {
            SqgError::Validation(
                "determining.r: unresolved; pass the config through parse_config first".into(),
            )
        })?;
        DeterminingParams::new(
            self.solver.alpha,
            r,
            self.solver.nu,
            self.solver.domain_length,
            self.determining.c0,
        )
    }
}

/// Parse, validate, and resolve a run configuration. Every default is made
/// explicit in the returned value, so its canonical serialization re-parses
/// to the identical configuration (and hash).
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut cfg: RunConfig = serde_json::from_str(text)
        .map_err(|e| SqgError::Validation(format!("config parse: {e}")))?;
    resolve_defaults(&mut cfg)?;
    validate_config(&cfg)?;
    Ok(cfg)
}

/// Fill the derived defaults in place: `solver.dt` from the advective CFL
/// rule on the initial data, and `determining.r` from the midpoint of
/// `I_alpha` when the experiment scans wavenumbers.
fn resolve_defaults(cfg: &mut RunConfig) -> Result<()> {
    // The pieces resolution itself depends on must be valid first.
    let mut problems = Vec::new();
    if let Err(e) = cfg.solver.grid() {
        problems.push(format!("solver: {e}"));
    }
    if !(cfg.solver.t_end > 0.0 && cfg.solver.t_end.is_finite()) {
        problems.push(format!(
            "solver.t_end: must be positive and finite, got {}",
            cfg.solver.t_end
        ));
    }
    check_initial_condition(cfg, &mut problems);
    if !problems.is_empty() {
        return Err(validation_report(problems));
    }

    if cfg.solver.dt.is_none() {
        let grid = cfg.solver.grid()?;
        let theta0 = build_initial(&cfg.initial_condition, grid, cfg.solver.seed)?;
        let speed = max_speed(&theta0);
        let dt_cap = cfg.solver.t_end / MIN_STEPS;
        let dt = if speed > 0.0 {
            (DEFAULT_CFL * grid.dx() / speed).min(dt_cap)
        } else {
            dt_cap
        };
        log::info!("solver.dt defaulted to {dt:.6e} (CFL rule, initial speed {speed:.3e})");
        cfg.solver.dt = Some(dt);
    }

    if matches!(cfg.experiment, Experiment::Determine | Experiment::Sync)
        && cfg.determining.r.value().is_none()
    {
        let (lo, hi) = index_range(cfg.solver.alpha)?;
        let r = if hi.is_finite() { 0.5 * (lo + hi) } else { lo + 4.0 };
        log::info!("determining.r defaulted to {r} (inside I_alpha = ({lo}, {hi}))");
        cfg.determining.r = RSpec::Value(r);
    }
    Ok(())
}

fn check_initial_condition(cfg: &RunConfig, problems: &mut Vec<String>) {
    match &cfg.initial_condition {
        InitialCondition::Zero | InitialCondition::Checkpoint { .. } => {}
        InitialCondition::RandomBand { k_min, k_max, rms } => {
            check_band(
                &BandSpec {
                    k_min: *k_min,
                    k_max: *k_max,
                    rms: *rms,
                },
                "initial_condition",
                problems,
            );
        }
        InitialCondition::Bands { bands } => {
            if bands.is_empty() {
                problems.push("initial_condition.bands: needs at least one band".into());
            }
            for (i, band) in bands.iter().enumerate() {
                check_band(band, &format!("initial_condition.bands[{i}]"), problems);
            }
        }
        InitialCondition::SingleMode { k, amplitude, .. } => {
            if *k == [0, 0] {
                problems.push("initial_condition.k: the mean mode [0, 0] is pinned to zero".into());
            }
            if let Ok(grid) = cfg.solver.grid() {
                let cap = grid.dealias_kmax();
                if k[0].abs() > cap || k[1].abs() > cap {
                    problems.push(format!(
                        "initial_condition.k: [{}, {}] lies outside the dealiased band \
                         |k_i| <= {cap} at n = {}",
                        k[0],
                        k[1],
                        grid.n()
                    ));
                }
            }
            if !amplitude.is_finite() {
                problems.push(format!(
                    "initial_condition.amplitude: must be finite, got {amplitude}"
                ));
            }
        }
    }
}

fn check_band(band: &BandSpec, field: &str, problems: &mut Vec<String>) {
    if !(band.k_min >= 0.0 && band.k_max >= band.k_min) {
        problems.push(format!(
            "{field}: random band needs 0 <= k_min <= k_max, got [{}, {}]",
            band.k_min, band.k_max
        ));
    }
    if !(band.rms >= 0.0 && band.rms.is_finite()) {
        problems.push(format!(
            "{field}.rms: must be nonnegative and finite, got {}",
            band.rms
        ));
    }
}

fn validation_report(problems: Vec<String>) -> SqgError {
    SqgError::Validation(format!(
        "invalid config ({} problem{}):\n  - {}",
        problems.len(),
        if problems.len() == 1 { "" } else { "s" },
        problems.join("\n  - ")
    ))
}

/// Check every constraint and report all violations at once, each naming the
/// offending field.
fn validate_config(cfg: &RunConfig) -> Result<()> {
    let mut problems = Vec::new();

    if cfg.experiment == Experiment::Sweep {
        problems.push(
            "experiment: a sweep is described by a JSON array of run configs; \
             parse it with parse_sweep (CLI subcommand `sweep`)"
                .into(),
        );
    }

    match cfg.solver.to_solver_config() {
        Ok(scfg) => {
            if let Err(e) = scfg.validate() {
                problems.push(format!("solver: {e}"));
            }
        }
        Err(e) => problems.push(format!("solver: {e}")),
    }

    if !cfg.formats.contains(&OutputFormat::Ndjson) {
        problems.push("formats: must include \"ndjson\" (CSV is an optional mirror)".into());
    }
    if cfg.formats.len() != cfg.formats.iter().collect::<BTreeSet<_>>().len() {
        problems.push("formats: contains a duplicate entry".into());
    }

    if !(cfg.determining.c0 > 0.0 && cfg.determining.c0.is_finite()) {
        problems.push(format!(
            "determining.c0: must be positive and finite, got {}",
            cfg.determining.c0
        ));
    }

    if matches!(cfg.experiment, Experiment::Determine | Experiment::Sync) {
        match cfg.determining.r.value() {
            Some(r) => {
                if let Err(e) = DeterminingParams::new(
                    cfg.solver.alpha,
                    r,
                    cfg.solver.nu,
                    cfg.solver.domain_length,
                    cfg.determining.c0,
                ) {
                    problems.push(format!("determining: {e}"));
                }
            }
            None => problems.push("determining.r: unresolved \"auto\"".into()),
        }
    }

    if cfg.experiment == Experiment::Sync {
        if cfg.sync.recompute_stride == 0 {
            problems.push("sync.recompute_stride: must be >= 1".into());
        }
        if let Some((a, b)) = cfg.sync.fit_window {
            if !(a.is_finite() && b.is_finite() && (0.0..b).contains(&a)) {
                problems.push(format!(
                    "sync.fit_window: needs 0 <= start < end, got [{a}, {b}]"
                ));
            }
        }
    }

    if cfg.experiment == Experiment::Degiorgi {
        match cfg.degiorgi.p.as_f64() {
            Ok(p) => {
                if !(p > 2.0 / cfg.solver.alpha) {
                    problems.push(format!(
                        "degiorgi.p: must exceed 2 / alpha = {}, got {p}",
                        2.0 / cfg.solver.alpha
                    ));
                }
            }
            Err(e) => problems.push(e.to_string()),
        }
        if let Some(t0) = cfg.degiorgi.t0 {
            if !(t0 > 0.0 && t0 <= cfg.solver.t_end) {
                problems.push(format!(
                    "degiorgi.t0: must lie in (0, t_end = {}], got {t0}",
                    cfg.solver.t_end
                ));
            }
        }
        if !(cfg.degiorgi.c_iter > 0.0 && cfg.degiorgi.c_iter.is_finite()) {
            problems.push(format!(
                "degiorgi.c_iter: must be positive and finite, got {}",
                cfg.degiorgi.c_iter
            ));
        }
    }

    if problems.is_empty() {
        Ok(())
    } else {
        Err(validation_report(problems))
    }
}

/// Canonical serialization: compact JSON with keys sorted at every level and
/// all defaults resolved. This is the hashed byte string.
pub fn canonical_json(cfg: &RunConfig) -> Result<String> {
    let value = serde_json::to_value(cfg)?;
    Ok(serde_json::to_string(&value)?)
}

/// SHA-256 of the canonical serialization, lowercase hex.
pub fn config_hash(cfg: &RunConfig) -> Result<String> {
    let mut hasher = Sha256::new();
    hasher.update(canonical_json(cfg)?.as_bytes());
    Ok(format!("{:x}", hasher.finalize()))
}

/// Build the initial field described by the config section.
pub fn build_initial(ic: &InitialCondition, grid: Grid, seed: u64) -> Result<SpectralField> {
    match ic {
        InitialCondition::Zero => Ok(SpectralField::zero(grid)),
        InitialCondition::RandomBand { k_min, k_max, rms } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            SpectralField::random_band(grid, *k_min, *k_max, *rms, &mut rng)
        }
        InitialCondition::Bands { bands } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut field = SpectralField::zero(grid);
            for band in bands {
                let part =
                    SpectralField::random_band(grid, band.k_min, band.k_max, band.rms, &mut rng)?;
                field.axpy(1.0, &part);
            }
            Ok(field)
        }
        InitialCondition::SingleMode {
            k,
            amplitude,
            phase,
        } => {
            let mut field = SpectralField::zero(grid);
            field.set_mode(k[0], k[1], Complex64::from_polar(0.5 * amplitude, *phase));
            Ok(field)
        }
        InitialCondition::Checkpoint { path } => {
            let cp = read_checkpoint(path)?;
            if cp.theta.grid() != grid {
                return Err(SqgError::GridMismatch(format!(
                    "checkpoint grid n = {} does not match config grid n = {}",
                    cp.theta.grid().n(),
                    grid.n()
                )));
            }
            Ok(cp.theta)
        }
    }
}

/// Where a run's outputs went, plus the scalars that summarize it.
#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub experiment: String,
    pub config_hash: String,
    pub code_version: String,
    /// Elapsed wall-clock time. Lives here only — series files carry no
    /// timing, so equal seeds give byte-identical series.
    pub wall_time_seconds: f64,
    pub output_dir: String,
    /// Series file names, relative to `output_dir`.
    pub series_paths: Vec<String>,
    pub summary: Map<String, Value>,
}

fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

/// Execute one parsed configuration and write its outputs under
/// `output_dir`: the canonical `config.json`, the series files, and
/// `record.json`.
pub fn run(cfg: &RunConfig) -> Result<RunRecord> {
    let start = Instant::now();
    let out = cfg
        .output_dir
        .clone()
        .ok_or_else(|| {
            SqgError::Validation(
                "output_dir: required to run; set it in the config or pass --out".into(),
            )
        })?;
    fs::create_dir_all(&out)?;
    let hash = config_hash(cfg)?;
    fs::write(out.join("config.json"), format!("{}\n", canonical_json(cfg)?))?;

    let mut series_paths = Vec::new();
    let mut summary = Map::new();
    summary.insert("alpha".into(), num(cfg.solver.alpha));
    summary.insert("nu".into(), num(cfg.solver.nu));

    match cfg.experiment {
        Experiment::Simulate => run_simulate(cfg, &out, &mut series_paths, &mut summary)?,
        Experiment::Determine => run_determine(cfg, &out, &mut series_paths, &mut summary)?,
        Experiment::Sync => run_sync(cfg, &out, &mut series_paths, &mut summary)?,
        Experiment::Degiorgi => run_degiorgi(cfg, &out, &mut series_paths, &mut summary)?,
        Experiment::Sweep => {
            return Err(SqgError::Validation(
                "experiment: sweep configs are arrays; use the sweep entry point".into(),
            ))
        }
    }

    let record = RunRecord {
        experiment: cfg.experiment.name().into(),
        config_hash: hash,
        code_version: env!("CARGO_PKG_VERSION").into(),
        wall_time_seconds: start.elapsed().as_secs_f64(),
        output_dir: out.display().to_string(),
        series_paths,
        summary,
    };
    let record_json = serde_json::to_string_pretty(&serde_json::to_value(&record)?)?;
    fs::write(out.join("record.json"), format!("{record_json}\n"))?;
    Ok(record)
}

fn write_series<T: Serialize>(
    cfg: &RunConfig,
    out: &Path,
    stem: &str,
    rows: &[T],
    series_paths: &mut Vec<String>,
) -> Result<()> {
    let ndjson = format!("{stem}.ndjson");
    write_ndjson(&out.join(&ndjson), rows)?;
    series_paths.push(ndjson);
    if cfg.wants_csv() {
        let csv = format!("{stem}.csv");
        write_csv(&out.join(&csv), rows)?;
        series_paths.push(csv);
    }
    Ok(())
}

fn run_simulate(
    cfg: &RunConfig,
    out: &Path,
    series_paths: &mut Vec<String>,
    summary: &mut Map<String, Value>,
) -> Result<()> {
    let scfg = cfg.solver.to_solver_config()?;
    let theta0 = build_initial(&cfg.initial_condition, scfg.grid, scfg.seed)?;
    let traj = simulate(&scfg, &theta0, |_, _| {})?;
    write_series(cfg, out, "series", &traj.samples, series_paths)?;
    write_checkpoint(
        &out.join("final.ckpt"),
        &Checkpoint {
            theta: traj.final_field().clone(),
            alpha: scfg.alpha,
            nu: scfg.nu,
            t: traj.final_time(),
        },
    )?;
    let last = traj.samples.last().expect("trajectory has samples");
    summary.insert("steps".into(), Value::from(traj.samples.len() - 1));
    summary.insert("snapshots".into(), Value::from(traj.snapshots.len()));
    summary.insert("final_t".into(), num(last.t));
    summary.insert("final_l2".into(), num(last.l2));
    summary.insert("final_linf".into(), num(last.linf));
    Ok(())
}

fn run_determine(
    cfg: &RunConfig,
    out: &Path,
    series_paths: &mut Vec<String>,
    summary: &mut Map<String, Value>,
) -> Result<()> {
    let scfg = cfg.solver.to_solver_config()?;
    let params = cfg.determining_params()?;
    let theta0 = build_initial(&cfg.initial_condition, scfg.grid, scfg.seed)?;
    let traj = simulate(&scfg, &theta0, |_, _| {})?;
    let trace = trace_wavenumbers(&traj, &params)?;

    write_series(cfg, out, "series", &traj.samples, series_paths)?;
    write_series(cfg, out, "wavenumbers", &trace.samples, series_paths)?;

    let defined: Vec<i32> = trace.samples.iter().filter_map(|s| s.outcome.q()).collect();
    summary.insert("r".into(), num(params.r()));
    summary.insert("l".into(), num(params.l()));
    summary.insert("c_alpha_r".into(), num(params.c_alpha_r()));
    summary.insert("snapshots".into(), Value::from(trace.samples.len()));
    summary.insert("defined_count".into(), Value::from(defined.len()));
    summary.insert(
        "undefined_count".into(),
        Value::from(trace.samples.len() - defined.len()),
    );
    summary.insert(
        "q_min".into(),
        defined.iter().min().map_or(Value::Null, |q| Value::from(*q)),
    );
    summary.insert(
        "q_max".into(),
        defined.iter().max().map_or(Value::Null, |q| Value::from(*q)),
    );
    let last = trace.samples.last().expect("trace has samples");
    summary.insert(
        "q_final".into(),
        last.outcome.q().map_or(Value::Null, Value::from),
    );
    summary.insert(
        "lambda_final".into(),
        last.outcome.lambda().map_or(Value::Null, num),
    );
    Ok(())
}

fn run_sync(
    cfg: &RunConfig,
    out: &Path,
    series_paths: &mut Vec<String>,
    summary: &mut Map<String, Value>,
) -> Result<()> {
    let scfg = cfg.solver.to_solver_config()?;
    let params = cfg.determining_params()?;
    let master0 = build_initial(&cfg.initial_condition, scfg.grid, scfg.seed)?;
    let slave_seed = cfg.sync.slave_seed.unwrap_or(scfg.seed.wrapping_add(1));
    let slave0 = build_initial(&cfg.initial_condition, scfg.grid, slave_seed)?;
    if !matches!(cfg.initial_condition, InitialCondition::RandomBand { .. }) {
        log::warn!(
            "sync: initial condition is not seed-dependent, so master and slave start identical"
        );
    }

    let setup = SyncSetup {
        solver: scfg.clone(),
        params,
        coupling: cfg.sync.coupling,
        recompute_stride: cfg.sync.recompute_stride,
    };
    let trace = run_synced_pair(&setup, &master0, &slave0)?;
    write_series(cfg, out, "series", &trace.samples, series_paths)?;

    let first = trace.samples.first().expect("sync trace has samples");
    let last = trace.samples.last().expect("sync trace has samples");
    summary.insert("r".into(), num(params.r()));
    summary.insert("l".into(), num(params.l()));
    summary.insert("q_final".into(), last.q.map_or(Value::Null, Value::from));
    summary.insert("besov_initial".into(), num(first.besov));
    summary.insert("besov_final".into(), num(last.besov));
    summary.insert(
        "decay_ratio".into(),
        if first.besov > 0.0 {
            num(last.besov / first.besov)
        } else {
            Value::Null
        },
    );

    let window = cfg.sync.fit_window.unwrap_or((0.0, scfg.t_end));
    match fit_decay_rate(&trace, window, &params) {
        Ok(fit) => {
            summary.insert("rho".into(), num(fit.rho));
            summary.insert("c_calibrated".into(), num(fit.c_calibrated));
            summary.insert("r_squared".into(), num(fit.r_squared));
            summary.insert("fit_points".into(), Value::from(fit.points_used));
        }
        Err(e) => {
            // A run without usable decay (e.g. coupling off) is still a
            // valid run; record why the fit is absent instead of failing.
            log::warn!("sync: decay fit skipped: {e}");
            summary.insert("fit_error".into(), Value::String(e.to_string()));
        }
    }
    Ok(())
}

fn run_degiorgi(
    cfg: &RunConfig,
    out: &Path,
    series_paths: &mut Vec<String>,
    summary: &mut Map<String, Value>,
) -> Result<()> {
    let scfg = cfg.solver.to_solver_config()?;
    let theta0 = build_initial(&cfg.initial_condition, scfg.grid, scfg.seed)?;
    let traj = simulate(&scfg, &theta0, |_, _| {})?;
    write_series(cfg, out, "series", &traj.samples, series_paths)?;

    let t0 = cfg.degiorgi.t0.unwrap_or(0.5 * scfg.t_end);
    let sign = cfg.degiorgi.sign;
    let p = cfg.degiorgi.p.as_f64()?;
    let u0 = level_energies(&traj, 0.0, t0, 0, scfg.nu, scfg.alpha, sign)?[0];
    let force = scfg.forcing.build(scfg.grid)?;
    let f_norm_p = force.to_physical().lp_norm(p)?;
    let params = degiorgi_params(scfg.alpha, p, u0, scfg.nu, t0, f_norm_p, cfg.degiorgi.c_iter)?;
    let ladder = build_ladder(&traj, &params, cfg.degiorgi.k_levels, sign)?;
    let report = verify_iteration(&ladder);

    #[derive(Serialize)]
    struct LadderDoc<'a> {
        params: &'a crate::degiorgi::DeGiorgiParams,
        sign: TruncationSign,
        levels: &'a [crate::degiorgi::LevelRow],
        report: &'a crate::degiorgi::IterationReport,
    }
    let doc = serde_json::to_value(LadderDoc {
        params: &params,
        sign,
        levels: &ladder.levels,
        report: &report,
    })?;
    fs::write(
        out.join("ladder.json"),
        format!("{}\n", serde_json::to_string_pretty(&doc)?),
    )?;

    summary.insert("t0".into(), num(t0));
    summary.insert("u0".into(), num(params.u0));
    summary.insert("f_norm_p".into(), num(f_norm_p));
    summary.insert("delta".into(), num(params.delta));
    summary.insert("m".into(), num(params.m));
    summary.insert("big_m".into(), num(params.big_m));
    summary.insert("u_final".into(), num(report.u_final));
    summary.insert("c_fitted".into(), report.c_fitted.map_or(Value::Null, num));
    summary.insert("audit_ok".into(), Value::Bool(report.audit_ok));
    summary.insert("all_ok".into(), Value::Bool(report.all_ok));
    Ok(())
}

/// One line of compact JSON per row, keys sorted (serialization goes through
/// `serde_json::Value`, whose object maps are ordered).
pub fn write_ndjson<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut text = String::new();
    for row in rows {
        let value = serde_json::to_value(row)?;
        text.push_str(&serde_json::to_string(&value)?);
        text.push('\n');
    }
    fs::write(path, text)?;
    Ok(())
}

/// CSV mirror of a row list: the header is the sorted union of the rows'
/// keys, absent keys render empty (rows may be enum-shaped, e.g. defined vs.
/// undefined wavenumber samples).
pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut objects = Vec::with_capacity(rows.len());
    let mut keys = BTreeSet::new();
    for row in rows {
        match serde_json::to_value(row)? {
            Value::Object(map) => {
                keys.extend(map.keys().cloned());
                objects.push(map);
            }
            other => {
                return Err(SqgError::Validation(format!(
                    "csv rows must be flat objects, got {other}"
                )))
            }
        }
    }
    let header: Vec<&String> = keys.iter().collect();
    let mut text = header
        .iter()
        .map(|k| csv_escape(k))
        .collect::<Vec<_>>()
        .join(",");
    text.push('\n');
    for obj in &objects {
        let line = header
            .iter()
            .map(|k| obj.get(*k).map_or(String::new(), csv_cell))
            .collect::<Vec<_>>()
            .join(",");
        text.push_str(&line);
        text.push('\n');
    }
    fs::write(path, text)?;
    Ok(())
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => csv_escape(s),
        other => other.to_string(),
    }
}

fn csv_escape(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Parse a sweep document: a JSON array of run configs, or an object
/// `{"experiment": "sweep", "members": [...]}`. Each member is validated and
/// resolved exactly as a standalone config.
pub fn parse_sweep(text: &str) -> Result<Vec<RunConfig>> {
    let doc: Value = serde_json::from_str(text)
        .map_err(|e| SqgError::Validation(format!("sweep parse: {e}")))?;
    let members = match &doc {
        Value::Array(items) => items.clone(),
        Value::Object(map) => match map.get("members") {
            Some(Value::Array(items)) => items.clone(),
            _ => {
                return Err(SqgError::Validation(
                    "sweep: object form needs a \"members\" array".into(),
                ))
            }
        },
        _ => {
            return Err(SqgError::Validation(
                "sweep: expected a JSON array of run configs".into(),
            ))
        }
    };
    if members.is_empty() {
        return Err(SqgError::Validation(
            "sweep: needs at least one member config".into(),
        ));
    }
    members
        .iter()
        .enumerate()
        .map(|(i, v)| {
            parse_config(&v.to_string())
                .map_err(|e| SqgError::Validation(format!("sweep member {i}: {e}")))
        })
        .collect()
}

/// Give every member an output directory (under `root` when the member has
/// none of its own) and require the directories to be distinct.
pub fn assign_output_dirs(cfgs: &mut [RunConfig], root: Option<&Path>) -> Result<()> {
    for (i, cfg) in cfgs.iter_mut().enumerate() {
        if cfg.output_dir.is_none() {
            let root = root.ok_or_else(|| {
                SqgError::Validation(format!(
                    "sweep member {i}: no output_dir in the config and no sweep root \
                     directory given (pass --out)"
                ))
            })?;
            cfg.output_dir = Some(root.join(format!("member_{i:03}")));
        }
    }
    let mut seen: BTreeSet<&Path> = BTreeSet::new();
    for (i, cfg) in cfgs.iter().enumerate() {
        let dir = cfg.output_dir.as_deref().expect("assigned above");
        if !seen.insert(dir) {
            return Err(SqgError::Validation(format!(
                "sweep member {i}: output_dir {} collides with an earlier member",
                dir.display()
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepFailure {
    /// `"validation"`, `"numerical"`, `"io"`, or `"panic"`.
    pub kind: String,
    pub message: String,
    pub exit_code: i32,
}

/// Outcome of one sweep member: a record on success, a structured failure
/// otherwise. Failures never abort sibling members.
#[derive(Debug, Clone, Serialize)]
pub struct SweepMember {
    pub index: usize,
    pub experiment: String,
    pub config_hash: String,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub record: Option<RunRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<SweepFailure>,
}

fn error_kind(e: &SqgError) -> &'static str {
    match e.exit_code() {
        2 => "validation",
        3 => "numerical",
        _ => "io",
    }
}

/// The `SQGDET_THREADS` cap, if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var("SQGDET_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|n| *n >= 1)
}

/// Size the global rayon pool from `SQGDET_THREADS`. Call once at process
/// start; a no-op when the variable is unset or the pool already exists.
pub fn configure_global_threads() {
    if let Some(n) = thread_cap() {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn effective_workers(requested: usize) -> usize {
    let w = requested.max(1);
    thread_cap().map_or(w, |cap| w.min(cap))
}

/// Run every member on a pool of at most `workers` threads (further capped
/// by `SQGDET_THREADS`). Member failures — including panics — are captured
/// as records; the sweep itself only fails if the pool cannot be built.
pub fn sweep(cfgs: &[RunConfig], workers: usize) -> Result<Vec<SweepMember>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(effective_workers(workers))
        .build()
        .map_err(|e| SqgError::Validation(format!("worker pool: {e}")))?;
    Ok(pool.install(|| {
        cfgs.par_iter()
            .enumerate()
            .map(|(i, cfg)| run_member(i, cfg))
            .collect()
    }))
}

fn run_member(index: usize, cfg: &RunConfig) -> SweepMember {
    let config_hash = config_hash(cfg).unwrap_or_default();
    let experiment = cfg.experiment.name().to_string();
    match catch_unwind(AssertUnwindSafe(|| run(cfg))) {
        Ok(Ok(record)) => SweepMember {
            index,
            experiment,
            config_hash,
            status: "done".into(),
            record: Some(record),
            error: None,
        },
        Ok(Err(e)) => SweepMember {
            index,
            experiment,
            config_hash,
            status: "failed".into(),
            record: None,
            error: Some(SweepFailure {
                kind: error_kind(&e).into(),
                message: e.to_string(),
                exit_code: e.exit_code(),
            }),
        },
        Err(panic) => {
            let message = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic with non-string payload".into());
            SweepMember {
                index,
                experiment,
                config_hash,
                status: "failed".into(),
                record: None,
                error: Some(SweepFailure {
                    kind: "panic".into(),
                    message,
                    exit_code: 3,
                }),
            }
        }
    }
}

/// Run a sweep and write `sweep_records.json` under `root`: the member
/// records plus a flat summary table (one row per member with its scalars,
/// e.g. `nu` against the calibrated constant for a viscosity sweep).
pub fn run_sweep(cfgs: &[RunConfig], workers: usize, root: &Path) -> Result<Vec<SweepMember>> {
    fs::create_dir_all(root)?;
    let members = sweep(cfgs, workers)?;
    let table: Vec<Value> = members
        .iter()
        .map(|m| {
            let mut row = Map::new();
            row.insert("index".into(), Value::from(m.index));
            row.insert("experiment".into(), Value::String(m.experiment.clone()));
            row.insert("status".into(), Value::String(m.status.clone()));
            if let Some(record) = &m.record {
                for (k, v) in &record.summary {
                    row.insert(k.clone(), v.clone());
                }
            }
            Value::Object(row)
        })
        .collect();
    let doc = serde_json::to_value(serde_json::json!({
        "members": members,
        "table": table,
    }))?;
    fs::write(
        root.join("sweep_records.json"),
        format!("{}\n", serde_json::to_string_pretty(&doc)?),
    )?;
    Ok(members)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    fn minimal_config(experiment: &str, out: &Path) -> String {
        format!(
            r#"{{
                "experiment": "{experiment}",
                "solver": {{
                    "n": 16, "domain_length": 1.0, "alpha": 1.0, "nu": 0.1,
                    "dt": 0.01, "t_end": 0.05,
                    "forcing": {{"type": "modes", "modes": [{{"k": [1, 0], "amplitude": 0.2, "phase": 0.0}}]}}
                }},
                "initial_condition": {{"type": "random_band", "k_min": 1.0, "k_max": 3.0, "rms": 0.5}},
                "output_dir": "{}"
            }}"#,
            out.display()
        )
    }

    #[test]
    fn defaults_fill_dt_and_r_and_round_trip_hash_is_stable() {
        let text = r#"{
            "experiment": "determine",
            "solver": {"n": 16, "domain_length": 1.0, "alpha": 1.0, "nu": 0.1, "t_end": 1.0},
            "initial_condition": {"type": "single_mode", "k": [1, 0], "amplitude": 1.0}
        }"#;
        let cfg = parse_config(text).expect("config parses");
        let dt = cfg.solver.dt.expect("dt resolved");
        assert!(dt > 0.0 && dt <= 1.0 / 16.0, "CFL default dt = {dt}");
        assert_eq!(
            cfg.determining.r.value(),
            Some(7.0),
            "auto r at alpha = 1 is the reference value 7"
        );

        let h1 = config_hash(&cfg).unwrap();
        let reparsed = parse_config(&canonical_json(&cfg).unwrap()).unwrap();
        let h2 = config_hash(&reparsed).unwrap();
        assert_eq!(h1, h2, "canonical form re-parses to the same hash");
    }

    #[test]
    fn out_of_interval_r_is_rejected_citing_the_interval() {
        let text = r#"{
            "experiment": "determine",
            "solver": {"n": 16, "domain_length": 1.0, "alpha": 1.0, "nu": 0.1, "dt": 0.01, "t_end": 0.1},
            "determining": {"r": 2.0}
        }"#;
        let err = parse_config(text).expect_err("r = 2 outside I_1 = (3, inf)");
        let msg = err.to_string();
        assert!(
            msg.contains("(3") && msg.contains("inf"),
            "message cites the admissible interval, got: {msg}"
        );
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn unknown_fields_and_bad_solver_are_rejected_together() {
        let err = parse_config(r#"{"experiment": "simulate", "solver": {"n": 16, "domain_length": 1.0, "alpha": 1.0, "nu": 0.1, "dt": 0.01, "t_end": 0.1}, "typo_field": 3}"#)
            .expect_err("unknown field rejected");
        assert!(err.to_string().contains("typo_field"), "{err}");

        let err = parse_config(r#"{
            "experiment": "sync",
            "solver": {"n": 16, "domain_length": 1.0, "alpha": 1.0, "nu": -0.1, "dt": 0.01, "t_end": 0.1},
            "determining": {"r": 2.0, "c0": 0.0},
            "sync": {"recompute_stride": 0}
        }"#)
        .expect_err("multiple violations rejected");
        let msg = err.to_string();
        for needle in ["nu", "determining", "c0", "recompute_stride"] {
            assert!(msg.contains(needle), "report lists `{needle}`: {msg}");
        }
    }

    #[test]
    fn simulate_run_writes_series_record_and_checkpoint() {
        let dir = tempdir().unwrap();
        let cfg = parse_config(&minimal_config("simulate", dir.path())).unwrap();
        let record = run(&cfg).unwrap();
        assert_eq!(record.experiment, "simulate");
        assert_eq!(record.series_paths, vec!["series.ndjson".to_string()]);
        let series = fs::read_to_string(dir.path().join("series.ndjson")).unwrap();
        assert_eq!(series.lines().count(), 6, "5 steps plus the initial sample");
        let first: Value = serde_json::from_str(series.lines().next().unwrap()).unwrap();
        assert!(first.get("l2").is_some() && first.get("t").is_some());
        assert!(dir.path().join("final.ckpt").exists());
        assert!(dir.path().join("record.json").exists());
        assert!(dir.path().join("config.json").exists());
        assert!(record.summary.get("final_l2").unwrap().as_f64().unwrap() > 0.0);
    }

    #[test]
    fn same_seed_reruns_are_byte_identical() {
        let dir_a = tempdir().unwrap();
        let dir_b = tempdir().unwrap();
        let base = minimal_config("determine", dir_a.path());
        let cfg_a = parse_config(&base).unwrap();
        let mut cfg_b = cfg_a.clone();
        cfg_b.output_dir = Some(dir_b.path().to_path_buf());
        run(&cfg_a).unwrap();
        run(&cfg_b).unwrap();
        for name in ["series.ndjson", "wavenumbers.ndjson"] {
            let a = fs::read(dir_a.path().join(name)).unwrap();
            let b = fs::read(dir_b.path().join(name)).unwrap();
            assert_eq!(a, b, "{name} differs between identical-seed runs");
        }
    }

    #[test]
    fn csv_mirror_matches_row_count_and_quotes_fields() {
        let dir = tempdir().unwrap();
        let mut cfg = parse_config(&minimal_config("simulate", dir.path())).unwrap();
        cfg.formats = vec![OutputFormat::Ndjson, OutputFormat::Csv];
        let record = run(&cfg).unwrap();
        assert!(record.series_paths.contains(&"series.csv".to_string()));
        let csv = fs::read_to_string(dir.path().join("series.csv")).unwrap();
        let ndjson = fs::read_to_string(dir.path().join("series.ndjson")).unwrap();
        assert_eq!(csv.lines().count(), ndjson.lines().count() + 1, "header row");
        assert!(csv.lines().next().unwrap().split(',').any(|c| c == "t"));
    }

    #[test]
    fn sweep_isolates_failures_and_single_member_matches_run() {
        let root = tempdir().unwrap();
        let good_dir = root.path().join("good");
        let solo_dir = root.path().join("solo");

        // Member 0 blows up immediately: a huge single-mode amplitude makes
        // the advection term non-finite within a step or two.
        let bad = parse_config(&format!(
            r#"{{
                "experiment": "simulate",
                "solver": {{"n": 16, "domain_length": 1.0, "alpha": 1.0, "nu": 1e-12, "dt": 10.0, "t_end": 100.0}},
                "initial_condition": {{"type": "single_mode", "k": [1, 0], "amplitude": 1e12}},
                "output_dir": "{}"
            }}"#,
            root.path().join("bad").display()
        ))
        .unwrap();
        let good = parse_config(&minimal_config("simulate", &good_dir)).unwrap();

        let members = run_sweep(&[bad, good.clone()], 2, root.path()).unwrap();
        assert_eq!(members.len(), 2);
        assert_eq!(members[0].status, "failed");
        let failure = members[0].error.as_ref().unwrap();
        assert_eq!(failure.kind, "numerical");
        assert_eq!(failure.exit_code, 3);
        assert_eq!(members[1].status, "done", "sibling unaffected by the failure");
        assert!(root.path().join("sweep_records.json").exists());

        // A one-element sweep produces the same hash and summary as run().
        let mut solo = good;
        solo.output_dir = Some(solo_dir);
        let direct = run(&solo).unwrap();
        let swept = sweep(std::slice::from_ref(&solo), 1).unwrap();
        let record = swept[0].record.as_ref().unwrap();
        assert_eq!(record.config_hash, direct.config_hash);
        assert_eq!(record.summary, direct.summary);
    }

    #[test]
    fn sync_and_degiorgi_runs_produce_their_summaries() {
        let dir = tempdir().unwrap();
        let text = format!(
            r#"{{
                "experiment": "sync",
                "solver": {{"n": 16, "domain_length": 1.0, "alpha": 1.0, "nu": 0.5, "dt": 0.005, "t_end": 0.1}},
                "determining": {{"r": 7.0}},
                "initial_condition": {{"type": "random_band", "k_min": 1.0, "k_max": 3.0, "rms": 0.1}},
                "sync": {{"coupling": {{"mode": "fixed", "q": 2}}}},
                "output_dir": "{}"
            }}"#,
            dir.path().display()
        );
        let record = run(&parse_config(&text).unwrap()).unwrap();
        assert!(record.summary.contains_key("besov_final"));
        let line = fs::read_to_string(dir.path().join("series.ndjson")).unwrap();
        let first: Value = serde_json::from_str(line.lines().next().unwrap()).unwrap();
        assert!(first.get("Q").is_some() && first.get("besov").is_some());

        let dir2 = tempdir().unwrap();
        let text = format!(
            r#"{{
                "experiment": "degiorgi",
                "solver": {{"n": 16, "domain_length": 1.0, "alpha": 1.2, "nu": 0.2, "dt": 0.005, "t_end": 0.1,
                            "forcing": {{"type": "modes", "modes": [{{"k": [1, 1], "amplitude": 0.3, "phase": 0.2}}]}}}},
                "degiorgi": {{"p": "inf", "k_levels": 6}},
                "initial_condition": {{"type": "random_band", "k_min": 1.0, "k_max": 3.0, "rms": 0.3}},
                "output_dir": "{}"
            }}"#,
            dir2.path().display()
        );
        let record = run(&parse_config(&text).unwrap()).unwrap();
        assert!(record.summary.contains_key("big_m"));
        assert!(dir2.path().join("ladder.json").exists());
    }
}
