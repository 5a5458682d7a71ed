//! Sweep orchestration: equilibrium and non-equilibrium coupling sweeps,
//! single relaxation trajectories and the oracle suite, with CSV and JSON
//! output.

mod config;
mod output;

use std::ops::ControlFlow;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::heom::{
    propagate, steady_state, HeomError, HierarchyState, IntegratorConfig, SteadyMethod,
};
use crate::model::{pointer_limit_diagonals, ModelError};
use crate::observables::{record_with, ObservableError, ObservableRecord, RecordMeta, References};
use crate::oracle::{run_oracle_suite, OracleError, OracleReport, SuiteOptions};
use crate::qstate::{trace_distance, von_neumann_entropy, ComplexMatrix, DensityMatrix, QStateError};

pub use config::{
    random_pure_state, BathTemplate, GridSpec, InitialState, NessTemperatures, RelaxSettings,
    SweepConfig,
};
pub use output::{csv_header, read_csv, write_csv, MatrixJson, SCHEMA_VERSION};

pub const EXIT_OK: i32 = 0;
pub const EXIT_GENERAL: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_ORACLE: i32 = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RunnerError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Heom(#[from] HeomError),
    #[error(transparent)]
    Observable(#[from] ObservableError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    QState(#[from] QStateError),
}

impl RunnerError {
    /// Process exit code for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunnerError::Config(_) => EXIT_CONFIG,
            RunnerError::Heom(HeomError::NotConverged { .. } | HeomError::NumericalBlowup { .. })
            | RunnerError::Observable(ObservableError::ImaginaryResidueTooLarge { .. }) => {
                EXIT_NOT_CONVERGED
            }
            _ => EXIT_GENERAL,
        }
    }
}

pub type Result<T> = std::result::Result<T, RunnerError>;

const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Steady state at one grid point.
#[derive(Clone, Debug, PartialEq)]
pub struct PointResult {
    pub record: ObservableRecord,
    /// No bath coupling: the steady state is not unique.
    pub degenerate: bool,
    /// Largest pairwise trace distance between steady states reached from
    /// the configured initial states (0 for a single state or a direct
    /// solve).
    pub initial_state_spread: f64,
    /// `zeta_00` as the solver returned it, before symmetrizing and normalizing.
    pub raw_rho: ComplexMatrix,
}

/// Solves one grid point of `cfg`.
pub fn solve_point(cfg: &SweepConfig, lambda_b: f64) -> Result<PointResult> {
    let model = cfg.model(lambda_b);
    let refs = References::for_model(&model)?;
    let initials = cfg
        .initial_states
        .iter()
        .map(|s| s.density(&cfg.system))
        .collect::<Result<Vec<_>>>()?;

    if lambda_b == 0.0 {
        // any state diagonal in the energy basis is stationary; report the
        // dephased first initial state
        let e = initials[0].matrix().in_basis(&refs.energy_basis)?;
        let diag: Vec<_> = (0..4).map(|i| e[(i, i)]).collect();
        let rho = ComplexMatrix::diagonal(&diag)?.from_basis(&refs.energy_basis)?;
        let h = HierarchyState::from_density(&rho, cfg.integrator.depth, crate::heom::AdoScaling::Unscaled)?;
        let meta = RecordMeta { lambda_b, t_converged: f64::NAN, converged: true };
        return Ok(PointResult {
            record: record_with(&h, &model, meta, &refs)?,
            degenerate: true,
            initial_state_spread: f64::NAN,
            raw_rho: rho,
        });
    }

    let runs = match cfg.method {
        SteadyMethod::Stationary => 1,
        SteadyMethod::Propagate => initials.len(),
    };
    let mut states = Vec::with_capacity(runs);
    for rho0 in &initials[..runs] {
        states.push(steady_state(rho0, &model, &cfg.integrator, cfg.method)?);
    }
    let mut spread = 0.0f64;
    for a in 0..states.len() {
        for b in a + 1..states.len() {
            spread = spread.max(trace_distance(&states[a].rho, &states[b].rho)?);
        }
    }
    let first = &states[0];
    let meta = RecordMeta {
        lambda_b,
        t_converged: first.t_converged,
        converged: states.iter().all(|s| s.converged),
    };
    Ok(PointResult {
        record: record_with(&first.hierarchy, &model, meta, &refs)?,
        degenerate: false,
        initial_state_spread: spread,
        raw_rho: first.hierarchy.rho(),
    })
}

/// All grid points of `cfg`, solved on `cfg.parallelism` worker threads.
/// Results are in grid order regardless of completion order.
pub fn sweep_points(cfg: &SweepConfig) -> Result<Vec<PointResult>> {
    cfg.validate()?;
    let grid = cfg.grid.values();
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<PointResult>>>> = Mutex::new(vec![None; grid.len()]);
    let workers = cfg.parallelism.min(grid.len()).max(1);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::SeqCst);
                if k >= grid.len() {
                    break;
                }
                log::info!("lambda_b = {:.6} ({}/{})", grid[k], k + 1, grid.len());
                let r = solve_point(cfg, grid[k]);
                slots.lock().expect("no panics while locked")[k] = Some(r);
            });
        }
    });
    slots
        .into_inner()
        .expect("workers joined")
        .into_iter()
        .map(|r| r.expect("every slot filled"))
        .collect()
}

#[derive(Clone, Debug, Serialize)]
struct ReferencesJson {
    temperature: f64,
    gibbs_energy: MatrixJson,
    gibbs_pointer: MatrixJson,
    pointer_limit_energy: MatrixJson,
    pointer_limit_pointer: MatrixJson,
    pointer_limit_diagonals: [f64; 2],
    gibbs_entropy: f64,
    pointer_limit_entropy: f64,
}

impl ReferencesJson {
    fn new(cfg: &SweepConfig) -> Result<Self> {
        let model = cfg.model(0.0);
        let refs = References::for_model(&model)?;
        let t = model.reference_temperature();
        let both = |rho: &DensityMatrix| -> Result<(MatrixJson, MatrixJson)> {
            Ok((
                (&rho.matrix().in_basis(&refs.energy_basis)?).into(),
                (&rho.matrix().in_basis(&refs.pointer_basis)?).into(),
            ))
        };
        let (gibbs_energy, gibbs_pointer) = both(&refs.gibbs)?;
        let (pointer_limit_energy, pointer_limit_pointer) = both(&refs.pointer_limit)?;
        let (a, b) = pointer_limit_diagonals(&cfg.system, 1.0 / t);
        Ok(Self {
            temperature: t,
            gibbs_energy,
            gibbs_pointer,
            pointer_limit_energy,
            pointer_limit_pointer,
            pointer_limit_diagonals: [a, b],
            gibbs_entropy: von_neumann_entropy(&refs.gibbs),
            pointer_limit_entropy: von_neumann_entropy(&refs.pointer_limit),
        })
    }
}

#[derive(Clone, Debug, Serialize)]
struct RowJson {
    lambda_b: f64,
    converged: bool,
    degenerate: bool,
    initial_state_spread: f64,
}

#[derive(Clone, Debug, Serialize)]
struct Sidecar<'a> {
    schema_version: u32,
    code_version: &'static str,
    kind: &'static str,
    csv: String,
    config: &'a SweepConfig,
    config_sha256: String,
    method: SteadyMethod,
    grid: Vec<f64>,
    initial_states: Vec<String>,
    seeds: Vec<u64>,
    references: ReferencesJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    effective_temperature: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    effective_csv: Option<String>,
    rows: Vec<RowJson>,
}

fn config_hash(cfg: &SweepConfig) -> String {
    let json = serde_json::to_string(cfg).expect("config serializes");
    Sha256::digest(json.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

fn sidecar<'a>(cfg: &'a SweepConfig, kind: &'static str, csv: &Path, points: &[PointResult]) -> Result<Sidecar<'a>> {
    Ok(Sidecar {
        schema_version: SCHEMA_VERSION,
        code_version: CODE_VERSION,
        kind,
        csv: file_name(csv),
        config: cfg,
        config_sha256: config_hash(cfg),
        method: cfg.method,
        grid: cfg.grid.values(),
        initial_states: cfg.initial_states.iter().map(InitialState::label).collect(),
        seeds: cfg.seeds(),
        references: ReferencesJson::new(cfg)?,
        effective_temperature: None,
        effective_csv: None,
        rows: points
            .iter()
            .map(|p| RowJson {
                lambda_b: p.record.lambda_b,
                converged: p.record.converged,
                degenerate: p.degenerate,
                initial_state_spread: p.initial_state_spread,
            })
            .collect(),
    })
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn prepare_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| RunnerError::Io(format!("{}: {e}", dir.display())))
}

/// Files and records produced by one sweep.
#[derive(Clone, Debug)]
pub struct SweepOutput {
    pub points: Vec<PointResult>,
    pub csv: PathBuf,
    pub sidecar: PathBuf,
}

impl SweepOutput {
    pub fn records(&self) -> Vec<ObservableRecord> {
        self.points.iter().map(|p| p.record.clone()).collect()
    }

    pub fn all_converged(&self) -> bool {
        self.points.iter().all(|p| p.record.converged)
    }
}

fn write_sweep<'a>(cfg: &'a SweepConfig, stem: &str, kind: &'static str) -> Result<(SweepOutput, Sidecar<'a>)> {
    prepare_dir(&cfg.output_dir)?;
    let points = sweep_points(cfg)?;
    let csv = cfg.output_dir.join(format!("{stem}.csv"));
    let json = cfg.output_dir.join(format!("{stem}.json"));
    let records: Vec<_> = points.iter().map(|p| p.record.clone()).collect();
    write_csv(&csv, &records, None)?;
    let side = sidecar(cfg, kind, &csv, &points)?;
    Ok((SweepOutput { points, csv, sidecar: json }, side))
}

/// Equal-temperature sweep over the coupling grid.
pub fn run_equilibrium_sweep(cfg: &SweepConfig) -> Result<SweepOutput> {
    if cfg.bath1.temperature != cfg.bath2.temperature {
        return Err(RunnerError::Config("equilibrium sweep needs equal bath temperatures".into()));
    }
    let (out, side) = write_sweep(cfg, "equilibrium", "equilibrium")?;
    output::write_json(&out.sidecar, &side)?;
    Ok(out)
}

/// Non-equilibrium sweep plus the equilibrium sweep at the mean temperature.
#[derive(Clone, Debug)]
pub struct NessOutput {
    pub ness: SweepOutput,
    pub effective: SweepOutput,
    pub effective_temperature: f64,
}

pub fn run_ness_sweep(cfg: &SweepConfig, t1: f64, t2: f64) -> Result<NessOutput> {
    if t1 == t2 {
        return Err(RunnerError::Config("non-equilibrium sweep needs T1 != T2".into()));
    }
    let hot = cfg.with_temperatures(t1, t2);
    hot.validate()?;
    let t_eff = 0.5 * (t1 + t2);
    let eff_cfg = cfg.with_temperatures(t_eff, t_eff);
    let (effective, eff_side) = write_sweep(&eff_cfg, "ness_effective", "ness_effective")?;
    output::write_json(&effective.sidecar, &eff_side)?;
    let (ness, mut side) = write_sweep(&hot, "ness", "ness")?;
    side.effective_temperature = Some(t_eff);
    side.effective_csv = Some(file_name(&effective.csv));
    output::write_json(&ness.sidecar, &side)?;
    Ok(NessOutput { ness, effective, effective_temperature: t_eff })
}

/// A recorded relaxation trajectory.
#[derive(Clone, Debug)]
pub struct RelaxOutput {
    pub times: Vec<f64>,
    pub records: Vec<ObservableRecord>,
    pub final_state: HierarchyState,
    pub csv: PathBuf,
    pub sidecar: PathBuf,
}

/// Propagates the first initial state at `cfg.relax.lambda_b` to
/// `integrator.t_max`, recording every `integrator.record_every` steps.
pub fn run_relax(cfg: &SweepConfig) -> Result<RelaxOutput> {
    cfg.validate()?;
    prepare_dir(&cfg.output_dir)?;
    let lambda_b = cfg.relax.lambda_b;
    let model = cfg.model(lambda_b);
    let refs = References::for_model(&model)?;
    let rho0 = cfg.initial_states[0].density(&cfg.system)?;
    let mut times = Vec::new();
    let mut records = Vec::new();
    let mut failure = None;
    let end = propagate(&rho0, &model, &cfg.integrator, |t, s| {
        let meta = RecordMeta { lambda_b, t_converged: f64::NAN, converged: false };
        match record_with(s, &model, meta, &refs) {
            Ok(r) => {
                times.push(t);
                records.push(r);
                ControlFlow::Continue(())
            }
            Err(e) => {
                failure = Some(e);
                ControlFlow::Break(())
            }
        }
    })?;
    if let Some(e) = failure {
        return Err(e.into());
    }
    let csv = cfg.output_dir.join("relax.csv");
    let json = cfg.output_dir.join("relax.json");
    write_csv(&csv, &records, Some(&times))?;
    #[derive(Serialize)]
    struct RelaxSidecar<'a> {
        schema_version: u32,
        code_version: &'static str,
        kind: &'static str,
        csv: String,
        config: &'a SweepConfig,
        config_sha256: String,
        lambda_b: f64,
        initial_state: String,
        seeds: Vec<u64>,
        references: ReferencesJson,
    }
    output::write_json(
        &json,
        &RelaxSidecar {
            schema_version: SCHEMA_VERSION,
            code_version: CODE_VERSION,
            kind: "relax",
            csv: file_name(&csv),
            config: cfg,
            config_sha256: config_hash(cfg),
            lambda_b,
            initial_state: cfg.initial_states[0].label(),
            seeds: cfg.seeds(),
            references: ReferencesJson::new(cfg)?,
        },
    )?;
    Ok(RelaxOutput { times, records, final_state: end.state, csv, sidecar: json })
}

/// Runs the oracle suite with the configured step size, depth and method
/// and writes `verify.json`.
pub fn run_verify(cfg: &SweepConfig) -> Result<(OracleReport, PathBuf)> {
    cfg.validate()?;
    prepare_dir(&cfg.output_dir)?;
    let opts = SuiteOptions {
        dt: cfg.integrator.dt,
        gibbs_depth: cfg.integrator.depth,
        gibbs_method: cfg.method,
        ..SuiteOptions::default()
    };
    let report = run_oracle_suite(&opts)?;
    let path = cfg.output_dir.join("verify.json");
    #[derive(Serialize)]
    struct VerifyJson<'a> {
        schema_version: u32,
        code_version: &'static str,
        all_ok: bool,
        report: &'a OracleReport,
    }
    output::write_json(
        &path,
        &VerifyJson { schema_version: SCHEMA_VERSION, code_version: CODE_VERSION, all_ok: report.all_ok(), report: &report },
    )?;
    Ok((report, path))
}

/// Overrides applied on top of a loaded config.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub output_dir: Option<PathBuf>,
    pub parallelism: Option<usize>,
    pub depth: Option<usize>,
    pub dt: Option<f64>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut SweepConfig) {
        if let Some(d) = &self.output_dir {
            cfg.output_dir = d.clone();
        }
        if let Some(p) = self.parallelism {
            cfg.parallelism = p;
        }
        let IntegratorConfig { depth, dt, .. } = &mut cfg.integrator;
        if let Some(v) = self.depth {
            *depth = v;
        }
        if let Some(v) = self.dt {
            *dt = v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(dir: &Path) -> SweepConfig {
        let mut c = SweepConfig::from_toml_str("[grid]\nvalues = [0.0, 0.3, 1.0]\n[integrator]\ndepth = 8").unwrap();
        c.output_dir = dir.to_path_buf();
        c
    }

    #[test]
    fn uncoupled_point_is_flagged_degenerate() {
        let dir = tempfile::tempdir().unwrap();
        let out = run_equilibrium_sweep(&small(dir.path())).unwrap();
        assert!(out.points[0].degenerate);
        assert!(!out.points[1].degenerate);
        assert_eq!(out.points[0].record.j1, 0.0);
        let side: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&out.sidecar).unwrap()).unwrap();
        assert_eq!(side["rows"][0]["degenerate"], true);
        assert_eq!(side["schema_version"], SCHEMA_VERSION);
    }

    #[test]
    fn temperature_guards() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = small(dir.path());
        assert!(matches!(run_ness_sweep(&cfg, 1.5, 1.5), Err(RunnerError::Config(_))));
        let hot = cfg.with_temperatures(2.0, 1.0);
        assert_eq!(run_equilibrium_sweep(&hot).unwrap_err().exit_code(), EXIT_CONFIG);
    }

    #[test]
    fn overrides_apply() {
        let mut c = SweepConfig::default();
        Overrides { output_dir: Some("x".into()), parallelism: Some(4), depth: Some(9), dt: Some(0.01) }.apply(&mut c);
        assert_eq!((c.parallelism, c.integrator.depth, c.integrator.dt), (4, 9, 0.01));
        assert_eq!(c.output_dir, PathBuf::from("x"));
    }
}
