//! Batch front-end: `simulate`, `diagnose` and `scenarios`.
//!
//! A simulate run directory holds
//!
//! - `config.toml`: the configuration with every default written out
//! - `snapshots/snap_NNNNNN.cfs`: state snapshots (see [`snapshot`])
//! - `diagnostics.csv`: one row per diagnostic time, columns from [`report::diagnostics_header`]
//! - `fronts.csv`, `particles.csv`: sampled front graphs and particle positions
//! - `verdict.txt`: human-readable criteria summary
//! - `last_state.cfs`: the last finite state, written only after a blow-up

pub mod config;
pub mod report;
pub mod snapshot;

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::diagnostics::{DiagnosticEngine, EngineOptions, FrontTracking, SeriesSummary};
use crate::error::Error;
use crate::fronts::{find_saddles, SaddleReport};
use crate::integrator::{run, Control, RunHooks, RunStatus, StateView};
use crate::models::{builtin_initial_data, Flow, HyperdissipationParams, Model, ModelKind, ModelState, PrescribedFlow};
use crate::spectral::RealField;

pub use config::{load_config, parse_config, parse_diagnose_config, DiagnoseConfig, RunConfig, OUTPUT_ROOT_ENV};
pub use snapshot::Snapshot;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("snapshot error: {0}")]
    Snapshot(String),
    #[error(transparent)]
    Core(#[from] Error),
}

impl RunError {
    pub(crate) fn io(path: &Path, e: std::io::Error) -> Self {
        RunError::Io { path: path.to_path_buf(), message: e.to_string() }
    }
}

/// Process exit statuses of the command-line tool.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Clean = 0,
    ConfigOrIo = 1,
    BlowUp = 2,
    FrontCollapse = 3,
    FrontBreakdown = 4,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }

    pub fn of_run(status: &RunStatus) -> Self {
        match status {
            RunStatus::Finished => Self::Clean,
            RunStatus::BlowUp { .. } => Self::BlowUp,
            RunStatus::Halted(Error::FrontCollapse { .. }) => Self::FrontCollapse,
            RunStatus::Halted(_) => Self::FrontBreakdown,
        }
    }
}

fn status_line(status: &RunStatus) -> String {
    match status {
        RunStatus::Finished => "finished".into(),
        RunStatus::BlowUp { t } => format!("blow-up near t = {t}"),
        RunStatus::Halted(e) => format!("halted: {e}"),
    }
}

#[derive(Debug)]
pub struct SimulateReport {
    pub status: RunStatus,
    pub exit: ExitStatus,
    pub out_dir: PathBuf,
    pub steps: usize,
    pub summary: SeriesSummary,
    pub verdict: String,
}

#[derive(Debug)]
pub struct DiagnoseReport {
    pub out_dir: PathBuf,
    pub snapshots: usize,
    pub summary: SeriesSummary,
    pub saddles: SaddleReport,
    pub verdict: String,
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), RunError> {
    fs::write(path, contents).map_err(|e| RunError::io(path, e))
}

fn create_dir(path: &Path) -> Result<(), RunError> {
    fs::create_dir_all(path).map_err(|e| RunError::io(path, e))
}

fn state_from_snapshot(snap: &Snapshot, kind: &ModelKind) -> Result<ModelState, RunError> {
    if snap.model != kind.name() {
        return Err(RunError::Snapshot(format!(
            "snapshot holds model `{}` but `{}` was requested",
            snap.model,
            kind.name()
        )));
    }
    let theta = if kind.has_theta() { snap.field("theta").cloned() } else { None };
    let omega = if kind.has_omega() { snap.field("omega").cloned() } else { None };
    Ok(ModelState::new(kind.clone(), theta, omega, snap.t)?)
}

fn initial_state(cfg: &RunConfig, kind: &ModelKind) -> Result<ModelState, RunError> {
    let grid = cfg.grid_spec()?;
    match (&cfg.initial.scenario, &cfg.initial.file) {
        (_, Some(file)) => {
            let snap = Snapshot::read(file)?;
            if snap.grid != grid {
                return Err(RunError::Snapshot(format!(
                    "{}: grid {}x{} differs from the configured {}x{}",
                    file.display(),
                    snap.grid.n1(),
                    snap.grid.n2(),
                    grid.n1(),
                    grid.n2()
                )));
            }
            state_from_snapshot(&snap, kind)
        }
        (Some(name), None) => Ok(builtin_initial_data(name, kind, grid)?),
        (None, None) => Ok(builtin_initial_data("zero", kind, grid)?),
    }
}

fn scalar_for_saddles(state: &ModelState) -> Option<&RealField> {
    state.theta.as_ref().or(state.omega.as_ref())
}

struct SimulateHooks {
    engine: DiagnosticEngine,
    snapshot_dir: Option<PathBuf>,
    snapshots: usize,
    store_psi: bool,
    io_error: Option<RunError>,
}

impl RunHooks for SimulateHooks {
    fn on_snapshot(&mut self, view: StateView<'_>) -> crate::Result<Control> {
        let Some(dir) = &self.snapshot_dir else { return Ok(Control::Continue) };
        let psi = self.store_psi.then(|| view.flow.psi_hat.to_real());
        let path = dir.join(format!("snap_{:06}.cfs", self.snapshots));
        self.snapshots += 1;
        match Snapshot::from_state(view.state, psi.as_ref()).write(&path) {
            Ok(()) => Ok(Control::Continue),
            Err(e) => {
                let msg = e.to_string();
                self.io_error = Some(e);
                Ok(Control::Halt(Error::InvalidArgument(msg)))
            }
        }
    }

    fn on_diagnose(&mut self, view: StateView<'_>) -> crate::Result<Control> {
        self.engine.on_diagnose(view)
    }

    fn on_step(&mut self, before: StateView<'_>, after: StateView<'_>, dt: f64) -> crate::Result<Control> {
        self.engine.on_step(before, after, dt)
    }
}

/// Runs a configured simulation and writes every artifact into `out_dir`
/// (or the configured directory).
pub fn simulate(cfg: &RunConfig, out_dir: Option<&Path>) -> Result<SimulateReport, RunError> {
    let grid = cfg.grid_spec()?;
    let kind = cfg.model_kind()?;
    let model = Model::new(kind.clone(), grid, cfg.hyper()?)?;
    let ctl = cfg.step_control()?;
    let s0 = initial_state(cfg, &kind)?;
    let saddles = scalar_for_saddles(&s0).map(find_saddles).unwrap_or_default();

    let out_dir = out_dir.map(Path::to_path_buf).unwrap_or_else(|| cfg.output_dir());
    create_dir(&out_dir)?;
    write(&out_dir.join("config.toml"), cfg.to_toml())?;
    let snapshot_dir = if cfg.output.snapshots {
        let d = out_dir.join("snapshots");
        create_dir(&d)?;
        // a previous run into the same directory may have left more snapshots
        for stale in snapshot_files(&d)? {
            fs::remove_file(&stale).map_err(|e| RunError::io(&stale, e))?;
        }
        Some(d)
    } else {
        None
    };

    let engine =
        DiagnosticEngine::new(grid, cfg.front_specs()?, cfg.particle_set()?, cfg.diagnostics.engine_options())?;
    let mut hooks = SimulateHooks {
        engine,
        snapshot_dir,
        snapshots: 0,
        store_psi: matches!(kind, ModelKind::PassiveScalar(_)),
        io_error: None,
    };
    let outcome = run(&model, s0, &ctl, &mut hooks)?;
    if let Some(e) = hooks.io_error {
        return Err(e);
    }
    if matches!(outcome.status, RunStatus::BlowUp { .. }) {
        Snapshot::from_state(&outcome.state, None).write(&out_dir.join("last_state.cfs"))?;
    }

    let series = hooks.engine.series();
    let summary = series.summarize(&cfg.diagnostics.summary_options())?;
    write(&out_dir.join("diagnostics.csv"), report::diagnostics_csv(series, &summary))?;
    write(&out_dir.join("fronts.csv"), report::fronts_csv(series))?;
    if hooks.engine.particles().is_some() {
        write(&out_dir.join("particles.csv"), report::particles_csv(hooks.engine.tracks()))?;
    }
    let notes: Vec<String> = hooks
        .engine
        .shield_lost()
        .iter()
        .enumerate()
        .filter_map(|(k, lost)| {
            lost.map(|t| {
                format!(
                    "front {k}: from t = {t} the advected graphs may carry window-end error into [a, b]; \
                     raise diagnostics.advect_margin"
                )
            })
        })
        .collect();
    let verdict = report::verdict_text(kind.name(), &status_line(&outcome.status), &notes, &summary, &saddles);
    write(&out_dir.join("verdict.txt"), &verdict)?;

    Ok(SimulateReport {
        exit: ExitStatus::of_run(&outcome.status),
        status: outcome.status,
        out_dir,
        steps: outcome.steps,
        summary,
        verdict,
    })
}

/// Snapshot files of a run directory (its `snapshots/` subdirectory when
/// present), sorted by name.
pub fn snapshot_files(dir: &Path) -> Result<Vec<PathBuf>, RunError> {
    let sub = dir.join("snapshots");
    let root = if sub.is_dir() { sub } else { dir.to_path_buf() };
    let entries = fs::read_dir(&root).map_err(|e| RunError::io(&root, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| RunError::io(&root, e))?.path();
        if path.extension().is_some_and(|e| e == "cfs") {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

fn kind_for_snapshot(snap: &Snapshot) -> Result<ModelKind, RunError> {
    if snap.model == "passive" {
        // The flow comes from the stored stream function, not from an expression.
        Ok(ModelKind::PassiveScalar(PrescribedFlow::from_fn("stored psi", true, |_, _, _| 0.0)))
    } else {
        ModelKind::from_name(&snap.model, None).map_err(|e| RunError::Snapshot(e.to_string()))
    }
}

/// Re-derives the full criteria series from stored snapshots.
pub fn diagnose(dir: &Path, dcfg: &DiagnoseConfig, out_dir: Option<&Path>) -> Result<DiagnoseReport, RunError> {
    let files = snapshot_files(dir)?;
    if files.is_empty() {
        return Err(RunError::Snapshot(format!("no .cfs snapshots in {}", dir.display())));
    }
    let snaps = files.iter().map(|f| Snapshot::read(f)).collect::<Result<Vec<_>, _>>()?;
    if let Some(k) = snaps.windows(2).position(|w| !(w[1].t > w[0].t)) {
        return Err(Error::NonMonotoneTime { index: k + 1 }.into());
    }
    let grid = snaps[0].grid;
    if snaps.iter().any(|s| s.grid != grid || s.model != snaps[0].model) {
        return Err(RunError::Snapshot("snapshots mix grids or models".into()));
    }
    let kind = kind_for_snapshot(&snaps[0])?;
    let model = Model::new(kind.clone(), grid, HyperdissipationParams::default())?;
    let specs = config::front_specs(&dcfg.fronts, 2 * grid.n1())?;
    let opts = EngineOptions { tracking: FrontTracking::Extract, ..dcfg.diagnostics.engine_options() };
    let mut engine = DiagnosticEngine::new(grid, specs, None, opts)?;

    let mut first_state = None;
    for snap in &snaps {
        let state = state_from_snapshot(snap, &kind)?;
        let flow = match (&kind, snap.field("psi")) {
            (ModelKind::PassiveScalar(_), Some(psi)) => Flow::from_stream(psi.to_spectral()),
            (ModelKind::PassiveScalar(_), None) => {
                return Err(RunError::Snapshot("passive snapshot without a psi field".into()));
            }
            _ => model.flow_of_state(&state)?,
        };
        engine.observe(StateView { state: &state, flow: &flow })?;
        first_state.get_or_insert(state);
    }

    let saddles = first_state.as_ref().and_then(scalar_for_saddles).map(find_saddles).unwrap_or_default();
    let out_dir = match (out_dir, &dcfg.output) {
        (Some(d), _) => d.to_path_buf(),
        (None, Some(d)) => config::resolve_output(d),
        (None, None) => dir.join("diagnose"),
    };
    create_dir(&out_dir)?;
    let series = engine.series();
    let summary = series.summarize(&dcfg.diagnostics.summary_options())?;
    write(&out_dir.join("diagnostics.csv"), report::diagnostics_csv(series, &summary))?;
    write(&out_dir.join("fronts.csv"), report::fronts_csv(series))?;
    let status = if snaps.len() == 1 {
        "single snapshot: static report (sups and saddles only)".to_string()
    } else {
        format!("diagnosed {} snapshots", snaps.len())
    };
    let verdict = report::verdict_text(kind.name(), &status, &[], &summary, &saddles);
    write(&out_dir.join("verdict.txt"), &verdict)?;
    Ok(DiagnoseReport { out_dir, snapshots: snaps.len(), summary, saddles, verdict })
}

/// `name  description` lines for the built-in initial data.
pub fn scenarios_listing() -> String {
    crate::models::SCENARIOS.iter().map(|s| format!("{:<18} {}\n", s.name, s.description)).collect()
}
