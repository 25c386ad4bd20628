//! Run configuration in TOML.
//!
//! ```toml
//! [model]
//! kind = "passive"                  # passive | euler | qg | boussinesq | mhd
//! stream_function = "sin(x1)*sin(x2)"
//!
//! [grid]
//! n1 = 128
//! n2 = 128                          # defaults to n1
//!
//! [initial]
//! scenario = "stripes"              # or: file = "start.cfs"
//!
//! [time]
//! t_end = 1.0
//! cfl = 0.5
//! dt_max = 0.1
//! snapshot_every = 0.1              # defaults to t_end / 10
//! diagnose_every = 0.01             # defaults to t_end / 100
//!
//! [hyperdissipation]
//! nu = 0.0
//! p = 4
//!
//! [[fronts]]
//! level_plus = 0.2
//! level_minus = -0.2
//! a = 0.5
//! b = 2.5
//! seed_plus = 0.2                   # a number or [[x1, x2], ...]
//! seed_minus = -0.2
//! samples = 256                     # defaults to 2 * n1
//! max_slope = 100.0                 # steeper graphs count as a breakdown
//!
//! [particles]
//! positions = [[1.0, 1.0], [1.1, 1.0]]
//! pairs = [[0, 1]]
//!
//! [diagnostics]
//! refine = 2
//! tracking = "extract"              # or "advect"
//! advect_margin = 1.0               # x1 length tracked beyond each window end when advecting
//! sampler = "bicubic"               # or "fourier" (exact, slower)
//! collision_tol = 0.02
//! delta_tol = 0.02
//! dadt_rel_tol = 1e-6
//! collapse_ratio = 0.01
//!
//! [output]
//! dir = "runs/example"
//! snapshots = true
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::RunError;
use crate::diagnostics::{EngineOptions, FrontTracking, MonitorOptions, SummaryOptions};
use crate::fronts::{FrontSpec, SeedPath};
use crate::integrator::StepControl;
use crate::models::{HyperdissipationParams, ModelKind, SCENARIOS};
use crate::particles::ParticleSet;
use crate::spectral::{GridSpec, SampleMode};

/// Environment variable that relocates relative output directories.
pub const OUTPUT_ROOT_ENV: &str = "SHARPFRONT_OUTPUT_ROOT";

const REQUIRED: [(&str, &str); 3] = [("model", "kind"), ("grid", "n1"), ("time", "t_end")];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSection,
    pub grid: GridSection,
    #[serde(default)]
    pub initial: InitialSection,
    pub time: TimeSection,
    #[serde(default)]
    pub hyperdissipation: HyperSection,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub fronts: Vec<FrontSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub particles: Option<ParticleSection>,
    #[serde(default)]
    pub diagnostics: DiagnosticsSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stream_function: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n1: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n2: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub t_end: f64,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default = "default_dt_max")]
    pub dt_max: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_every: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnose_every: Option<f64>,
}

fn default_cfl() -> f64 {
    0.5
}

fn default_dt_max() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HyperSection {
    #[serde(default)]
    pub nu: f64,
    #[serde(default = "default_power")]
    pub p: u32,
}

fn default_power() -> u32 {
    4
}

impl Default for HyperSection {
    fn default() -> Self {
        Self { nu: 0.0, p: default_power() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SeedValue {
    Constant(f64),
    Polyline(Vec<[f64; 2]>),
}

impl From<&SeedValue> for SeedPath {
    fn from(v: &SeedValue) -> Self {
        match v {
            SeedValue::Constant(c) => SeedPath::Constant(*c),
            SeedValue::Polyline(p) => SeedPath::Polyline(p.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrontSection {
    pub level_plus: f64,
    pub level_minus: f64,
    pub a: f64,
    pub b: f64,
    pub seed_plus: SeedValue,
    pub seed_minus: SeedValue,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default = "default_max_slope")]
    pub max_slope: f64,
}

fn default_max_slope() -> f64 {
    FrontSpec::DEFAULT_MAX_SLOPE
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParticleSection {
    pub positions: Vec<[f64; 2]>,
    #[serde(default)]
    pub pairs: Vec<[usize; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrackingName {
    #[default]
    Extract,
    Advect,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerName {
    #[default]
    Bicubic,
    Fourier,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsSection {
    #[serde(default = "default_refine")]
    pub refine: usize,
    #[serde(default)]
    pub tracking: TrackingName,
    #[serde(default)]
    pub sampler: SamplerName,
    /// x1 length carried beyond each window end by advect tracking.
    #[serde(default = "default_advect_margin")]
    pub advect_margin: f64,
    #[serde(default = "default_tol")]
    pub collision_tol: f64,
    #[serde(default = "default_tol")]
    pub delta_tol: f64,
    #[serde(default = "default_dadt_tol")]
    pub dadt_rel_tol: f64,
    #[serde(default = "default_collapse_ratio")]
    pub collapse_ratio: f64,
}

fn default_refine() -> usize {
    2
}

fn default_advect_margin() -> f64 {
    EngineOptions::default().advect_margin
}

fn default_tol() -> f64 {
    0.02
}

fn default_dadt_tol() -> f64 {
    MonitorOptions::default().dadt_rel_tol
}

fn default_collapse_ratio() -> f64 {
    MonitorOptions::default().collapse_ratio
}

impl Default for DiagnosticsSection {
    fn default() -> Self {
        Self {
            refine: default_refine(),
            tracking: TrackingName::default(),
            sampler: SamplerName::default(),
            advect_margin: default_advect_margin(),
            collision_tol: default_tol(),
            delta_tol: default_tol(),
            dadt_rel_tol: default_dadt_tol(),
            collapse_ratio: default_collapse_ratio(),
        }
    }
}

impl DiagnosticsSection {
    pub fn engine_options(&self) -> EngineOptions {
        EngineOptions {
            refine: self.refine,
            tracking: match self.tracking {
                TrackingName::Extract => FrontTracking::Extract,
                TrackingName::Advect => FrontTracking::Advect,
            },
            sample_mode: match self.sampler {
                SamplerName::Bicubic => SampleMode::Bicubic,
                SamplerName::Fourier => SampleMode::Fourier,
            },
            advect_margin: self.advect_margin,
        }
    }

    pub fn summary_options(&self) -> SummaryOptions {
        SummaryOptions {
            monitor: MonitorOptions { dadt_rel_tol: self.dadt_rel_tol, collapse_ratio: self.collapse_ratio },
            collision_tol: self.collision_tol,
            delta_tol: self.delta_tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "yes")]
    pub snapshots: bool,
}

fn default_dir() -> PathBuf {
    PathBuf::from("sharpfront_out")
}

fn yes() -> bool {
    true
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: default_dir(), snapshots: true }
    }
}

fn config_error(msg: impl Into<String>) -> RunError {
    RunError::Config(msg.into())
}

/// Parses, fills every default and validates a configuration.
pub fn parse_config(text: &str) -> Result<RunConfig, RunError> {
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| config_error(e.message().to_string()))?;
    let missing: Vec<String> = REQUIRED
        .iter()
        .filter(|(section, key)| {
            table.get(*section).and_then(|s| s.as_table()).is_none_or(|s| !s.contains_key(*key))
        })
        .map(|(section, key)| format!("{section}.{key}"))
        .collect();
    if !missing.is_empty() {
        return Err(config_error(format!("missing required keys: {}", missing.join(", "))));
    }

    let de = toml::Deserializer::parse(text).map_err(|e| config_error(e.message().to_string()))?;
    let mut cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        config_error(format!("{path}: {}", e.into_inner().message()))
    })?;
    cfg.resolve();
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<RunConfig, RunError> {
    let text = std::fs::read_to_string(path).map_err(|e| RunError::io(path, e))?;
    parse_config(&text)
}

impl RunConfig {
    /// Writes every defaulted value explicitly.
    fn resolve(&mut self) {
        self.grid.n2.get_or_insert(self.grid.n1);
        if self.initial.scenario.is_none() && self.initial.file.is_none() {
            self.initial.scenario = Some("zero".into());
        }
        let t_end = self.time.t_end;
        self.time.snapshot_every.get_or_insert(t_end / 10.0);
        self.time.diagnose_every.get_or_insert(t_end / 100.0);
        let samples = 2 * self.grid.n1;
        for f in &mut self.fronts {
            f.samples.get_or_insert(samples);
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration types serialize")
    }

    pub fn grid_spec(&self) -> Result<GridSpec, RunError> {
        GridSpec::new(self.grid.n1, self.grid.n2.unwrap_or(self.grid.n1)).map_err(|e| config_error(format!("grid: {e}")))
    }

    pub fn model_kind(&self) -> Result<ModelKind, RunError> {
        if self.model.kind != "passive" && self.model.stream_function.is_some() {
            return Err(config_error(format!(
                "model.stream_function: only the passive model takes a stream function, not `{}`",
                self.model.kind
            )));
        }
        ModelKind::from_name(&self.model.kind, self.model.stream_function.as_deref())
            .map_err(|e| config_error(format!("model: {e}")))
    }

    pub fn hyper(&self) -> Result<HyperdissipationParams, RunError> {
        HyperdissipationParams::new(self.hyperdissipation.nu, self.hyperdissipation.p)
            .map_err(|e| config_error(format!("hyperdissipation: {e}")))
    }

    pub fn step_control(&self) -> Result<StepControl, RunError> {
        let t = &self.time;
        StepControl::new(
            t.cfl,
            t.dt_max,
            t.t_end,
            t.snapshot_every.unwrap_or(t.t_end),
            t.diagnose_every.unwrap_or(t.t_end),
        )
        .map_err(|e| config_error(format!("time: {e}")))
    }

    pub fn front_specs(&self) -> Result<Vec<FrontSpec>, RunError> {
        front_specs(&self.fronts, 2 * self.grid.n1)
    }

    pub fn particle_set(&self) -> Result<Option<ParticleSet>, RunError> {
        self.particles
            .as_ref()
            .map(|p| {
                ParticleSet::new(p.positions.clone(), p.pairs.iter().map(|q| (q[0], q[1])).collect())
                    .map_err(|e| config_error(format!("particles: {e}")))
            })
            .transpose()
    }

    /// Output directory, placed under the output-root variable when relative.
    pub fn output_dir(&self) -> PathBuf {
        resolve_output(&self.output.dir)
    }

    fn validate(&self) -> Result<(), RunError> {
        self.grid_spec()?;
        let kind = self.model_kind()?;
        self.hyper()?;
        self.step_control()?;
        if !(self.time.t_end > 0.0) {
            return Err(config_error("time.t_end: must be positive"));
        }
        match (&self.initial.scenario, &self.initial.file) {
            (Some(_), Some(_)) => {
                return Err(config_error("initial: give either scenario or file, not both"));
            }
            (Some(name), None) if !SCENARIOS.iter().any(|s| s.name == name) => {
                let names: Vec<&str> = SCENARIOS.iter().map(|s| s.name).collect();
                return Err(config_error(format!("initial.scenario: unknown `{name}` (known: {})", names.join(", "))));
            }
            _ => {}
        }
        self.front_specs()?;
        if !self.fronts.is_empty() && !kind.has_theta() {
            return Err(config_error(format!("fronts: model `{}` has no theta field to track", kind.name())));
        }
        self.particle_set()?;
        let d = &self.diagnostics;
        if d.refine == 0 {
            return Err(config_error("diagnostics.refine: must be at least 1"));
        }
        if !(d.advect_margin >= 0.0 && d.advect_margin.is_finite()) {
            return Err(config_error("diagnostics.advect_margin: must be finite and non-negative"));
        }
        for (name, v) in [
            ("collision_tol", d.collision_tol),
            ("delta_tol", d.delta_tol),
            ("dadt_rel_tol", d.dadt_rel_tol),
            ("collapse_ratio", d.collapse_ratio),
        ] {
            if !(v.is_finite() && (0.0..1.0).contains(&v)) {
                return Err(config_error(format!("diagnostics.{name}: must lie in [0, 1)")));
            }
        }
        Ok(())
    }
}

pub(crate) fn resolve_output(dir: &Path) -> PathBuf {
    match std::env::var_os(OUTPUT_ROOT_ENV) {
        Some(root) if dir.is_relative() && !root.is_empty() => PathBuf::from(root).join(dir),
        _ => dir.to_path_buf(),
    }
}

pub(crate) fn front_specs(fronts: &[FrontSection], default_samples: usize) -> Result<Vec<FrontSpec>, RunError> {
    fronts
        .iter()
        .enumerate()
        .map(|(k, f)| {
            let mut spec = FrontSpec::new(
                f.level_plus,
                f.level_minus,
                (f.a, f.b),
                (&f.seed_plus).into(),
                (&f.seed_minus).into(),
                f.samples.unwrap_or(default_samples),
            )
            .map_err(|e| config_error(format!("fronts[{k}]: {e}")))?;
            spec.max_slope = f.max_slope;
            spec.validate().map_err(|e| config_error(format!("fronts[{k}]: {e}")))?;
            Ok(spec)
        })
        .collect()
}

/// Front and diagnostic settings for post-hoc diagnosis of stored snapshots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnoseConfig {
    #[serde(default)]
    pub fronts: Vec<FrontSection>,
    #[serde(default)]
    pub diagnostics: DiagnosticsSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

pub fn parse_diagnose_config(text: &str) -> Result<DiagnoseConfig, RunError> {
    let de = toml::Deserializer::parse(text).map_err(|e| config_error(e.message().to_string()))?;
    let cfg: DiagnoseConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        config_error(format!("{path}: {}", e.into_inner().message()))
    })?;
    if cfg.diagnostics.refine == 0 {
        return Err(config_error("diagnostics.refine: must be at least 1"));
    }
    Ok(cfg)
}
