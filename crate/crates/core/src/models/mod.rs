//! The equation systems: how velocity is recovered from the prognostic
//! state and how each prognostic field evolves.
//!
//! Every model transports a scalar `θ` (or, for Euler, only the vorticity)
//! by `u = ∇⊥ψ`. The stream function comes from
//!
//! | model       | prognostic | stream function           | vorticity forcing  |
//! |-------------|------------|---------------------------|--------------------|
//! | passive     | θ          | prescribed `ψ(x, t)`      | n/a                |
//! | euler       | ω          | `ω = -Δψ`                 | 0                  |
//! | qg          | θ          | `θ = -(-Δ)^{1/2} ψ`       | n/a                |
//! | boussinesq  | θ, ω       | `ω = -Δψ`                 | `-∂θ/∂x1`          |
//! | mhd         | θ, ω       | `ω = -Δψ`                 | `∇⊥θ · ∇(Δθ)`      |

mod scenarios;

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{
    perp_gradient, Derivative, Elliptic, GridSpec, RealField, SpectralField, VectorField,
};

pub use scenarios::{builtin_initial_data, ScenarioInfo, SCENARIOS};

type StreamFn = dyn Fn(f64, f64, f64) -> f64 + Send + Sync;

#[derive(Clone)]
enum FlowSource {
    Expr(meval::Expr),
    Native(Arc<StreamFn>),
}

type BoundFn = Box<dyn Fn(f64, f64, f64) -> f64>;

thread_local! {
    // Bound expression closures hold non-`Send` evaluation contexts, so each
    // thread compiles its own copy once.
    static BOUND: RefCell<HashMap<String, BoundFn>> =
        RefCell::new(HashMap::new());
}

/// Closed-form stream function `ψ(x1, x2, t)` driving a passive scalar.
#[derive(Clone)]
pub struct PrescribedFlow {
    label: String,
    source: FlowSource,
    steady: bool,
}

impl PrescribedFlow {
    /// Parses an expression in `x1`, `x2` and optionally `t`, e.g.
    /// `"sin(x1)*sin(x2)"`. Flows that never mention `t` are treated as steady.
    pub fn parse(expr: &str) -> Result<Self> {
        let bad = |e: &dyn fmt::Display| Error::InvalidArgument(format!("stream function `{expr}`: {e}"));
        let parsed: meval::Expr = expr.parse().map_err(|e| bad(&e))?;
        let steady = parsed.clone().bind2("x1", "x2").is_ok();
        let _ = parsed.clone().bind3("x1", "x2", "t").map_err(|e| bad(&e))?;
        Ok(Self { label: expr.to_string(), source: FlowSource::Expr(parsed), steady })
    }

    pub fn from_fn(
        label: impl Into<String>,
        steady: bool,
        f: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self { label: label.into(), source: FlowSource::Native(Arc::new(f)), steady }
    }

    pub fn expression(&self) -> &str {
        &self.label
    }

    pub fn is_steady(&self) -> bool {
        self.steady
    }

    fn with_fn<R>(&self, body: impl FnOnce(&dyn Fn(f64, f64, f64) -> f64) -> R) -> R {
        match &self.source {
            FlowSource::Native(f) => body(f.as_ref()),
            FlowSource::Expr(expr) => BOUND.with(|cache| {
                let mut cache = cache.borrow_mut();
                let f = cache.entry(self.label.clone()).or_insert_with(|| {
                    Box::new(expr.clone().bind3("x1", "x2", "t").expect("validated in parse"))
                });
                body(f.as_ref())
            }),
        }
    }

    pub fn eval(&self, x1: f64, x2: f64, t: f64) -> f64 {
        self.with_fn(|f| f(x1, x2, t))
    }

    pub fn stream_on_grid(&self, grid: GridSpec, t: f64) -> Result<RealField> {
        let values = self.with_fn(|f| RealField::from_fn(grid, |x1, x2| f(x1, x2, t)).into_values());
        RealField::new(grid, values).map_err(|_| {
            Error::InvalidArgument(format!("stream function `{}` is not finite on the grid at t = {t}", self.label))
        })
    }
}

impl fmt::Debug for PrescribedFlow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PrescribedFlow")
            .field("expression", &self.label)
            .field("steady", &self.steady)
            .finish()
    }
}

impl PartialEq for PrescribedFlow {
    fn eq(&self, other: &Self) -> bool {
        self.label == other.label && self.steady == other.steady
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelKind {
    PassiveScalar(PrescribedFlow),
    Euler2D,
    QG,
    Boussinesq,
    MHD,
}

impl ModelKind {
    pub const NAMES: [&'static str; 5] = ["passive", "euler", "qg", "boussinesq", "mhd"];

    /// Looks a model up by its configuration name. `passive` needs a stream function.
    pub fn from_name(name: &str, stream_function: Option<&str>) -> Result<Self> {
        match (name, stream_function) {
            ("passive", Some(expr)) => Ok(Self::PassiveScalar(PrescribedFlow::parse(expr)?)),
            ("passive", None) => Err(Error::InvalidArgument(
                "model `passive` needs a stream_function expression".into(),
            )),
            ("euler", _) => Ok(Self::Euler2D),
            ("qg", _) => Ok(Self::QG),
            ("boussinesq", _) => Ok(Self::Boussinesq),
            ("mhd", _) => Ok(Self::MHD),
            (other, _) => Err(Error::InvalidArgument(format!(
                "unknown model `{other}` (expected one of {:?})",
                Self::NAMES
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::PassiveScalar(_) => "passive",
            Self::Euler2D => "euler",
            Self::QG => "qg",
            Self::Boussinesq => "boussinesq",
            Self::MHD => "mhd",
        }
    }

    pub fn has_theta(&self) -> bool {
        !matches!(self, Self::Euler2D)
    }

    pub fn has_omega(&self) -> bool {
        matches!(self, Self::Euler2D | Self::Boussinesq | Self::MHD)
    }
}

/// Artificial `-nu (-Δ)^p` damping; `nu = 0` gives the inviscid equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperdissipationParams {
    pub nu: f64,
    pub p: u32,
}

impl Default for HyperdissipationParams {
    fn default() -> Self {
        Self { nu: 0.0, p: 4 }
    }
}

impl HyperdissipationParams {
    pub fn new(nu: f64, p: u32) -> Result<Self> {
        if !(nu.is_finite() && nu >= 0.0) {
            return Err(Error::InvalidArgument(format!("hyperdissipation nu must be >= 0, got {nu}")));
        }
        if p < 1 {
            return Err(Error::InvalidArgument("hyperdissipation power p must be >= 1".into()));
        }
        Ok(Self { nu, p })
    }

    pub fn is_active(&self) -> bool {
        self.nu > 0.0
    }

    fn rate(&self, k_sq: f64) -> f64 {
        self.nu * k_sq.powi(self.p as i32)
    }

    /// Largest damping rate among dealiased modes.
    pub fn max_rate(&self, grid: GridSpec) -> f64 {
        self.rate(grid.retained_k_max_sq())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelState {
    pub kind: ModelKind,
    pub theta: Option<RealField>,
    pub omega: Option<RealField>,
    pub t: f64,
}

impl ModelState {
    /// Checks that exactly the model's prognostic fields are present and share a grid.
    pub fn new(
        kind: ModelKind,
        theta: Option<RealField>,
        omega: Option<RealField>,
        t: f64,
    ) -> Result<Self> {
        if kind.has_theta() != theta.is_some() {
            return Err(Error::InvalidArgument(format!(
                "model `{}` {} a theta field",
                kind.name(),
                if kind.has_theta() { "needs" } else { "takes no" }
            )));
        }
        if kind.has_omega() != omega.is_some() {
            return Err(Error::InvalidArgument(format!(
                "model `{}` {} an omega field",
                kind.name(),
                if kind.has_omega() { "needs" } else { "takes no" }
            )));
        }
        if let (Some(a), Some(b)) = (&theta, &omega) {
            if a.grid() != b.grid() {
                return Err(Error::GridMismatch);
            }
        }
        if !t.is_finite() {
            return Err(Error::InvalidArgument("state time must be finite".into()));
        }
        Ok(Self { kind, theta, omega, t })
    }

    pub fn grid(&self) -> GridSpec {
        self.theta
            .as_ref()
            .or(self.omega.as_ref())
            .map(RealField::grid)
            .expect("every model carries at least one field")
    }

    pub fn is_finite(&self) -> bool {
        self.theta.as_ref().is_none_or(RealField::is_finite)
            && self.omega.as_ref().is_none_or(RealField::is_finite)
    }
}

/// Time derivatives of the prognostic fields.
#[derive(Debug, Clone, PartialEq)]
pub struct Tendency {
    pub dtheta: Option<RealField>,
    pub domega: Option<RealField>,
}

/// Velocity and stream function recovered from a state.
pub fn velocity_of_state(s: &ModelState) -> Result<(VectorField, RealField)> {
    let model = Model::new(s.kind.clone(), s.grid(), HyperdissipationParams::default())?;
    let flow = model.flow(s.t, &Prognostic::from_state(s))?;
    Ok((flow.velocity, flow.psi_hat.to_real()))
}

pub fn tendency(s: &ModelState, hyper: HyperdissipationParams) -> Result<Tendency> {
    let model = Model::new(s.kind.clone(), s.grid(), hyper)?;
    let d = model.rhs(s.t, &Prognostic::from_state(s))?;
    Ok(Tendency {
        dtheta: d.theta.map(|f| f.to_real()),
        domega: d.omega.map(|f| f.to_real()),
    })
}

/// Spectral coefficients of the prognostic fields; the integrator's working state.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Prognostic {
    pub theta: Option<SpectralField>,
    pub omega: Option<SpectralField>,
}

impl Prognostic {
    pub fn from_state(s: &ModelState) -> Self {
        Self {
            theta: s.theta.as_ref().map(RealField::to_spectral),
            omega: s.omega.as_ref().map(RealField::to_spectral),
        }
    }

    pub fn into_state(self, kind: ModelKind, t: f64) -> ModelState {
        ModelState {
            kind,
            theta: self.theta.map(|f| f.to_real()),
            omega: self.omega.map(|f| f.to_real()),
            t,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.theta.as_ref().is_none_or(SpectralField::is_finite)
            && self.omega.as_ref().is_none_or(SpectralField::is_finite)
    }

    /// `self += a * other`, field by field.
    pub fn axpy(&mut self, a: f64, other: &Prognostic) {
        fn go(y: &mut Option<SpectralField>, a: f64, x: &Option<SpectralField>) {
            if let (Some(y), Some(x)) = (y, x) {
                for (yc, xc) in y.coeffs_mut().iter_mut().zip(x.coeffs()) {
                    *yc += xc * a;
                }
            }
        }
        go(&mut self.theta, a, &other.theta);
        go(&mut self.omega, a, &other.omega);
    }
}

/// Velocity, stream function and velocity gradients' source at one instant.
#[derive(Debug, Clone)]
pub struct Flow {
    pub velocity: VectorField,
    pub psi_hat: SpectralField,
}

impl Flow {
    /// Flow of a given stream function; the mean of `psi_hat` is dropped.
    pub fn from_stream(psi_hat: SpectralField) -> Self {
        let psi_hat = zero_mean(psi_hat);
        Self { velocity: perp_gradient(&psi_hat), psi_hat }
    }
}

/// A model bound to a grid, with the stream function of steady prescribed
/// flows computed once.
#[derive(Debug, Clone)]
pub struct Model {
    kind: ModelKind,
    grid: GridSpec,
    hyper: HyperdissipationParams,
    steady: Option<Flow>,
}

impl Model {
    pub fn new(kind: ModelKind, grid: GridSpec, hyper: HyperdissipationParams) -> Result<Self> {
        let steady = match &kind {
            ModelKind::PassiveScalar(flow) if flow.is_steady() => {
                Some(Flow::from_stream(flow.stream_on_grid(grid, 0.0)?.to_spectral()))
            }
            _ => None,
        };
        Ok(Self { kind, grid, hyper, steady })
    }

    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn hyper(&self) -> HyperdissipationParams {
        self.hyper
    }

    pub(crate) fn stream_hat(&self, t: f64, p: &Prognostic) -> Result<SpectralField> {
        match &self.kind {
            ModelKind::PassiveScalar(flow) => match &self.steady {
                Some(f) => Ok(f.psi_hat.clone()),
                None => Ok(zero_mean(flow.stream_on_grid(self.grid, t)?.to_spectral())),
            },
            ModelKind::QG => {
                let theta = p.theta.as_ref().expect("qg carries theta");
                theta.check_gauge("theta")?;
                Ok(theta.invert_elliptic(Elliptic::NegInvSqrtLaplacian)?.scale(-1.0))
            }
            ModelKind::Euler2D | ModelKind::Boussinesq | ModelKind::MHD => {
                let omega = p.omega.as_ref().expect("model carries omega");
                omega.check_gauge("omega")?;
                omega.invert_elliptic(Elliptic::NegInvLaplacian)
            }
        }
    }

    pub(crate) fn flow(&self, t: f64, p: &Prognostic) -> Result<Flow> {
        if let Some(f) = &self.steady {
            return Ok(f.clone());
        }
        Ok(Flow::from_stream(self.stream_hat(t, p)?))
    }

    pub fn flow_of_state(&self, s: &ModelState) -> Result<Flow> {
        self.flow(s.t, &Prognostic::from_state(s))
    }

    /// Time derivative of the spectral prognostic state.
    pub(crate) fn rhs(&self, t: f64, p: &Prognostic) -> Result<Prognostic> {
        let flow = self.flow(t, p)?;
        let u = &flow.velocity;

        let mut theta_grad = None;
        let dtheta = match &p.theta {
            Some(theta) => {
                let tx = theta.derivative(Derivative::D1).to_real();
                let ty = theta.derivative(Derivative::D2).to_real();
                let adv = advection(u, &tx, &ty);
                theta_grad = Some((tx, ty));
                Some(adv)
            }
            None => None,
        };

        let domega = match &p.omega {
            Some(omega) => {
                let wx = omega.derivative(Derivative::D1).to_real();
                let wy = omega.derivative(Derivative::D2).to_real();
                let mut d = advection(u, &wx, &wy);
                match &self.kind {
                    ModelKind::Boussinesq => {
                        let theta = p.theta.as_ref().expect("boussinesq carries theta");
                        let f = theta.derivative(Derivative::D1).dealias();
                        for (dc, fc) in d.coeffs_mut().iter_mut().zip(f.coeffs()) {
                            *dc -= fc;
                        }
                    }
                    ModelKind::MHD => {
                        let theta = p.theta.as_ref().expect("mhd carries theta");
                        let (tx, ty) = theta_grad.as_ref().expect("theta gradient computed above");
                        let f = lorentz_forcing(theta, tx, ty);
                        for (dc, fc) in d.coeffs_mut().iter_mut().zip(f.coeffs()) {
                            *dc += fc;
                        }
                    }
                    _ => {}
                }
                Some(d)
            }
            None => None,
        };

        let mut out = Prognostic { theta: dtheta, omega: domega };
        for (field, state) in [(&mut out.theta, &p.theta), (&mut out.omega, &p.omega)] {
            if let (Some(d), Some(q)) = (field.as_mut(), state.as_ref()) {
                // Every tendency is a divergence, so the mean never changes.
                d.coeffs_mut()[0] = Complex64::default();
                if self.hyper.is_active() {
                    self.damp(d, q);
                }
            }
        }
        Ok(out)
    }

    fn damp(&self, d: &mut SpectralField, q: &SpectralField) {
        let g = self.grid;
        for i in 0..g.n1() {
            let k1 = g.wavenumber1(i);
            for j in 0..g.n2() {
                let k2 = g.wavenumber2(j);
                let s = g.index(i, j);
                let rate = self.hyper.rate((k1 * k1 + k2 * k2) as f64);
                d.coeffs_mut()[s] -= q.coeffs()[s] * rate;
            }
        }
    }
}

fn zero_mean(mut f: SpectralField) -> SpectralField {
    f.coeffs_mut()[0] = Complex64::default();
    f
}

/// `-(u · ∇q)` from the grid gradient of `q`, dealiased.
fn advection(u: &VectorField, qx: &RealField, qy: &RealField) -> SpectralField {
    let values = u
        .u1
        .values()
        .iter()
        .zip(u.u2.values())
        .zip(qx.values().iter().zip(qy.values()))
        .map(|((a, b), (x, y))| -(a * x + b * y))
        .collect();
    let mut f = RealField::from_raw(u.grid(), values).to_spectral();
    f.dealias_in_place();
    f
}

/// `∇⊥θ · ∇(Δθ) = -θ_2 J_1 + θ_1 J_2` with `J = Δθ`, dealiased.
fn lorentz_forcing(theta: &SpectralField, tx: &RealField, ty: &RealField) -> SpectralField {
    let j = theta.derivative(Derivative::Laplacian);
    let jx = j.derivative(Derivative::D1).to_real();
    let jy = j.derivative(Derivative::D2).to_real();
    let values = tx
        .values()
        .iter()
        .zip(ty.values())
        .zip(jx.values().iter().zip(jy.values()))
        .map(|((t1, t2), (j1, j2))| -t2 * j1 + t1 * j2)
        .collect();
    let mut f = RealField::from_raw(theta.grid(), values).to_spectral();
    f.dealias_in_place();
    f
}
