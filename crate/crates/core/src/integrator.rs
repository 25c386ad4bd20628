//! Explicit fourth-order Runge–Kutta time stepping under a CFL limit.

use crate::error::{Error, Result};
use crate::models::{Flow, Model, ModelState, Prognostic};

/// Guards the CFL quotient when the flow is at rest.
pub const SPEED_FLOOR: f64 = 1e-12;

/// Bound on `nu * k_max^{2p} * dt` when hyperdissipation is on.
pub const DAMPING_LIMIT: f64 = 0.5;

/// A state the classical RK4 kernel can combine linearly.
pub trait RkVector: Clone {
    /// `self += a * x`
    fn axpy(&mut self, a: f64, x: &Self);
}

impl RkVector for f64 {
    fn axpy(&mut self, a: f64, x: &Self) {
        *self += a * x;
    }
}

impl RkVector for Vec<f64> {
    fn axpy(&mut self, a: f64, x: &Self) {
        for (y, x) in self.iter_mut().zip(x) {
            *y += a * x;
        }
    }
}

impl RkVector for Prognostic {
    fn axpy(&mut self, a: f64, x: &Self) {
        Prognostic::axpy(self, a, x)
    }
}

/// One classical RK4 step of `dy/dt = f(t, y)`.
pub fn rk4_step<Y: RkVector, E>(
    t: f64,
    y: &Y,
    dt: f64,
    mut f: impl FnMut(f64, &Y) -> Result<Y, E>,
) -> Result<Y, E> {
    let k1 = f(t, y)?;
    let mut y2 = y.clone();
    y2.axpy(0.5 * dt, &k1);
    let k2 = f(t + 0.5 * dt, &y2)?;
    let mut y3 = y.clone();
    y3.axpy(0.5 * dt, &k2);
    let k3 = f(t + 0.5 * dt, &y3)?;
    let mut y4 = y.clone();
    y4.axpy(dt, &k3);
    let k4 = f(t + dt, &y4)?;

    let mut out = y.clone();
    out.axpy(dt / 6.0, &k1);
    out.axpy(dt / 3.0, &k2);
    out.axpy(dt / 3.0, &k3);
    out.axpy(dt / 6.0, &k4);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub cfl: f64,
    pub dt_max: f64,
    pub t_end: f64,
    pub snapshot_every: f64,
    pub diagnose_every: f64,
}

impl StepControl {
    pub fn new(cfl: f64, dt_max: f64, t_end: f64, snapshot_every: f64, diagnose_every: f64) -> Result<Self> {
        if !(cfl > 0.0 && cfl <= 1.0) {
            return Err(Error::InvalidArgument(format!("cfl must lie in (0, 1], got {cfl}")));
        }
        for (name, v) in [("dt_max", dt_max), ("snapshot_every", snapshot_every), ("diagnose_every", diagnose_every)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        if !t_end.is_finite() {
            return Err(Error::InvalidArgument("t_end must be finite".into()));
        }
        Ok(Self { cfl, dt_max, t_end, snapshot_every, diagnose_every })
    }
}

/// `min(dt_max, cfl * dx / max(sup|u|, ε))`, further capped so explicit
/// hyperdissipation stays stable.
pub fn stable_dt(model: &Model, max_speed: f64, ctl: &StepControl) -> f64 {
    let grid = model.grid();
    let mut dt = ctl.dt_max.min(ctl.cfl * grid.dx_min() / max_speed.max(SPEED_FLOOR));
    let hyper = model.hyper();
    if hyper.is_active() {
        dt = dt.min(DAMPING_LIMIT / hyper.max_rate(grid));
    }
    dt
}

/// Advances all prognostic fields by `dt`; non-finite results are a blow-up.
pub fn step_rk4(model: &Model, s: &ModelState, dt: f64) -> Result<ModelState> {
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("time step must be positive, got {dt}")));
    }
    let y0 = Prognostic::from_state(s);
    let y1 = rk4_step(s.t, &y0, dt, |t, y| model.rhs(t, y))?;
    if !y1.is_finite() {
        return Err(Error::BlowUp { t: s.t });
    }
    let next = y1.into_state(s.kind.clone(), s.t + dt);
    if !next.is_finite() {
        return Err(Error::BlowUp { t: s.t });
    }
    Ok(next)
}

/// Read-only view handed to run hooks.
#[derive(Debug, Clone, Copy)]
pub struct StateView<'a> {
    pub state: &'a ModelState,
    pub flow: &'a Flow,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Control {
    Continue,
    /// Stop the run; the error names the event.
    Halt(Error),
}

pub trait RunHooks {
    fn on_snapshot(&mut self, _view: StateView<'_>) -> Result<Control> {
        Ok(Control::Continue)
    }

    fn on_diagnose(&mut self, _view: StateView<'_>) -> Result<Control> {
        Ok(Control::Continue)
    }

    fn on_step(&mut self, _before: StateView<'_>, _after: StateView<'_>, _dt: f64) -> Result<Control> {
        Ok(Control::Continue)
    }
}

impl RunHooks for () {}

#[derive(Debug, Clone, PartialEq)]
pub enum RunStatus {
    Finished,
    /// Non-finite values or a collapsed time step; `state` is the last finite state.
    BlowUp { t: f64 },
    /// A hook stopped the run.
    Halted(Error),
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub state: ModelState,
    pub status: RunStatus,
    pub steps: usize,
}

/// Index-based event clock so cadences do not drift.
struct Cadence {
    origin: f64,
    every: f64,
    next: u64,
}

impl Cadence {
    fn time(&self) -> f64 {
        self.origin + self.next as f64 * self.every
    }

    fn due(&self, t: f64, eps: f64) -> bool {
        self.time() <= t + eps
    }
}

/// Steps from `s0` to `ctl.t_end`, landing exactly on every snapshot and
/// diagnostic time.
pub fn run(model: &Model, s0: ModelState, ctl: &StepControl, hooks: &mut dyn RunHooks) -> Result<RunOutcome> {
    if ctl.t_end <= s0.t {
        return Ok(RunOutcome { state: s0, status: RunStatus::Finished, steps: 0 });
    }
    let eps = 1e-12 * ctl.t_end.abs().max(1.0);
    let mut snaps = Cadence { origin: s0.t, every: ctl.snapshot_every, next: 0 };
    let mut diags = Cadence { origin: s0.t, every: ctl.diagnose_every, next: 0 };

    let mut state = s0;
    let mut flow = model.flow_of_state(&state)?;
    let mut steps = 0;

    macro_rules! fire {
        ($cad:ident, $method:ident) => {
            if $cad.due(state.t, eps) {
                while $cad.due(state.t, eps) {
                    $cad.next += 1;
                }
                if let Control::Halt(e) = hooks.$method(StateView { state: &state, flow: &flow })? {
                    return Ok(RunOutcome { state, status: RunStatus::Halted(e), steps });
                }
            }
        };
    }

    fire!(snaps, on_snapshot);
    fire!(diags, on_diagnose);

    while state.t < ctl.t_end - eps {
        let target = ctl.t_end.min(snaps.time()).min(diags.time());
        let mut dt = stable_dt(model, flow.velocity.max_speed(), ctl);
        let landing = state.t + dt >= target - eps;
        if landing {
            dt = target - state.t;
        }
        if !(dt > eps * 1e-3) {
            // The CFL step has collapsed: velocity is effectively unbounded.
            return Ok(RunOutcome { status: RunStatus::BlowUp { t: state.t }, state, steps });
        }
        let mut next = match step_rk4(model, &state, dt) {
            Ok(s) => s,
            Err(Error::BlowUp { t }) => {
                return Ok(RunOutcome { state, status: RunStatus::BlowUp { t }, steps });
            }
            Err(e) => return Err(e),
        };
        if landing {
            next.t = target;
        }
        steps += 1;
        let next_flow = match model.flow_of_state(&next) {
            Ok(f) if f.velocity.is_finite() => f,
            Ok(_) => return Ok(RunOutcome { state, status: RunStatus::BlowUp { t: next.t }, steps }),
            Err(e) => return Err(e),
        };
        let control = hooks.on_step(
            StateView { state: &state, flow: &flow },
            StateView { state: &next, flow: &next_flow },
            dt,
        )?;
        state = next;
        flow = next_flow;
        if let Control::Halt(e) = control {
            return Ok(RunOutcome { state, status: RunStatus::Halted(e), steps });
        }
        fire!(snaps, on_snapshot);
        fire!(diags, on_diagnose);
    }
    Ok(RunOutcome { state, status: RunStatus::Finished, steps })
}
