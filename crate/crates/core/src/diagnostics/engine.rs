//! Run hook that tracks fronts and particles and fills a [`CriteriaSeries`].

use super::{bkm_snapshot, strip_sup_speed, CriteriaRecord, CriteriaSeries, FrontRecord, StreamTrace};
use crate::error::{Error, Result};
use crate::fronts::{
    extract_front_pair, extract_widened_pair, thickness_and_area, transport_graphs, FrontGraphPair, FrontSpec,
};
use crate::integrator::{Control, RunHooks, StateView};
use crate::particles::{advect_particles, pair_separations, ParticleSet};
use crate::spectral::{
    velocity_gradient_norm, GridSpec, LinearInTime, RealField, SampleMode, ScalarGrid, VelocityGrid, VelocitySource,
};

/// How front pairs are followed between diagnostic times.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FrontTracking {
    /// Re-extract the level crossings from θ at every diagnostic time.
    #[default]
    Extract,
    /// Extract once at the start, then transport the graphs with the flow
    /// every solver step. The graphs are carried over the window widened by
    /// [`EngineOptions::advect_margin`] on both sides: a graph restricted to
    /// `[a, b]` has no data at an end where the flow enters the window, and
    /// the margin supplies it.
    Advect,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineOptions {
    /// Strip sampling refinement factor.
    pub refine: usize,
    pub tracking: FrontTracking,
    pub sample_mode: SampleMode,
    /// Extra x1 length carried on each side of the window when advecting.
    pub advect_margin: f64,
}

impl Default for EngineOptions {
    fn default() -> Self {
        Self { refine: 2, tracking: FrontTracking::Extract, sample_mode: SampleMode::Bicubic, advect_margin: 1.0 }
    }
}

/// Advected graphs over the widened window plus the bookkeeping that says
/// whether the margin still shields the window.
#[derive(Debug, Clone)]
struct Carried {
    wide: FrontGraphPair,
    /// Samples of margin on each side.
    k: usize,
    /// `∫ max |u1|` over the margin samples: how far inflow-end effects may
    /// have travelled inward.
    travel: f64,
}

#[derive(Debug, Clone)]
pub struct DiagnosticEngine {
    grid: GridSpec,
    specs: Vec<FrontSpec>,
    opts: EngineOptions,
    current: Vec<Option<FrontGraphPair>>,
    carried: Vec<Option<Carried>>,
    shield_lost: Vec<Option<f64>>,
    particles: Option<ParticleSet>,
    tracks: Vec<(f64, Vec<[f64; 2]>)>,
    series: CriteriaSeries,
}

fn is_front_event(e: &Error) -> bool {
    matches!(
        e,
        Error::FrontLost { .. }
            | Error::FrontCollapse { .. }
            | Error::FrontBreakdown { .. }
            | Error::ParticleNonFinite { .. }
    )
}

impl DiagnosticEngine {
    pub fn new(
        grid: GridSpec,
        specs: Vec<FrontSpec>,
        particles: Option<ParticleSet>,
        opts: EngineOptions,
    ) -> Result<Self> {
        if opts.refine == 0 {
            return Err(Error::InvalidArgument("strip refinement must be at least 1".into()));
        }
        if !(opts.advect_margin >= 0.0 && opts.advect_margin.is_finite()) {
            return Err(Error::InvalidArgument("advect margin must be finite and non-negative".into()));
        }
        for s in &specs {
            s.validate()?;
        }
        let n = specs.len();
        Ok(Self {
            grid,
            specs,
            opts,
            current: vec![None; n],
            carried: vec![None; n],
            shield_lost: vec![None; n],
            particles,
            tracks: Vec::new(),
            series: CriteriaSeries::new(),
        })
    }

    pub fn series(&self) -> &CriteriaSeries {
        &self.series
    }

    pub fn into_series(self) -> CriteriaSeries {
        self.series
    }

    /// Particle positions recorded at each diagnostic time.
    pub fn tracks(&self) -> &[(f64, Vec<[f64; 2]>)] {
        &self.tracks
    }

    pub fn particles(&self) -> Option<&ParticleSet> {
        self.particles.as_ref()
    }

    /// Per front, the first time at which inflow-end effects of the advected
    /// graphs may have crossed the margin into the window (Advect tracking).
    pub fn shield_lost(&self) -> &[Option<f64>] {
        &self.shield_lost
    }

    fn window_of(&mut self, k: usize, theta: Option<&RealField>, t: f64) -> Result<FrontGraphPair> {
        let spec = &self.specs[k];
        let window = match &self.carried[k] {
            Some(c) => c.wide.restrict(c.k, (spec.a, spec.b)),
            None => {
                let theta = theta.ok_or_else(|| Error::InvalidArgument("no theta to extract fronts from".into()))?;
                let h = (spec.b - spec.a) / (spec.samples - 1) as f64;
                let margin = (self.opts.advect_margin / h).ceil() as usize;
                let wide = extract_widened_pair(theta, spec, margin, t)?;
                let window = wide.restrict(margin, (spec.a, spec.b));
                self.carried[k] = Some(Carried { wide, k: margin, travel: 0.0 });
                window
            }
        };
        window.check_ordering()?;
        window.check_slopes(spec.max_slope)?;
        Ok(window)
    }

    /// Measures every criterion on one state and appends a record.
    pub fn observe(&mut self, view: StateView<'_>) -> Result<()> {
        let state = view.state;
        let t = state.t;
        let u = VelocityGrid::new(view.flow.velocity.clone(), self.opts.sample_mode);
        let psi = ScalarGrid::new(view.flow.psi_hat.to_real(), self.opts.sample_mode);

        let mut fronts = Vec::with_capacity(self.specs.len());
        for k in 0..self.specs.len() {
            let pair = match self.opts.tracking {
                FrontTracking::Advect => self.window_of(k, state.theta.as_ref(), t)?,
                FrontTracking::Extract => {
                    let theta = state.theta.as_ref().ok_or_else(|| {
                        Error::InvalidArgument(format!("model `{}` has no theta to extract fronts from", state.kind.name()))
                    })?;
                    extract_front_pair(theta, &self.specs[k], t, self.current[k].as_ref())?
                }
            };
            let strip = strip_sup_speed(&u, &pair, self.opts.refine, self.grid.dx_min())?;
            let trace = StreamTrace::sample(&pair, &psi);
            let thickness = thickness_and_area(&pair, pair.a, pair.b)?;
            let delta_max = pair.delta().into_iter().fold(f64::NEG_INFINITY, f64::max);
            fronts.push(FrontRecord { pair: pair.clone(), strip, trace, thickness, delta_max });
            self.current[k] = Some(pair);
        }

        let separations = self.particles.as_ref().map(pair_separations).unwrap_or_default();
        if let Some(p) = &self.particles {
            self.tracks.push((t, p.positions().to_vec()));
        }
        self.series.push(CriteriaRecord {
            t,
            sup_grad_u: velocity_gradient_norm(&view.flow.psi_hat).max_abs(),
            bkm: bkm_snapshot(state),
            fronts,
            separations,
        })
    }

    /// Moves particles (and advected fronts) across one solver step.
    pub fn advance(&mut self, before: StateView<'_>, after: StateView<'_>, dt: f64) -> Result<()> {
        let advect_fronts = self.opts.tracking == FrontTracking::Advect && self.carried.iter().any(Option::is_some);
        if self.particles.is_none() && !advect_fronts {
            return Ok(());
        }
        let u = LinearInTime {
            early: VelocityGrid::new(before.flow.velocity.clone(), self.opts.sample_mode),
            late: VelocityGrid::new(after.flow.velocity.clone(), self.opts.sample_mode),
            t0: before.state.t,
            t1: after.state.t,
        };
        if let Some(p) = &self.particles {
            self.particles = Some(advect_particles(p, &u, before.state.t, dt)?);
        }
        for (slot, lost) in self.carried.iter_mut().zip(self.shield_lost.iter_mut()) {
            let Some(c) = slot.as_mut() else { continue };
            let m = c.wide.len();
            let margin_u1 = (0..c.k)
                .chain(m - c.k..m)
                .flat_map(|j| [c.wide.f_plus[j], c.wide.f_minus[j]].map(|f| (c.wide.x1[j], f)))
                .map(|(x, f)| u.velocity([x, f], before.state.t)[0].abs())
                .fold(0.0, f64::max);
            c.travel += margin_u1 * dt;
            let mut next = transport_graphs(&c.wide, &u, dt)?;
            // land on the solver clock exactly
            next.t = after.state.t;
            c.wide = next;
            if lost.is_none() && c.travel > c.k as f64 * c.wide.spacing() {
                *lost = Some(after.state.t);
            }
        }
        Ok(())
    }

    fn control(result: Result<()>) -> Result<Control> {
        match result {
            Ok(()) => Ok(Control::Continue),
            Err(e) if is_front_event(&e) => Ok(Control::Halt(e)),
            Err(e) => Err(e),
        }
    }
}

impl RunHooks for DiagnosticEngine {
    fn on_diagnose(&mut self, view: StateView<'_>) -> Result<Control> {
        let r = self.observe(view);
        Self::control(r)
    }

    fn on_step(&mut self, before: StateView<'_>, after: StateView<'_>, dt: f64) -> Result<Control> {
        let r = self.advance(before, after, dt);
        Self::control(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fronts::SeedPath;
    use crate::integrator::{run, RunStatus, StepControl};
    use crate::models::{HyperdissipationParams, Model, ModelKind, ModelState, PrescribedFlow};
    use crate::spectral::RealField;
    use std::f64::consts::FRAC_PI_2;

    fn stripes_run(tracking: FrontTracking, expr: &str) -> (RunStatus, DiagnosticEngine) {
        let g = GridSpec::square(32).unwrap();
        let kind = ModelKind::PassiveScalar(PrescribedFlow::parse(expr).unwrap());
        let model = Model::new(kind.clone(), g, HyperdissipationParams::default()).unwrap();
        let theta = RealField::from_fn(g, |_, x2| x2.sin());
        let s0 = ModelState::new(kind, Some(theta), None, 0.0).unwrap();
        let spec = FrontSpec::new(
            0.2_f64.sin(),
            (-0.2_f64).sin(),
            (0.5, 2.5),
            SeedPath::Constant(0.2),
            SeedPath::Constant(-0.2),
            33,
        )
        .unwrap();
        let particles = ParticleSet::new(vec![[1.0, 1.0], [1.2, 1.0]], vec![(0, 1)]).unwrap();
        let mut engine = DiagnosticEngine::new(
            g,
            vec![spec],
            Some(particles),
            EngineOptions { tracking, ..Default::default() },
        )
        .unwrap();
        let ctl = StepControl::new(0.5, 0.1, 1.0, 0.5, 0.25).unwrap();
        let out = run(&model, s0, &ctl, &mut engine).unwrap();
        (out.status, engine)
    }

    #[test]
    fn streamline_flow_keeps_fronts() {
        // ψ = sin(x2) gives u = (-cos x2, 0): the level lines of θ = sin(x2) are streamlines.
        for tracking in [FrontTracking::Extract, FrontTracking::Advect] {
            let (status, engine) = stripes_run(tracking, "sin(x2)");
            assert_eq!(status, RunStatus::Finished);
            let s = engine.series();
            assert_eq!(s.len(), 5);
            let last = &s.records().last().unwrap().fronts[0];
            let first = &s.records()[0].fronts[0];
            assert!(last.pair.f_plus.iter().all(|f| (f - 0.2).abs() < 1e-4), "{tracking:?}");
            for (p, q) in first.pair.f_minus.iter().zip(&last.pair.f_minus) {
                assert!((p - q).abs() < 1e-12, "{tracking:?}");
            }
            assert!((last.strip.sup_speed - 1.0).abs() < 0.05);
            assert_eq!(engine.tracks().len(), 5);
        }
    }

    #[test]
    fn euler_without_theta_is_an_error() {
        let g = GridSpec::square(16).unwrap();
        let spec = FrontSpec::new(0.1, -0.1, (0.5, 2.5), SeedPath::Constant(FRAC_PI_2), SeedPath::Constant(0.0), 8)
            .unwrap();
        let mut engine = DiagnosticEngine::new(g, vec![spec], None, EngineOptions::default()).unwrap();
        let model = Model::new(ModelKind::Euler2D, g, HyperdissipationParams::default()).unwrap();
        let s = ModelState::new(ModelKind::Euler2D, None, Some(RealField::zeros(g)), 0.0).unwrap();
        let flow = model.flow_of_state(&s).unwrap();
        assert!(matches!(engine.on_diagnose(StateView { state: &s, flow: &flow }), Err(Error::InvalidArgument(_))));
    }
}
