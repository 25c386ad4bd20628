//! Cross-checks between the two front representations and particle
//! trajectories in the steady cellular flow ψ = sin(x1) sin(x2).

use std::f64::consts::{FRAC_PI_2, PI};

use sharpfront::diagnostics::{DiagnosticEngine, EngineOptions, FrontTracking};
use sharpfront::fronts::{extract_front_pair, FrontSpec, SeedPath};
use sharpfront::integrator::{run, RunStatus, StepControl};
use sharpfront::models::{HyperdissipationParams, Model, ModelKind, ModelState, PrescribedFlow};
use sharpfront::particles::ParticleSet;
use sharpfront::spectral::{GridSpec, RealField};

const CELLS: &str = "sin(x1)*sin(x2)";
const W: f64 = 0.2;

fn cells(n: usize) -> (GridSpec, Model, ModelKind) {
    let g = GridSpec::square(n).unwrap();
    let kind = ModelKind::PassiveScalar(PrescribedFlow::parse(CELLS).unwrap());
    let model = Model::new(kind.clone(), g, HyperdissipationParams::default()).unwrap();
    (g, model, kind)
}

fn band_spec(m: usize) -> FrontSpec {
    FrontSpec::new(
        W.sin(),
        (-W).sin(),
        (0.5, 2.5),
        SeedPath::Constant(FRAC_PI_2 + W),
        SeedPath::Constant(FRAC_PI_2 - W),
        m,
    )
    .unwrap()
}

/// Largest gap between the advected graphs and the graphs extracted from the
/// advected scalar at `t_end`.
fn advect_vs_extract(n: usize, m: usize, t_end: f64) -> f64 {
    let (g, model, kind) = cells(n);
    // θ0 = -cos(x2): the levels ±sin(W) sit at x2 = π/2 ± W
    let theta = RealField::from_fn(g, |_, x2| -x2.cos());
    let s0 = ModelState::new(kind, Some(theta), None, 0.0).unwrap();
    let opts = EngineOptions { tracking: FrontTracking::Advect, ..Default::default() };
    let mut engine = DiagnosticEngine::new(g, vec![band_spec(m)], None, opts).unwrap();
    let ctl = StepControl::new(0.5, 0.1, t_end, t_end, t_end).unwrap();
    let out = run(&model, s0, &ctl, &mut engine).unwrap();
    assert_eq!(out.status, RunStatus::Finished);

    let advected = &engine.series().records().last().unwrap().fronts[0].pair;
    assert_eq!(advected.t, t_end);
    let extracted =
        extract_front_pair(out.state.theta.as_ref().unwrap(), &band_spec(m), t_end, Some(advected)).unwrap();
    let gap = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
    gap(&advected.f_plus, &extracted.f_plus).max(gap(&advected.f_minus, &extracted.f_minus))
}

#[test]
fn advected_fronts_match_extracted_fronts() {
    let gap = advect_vs_extract(256, 512, 0.5);
    assert!(gap <= 2e-3, "max |f_advected - f_extracted| = {gap:e}");
}

#[test]
fn advect_extract_gap_shrinks_under_refinement() {
    let coarse = advect_vs_extract(64, 128, 0.5);
    let fine = advect_vs_extract(128, 256, 0.5);
    assert!(coarse / fine >= 3.0, "coarse {coarse:e}, fine {fine:e}");
}

fn tracer_run(n: usize, positions: Vec<[f64; 2]>, pairs: Vec<(usize, usize)>, t_end: f64) -> Vec<(f64, Vec<[f64; 2]>)> {
    let (g, model, kind) = cells(n);
    let s0 = ModelState::new(kind, Some(RealField::zeros(g)), None, 0.0).unwrap();
    let particles = ParticleSet::new(positions, pairs).unwrap();
    let mut engine = DiagnosticEngine::new(g, Vec::new(), Some(particles), EngineOptions::default()).unwrap();
    let ctl = StepControl::new(0.5, 0.1, t_end, t_end, 0.05).unwrap();
    let out = run(&model, s0, &ctl, &mut engine).unwrap();
    assert_eq!(out.status, RunStatus::Finished);
    engine.tracks().to_vec()
}

#[test]
fn stream_function_is_conserved_along_trajectories() {
    let psi = |x: [f64; 2]| x[0].sin() * x[1].sin();
    let starts = vec![[1.0, 1.2], [0.4, 0.9], [2.0, 2.5], [4.0, 1.0], [3.6, 5.0]];
    let tracks = tracer_run(256, starts.clone(), Vec::new(), 5.0);
    assert!((tracks.last().unwrap().0 - 5.0).abs() < 1e-12);
    let mut drift: f64 = 0.0;
    for (_, positions) in &tracks {
        for (x, q) in positions.iter().zip(&starts) {
            drift = drift.max((psi(*x) - psi(*q)).abs());
        }
    }
    assert!(drift <= 1e-6, "psi drift {drift:e}");
}

fn shoelace(p: &[[f64; 2]]) -> f64 {
    let n = p.len();
    0.5 * (0..n).map(|i| p[i][0] * p[(i + 1) % n][1] - p[(i + 1) % n][0] * p[i][1]).sum::<f64>().abs()
}

#[test]
fn small_quadrilateral_keeps_its_area() {
    let (c, h) = ([1.0, 1.3], 0.01);
    let quad = vec![[c[0], c[1]], [c[0] + h, c[1]], [c[0] + h, c[1] + h], [c[0], c[1] + h]];
    let tracks = tracer_run(128, quad.clone(), Vec::new(), 2.0);
    let a0 = shoelace(&quad);
    for (t, positions) in &tracks {
        let a = shoelace(positions);
        assert!((a - a0).abs() <= 0.005 * a0, "area {a:e} vs {a0:e} at t = {t}");
    }
}

#[test]
fn periodic_orbit_returns_near_its_start() {
    // ψ = sin(x1) sin(x2) has closed orbits inside each cell; the orbit through
    // a point close to the cell centre has period close to the linearized 2π.
    let start = [FRAC_PI_2 + 0.05, FRAC_PI_2];
    let tracks = tracer_run(64, vec![start], Vec::new(), 2.0 * PI + 0.2);
    let closest = tracks
        .iter()
        .filter(|(t, _)| *t > PI)
        .map(|(_, p)| ((p[0][0] - start[0]).powi(2) + (p[0][1] - start[1]).powi(2)).sqrt())
        .fold(f64::INFINITY, f64::min);
    assert!(closest < 5e-3, "closest return {closest:e}");
}
