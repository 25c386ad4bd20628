//! Criteria evaluated along a run: the strip velocity integral, the area and
//! stream-function identities for front pairs, blow-up integrals, and the
//! particle collision bound.

mod engine;
mod monitor;
mod series;

use crate::error::{Error, Result};
use crate::fronts::{graph_slope, thickness_and_area, FrontGraphPair};
use crate::models::ModelState;
use crate::spectral::{Derivative, RealField, ScalarSource, VelocitySource};

pub use engine::{DiagnosticEngine, EngineOptions, FrontTracking};
pub use monitor::{
    delta_lower_bound, shrink_window_monitor, MonitorOptions, ShrinkWindowReport, Verdict,
    VerdictKind, WindowRow,
};
pub use series::{CriteriaRecord, CriteriaSeries, FrontRecord, FrontSummary, SeriesSummary, SummaryOptions};

/// Lattice maximum of `|u|` over the strip between two front graphs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StripSup {
    pub sup_speed: f64,
    /// Column spacing of the sampling lattice.
    pub spacing_x1: f64,
    /// Largest vertical spacing used in any column.
    pub spacing_x2: f64,
}

/// Samples `|u|` on `(m - 1) * refine + 1` columns over `[a, b]`; each column
/// gets `max(4, refine * ceil(δ / dx))` interior points plus both curve points.
/// Curve values between samples are linearly interpolated.
pub fn strip_sup_speed(
    u: &dyn VelocitySource,
    pair: &FrontGraphPair,
    refine: usize,
    dx: f64,
) -> Result<StripSup> {
    if refine == 0 || !(dx > 0.0) {
        return Err(Error::InvalidArgument("strip sampling needs refine >= 1 and dx > 0".into()));
    }
    pair.check_ordering()?;
    let m = pair.len();
    let columns = (m - 1) * refine + 1;
    let h = pair.spacing() / refine as f64;
    let mut sup = 0.0_f64;
    let mut spacing_x2 = 0.0_f64;
    for c in 0..columns {
        let (k, r) = (c / refine, c % refine);
        let w = r as f64 / refine as f64;
        let lerp = |f: &[f64]| if r == 0 { f[k] } else { f[k] * (1.0 - w) + f[k + 1] * w };
        let (lo, hi) = (lerp(&pair.f_minus), lerp(&pair.f_plus));
        let x1 = if c + 1 == columns { pair.b } else { pair.a + c as f64 * h };
        let interior = (refine * ((hi - lo) / dx).ceil() as usize).max(4);
        let dz = (hi - lo) / (interior + 1) as f64;
        spacing_x2 = spacing_x2.max(dz);
        for j in 0..=interior + 1 {
            let x2 = if j == interior + 1 { hi } else { lo + j as f64 * dz };
            let v = u.velocity([x1, x2], pair.t);
            sup = sup.max(v[0].hypot(v[1]));
        }
    }
    Ok(StripSup { sup_speed: sup, spacing_x1: h, spacing_x2 })
}

fn check_times(times: &[f64]) -> Result<()> {
    match times.windows(2).position(|w| !(w[1] > w[0])) {
        Some(k) => Err(Error::NonMonotoneTime { index: k + 1 }),
        None => Ok(()),
    }
}

/// Cumulative trapezoid integral of `(t, value)` samples, starting at 0.
pub fn accumulate_integral(samples: &[(f64, f64)]) -> Result<Vec<f64>> {
    let times: Vec<f64> = samples.iter().map(|s| s.0).collect();
    check_times(&times)?;
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(samples.len());
    for (k, s) in samples.iter().enumerate() {
        if k > 0 {
            let p = samples[k - 1];
            acc += 0.5 * (s.0 - p.0) * (s.1 + p.1);
        }
        out.push(acc);
    }
    Ok(out)
}

/// Time derivative of a sampled series on possibly uneven times: three-point
/// centred formula inside, three-point one-sided formula at the ends, and a
/// plain difference when only two samples exist.
pub fn time_derivative(times: &[f64], values: &[f64]) -> Result<Vec<f64>> {
    check_times(times)?;
    let n = times.len();
    if values.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: values.len() });
    }
    match n {
        0 | 1 => return Ok(vec![0.0; n]),
        2 => {
            let d = (values[1] - values[0]) / (times[1] - times[0]);
            return Ok(vec![d, d]);
        }
        _ => {}
    }
    let (t, y) = (times, values);
    let mut out = vec![0.0; n];
    let (h0, h1) = (t[1] - t[0], t[2] - t[1]);
    out[0] = -(2.0 * h0 + h1) / (h0 * (h0 + h1)) * y[0] + (h0 + h1) / (h0 * h1) * y[1]
        - h0 / (h1 * (h0 + h1)) * y[2];
    for i in 1..n - 1 {
        let (h0, h1) = (t[i] - t[i - 1], t[i + 1] - t[i]);
        out[i] = -h1 / (h0 * (h0 + h1)) * y[i - 1] + (h1 - h0) / (h0 * h1) * y[i]
            + h0 / (h1 * (h0 + h1)) * y[i + 1];
    }
    let (h0, h1) = (t[n - 2] - t[n - 3], t[n - 1] - t[n - 2]);
    out[n - 1] = h1 / (h0 * (h0 + h1)) * y[n - 3] - (h0 + h1) / (h0 * h1) * y[n - 2]
        + (2.0 * h1 + h0) / (h1 * (h0 + h1)) * y[n - 1];
    Ok(out)
}

/// Stream function sampled along both curves of a pair.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamTrace {
    pub plus: Vec<f64>,
    pub minus: Vec<f64>,
}

impl StreamTrace {
    pub fn sample(pair: &FrontGraphPair, psi: &dyn ScalarSource) -> Self {
        let along = |f: &[f64]| pair.x1.iter().zip(f).map(|(&x1, &x2)| psi.value([x1, x2], pair.t)).collect();
        Self { plus: along(&pair.f_plus), minus: along(&pair.f_minus) }
    }

    /// `ψ(b, f+) - ψ(b, f-) - ψ(a, f+) + ψ(a, f-)`: the flux into the strip
    /// through its two vertical ends.
    ///
    /// With `u = (-∂ψ/∂x2, ∂ψ/∂x1)` each graph obeys
    /// `∂f/∂t = d/dx1 ψ(x1, f(x1, t), t)`, and integrating over `[a, b]` fixes
    /// this orientation of the four end values.
    pub fn end_flux(&self) -> f64 {
        let last = self.plus.len() - 1;
        self.plus[last] - self.minus[last] - self.plus[0] + self.minus[0]
    }
}

/// One time of the area-flux comparison: `lhs = dA/dt`, `rhs` = end flux.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AreaFluxSample {
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

fn check_windows(pairs: &[FrontGraphPair]) -> Result<()> {
    if pairs.windows(2).any(|w| !w[0].same_window(&w[1])) {
        return Err(Error::WindowMismatch);
    }
    check_times(&pairs.iter().map(|p| p.t).collect::<Vec<_>>())
}

/// Compares the rate of change of the area between the curves over `[a, b]`
/// with the stream-function flux through the window ends, given the traces
/// of `ψ` along each pair.
pub fn area_flux_residual_from_traces(
    pairs: &[FrontGraphPair],
    traces: &[StreamTrace],
) -> Result<Vec<AreaFluxSample>> {
    check_windows(pairs)?;
    if traces.len() != pairs.len() {
        return Err(Error::LengthMismatch { expected: pairs.len(), got: traces.len() });
    }
    if pairs.len() < 2 {
        return Ok(Vec::new());
    }
    let times: Vec<f64> = pairs.iter().map(|p| p.t).collect();
    let areas = pairs
        .iter()
        .map(|p| thickness_and_area(p, p.a, p.b).map(|th| th.area))
        .collect::<Result<Vec<_>>>()?;
    let rate = time_derivative(&times, &areas)?;
    Ok(times
        .iter()
        .zip(rate)
        .zip(traces)
        .map(|((&t, lhs), tr)| {
            let rhs = tr.end_flux();
            AreaFluxSample { t, lhs, rhs, residual: lhs - rhs }
        })
        .collect())
}

/// [`area_flux_residual_from_traces`] with `ψ` taken from a sampler.
pub fn area_flux_residual(pairs: &[FrontGraphPair], psi: &dyn ScalarSource) -> Result<Vec<AreaFluxSample>> {
    let traces: Vec<StreamTrace> = pairs.iter().map(|p| StreamTrace::sample(p, psi)).collect();
    area_flux_residual_from_traces(pairs, &traces)
}

/// Per-curve max-norm mismatch between `d/dx1 ψ(x1, f(x1, t), t)` and `∂f/∂t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveStreamSample {
    pub t: f64,
    pub plus: f64,
    pub minus: f64,
}

impl CurveStreamSample {
    pub fn max(&self) -> f64 {
        self.plus.max(self.minus)
    }
}

pub fn curve_stream_residual_from_traces(
    pairs: &[FrontGraphPair],
    traces: &[StreamTrace],
) -> Result<Vec<CurveStreamSample>> {
    check_windows(pairs)?;
    if traces.len() != pairs.len() {
        return Err(Error::LengthMismatch { expected: pairs.len(), got: traces.len() });
    }
    if pairs.len() < 2 {
        return Ok(Vec::new());
    }
    let times: Vec<f64> = pairs.iter().map(|p| p.t).collect();
    let m = pairs[0].len();
    let h = pairs[0].spacing();

    let curve_rates = |pick: fn(&FrontGraphPair) -> &Vec<f64>| -> Result<Vec<Vec<f64>>> {
        let mut rates = vec![vec![0.0; m]; pairs.len()];
        let mut column = vec![0.0; pairs.len()];
        for k in 0..m {
            for (c, p) in column.iter_mut().zip(pairs) {
                *c = pick(p)[k];
            }
            for (r, d) in rates.iter_mut().zip(time_derivative(&times, &column)?) {
                r[k] = d;
            }
        }
        Ok(rates)
    };
    let plus_rate = curve_rates(|p| &p.f_plus)?;
    let minus_rate = curve_rates(|p| &p.f_minus)?;

    let mismatch = |trace: &[f64], rate: &[f64]| {
        graph_slope(h, trace).iter().zip(rate).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    };
    Ok((0..pairs.len())
        .map(|i| CurveStreamSample {
            t: times[i],
            plus: mismatch(&traces[i].plus, &plus_rate[i]),
            minus: mismatch(&traces[i].minus, &minus_rate[i]),
        })
        .collect())
}

/// [`curve_stream_residual_from_traces`] with `ψ` taken from a sampler.
pub fn curve_stream_residual(pairs: &[FrontGraphPair], psi: &dyn ScalarSource) -> Result<Vec<CurveStreamSample>> {
    let traces: Vec<StreamTrace> = pairs.iter().map(|p| StreamTrace::sample(p, psi)).collect();
    curve_stream_residual_from_traces(pairs, &traces)
}

/// Grid maxima entering the blow-up integrals; `None` when the model has no
/// such field.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BkmSample {
    pub sup_omega: Option<f64>,
    pub sup_grad_theta: Option<f64>,
    pub sup_lap_theta: Option<f64>,
}

pub fn bkm_snapshot(s: &ModelState) -> BkmSample {
    let sup_omega = s.omega.as_ref().map(RealField::max_abs);
    let (sup_grad_theta, sup_lap_theta) = match &s.theta {
        Some(theta) => {
            let hat = theta.to_spectral();
            let t1 = hat.derivative(Derivative::D1).to_real();
            let t2 = hat.derivative(Derivative::D2).to_real();
            let grad = t1
                .values()
                .iter()
                .zip(t2.values())
                .map(|(a, b)| a.hypot(*b))
                .fold(0.0, f64::max);
            let lap = hat.derivative(Derivative::Laplacian).to_real().max_abs();
            (Some(grad), Some(lap))
        }
        None => (None, None),
    };
    BkmSample { sup_omega, sup_grad_theta, sup_lap_theta }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollisionViolation {
    pub pair: usize,
    pub t: f64,
    pub separation: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CollisionReport {
    pub pairs: usize,
    pub checks: usize,
    /// Smallest `separation / (separation(0) exp(-I))` seen; 1 when nothing was checked.
    pub min_ratio: f64,
    pub violations: Vec<CollisionViolation>,
}

impl CollisionReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `|X(q,t) - X(p,t)| >= |q - p| exp(-∫|∇u|∞) (1 - tol)` for every
/// pair at every time. `separations[k]` lists all pair distances at `times[k]`.
pub fn collision_bound(
    times: &[f64],
    i_gradu: &[f64],
    separations: &[Vec<f64>],
    tol: f64,
) -> Result<CollisionReport> {
    if i_gradu.len() != times.len() || separations.len() != times.len() {
        return Err(Error::LengthMismatch {
            expected: times.len(),
            got: i_gradu.len().min(separations.len()),
        });
    }
    let pairs = separations.first().map_or(0, Vec::len);
    if separations.iter().any(|s| s.len() != pairs) {
        return Err(Error::InvalidArgument("pair count changes between times".into()));
    }
    let mut report = CollisionReport { pairs, checks: 0, min_ratio: 1.0, violations: Vec::new() };
    if pairs == 0 {
        return Ok(report);
    }
    let initial = &separations[0];
    for ((&t, &integral), seps) in times.iter().zip(i_gradu).zip(separations) {
        let decay = (-integral).exp();
        for (pair, (&s, &s0)) in seps.iter().zip(initial).enumerate() {
            report.checks += 1;
            let ideal = s0 * decay;
            if ideal > 0.0 {
                report.min_ratio = report.min_ratio.min(s / ideal);
            }
            let bound = ideal * (1.0 - tol);
            if s < bound {
                report.violations.push(CollisionViolation { pair, t, separation: s, bound });
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ModelKind;
    use crate::spectral::GridSpec;
    use std::f64::consts::{FRAC_PI_2, TAU};

    #[test]
    fn strip_sup_constant_and_rest() {
        let pair = FrontGraphPair::from_fn((0.5, 2.5), 32, 0.0, |_| 2.0, |_| 1.0);
        let c = |_: [f64; 2], _: f64| [3.0, 4.0];
        assert_eq!(strip_sup_speed(&c, &pair, 2, 0.05).unwrap().sup_speed, 5.0);
        let z = |_: [f64; 2], _: f64| [0.0, 0.0];
        assert_eq!(strip_sup_speed(&z, &pair, 1, 0.05).unwrap().sup_speed, 0.0);
    }

    #[test]
    fn strip_sup_saddle_band() {
        let u = |x: [f64; 2], _: f64| [-x[0].sin() * x[1].cos(), x[0].cos() * x[1].sin()];
        let pair = FrontGraphPair::from_fn(
            (0.0, TAU - 1e-9),
            512,
            0.0,
            |_| FRAC_PI_2 + 0.1,
            |_| FRAC_PI_2 - 0.1,
        );
        let s = strip_sup_speed(&u, &pair, 2, TAU / 256.0).unwrap();
        assert!((s.sup_speed - 1.0).abs() < 1e-3, "{s:?}");
        assert!(s.spacing_x2 <= TAU / 256.0 / 2.0);
    }

    #[test]
    fn strip_sup_rejects_collapsed_pair() {
        let pair = FrontGraphPair::from_fn((0.5, 2.5), 8, 0.0, |_| 1.0, |_| 1.0);
        let z = |_: [f64; 2], _: f64| [0.0, 0.0];
        assert!(matches!(strip_sup_speed(&z, &pair, 1, 0.1), Err(Error::FrontCollapse { .. })));
    }

    #[test]
    fn accumulate_examples() {
        assert_eq!(accumulate_integral(&[(0.0, 1.0), (1.0, 1.0), (2.0, 1.0)]).unwrap()[2], 2.0);
        let ramp: Vec<(f64, f64)> = (0..=100).map(|k| (k as f64 / 100.0, k as f64 / 100.0)).collect();
        assert!((accumulate_integral(&ramp).unwrap()[100] - 0.5).abs() < 1e-12);
        assert!(accumulate_integral(&[]).unwrap().is_empty());
        assert_eq!(
            accumulate_integral(&[(0.0, 1.0), (0.0, 1.0)]),
            Err(Error::NonMonotoneTime { index: 1 })
        );
    }

    #[test]
    fn time_derivative_exact_for_quadratics_on_uneven_times() {
        let t = [0.0, 0.1, 0.25, 0.3, 0.7];
        let y: Vec<f64> = t.iter().map(|t| 1.0 + 2.0 * t + 3.0 * t * t).collect();
        let d = time_derivative(&t, &y).unwrap();
        for (ti, di) in t.iter().zip(d) {
            assert!((di - (2.0 + 6.0 * ti)).abs() < 1e-12);
        }
    }

    #[test]
    fn residuals_vanish_at_rest() {
        let pairs: Vec<FrontGraphPair> = (0..4)
            .map(|k| FrontGraphPair::from_fn((0.5, 2.5), 16, k as f64 * 0.1, |_| 2.0, |_| 1.0))
            .collect();
        let psi = |_: [f64; 2], _: f64| 0.0;
        assert!(area_flux_residual(&pairs, &psi).unwrap().iter().all(|r| r.residual.abs() < 1e-12));
        assert!(curve_stream_residual(&pairs, &psi).unwrap().iter().all(|r| r.max() < 1e-12));
    }

    #[test]
    fn streamline_fronts_give_zero_flux() {
        // ψ = sin(x2) has horizontal streamlines: fronts on them stay put.
        let pairs: Vec<FrontGraphPair> = (0..3)
            .map(|k| FrontGraphPair::from_fn((0.5, 2.5), 64, k as f64 * 0.2, |_| 2.0, |_| 1.0))
            .collect();
        let psi = |x: [f64; 2], _: f64| x[1].sin();
        for r in area_flux_residual(&pairs, &psi).unwrap() {
            assert!(r.residual.abs() <= 1e-10);
        }
    }

    #[test]
    fn mismatched_windows_are_rejected() {
        let p = FrontGraphPair::from_fn((0.5, 2.5), 16, 0.0, |_| 2.0, |_| 1.0);
        let q = FrontGraphPair::from_fn((0.5, 2.0), 16, 0.1, |_| 2.0, |_| 1.0);
        let psi = |_: [f64; 2], _: f64| 0.0;
        assert_eq!(area_flux_residual(&[p, q], &psi), Err(Error::WindowMismatch));
    }

    #[test]
    fn bkm_examples() {
        let g = GridSpec::square(32).unwrap();
        let s = ModelState::new(ModelKind::QG, Some(RealField::from_fn(g, |x1, _| x1.cos())), None, 0.0).unwrap();
        let b = bkm_snapshot(&s);
        assert!((b.sup_grad_theta.unwrap() - 1.0).abs() < 1e-12);
        assert!((b.sup_lap_theta.unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(b.sup_omega, None);

        let e = ModelState::new(ModelKind::Euler2D, None, Some(RealField::from_fn(g, |_, x2| 2.0 * x2.cos())), 0.0)
            .unwrap();
        assert!((bkm_snapshot(&e).sup_omega.unwrap() - 2.0).abs() < 1e-14);

        let z = ModelState::new(ModelKind::MHD, Some(RealField::zeros(g)), Some(RealField::zeros(g)), 0.0).unwrap();
        let b = bkm_snapshot(&z);
        assert_eq!((b.sup_omega, b.sup_grad_theta, b.sup_lap_theta), (Some(0.0), Some(0.0), Some(0.0)));
    }

    #[test]
    fn collision_examples() {
        let times = [0.0, 1.0, 2.0];
        let rest = collision_bound(&times, &[0.0; 3], &[vec![0.5, 1.0], vec![0.5, 1.0], vec![0.5, 1.0]], 0.02)
            .unwrap();
        assert!(rest.holds());
        assert_eq!(rest.checks, 6);
        assert_eq!(rest.min_ratio, 1.0);

        let shrink = collision_bound(&times, &[0.0, 0.1, 0.2], &[vec![1.0], vec![0.95], vec![0.5]], 0.02).unwrap();
        assert_eq!(shrink.violations.len(), 1);
        assert_eq!(shrink.violations[0].t, 2.0);

        let none = collision_bound(&times, &[0.0; 3], &[vec![], vec![], vec![]], 0.02).unwrap();
        assert_eq!((none.pairs, none.checks), (0, 0));
    }
}
