//! Level-curve pairs stored as graphs `x2 = f±(x1, t)` over a window `[a, b]`.
//!
//! A pair can be obtained two ways: by extracting level crossings of a
//! scalar field column by column, or by transporting given graphs with the
//! flow through the kinematic condition
//! `∂f/∂t = u2(x1, f) - (∂f/∂x1) u1(x1, f)`.
//! The two routes are independent and are used to cross-check each other.

mod saddles;

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::integrator::rk4_step;
use crate::spectral::sample::Stencil;
use crate::spectral::{RealField, VelocitySource};

pub use saddles::{find_saddles, Saddle, SaddleReport};

/// Initial guess for one branch, used to pick among crossings at t = 0.
#[derive(Debug, Clone, PartialEq)]
pub enum SeedPath {
    Constant(f64),
    /// Polyline through `(x1, x2)` vertices sorted by x1; constant beyond the ends.
    Polyline(Vec<[f64; 2]>),
}

impl SeedPath {
    pub fn at(&self, x1: f64) -> f64 {
        match self {
            SeedPath::Constant(v) => *v,
            SeedPath::Polyline(pts) => {
                let first = pts[0];
                let last = pts[pts.len() - 1];
                if x1 <= first[0] {
                    return first[1];
                }
                if x1 >= last[0] {
                    return last[1];
                }
                let k = pts.partition_point(|p| p[0] <= x1).max(1);
                let (p, q) = (pts[k - 1], pts[k]);
                p[1] + (q[1] - p[1]) * (x1 - p[0]) / (q[0] - p[0])
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            SeedPath::Constant(v) if v.is_finite() => Ok(()),
            SeedPath::Polyline(pts)
                if !pts.is_empty()
                    && pts.iter().all(|p| p[0].is_finite() && p[1].is_finite())
                    && pts.windows(2).all(|w| w[0][0] < w[1][0]) =>
            {
                Ok(())
            }
            _ => Err(Error::InvalidArgument(
                "seed path must be finite with strictly increasing x1".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrontSpec {
    pub level_plus: f64,
    pub level_minus: f64,
    pub a: f64,
    pub b: f64,
    pub seed_plus: SeedPath,
    pub seed_minus: SeedPath,
    /// Number of uniform x1 samples over `[a, b]`, both ends included.
    pub samples: usize,
    /// Largest graph slope accepted before the front counts as folded.
    pub max_slope: f64,
}

impl FrontSpec {
    pub const DEFAULT_MAX_SLOPE: f64 = 100.0;

    pub fn new(
        level_plus: f64,
        level_minus: f64,
        (a, b): (f64, f64),
        seed_plus: SeedPath,
        seed_minus: SeedPath,
        samples: usize,
    ) -> Result<Self> {
        let spec = Self {
            level_plus,
            level_minus,
            a,
            b,
            seed_plus,
            seed_minus,
            samples,
            max_slope: Self::DEFAULT_MAX_SLOPE,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a >= 0.0 && self.a < self.b && self.b < TAU) {
            return Err(Error::InvalidArgument(format!(
                "front window [a, b] = [{}, {}] must satisfy 0 <= a < b < 2π",
                self.a, self.b
            )));
        }
        if self.samples < 3 {
            return Err(Error::InvalidArgument("a front needs at least 3 samples".into()));
        }
        if !(self.level_plus.is_finite() && self.level_minus.is_finite()) {
            return Err(Error::InvalidArgument("front levels must be finite".into()));
        }
        self.seed_plus.validate()?;
        self.seed_minus.validate()?;
        if self.level_plus == self.level_minus && self.seed_plus.at(self.a) == self.seed_minus.at(self.a) {
            return Err(Error::InvalidArgument(
                "equal front levels need distinct seed paths for the two branches".into(),
            ));
        }
        if !(self.max_slope > 0.0) {
            return Err(Error::InvalidArgument("max_slope must be positive".into()));
        }
        Ok(())
    }

    pub fn x1_samples(&self) -> Vec<f64> {
        uniform_samples(self.a, self.b, self.samples)
    }
}

fn uniform_samples(a: f64, b: f64, m: usize) -> Vec<f64> {
    let h = (b - a) / (m - 1) as f64;
    (0..m).map(|k| if k + 1 == m { b } else { a + k as f64 * h }).collect()
}

/// Sampled graphs of the two curves at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontGraphPair {
    pub a: f64,
    pub b: f64,
    pub x1: Vec<f64>,
    pub f_plus: Vec<f64>,
    pub f_minus: Vec<f64>,
    pub t: f64,
}

impl FrontGraphPair {
    /// Builds a pair on `m` uniform samples of `[a, b]` from closed-form graphs.
    pub fn from_fn(
        (a, b): (f64, f64),
        m: usize,
        t: f64,
        plus: impl Fn(f64) -> f64,
        minus: impl Fn(f64) -> f64,
    ) -> Self {
        let x1 = uniform_samples(a, b, m);
        let f_plus = x1.iter().map(|&x| plus(x)).collect();
        let f_minus = x1.iter().map(|&x| minus(x)).collect();
        Self { a, b, x1, f_plus, f_minus, t }
    }

    pub fn len(&self) -> usize {
        self.x1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x1.is_empty()
    }

    /// Uniform x1 spacing of the samples.
    pub fn spacing(&self) -> f64 {
        (self.b - self.a) / (self.len() - 1) as f64
    }

    /// `δ(x1) = f+ - f-` at every sample.
    pub fn delta(&self) -> Vec<f64> {
        self.f_plus.iter().zip(&self.f_minus).map(|(p, m)| p - m).collect()
    }

    pub fn same_window(&self, other: &FrontGraphPair) -> bool {
        self.a == other.a && self.b == other.b && self.len() == other.len()
    }

    /// Drops `k` samples at each end and relabels the window as `[a, b]`.
    pub fn restrict(&self, k: usize, (a, b): (f64, f64)) -> FrontGraphPair {
        let m = self.len() - 2 * k;
        FrontGraphPair {
            a,
            b,
            x1: uniform_samples(a, b, m),
            f_plus: self.f_plus[k..k + m].to_vec(),
            f_minus: self.f_minus[k..k + m].to_vec(),
            t: self.t,
        }
    }

    /// Strict ordering `f- < f+` at every sample.
    pub fn check_ordering(&self) -> Result<()> {
        match self.f_plus.iter().zip(&self.f_minus).position(|(p, m)| !(p > m)) {
            Some(k) => Err(Error::FrontCollapse { t: self.t, x1: self.x1[k] }),
            None => Ok(()),
        }
    }

    /// Graph slopes must stay finite and below `max_slope`.
    pub fn check_slopes(&self, max_slope: f64) -> Result<()> {
        for (name, f) in [("f+", &self.f_plus), ("f-", &self.f_minus)] {
            let slope = graph_slope(self.spacing(), f);
            if let Some(k) = slope.iter().position(|s| !(s.abs() <= max_slope)) {
                return Err(Error::FrontBreakdown {
                    t: self.t,
                    reason: format!(
                        "{name} slope {:.3e} at x1 = {:.6} exceeds {max_slope}; the curve is no longer a graph",
                        slope[k], self.x1[k]
                    ),
                });
            }
        }
        Ok(())
    }
}

/// `∂f/∂x1` on uniform samples: centered differences inside, second-order
/// one-sided differences at the two ends.
pub fn graph_slope(h: f64, f: &[f64]) -> Vec<f64> {
    let m = f.len();
    let mut out = vec![0.0; m];
    if m < 3 {
        if m == 2 {
            let s = (f[1] - f[0]) / h;
            out.fill(s);
        }
        return out;
    }
    out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
    for k in 1..m - 1 {
        out[k] = (f[k + 1] - f[k - 1]) / (2.0 * h);
    }
    out[m - 1] = (3.0 * f[m - 1] - 4.0 * f[m - 2] + f[m - 3]) / (2.0 * h);
    out
}

/// Crossings of `level` in one periodic column, as x2 positions in `[0, 2π)`.
fn column_crossings(column: &[f64], level: f64, h: f64) -> Vec<f64> {
    let n = column.len();
    let g = |j: usize| column[j % n] - level;
    let mut roots = Vec::new();
    for j in 0..n {
        let (g0, g1) = (g(j), g(j + 1));
        if g0 == 0.0 {
            roots.push(j as f64 * h);
        } else if g0 * g1 < 0.0 {
            let vals = [g(j + n - 1), g0, g1, g(j + 2)];
            roots.push((j as f64 + refine_root(vals)) * h);
        }
    }
    roots
}

fn cubic(vals: &[f64; 4], s: f64) -> (f64, f64) {
    // Lagrange basis on nodes -1, 0, 1, 2 and its derivative.
    let w = [
        -s * (s - 1.0) * (s - 2.0) / 6.0,
        (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0,
        -(s + 1.0) * s * (s - 2.0) / 2.0,
        (s + 1.0) * s * (s - 1.0) / 6.0,
    ];
    let dw = [
        -(3.0 * s * s - 6.0 * s + 2.0) / 6.0,
        (3.0 * s * s - 4.0 * s - 1.0) / 2.0,
        -(3.0 * s * s - 2.0 * s - 2.0) / 2.0,
        (3.0 * s * s - 1.0) / 6.0,
    ];
    let v = (0..4).map(|k| w[k] * vals[k]).sum();
    let d = (0..4).map(|k| dw[k] * vals[k]).sum();
    (v, d)
}

/// Root in `[0, 1]` of the cubic through four column values bracketing a
/// sign change between the middle two. Starts from the linear estimate and
/// polishes with bracketed Newton steps.
fn refine_root(vals: [f64; 4]) -> f64 {
    let (g0, g1) = (vals[1], vals[2]);
    let mut s = g0 / (g0 - g1);
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let increasing = g1 > g0;
    for _ in 0..60 {
        let (v, d) = cubic(&vals, s);
        if v == 0.0 {
            break;
        }
        if (v > 0.0) == increasing {
            hi = s;
        } else {
            lo = s;
        }
        let newton = s - v / d;
        let next = if d != 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (next - s).abs() < 1e-15 {
            s = next;
            break;
        }
        s = next;
    }
    s
}

/// Unwraps `root` by multiples of 2π to the copy closest to `reference`.
fn nearest_image(root: f64, reference: f64) -> f64 {
    root + TAU * ((reference - root) / TAU).round()
}

/// Extracts both curves from `theta` by scanning the vertical column at each
/// x1 sample. Among the crossings of a column the one nearest the previous
/// graph (or the seed path when `prev` is `None`) is kept.
pub fn extract_front_pair(
    theta: &RealField,
    spec: &FrontSpec,
    t: f64,
    prev: Option<&FrontGraphPair>,
) -> Result<FrontGraphPair> {
    spec.validate()?;
    let x1 = spec.x1_samples();
    if let Some(p) = prev {
        if p.a != spec.a || p.b != spec.b || p.len() != x1.len() {
            return Err(Error::WindowMismatch);
        }
    }
    let (f_plus, f_minus) = extract_graphs(theta, spec, &x1, prev)?;
    let pair = FrontGraphPair { a: spec.a, b: spec.b, x1, f_plus, f_minus, t };
    pair.check_ordering()?;
    pair.check_slopes(spec.max_slope)?;
    Ok(pair)
}

/// Like [`extract_front_pair`], but over `[a - k h, b + k h]` with the
/// window's sample spacing `h`, so the window samples are the middle ones.
/// Ordering and slope checks apply to the window only; use
/// [`FrontGraphPair::restrict`] to recover it.
pub fn extract_widened_pair(theta: &RealField, spec: &FrontSpec, k: usize, t: f64) -> Result<FrontGraphPair> {
    spec.validate()?;
    let m = spec.samples;
    let h = (spec.b - spec.a) / (m - 1) as f64;
    let (a, b) = (spec.a - k as f64 * h, spec.b + k as f64 * h);
    let x1 = uniform_samples(a, b, m + 2 * k);
    let (f_plus, f_minus) = extract_graphs(theta, spec, &x1, None)?;
    let wide = FrontGraphPair { a, b, x1, f_plus, f_minus, t };
    let window = wide.restrict(k, (spec.a, spec.b));
    window.check_ordering()?;
    window.check_slopes(spec.max_slope)?;
    Ok(wide)
}

fn extract_graphs(
    theta: &RealField,
    spec: &FrontSpec,
    x1: &[f64],
    prev: Option<&FrontGraphPair>,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let grid = theta.grid();
    let n2 = grid.n2();
    let values = theta.values();
    let mut column = vec![0.0; n2];
    let mut f_plus = Vec::with_capacity(x1.len());
    let mut f_minus = Vec::with_capacity(x1.len());

    for (k, &x) in x1.iter().enumerate() {
        let st = Stencil::new(x.rem_euclid(TAU), grid.n1());
        column.fill(0.0);
        for (i, w) in st.slots.iter().zip(st.weights) {
            let row = &values[i * n2..(i + 1) * n2];
            for (c, v) in column.iter_mut().zip(row) {
                *c += w * v;
            }
        }
        for (level, seed, prior, out) in [
            (spec.level_plus, &spec.seed_plus, prev.map(|p| p.f_plus[k]), &mut f_plus),
            (spec.level_minus, &spec.seed_minus, prev.map(|p| p.f_minus[k]), &mut f_minus),
        ] {
            let reference = prior.unwrap_or_else(|| seed.at(x));
            let best = column_crossings(&column, level, grid.dx2())
                .into_iter()
                .map(|r| nearest_image(r, reference))
                .min_by(|p, q| (p - reference).abs().total_cmp(&(q - reference).abs()))
                .ok_or(Error::FrontLost { x1: x })?;
            out.push(best);
        }
    }
    Ok((f_plus, f_minus))
}

/// Largest `|u1| dt / h` accepted in one RK4 stage sequence for the graphs;
/// larger steps are split. Centered differences with RK4 are stable well
/// beyond this, the margin covers the one-sided ends.
pub const GRAPH_CFL: f64 = 1.0;

/// Transports both graphs with the flow over `dt`, in RK4 substeps that
/// keep `|u1| dt / h <= GRAPH_CFL` on the samples, and checks the ordering.
pub fn advect_front_pair(
    pair: &FrontGraphPair,
    velocity: &dyn VelocitySource,
    dt: f64,
) -> Result<FrontGraphPair> {
    let next = transport_graphs(pair, velocity, dt)?;
    next.check_ordering()?;
    Ok(next)
}

/// [`advect_front_pair`] without the ordering check, for widened pairs whose
/// margins are allowed to misbehave.
pub fn transport_graphs(pair: &FrontGraphPair, velocity: &dyn VelocitySource, dt: f64) -> Result<FrontGraphPair> {
    let m = pair.len();
    let h = pair.spacing();
    let x1 = &pair.x1;
    let rhs = |t: f64, y: &Vec<f64>| -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(2 * m);
        for curve in y.chunks_exact(m) {
            let slope = graph_slope(h, curve);
            for k in 0..m {
                let u = velocity.velocity([x1[k], curve[k]], t);
                out.push(u[1] - slope[k] * u[0]);
            }
        }
        Ok(out)
    };
    let mut y: Vec<f64> = pair.f_plus.iter().chain(&pair.f_minus).copied().collect();
    let u1_max = y
        .chunks_exact(m)
        .flat_map(|c| c.iter().zip(x1).map(|(&f, &x)| velocity.velocity([x, f], pair.t)[0].abs()))
        .fold(0.0, f64::max);
    let substeps = ((u1_max * dt / (GRAPH_CFL * h)).ceil() as usize).max(1);
    let sub = dt / substeps as f64;
    let mut t = pair.t;
    for _ in 0..substeps {
        y = rk4_step(t, &y, sub, rhs)?;
        t += sub;
    }
    let t = pair.t + dt;
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::FrontBreakdown { t, reason: "non-finite graph values".into() });
    }
    let f_minus = y.split_off(m);
    Ok(FrontGraphPair { a: pair.a, b: pair.b, x1: pair.x1.clone(), f_plus: y, f_minus, t })
}

/// Thickness statistics of a pair over a sub-window `[alpha, beta]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thickness {
    /// Smallest `δ` over the samples inside the window and its two ends.
    pub delta_min: f64,
    pub delta_alpha: f64,
    pub delta_beta: f64,
    /// Trapezoid integral of `δ` over `[alpha, beta]`.
    pub area: f64,
}

/// `δ` statistics and the area between the curves over `[alpha, beta]`.
/// Window ends between samples use linearly interpolated `δ`, so the
/// quadrature is exact for affine `δ`.
pub fn thickness_and_area(pair: &FrontGraphPair, alpha: f64, beta: f64) -> Result<Thickness> {
    let tol = 1e-12 * (pair.b - pair.a);
    if !(beta > alpha) || alpha < pair.a - tol || beta > pair.b + tol || pair.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "empty or out-of-range window [{alpha}, {beta}] for a front on [{}, {}]",
            pair.a, pair.b
        )));
    }
    let alpha = alpha.max(pair.a);
    let beta = beta.min(pair.b);
    let delta = pair.delta();
    let h = pair.spacing();
    let interp = |x: f64| {
        let s = ((x - pair.a) / h).clamp(0.0, (pair.len() - 1) as f64);
        let k = (s.floor() as usize).min(pair.len() - 2);
        let w = s - k as f64;
        delta[k] * (1.0 - w) + delta[k + 1] * w
    };
    let delta_alpha = interp(alpha);
    let delta_beta = interp(beta);

    let mut nodes = vec![(alpha, delta_alpha)];
    nodes.extend(
        pair.x1
            .iter()
            .zip(&delta)
            .filter(|(x, _)| **x > alpha && **x < beta)
            .map(|(x, d)| (*x, *d)),
    );
    nodes.push((beta, delta_beta));

    let area = nodes.windows(2).map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1)).sum();
    let delta_min = nodes.iter().map(|n| n.1).fold(f64::INFINITY, f64::min);
    Ok(Thickness { delta_min, delta_alpha, delta_beta, area })
}
