//! Heuristic locator for hyperbolic saddles (X-points) of a periodic field.

use std::f64::consts::TAU;

use crate::particles::periodic_distance;
use crate::spectral::{Derivative, RealField, SampleMode, ScalarGrid};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Saddle {
    pub location: [f64; 2],
    pub value: f64,
    /// `f11 f22 - f12²` at `location`; always negative.
    pub hessian_det: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SaddleReport {
    pub saddles: Vec<Saddle>,
}

impl SaddleReport {
    pub fn len(&self) -> usize {
        self.saddles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.saddles.is_empty()
    }
}

fn straddles_zero(values: &[f64], n1: usize, n2: usize, i: usize, j: usize) -> bool {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for di in [n1 - 1, 0, 1] {
        for dj in [n2 - 1, 0, 1] {
            let v = values[((i + di) % n1) * n2 + (j + dj) % n2];
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    lo <= 0.0 && hi >= 0.0
}

/// Grid points whose 3×3 neighbourhood brackets a zero of both first
/// derivatives and where the Hessian is indefinite, each moved by one
/// Newton step and merged when closer than one grid cell.
pub fn find_saddles(f: &RealField) -> SaddleReport {
    let grid = f.grid();
    let (n1, n2) = (grid.n1(), grid.n2());
    let hat = f.to_spectral();
    let d1 = hat.derivative(Derivative::D1);
    let d2 = hat.derivative(Derivative::D2);
    let f1 = d1.to_real();
    let f2 = d2.to_real();
    let f11 = d1.derivative(Derivative::D1).to_real();
    let f12 = d1.derivative(Derivative::D2).to_real();
    let f22 = d2.derivative(Derivative::D2).to_real();

    let curvature = f11.max_abs().max(f22.max_abs()).max(f12.max_abs());
    if curvature == 0.0 {
        return SaddleReport::default();
    }
    let det_threshold = -1e-8 * curvature * curvature;
    let dx = grid.dx_min();

    let sample = |field: &RealField| ScalarGrid::new(field.clone(), SampleMode::Bicubic);
    let (s_f, s11, s12, s22) = (sample(f), sample(&f11), sample(&f12), sample(&f22));

    let mut found: Vec<(Saddle, f64)> = Vec::new();
    for i in 0..n1 {
        for j in 0..n2 {
            let k = grid.index(i, j);
            let (h11, h12, h22) = (f11.values()[k], f12.values()[k], f22.values()[k]);
            let det = h11 * h22 - h12 * h12;
            if det >= det_threshold
                || !straddles_zero(f1.values(), n1, n2, i, j)
                || !straddles_zero(f2.values(), n1, n2, i, j)
            {
                continue;
            }
            let (g1, g2) = (f1.values()[k], f2.values()[k]);
            let step = [(h22 * g1 - h12 * g2) / det, (h11 * g2 - h12 * g1) / det];
            if step[0].hypot(step[1]) > 2.0 * dx {
                continue;
            }
            let p = [
                (grid.x1(i) - step[0]).rem_euclid(TAU),
                (grid.x2(j) - step[1]).rem_euclid(TAU),
            ];
            let (a, b, c) = (s11.at(p), s12.at(p), s22.at(p));
            let hessian_det = a * c - b * b;
            if hessian_det >= det_threshold {
                continue;
            }
            let saddle = Saddle { location: p, value: s_f.at(p), hessian_det };
            let residual = g1.hypot(g2);
            match found.iter_mut().find(|(s, _)| periodic_distance(s.location, p) < dx) {
                Some(slot) if residual < slot.1 => *slot = (saddle, residual),
                Some(_) => {}
                None => found.push((saddle, residual)),
            }
        }
    }
    let mut saddles: Vec<Saddle> = found.into_iter().map(|(s, _)| s).collect();
    saddles.sort_by(|p, q| {
        p.location[0].total_cmp(&q.location[0]).then(p.location[1].total_cmp(&q.location[1]))
    });
    SaddleReport { saddles }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::GridSpec;
    use std::f64::consts::PI;

    fn assert_matches(report: &SaddleReport, expected: &[[f64; 2]], tol: f64) {
        assert_eq!(report.len(), expected.len(), "{report:?}");
        for e in expected {
            assert!(
                report.saddles.iter().any(|s| periodic_distance(s.location, *e) < tol),
                "no saddle near {e:?} in {report:?}"
            );
        }
        assert!(report.saddles.iter().all(|s| s.hessian_det < 0.0));
    }

    #[test]
    fn product_of_sines() {
        let g = GridSpec::square(32).unwrap();
        let f = RealField::from_fn(g, |x1, x2| x1.sin() * x2.sin());
        let r = find_saddles(&f);
        assert_matches(&r, &[[0.0, 0.0], [PI, 0.0], [0.0, PI], [PI, PI]], g.dx_min());
        for s in &r.saddles {
            assert!((s.hessian_det + 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn sum_of_cosines() {
        let g = GridSpec::new(48, 40).unwrap();
        let f = RealField::from_fn(g, |x1, x2| x1.cos() + x2.cos());
        assert_matches(&find_saddles(&f), &[[0.0, PI], [PI, 0.0]], g.dx_min());
    }

    #[test]
    fn constant_has_none() {
        let g = GridSpec::square(16).unwrap();
        assert!(find_saddles(&RealField::constant(g, 3.0)).is_empty());
    }

    #[test]
    fn off_grid_saddle_is_refined() {
        let g = GridSpec::square(32).unwrap();
        let (c1, c2) = (1.0, 2.0);
        let f = RealField::from_fn(g, |x1, x2| (x1 - c1).sin() * (x2 - c2).sin());
        let r = find_saddles(&f);
        assert!(r.saddles.iter().any(|s| periodic_distance(s.location, [c1, c2]) < 0.1 * g.dx_min()));
    }
}
