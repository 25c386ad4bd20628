//! Fluid trajectories `dX/dt = u(X, t)` on the torus and pair separations.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::integrator::rk4_step;
use crate::spectral::VelocitySource;

/// Distance on the 2π torus using the nearest periodic image per axis.
pub fn periodic_distance(p: [f64; 2], q: [f64; 2]) -> f64 {
    let d = |a: f64, b: f64| {
        let r = (a - b).rem_euclid(TAU);
        r.min(TAU - r)
    };
    d(p[0], q[0]).hypot(d(p[1], q[1]))
}

fn wrap(p: [f64; 2]) -> [f64; 2] {
    [p[0].rem_euclid(TAU), p[1].rem_euclid(TAU)]
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSet {
    labels: Vec<[f64; 2]>,
    positions: Vec<[f64; 2]>,
    pairs: Vec<(usize, usize)>,
}

impl ParticleSet {
    /// Particles start at their labels `q`; `pairs` index into `labels`.
    pub fn new(labels: Vec<[f64; 2]>, pairs: Vec<(usize, usize)>) -> Result<Self> {
        if let Some(id) = labels.iter().position(|q| !(q[0].is_finite() && q[1].is_finite())) {
            return Err(Error::ParticleNonFinite { id });
        }
        if let Some(&(i, j)) = pairs.iter().find(|(i, j)| *i >= labels.len() || *j >= labels.len()) {
            return Err(Error::InvalidArgument(format!(
                "particle pair ({i}, {j}) refers to a particle outside 0..{}",
                labels.len()
            )));
        }
        let positions = labels.iter().copied().map(wrap).collect();
        Ok(Self { labels, positions, pairs })
    }

    pub fn labels(&self) -> &[[f64; 2]] {
        &self.labels
    }

    pub fn positions(&self) -> &[[f64; 2]] {
        &self.positions
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Advances every particle by one RK4 step from `t` to `t + dt`.
///
/// The sampler is queried at `t`, `t + dt/2` and `t + dt`; pass a
/// [`LinearInTime`](crate::spectral::LinearInTime) between the two stored
/// velocity fields for unsteady runs.
pub fn advect_particles(
    p: &ParticleSet,
    velocity: &dyn VelocitySource,
    t: f64,
    dt: f64,
) -> Result<ParticleSet> {
    let mut positions = Vec::with_capacity(p.len());
    for (id, x) in p.positions.iter().enumerate() {
        // Unwrapped coordinates during the step; wrapped once at the end.
        let y = rk4_step(t, &vec![x[0], x[1]], dt, |s, y: &Vec<f64>| {
            let u = velocity.velocity([y[0], y[1]], s);
            Ok::<_, Error>(vec![u[0], u[1]])
        })?;
        if !(y[0].is_finite() && y[1].is_finite()) {
            return Err(Error::ParticleNonFinite { id });
        }
        positions.push(wrap([y[0], y[1]]));
    }
    Ok(ParticleSet { labels: p.labels.clone(), positions, pairs: p.pairs.clone() })
}

/// Current periodic distance of each declared pair, in declaration order.
pub fn pair_separations(p: &ParticleSet) -> Vec<f64> {
    p.pairs.iter().map(|&(i, j)| periodic_distance(p.positions[i], p.positions[j])).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn rest_and_uniform_drift() {
        let p = ParticleSet::new(vec![[1.0, 2.0], [6.0, 0.5]], vec![(0, 1)]).unwrap();
        let rest = |_: [f64; 2], _: f64| [0.0, 0.0];
        assert_eq!(advect_particles(&p, &rest, 0.0, 0.3).unwrap().positions(), p.positions());

        let drift = |_: [f64; 2], _: f64| [1.0, 0.0];
        let q = advect_particles(&p, &drift, 0.0, 0.5).unwrap();
        assert_eq!(q.positions()[0], [1.5, 2.0]);
        // wraps through 2π
        assert!((q.positions()[1][0] - (6.5 - TAU)).abs() < 1e-15);
    }

    #[test]
    fn separation_examples() {
        let p = ParticleSet::new(
            vec![[0.0, 0.0], [PI, 0.0], [0.1, 0.0], [TAU - 0.1, 0.0], [0.0, 0.0]],
            vec![(0, 1), (2, 3), (0, 4)],
        )
        .unwrap();
        let s = pair_separations(&p);
        assert!((s[0] - PI).abs() < 1e-15);
        assert!((s[1] - 0.2).abs() < 1e-12);
        assert_eq!(s[2], 0.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ParticleSet::new(vec![[f64::NAN, 0.0]], vec![]).is_err());
        assert!(ParticleSet::new(vec![[0.0, 0.0]], vec![(0, 1)]).is_err());
        let p = ParticleSet::new(vec![[0.0, 0.0]], vec![]).unwrap();
        let bad = |_: [f64; 2], _: f64| [f64::INFINITY, 0.0];
        assert_eq!(advect_particles(&p, &bad, 0.0, 0.1), Err(Error::ParticleNonFinite { id: 0 }));
    }

    #[test]
    fn no_pairs_no_separations() {
        let p = ParticleSet::new(vec![[1.0, 1.0]], vec![]).unwrap();
        assert!(pair_separations(&p).is_empty());
    }
}
