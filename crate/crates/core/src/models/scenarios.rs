//! Built-in initial data.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ModelKind, ModelState};
use crate::error::{Error, Result};
use crate::spectral::{GridSpec, RealField, SpectralField};

#[derive(Debug, Clone, Copy)]
pub struct ScenarioInfo {
    pub name: &'static str,
    pub description: &'static str,
}

pub const SCENARIOS: &[ScenarioInfo] = &[
    ScenarioInfo { name: "zero", description: "all prognostic fields zero" },
    ScenarioInfo {
        name: "shear",
        description: "theta = cos(x1), omega = 0 (euler: omega = cos(x1)); steady for qg, mhd and euler",
    },
    ScenarioInfo {
        name: "qg_saddle",
        description: "theta = sin(x1) sin(x2) + cos(x2), level sets with hyperbolic saddles; omega = 0",
    },
    ScenarioInfo {
        name: "stripes",
        description: "theta = sin(x2), horizontal level lines for front tracking; omega = 0",
    },
    ScenarioInfo {
        name: "boussinesq_bubble",
        description: "symmetric periodic bump theta = exp(8 (cos(x1 - pi) + cos(x2 - pi/2) - 2)), omega = 0",
    },
    ScenarioInfo {
        name: "mhd_orszag_tang",
        description: "theta = 0.5 cos(2 x1) + cos(x2), omega = cos(x1) + cos(x2)",
    },
    ScenarioInfo {
        name: "euler_random",
        description: "smooth random zero-mean field (wavenumbers 1..4, fixed seed) scaled to max |.| = 1, used for omega and theta",
    },
];

const RANDOM_SEED: u64 = 0x5eed_f0c5;

fn smooth_random(grid: GridSpec) -> RealField {
    let mut rng = ChaCha8Rng::seed_from_u64(RANDOM_SEED);
    let mut modes = Vec::new();
    for k1 in 0..=4_i64 {
        for k2 in -4..=4_i64 {
            let k_sq = k1 * k1 + k2 * k2;
            if k_sq == 0 || k_sq > 16 || (k1 == 0 && k2 < 0) {
                continue;
            }
            let amp = 1.0 / (k_sq as f64);
            let c = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * amp;
            modes.push(((k1, k2), c));
            modes.push(((-k1, -k2), c.conj()));
        }
    }
    let f = SpectralField::from_modes(grid, &modes)
        .expect("low modes fit every valid grid")
        .to_real();
    let scale = f.max_abs();
    RealField::from_raw(grid, f.into_values().into_iter().map(|v| v / scale).collect())
}

/// Builds the named initial state for `kind` on `grid`, keeping only the
/// model's prognostic fields.
pub fn builtin_initial_data(name: &str, kind: &ModelKind, grid: GridSpec) -> Result<ModelState> {
    let zeros = || RealField::zeros(grid);
    let (theta, omega) = match name {
        "zero" => (zeros(), zeros()),
        "shear" => {
            let c = RealField::from_fn(grid, |x1, _| x1.cos());
            let omega = if matches!(kind, ModelKind::Euler2D) { c.clone() } else { zeros() };
            (c, omega)
        }
        "qg_saddle" => (RealField::from_fn(grid, |x1, x2| x1.sin() * x2.sin() + x2.cos()), zeros()),
        "stripes" => (RealField::from_fn(grid, |_, x2| x2.sin()), zeros()),
        "boussinesq_bubble" => (
            RealField::from_fn(grid, |x1, x2| {
                (8.0 * ((x1 - PI).cos() + (x2 - FRAC_PI_2).cos() - 2.0)).exp()
            }),
            zeros(),
        ),
        "mhd_orszag_tang" => (
            RealField::from_fn(grid, |x1, x2| 0.5 * (2.0 * x1).cos() + x2.cos()),
            RealField::from_fn(grid, |x1, x2| x1.cos() + x2.cos()),
        ),
        "euler_random" => {
            let f = smooth_random(grid);
            (f.clone(), f)
        }
        other => return Err(Error::UnknownScenario(other.to_string())),
    };
    ModelState::new(
        kind.clone(),
        kind.has_theta().then_some(theta),
        kind.has_omega().then_some(omega),
        0.0,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{tendency, HyperdissipationParams};

    #[test]
    fn registry_names_all_build() {
        let g = GridSpec::square(32).unwrap();
        for info in SCENARIOS {
            for kind in [ModelKind::QG, ModelKind::Euler2D, ModelKind::MHD, ModelKind::Boussinesq] {
                let s = builtin_initial_data(info.name, &kind, g).unwrap();
                assert!(s.is_finite());
                assert_eq!(s.grid(), g);
            }
        }
        assert_eq!(
            builtin_initial_data("nope", &ModelKind::QG, g),
            Err(Error::UnknownScenario("nope".into()))
        );
    }

    #[test]
    fn zero_scenario_is_zero() {
        let g = GridSpec::square(16).unwrap();
        let s = builtin_initial_data("zero", &ModelKind::MHD, g).unwrap();
        assert_eq!(s.theta.unwrap().max_abs(), 0.0);
        assert_eq!(s.omega.unwrap().max_abs(), 0.0);
    }

    #[test]
    fn shear_is_steady_for_qg() {
        let g = GridSpec::square(32).unwrap();
        let s = builtin_initial_data("shear", &ModelKind::QG, g).unwrap();
        let d = tendency(&s, HyperdissipationParams::default()).unwrap();
        assert!(d.dtheta.unwrap().max_abs() < 1e-13);
    }

    #[test]
    fn random_field_is_reproducible_and_zero_mean() {
        let g = GridSpec::square(32).unwrap();
        let a = smooth_random(g);
        let b = smooth_random(g);
        assert_eq!(a, b);
        assert!(a.mean().abs() < 1e-15);
        assert!((a.max_abs() - 1.0).abs() < 1e-15);
    }
}
