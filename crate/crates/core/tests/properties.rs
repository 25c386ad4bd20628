use std::f64::consts::TAU;

use proptest::prelude::*;

use sharpfront::diagnostics::{accumulate_integral, time_derivative};
use sharpfront::fronts::{thickness_and_area, FrontGraphPair};
use sharpfront::particles::periodic_distance;
use sharpfront::runner::{parse_config, Snapshot};
use sharpfront::spectral::{GridSpec, RealField};

fn grid() -> impl Strategy<Value = GridSpec> {
    (4usize..=12, 4usize..=12).prop_map(|(a, b)| GridSpec::new(2 * a, 2 * b).unwrap())
}

fn field() -> impl Strategy<Value = RealField> {
    grid().prop_flat_map(|g| {
        prop::collection::vec(-10.0f64..10.0, g.n1() * g.n2()).prop_map(move |v| RealField::new(g, v).unwrap())
    })
}

/// Strictly increasing sample times built from positive gaps.
fn times(len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
    (-5.0f64..5.0, prop::collection::vec(0.01f64..1.0, len)).prop_map(|(t0, gaps)| {
        gaps.iter()
            .scan(t0, |t, h| {
                let out = *t;
                *t += h;
                Some(out)
            })
            .collect()
    })
}

proptest! {
    #[test]
    fn fft_roundtrip_reproduces_grid_values(f in field()) {
        let back = f.to_spectral().to_real();
        prop_assert!(back.max_abs_diff(&f) <= 1e-12 * (1.0 + f.max_abs()));
    }

    #[test]
    fn transform_is_linear(f in field(), s in -3.0f64..3.0) {
        let g = f.grid();
        let scaled = RealField::new(g, f.values().iter().map(|v| s * v).collect()).unwrap();
        let lhs = scaled.to_spectral().to_real();
        let rhs = f.to_spectral().scale(s).to_real();
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-11 * (1.0 + f.max_abs()));
        prop_assert!((f.to_spectral().mean() - f.mean()).abs() <= 1e-12 * (1.0 + f.max_abs()));
    }

    #[test]
    fn integral_of_nonnegative_samples_is_monotone(t in times(1..40), seed in prop::collection::vec(0.0f64..5.0, 40)) {
        let samples: Vec<(f64, f64)> = t.iter().zip(&seed).map(|(a, b)| (*a, *b)).collect();
        let acc = accumulate_integral(&samples).unwrap();
        prop_assert_eq!(acc[0], 0.0);
        prop_assert!(acc.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn time_derivative_is_exact_for_quadratics(t in times(2..30), c in prop::array::uniform3(-4.0f64..4.0)) {
        let y: Vec<f64> = t.iter().map(|x| c[0] + c[1] * x + c[2] * x * x).collect();
        let d = time_derivative(&t, &y).unwrap();
        let scale = 1.0 + t.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for (x, dy) in t.iter().zip(&d) {
            let exact = if t.len() == 2 { c[1] + c[2] * (t[0] + t[1]) } else { c[1] + 2.0 * c[2] * x };
            prop_assert!((dy - exact).abs() <= 1e-7 * scale * scale, "{} vs {}", dy, exact);
        }
    }

    #[test]
    fn thickness_is_exact_for_affine_gaps(
        m in 3usize..200,
        (a, len) in (0.0f64..3.0, 0.5f64..3.0),
        (p, q) in (0.1f64..1.0, -0.1f64..0.1),
        (s0, s1) in (0.0f64..1.0, 0.0f64..1.0),
    ) {
        let b = a + len;
        let pair = FrontGraphPair::from_fn((a, b), m, 0.0, |x| 2.0 + p + q * (x - a), |_| 2.0);
        let (alpha, beta) = (a + s0.min(s1) * len, a + s0.max(s1) * len + 1e-3);
        let beta = beta.min(b);
        let th = thickness_and_area(&pair, alpha, beta).unwrap();
        let delta = |x: f64| p + q * (x - a);
        let exact = 0.5 * (beta - alpha) * (delta(alpha) + delta(beta));
        prop_assert!((th.area - exact).abs() <= 1e-12);
        prop_assert!((th.delta_min - delta(alpha).min(delta(beta))).abs() <= 1e-12);
    }

    #[test]
    fn periodic_distance_is_a_bounded_symmetric_metric(
        p in prop::array::uniform2(-20.0f64..20.0),
        q in prop::array::uniform2(-20.0f64..20.0),
        shift in prop::array::uniform2(-3i32..3),
    ) {
        let d = periodic_distance(p, q);
        prop_assert!((d - periodic_distance(q, p)).abs() <= 1e-12);
        prop_assert!(d >= 0.0 && d <= TAU / 2.0 * 2f64.sqrt() + 1e-12);
        let moved = [q[0] + TAU * shift[0] as f64, q[1] + TAU * shift[1] as f64];
        prop_assert!((periodic_distance(p, moved) - d).abs() <= 1e-9);
        prop_assert!(periodic_distance(p, p) <= 1e-12);
    }

    #[test]
    fn snapshots_roundtrip_bit_for_bit(f in field(), t in -1e3f64..1e3, with_omega in any::<bool>()) {
        let mut fields = vec![("theta".to_string(), f.clone())];
        if with_omega {
            fields.push(("omega".to_string(), f.to_spectral().scale(-0.5).to_real()));
        }
        let snap = Snapshot { model: "boussinesq".into(), grid: f.grid(), t, fields };
        let back = Snapshot::parse(snap.to_bytes().as_slice()).unwrap();
        prop_assert_eq!(back, snap);
    }

    #[test]
    fn config_echo_parses_back_to_itself(
        n in 4usize..64,
        t_end in 0.01f64..100.0,
        cfl in 0.05f64..1.0,
        nu in 0.0f64..1e-3,
        scenario in prop::sample::select(vec!["zero", "stripes", "qg_saddle"]),
    ) {
        let text = format!(
            "[model]\nkind = \"passive\"\nstream_function = \"sin(x1)\"\n[grid]\nn1 = {}\n\
             [initial]\nscenario = \"{scenario}\"\n[time]\nt_end = {t_end}\ncfl = {cfl}\n\
             [hyperdissipation]\nnu = {nu}\n",
            2 * n
        );
        let cfg = parse_config(&text).unwrap();
        let echoed = parse_config(&cfg.to_toml()).unwrap();
        prop_assert_eq!(echoed, cfg);
    }
}
