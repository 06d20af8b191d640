use proptest::prelude::*;

use nearsphere::ball::BallSpace;
use nearsphere::charts::{fibonacci_sphere, plateau, smooth_step, Atlas, AtlasOptions, BoxSamples};
use nearsphere::dn::{dn_apply, fit_tame_constants, series_solve, SeriesOptions, ShapeState};
use nearsphere::oracles::translated_ball_oracle;
use nearsphere::sampling::{seeded_rng, FieldFamily};
use nearsphere::{AngularGrid, BoundaryField, Dim};

fn dim_strategy() -> impl Strategy<Value = Dim> {
    prop_oneof![Just(Dim::Two), Just(Dim::Three)]
}

fn field(dim: Dim, degree: usize, seed: u64, amplitude: f64, decay: f64) -> BoundaryField {
    FieldFamily {
        dim,
        degree,
        decay,
        s_norm: 2.5,
        amplitude,
        zero_mean: false,
    }
    .sample(&mut seeded_rng(seed))
}

fn rel(a: &BoundaryField, b: &BoundaryField) -> f64 {
    a.sub(b).unwrap().l2_norm() / b.l2_norm().max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn transform_round_trip_and_parseval(dim in dim_strategy(), l in 1usize..12, seed in any::<u64>()) {
        let f = field(dim, l, seed, 1.0, 0.0);
        let grid = AngularGrid::for_degree(dim, l);
        let vals = f.synth(&grid).unwrap();
        let back = BoundaryField::analyze(&grid, &vals, l).unwrap();
        prop_assert!(rel(&back, &f) < 1e-12);
        let quad: f64 = vals.iter().zip(grid.weights()).map(|(v, w)| v * v * w).sum();
        prop_assert!((quad.sqrt() - f.l2_norm()).abs() < 1e-12 * f.l2_norm());
    }

    #[test]
    fn products_are_exact_pointwise(dim in dim_strategy(), l in 1usize..8, seed in any::<u64>(), t in 0.0f64..6.28) {
        let f = field(dim, l, seed, 1.0, 0.0);
        let g = field(dim, l, seed.wrapping_add(1), 1.0, 0.0);
        let fg = f.multiply(&g).unwrap();
        let x = match dim {
            Dim::Two => [t.cos(), t.sin(), 0.0],
            Dim::Three => [0.6 * t.cos(), 0.6 * t.sin(), 0.8],
        };
        prop_assert!((fg.eval_at(x) - f.eval_at(x) * g.eval_at(x)).abs() < 1e-12 * (1.0 + fg.l2_norm()));
    }

    #[test]
    fn sobolev_norms_increase_with_order(dim in dim_strategy(), l in 1usize..12, seed in any::<u64>(), s in 0.0f64..4.0, ds in 0.0f64..2.0) {
        let f = field(dim, l, seed, 1.0, 0.0);
        prop_assert!(f.sobolev_norm(s) <= f.sobolev_norm(s + ds) * (1.0 + 1e-14));
    }

    #[test]
    fn box_transform_satisfies_parseval(m in 4usize..40, seed in any::<u64>()) {
        use rand::Rng;
        let mut rng = seeded_rng(seed);
        let vals: Vec<f64> = (0..m * 6).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b = BoxSamples::new(vec![m, 6], vec![1.3, 0.7], vals).unwrap();
        let l2 = b.l2_norm();
        prop_assert!((b.spectrum().sobolev_norm(0.0) - l2).abs() < 1e-12 * l2);
    }

    #[test]
    fn cutoffs_are_monotone_steps(t in -1.0f64..2.0, dt in 0.0f64..1.0) {
        let (a, b) = (smooth_step(t), smooth_step(t + dt));
        prop_assert!((0.0..=1.0).contains(&a) && a <= b);
        prop_assert_eq!(plateau(t.min(1.0)), 1.0);
        prop_assert_eq!(plateau(2.0 + dt), 0.0);
    }

    #[test]
    fn tame_fit_is_feasible(seed in any::<u64>(), n in 2usize..12) {
        use rand::Rng;
        let mut rng = seeded_rng(seed);
        let a: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..2.0)).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..2.0)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..2.0)).collect();
        let (c0, cs) = fit_tame_constants(&a, &b, &y);
        prop_assert!(c0 >= 0.0 && cs >= 0.0);
        for i in 0..n {
            prop_assert!(c0 * a[i] + cs * b[i] >= y[i] * (1.0 - 1e-10));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn dn_operator_is_linear_and_kills_constants(dim in dim_strategy(), seed in any::<u64>(), a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let l = 6;
        let space = BallSpace::with_default_radial(dim, l).unwrap();
        let h = field(dim, l, seed, 0.05, 4.0);
        let p1 = field(dim, l, seed ^ 1, 1.0, 2.0);
        let p2 = field(dim, l, seed ^ 2, 1.0, 2.0);
        let g = |psi: &BoundaryField| dn_apply(&space, &h, psi, SeriesOptions::default()).unwrap().g;
        let lhs = g(&p1.lincomb(a, &p2, b).unwrap());
        let rhs = g(&p1).lincomb(a, &g(&p2), b).unwrap();
        prop_assert!(lhs.sub(&rhs).unwrap().l2_norm() < 1e-11 * (1.0 + rhs.l2_norm()));
        prop_assert!(g(&BoundaryField::constant(dim, l, 1.0)).l2_norm() < 1e-11);
    }

    #[test]
    fn series_terms_are_homogeneous_in_h(dim in dim_strategy(), seed in any::<u64>(), t in 0.2f64..1.5) {
        let l = 6;
        let space = BallSpace::with_default_radial(dim, l).unwrap();
        let h = field(dim, l, seed, 0.04, 4.0);
        let psi = field(dim, l, seed ^ 5, 1.0, 2.0);
        let opts = SeriesOptions { m_cap: 4, tol: 0.0 };
        let base = series_solve(&ShapeState::new(&space, &h).unwrap(), &psi, opts).unwrap();
        let scaled = series_solve(&ShapeState::new(&space, &h.scale(t)).unwrap(), &psi, opts).unwrap();
        for m in 1..=3 {
            let expect = base.terms[m].scale(t.powi(m as i32));
            let diff = space.h1_norm(&scaled.terms[m].sub(&expect).unwrap()).unwrap();
            prop_assert!(diff <= 1e-10 * base.terms_h1[m].max(1e-300) * t.powi(m as i32), "m = {}: {}", m, diff);
        }
    }

    #[test]
    fn translated_ball_respects_reflection(dim in dim_strategy(), seed in any::<u64>(), eps in -0.1f64..0.1) {
        let l = 6;
        let psi = field(dim, l, seed, 1.0, 2.0);
        let a = translated_ball_oracle(eps, &psi, l, 40).unwrap();
        let b = translated_ball_oracle(-eps, &psi.reflect_x1(), l, 40).unwrap();
        prop_assert!(b.g.sub(&a.g.reflect_x1()).unwrap().l2_norm() < 1e-10 * (1.0 + a.g.l2_norm()));
        prop_assert!(b.h.sub(&a.h.reflect_x1()).unwrap().l2_norm() < 1e-12);
    }

    #[test]
    fn charts_invert_and_partition_sums_to_one(dim in dim_strategy(), k in 0usize..200, r in 0.9f64..=1.0) {
        let atlas = Atlas::new(dim, AtlasOptions::default()).unwrap();
        let x = if dim == Dim::Two {
            let t = k as f64 * 0.0317;
            [r * t.cos(), r * t.sin(), 0.0]
        } else {
            let p = fibonacci_sphere(200)[k];
            [r * p[0], r * p[1], r * p[2]]
        };
        prop_assert!((atlas.partition_sum(x) - 1.0).abs() < 1e-13);
        for j in atlas.charts_near(x) {
            let y = atlas.chart_f(j, x).unwrap();
            let back = atlas.chart_g(j, y).unwrap();
            let d = ((back[0] - x[0]).powi(2) + (back[1] - x[1]).powi(2) + (back[2] - x[2]).powi(2)).sqrt();
            prop_assert!(d < 1e-14);
        }
    }
}
