//! Fields on the unit ball and the Dirichlet solver for divergence loads.

mod field;
mod space;

pub use field::{BallField, BallSamples, VectorBallField, VectorSamples};
pub use space::BallSpace;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{BoundaryField, Dim};
    use std::f64::consts::PI;

    fn radial_load(space: &BallSpace, f: impl Fn([f64; 3]) -> [f64; 3]) -> VectorSamples {
        let n = space.dim().n();
        let mut g = VectorSamples::zeros(n, space.n_points());
        for p in 0..space.n_points() {
            g.set(p, f(space.point(p)));
        }
        g
    }

    #[test]
    fn h1_norm_of_coordinate_function() {
        let space = BallSpace::with_default_radial(Dim::Three, 4).unwrap();
        let y10 = BoundaryField::mode(Dim::Three, 4, 1, 0, (4.0 * PI / 3.0).sqrt());
        let u = space.harmonic_extension(&y10).unwrap();
        let exact = (4.0 * PI / 15.0 + 4.0 * PI / 3.0).sqrt();
        assert!((space.h1_norm(&u).unwrap() - exact).abs() < 1e-13);
        let x = [0.3, -0.2, 0.5];
        assert!((space.eval_at(&u, x) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn divergence_solver_reproduces_quadratics() {
        for dim in [Dim::Two, Dim::Three] {
            let space = BallSpace::with_default_radial(dim, 6).unwrap();
            let g = radial_load(&space, |x| [-2.0 * x[0], -2.0 * x[1], -2.0 * x[2]]);
            let u = space.poisson_div_solve(&g).unwrap();
            let g2 = radial_load(&space, |x| x);
            let u2 = space.poisson_div_solve(&g2).unwrap();
            for x in [[0.1, 0.2, 0.3], [0.5, -0.4, 0.0], [0.0, 0.0, 0.0]] {
                let x = if dim == Dim::Two { [x[0], x[1], 0.0] } else { x };
                let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
                assert!((space.eval_at(&u, x) - (1.0 - r2)).abs() < 1e-13);
                assert!((space.eval_at(&u2, x) - 0.5 * (r2 - 1.0)).abs() < 1e-13);
            }
            assert!(space.weak_residual(&u, &g).unwrap() < 1e-12);
        }
    }

    #[test]
    fn weak_residual_vanishes_for_general_loads() {
        for dim in [Dim::Two, Dim::Three] {
            let space = BallSpace::with_default_radial(dim, 7).unwrap();
            let g = radial_load(&space, |x| {
                [
                    (x[1] * 3.0).sin() + x[0] * x[2],
                    (x[0] - x[2]).cos() * x[1],
                    x[0] * x[0] - 0.3,
                ]
            });
            let u = space.poisson_div_solve(&g).unwrap();
            let res = space.weak_residual(&u, &g).unwrap();
            assert!(res < 1e-10 * space.l2_norm_vector(&g), "{dim:?} residual {res}");
        }
    }

    #[test]
    fn gradient_samples_match_finite_differences() {
        let space = BallSpace::new(Dim::Three, 5, 10).unwrap();
        let u = space.interpolate(|x| x[0] * x[1] * x[1] - 0.5 * x[2] + x[0] * x[2] * x[2] * x[2]);
        let (_, g) = space.sample_with_gradient(&u).unwrap();
        let h = 1e-6;
        for p in (0..space.n_points()).step_by(997) {
            let x = space.point(p);
            for d in 0..3 {
                let mut a = x;
                let mut b = x;
                a[d] += h;
                b[d] -= h;
                let fd = (space.eval_at(&u, a) - space.eval_at(&u, b)) / (2.0 * h);
                assert!((fd - g.comps[d][p]).abs() < 1e-8, "{fd} {}", g.comps[d][p]);
            }
        }
        let vf = space.gradient_field(&u).unwrap();
        assert_eq!(vf.components.len(), 3);
        assert_eq!(vf.components[0].degree(), 6);
    }

    #[test]
    fn traces_of_harmonic_extension() {
        let dim = Dim::Two;
        let space = BallSpace::with_default_radial(dim, 9).unwrap();
        let n = dim.n_modes(9);
        let psi = BoundaryField::new(dim, 9, (0..n).map(|i| (0.7 * i as f64).cos()).collect()).unwrap();
        let u = space.harmonic_extension(&psi).unwrap();
        let tr = space.boundary_trace(&u).unwrap();
        assert!(tr.sub(&psi).unwrap().l2_norm() < 1e-15);
        let dn = space.radial_trace(&u).unwrap();
        let expect = psi.map_degrees(|l| l as f64);
        assert!(dn.sub(&expect).unwrap().l2_norm() < 1e-11);
    }

    #[test]
    fn projection_recovers_nodal_fields() {
        let space = BallSpace::new(Dim::Two, 6, 10).unwrap();
        let u = space.interpolate(|x| x[0] * x[0] * x[1] + 0.2 * x[1]);
        let s = space.sample(&u).unwrap();
        let back = space.project(&s).unwrap();
        assert!(back.sub(&u).unwrap().max_abs() < 1e-12);
        let json = u.to_json();
        assert!(json.contains("\"N_r\":10"));
        assert_eq!(BallField::from_json(&json).unwrap(), u);
    }
}
