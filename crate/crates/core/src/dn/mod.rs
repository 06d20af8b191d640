//! The Dirichlet-to-Neumann operator `G(h)` of the domain `{r < 1 + h(x̂)}`.
//!
//! The harmonic extension `h̃` of `h` defines the diffeomorphism
//! `γ̃(x) = (1 + h̃(x)) x` of the ball. Pulled back by `γ̃`, the Laplace
//! equation becomes `div(P(h) ∇u) = 0` in the ball with
//! `P = |det Dγ̃| Dγ̃^{-1} Dγ̃^{-T}`. The solution is computed either by the
//! expansion in homogeneous pieces `P = Σ P_m` ([`series_solve`]), by the
//! fixed point `u ← PI ψ + S((I - P)∇u)` ([`fixed_point_solve`]) or by a
//! dense Galerkin solve (in [`crate::oracles`]). All three use the same
//! pointwise values of `P` and therefore the same discrete problem.

mod assemble;
mod derivative;
mod scan;
mod series;
mod shape;

pub use assemble::{assemble_g, assemble_g_linear, dn_apply, g_formula, weighted_pairing, DnResult};
pub use derivative::Linearization;
pub use scan::{fit_rows, fit_tame_constants, radius_scan, tame_derivative_scan, tame_scan, RadiusRow, TameRow, TameSample};
pub use series::{
    coefficient_form, coefficient_residual, fit_ratio, fixed_point_solve, series_solve, solve_coefficient_problem,
    FixedPointOptions, FixedPointSolution, SeriesOptions, SeriesSolution,
};
pub use shape::{p_matrix, p_terms, BoundaryGeometry, Mat3, ShapeState, TermCoeffs};

use crate::ball::BallSpace;
use crate::error::Result;
use crate::spectral::BoundaryField;

/// Fixed-point options used for the interior state and for each linearized
/// problem when computing shape derivatives.
pub fn derivative_options() -> FixedPointOptions {
    FixedPointOptions {
        tol: 1e-15,
        max_iter: 400,
    }
}

/// `G'(h)[η]ψ`.
pub fn dn_derivative(space: &BallSpace, h: &BoundaryField, eta: &BoundaryField, psi: &BoundaryField) -> Result<BoundaryField> {
    let shape = ShapeState::new(space, h)?;
    let opts = derivative_options();
    let u = fixed_point_solve(&shape, psi, opts)?.u;
    Linearization::new(&shape, psi, u, opts)?.first(eta)
}

/// `G''(h)[η₁, η₂]ψ`.
pub fn dn_second_derivative(
    space: &BallSpace,
    h: &BoundaryField,
    eta1: &BoundaryField,
    eta2: &BoundaryField,
    psi: &BoundaryField,
) -> Result<BoundaryField> {
    let shape = ShapeState::new(space, h)?;
    let opts = derivative_options();
    let u = fixed_point_solve(&shape, psi, opts)?.u;
    Linearization::new(&shape, psi, u, opts)?.second(eta1, eta2)
}

/// `G(h)ψ` with the interior solved by the fixed point to roundoff, the
/// reference used for finite-difference checks of the derivatives.
pub fn dn_apply_converged(space: &BallSpace, h: &BoundaryField, psi: &BoundaryField) -> Result<BoundaryField> {
    let shape = ShapeState::new(space, h)?;
    let u = fixed_point_solve(&shape, psi, derivative_options())?.u;
    assemble_g(&shape, &u, psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Dim;

    fn field(dim: Dim, l: usize, seed: u64, amp: f64) -> BoundaryField {
        let n = dim.n_modes(l);
        let c = (0..n)
            .map(|i| {
                let d = dim.degree_of(i) as f64;
                amp * ((seed as f64 * 1.7 + i as f64 * 2.3).sin()) / (1.0 + d).powi(3)
            })
            .collect();
        BoundaryField::new(dim, l, c).unwrap()
    }

    #[test]
    fn flat_sphere_multiplies_by_degree() {
        for dim in [Dim::Two, Dim::Three] {
            let space = BallSpace::with_default_radial(dim, 8).unwrap();
            let psi = field(dim, 8, 3, 1.0);
            let h = BoundaryField::zeros(dim, 8);
            let g = dn_apply(&space, &h, &psi, SeriesOptions::default()).unwrap().g;
            let expect = psi.map_degrees(|l| l as f64);
            assert!(g.sub(&expect).unwrap().l2_norm() < 1e-11);
        }
    }

    #[test]
    fn series_and_fixed_point_agree() {
        for dim in [Dim::Two, Dim::Three] {
            let space = BallSpace::with_default_radial(dim, 6).unwrap();
            let h = field(dim, 6, 1, 0.1);
            let psi = field(dim, 6, 2, 1.0);
            let shape = ShapeState::new(&space, &h).unwrap();
            let s = series_solve(&shape, &psi, SeriesOptions { m_cap: 40, tol: 1e-14 }).unwrap();
            assert!(s.converged);
            let f = fixed_point_solve(&shape, &psi, FixedPointOptions::default()).unwrap();
            let d = space.h1_norm(&s.u.sub(&f.u).unwrap()).unwrap();
            assert!(d < 1e-11 * space.h1_norm(&f.u).unwrap(), "{dim:?}: {d}");
            assert!(coefficient_residual(&shape, &f.u).unwrap() < 1e-11);
        }
    }

    #[test]
    fn first_derivative_matches_central_difference() {
        let dim = Dim::Two;
        let space = BallSpace::with_default_radial(dim, 8).unwrap();
        let h = field(dim, 8, 5, 0.1);
        let eta = field(dim, 8, 6, 1.0);
        let psi = field(dim, 8, 7, 1.0);
        let d = dn_derivative(&space, &h, &eta, &psi).unwrap();
        let t = 1e-4;
        let gp = dn_apply_converged(&space, &h.lincomb(1.0, &eta, t).unwrap(), &psi).unwrap();
        let gm = dn_apply_converged(&space, &h.lincomb(1.0, &eta, -t).unwrap(), &psi).unwrap();
        let fd = gp.sub(&gm).unwrap().scale(0.5 / t);
        assert!(fd.sub(&d).unwrap().l2_norm() < 1e-6 * d.l2_norm(), "{}", fd.sub(&d).unwrap().l2_norm());
    }

    #[test]
    fn weighted_pairing_matches_green_identity() {
        // ∫_{∂Ω} Φ₁ ∂_ν Φ₂ dS = ∫_Ω ∇Φ₁·∇Φ₂ dx, pulled back to the ball.
        for dim in [Dim::Two, Dim::Three] {
            let l = if dim == Dim::Two { 32 } else { 16 };
            let space = BallSpace::with_default_radial(dim, l).unwrap();
            for amp in [0.0, 0.08] {
                let h = field(dim, 4, 11, amp).resized(l);
                let (p1, p2) = (field(dim, 4, 12, 1.0).resized(l), field(dim, 4, 13, 1.0).resized(l));
                let shape = ShapeState::new(&space, &h).unwrap();
                let u1 = fixed_point_solve(&shape, &p1, derivative_options()).unwrap().u;
                let u2 = fixed_point_solve(&shape, &p2, derivative_options()).unwrap().u;
                let g2 = assemble_g(&shape, &u2, &p2).unwrap();
                let lhs = weighted_pairing(&space, &h, &g2, &p1).unwrap();
                let rhs = coefficient_form(
                    &shape,
                    &space.sample_gradient(&u1).unwrap(),
                    &space.sample_gradient(&u2).unwrap(),
                );
                assert!((lhs - rhs).abs() < 1e-10 * rhs.abs().max(1.0), "{dim:?} {amp}: {lhs} vs {rhs}");
            }
        }
    }
}
