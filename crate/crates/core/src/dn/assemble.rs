//! Boundary assembly of `G(h)ψ` from the interior solution.

use super::series::{series_solve, SeriesOptions, SeriesSolution};
use super::shape::{BoundaryGeometry, ShapeState};
use crate::ball::{BallField, BallSpace};
use crate::dual::Scalar;
use crate::error::{Error, Result};
use crate::spectral::BoundaryField;

/// Pointwise boundary formula
///
/// `G = J ⟨∇u, x⟩ / ((1+h)(1+h+⟨x,∇h̃⟩)) - ⟨∇_S ψ, ∇_S h⟩ / (J (1+h))`
///
/// with `J = ((1+h)² + |∇_S h|²)^{1/2}`. Arguments are the local values of
/// `h`, the frame components of `∇_S h`, `⟨x,∇h̃⟩`, `∂_r u` and the frame
/// components of `∇_S ψ`.
#[allow(clippy::too_many_arguments)]
pub fn g_formula<T: Scalar>(h: T, ht: T, hp: T, xg: T, dr: T, pt: f64, pp: f64) -> T {
    let a1 = T::cst(1.0) + h;
    let jac = (a1 * a1 + ht * ht + hp * hp).sqrt();
    let cross = ht * T::cst(pt) + hp * T::cst(pp);
    jac * dr / (a1 * (a1 + xg)) - cross / (jac * a1)
}

/// Frame components of `∇_S ψ` on the angular grid of `space`.
pub(crate) fn psi_tangent(space: &BallSpace, psi: &BoundaryField) -> (Vec<f64>, Vec<f64>) {
    let l = space.degree();
    let p = psi.resized(l);
    let (a, b) = space.grid().synth_tangent(p.coeffs(), l);
    let b = if b.is_empty() { vec![0.0; a.len()] } else { b };
    (a, b)
}

/// `G(h)ψ` from the interior solution `u` (boundary values `ψ`), projected on
/// modes of degree `≤ L`.
pub fn assemble_g(shape: &ShapeState, u: &BallField, psi: &BoundaryField) -> Result<BoundaryField> {
    let space = shape.space();
    let l = space.degree();
    let dr = space.grid().synth(space.radial_trace(u)?.coeffs(), l);
    let (pt, pp) = psi_tangent(space, psi);
    let geo: &BoundaryGeometry = shape.boundary();
    let vals: Vec<f64> = (0..dr.len())
        .map(|j| g_formula(geo.h[j], geo.h_theta[j], geo.h_phi[j], geo.x_grad[j], dr[j], pt[j], pp[j]))
        .collect();
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::GeometryDegenerate("non-finite boundary assembly".into()));
    }
    BoundaryField::analyze(space.grid(), &vals, l)
}

/// Part of `G` that is linear in the interior field: `J ∂_r u / ((1+h)(1+h+⟨x,∇h̃⟩))`.
pub fn assemble_g_linear(shape: &ShapeState, u: &BallField) -> Result<BoundaryField> {
    let space = shape.space();
    let l = space.degree();
    let dr = space.grid().synth(space.radial_trace(u)?.coeffs(), l);
    let geo = shape.boundary();
    let vals: Vec<f64> = (0..dr.len())
        .map(|j| g_formula(geo.h[j], geo.h_theta[j], geo.h_phi[j], geo.x_grad[j], dr[j], 0.0, 0.0))
        .collect();
    BoundaryField::analyze(space.grid(), &vals, l)
}

/// Result of [`dn_apply`].
#[derive(Debug, Clone)]
pub struct DnResult {
    pub g: BoundaryField,
    pub series: SeriesSolution,
    pub wellposed_margin: f64,
}

/// `G(h)ψ` by the homogeneous expansion followed by boundary assembly.
pub fn dn_apply(space: &BallSpace, h: &BoundaryField, psi: &BoundaryField, opts: SeriesOptions) -> Result<DnResult> {
    let shape = ShapeState::new(space, h)?;
    let series = series_solve(&shape, psi, opts)?;
    if series.stalled {
        return Err(Error::NonConvergence(format!(
            "series terms stopped decreasing after {} terms",
            series.m_used
        )));
    }
    let g = assemble_g(&shape, &series.u, psi)?;
    Ok(DnResult {
        g,
        wellposed_margin: shape.wellposed_margin(),
        series,
    })
}

/// Pairing `∫_{S^{n-1}} (G ψ) φ w dσ` with the surface weight
/// `w = (1+h)^{n-2} J`, under which `G(h)` is symmetric and non-negative.
pub fn weighted_pairing(space: &BallSpace, h: &BoundaryField, g_psi: &BoundaryField, phi: &BoundaryField) -> Result<f64> {
    let grid = space.grid();
    let l = space.degree();
    let geo = BoundaryGeometry::new(space, h);
    let gv = grid.synth(g_psi.resized(l).coeffs(), l);
    let pv = grid.synth(phi.resized(l).coeffs(), l);
    let n = space.dim().n() as i32;
    let mut s = 0.0;
    for j in 0..grid.len() {
        let a1 = 1.0 + geo.h[j];
        let jac = (a1 * a1 + geo.h_theta[j].powi(2) + geo.h_phi[j].powi(2)).sqrt();
        s += grid.weights()[j] * gv[j] * pv[j] * a1.powi(n - 2) * jac;
    }
    Ok(s)
}
