//! Independent ground truth for the Dirichlet-to-Neumann operator.
//!
//! * [`scaled_sphere_oracle`]: the ball of radius `1 + a`, where `G` is the
//!   per-mode multiplier `deg / (1 + a)`.
//! * [`translated_ball_oracle`]: the unit ball centered at `ε e₁`, solved by a
//!   harmonic expansion in coordinates centered at `ε e₁`.
//! * [`direct_galerkin_oracle`]: one dense Galerkin solve of
//!   `div(P ∇u) = 0`, sharing only `P` and the quadrature with the solvers of
//!   [`crate::dn`].

use nalgebra::{Cholesky, DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::ball::{BallField, BallSpace};
use crate::dn::{assemble_g, ShapeState};
use crate::error::{Error, Result};
use crate::spectral::{AngularGrid, BoundaryField};

/// `G(a)ψ` on the sphere of radius `1 + a`.
pub fn scaled_sphere_oracle(a: f64, psi: &BoundaryField) -> Result<BoundaryField> {
    if !(a > -1.0) || !a.is_finite() {
        return Err(Error::Parameter(format!("scaled sphere needs a > -1, got {a}")));
    }
    Ok(psi.map_degrees(|l| l as f64 / (1.0 + a)))
}

/// Exact elevation of the unit sphere centered at `c`: the distance from the
/// origin to that sphere along the unit direction `x`, minus one.
pub fn translated_elevation(c: [f64; 3], x: [f64; 3]) -> f64 {
    let xc = x[0] * c[0] + x[1] * c[1] + x[2] * c[2];
    let cc = c[0] * c[0] + c[1] * c[1] + c[2] * c[2];
    xc + (1.0 - cc + xc * xc).sqrt() - 1.0
}

/// Output of [`translated_ball_oracle`].
#[derive(Debug, Clone, Serialize)]
pub struct TranslatedBall {
    /// Elevation projected on modes of degree `≤ L`.
    pub h: BoundaryField,
    /// `G(h)ψ` projected on modes of degree `≤ L`.
    pub g: BoundaryField,
    /// Relative sup error of the centered expansion of the boundary data on an
    /// independent check grid.
    pub expansion_residual: f64,
    /// Largest `| |x(1+h(x)) - c| - 1 |` over the output grid.
    pub boundary_defect: f64,
    /// Degree of the centered expansion.
    pub resolution: usize,
}

/// Dirichlet-to-Neumann data of the unit ball centered at `ε e₁`, for
/// boundary values `ψ` given as a function of the direction `x`.
///
/// The harmonic function is `Φ(c + ρω) = Σ d_k ρ^{deg k} Y_k(ω)`, where the
/// `d_k` expand `ω ↦ ψ((c+ω)/|c+ω|)` to degree `resolution`. The outward
/// normal at `c + ω` is `ω`, so `G(h)ψ(x) = Σ deg_k d_k Y_k(ω(x))`.
pub fn translated_ball_oracle(
    eps: f64,
    psi: &BoundaryField,
    degree: usize,
    resolution: usize,
) -> Result<TranslatedBall> {
    if !(eps.abs() < 0.5) {
        return Err(Error::Parameter(format!("translated ball needs |ε| < 1/2, got {eps}")));
    }
    let dim = psi.dim();
    let c = [eps, 0.0, 0.0];
    let fine = AngularGrid::new(dim, resolution, 2 * resolution + 1);
    let data: Vec<f64> = fine
        .points()
        .par_iter()
        .map(|w| psi.eval_at(direction_of(c, *w)))
        .collect();
    let d = BoundaryField::analyze(&fine, &data, resolution)?;

    let check = AngularGrid::new(dim, resolution + 3, 2 * resolution + 7);
    let (mut err, mut size) = (0.0f64, 0.0f64);
    for w in check.points() {
        let exact = psi.eval_at(direction_of(c, *w));
        err = err.max((d.eval_at(*w) - exact).abs());
        size = size.max(exact.abs());
    }
    let expansion_residual = if size > 0.0 { err / size } else { err };
    if expansion_residual > 1e-10 {
        return Err(Error::Refinement(format!(
            "centered expansion of degree {resolution} has relative residual {expansion_residual:.3e}"
        )));
    }
    let dn = d.map_degrees(|l| l as f64);

    let out = AngularGrid::new(dim, degree, 3 * degree + 8);
    let rows: Vec<(f64, f64, f64)> = out
        .points()
        .par_iter()
        .map(|x| {
            let h = translated_elevation(c, *x);
            let p = [x[0] * (1.0 + h), x[1] * (1.0 + h), x[2] * (1.0 + h)];
            let w = [p[0] - c[0], p[1] - c[1], p[2] - c[2]];
            let defect = ((w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt() - 1.0).abs();
            (h, dn.eval_at(w), defect)
        })
        .collect();
    let hv: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let gv: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let boundary_defect = rows.iter().map(|r| r.2).fold(0.0, f64::max);
    Ok(TranslatedBall {
        h: BoundaryField::analyze(&out, &hv, degree)?,
        g: BoundaryField::analyze(&out, &gv, degree)?,
        expansion_residual,
        boundary_defect,
        resolution,
    })
}

/// Direction from the origin of the boundary point `c + ω`.
fn direction_of(c: [f64; 3], w: [f64; 3]) -> [f64; 3] {
    let p = [c[0] + w[0], c[1] + w[1], c[2] + w[2]];
    let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
    [p[0] / r, p[1] / r, p[2] / r]
}

/// Output of [`direct_galerkin_oracle`].
#[derive(Debug, Clone)]
pub struct DirectGalerkin {
    pub u: BallField,
    pub g: BoundaryField,
    /// Number of Galerkin unknowns.
    pub n_dof: usize,
}

/// Solves `∫ P ∇(PI ψ + w) · ∇v = 0` for `w` in the full Galerkin space of
/// `space` by one dense Cholesky factorization, then assembles `G`.
pub fn direct_galerkin_oracle(space: &BallSpace, h: &BoundaryField, psi: &BoundaryField) -> Result<DirectGalerkin> {
    let shape = ShapeState::new(space, h)?;
    let dim = space.dim();
    let n = dim.n();
    let l = space.degree();
    let m = space.n_modes();
    let grid = space.grid();
    let na = grid.len();
    let nq = space.n_quad();
    let npts = space.n_points();
    let pts = grid.points();
    let et = grid.e_theta();
    let ep = grid.e_phi();

    // Angular tables: Y_k and its frame derivatives at the grid nodes.
    let mut ang = Vec::with_capacity(m);
    for k in 0..m {
        let mut e = vec![0.0; m];
        e[k] = 1.0;
        let y = grid.synth(&e, l);
        let (a, b) = grid.synth_tangent(&e, l);
        let b = if b.is_empty() { vec![0.0; na] } else { b };
        ang.push((y, a, b));
    }
    let mut offsets = Vec::with_capacity(m + 1);
    offsets.push(0);
    for k in 0..m {
        let (nb, ..) = space.radial_basis(dim.degree_of(k));
        offsets.push(offsets[k] + nb);
    }
    let n_dof = offsets[m];

    // Gradients of every basis function at every quadrature node.
    let mut grad = DMatrix::<f64>::zeros(n * npts, n_dof);
    let radii = space.quad_radii();
    for k in 0..m {
        let (nb, phi, dphi, _) = space.radial_basis(dim.degree_of(k));
        let (y, a, b) = &ang[k];
        for q in 0..nq {
            let r = radii[q];
            for j in 0..na {
                let p = q * na + j;
                for i in 0..nb {
                    let (f, df) = (phi[q * nb + i], dphi[q * nb + i]);
                    for d in 0..n {
                        let mut g = df * y[j] * pts[j][d] + f / r * a[j] * et[j][d];
                        if !ep.is_empty() {
                            g += f / r * b[j] * ep[j][d];
                        }
                        grad[(n * p + d, offsets[k] + i)] = g;
                    }
                }
            }
        }
    }
    let mut pgrad = DMatrix::<f64>::zeros(n * npts, n_dof);
    let lift = space.harmonic_extension(psi)?;
    let lift_grad = space.sample_gradient(&lift)?;
    let mut load = DVector::<f64>::zeros(n * npts);
    for p in 0..npts {
        let pm = shape.p_full(p);
        let w = space.weight(p);
        for col in 0..n_dof {
            for d in 0..n {
                let mut s = 0.0;
                for e in 0..n {
                    s += pm[d][e] * grad[(n * p + e, col)];
                }
                pgrad[(n * p + d, col)] = w * s;
            }
        }
        let z = lift_grad.at(p);
        for d in 0..n {
            let mut s = 0.0;
            for e in 0..n {
                s += pm[d][e] * z[e];
            }
            load[n * p + d] = -w * s;
        }
    }
    let stiffness = grad.transpose() * &pgrad;
    let rhs = grad.transpose() * &load;
    let sol = Cholesky::new(stiffness)
        .ok_or_else(|| Error::Singular("direct Galerkin stiffness".into()))?
        .solve(&rhs);

    let nr = space.n_r();
    let mut coeffs = lift.coeffs().to_vec();
    for k in 0..m {
        let (nb, _, _, phi_nodes) = space.radial_basis(dim.degree_of(k));
        for i in 0..nr {
            let v: f64 = (0..nb).map(|p| phi_nodes[i * nb + p] * sol[offsets[k] + p]).sum();
            coeffs[i * m + k] += v;
        }
    }
    let u = BallField::new(dim, l, space.radial_nodes().to_vec(), coeffs)?;
    let g = assemble_g(&shape, &u, psi)?;
    Ok(DirectGalerkin { u, g, n_dof })
}

/// Named oracle cases addressable from the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleName {
    ScaledSphere,
    TranslatedBall,
    DirectGalerkin,
}

impl std::str::FromStr for OracleName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "scaled_sphere" => Ok(Self::ScaledSphere),
            "translated_ball" => Ok(Self::TranslatedBall),
            "direct_galerkin" => Ok(Self::DirectGalerkin),
            other => Err(Error::Parameter(format!("unknown oracle `{other}`"))),
        }
    }
}

/// Dimension-generic helper: the elevation field of the translated ball on
/// the boundary grid of `space`, projected on degrees `≤ L`.
pub fn translated_elevation_field(space: &BallSpace, eps: f64) -> Result<BoundaryField> {
    let c = [eps, 0.0, 0.0];
    let vals: Vec<f64> = space.grid().points().iter().map(|x| translated_elevation(c, *x)).collect();
    BoundaryField::analyze(space.grid(), &vals, space.degree())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dn::{dn_apply, SeriesOptions};
    use crate::spectral::Dim;

    #[test]
    fn elevation_lies_on_translated_sphere() {
        let c = [0.05, 0.0, 0.0];
        let grid = AngularGrid::for_degree(Dim::Three, 8);
        for x in grid.points() {
            let h = translated_elevation(c, *x);
            let p = [x[0] * (1.0 + h) - c[0], x[1] * (1.0 + h), x[2] * (1.0 + h)];
            let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
            assert!((r - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn translated_ball_at_zero_is_degree_multiplier() {
        let psi = BoundaryField::mode(Dim::Two, 4, 3, 3, 1.0);
        let t = translated_ball_oracle(0.0, &psi, 6, 12).unwrap();
        let expect = psi.resized(6).map_degrees(|l| l as f64);
        assert!(t.g.sub(&expect).unwrap().l2_norm() < 1e-12);
        assert!(t.h.l2_norm() < 1e-15);
    }

    #[test]
    fn direct_galerkin_matches_flat_multiplier_and_series() {
        for dim in [Dim::Two, Dim::Three] {
            let l = 4;
            let space = BallSpace::with_default_radial(dim, l).unwrap();
            let psi = BoundaryField::mode(dim, l, 2, 2, 1.0);
            let zero = BoundaryField::zeros(dim, l);
            let d = direct_galerkin_oracle(&space, &zero, &psi).unwrap();
            assert!(d.g.sub(&psi.scale(2.0)).unwrap().l2_norm() < 1e-11);

            let h = BoundaryField::mode(dim, l, 1, 1, 0.03).add(&BoundaryField::mode(dim, l, 3, -3, 0.01)).unwrap();
            let d = direct_galerkin_oracle(&space, &h, &psi).unwrap();
            let s = dn_apply(&space, &h, &psi, SeriesOptions { m_cap: 40, tol: 1e-15 }).unwrap();
            let diff = space.h1_norm(&d.u.sub(&s.series.u).unwrap()).unwrap();
            assert!(diff < 1e-11, "{dim:?}: {diff}");
        }
    }
}
