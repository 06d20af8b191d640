//! Exact first and second shape derivatives of the discrete operator.
//!
//! The interior solution satisfies `∫ P(h) ∇u · ∇v = 0`. Differentiating in
//! the direction `η` gives `∫ P ∇u' · ∇v = -∫ P'[η] ∇u · ∇v`, and a second
//! differentiation gives
//! `∫ P ∇u'' · ∇v = -∫ (P'[η₁] ∇u'₂ + P'[η₂] ∇u'₁ + P''[η₁,η₂] ∇u) · ∇v`.
//! The pointwise derivatives of `P` and of the boundary formula are taken
//! with hyper-dual numbers, which differentiate the rational expressions
//! exactly.

use rayon::prelude::*;

use super::assemble::{g_formula, psi_tangent};
use super::series::{solve_coefficient_problem, FixedPointOptions};
use super::shape::{p_matrix, ShapeState};
use crate::ball::{BallField, VectorSamples};
use crate::dual::HyperDual;
use crate::error::{Error, Result};
use crate::spectral::BoundaryField;

/// A shape direction sampled on the quadrature grid and on the boundary.
#[derive(Debug, Clone)]
struct Direction {
    /// `η̃` and `∇η̃` at the physical quadrature nodes.
    a: Vec<f64>,
    v: VectorSamples,
    /// Boundary data: `η`, frame components of `∇_S η`, `⟨x, ∇η̃⟩`.
    h: Vec<f64>,
    ht: Vec<f64>,
    hp: Vec<f64>,
    xg: Vec<f64>,
}

impl Direction {
    fn new(shape: &ShapeState, eta: &BoundaryField) -> Result<Self> {
        let space = shape.space();
        if eta.dim() != space.dim() {
            return Err(Error::Mismatch("direction of a different dimension".into()));
        }
        let eta = eta.resized(space.degree());
        let ext = space.harmonic_extension(&eta)?;
        let (vals, v) = space.sample_with_gradient(&ext)?;
        let geo = super::shape::BoundaryGeometry::new(space, &eta);
        Ok(Self {
            a: vals.values,
            v,
            h: geo.h,
            ht: geo.h_theta,
            hp: geo.h_phi,
            xg: geo.x_grad,
        })
    }

    fn zero(shape: &ShapeState) -> Self {
        let space = shape.space();
        let npts = space.n_points();
        let nb = space.grid().len();
        Self {
            a: vec![0.0; npts],
            v: VectorSamples::zeros(space.dim().n(), npts),
            h: vec![0.0; nb],
            ht: vec![0.0; nb],
            hp: vec![0.0; nb],
            xg: vec![0.0; nb],
        }
    }
}

/// Derivative tables of `P` at each node: `(P'[η₁], P'[η₂], P''[η₁,η₂])`.
fn p_derivatives(shape: &ShapeState, d1: &Direction, d2: &Direction) -> Vec<[[[f64; 3]; 3]; 3]> {
    let space = shape.space();
    let n = space.dim().n();
    (0..space.n_points())
        .into_par_iter()
        .map(|p| {
            let v0 = shape.v(p);
            let (v1, v2) = (d1.v.at(p), d2.v.at(p));
            let a = HyperDual::new(shape.a(p), d1.a[p], d2.a[p], 0.0);
            let v = [
                HyperDual::new(v0[0], v1[0], v2[0], 0.0),
                HyperDual::new(v0[1], v1[1], v2[1], 0.0),
                HyperDual::new(v0[2], v1[2], v2[2], 0.0),
            ];
            let m = p_matrix(n, space.point(p), a, v);
            let mut out = [[[0.0; 3]; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    out[0][i][j] = m[i][j].e1;
                    out[1][i][j] = m[i][j].e2;
                    out[2][i][j] = m[i][j].e12;
                }
            }
            out
        })
        .collect()
}

fn mat_apply(m: &[[f64; 3]; 3], z: [f64; 3]) -> [f64; 3] {
    let mut o = [0.0; 3];
    for i in 0..3 {
        o[i] = m[i][0] * z[0] + m[i][1] * z[1] + m[i][2] * z[2];
    }
    o
}

/// Linearization of `h ↦ G(h)ψ` around a solved state.
#[derive(Debug, Clone)]
pub struct Linearization<'s, 'a> {
    shape: &'s ShapeState<'a>,
    psi: BoundaryField,
    u: BallField,
    grad_u: VectorSamples,
    /// `∂_r u` on the boundary grid.
    dr: Vec<f64>,
    opts: FixedPointOptions,
}

impl<'s, 'a> Linearization<'s, 'a> {
    /// Linearization at `h` for boundary data `ψ`; `u` must solve the
    /// interior problem to the accuracy wanted for the derivatives.
    pub fn new(shape: &'s ShapeState<'a>, psi: &BoundaryField, u: BallField, opts: FixedPointOptions) -> Result<Self> {
        let space = shape.space();
        let grad_u = space.sample_gradient(&u)?;
        let dr = space.grid().synth(space.radial_trace(&u)?.coeffs(), space.degree());
        Ok(Self {
            shape,
            psi: psi.resized(space.degree()),
            u,
            grad_u,
            dr,
            opts,
        })
    }

    fn solve(&self, load: Vec<[f64; 3]>) -> Result<BallField> {
        let space = self.shape.space();
        let mut f = VectorSamples::zeros(space.dim().n(), space.n_points());
        for (p, r) in load.into_iter().enumerate() {
            f.set(p, r);
        }
        Ok(solve_coefficient_problem(self.shape, &f, self.opts)?.u)
    }

    fn boundary(
        &self,
        d1: &Direction,
        d2: &Direction,
        dr1: &[f64],
        dr2: &[f64],
        dr12: &[f64],
        pick: impl Fn(HyperDual) -> f64,
    ) -> Result<BoundaryField> {
        let space = self.shape.space();
        let geo = self.shape.boundary();
        let (pt, pp) = psi_tangent(space, &self.psi);
        let vals: Vec<f64> = (0..geo.h.len())
            .map(|j| {
                let hd = |x: f64, a: f64, b: f64| HyperDual::new(x, a, b, 0.0);
                let g = g_formula(
                    hd(geo.h[j], d1.h[j], d2.h[j]),
                    hd(geo.h_theta[j], d1.ht[j], d2.ht[j]),
                    hd(geo.h_phi[j], d1.hp[j], d2.hp[j]),
                    hd(geo.x_grad[j], d1.xg[j], d2.xg[j]),
                    HyperDual::new(self.dr[j], dr1[j], dr2[j], dr12[j]),
                    pt[j],
                    pp[j],
                );
                pick(g)
            })
            .collect();
        BoundaryField::analyze(space.grid(), &vals, space.degree())
    }

    fn first_interior(&self, d: &Direction) -> Result<BallField> {
        let zero = Direction::zero(self.shape);
        let pd = p_derivatives(self.shape, d, &zero);
        let load = pd
            .iter()
            .enumerate()
            .map(|(p, t)| {
                let z = mat_apply(&t[0], self.grad_u.at(p));
                [-z[0], -z[1], -z[2]]
            })
            .collect();
        self.solve(load)
    }

    fn radial_on_grid(&self, w: &BallField) -> Result<Vec<f64>> {
        let space = self.shape.space();
        Ok(space.grid().synth(space.radial_trace(w)?.coeffs(), space.degree()))
    }

    /// `G'(h)[η]ψ`.
    pub fn first(&self, eta: &BoundaryField) -> Result<BoundaryField> {
        let d = Direction::new(self.shape, eta)?;
        let u1 = self.first_interior(&d)?;
        let dr1 = self.radial_on_grid(&u1)?;
        let zero = Direction::zero(self.shape);
        let nb = dr1.len();
        self.boundary(&d, &zero, &dr1, &vec![0.0; nb], &vec![0.0; nb], |g| g.e1)
    }

    /// `G''(h)[η₁, η₂]ψ`.
    pub fn second(&self, eta1: &BoundaryField, eta2: &BoundaryField) -> Result<BoundaryField> {
        let d1 = Direction::new(self.shape, eta1)?;
        let d2 = Direction::new(self.shape, eta2)?;
        let u1 = self.first_interior(&d1)?;
        let u2 = self.first_interior(&d2)?;
        let space = self.shape.space();
        let g1 = space.sample_gradient(&u1)?;
        let g2 = space.sample_gradient(&u2)?;
        let pd = p_derivatives(self.shape, &d1, &d2);
        let load = pd
            .iter()
            .enumerate()
            .map(|(p, t)| {
                let a = mat_apply(&t[0], g2.at(p));
                let b = mat_apply(&t[1], g1.at(p));
                let c = mat_apply(&t[2], self.grad_u.at(p));
                [-(a[0] + b[0] + c[0]), -(a[1] + b[1] + c[1]), -(a[2] + b[2] + c[2])]
            })
            .collect();
        let u12 = self.solve(load)?;
        let dr1 = self.radial_on_grid(&u1)?;
        let dr2 = self.radial_on_grid(&u2)?;
        let dr12 = self.radial_on_grid(&u12)?;
        self.boundary(&d1, &d2, &dr1, &dr2, &dr12, |g| g.e12)
    }

    pub fn solution(&self) -> &BallField {
        &self.u
    }
}
