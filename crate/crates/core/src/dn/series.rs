//! Solvers for `div(P(h) ∇u) = 0` in the ball with `u = ψ` on the sphere.

use rayon::prelude::*;

use super::shape::{apply_term, mat_vec, Mat3, ShapeState};
use crate::ball::{BallField, VectorSamples};
use crate::error::{Error, Result};
use crate::spectral::BoundaryField;

/// Truncation and stopping rule of the homogeneous expansion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesOptions {
    /// Largest order `M` of the expansion.
    pub m_cap: usize,
    /// Stop once `‖u_m‖_{H¹} ≤ tol ‖u_0‖_{H¹}`.
    pub tol: f64,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        Self {
            m_cap: 16,
            tol: 1e-12,
        }
    }
}

/// Output of the homogeneous expansion `u = Σ u_m`.
#[derive(Debug, Clone)]
pub struct SeriesSolution {
    /// Partial sum `Σ_{m ≤ M_used} u_m`.
    pub u: BallField,
    /// Individual terms `u_0 .. u_{M_used}`.
    pub terms: Vec<BallField>,
    /// `‖u_m‖_{H¹}` for every computed term.
    pub terms_h1: Vec<f64>,
    pub m_used: usize,
    /// True when the stopping rule was met within `m_cap`.
    pub converged: bool,
    /// Set when the last three term norms failed to decrease.
    pub stalled: bool,
    /// Least-squares geometric ratio of the term norms.
    pub fitted_ratio: f64,
}

/// Homogeneous expansion: `u_0 = PI ψ` and `u_m = S(-Σ_{k<m} P_{m-k} ∇u_k)`.
pub fn series_solve(shape: &ShapeState, psi: &BoundaryField, opts: SeriesOptions) -> Result<SeriesSolution> {
    let space = shape.space();
    let n = space.dim().n();
    let u0 = space.harmonic_extension(psi)?;
    let (v0, g0) = space.sample_with_gradient(&u0)?;
    let norm0 = space.h1_norm_samples(&v0, &g0);
    let mut terms = vec![u0.clone()];
    let mut grads = vec![g0];
    let mut norms = vec![norm0];
    let mut total = u0;
    let mut converged = norm0 == 0.0;
    let npts = space.n_points();
    let mut m = 1;
    while !converged && m <= opts.m_cap {
        let rows: Vec<[f64; 3]> = (0..npts)
            .into_par_iter()
            .map(|p| {
                let coeffs = shape.terms_at(p, m);
                let x = space.point(p);
                let v = shape.v(p);
                let mut acc = [0.0; 3];
                for (k, gk) in grads.iter().enumerate() {
                    let z = apply_term(coeffs[m - k], x, v, gk.at(p));
                    for d in 0..3 {
                        acc[d] -= z[d];
                    }
                }
                acc
            })
            .collect();
        let mut load = VectorSamples::zeros(n, npts);
        for (p, r) in rows.into_iter().enumerate() {
            load.set(p, r);
        }
        let um = space.poisson_div_solve(&load)?;
        let (vm, gm) = space.sample_with_gradient(&um)?;
        let nm = space.h1_norm_samples(&vm, &gm);
        total.add_assign(&um)?;
        terms.push(um);
        grads.push(gm);
        norms.push(nm);
        if nm <= opts.tol * norm0 {
            converged = true;
        }
        m += 1;
    }
    let k = norms.len();
    let stalled = !converged && k >= 4 && norms[k - 1] >= norms[k - 2] && norms[k - 2] >= norms[k - 3];
    let fitted_ratio = fit_ratio(&norms, norm0);
    Ok(SeriesSolution {
        u: total,
        terms,
        m_used: k - 1,
        terms_h1: norms,
        converged,
        stalled,
        fitted_ratio,
    })
}

/// Least-squares slope of `ln ‖u_m‖` against `m` over the terms `m ≥ 1` that
/// stand above the roundoff floor, returned as a ratio.
pub fn fit_ratio(norms: &[f64], norm0: f64) -> f64 {
    let floor = 1e-14 * norm0;
    let pts: Vec<(f64, f64)> = norms
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, &v)| v > floor)
        .map(|(m, &v)| (m as f64, v.ln()))
        .collect();
    match pts.len() {
        0 => 0.0,
        1 => {
            if norm0 > 0.0 {
                pts[0].1.exp() / norm0
            } else {
                0.0
            }
        }
        k => {
            let kf = k as f64;
            let mx = pts.iter().map(|p| p.0).sum::<f64>() / kf;
            let my = pts.iter().map(|p| p.1).sum::<f64>() / kf;
            let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
            (sxy / sxx).exp()
        }
    }
}

/// Stopping rule of the fixed-point iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        Self {
            tol: 1e-13,
            max_iter: 200,
        }
    }
}

/// Output of the fixed-point iteration.
#[derive(Debug, Clone)]
pub struct FixedPointSolution {
    pub u: BallField,
    pub iterations: usize,
    /// Relative `H¹` size of the last increment.
    pub last_increment: f64,
}

/// Solves `∫ P ∇w · ∇v = ∫ f · ∇v` for `w` vanishing on the sphere by the
/// iteration `w ← S(f + (I - P) ∇w)`.
pub fn solve_coefficient_problem(
    shape: &ShapeState,
    f: &VectorSamples,
    opts: FixedPointOptions,
) -> Result<FixedPointSolution> {
    iterate(shape, None, f, opts)
}

/// Fixed point `u ← PI ψ + S((I - P) ∇u)` for the full coefficient matrix.
pub fn fixed_point_solve(shape: &ShapeState, psi: &BoundaryField, opts: FixedPointOptions) -> Result<FixedPointSolution> {
    let space = shape.space();
    let zero = VectorSamples::zeros(space.dim().n(), space.n_points());
    iterate(shape, Some(psi), &zero, opts)
}

fn iterate(
    shape: &ShapeState,
    psi: Option<&BoundaryField>,
    f: &VectorSamples,
    opts: FixedPointOptions,
) -> Result<FixedPointSolution> {
    let space = shape.space();
    let n = space.dim().n();
    let npts = space.n_points();
    let lift = match psi {
        Some(p) => space.harmonic_extension(p)?,
        None => space.zeros(),
    };
    let mut u = lift.clone();
    let mut prev_inc = f64::INFINITY;
    let mut growth = 0;
    for it in 1..=opts.max_iter {
        let grad = space.sample_gradient(&u)?;
        let rows: Vec<[f64; 3]> = (0..npts)
            .into_par_iter()
            .map(|p| {
                let z = grad.at(p);
                let pz = mat_vec(shape.p_full(p), z);
                let fp = f.at(p);
                [fp[0] + z[0] - pz[0], fp[1] + z[1] - pz[1], fp[2] + z[2] - pz[2]]
            })
            .collect();
        let mut load = VectorSamples::zeros(n, npts);
        for (p, r) in rows.into_iter().enumerate() {
            load.set(p, r);
        }
        let w = space.poisson_div_solve(&load)?;
        let next = lift.add(&w)?;
        let diff = next.sub(&u)?;
        let inc = space.h1_norm(&diff)?;
        let size = space.h1_norm(&next)?;
        u = next;
        let rel = if size > 0.0 { inc / size } else { inc };
        if rel <= opts.tol || inc == 0.0 {
            return Ok(FixedPointSolution {
                u,
                iterations: it,
                last_increment: rel,
            });
        }
        if inc >= prev_inc {
            growth += 1;
            // Roundoff stagnation near the target is accepted.
            if rel < 1e3 * opts.tol && growth >= 2 {
                return Ok(FixedPointSolution {
                    u,
                    iterations: it,
                    last_increment: rel,
                });
            }
            if growth >= 3 {
                return Err(Error::NonConvergence(format!(
                    "fixed-point increments grew three times (last relative increment {rel:.3e})"
                )));
            }
        } else {
            growth = 0;
        }
        prev_inc = inc;
    }
    Err(Error::NonConvergence(format!(
        "fixed point did not reach {:.1e} in {} iterations",
        opts.tol, opts.max_iter
    )))
}

/// Riesz norm of the weak residual `v ↦ ∫ P ∇u · ∇v` over the test space,
/// relative to `‖∇u‖_{L²}`.
pub fn coefficient_residual(shape: &ShapeState, u: &BallField) -> Result<f64> {
    let space = shape.space();
    let grad = space.sample_gradient(u)?;
    let pg = shape.apply_p(&grad);
    let z = space.poisson_div_solve(&pg)?;
    let rz = space.l2_norm_vector(&space.sample_gradient(&z)?);
    let scale = space.l2_norm_vector(&grad);
    Ok(if scale > 0.0 { rz / scale } else { rz })
}

/// `∫ P ∇a · ∇b` with sampled gradients.
pub fn coefficient_form(shape: &ShapeState, ga: &VectorSamples, gb: &VectorSamples) -> f64 {
    let space = shape.space();
    let mut s = 0.0;
    for p in 0..space.n_points() {
        let m: &Mat3 = shape.p_full(p);
        let pa = mat_vec(m, ga.at(p));
        let b = gb.at(p);
        s += space.weight(p) * (pa[0] * b[0] + pa[1] * b[1] + pa[2] * b[2]);
    }
    s
}
