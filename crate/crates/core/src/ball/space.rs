//! Discretization of the unit ball: radial collocation, physical quadrature
//! and the divergence-form Poisson solver.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rayon::prelude::*;

use super::field::{BallField, BallSamples, VectorBallField, VectorSamples};
use crate::error::{Error, Result};
use crate::quadrature::{chebyshev_radau_unit, gauss_legendre_unit, jacobi_with_derivative, Barycentric};
use crate::spectral::{basis_at, AngularGrid, BoundaryField, Dim};

/// Galerkin data of the Dirichlet problem for one angular degree.
///
/// Basis `φ_p(r) = r^l (1 - r) P_p^{(2, 2l+n-1)}(2r - 1)`, scaled to unit
/// stiffness diagonal, `p = 0..N_r - 1 - l`. Every basis function is a
/// polynomial of degree `≤ N_r - 1`, so solutions are exact on the nodes.
#[derive(Debug, Clone)]
struct RadialSolver {
    n_basis: usize,
    /// `φ_p(r_q)` and `φ_p'(r_q)` at the quadrature radii, `q * n_basis + p`.
    phi_q: Vec<f64>,
    dphi_q: Vec<f64>,
    /// `φ_p(r_i)` at the collocation nodes, `i * n_basis + p`.
    phi_nodes: Vec<f64>,
    chol: Cholesky<f64, Dyn>,
}

/// Shared discretization of the unit ball in dimension `n ∈ {2, 3}`.
#[derive(Debug, Clone)]
pub struct BallSpace {
    dim: Dim,
    degree: usize,
    nodes: Vec<f64>,
    bary: Barycentric,
    /// Derivative weights at `r = 1` (first collocation node).
    diff_top: Vec<f64>,
    quad_r: Vec<f64>,
    /// Radial weights including the Jacobian `r^{n-1}`.
    quad_w: Vec<f64>,
    /// Radial interpolation (values and derivatives) from nodes to quadrature radii.
    interp: Vec<f64>,
    interp_d: Vec<f64>,
    grid: AngularGrid,
    solvers: Vec<RadialSolver>,
    projector: Cholesky<f64, Dyn>,
}

impl BallSpace {
    /// Ball discretization with angular degree `degree` and `n_r` radial nodes.
    pub fn new(dim: Dim, degree: usize, n_r: usize) -> Result<Self> {
        if n_r < degree + 2 {
            return Err(Error::Resolution(format!(
                "{n_r} radial nodes cannot carry degree {degree}; need at least {}",
                degree + 2
            )));
        }
        let nodes = chebyshev_radau_unit(n_r);
        let bary = Barycentric::new(&nodes);
        let diff = bary.diff_matrix();
        let diff_top = diff[0].clone();
        let n_quad = (3 * n_r).div_ceil(2) + 1;
        let (quad_r, wr) = gauss_legendre_unit(n_quad);
        let nf = dim.n() as i32;
        let quad_w: Vec<f64> = quad_r.iter().zip(&wr).map(|(r, w)| w * r.powi(nf - 1)).collect();
        let mut interp = vec![0.0; n_quad * n_r];
        let mut interp_d = vec![0.0; n_quad * n_r];
        for (q, &r) in quad_r.iter().enumerate() {
            let card = bary.cardinals(r);
            interp[q * n_r..(q + 1) * n_r].copy_from_slice(&card);
            for j in 0..n_r {
                interp_d[q * n_r + j] = (0..n_r).map(|i| card[i] * diff[i][j]).sum();
            }
        }
        let band = degree + 1;
        let grid = AngularGrid::new(dim, band, 3 * band);
        let solvers = (0..=degree)
            .map(|l| RadialSolver::build(dim, l, &nodes, &quad_r, &quad_w))
            .collect::<Result<Vec<_>>>()?;
        let mut normal = DMatrix::<f64>::zeros(n_r, n_r);
        for q in 0..n_quad {
            for a in 0..n_r {
                for b in 0..n_r {
                    normal[(a, b)] += quad_w[q] * interp[q * n_r + a] * interp[q * n_r + b];
                }
            }
        }
        let projector = Cholesky::new(normal)
            .ok_or_else(|| Error::Singular("radial mass matrix".into()))?;
        Ok(Self {
            dim,
            degree,
            nodes,
            bary,
            diff_top,
            quad_r,
            quad_w,
            interp,
            interp_d,
            grid,
            solvers,
            projector,
        })
    }

    /// Default radial resolution `N_r = L + 8`.
    pub fn with_default_radial(dim: Dim, degree: usize) -> Result<Self> {
        Self::new(dim, degree, degree + 8)
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn n_r(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_modes(&self) -> usize {
        self.dim.n_modes(self.degree)
    }

    pub fn radial_nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Angular quadrature grid shared by the ball and its boundary.
    pub fn grid(&self) -> &AngularGrid {
        &self.grid
    }

    pub fn quad_radii(&self) -> &[f64] {
        &self.quad_r
    }

    pub fn n_quad(&self) -> usize {
        self.quad_r.len()
    }

    /// Number of physical quadrature points.
    pub fn n_points(&self) -> usize {
        self.quad_r.len() * self.grid.len()
    }

    /// Cartesian position of physical quadrature point `p`.
    #[inline]
    pub fn point(&self, p: usize) -> [f64; 3] {
        let na = self.grid.len();
        let (q, j) = (p / na, p % na);
        let x = self.grid.points()[j];
        let r = self.quad_r[q];
        [r * x[0], r * x[1], r * x[2]]
    }

    /// Volume weight of physical quadrature point `p`.
    #[inline]
    pub fn weight(&self, p: usize) -> f64 {
        let na = self.grid.len();
        self.quad_w[p / na] * self.grid.weights()[p % na]
    }

    pub fn zeros(&self) -> BallField {
        BallField::from_parts(self.dim, self.degree, &self.nodes, vec![0.0; self.n_r() * self.n_modes()])
    }

    pub(crate) fn check(&self, u: &BallField) -> Result<()> {
        if u.dim() == self.dim && u.degree() == self.degree && u.radial_nodes() == self.nodes.as_slice() {
            Ok(())
        } else {
            Err(Error::Mismatch("ball field does not belong to this discretization".into()))
        }
    }

    fn check_boundary(&self, f: &BoundaryField) -> Result<()> {
        if f.dim() != self.dim {
            return Err(Error::Mismatch("boundary field of a different dimension".into()));
        }
        Ok(())
    }

    /// Harmonic extension `PI ψ`: mode `k` of degree `l` becomes `r^l ψ_k`.
    /// Modes of `ψ` above the ball degree are dropped.
    pub fn harmonic_extension(&self, psi: &BoundaryField) -> Result<BallField> {
        self.check_boundary(psi)?;
        let psi = psi.resized(self.degree);
        let m = self.n_modes();
        let mut coeffs = vec![0.0; self.n_r() * m];
        for (i, &r) in self.nodes.iter().enumerate() {
            for k in 0..m {
                let l = self.dim.degree_of(k) as i32;
                coeffs[i * m + k] = r.powi(l) * psi.coeffs()[k];
            }
        }
        Ok(BallField::from_parts(self.dim, self.degree, &self.nodes, coeffs))
    }

    /// Ball field whose mode profiles interpolate the angular projection of `f`
    /// on every radial node. Exact for polynomials of degree `≤ L` in `x` when
    /// the radial degree suffices.
    pub fn interpolate(&self, f: impl Fn([f64; 3]) -> f64 + Sync) -> BallField {
        let m = self.n_modes();
        let pts = self.grid.points();
        let rows: Vec<Vec<f64>> = self
            .nodes
            .par_iter()
            .map(|&r| {
                let vals: Vec<f64> = pts.iter().map(|x| f([r * x[0], r * x[1], r * x[2]])).collect();
                self.grid.analyze(&vals, self.degree)
            })
            .collect();
        let mut coeffs = Vec::with_capacity(self.n_r() * m);
        for row in rows {
            coeffs.extend_from_slice(&row);
        }
        BallField::from_parts(self.dim, self.degree, &self.nodes, coeffs)
    }

    /// Mode values and radial derivatives at the quadrature radii, `q * M + k`.
    fn radial_at_quad(&self, u: &BallField) -> (Vec<f64>, Vec<f64>) {
        let (nq, nr, m) = (self.n_quad(), self.n_r(), self.n_modes());
        let mut vals = vec![0.0; nq * m];
        let mut ders = vec![0.0; nq * m];
        let c = u.coeffs();
        for q in 0..nq {
            for i in 0..nr {
                let a = self.interp[q * nr + i];
                let b = self.interp_d[q * nr + i];
                let row = &c[i * m..(i + 1) * m];
                for k in 0..m {
                    vals[q * m + k] += a * row[k];
                    ders[q * m + k] += b * row[k];
                }
            }
        }
        (vals, ders)
    }

    /// Values of `u` on the physical quadrature grid.
    pub fn sample(&self, u: &BallField) -> Result<BallSamples> {
        self.check(u)?;
        let (vals, _) = self.radial_at_quad(u);
        let m = self.n_modes();
        let rows: Vec<Vec<f64>> = (0..self.n_quad())
            .into_par_iter()
            .map(|q| self.grid.synth(&vals[q * m..(q + 1) * m], self.degree))
            .collect();
        Ok(BallSamples {
            values: rows.concat(),
        })
    }

    /// Values and Cartesian gradient of `u` on the physical quadrature grid,
    /// using `∇u = x̂ ∂_r u + r^{-1} ∇_S u` mode by mode.
    pub fn sample_with_gradient(&self, u: &BallField) -> Result<(BallSamples, VectorSamples)> {
        self.check(u)?;
        let (vals, ders) = self.radial_at_quad(u);
        let m = self.n_modes();
        let n = self.dim.n();
        let na = self.grid.len();
        let l = self.degree;
        let rows: Vec<(Vec<f64>, Vec<Vec<f64>>)> = (0..self.n_quad())
            .into_par_iter()
            .map(|q| {
                let c = &vals[q * m..(q + 1) * m];
                let d = &ders[q * m..(q + 1) * m];
                let uv = self.grid.synth(c, l);
                let ur = self.grid.synth(d, l);
                let (a, b) = self.grid.synth_tangent(c, l);
                let inv_r = 1.0 / self.quad_r[q];
                let mut g = vec![vec![0.0; na]; n];
                let pts = self.grid.points();
                let et = self.grid.e_theta();
                let ep = self.grid.e_phi();
                for j in 0..na {
                    for (dd, comp) in g.iter_mut().enumerate() {
                        let mut v = pts[j][dd] * ur[j] + inv_r * a[j] * et[j][dd];
                        if !b.is_empty() {
                            v += inv_r * b[j] * ep[j][dd];
                        }
                        comp[j] = v;
                    }
                }
                (uv, g)
            })
            .collect();
        let mut values = Vec::with_capacity(self.n_points());
        let mut comps = vec![Vec::with_capacity(self.n_points()); n];
        for (uv, g) in rows {
            values.extend_from_slice(&uv);
            for (dst, src) in comps.iter_mut().zip(g) {
                dst.extend_from_slice(&src);
            }
        }
        Ok((BallSamples { values }, VectorSamples { comps }))
    }

    /// Cartesian gradient of `u` on the physical quadrature grid.
    pub fn sample_gradient(&self, u: &BallField) -> Result<VectorSamples> {
        Ok(self.sample_with_gradient(u)?.1)
    }

    /// `H¹` norm `(∫ u² + |∇u|²)^{1/2}` by quadrature.
    pub fn h1_norm(&self, u: &BallField) -> Result<f64> {
        let (v, g) = self.sample_with_gradient(u)?;
        Ok(self.h1_norm_samples(&v, &g))
    }

    pub fn h1_norm_samples(&self, v: &BallSamples, g: &VectorSamples) -> f64 {
        let mut s = 0.0;
        for p in 0..self.n_points() {
            let gp = g.at(p);
            s += self.weight(p) * (v.values[p] * v.values[p] + gp[0] * gp[0] + gp[1] * gp[1] + gp[2] * gp[2]);
        }
        s.sqrt()
    }

    /// `(∫ |g|²)^{1/2}` for sampled vectors.
    pub fn l2_norm_vector(&self, g: &VectorSamples) -> f64 {
        let mut s = 0.0;
        for p in 0..self.n_points() {
            let gp = g.at(p);
            s += self.weight(p) * (gp[0] * gp[0] + gp[1] * gp[1] + gp[2] * gp[2]);
        }
        s.sqrt()
    }

    /// `∫ a · b` for sampled vectors.
    pub fn inner_vector(&self, a: &VectorSamples, b: &VectorSamples) -> f64 {
        let mut s = 0.0;
        for p in 0..self.n_points() {
            let (x, y) = (a.at(p), b.at(p));
            s += self.weight(p) * (x[0] * y[0] + x[1] * y[1] + x[2] * y[2]);
        }
        s
    }

    /// Boundary values `u(1, ·)`.
    pub fn boundary_trace(&self, u: &BallField) -> Result<BoundaryField> {
        self.check(u)?;
        BoundaryField::new(self.dim, self.degree, u.at_node(0).to_vec())
    }

    /// Boundary normal derivative `∂_r u(1, ·)`.
    pub fn radial_trace(&self, u: &BallField) -> Result<BoundaryField> {
        self.check(u)?;
        let m = self.n_modes();
        let mut out = vec![0.0; m];
        for (i, w) in self.diff_top.iter().enumerate() {
            for (o, c) in out.iter_mut().zip(u.at_node(i)) {
                *o += w * c;
            }
        }
        BoundaryField::new(self.dim, self.degree, out)
    }

    /// Value of `u` at an arbitrary point of the closed ball.
    pub fn eval_at(&self, u: &BallField, x: [f64; 3]) -> f64 {
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        let dir = if r > 0.0 {
            [x[0] / r, x[1] / r, x[2] / r]
        } else {
            [1.0, 0.0, 0.0]
        };
        let card = self.bary.cardinals(r);
        let basis = basis_at(self.dim, self.degree, dir);
        let m = self.n_modes();
        let mut s = 0.0;
        for (i, li) in card.iter().enumerate() {
            if *li == 0.0 {
                continue;
            }
            let row = u.at_node(i);
            s += li * row.iter().zip(&basis).map(|(a, b)| a * b).sum::<f64>();
        }
        debug_assert_eq!(basis.len(), m);
        s
    }

    /// Weighted `L²` projection of samples onto the nodal representation.
    pub fn project(&self, samples: &BallSamples) -> Result<BallField> {
        if samples.values.len() != self.n_points() {
            return Err(Error::Mismatch("sample count differs from the quadrature grid".into()));
        }
        let na = self.grid.len();
        let m = self.n_modes();
        let (nq, nr) = (self.n_quad(), self.n_r());
        let a: Vec<Vec<f64>> = (0..nq)
            .into_par_iter()
            .map(|q| self.grid.analyze(&samples.values[q * na..(q + 1) * na], self.degree))
            .collect();
        let mut coeffs = vec![0.0; nr * m];
        for k in 0..m {
            let mut rhs = DVector::<f64>::zeros(nr);
            for q in 0..nq {
                let w = self.quad_w[q] * a[q][k];
                for i in 0..nr {
                    rhs[i] += w * self.interp[q * nr + i];
                }
            }
            let sol = self.projector.solve(&rhs);
            for i in 0..nr {
                coeffs[i * m + k] = sol[i];
            }
        }
        Ok(BallField::from_parts(self.dim, self.degree, &self.nodes, coeffs))
    }

    /// Gradient as a vector of ball fields of degree `L + 1`, evaluated
    /// exactly at every radial node and analyzed on the angular grid.
    pub fn gradient_field(&self, u: &BallField) -> Result<VectorBallField> {
        self.check(u)?;
        let l = self.degree;
        let l1 = l + 1;
        let m = self.n_modes();
        let m1 = self.dim.n_modes(l1);
        let nr = self.n_r();
        let n = self.dim.n();
        let mut deriv = vec![0.0; nr * m];
        let full = self.bary.diff_matrix();
        for i in 0..nr {
            for j in 0..nr {
                let w = full[i][j];
                for k in 0..m {
                    deriv[i * m + k] += w * u.coeffs()[j * m + k];
                }
            }
        }
        let na = self.grid.len();
        let pts = self.grid.points();
        let et = self.grid.e_theta();
        let ep = self.grid.e_phi();
        let mut comps = vec![vec![0.0; nr * m1]; n];
        for i in 0..nr {
            let c = u.at_node(i);
            let d = &deriv[i * m..(i + 1) * m];
            let ur = self.grid.synth(d, l);
            let (a, b) = self.grid.synth_tangent(c, l);
            let inv_r = 1.0 / self.nodes[i];
            for (dd, comp) in comps.iter_mut().enumerate() {
                let vals: Vec<f64> = (0..na)
                    .map(|j| {
                        let mut v = pts[j][dd] * ur[j] + inv_r * a[j] * et[j][dd];
                        if !b.is_empty() {
                            v += inv_r * b[j] * ep[j][dd];
                        }
                        v
                    })
                    .collect();
                let co = self.grid.analyze(&vals, l1);
                comp[i * m1..(i + 1) * m1].copy_from_slice(&co);
            }
        }
        Ok(VectorBallField {
            components: comps
                .into_iter()
                .map(|c| BallField::from_parts(self.dim, l1, &self.nodes, c))
                .collect(),
        })
    }

    /// Load functionals `∫ g · ∇(φ_p Y_k)` for every mode `k` and radial basis
    /// index `p`, as `(A, B)` angular moments per quadrature radius.
    fn load_moments(&self, g: &VectorSamples) -> Vec<(Vec<f64>, Vec<f64>)> {
        let na = self.grid.len();
        let l = self.degree;
        let pts = self.grid.points();
        let et = self.grid.e_theta();
        let ep = self.grid.e_phi();
        let three = self.dim == Dim::Three;
        (0..self.n_quad())
            .into_par_iter()
            .map(|q| {
                let mut gx = vec![0.0; na];
                let mut gt = vec![0.0; na];
                let mut gp = if three { vec![0.0; na] } else { Vec::new() };
                for j in 0..na {
                    let v = g.at(q * na + j);
                    gx[j] = v[0] * pts[j][0] + v[1] * pts[j][1] + v[2] * pts[j][2];
                    gt[j] = v[0] * et[j][0] + v[1] * et[j][1] + v[2] * et[j][2];
                    if three {
                        gp[j] = v[0] * ep[j][0] + v[1] * ep[j][1] + v[2] * ep[j][2];
                    }
                }
                (self.grid.analyze(&gx, l), self.grid.analyze_tangent_adjoint(&gt, &gp, l))
            })
            .collect()
    }

    /// Solves `Δu = div g` in the ball with `u = 0` on the sphere, in the weak
    /// form `∫ ∇u · ∇v = ∫ g · ∇v` for all test functions `v` vanishing on the
    /// boundary (Galerkin per angular mode).
    pub fn poisson_div_solve(&self, g: &VectorSamples) -> Result<BallField> {
        if g.comps.len() != self.dim.n() || g.len() != self.n_points() {
            return Err(Error::Mismatch("load samples do not match the quadrature grid".into()));
        }
        for c in &g.comps {
            crate::error::check_finite(c, "divergence load")?;
        }
        let moments = self.load_moments(g);
        let m = self.n_modes();
        let nr = self.n_r();
        let nq = self.n_quad();
        let cols: Vec<Vec<f64>> = (0..m)
            .into_par_iter()
            .map(|k| {
                let solver = &self.solvers[self.dim.degree_of(k)];
                let nb = solver.n_basis;
                let mut rhs = DVector::<f64>::zeros(nb);
                for q in 0..nq {
                    let a = self.quad_w[q] * moments[q].0[k];
                    let b = self.quad_w[q] * moments[q].1[k] / self.quad_r[q];
                    for p in 0..nb {
                        rhs[p] += solver.dphi_q[q * nb + p] * a + solver.phi_q[q * nb + p] * b;
                    }
                }
                let sol = solver.chol.solve(&rhs);
                (0..nr)
                    .map(|i| (0..nb).map(|p| solver.phi_nodes[i * nb + p] * sol[p]).sum())
                    .collect()
            })
            .collect();
        let mut coeffs = vec![0.0; nr * m];
        for (k, col) in cols.iter().enumerate() {
            for i in 0..nr {
                coeffs[i * m + k] = col[i];
            }
        }
        Ok(BallField::from_parts(self.dim, self.degree, &self.nodes, coeffs))
    }

    /// Weak residual `sup_v |∫ (∇u - g) · ∇v| / |∇v|` over the discrete test
    /// space, returned as the `L²` norm of the Riesz representative.
    pub fn weak_residual(&self, u: &BallField, g: &VectorSamples) -> Result<f64> {
        let grad = self.sample_gradient(u)?;
        let mut diff = grad;
        diff.axpy(-1.0, g);
        let z = self.poisson_div_solve(&diff)?;
        Ok(self.l2_norm_vector(&self.sample_gradient(&z)?))
    }

    /// Test basis functions of the Galerkin space: for each mode `k` the
    /// radial functions at quadrature radii, as `(φ, φ')` tables.
    pub(crate) fn radial_basis(&self, l: usize) -> (usize, &[f64], &[f64], &[f64]) {
        let s = &self.solvers[l];
        (s.n_basis, &s.phi_q, &s.dphi_q, &s.phi_nodes)
    }
}

impl RadialSolver {
    fn build(dim: Dim, l: usize, nodes: &[f64], quad_r: &[f64], quad_w: &[f64]) -> Result<Self> {
        let n_r = nodes.len();
        let nb = n_r - 1 - l;
        let n = dim.n() as f64;
        let lf = l as f64;
        let beta = 2.0 * lf + n - 1.0;
        let lam = lf * (lf + n - 2.0);
        let nq = quad_r.len();
        let mut phi_q = vec![0.0; nq * nb];
        let mut dphi_q = vec![0.0; nq * nb];
        for (q, &r) in quad_r.iter().enumerate() {
            let (j, dj) = jacobi_with_derivative(nb - 1, 2.0, beta, 2.0 * r - 1.0);
            let rl = r.powi(l as i32);
            let drl = if l == 0 { 0.0 } else { lf * r.powi(l as i32 - 1) };
            for p in 0..nb {
                phi_q[q * nb + p] = rl * (1.0 - r) * j[p];
                dphi_q[q * nb + p] = (drl * (1.0 - r) - rl) * j[p] + rl * (1.0 - r) * 2.0 * dj[p];
            }
        }
        let mut phi_nodes = vec![0.0; n_r * nb];
        for (i, &r) in nodes.iter().enumerate() {
            let (j, _) = jacobi_with_derivative(nb - 1, 2.0, beta, 2.0 * r - 1.0);
            let rl = r.powi(l as i32);
            for p in 0..nb {
                phi_nodes[i * nb + p] = rl * (1.0 - r) * j[p];
            }
        }
        let mut k = DMatrix::<f64>::zeros(nb, nb);
        for q in 0..nq {
            let w = quad_w[q];
            let r2 = quad_r[q] * quad_r[q];
            for a in 0..nb {
                let (pa, da) = (phi_q[q * nb + a], dphi_q[q * nb + a]);
                for b in 0..=a {
                    let v = w * (da * dphi_q[q * nb + b] + lam * pa * phi_q[q * nb + b] / r2);
                    k[(a, b)] += v;
                }
            }
        }
        for a in 0..nb {
            for b in 0..a {
                k[(b, a)] = k[(a, b)];
            }
        }
        let scale: Vec<f64> = (0..nb).map(|p| 1.0 / k[(p, p)].sqrt()).collect();
        for a in 0..nb {
            for b in 0..nb {
                k[(a, b)] *= scale[a] * scale[b];
            }
        }
        for q in 0..nq {
            for p in 0..nb {
                phi_q[q * nb + p] *= scale[p];
                dphi_q[q * nb + p] *= scale[p];
            }
        }
        for i in 0..n_r {
            for p in 0..nb {
                phi_nodes[i * nb + p] *= scale[p];
            }
        }
        let chol = Cholesky::new(k).ok_or_else(|| Error::Singular(format!("radial stiffness for degree {l}")))?;
        Ok(Self {
            n_basis: nb,
            phi_q,
            dphi_q,
            phi_nodes,
            chol,
        })
    }
}
