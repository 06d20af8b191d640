//! Shape-dependent data: the harmonic extension of `h`, the coefficient matrix
//! `P(h)` at the quadrature nodes, and boundary geometry.

use crate::ball::{BallField, BallSpace, VectorSamples};
use crate::dual::Scalar;
use crate::error::{check_finite, Error, Result};
use crate::spectral::{BoundaryField, Dim};

/// Dense 3x3 matrix; the 2x2 upper block is used in the plane.
pub type Mat3<T = f64> = [[T; 3]; 3];

/// `P = (1+h̃)^{n-3} [(1+t) I - ∇h̃⊗x - x⊗∇h̃ + |∇h̃|² x⊗x / (1+t)]` with
/// `t = h̃ + x·∇h̃`, evaluated from the local values `a = h̃` and `v = ∇h̃`.
pub fn p_matrix<T: Scalar>(n: usize, x: [f64; 3], a: T, v: [T; 3]) -> Mat3<T> {
    let zero = T::cst(0.0);
    let one = T::cst(1.0);
    let mut xv = zero;
    let mut vv = zero;
    for d in 0..n {
        xv = xv + v[d] * T::cst(x[d]);
        vv = vv + v[d] * v[d];
    }
    let opt = one + a + xv;
    let q = vv / opt;
    let pre = (one + a).powi(n as i32 - 3);
    let mut m = [[zero; 3]; 3];
    for i in 0..n {
        for j in 0..n {
            let xi = T::cst(x[i]);
            let xj = T::cst(x[j]);
            let mut e = -(v[i] * xj) - xi * v[j] + q * xi * xj;
            if i == j {
                e = e + opt;
            }
            m[i][j] = pre * e;
        }
    }
    m
}

/// Coefficients `(α, β, γ)` of the homogeneous term `P_m`, acting as
/// `P_m z = α z + β (v (x·z) + x (v·z)) + γ x (x·z)`.
pub type TermCoeffs = (f64, f64, f64);

/// Homogeneous pieces `P_0 .. P_mmax` at one node.
///
/// `Q_0 = I`, `Q_1 = t I - v⊗x - x⊗v`, `Q_k = (-1)^k |v|² t^{k-2} x⊗x` for
/// `k ≥ 2`. In three dimensions `P_m = Q_m`; in the plane the prefactor
/// `(1+h̃)^{-1}` gives `P_m = Q_m - h̃ P_{m-1}`.
pub fn p_terms(dim: Dim, a: f64, xv: f64, vv: f64, mmax: usize) -> Vec<TermCoeffs> {
    let t = a + xv;
    let mut q = Vec::with_capacity(mmax + 1);
    q.push((1.0, 0.0, 0.0));
    if mmax >= 1 {
        q.push((t, -1.0, 0.0));
    }
    let mut pw = vv;
    for k in 2..=mmax {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        q.push((0.0, 0.0, sign * pw));
        pw *= t;
    }
    match dim {
        Dim::Three => q,
        Dim::Two => {
            let mut p: Vec<TermCoeffs> = Vec::with_capacity(mmax + 1);
            p.push(q[0]);
            for m in 1..=mmax {
                let prev = p[m - 1];
                p.push((q[m].0 - a * prev.0, q[m].1 - a * prev.1, q[m].2 - a * prev.2));
            }
            p
        }
    }
}

#[inline]
pub(crate) fn apply_term(c: TermCoeffs, x: [f64; 3], v: [f64; 3], z: [f64; 3]) -> [f64; 3] {
    let xz = x[0] * z[0] + x[1] * z[1] + x[2] * z[2];
    let vz = v[0] * z[0] + v[1] * z[1] + v[2] * z[2];
    let mut out = [0.0; 3];
    for d in 0..3 {
        out[d] = c.0 * z[d] + c.1 * (v[d] * xz + x[d] * vz) + c.2 * x[d] * xz;
    }
    out
}

#[inline]
pub(crate) fn mat_vec(m: &Mat3, z: [f64; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for i in 0..3 {
        out[i] = m[i][0] * z[0] + m[i][1] * z[1] + m[i][2] * z[2];
    }
    out
}

/// Geometry of the boundary `r = 1 + h` sampled on the angular grid.
#[derive(Debug, Clone)]
pub struct BoundaryGeometry {
    /// `h` at the nodes.
    pub h: Vec<f64>,
    /// Frame components `(∂_θ h, (1/sin θ) ∂_φ h)` of `∇_S h`.
    pub h_theta: Vec<f64>,
    pub h_phi: Vec<f64>,
    /// `⟨x, ∇h̃⟩` at `r = 1`, i.e. `Σ l h_lm Y_lm`.
    pub x_grad: Vec<f64>,
}

impl BoundaryGeometry {
    pub fn new(space: &BallSpace, h: &BoundaryField) -> Self {
        let grid = space.grid();
        let l = space.degree();
        let hc = h.resized(l);
        let hv = grid.synth(hc.coeffs(), l);
        let (ht, hp) = grid.synth_tangent(hc.coeffs(), l);
        let xg = grid.synth(hc.map_degrees(|d| d as f64).coeffs(), l);
        let hp = if hp.is_empty() { vec![0.0; hv.len()] } else { hp };
        Self {
            h: hv,
            h_theta: ht,
            h_phi: hp,
            x_grad: xg,
        }
    }
}

/// Everything about the shape `h` needed by the solvers.
#[derive(Debug, Clone)]
pub struct ShapeState<'a> {
    space: &'a BallSpace,
    h: BoundaryField,
    tilde_h: BallField,
    /// `h̃` and `∇h̃` at the physical quadrature nodes.
    a: Vec<f64>,
    v: VectorSamples,
    p_full: Vec<Mat3>,
    boundary: BoundaryGeometry,
    margin: f64,
}

impl<'a> ShapeState<'a> {
    /// Builds the shape data; fails if `1/2 - ‖h̃ x‖_{W^{1,∞}}` is not positive
    /// on the grid or a boundary denominator degenerates.
    pub fn new(space: &'a BallSpace, h: &BoundaryField) -> Result<Self> {
        check_finite(h.coeffs(), "shape")?;
        if h.dim() != space.dim() {
            return Err(Error::Mismatch("shape of a different dimension".into()));
        }
        let h = h.resized(space.degree());
        let tilde_h = space.harmonic_extension(&h)?;
        let (vals, v) = space.sample_with_gradient(&tilde_h)?;
        let a = vals.values;
        let boundary = BoundaryGeometry::new(space, &h);
        let mut sup = 0.0f64;
        for j in 0..boundary.h.len() {
            let grad2 = boundary.x_grad[j].powi(2) + boundary.h_theta[j].powi(2) + boundary.h_phi[j].powi(2);
            sup = sup.max(boundary.h[j].abs() + grad2.sqrt());
        }
        let margin = 0.5 - sup;
        if margin <= 0.0 {
            return Err(Error::ShapeTooLarge { margin });
        }
        for j in 0..boundary.h.len() {
            let a1 = 1.0 + boundary.h[j];
            if a1 <= 0.0 || a1 + boundary.x_grad[j] <= 0.0 {
                return Err(Error::GeometryDegenerate(format!("non-positive denominator at node {j}")));
            }
        }
        let n = space.dim().n();
        let p_full = (0..space.n_points())
            .map(|p| p_matrix(n, space.point(p), a[p], v.at(p)))
            .collect();
        Ok(Self {
            space,
            h,
            tilde_h,
            a,
            v,
            p_full,
            boundary,
            margin,
        })
    }

    pub fn space(&self) -> &'a BallSpace {
        self.space
    }

    pub fn h(&self) -> &BoundaryField {
        &self.h
    }

    pub fn tilde_h(&self) -> &BallField {
        &self.tilde_h
    }

    /// Well-posedness margin `1/2 - ‖h̃ x‖_{W^{1,∞}}` measured on the boundary grid.
    pub fn wellposed_margin(&self) -> f64 {
        self.margin
    }

    pub fn boundary(&self) -> &BoundaryGeometry {
        &self.boundary
    }

    /// `h̃` at physical quadrature node `p`.
    #[inline]
    pub fn a(&self, p: usize) -> f64 {
        self.a[p]
    }

    /// `∇h̃` at physical quadrature node `p`.
    #[inline]
    pub fn v(&self, p: usize) -> [f64; 3] {
        self.v.at(p)
    }

    /// Full coefficient matrix at physical quadrature node `p`.
    #[inline]
    pub fn p_full(&self, p: usize) -> &Mat3 {
        &self.p_full[p]
    }

    /// Homogeneous coefficient pieces `P_0 .. P_mmax` at node `p`.
    pub fn terms_at(&self, p: usize, mmax: usize) -> Vec<TermCoeffs> {
        let x = self.space.point(p);
        let v = self.v(p);
        let xv = x[0] * v[0] + x[1] * v[1] + x[2] * v[2];
        let vv = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
        p_terms(self.space.dim(), self.a[p], xv, vv, mmax)
    }

    /// `P_m` at node `p` as a dense matrix.
    pub fn p_term_matrix(&self, m: usize, p: usize) -> Mat3 {
        let c = self.terms_at(p, m)[m];
        let x = self.space.point(p);
        let v = self.v(p);
        let mut out = [[0.0; 3]; 3];
        for j in 0..3 {
            let mut e = [0.0; 3];
            e[j] = 1.0;
            let col = apply_term(c, x, v, e);
            for i in 0..3 {
                out[i][j] = col[i];
            }
        }
        out
    }

    /// `P ∇u` (or any sampled vector) at every node.
    pub fn apply_p(&self, z: &VectorSamples) -> VectorSamples {
        let n = self.space.dim().n();
        let mut out = VectorSamples::zeros(n, z.len());
        for p in 0..z.len() {
            out.set(p, mat_vec(&self.p_full[p], z.at(p)));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn terms_sum_to_full_matrix() {
        for (dim, n) in [(Dim::Two, 2usize), (Dim::Three, 3usize)] {
            let x = [0.3, -0.4, if n == 3 { 0.5 } else { 0.0 }];
            let a = 0.04;
            let v = [0.02, -0.03, if n == 3 { 0.01 } else { 0.0 }];
            let xv: f64 = (0..3).map(|d| x[d] * v[d]).sum();
            let vv: f64 = (0..3).map(|d| v[d] * v[d]).sum();
            let terms = p_terms(dim, a, xv, vv, 40);
            let full = p_matrix(n, x, a, v);
            let mut sum = [[0.0; 3]; 3];
            for c in &terms {
                for j in 0..n {
                    let mut e = [0.0; 3];
                    e[j] = 1.0;
                    let col = apply_term(*c, x, v, e);
                    for i in 0..n {
                        sum[i][j] += col[i];
                    }
                }
            }
            for i in 0..n {
                for j in 0..n {
                    assert!((sum[i][j] - full[i][j]).abs() < 1e-15, "{dim:?} {i}{j}");
                }
            }
        }
    }

    #[test]
    fn full_matrix_is_cofactor_form_of_the_jacobian() {
        // P = |det Dγ| Dγ^{-1} Dγ^{-T} with Dγ = (1 + a) I + x ⊗ v.
        let x = [0.3, -0.4, 0.5];
        let a = 0.07;
        let v = [0.05, -0.02, 0.03];
        let mut dg = nalgebra::Matrix3::<f64>::identity() * (1.0 + a);
        for i in 0..3 {
            for j in 0..3 {
                dg[(i, j)] += x[i] * v[j];
            }
        }
        let inv = dg.try_inverse().unwrap();
        let expect = inv * inv.transpose() * dg.determinant().abs();
        let p = p_matrix(3, x, a, v);
        for i in 0..3 {
            for j in 0..3 {
                assert!((p[i][j] - expect[(i, j)]).abs() < 1e-14);
            }
        }
    }
}
