//! Band-limited scalar fields on the unit circle or unit sphere.

use serde::{Deserialize, Serialize};

use super::grid::{basis_at, AngularGrid};
use super::modes::Dim;
use crate::error::{check_finite, Error, Result};

/// Real field `Σ c_i Y_i` with modes of degree at most `degree`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryField {
    dim: Dim,
    #[serde(rename = "degree_cut")]
    degree: usize,
    coeffs: Vec<f64>,
}

/// Result of projecting samples onto a truncated basis.
#[derive(Debug, Clone)]
pub struct Projection {
    pub field: BoundaryField,
    /// Quadrature estimate of the `L²` norm of the part of the samples not
    /// captured by the projection (zero for samples of degree `≤ L`).
    pub aliasing: f64,
}

impl BoundaryField {
    pub fn new(dim: Dim, degree: usize, coeffs: Vec<f64>) -> Result<Self> {
        let expected = dim.n_modes(degree);
        if coeffs.len() != expected {
            return Err(Error::CoefficientLength {
                expected,
                got: coeffs.len(),
            });
        }
        check_finite(&coeffs, "boundary coefficients")?;
        Ok(Self {
            dim,
            degree,
            coeffs,
        })
    }

    pub fn zeros(dim: Dim, degree: usize) -> Self {
        Self {
            dim,
            degree,
            coeffs: vec![0.0; dim.n_modes(degree)],
        }
    }

    /// Constant function with value `value`.
    pub fn constant(dim: Dim, degree: usize, value: f64) -> Self {
        let mut f = Self::zeros(dim, degree);
        f.coeffs[0] = value * Self::constant_mode_norm(dim);
        f
    }

    /// Single basis function `scale * Y_(l,m)`.
    pub fn mode(dim: Dim, degree: usize, l: usize, m: i64, scale: f64) -> Self {
        let mut f = Self::zeros(dim, degree);
        f.coeffs[dim.index_of(l, m)] = scale;
        f
    }

    /// `√|S^{n-1}|`, the coefficient of the constant function `1`.
    pub fn constant_mode_norm(dim: Dim) -> f64 {
        match dim {
            Dim::Two => (2.0 * std::f64::consts::PI).sqrt(),
            Dim::Three => (4.0 * std::f64::consts::PI).sqrt(),
        }
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// Nodal values on `grid`.
    pub fn synth(&self, grid: &AngularGrid) -> Result<Vec<f64>> {
        self.check_grid(grid)?;
        Ok(grid.synth(&self.coeffs, self.degree))
    }

    /// Quadrature projection of nodal samples onto modes of degree `≤ degree`.
    pub fn analyze(grid: &AngularGrid, values: &[f64], degree: usize) -> Result<Self> {
        Ok(Self::analyze_with_report(grid, values, degree)?.field)
    }

    /// Projection together with the norm of the discarded part of the samples.
    pub fn analyze_with_report(grid: &AngularGrid, values: &[f64], degree: usize) -> Result<Projection> {
        grid.check_resolution(degree)?;
        if values.len() != grid.len() {
            return Err(Error::Mismatch(format!(
                "{} samples for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        check_finite(values, "boundary samples")?;
        let coeffs = grid.analyze(values, degree);
        let back = grid.synth(&coeffs, degree);
        let aliasing = back
            .iter()
            .zip(values)
            .zip(grid.weights())
            .map(|((b, v), w)| w * (b - v) * (b - v))
            .sum::<f64>()
            .sqrt();
        Ok(Projection {
            field: Self {
                dim: grid.dim(),
                degree,
                coeffs,
            },
            aliasing,
        })
    }

    fn check_grid(&self, grid: &AngularGrid) -> Result<()> {
        if grid.dim() != self.dim {
            return Err(Error::Mismatch("grid dimension differs from field".into()));
        }
        grid.check_resolution(self.degree)
    }

    /// Value at the unit vector `x`.
    pub fn eval_at(&self, x: [f64; 3]) -> f64 {
        basis_at(self.dim, self.degree, x)
            .iter()
            .zip(&self.coeffs)
            .map(|(a, b)| a * b)
            .sum()
    }

    /// Sobolev norm `(Σ (1 + λ_i)^s c_i²)^{1/2}`.
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let lam = self.dim.eigenvalue(self.dim.degree_of(i));
                (1.0 + lam).powf(s) * c * c
            })
            .sum::<f64>()
            .sqrt()
    }

    /// `L²` norm of the field.
    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Field restricted to modes of degree `≤ l`, with the `L²` norm of what
    /// was removed. Padding with zeros when `l` exceeds the current degree.
    pub fn truncate(&self, l: usize) -> (Self, f64) {
        let n = self.dim.n_modes(l);
        let mut coeffs = vec![0.0; n];
        let keep = n.min(self.coeffs.len());
        coeffs[..keep].copy_from_slice(&self.coeffs[..keep]);
        let dropped = self.coeffs[keep..].iter().map(|c| c * c).sum::<f64>().sqrt();
        (
            Self {
                dim: self.dim,
                degree: l,
                coeffs,
            },
            dropped,
        )
    }

    /// Same field stored at degree `l`; modes above `l` are discarded.
    pub fn resized(&self, l: usize) -> Self {
        self.truncate(l).0
    }

    fn combine(&self, other: &Self, a: f64, b: f64) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::Mismatch("fields of different dimension".into()));
        }
        let l = self.degree.max(other.degree);
        let mut out = self.resized(l);
        let o = other.resized(l);
        for (x, y) in out.coeffs.iter_mut().zip(&o.coeffs) {
            *x = a * *x + b * y;
        }
        Ok(out)
    }

    /// `self + other` at the larger of the two degrees.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, 1.0, 1.0)
    }

    /// `self - other` at the larger of the two degrees.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, 1.0, -1.0)
    }

    /// `a * self + b * other`.
    pub fn lincomb(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        self.combine(other, a, b)
    }

    pub fn scale(&self, a: f64) -> Self {
        Self {
            dim: self.dim,
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|c| a * c).collect(),
        }
    }

    /// Multiplies each mode of degree `l` by `f(l)`.
    pub fn map_degrees(&self, f: impl Fn(usize) -> f64) -> Self {
        Self {
            dim: self.dim,
            degree: self.degree,
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| f(self.dim.degree_of(i)) * c)
                .collect(),
        }
    }

    /// Exact product of two band-limited fields, of degree `L_f + L_g`.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::Mismatch("fields of different dimension".into()));
        }
        let l = self.degree + other.degree;
        let grid = AngularGrid::for_degree(self.dim, l);
        let a = grid.synth(&self.resized(l).coeffs, l);
        let b = grid.synth(&other.resized(l).coeffs, l);
        let prod: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
        Ok(Self {
            dim: self.dim,
            degree: l,
            coeffs: grid.analyze(&prod, l),
        })
    }

    /// Product truncated to degree `cap` on a dealiased grid, with the `L²`
    /// norm of the discarded high modes.
    pub fn multiply_capped(&self, other: &Self, cap: usize) -> Result<(Self, f64)> {
        let full = self.multiply(other)?;
        Ok(full.truncate(cap))
    }

    /// Cartesian components of the tangential gradient, each of degree `L + 1`.
    pub fn tangential_gradient(&self) -> Vec<Self> {
        let l = self.degree + 1;
        let grid = AngularGrid::new(self.dim, l, 2 * l + 2);
        let comps = grid.synth_gradient(&self.resized(l).coeffs, l);
        comps
            .iter()
            .take(self.dim.n())
            .map(|v| Self {
                dim: self.dim,
                degree: l,
                coeffs: grid.analyze(v, l),
            })
            .collect()
    }

    /// Pull-back by the reflection `x_1 ↦ -x_1`.
    pub fn reflect_x1(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let (_, m) = self.dim.mode_of(i);
                // cos(m(π - φ)) = (-1)^m cos mφ and sin(m(π - φ)) = (-1)^{m+1} sin mφ.
                let k = m.unsigned_abs();
                let sign = if m >= 0 { k % 2 == 0 } else { k % 2 == 1 };
                if sign {
                    *c
                } else {
                    -c
                }
            })
            .collect();
        Self {
            dim: self.dim,
            degree: self.degree,
            coeffs,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("boundary field serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: Self = serde_json::from_str(text).map_err(|e| Error::Parameter(e.to_string()))?;
        Self::new(raw.dim, raw.degree, raw.coeffs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn cosine_squared_on_the_circle() {
        let f = BoundaryField::mode(Dim::Two, 1, 1, 1, PI.sqrt());
        let p = f.multiply(&f).unwrap();
        // cos² θ = 1/2 + cos 2θ / 2
        let half = BoundaryField::constant(Dim::Two, 2, 0.5);
        let c2 = BoundaryField::mode(Dim::Two, 2, 2, 2, 0.5 * PI.sqrt());
        let expect = half.add(&c2).unwrap();
        let diff = p.sub(&expect).unwrap();
        assert!(diff.l2_norm() < 1e-14);
    }

    #[test]
    fn norms_of_first_harmonic() {
        let y = BoundaryField::mode(Dim::Three, 3, 1, 0, 1.0);
        assert!((y.sobolev_norm(1.0) - 3f64.sqrt()).abs() < 1e-15);
        assert!((y.sobolev_norm(0.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn circle_gradient_of_cosine() {
        // ∇_S cos θ = (sin² θ, -sin θ cos θ)
        let f = BoundaryField::mode(Dim::Two, 1, 1, 1, PI.sqrt());
        let g = f.tangential_gradient();
        for k in 0..40 {
            let t = 0.157 * k as f64;
            let x = [t.cos(), t.sin(), 0.0];
            assert!((g[0].eval_at(x) - t.sin().powi(2)).abs() < 1e-14);
            assert!((g[1].eval_at(x) + t.sin() * t.cos()).abs() < 1e-14);
        }
    }

    #[test]
    fn aliasing_report_matches_double_resolution_projection() {
        let l = 6;
        // Band l, but quadrature exact up to degree 2l + 2 so the dropped
        // mode's norm is integrated exactly.
        let grid = AngularGrid::new(Dim::Three, l, 2 * l + 2);
        let high = BoundaryField::mode(Dim::Three, l + 1, l + 1, 2, 1.0)
            .add(&BoundaryField::mode(Dim::Three, l + 1, 3, -1, 0.5))
            .unwrap();
        let fine = AngularGrid::for_degree(Dim::Three, 2 * (l + 1));
        let samples_coarse: Vec<f64> = grid.points().iter().map(|&p| high.eval_at(p)).collect();
        let samples_fine: Vec<f64> = fine.points().iter().map(|&p| high.eval_at(p)).collect();
        let coarse = BoundaryField::analyze_with_report(&grid, &samples_coarse, l).unwrap();
        let reference = BoundaryField::analyze(&fine, &samples_fine, l).unwrap();
        assert!(coarse.field.sub(&reference).unwrap().l2_norm() < 1e-13);
        assert!((coarse.aliasing - 1.0).abs() < 1e-13, "{}", coarse.aliasing);
    }

    #[test]
    fn reflection_matches_pointwise_pullback() {
        for dim in [Dim::Two, Dim::Three] {
            let l = 5;
            let n = dim.n_modes(l);
            let f = BoundaryField::new(dim, l, (0..n).map(|i| (1.3 * i as f64).sin()).collect()).unwrap();
            let r = f.reflect_x1();
            for k in 0..25 {
                let a = 0.3 + 0.41 * k as f64;
                let b = 0.2 + 0.17 * k as f64;
                let x = match dim {
                    Dim::Two => [a.cos(), a.sin(), 0.0],
                    Dim::Three => [b.sin() * a.cos(), b.sin() * a.sin(), b.cos()],
                };
                let xr = [-x[0], x[1], x[2]];
                assert!((r.eval_at(x) - f.eval_at(xr)).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let f = BoundaryField::mode(Dim::Three, 2, 2, -1, 0.25);
        let back = BoundaryField::from_json(&f.to_json()).unwrap();
        assert_eq!(f, back);
        assert!(f.to_json().contains("\"dim\":3"));
    }
}
