//! Interior fields stored by radial collocation per angular mode.

use serde::{Deserialize, Serialize};

use crate::error::{check_finite, Error, Result};
use crate::spectral::Dim;

/// Scalar field on the closed unit ball.
///
/// Mode `k` (in the boundary ordering) has radial profile `c_k(r)`, a
/// polynomial of degree `N_r - 1` known through its values at the radial
/// nodes. `coeffs[i * n_modes + k] = c_k(r_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallField {
    dim: Dim,
    #[serde(rename = "L")]
    degree: usize,
    #[serde(rename = "N_r")]
    n_r: usize,
    radial_nodes: Vec<f64>,
    coeffs: Vec<f64>,
}

impl BallField {
    pub fn new(dim: Dim, degree: usize, radial_nodes: Vec<f64>, coeffs: Vec<f64>) -> Result<Self> {
        let n_r = radial_nodes.len();
        let expected = n_r * dim.n_modes(degree);
        if coeffs.len() != expected {
            return Err(Error::CoefficientLength {
                expected,
                got: coeffs.len(),
            });
        }
        check_finite(&coeffs, "ball coefficients")?;
        Ok(Self {
            dim,
            degree,
            n_r,
            radial_nodes,
            coeffs,
        })
    }

    pub(crate) fn from_parts(dim: Dim, degree: usize, radial_nodes: &[f64], coeffs: Vec<f64>) -> Self {
        debug_assert_eq!(coeffs.len(), radial_nodes.len() * dim.n_modes(degree));
        Self {
            dim,
            degree,
            n_r: radial_nodes.len(),
            radial_nodes: radial_nodes.to_vec(),
            coeffs,
        }
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn n_r(&self) -> usize {
        self.n_r
    }

    pub fn n_modes(&self) -> usize {
        self.dim.n_modes(self.degree)
    }

    pub fn radial_nodes(&self) -> &[f64] {
        &self.radial_nodes
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    /// Mode coefficients at radial node `i`.
    pub fn at_node(&self, i: usize) -> &[f64] {
        let m = self.n_modes();
        &self.coeffs[i * m..(i + 1) * m]
    }

    /// Radial profile of mode `k` at all nodes.
    pub fn profile(&self, k: usize) -> Vec<f64> {
        let m = self.n_modes();
        (0..self.n_r).map(|i| self.coeffs[i * m + k]).collect()
    }

    pub fn same_layout(&self, other: &Self) -> bool {
        self.dim == other.dim && self.degree == other.degree && self.radial_nodes == other.radial_nodes
    }

    fn check_layout(&self, other: &Self) -> Result<()> {
        if self.same_layout(other) {
            Ok(())
        } else {
            Err(Error::Mismatch("ball fields on different discretizations".into()))
        }
    }

    /// `a * self + b * other`.
    pub fn lincomb(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        self.check_layout(other)?;
        let mut out = self.clone();
        for (x, y) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *x = a * *x + b * y;
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.lincomb(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.lincomb(1.0, other, -1.0)
    }

    pub fn add_assign(&mut self, other: &Self) -> Result<()> {
        self.check_layout(other)?;
        for (x, y) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *x += y;
        }
        Ok(())
    }

    pub fn scale(&self, a: f64) -> Self {
        let mut out = self.clone();
        for x in &mut out.coeffs {
            *x *= a;
        }
        out
    }

    /// Largest absolute nodal coefficient.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("ball field serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: Self = serde_json::from_str(text).map_err(|e| Error::Parameter(e.to_string()))?;
        if raw.n_r != raw.radial_nodes.len() {
            return Err(Error::Parameter("N_r does not match the radial node list".into()));
        }
        Self::new(raw.dim, raw.degree, raw.radial_nodes, raw.coeffs)
    }
}

/// Vector field on the ball, one [`BallField`] per Cartesian component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorBallField {
    pub components: Vec<BallField>,
}

impl VectorBallField {
    pub fn dim(&self) -> Dim {
        self.components[0].dim()
    }
}

/// Nodal samples of a scalar on the physical quadrature grid of a
/// [`BallSpace`](super::BallSpace), laid out as `q * n_angular + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct BallSamples {
    pub values: Vec<f64>,
}

/// Cartesian components of a vector sampled on the physical quadrature grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorSamples {
    pub comps: Vec<Vec<f64>>,
}

impl VectorSamples {
    pub fn zeros(n: usize, len: usize) -> Self {
        Self {
            comps: vec![vec![0.0; len]; n],
        }
    }

    pub fn len(&self) -> usize {
        self.comps[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.comps[0].is_empty()
    }

    /// Vector at node `p`, padded to three components.
    #[inline]
    pub fn at(&self, p: usize) -> [f64; 3] {
        let mut v = [0.0; 3];
        for (d, c) in self.comps.iter().enumerate() {
            v[d] = c[p];
        }
        v
    }

    #[inline]
    pub fn set(&mut self, p: usize, v: [f64; 3]) {
        for (d, c) in self.comps.iter_mut().enumerate() {
            c[p] = v[d];
        }
    }

    pub fn axpy(&mut self, a: f64, other: &Self) {
        for (x, y) in self.comps.iter_mut().zip(&other.comps) {
            for (u, v) in x.iter_mut().zip(y) {
                *u += a * v;
            }
        }
    }
}
