//! Fourier multiplier norms of functions sampled on periodic boxes.
//!
//! The transform is `ŵ(ξ) = ∫ w(x) e^{-2πi ξ·x} dx`. On a box of side
//! lengths `L_d` with `m_d` cells it is approximated by `ΔV · DFT` at the
//! frequencies `ξ_d = k_d / L_d`, and Parseval gives
//! `∫ |ŵ|² μ(ξ) dξ ≈ V^{-1} Σ_k |ΔV · DFT_k|² μ(k / L)`.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Samples of a real function on a periodic box, stored row-major with the
/// last axis fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxSamples {
    pub shape: Vec<usize>,
    pub lengths: Vec<f64>,
    pub values: Vec<f64>,
}

/// Power spectrum `V^{-1} |ΔV · DFT_k|²` with the frequency of every cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub shape: Vec<usize>,
    pub lengths: Vec<f64>,
    pub power: Vec<f64>,
}

/// Frequency index of DFT bin `k` out of `m`, in `[-m/2, m/2)`.
pub fn signed_index(k: usize, m: usize) -> i64 {
    if k < m.div_ceil(2) {
        k as i64
    } else {
        k as i64 - m as i64
    }
}

/// In-place forward DFT along every axis.
pub fn fft_nd(data: &mut [Complex64], shape: &[usize]) {
    let total: usize = shape.iter().product();
    assert_eq!(data.len(), total);
    let mut planner = FftPlanner::new();
    let mut stride = 1;
    for axis in (0..shape.len()).rev() {
        let m = shape[axis];
        let fft = planner.plan_fft_forward(m);
        let mut line = vec![Complex64::new(0.0, 0.0); m];
        let block = stride * m;
        for start in (0..total).step_by(block) {
            for off in 0..stride {
                for (i, v) in line.iter_mut().enumerate() {
                    *v = data[start + off + i * stride];
                }
                fft.process(&mut line);
                for (i, v) in line.iter().enumerate() {
                    data[start + off + i * stride] = *v;
                }
            }
        }
        stride = block;
    }
}

impl BoxSamples {
    pub fn new(shape: Vec<usize>, lengths: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if shape.len() != lengths.len() || shape.iter().product::<usize>() != values.len() {
            return Err(Error::Mismatch("box shape, lengths and sample count disagree".into()));
        }
        crate::error::check_finite(&values, "box samples")?;
        Ok(Self { shape, lengths, values })
    }

    /// Largest magnitude over the cells touching the box boundary.
    pub fn edge_magnitude(&self) -> f64 {
        let mut worst: f64 = 0.0;
        let d = self.shape.len();
        let mut idx = vec![0usize; d];
        for v in &self.values {
            if idx.iter().zip(&self.shape).any(|(&i, &m)| i == 0 || i + 1 == m) {
                worst = worst.max(v.abs());
            }
            for a in (0..d).rev() {
                idx[a] += 1;
                if idx[a] < self.shape[a] {
                    break;
                }
                idx[a] = 0;
            }
        }
        worst
    }

    pub fn max_magnitude(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Fails with [`Error::BoxTooSmall`] unless the boundary cells are below
    /// `1e-13` relative to the maximum.
    pub fn certify_support(&self) -> Result<()> {
        let edge = self.edge_magnitude();
        let top = self.max_magnitude();
        if edge > 1e-13 * top {
            return Err(Error::BoxTooSmall(edge / top));
        }
        Ok(())
    }

    pub fn cell_volume(&self) -> f64 {
        self.lengths.iter().zip(&self.shape).map(|(l, &m)| l / m as f64).product()
    }

    pub fn spectrum(&self) -> Spectrum {
        let mut data: Vec<Complex64> = self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft_nd(&mut data, &self.shape);
        let dv = self.cell_volume();
        let vol: f64 = self.lengths.iter().product();
        let power = data.iter().map(|c| c.norm_sqr() * dv * dv / vol).collect();
        Spectrum {
            shape: self.shape.clone(),
            lengths: self.lengths.clone(),
            power,
        }
    }

    /// `L²` norm by the midpoint rule.
    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() * self.cell_volume()).sqrt()
    }
}

impl Spectrum {
    /// `(Σ_k P_k μ(ξ_k))^{1/2}` for a multiplier `μ` of the frequency vector.
    pub fn norm_with(&self, mult: impl Fn(&[f64]) -> f64) -> f64 {
        let d = self.shape.len();
        let mut idx = vec![0usize; d];
        let mut xi = vec![0.0; d];
        let mut acc = 0.0;
        for p in &self.power {
            for a in 0..d {
                xi[a] = signed_index(idx[a], self.shape[a]) as f64 / self.lengths[a];
            }
            acc += p * mult(&xi);
            for a in (0..d).rev() {
                idx[a] += 1;
                if idx[a] < self.shape[a] {
                    break;
                }
                idx[a] = 0;
            }
        }
        acc.sqrt()
    }

    /// `H^s` norm with multiplier `(1 + |ξ|²)^s`.
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        self.norm_with(|xi| (1.0 + xi.iter().map(|x| x * x).sum::<f64>()).powf(s))
    }

    /// `H^{s,r}` norm with multiplier `(1 + |ξ'|²)^r (1 + |ξ|²)^s`, the last
    /// axis being the normal variable.
    pub fn hsr_norm(&self, s: f64, r: f64) -> f64 {
        self.norm_with(|xi| hsr_multiplier(xi, s, r))
    }
}

/// `(1 + |ξ'|²)^r (1 + |ξ|²)^s` where `ξ'` drops the last entry.
pub fn hsr_multiplier(xi: &[f64], s: f64, r: f64) -> f64 {
    let d = xi.len();
    let t: f64 = xi[..d - 1].iter().map(|x| x * x).sum();
    let all = t + xi[d - 1] * xi[d - 1];
    (1.0 + t).powf(r) * (1.0 + all).powf(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_sobolev_norms_match_closed_form() {
        // w(x) = exp(-π x²) has ŵ(ξ) = exp(-π ξ²).
        let m = 256;
        let len = 16.0;
        let values: Vec<f64> = (0..m)
            .map(|i| {
                let x = -len / 2.0 + len * i as f64 / m as f64;
                (-std::f64::consts::PI * x * x).exp()
            })
            .collect();
        let b = BoxSamples::new(vec![m], vec![len], values).unwrap();
        let sp = b.spectrum();
        // ∫ e^{-2πξ²} dξ = 1/√2 and ∫ ξ² e^{-2πξ²} dξ = 1/(4π√2).
        let l2 = (1.0 / 2f64.sqrt()).sqrt();
        assert!((sp.sobolev_norm(0.0) - l2).abs() < 1e-14);
        assert!((b.l2_norm() - l2).abs() < 1e-14);
        let h1 = (1.0 / 2f64.sqrt() * (1.0 + 1.0 / (4.0 * std::f64::consts::PI))).sqrt();
        assert!((sp.sobolev_norm(1.0) - h1).abs() < 1e-14);
    }

    #[test]
    fn multi_axis_transform_matches_separable_product() {
        let shape = [8, 6];
        let f = |i: usize, j: usize| ((i as f64) * 0.3).sin() * ((j as f64) * 0.7).cos();
        let mut data: Vec<Complex64> = (0..48).map(|p| Complex64::new(f(p / 6, p % 6), 0.0)).collect();
        fft_nd(&mut data, &shape);
        let mut a: Vec<Complex64> = (0..8).map(|i| Complex64::new(((i as f64) * 0.3).sin(), 0.0)).collect();
        let mut b: Vec<Complex64> = (0..6).map(|j| Complex64::new(((j as f64) * 0.7).cos(), 0.0)).collect();
        fft_nd(&mut a, &[8]);
        fft_nd(&mut b, &[6]);
        for p in 0..48 {
            assert!((data[p] - a[p / 6] * b[p % 6]).norm() < 1e-12);
        }
    }
}
