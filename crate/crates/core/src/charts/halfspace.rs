//! Compactly supported functions on the half-space `ℝⁿ₊ = {x_n > 0}` and
//! their non-isotropic `H^{s,r}` norms through explicit extensions.

use serde::Serialize;

use super::fourier::{BoxSamples, Spectrum};
use crate::error::{Error, Result};

/// Extension of a half-space function to the whole space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Extension {
    /// Zero for `x_n < 0`. Realizes the infimum for `s = 0`.
    Zero,
    /// `w(x', |x_n|)`, bounded on `H^{s,r}` for `s ≤ 1` with constant `√2`.
    Reflection,
    /// `-3 w(x', -x_n) + 4 w(x', -x_n/2)` for `x_n < 0`, which is `C¹`
    /// across `x_n = 0` and bounded on `H^{s,r}` for `s ≤ 2`.
    Hestenes,
}

impl Extension {
    /// The extension used for the order `s`.
    pub fn for_order(s: f64) -> Result<Self> {
        if s == 0.0 {
            Ok(Self::Zero)
        } else if s > 0.0 && s <= 1.0 {
            Ok(Self::Reflection)
        } else if s > 1.0 && s <= 2.0 {
            Ok(Self::Hestenes)
        } else {
            Err(Error::Parameter(format!("half-space norms need 0 ≤ s ≤ 2, got {s}")))
        }
    }
}

/// Sampling layout of a [`HalfSpaceField`]: the tangential box
/// `[-a, a)^{n-1}` with `m` cells per axis and the normal slab `(0, D)` with
/// `nz` cells sampled at their midpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HalfBox {
    pub n: usize,
    pub half_width: f64,
    pub m: usize,
    pub depth: f64,
    pub nz: usize,
}

impl HalfBox {
    pub fn new(n: usize, half_width: f64, m: usize, depth: f64, nz: usize) -> Result<Self> {
        if !(n == 2 || n == 3) {
            return Err(Error::Dimension(n));
        }
        if !(half_width > 0.0 && depth > 0.0) || m < 4 || nz < 2 {
            return Err(Error::Parameter("half-box needs positive extents and at least 4 × 2 cells".into()));
        }
        Ok(Self {
            n,
            half_width,
            m,
            depth,
            nz,
        })
    }

    pub fn tangential_step(&self) -> f64 {
        2.0 * self.half_width / self.m as f64
    }

    pub fn normal_step(&self) -> f64 {
        self.depth / self.nz as f64
    }

    /// Number of tangential points.
    pub fn n_tangential(&self) -> usize {
        self.m.pow(self.n as u32 - 1)
    }

    /// Tangential point `t` (row-major over `n - 1` axes).
    pub fn tangential_point(&self, t: usize) -> [f64; 2] {
        let h = self.tangential_step();
        let c = |i: usize| -self.half_width + h * i as f64;
        if self.n == 2 {
            [c(t), 0.0]
        } else {
            [c(t / self.m), c(t % self.m)]
        }
    }

    /// Point `(x', x_n)` as a `[f64; 3]` with `x_n` in entry `n - 1`.
    pub fn point(&self, t: usize, xn: f64) -> [f64; 3] {
        let y = self.tangential_point(t);
        let mut p = [0.0; 3];
        p[..self.n - 1].copy_from_slice(&y[..self.n - 1]);
        p[self.n - 1] = xn;
        p
    }

    /// Midpoint of normal cell `i`.
    pub fn normal_node(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.normal_step()
    }
}

/// Samples of `w` at `(x', x_n)` and at `(x', x_n / 2)` on a [`HalfBox`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HalfSpaceField {
    pub layout: HalfBox,
    /// Index `t · nz + i` for tangential point `t` and normal cell `i`.
    pub values: Vec<f64>,
    pub dilated: Vec<f64>,
}

impl HalfSpaceField {
    pub fn from_fn(layout: HalfBox, f: impl Fn([f64; 3]) -> f64) -> Result<Self> {
        let nt = layout.n_tangential();
        let mut values = Vec::with_capacity(nt * layout.nz);
        let mut dilated = Vec::with_capacity(nt * layout.nz);
        for t in 0..nt {
            for i in 0..layout.nz {
                let z = layout.normal_node(i);
                values.push(f(layout.point(t, z)));
                dilated.push(f(layout.point(t, 0.5 * z)));
            }
        }
        crate::error::check_finite(&values, "half-space samples")?;
        crate::error::check_finite(&dilated, "half-space samples")?;
        Ok(Self {
            layout,
            values,
            dilated,
        })
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == 0.0)
    }

    /// The extended function on the periodic box `[-a, a)^{n-1} × [-D, D)`.
    pub fn extend(&self, ext: Extension) -> BoxSamples {
        let l = self.layout;
        let nz = l.nz;
        let nt = l.n_tangential();
        let mut out = vec![0.0; nt * 2 * nz];
        for t in 0..nt {
            let row = &self.values[t * nz..(t + 1) * nz];
            let dil = &self.dilated[t * nz..(t + 1) * nz];
            let dst = &mut out[t * 2 * nz..(t + 1) * 2 * nz];
            // Cells nz.. hold x_n > 0; cell nz - 1 - i mirrors cell nz + i.
            for i in 0..nz {
                dst[nz + i] = row[i];
                dst[nz - 1 - i] = match ext {
                    Extension::Zero => 0.0,
                    Extension::Reflection => row[i],
                    Extension::Hestenes => -3.0 * row[i] + 4.0 * dil[i],
                };
            }
        }
        let mut shape = vec![l.m; l.n - 1];
        shape.push(2 * nz);
        let mut lengths = vec![2.0 * l.half_width; l.n - 1];
        lengths.push(2.0 * l.depth);
        BoxSamples {
            shape,
            lengths,
            values: out,
        }
    }

    /// Spectrum of the extension, after checking that the extension vanishes
    /// on the boundary cells of the periodic box.
    pub fn spectrum(&self, ext: Extension) -> Result<Spectrum> {
        let b = self.extend(ext);
        if b.max_magnitude() == 0.0 {
            return Ok(b.spectrum());
        }
        b.certify_support()?;
        Ok(b.spectrum())
    }

    /// Extension-surrogate `H^{s,r}(ℝⁿ₊)` norm for `0 ≤ s ≤ 2`, `r ≥ 0`.
    pub fn hsr_norm(&self, s: f64, r: f64) -> Result<f64> {
        if r < 0.0 {
            return Err(Error::Parameter(format!("tangential order r must be ≥ 0, got {r}")));
        }
        let ext = Extension::for_order(s)?;
        Ok(self.spectrum(ext)?.hsr_norm(s, r))
    }

    /// `(∫₀^D ‖w(·, x_n)‖²_{H^r} dx_n)^{1/2}` by the midpoint rule in `x_n`
    /// and tangential FFTs.
    pub fn slice_integral(&self, r: f64) -> Result<f64> {
        let l = self.layout;
        let nz = l.nz;
        let nt = l.n_tangential();
        let mut acc = 0.0;
        for i in 0..nz {
            let slice: Vec<f64> = (0..nt).map(|t| self.values[t * nz + i]).collect();
            let b = BoxSamples::new(vec![l.m; l.n - 1], vec![2.0 * l.half_width; l.n - 1], slice)?;
            let sp = b.spectrum();
            acc += sp.sobolev_norm(r).powi(2) * l.normal_step();
        }
        Ok(acc.sqrt())
    }

    /// Tangential trace samples `w(x', 0)` supplied by the caller, as a box.
    pub fn trace_box(&self, trace: Vec<f64>) -> Result<BoxSamples> {
        let l = self.layout;
        BoxSamples::new(vec![l.m; l.n - 1], vec![2.0 * l.half_width; l.n - 1], trace)
    }
}

/// `Σ_{|α| ≤ 1} ‖∂^α w‖²_{L²(ℝⁿ₊)}` for a function given in closed form,
/// with central differences of step `1e-6` and the midpoint rule on the
/// layout grid.
pub fn first_order_energy(layout: HalfBox, f: impl Fn([f64; 3]) -> f64) -> f64 {
    let h = 1e-6;
    let dv = layout.tangential_step().powi(layout.n as i32 - 1) * layout.normal_step();
    let mut acc = 0.0;
    for t in 0..layout.n_tangential() {
        for i in 0..layout.nz {
            let p = layout.point(t, layout.normal_node(i));
            let v = f(p);
            acc += v * v;
            for a in 0..layout.n {
                let (mut q, mut r) = (p, p);
                q[a] += h;
                r[a] -= h;
                let d = (f(q) - f(r)) / (2.0 * h);
                acc += d * d;
            }
        }
    }
    acc * dv
}
