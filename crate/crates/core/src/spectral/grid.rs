//! Angular quadrature grids with precomputed basis tables.
//!
//! The circle uses equispaced nodes. The sphere uses Gauss-Legendre nodes in
//! `cos θ` crossed with equispaced nodes in `φ`, and transforms are separable:
//! a Fourier sum over `φ` on each latitude ring followed by an associated
//! Legendre sum over the rings.

use std::f64::consts::PI;

use super::modes::Dim;
use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;

/// Node layout and basis tables of an angular grid.
#[derive(Debug, Clone)]
enum Tables {
    Circle {
        theta: Vec<f64>,
        /// `cos(kθ_j)` and `sin(kθ_j)` stored as `j * (band + 1) + k`.
        cos: Vec<f64>,
        sin: Vec<f64>,
    },
    Sphere {
        n_theta: usize,
        n_phi: usize,
        /// Ring quadrature weights (Gauss-Legendre in `cos θ`).
        ring_weight: Vec<f64>,
        sin_theta: Vec<f64>,
        /// Normalized `Λ_lm(θ_i)` including the `√2` of the real basis for
        /// `m > 0`, stored as `i * n_tri + tri(l, m)`.
        leg: Vec<f64>,
        /// `dΛ_lm/dθ` with the same layout.
        dleg: Vec<f64>,
        /// `cos(mφ_j)` and `sin(mφ_j)` stored as `j * (band + 1) + m`.
        cos: Vec<f64>,
        sin: Vec<f64>,
    },
}

/// Quadrature grid on the unit circle or unit sphere.
#[derive(Debug, Clone)]
pub struct AngularGrid {
    dim: Dim,
    band: usize,
    tables: Tables,
    points: Vec<[f64; 3]>,
    e_theta: Vec<[f64; 3]>,
    e_phi: Vec<[f64; 3]>,
    weights: Vec<f64>,
}

#[inline]
fn tri(l: usize, m: usize) -> usize {
    l * (l + 1) / 2 + m
}

/// Normalized associated Legendre functions without the Condon-Shortley phase
/// and their `θ` derivatives, for `0 ≤ m ≤ l ≤ lmax`, triangular layout.
///
/// The returned values already include the `√2` factor used by the real basis
/// for `m > 0`, so `Y_{l,m} = Λ_lm cos mφ` and `Y_{l,-m} = Λ_lm sin mφ`.
pub(crate) fn real_legendre(lmax: usize, cos_t: f64, sin_t: f64) -> (Vec<f64>, Vec<f64>) {
    let n_tri = tri(lmax, lmax) + 1;
    let ext = lmax + 1;
    // Work one degree beyond lmax so the ladder formula for the derivative has
    // the `m + 1` neighbour available.
    let mut lam = vec![0.0; tri(ext, ext) + 1];
    lam[0] = 1.0 / (4.0 * PI).sqrt();
    for m in 1..=ext {
        let mf = m as f64;
        lam[tri(m, m)] = ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * sin_t * lam[tri(m - 1, m - 1)];
    }
    for m in 0..ext {
        let mf = m as f64;
        lam[tri(m + 1, m)] = (2.0 * mf + 3.0).sqrt() * cos_t * lam[tri(m, m)];
        for l in (m + 2)..=ext {
            let lf = l as f64;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0).powi(2) - mf * mf) / (4.0 * (lf - 1.0).powi(2) - 1.0)).sqrt();
            lam[tri(l, m)] = a * (cos_t * lam[tri(l - 1, m)] - b * lam[tri(l - 2, m)]);
        }
    }
    let mut val = vec![0.0; n_tri];
    let mut der = vec![0.0; n_tri];
    for l in 0..=lmax {
        let lf = l as f64;
        for m in 0..=l {
            let mf = m as f64;
            let up = if m < l { lam[tri(l, m + 1)] } else { 0.0 };
            let d = if m == 0 {
                -(lf * (lf + 1.0)).sqrt() * up
            } else {
                0.5 * (((lf + mf) * (lf - mf + 1.0)).sqrt() * lam[tri(l, m - 1)]
                    - ((lf - mf) * (lf + mf + 1.0)).sqrt() * up)
            };
            let scale = if m > 0 { std::f64::consts::SQRT_2 } else { 1.0 };
            val[tri(l, m)] = scale * lam[tri(l, m)];
            der[tri(l, m)] = scale * d;
        }
    }
    (val, der)
}

impl AngularGrid {
    /// Grid whose tables cover degrees `≤ band` and whose quadrature integrates
    /// polynomials (trigonometric or spherical) of degree `≤ exact_degree`.
    pub fn new(dim: Dim, band: usize, exact_degree: usize) -> Self {
        match dim {
            Dim::Two => Self::circle((2 * band + 2).max(exact_degree + 1), band),
            Dim::Three => {
                let n_theta = (band + 1).max((exact_degree + 2) / 2);
                let n_phi = (2 * band + 2).max(exact_degree + 1);
                Self::sphere(n_theta, n_phi, band)
            }
        }
    }

    /// Minimal grid for analysis of fields of degree `≤ l`.
    pub fn for_degree(dim: Dim, l: usize) -> Self {
        Self::new(dim, l, 2 * l + 1)
    }

    /// Equispaced circle grid with `n` nodes.
    pub fn circle(n: usize, band: usize) -> Self {
        let theta: Vec<f64> = (0..n).map(|j| 2.0 * PI * j as f64 / n as f64).collect();
        let w = 2.0 * PI / n as f64;
        let mut cos = vec![0.0; n * (band + 1)];
        let mut sin = vec![0.0; n * (band + 1)];
        for j in 0..n {
            for k in 0..=band {
                // Reduce the angle exactly on the node lattice before evaluating.
                let a = 2.0 * PI * ((k * j) % n) as f64 / n as f64;
                cos[j * (band + 1) + k] = a.cos();
                sin[j * (band + 1) + k] = a.sin();
            }
        }
        let points = theta.iter().map(|t| [t.cos(), t.sin(), 0.0]).collect();
        let e_theta = theta.iter().map(|t| [-t.sin(), t.cos(), 0.0]).collect();
        Self {
            dim: Dim::Two,
            band,
            tables: Tables::Circle { theta, cos, sin },
            points,
            e_theta,
            e_phi: Vec::new(),
            weights: vec![w; n],
        }
    }

    /// Gauss-Legendre by equispaced sphere grid.
    pub fn sphere(n_theta: usize, n_phi: usize, band: usize) -> Self {
        let (x, wx) = gauss_legendre(n_theta);
        // Order rings from the north pole downwards.
        let mu: Vec<f64> = x.iter().rev().copied().collect();
        let ring_weight: Vec<f64> = wx.iter().rev().copied().collect();
        let sin_theta: Vec<f64> = mu.iter().map(|m| (1.0 - m * m).max(0.0).sqrt()).collect();
        let n_tri = tri(band, band) + 1;
        let mut leg = vec![0.0; n_theta * n_tri];
        let mut dleg = vec![0.0; n_theta * n_tri];
        for i in 0..n_theta {
            let (v, d) = real_legendre(band, mu[i], sin_theta[i]);
            leg[i * n_tri..(i + 1) * n_tri].copy_from_slice(&v);
            dleg[i * n_tri..(i + 1) * n_tri].copy_from_slice(&d);
        }
        let mut cos = vec![0.0; n_phi * (band + 1)];
        let mut sin = vec![0.0; n_phi * (band + 1)];
        for j in 0..n_phi {
            for m in 0..=band {
                let a = 2.0 * PI * ((m * j) % n_phi) as f64 / n_phi as f64;
                cos[j * (band + 1) + m] = a.cos();
                sin[j * (band + 1) + m] = a.sin();
            }
        }
        let dphi = 2.0 * PI / n_phi as f64;
        let mut points = Vec::with_capacity(n_theta * n_phi);
        let mut e_theta = Vec::with_capacity(n_theta * n_phi);
        let mut e_phi = Vec::with_capacity(n_theta * n_phi);
        let mut weights = Vec::with_capacity(n_theta * n_phi);
        for i in 0..n_theta {
            let (ct, st) = (mu[i], sin_theta[i]);
            for j in 0..n_phi {
                let (sp, cp) = (dphi * j as f64).sin_cos();
                points.push([st * cp, st * sp, ct]);
                e_theta.push([ct * cp, ct * sp, -st]);
                e_phi.push([-sp, cp, 0.0]);
                weights.push(ring_weight[i] * dphi);
            }
        }
        Self {
            dim: Dim::Three,
            band,
            tables: Tables::Sphere {
                n_theta,
                n_phi,
                ring_weight,
                sin_theta,
                leg,
                dleg,
                cos,
                sin,
            },
            points,
            e_theta,
            e_phi,
            weights,
        }
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    /// Largest degree covered by the basis tables.
    pub fn band(&self) -> usize {
        self.band
    }

    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Unit vectors of the nodes (third component zero on the circle).
    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    /// Unit tangent `e_θ` at each node (the counter-clockwise tangent on the circle).
    pub fn e_theta(&self) -> &[[f64; 3]] {
        &self.e_theta
    }

    /// Unit tangent `e_φ` at each node (empty on the circle).
    pub fn e_phi(&self) -> &[[f64; 3]] {
        &self.e_phi
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `(n_theta, n_phi)` for sphere grids and `(n, 1)` for circle grids.
    pub fn shape(&self) -> (usize, usize) {
        match &self.tables {
            Tables::Circle { theta, .. } => (theta.len(), 1),
            Tables::Sphere { n_theta, n_phi, .. } => (*n_theta, *n_phi),
        }
    }

    /// Checks that fields of degree `l` are resolved: at least `2l + 2` nodes
    /// per full circle of angle, which for the sphere means `n_phi ≥ 2l + 2`
    /// and `n_theta ≥ l + 1`.
    pub fn check_resolution(&self, l: usize) -> Result<()> {
        if l > self.band {
            return Err(Error::Resolution(format!(
                "degree {l} exceeds the grid band {}",
                self.band
            )));
        }
        let (a, b) = self.shape();
        let ok = match self.dim {
            Dim::Two => a >= 2 * l + 2,
            Dim::Three => b >= 2 * l + 2 && a > l,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Resolution(format!(
                "grid {a}x{b} cannot resolve degree {l}"
            )))
        }
    }

    /// Values at the nodes of the field with coefficients `c` of degree `l`.
    pub fn synth(&self, c: &[f64], l: usize) -> Vec<f64> {
        debug_assert!(l <= self.band && c.len() == self.dim.n_modes(l));
        match &self.tables {
            Tables::Circle { theta, cos, sin } => {
                let b = self.band + 1;
                let s0 = 1.0 / (2.0 * PI).sqrt();
                let s1 = 1.0 / PI.sqrt();
                (0..theta.len())
                    .map(|j| {
                        let row = j * b;
                        let mut v = c[0] * s0;
                        for k in 1..=l {
                            v += s1 * (c[2 * k - 1] * cos[row + k] + c[2 * k] * sin[row + k]);
                        }
                        v
                    })
                    .collect()
            }
            Tables::Sphere { .. } => {
                let (fc, fs) = self.rings_from_coeffs(c, l, false);
                self.rings_to_nodes(&fc, &fs, l)
            }
        }
    }

    /// Quadrature projection of nodal values onto modes of degree `≤ l`.
    pub fn analyze(&self, values: &[f64], l: usize) -> Vec<f64> {
        debug_assert!(l <= self.band && values.len() == self.len());
        match &self.tables {
            Tables::Circle { theta, cos, sin } => {
                let b = self.band + 1;
                let w = 2.0 * PI / theta.len() as f64;
                let s0 = w / (2.0 * PI).sqrt();
                let s1 = w / PI.sqrt();
                let mut c = vec![0.0; 2 * l + 1];
                for (j, &v) in values.iter().enumerate() {
                    let row = j * b;
                    c[0] += s0 * v;
                    for k in 1..=l {
                        c[2 * k - 1] += s1 * v * cos[row + k];
                        c[2 * k] += s1 * v * sin[row + k];
                    }
                }
                c
            }
            Tables::Sphere { .. } => {
                let (ac, asn) = self.nodes_to_rings(values, l);
                self.rings_to_coeffs(&ac, &asn, l, false)
            }
        }
    }

    /// Tangential derivatives at the nodes.
    ///
    /// Returns `(∂_θ f, (1/sin θ) ∂_φ f)` on the sphere and `(∂_θ f, [])` on
    /// the circle, so that `∇_S f = a e_θ + b e_φ`.
    pub fn synth_tangent(&self, c: &[f64], l: usize) -> (Vec<f64>, Vec<f64>) {
        debug_assert!(l <= self.band && c.len() == self.dim.n_modes(l));
        match &self.tables {
            Tables::Circle { theta, cos, sin } => {
                let b = self.band + 1;
                let s1 = 1.0 / PI.sqrt();
                let d = (0..theta.len())
                    .map(|j| {
                        let row = j * b;
                        let mut v = 0.0;
                        for k in 1..=l {
                            let kf = k as f64;
                            v += s1 * kf * (-c[2 * k - 1] * sin[row + k] + c[2 * k] * cos[row + k]);
                        }
                        v
                    })
                    .collect();
                (d, Vec::new())
            }
            Tables::Sphere { .. } => {
                let (fc, fs) = self.rings_from_coeffs(c, l, true);
                let dtheta = self.rings_to_nodes(&fc, &fs, l);
                let (gc, gs) = self.rings_from_coeffs_phi(c, l);
                let dphi = self.rings_to_nodes(&gc, &gs, l);
                (dtheta, dphi)
            }
        }
    }

    /// Adjoint of [`synth_tangent`](Self::synth_tangent) under the quadrature:
    /// returns `Σ_j w_j (a_j ∂_θY + b_j (1/sin θ) ∂_φY)(x_j)` for every mode.
    pub fn analyze_tangent_adjoint(&self, a: &[f64], b: &[f64], l: usize) -> Vec<f64> {
        debug_assert!(l <= self.band);
        match &self.tables {
            Tables::Circle { theta, cos, sin } => {
                let bb = self.band + 1;
                let w = 2.0 * PI / theta.len() as f64;
                let s1 = w / PI.sqrt();
                let mut c = vec![0.0; 2 * l + 1];
                for (j, &v) in a.iter().enumerate() {
                    let row = j * bb;
                    for k in 1..=l {
                        let kf = k as f64;
                        c[2 * k - 1] -= s1 * kf * v * sin[row + k];
                        c[2 * k] += s1 * kf * v * cos[row + k];
                    }
                }
                c
            }
            Tables::Sphere { .. } => {
                let (ac, asn) = self.nodes_to_rings(a, l);
                let mut c = self.rings_to_coeffs(&ac, &asn, l, true);
                let (bc, bs) = self.nodes_to_rings(b, l);
                let c2 = self.rings_to_coeffs_phi(&bc, &bs, l);
                for (x, y) in c.iter_mut().zip(c2) {
                    *x += y;
                }
                c
            }
        }
    }

    /// Cartesian components of the tangential gradient at the nodes.
    pub fn synth_gradient(&self, c: &[f64], l: usize) -> [Vec<f64>; 3] {
        let (a, b) = self.synth_tangent(c, l);
        let n = self.len();
        let mut out = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        for j in 0..n {
            for d in 0..3 {
                let mut v = a[j] * self.e_theta[j][d];
                if !b.is_empty() {
                    v += b[j] * self.e_phi[j][d];
                }
                out[d][j] = v;
            }
        }
        out
    }

    // Sphere helpers. Ring arrays are laid out as `i * (l + 1) + m`.

    fn sphere_tables(&self) -> (usize, usize, &[f64], &[f64], &[f64], &[f64], &[f64], &[f64]) {
        match &self.tables {
            Tables::Sphere {
                n_theta,
                n_phi,
                ring_weight,
                sin_theta,
                leg,
                dleg,
                cos,
                sin,
            } => (*n_theta, *n_phi, ring_weight, sin_theta, leg, dleg, cos, sin),
            Tables::Circle { .. } => unreachable!("sphere table requested on a circle grid"),
        }
    }

    fn rings_from_coeffs(&self, c: &[f64], l: usize, derivative: bool) -> (Vec<f64>, Vec<f64>) {
        let (nt, _, _, _, leg, dleg, _, _) = self.sphere_tables();
        let table = if derivative { dleg } else { leg };
        let n_tri = tri(self.band, self.band) + 1;
        let mut fc = vec![0.0; nt * (l + 1)];
        let mut fs = vec![0.0; nt * (l + 1)];
        for i in 0..nt {
            let t = &table[i * n_tri..(i + 1) * n_tri];
            for m in 0..=l {
                let mut sc = 0.0;
                let mut ss = 0.0;
                for deg in m..=l {
                    let p = t[tri(deg, m)];
                    sc += p * c[deg * deg + deg + m];
                    if m > 0 {
                        ss += p * c[deg * deg + deg - m];
                    }
                }
                fc[i * (l + 1) + m] = sc;
                fs[i * (l + 1) + m] = ss;
            }
        }
        (fc, fs)
    }

    /// Ring coefficients of `(1/sin θ) ∂_φ f`.
    fn rings_from_coeffs_phi(&self, c: &[f64], l: usize) -> (Vec<f64>, Vec<f64>) {
        let (nt, _, _, sin_theta, leg, _, _, _) = self.sphere_tables();
        let n_tri = tri(self.band, self.band) + 1;
        let mut fc = vec![0.0; nt * (l + 1)];
        let mut fs = vec![0.0; nt * (l + 1)];
        for i in 0..nt {
            let t = &leg[i * n_tri..(i + 1) * n_tri];
            let inv = 1.0 / sin_theta[i];
            for m in 1..=l {
                let mf = m as f64;
                let mut sc = 0.0;
                let mut ss = 0.0;
                for deg in m..=l {
                    let p = t[tri(deg, m)];
                    sc += p * c[deg * deg + deg + m];
                    ss += p * c[deg * deg + deg - m];
                }
                // ∂_φ (a cos mφ + b sin mφ) = m (b cos mφ - a sin mφ).
                fc[i * (l + 1) + m] = mf * inv * ss;
                fs[i * (l + 1) + m] = -mf * inv * sc;
            }
        }
        (fc, fs)
    }

    fn rings_to_nodes(&self, fc: &[f64], fs: &[f64], l: usize) -> Vec<f64> {
        let (nt, np, _, _, _, _, cos, sin) = self.sphere_tables();
        let b = self.band + 1;
        let mut out = vec![0.0; nt * np];
        for i in 0..nt {
            let rc = &fc[i * (l + 1)..(i + 1) * (l + 1)];
            let rs = &fs[i * (l + 1)..(i + 1) * (l + 1)];
            for j in 0..np {
                let row = j * b;
                let mut v = rc[0];
                for m in 1..=l {
                    v += rc[m] * cos[row + m] + rs[m] * sin[row + m];
                }
                out[i * np + j] = v;
            }
        }
        out
    }

    fn nodes_to_rings(&self, values: &[f64], l: usize) -> (Vec<f64>, Vec<f64>) {
        let (nt, np, ring_weight, _, _, _, cos, sin) = self.sphere_tables();
        let b = self.band + 1;
        let dphi = 2.0 * PI / np as f64;
        let mut ac = vec![0.0; nt * (l + 1)];
        let mut asn = vec![0.0; nt * (l + 1)];
        for i in 0..nt {
            let w = ring_weight[i] * dphi;
            let rc = &mut ac[i * (l + 1)..(i + 1) * (l + 1)];
            for j in 0..np {
                let v = w * values[i * np + j];
                let row = j * b;
                for m in 0..=l {
                    rc[m] += v * cos[row + m];
                }
            }
            let rs = &mut asn[i * (l + 1)..(i + 1) * (l + 1)];
            for j in 0..np {
                let v = w * values[i * np + j];
                let row = j * b;
                for m in 1..=l {
                    rs[m] += v * sin[row + m];
                }
            }
        }
        (ac, asn)
    }

    fn rings_to_coeffs(&self, ac: &[f64], asn: &[f64], l: usize, derivative: bool) -> Vec<f64> {
        let (nt, _, _, _, leg, dleg, _, _) = self.sphere_tables();
        let table = if derivative { dleg } else { leg };
        let n_tri = tri(self.band, self.band) + 1;
        let mut c = vec![0.0; (l + 1) * (l + 1)];
        for i in 0..nt {
            let t = &table[i * n_tri..(i + 1) * n_tri];
            for m in 0..=l {
                let a = ac[i * (l + 1) + m];
                let s = asn[i * (l + 1) + m];
                for deg in m..=l {
                    let p = t[tri(deg, m)];
                    c[deg * deg + deg + m] += p * a;
                    if m > 0 {
                        c[deg * deg + deg - m] += p * s;
                    }
                }
            }
        }
        c
    }

    /// Adjoint of the `(1/sin θ) ∂_φ` synthesis.
    fn rings_to_coeffs_phi(&self, ac: &[f64], asn: &[f64], l: usize) -> Vec<f64> {
        let (nt, _, _, sin_theta, leg, _, _, _) = self.sphere_tables();
        let n_tri = tri(self.band, self.band) + 1;
        let mut c = vec![0.0; (l + 1) * (l + 1)];
        for i in 0..nt {
            let t = &leg[i * n_tri..(i + 1) * n_tri];
            let inv = 1.0 / sin_theta[i];
            for m in 1..=l {
                let mf = m as f64;
                let a = ac[i * (l + 1) + m];
                let s = asn[i * (l + 1) + m];
                for deg in m..=l {
                    let p = t[tri(deg, m)] * mf * inv;
                    // cos mode contributes -m sin mφ, sin mode contributes m cos mφ.
                    c[deg * deg + deg + m] -= p * s;
                    c[deg * deg + deg - m] += p * a;
                }
            }
        }
        c
    }
}

/// Value of every basis function of degree `≤ l` at the unit vector `x`.
pub fn basis_at(dim: Dim, l: usize, x: [f64; 3]) -> Vec<f64> {
    match dim {
        Dim::Two => {
            let t = x[1].atan2(x[0]);
            let mut out = vec![0.0; 2 * l + 1];
            out[0] = 1.0 / (2.0 * PI).sqrt();
            let s1 = 1.0 / PI.sqrt();
            for k in 1..=l {
                let a = k as f64 * t;
                out[2 * k - 1] = s1 * a.cos();
                out[2 * k] = s1 * a.sin();
            }
            out
        }
        Dim::Three => {
            let ct = x[2].clamp(-1.0, 1.0);
            let rho = (x[0] * x[0] + x[1] * x[1]).sqrt();
            let st = rho;
            let (cp, sp) = if rho > 0.0 { (x[0] / rho, x[1] / rho) } else { (1.0, 0.0) };
            let (leg, _) = real_legendre(l, ct, st);
            let mut out = vec![0.0; (l + 1) * (l + 1)];
            // cos(mφ), sin(mφ) by the Chebyshev recurrence.
            let mut cm = vec![1.0; l + 1];
            let mut sm = vec![0.0; l + 1];
            for m in 1..=l {
                cm[m] = cm[m - 1] * cp - sm[m - 1] * sp;
                sm[m] = sm[m - 1] * cp + cm[m - 1] * sp;
            }
            for deg in 0..=l {
                for m in 0..=deg {
                    let p = leg[tri(deg, m)];
                    out[deg * deg + deg + m] = p * cm[m];
                    if m > 0 {
                        out[deg * deg + deg - m] = p * sm[m];
                    }
                }
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadrature_weights_sum_to_area() {
        let g2 = AngularGrid::for_degree(Dim::Two, 7);
        let g3 = AngularGrid::for_degree(Dim::Three, 7);
        let s2: f64 = g2.weights().iter().sum();
        let s3: f64 = g3.weights().iter().sum();
        assert!((s2 - 2.0 * PI).abs() < 1e-13);
        assert!((s3 - 4.0 * PI).abs() < 1e-13);
    }

    #[test]
    fn sphere_basis_is_orthonormal() {
        let l = 9;
        let g = AngularGrid::for_degree(Dim::Three, l);
        let n = Dim::Three.n_modes(l);
        for a in 0..n {
            let mut c = vec![0.0; n];
            c[a] = 1.0;
            let vals = g.synth(&c, l);
            let back = g.analyze(&vals, l);
            for b in 0..n {
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((back[b] - expect).abs() < 1e-13, "modes {a} {b}: {}", back[b]);
            }
        }
    }

    #[test]
    fn low_degree_harmonics_have_closed_forms() {
        let g = AngularGrid::for_degree(Dim::Three, 2);
        let mut c = vec![0.0; 9];
        c[Dim::Three.index_of(1, 0)] = 1.0;
        let v = g.synth(&c, 2);
        for (p, val) in g.points().iter().zip(&v) {
            assert!((val - (3.0 / (4.0 * PI)).sqrt() * p[2]).abs() < 1e-14);
        }
        let mut c = vec![0.0; 9];
        c[Dim::Three.index_of(1, 1)] = 1.0;
        let v = g.synth(&c, 2);
        for (p, val) in g.points().iter().zip(&v) {
            assert!((val - (3.0 / (4.0 * PI)).sqrt() * p[0]).abs() < 1e-14);
        }
        let mut c = vec![0.0; 9];
        c[Dim::Three.index_of(2, -2)] = 1.0;
        let v = g.synth(&c, 2);
        for (p, val) in g.points().iter().zip(&v) {
            let exact = 0.5 * (15.0 / PI).sqrt() * p[0] * p[1];
            assert!((val - exact).abs() < 1e-14);
        }
    }

    #[test]
    fn tangent_derivatives_match_finite_differences() {
        let l = 6;
        let g = AngularGrid::for_degree(Dim::Three, l);
        let n = Dim::Three.n_modes(l);
        let c: Vec<f64> = (0..n).map(|i| ((i * 7 + 3) % 11) as f64 / 11.0 - 0.5).collect();
        let (dt, dp) = g.synth_tangent(&c, l);
        let f = |x: [f64; 3]| -> f64 {
            basis_at(Dim::Three, l, x).iter().zip(&c).map(|(a, b)| a * b).sum()
        };
        let h = 1e-5;
        for (j, p) in g.points().iter().enumerate().step_by(17) {
            let et = g.e_theta()[j];
            let ep = g.e_phi()[j];
            let shift = |e: [f64; 3], s: f64| {
                let q = [p[0] + s * e[0], p[1] + s * e[1], p[2] + s * e[2]];
                let r = (q[0] * q[0] + q[1] * q[1] + q[2] * q[2]).sqrt();
                [q[0] / r, q[1] / r, q[2] / r]
            };
            let fd_t = (f(shift(et, h)) - f(shift(et, -h))) / (2.0 * h);
            let fd_p = (f(shift(ep, h)) - f(shift(ep, -h))) / (2.0 * h);
            assert!((fd_t - dt[j]).abs() < 1e-7, "theta {fd_t} {}", dt[j]);
            assert!((fd_p - dp[j]).abs() < 1e-7, "phi {fd_p} {}", dp[j]);
        }
    }

    #[test]
    fn tangent_adjoint_is_transpose() {
        for dim in [Dim::Two, Dim::Three] {
            let l = 5;
            let g = AngularGrid::for_degree(dim, l);
            let n = dim.n_modes(l);
            let c: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
            let (a, b) = g.synth_tangent(&c, l);
            let u: Vec<f64> = (0..g.len()).map(|j| (j as f64 * 0.11).cos()).collect();
            let v: Vec<f64> = if b.is_empty() {
                Vec::new()
            } else {
                (0..g.len()).map(|j| (j as f64 * 0.23).sin()).collect()
            };
            let lhs: f64 = (0..g.len())
                .map(|j| {
                    g.weights()[j] * (a[j] * u[j] + if b.is_empty() { 0.0 } else { b[j] * v[j] })
                })
                .sum();
            let adj = g.analyze_tangent_adjoint(&u, &v, l);
            let rhs: f64 = adj.iter().zip(&c).map(|(x, y)| x * y).sum();
            assert!((lhs - rhs).abs() < 1e-12 * (1.0 + lhs.abs()));
        }
    }
}
