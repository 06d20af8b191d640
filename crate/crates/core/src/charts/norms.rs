//! Chart-based Sobolev norms on the sphere and the localized seminorms
//! `|u|_{X^{s,r}_k}` of ball fields.

use serde::{Deserialize, Serialize};

use super::atlas::Atlas;
use super::cutoff::CutoffFamily;
use super::fourier::BoxSamples;
use super::halfspace::{Extension, HalfBox, HalfSpaceField};
use crate::ball::{BallField, BallSpace};
use crate::error::{Error, Result};
use crate::spectral::basis_at;
use crate::spectral::BoundaryField;

/// Sampling box of the chart norm: `[-a, a)^{n-1}` with `m` cells per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChartNormOptions {
    pub half_width: f64,
    pub m: usize,
}

impl Default for ChartNormOptions {
    fn default() -> Self {
        Self { half_width: 0.25, m: 64 }
    }
}

/// Sampling box of the seminorms `|u|_{X^{s,r}_k}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XNormOptions {
    pub half_width: f64,
    pub m: usize,
    pub depth: f64,
    pub nz: usize,
}

impl Default for XNormOptions {
    fn default() -> Self {
        Self {
            half_width: 0.25,
            m: 32,
            depth: 0.25,
            nz: 64,
        }
    }
}

/// `Σ_j ‖(f ψ_j) ∘ g_j(·, 0)‖_{H^s(ℝ^{n-1})}` for each field and each order
/// `s`, indexed `[field][order]`.
pub fn chart_norms(
    fields: &[BoundaryField],
    atlas: &Atlas,
    orders: &[f64],
    opts: ChartNormOptions,
) -> Result<Vec<Vec<f64>>> {
    let dim = atlas.dim;
    let degree = fields.first().map(|f| f.degree()).unwrap_or(0);
    if fields.iter().any(|f| f.dim() != dim || f.degree() != degree) {
        return Err(Error::Mismatch("chart norms need fields of the atlas dimension and one degree".into()));
    }
    let n = dim.n();
    let layout = HalfBox::new(n, opts.half_width, opts.m, 1.0, 2)?;
    let nt = layout.n_tangential();
    let shape = vec![opts.m; n - 1];
    let lengths = vec![2.0 * opts.half_width; n - 1];
    let mut out = vec![vec![0.0; orders.len()]; fields.len()];
    for j in 0..atlas.len() {
        let mut values = vec![vec![0.0; nt]; fields.len()];
        for t in 0..nt {
            let y = layout.point(t, 0.0);
            let x = atlas.chart_g(j, y)?;
            let w = atlas.psi(j, x);
            if w == 0.0 {
                continue;
            }
            let basis = basis_at(dim, degree, x);
            for (f, vals) in fields.iter().zip(values.iter_mut()) {
                vals[t] = w * f.coeffs().iter().zip(&basis).map(|(a, b)| a * b).sum::<f64>();
            }
        }
        for (vals, row) in values.into_iter().zip(out.iter_mut()) {
            let b = BoxSamples::new(shape.clone(), lengths.clone(), vals)?;
            if b.max_magnitude() == 0.0 {
                continue;
            }
            b.certify_support()?;
            let sp = b.spectrum();
            for (acc, &s) in row.iter_mut().zip(orders) {
                *acc += sp.sobolev_norm(s);
            }
        }
    }
    Ok(out)
}

/// Chart norm of a single field.
pub fn chart_norm(f: &BoundaryField, atlas: &Atlas, s: f64, opts: ChartNormOptions) -> Result<f64> {
    Ok(chart_norms(std::slice::from_ref(f), atlas, &[s], opts)?[0][0])
}

/// The localized function `(u ζ_k ψ_j) ∘ g_j` of chart `j` on the half-box.
pub fn localized_field(
    space: &BallSpace,
    u: &BallField,
    atlas: &Atlas,
    cutoffs: &CutoffFamily,
    j: usize,
    k: usize,
    starred: bool,
    opts: XNormOptions,
) -> Result<HalfSpaceField> {
    let layout = HalfBox::new(atlas.dim.n(), opts.half_width, opts.m, opts.depth, opts.nz)?;
    let n = atlas.dim.n();
    HalfSpaceField::from_fn(layout, |y| {
        let Ok(x) = atlas.chart_g(j, y) else {
            return 0.0;
        };
        let r = 1.0 - y[n - 1];
        let c = cutoffs.eval(k, starred, r);
        if c == 0.0 {
            return 0.0;
        }
        let p = atlas.psi(j, x);
        if p == 0.0 {
            return 0.0;
        }
        c * p * space.eval_at(u, x)
    })
}

/// `|u|_{X^{s,r}_k}` (or its starred variant) for every `(s, r)` in `orders`.
#[allow(clippy::too_many_arguments)]
pub fn x_seminorms(
    space: &BallSpace,
    u: &BallField,
    atlas: &Atlas,
    cutoffs: &CutoffFamily,
    k: usize,
    starred: bool,
    orders: &[(f64, f64)],
    opts: XNormOptions,
) -> Result<Vec<f64>> {
    if space.dim() != atlas.dim {
        return Err(Error::Mismatch("ball space and atlas dimensions differ".into()));
    }
    if k > cutoffs.k_max {
        return Err(Error::Parameter(format!("k = {k} exceeds k_max = {}", cutoffs.k_max)));
    }
    let exts: Vec<Extension> = orders
        .iter()
        .map(|&(s, r)| {
            if r < 0.0 {
                Err(Error::Parameter(format!("tangential order r must be ≥ 0, got {r}")))
            } else {
                Extension::for_order(s)
            }
        })
        .collect::<Result<_>>()?;
    let mut out = vec![0.0; orders.len()];
    for j in 0..atlas.len() {
        let w = localized_field(space, u, atlas, cutoffs, j, k, starred, opts)?;
        if w.is_zero() {
            continue;
        }
        let mut cache: Vec<(Extension, super::fourier::Spectrum)> = Vec::new();
        for ((acc, &(s, r)), ext) in out.iter_mut().zip(orders).zip(&exts) {
            if !cache.iter().any(|(e, _)| e == ext) {
                cache.push((*ext, w.spectrum(*ext)?));
            }
            let sp = &cache.iter().find(|(e, _)| e == ext).expect("cached").1;
            *acc += sp.hsr_norm(s, r);
        }
    }
    Ok(out)
}

/// `|u|_{X^{s,r}_k}` (or its starred variant).
#[allow(clippy::too_many_arguments)]
pub fn x_seminorm(
    space: &BallSpace,
    u: &BallField,
    atlas: &Atlas,
    cutoffs: &CutoffFamily,
    s: f64,
    r: f64,
    k: usize,
    starred: bool,
    opts: XNormOptions,
) -> Result<f64> {
    Ok(x_seminorms(space, u, atlas, cutoffs, k, starred, &[(s, r)], opts)?[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charts::AtlasOptions;
    use crate::spectral::Dim;

    #[test]
    fn chart_norm_is_zero_on_zero_and_monotone_in_s() {
        let atlas = Atlas::new(Dim::Two, AtlasOptions::default()).unwrap();
        let z = BoundaryField::zeros(Dim::Two, 6);
        assert_eq!(chart_norm(&z, &atlas, 1.0, ChartNormOptions::default()).unwrap(), 0.0);
        let f = BoundaryField::mode(Dim::Two, 6, 3, 3, 1.0);
        let v = chart_norms(&[f], &atlas, &[0.0, 1.0, 2.0], ChartNormOptions::default()).unwrap();
        assert!(v[0][0] > 0.0 && v[0][0] <= v[0][1] && v[0][1] <= v[0][2]);
    }

    #[test]
    fn x_seminorm_vanishes_on_zero_and_grows_with_r() {
        let atlas = Atlas::new(Dim::Two, AtlasOptions::default()).unwrap();
        let cut = CutoffFamily::new(atlas.delta, 4);
        let space = BallSpace::with_default_radial(Dim::Two, 6).unwrap();
        let z = space.zeros();
        let o = XNormOptions::default();
        assert_eq!(x_seminorm(&space, &z, &atlas, &cut, 0.0, 0.0, 1, false, o).unwrap(), 0.0);
        let psi = BoundaryField::mode(Dim::Two, 6, 2, 2, 1.0);
        let u = space.harmonic_extension(&psi).unwrap();
        let v = x_seminorms(&space, &u, &atlas, &cut, 1, false, &[(1.0, 0.0), (1.0, 1.0), (1.0, 2.0)], o).unwrap();
        assert!(v[0] > 0.0 && v[0] <= v[1] && v[1] <= v[2]);
    }
}
