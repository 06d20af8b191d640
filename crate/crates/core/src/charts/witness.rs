//! Sampled witnesses of the half-space and sphere inequalities used by the
//! tame estimates: each witness evaluates both sides on a seeded family of
//! test functions and reports the largest observed ratio.
//!
//! A witness passes when every ratio is finite, the maximum over `2N`
//! samples exceeds the maximum over the first `N` by at most 25%, and, for
//! inequalities with an explicit constant, that constant is respected.

use rand::Rng;
use serde::Serialize;

use super::atlas::{Atlas, AtlasOptions};
use super::cutoff::CutoffFamily;
use super::fourier::BoxSamples;
use super::halfspace::{Extension, HalfBox, HalfSpaceField};
use super::norms::{chart_norms, x_seminorms, ChartNormOptions, XNormOptions};
use crate::ball::BallSpace;
use crate::error::Result;
use crate::sampling::{seeded_rng, FieldFamily};
use crate::spectral::{AngularGrid, BoundaryField, Dim};

/// Sample count and seed of the suite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct WitnessConfig {
    /// `N`; every witness is evaluated on `2N` samples.
    pub samples: usize,
    pub seed: u64,
}

impl Default for WitnessConfig {
    fn default() -> Self {
        Self { samples: 24, seed: 2024 }
    }
}

/// One line of the witness report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessRow {
    pub id: String,
    pub params: String,
    /// Samples evaluated (`2N`).
    pub samples: usize,
    /// Largest ratio over the first `N` samples.
    pub max_ratio_half: f64,
    /// Largest ratio over all `2N` samples.
    pub max_ratio: f64,
    /// Explicit constant the ratio must not exceed, if the inequality has one.
    pub bound: Option<f64>,
    pub pass: bool,
}

impl WitnessRow {
    fn from_ratios(id: &str, params: String, ratios: &[f64], bound: Option<f64>) -> Self {
        let half = ratios.len() / 2;
        let max_of = |r: &[f64]| r.iter().fold(0.0f64, |a, &b| if b.is_nan() { f64::NAN } else { a.max(b) });
        let max_ratio_half = max_of(&ratios[..half]);
        let max_ratio = max_of(ratios);
        let finite = ratios.iter().all(|r| r.is_finite());
        let stable = max_ratio <= 1.25 * max_ratio_half;
        let bounded = bound.is_none_or(|b| max_ratio <= b);
        Self {
            id: id.to_string(),
            params,
            samples: ratios.len(),
            max_ratio_half,
            max_ratio,
            bound,
            pass: finite && stable && bounded,
        }
    }

    /// Stability of the maximum under doubling, `max_2N / max_N - 1`.
    pub fn doubling_change(&self) -> f64 {
        self.max_ratio / self.max_ratio_half - 1.0
    }
}

/// The full witness report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessReport {
    pub config: WitnessConfig,
    pub rows: Vec<WitnessRow>,
}

impl WitnessReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    /// The first row whose id starts with `prefix` and whose parameters
    /// equal `params`.
    pub fn find(&self, prefix: &str, params: &str) -> Option<&WitnessRow> {
        self.rows.iter().find(|r| r.id.starts_with(prefix) && r.params == params)
    }
}

fn bump(t: f64) -> f64 {
    if t.abs() < 1.0 {
        (-1.0 / (1.0 - t * t)).exp()
    } else {
        0.0
    }
}

/// Sum of three modulated bumps on `ℝ²₊`, nonzero on `x_2 = 0`, supported
/// in `|x_1| < 0.4`, `x_2 < 0.2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HalfPlaneBumps {
    terms: [[f64; 7]; 3],
}

impl HalfPlaneBumps {
    pub fn sample<R: Rng>(rng: &mut R) -> Self {
        let mut terms = [[0.0; 7]; 3];
        for t in terms.iter_mut() {
            *t = [
                rng.gen_range(-1.0..=1.0),
                rng.gen_range(-0.1..=0.1),
                rng.gen_range(0.15..=0.3),
                rng.gen_range(0.1..=0.2),
                rng.gen_range(0.0..=6.0),
                rng.gen_range(0.0..=1.0),
                rng.gen_range(0.0..=std::f64::consts::TAU),
            ];
        }
        Self { terms }
    }

    pub fn eval(&self, x: [f64; 3]) -> f64 {
        self.terms
            .iter()
            .map(|&[a, c, sig, tau, om, b, ph]| {
                a * bump((x[0] - c) / sig)
                    * bump(x[1] / tau)
                    * (1.0 + b * (std::f64::consts::TAU * om * x[0] + ph).cos())
            })
            .sum()
    }
}

fn half_plane_layout() -> HalfBox {
    HalfBox::new(2, 0.5, 128, 0.5, 128).expect("valid layout")
}

fn trace_norm(layout: HalfBox, f: &HalfPlaneBumps, order: f64) -> Result<f64> {
    let trace: Vec<f64> = (0..layout.n_tangential()).map(|t| f.eval(layout.point(t, 0.0))).collect();
    let b = BoxSamples::new(vec![layout.m], vec![2.0 * layout.half_width], trace)?;
    b.certify_support()?;
    Ok(b.spectrum().sobolev_norm(order))
}

fn sup_norm(layout: HalfBox, f: &HalfPlaneBumps) -> f64 {
    let mut m: f64 = 0.0;
    for t in 0..layout.n_tangential() {
        m = m.max(f.eval(layout.point(t, 0.0)).abs());
        for i in 0..layout.nz {
            m = m.max(f.eval(layout.point(t, layout.normal_node(i))).abs());
        }
    }
    m
}

fn half_plane_samples(cfg: WitnessConfig, stream: u64) -> Vec<HalfPlaneBumps> {
    let mut rng = seeded_rng(cfg.seed ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    (0..2 * cfg.samples).map(|_| HalfPlaneBumps::sample(&mut rng)).collect()
}

fn sphere_samples(cfg: WitnessConfig, stream: u64, dim: Dim, degree: usize) -> Vec<BoundaryField> {
    let mut rng = seeded_rng(cfg.seed ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    FieldFamily {
        dim,
        degree,
        decay: 3.0,
        s_norm: 0.0,
        amplitude: 1.0,
        zero_mean: false,
    }
    .samples(&mut rng, 2 * cfg.samples)
}

/// Trace: `‖w(·,0)‖_{H^{s+r-1/2}} / ‖w‖_{H^{s,r}(ℝ²₊)}`, plus the spread of
/// the maxima over `r` for each `s`.
fn trace_rows(cfg: WitnessConfig, rows: &mut Vec<WitnessRow>) -> Result<()> {
    let layout = half_plane_layout();
    let fs = half_plane_samples(cfg, 1);
    for s in [0.6, 1.0, 1.5] {
        let ext = Extension::for_order(s)?;
        let mut per_r = Vec::new();
        for r in [0.0, 1.0, 2.0] {
            let mut ratios = Vec::new();
            for f in &fs {
                let w = HalfSpaceField::from_fn(layout, |x| f.eval(x))?;
                let full = w.spectrum(ext)?.hsr_norm(s, r);
                ratios.push(trace_norm(layout, f, s + r - 0.5)? / full);
            }
            let row = WitnessRow::from_ratios("trace", format!("s={s} r={r}"), &ratios, None);
            per_r.push(row.max_ratio);
            rows.push(row);
        }
        let lo = per_r.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = per_r.iter().cloned().fold(0.0, f64::max);
        rows.push(WitnessRow {
            id: "trace_r_spread".into(),
            params: format!("s={s}"),
            samples: 2 * cfg.samples,
            max_ratio_half: hi / lo,
            max_ratio: hi / lo,
            bound: None,
            pass: (hi / lo).is_finite(),
        });
    }
    Ok(())
}

/// `‖(2π)^{-1} ∂_1 w‖_{H^{s,r}} / ‖w‖_{H^{s,r+1}}`, at most one.
fn derivative_rows(cfg: WitnessConfig, rows: &mut Vec<WitnessRow>) -> Result<()> {
    let layout = half_plane_layout();
    let fs = half_plane_samples(cfg, 2);
    for s in [0.0, 1.0, 2.0] {
        for r in [0.0, 1.0] {
            let ext = Extension::for_order(s)?;
            let mut ratios = Vec::new();
            for f in &fs {
                let sp = HalfSpaceField::from_fn(layout, |x| f.eval(x))?.spectrum(ext)?;
                let top = sp.norm_with(|xi| xi[0] * xi[0] * super::fourier::hsr_multiplier(xi, s, r));
                ratios.push(top / sp.hsr_norm(s, r + 1.0));
            }
            rows.push(WitnessRow::from_ratios(
                "partial_tangential",
                format!("s={s} r={r}"),
                &ratios,
                Some(1.0 + 1e-10),
            ));
        }
    }
    Ok(())
}

/// Product estimate in `H^{1,r}(ℝ²₊)` with `r₀ = 0.75`: the one-term form
/// for `r ≤ r₀` and the two-term form for `r > r₀`.
fn product_rows(cfg: WitnessConfig, rows: &mut Vec<WitnessRow>) -> Result<()> {
    let layout = half_plane_layout();
    let us = half_plane_samples(cfg, 3);
    let vs = half_plane_samples(cfg, 4);
    let r0 = 0.75;
    let ext = Extension::Reflection;
    for r in [0.0, 0.5, 1.0, 2.0] {
        let mut ratios = Vec::new();
        for (u, v) in us.iter().zip(&vs) {
            let su = HalfSpaceField::from_fn(layout, |x| u.eval(x))?.spectrum(ext)?;
            let sv = HalfSpaceField::from_fn(layout, |x| v.eval(x))?.spectrum(ext)?;
            let suv = HalfSpaceField::from_fn(layout, |x| u.eval(x) * v.eval(x))?.spectrum(ext)?;
            let lhs = suv.hsr_norm(1.0, r);
            let mut rhs = su.hsr_norm(1.0, r0) * sv.hsr_norm(1.0, r);
            if r > r0 {
                rhs += su.hsr_norm(1.0, r) * sv.hsr_norm(1.0, r0);
            }
            ratios.push(lhs / rhs);
        }
        let id = if r > r0 { "product_half_space_two_term" } else { "product_half_space_one_term" };
        rows.push(WitnessRow::from_ratios(id, format!("r0={r0} r={r}"), &ratios, None));
    }
    Ok(())
}

/// `‖w‖_{L^∞} / ‖w‖_{H^{s,r}(ℝ²₊)}` for `s > 1/2`, `s + r > 1`.
fn embedding_half_rows(cfg: WitnessConfig, rows: &mut Vec<WitnessRow>) -> Result<()> {
    let layout = half_plane_layout();
    let fs = half_plane_samples(cfg, 5);
    for (s, r) in [(1.0, 0.5), (0.6, 1.0), (1.5, 0.0)] {
        let ext = Extension::for_order(s)?;
        let mut ratios = Vec::new();
        for f in &fs {
            let sp = HalfSpaceField::from_fn(layout, |x| f.eval(x))?.spectrum(ext)?;
            ratios.push(sup_norm(layout, f) / sp.hsr_norm(s, r));
        }
        rows.push(WitnessRow::from_ratios("embedding_half_space", format!("s={s} r={r}"), &ratios, None));
    }
    Ok(())
}

/// Composition with the extended transition map of two neighbouring charts
/// of the circle: `f(x') = a + A x' + g(x')`.
fn composition_rows(cfg: WitnessConfig, rows: &mut Vec<WitnessRow>) -> Result<()> {
    let atlas = Atlas::new(Dim::Two, AtlasOptions::default())?;
    let (l, j) = (1, 0);
    let layout = HalfBox::new(2, 1.0, 256, 0.5, 128)?;
    let g_vals: Vec<f64> = (0..layout.n_tangential())
        .map(|t| {
            let y = layout.tangential_point(t);
            atlas.transition_nonlinear_part(l, j, y).map(|v| v[0])
        })
        .collect::<Result<_>>()?;
    let g_box = BoxSamples::new(vec![layout.m], vec![2.0 * layout.half_width], g_vals)?;
    g_box.certify_support()?;
    let g_spec = g_box.spectrum();
    let fs = half_plane_samples(cfg, 6);
    let r0 = 0.75;
    for s in [0.0, 1.0] {
        for r in [0.0, 1.0] {
            let ext = Extension::for_order(s)?;
            let g_norm = g_spec.sobolev_norm(1.0 + r0 + r + s);
            let mut ratios = Vec::new();
            for f in &fs {
                let su = HalfSpaceField::from_fn(layout, |x| f.eval(x))?.spectrum(ext)?;
                let sc = HalfSpaceField::from_fn(layout, |x| {
                    let y = atlas.transition_extended(l, j, [x[0], 0.0]).map(|v| v[0]).unwrap_or(f64::NAN);
                    f.eval([y, x[1], 0.0])
                })?
                .spectrum(ext)?;
                ratios.push(sc.hsr_norm(s, r) / (su.hsr_norm(s, r) + g_norm * su.hsr_norm(s, 0.0)));
            }
            rows.push(WitnessRow::from_ratios("composition", format!("s={s} r={r} r0={r0}"), &ratios, None));
        }
    }
    Ok(())
}

/// Sphere items on `S²` with spectral norms, and interpolation for both the
/// spectral and the chart norm on `S¹`.
fn sphere_rows(cfg: WitnessConfig, rows: &mut Vec<WitnessRow>) -> Result<()> {
    let dim = Dim::Three;
    let s0 = 1.5;
    let us = sphere_samples(cfg, 7, dim, 10);
    let vs = sphere_samples(cfg, 8, dim, 10);
    let products: Vec<BoundaryField> = us.iter().zip(&vs).map(|(u, v)| u.multiply(v)).collect::<Result<_>>()?;
    for s in [0.5, 1.5, 2.0, 3.0] {
        let ratios: Vec<f64> = us
            .iter()
            .zip(&vs)
            .zip(&products)
            .map(|((u, v), uv)| {
                let mut rhs = u.sobolev_norm(s0) * v.sobolev_norm(s);
                if s > s0 {
                    rhs += u.sobolev_norm(s) * v.sobolev_norm(s0);
                }
                uv.sobolev_norm(s) / rhs
            })
            .collect();
        rows.push(WitnessRow::from_ratios("product_sphere", format!("s0={s0} s={s}"), &ratios, None));
    }
    for m in [2usize, 3] {
        for s in [1.0, 3.0] {
            let mut ratios = Vec::new();
            for u in &us {
                let mut p = u.clone();
                for _ in 1..m {
                    p = p.multiply(u)?;
                }
                let rhs = u.sobolev_norm(s0).powi(m as i32 - 1) * u.sobolev_norm(s);
                ratios.push(p.sobolev_norm(s) / rhs);
            }
            rows.push(WitnessRow::from_ratios("power_sphere", format!("m={m} s0={s0} s={s}"), &ratios, None));
        }
    }
    for s in [0.0, 1.0, 2.0, 3.0] {
        let ratios: Vec<f64> = us
            .iter()
            .map(|u| {
                let grad = u.tangential_gradient();
                let lhs = grad.iter().map(|g| g.sobolev_norm(s).powi(2)).sum::<f64>().sqrt();
                lhs / (u.sobolev_norm(s + 1.0) + u.sobolev_norm(1.0))
            })
            .collect();
        rows.push(WitnessRow::from_ratios("gradient_sphere", format!("s={s}"), &ratios, None));
    }
    let grid = AngularGrid::new(dim, 40, 81);
    for s in [1.25, 2.0] {
        let mut ratios = Vec::new();
        for u in &us {
            let vals = u.synth(&grid)?;
            let sup = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            ratios.push(sup / u.sobolev_norm(s));
        }
        rows.push(WitnessRow::from_ratios("embedding_sphere", format!("s0={s}"), &ratios, None));
    }
    let (s_lo, s_hi) = (0.0, 2.0);
    for theta in [0.25, 0.5, 0.75] {
        let s = s_lo * (1.0 - theta) + s_hi * theta;
        let ratios: Vec<f64> = us
            .iter()
            .map(|u| u.sobolev_norm(s) / (u.sobolev_norm(s_lo).powf(1.0 - theta) * u.sobolev_norm(s_hi).powf(theta)))
            .collect();
        rows.push(WitnessRow::from_ratios(
            "interpolation_spectral",
            format!("s0={s_lo} s1={s_hi} theta={theta}"),
            &ratios,
            Some(1.0 + 1e-12),
        ));
    }
    let atlas = Atlas::new(Dim::Two, AtlasOptions::default())?;
    let circle = sphere_samples(cfg, 9, Dim::Two, 12);
    let thetas = [0.25, 0.5, 0.75];
    let mut orders = vec![s_lo, s_hi];
    orders.extend(thetas.iter().map(|t| s_lo * (1.0 - t) + s_hi * t));
    let cn = chart_norms(&circle, &atlas, &orders, ChartNormOptions::default())?;
    for (k, theta) in thetas.iter().enumerate() {
        let ratios: Vec<f64> = cn
            .iter()
            .map(|c| c[2 + k] / (c[0].powf(1.0 - theta) * c[1].powf(*theta)))
            .collect();
        rows.push(WitnessRow::from_ratios(
            "interpolation_chart",
            format!("s0={s_lo} s1={s_hi} theta={theta}"),
            &ratios,
            Some(1.0 + 1e-12),
        ));
    }
    Ok(())
}

/// `|u|_{X^{0,0}_k} / ‖u‖_{L²(B₁)}` and its starred variant for
/// `k ∈ {0, 1, 2, 3}` on harmonic extensions of random circle fields.
fn low_norm_rows(cfg: WitnessConfig, rows: &mut Vec<WitnessRow>) -> Result<()> {
    let dim = Dim::Two;
    let atlas = Atlas::new(dim, AtlasOptions::default())?;
    let cutoffs = CutoffFamily::new(atlas.delta, 4);
    let space = BallSpace::with_default_radial(dim, 12)?;
    let psis = sphere_samples(cfg, 10, dim, 12);
    let mut fields = Vec::new();
    for psi in &psis {
        let u = space.harmonic_extension(psi)?;
        let samples = space.sample(&u)?;
        let l2 = samples
            .values
            .iter()
            .enumerate()
            .map(|(p, v)| space.weight(p) * v * v)
            .sum::<f64>()
            .sqrt();
        fields.push((u, l2));
    }
    let opts = XNormOptions::default();
    for starred in [false, true] {
        for k in 0..4 {
            let mut ratios = Vec::new();
            for (u, l2) in &fields {
                let x = x_seminorms(&space, u, &atlas, &cutoffs, k, starred, &[(0.0, 0.0)], opts)?[0];
                ratios.push(x / l2);
            }
            let id = if starred { "low_norm_x_star" } else { "low_norm_x" };
            rows.push(WitnessRow::from_ratios(id, format!("s=0 r=0 k={k}"), &ratios, None));
        }
    }
    Ok(())
}

/// Runs every witness.
pub fn inequality_witness_suite(cfg: WitnessConfig) -> Result<WitnessReport> {
    let mut rows = Vec::new();
    trace_rows(cfg, &mut rows)?;
    derivative_rows(cfg, &mut rows)?;
    product_rows(cfg, &mut rows)?;
    embedding_half_rows(cfg, &mut rows)?;
    composition_rows(cfg, &mut rows)?;
    sphere_rows(cfg, &mut rows)?;
    low_norm_rows(cfg, &mut rows)?;
    Ok(WitnessReport { config: cfg, rows })
}
