//! The six experiments. Each fills tables in a [`Run`]; tables are written
//! even when a later step fails, so partial results survive.

use rayon::prelude::*;

use nearsphere::ball::BallSpace;
use nearsphere::charts::{chart_norms, inequality_witness_suite, x_seminorms, Atlas, CutoffFamily};
use nearsphere::dn::{
    derivative_options, dn_apply, dn_apply_converged, fit_rows, fixed_point_solve, tame_derivative_scan, Linearization,
    SeriesOptions, ShapeState, TameSample,
};
use nearsphere::oracles::{
    direct_galerkin_oracle, scaled_sphere_oracle, translated_ball_oracle, translated_elevation_field, OracleName,
};
use nearsphere::sampling::seeded_rng;
use nearsphere::{BoundaryField, Error, Result};

use crate::config::{build_field, Command, FieldSpec, RunConfig};
use crate::output::{Cell, Table};

/// Tables and human-readable summary lines produced by a command.
#[derive(Debug, Default)]
pub struct Run {
    pub tables: Vec<Table>,
    pub summary: Vec<String>,
    /// Set when an iteration stopped before meeting its tolerance.
    pub nonconverged: bool,
}

impl Run {
    fn add(&mut self, table: Table) -> usize {
        self.tables.push(table);
        self.tables.len() - 1
    }

    fn push(&mut self, table: usize, row: Vec<Cell>) {
        self.tables[table].push(row);
    }
}

pub fn run(cfg: &RunConfig, out: &mut Run) -> Result<()> {
    match cfg.command {
        Command::Apply => apply(cfg, out),
        Command::DerivativeCheck => derivative_check(cfg, out),
        Command::Radius => radius(cfg, out),
        Command::Tame => tame(cfg, out),
        Command::Norms => norms(cfg, out),
        Command::Witness => witness(cfg, out),
    }
}

fn space(cfg: &RunConfig) -> Result<BallSpace> {
    BallSpace::new(cfg.dim_tag(), cfg.l, cfg.n_r)
}

fn series_options(cfg: &RunConfig) -> SeriesOptions {
    SeriesOptions {
        m_cap: cfg.m,
        tol: cfg.tol,
    }
}

fn relative(diff: f64, size: f64) -> f64 {
    if size > 0.0 {
        diff / size
    } else {
        diff
    }
}

fn apply(cfg: &RunConfig, out: &mut Run) -> Result<()> {
    let space = space(cfg)?;
    let mut rng = seeded_rng(cfg.seed);
    let h = match cfg.h {
        FieldSpec::Translated { eps } => translated_elevation_field(&space, eps)?,
        ref spec => build_field(spec, cfg, &mut rng)?,
    };
    let psi = build_field(&cfg.psi, cfg, &mut rng)?;
    let res = dn_apply(&space, &h, &psi, series_options(cfg))?;
    let oracle: Option<OracleName> = cfg.oracle.as_deref().map(str::parse).transpose()?;
    let reference = match (oracle, &cfg.h) {
        (None, _) => None,
        (Some(OracleName::ScaledSphere), FieldSpec::Constant { value }) => Some(scaled_sphere_oracle(*value, &psi)?),
        (Some(OracleName::ScaledSphere), _) => Some(scaled_sphere_oracle(0.0, &psi)?),
        (Some(OracleName::TranslatedBall), FieldSpec::Translated { eps }) => {
            Some(translated_ball_oracle(*eps, &psi, cfg.l, cfg.oracle_resolution)?.g)
        }
        (Some(OracleName::TranslatedBall), _) => {
            return Err(Error::Parameter("translated_ball oracle needs a translated h".into()))
        }
        (Some(OracleName::DirectGalerkin), _) => Some(direct_galerkin_oracle(&space, &h, &psi)?.g),
    };

    let dim = cfg.dim_tag();
    let coeffs = out.add(Table::new(
        "apply_coefficients",
        &["index", "degree", "order", "h", "psi", "g", "reference"],
    ));
    for k in 0..dim.n_modes(cfg.l) {
        let (deg, m) = dim.mode_of(k);
        out.push(
            coeffs,
            vec![
                k.into(),
                deg.into(),
                m.into(),
                h.coeffs()[k].into(),
                psi.coeffs()[k].into(),
                res.g.coeffs()[k].into(),
                reference.as_ref().map(|r| r.coeffs()[k]).into(),
            ],
        );
    }
    let terms = out.add(Table::new("apply_terms", &["m", "h1_norm"]));
    for (m, v) in res.series.terms_h1.iter().enumerate() {
        out.push(terms, vec![m.into(), (*v).into()]);
    }
    let summary = out.add(Table::new("apply_summary", &["quantity", "value"]));
    let s = &res.series;
    let mut rows: Vec<(&str, Cell)> = vec![
        ("m_used", s.m_used.into()),
        ("converged", s.converged.into()),
        ("fitted_ratio", s.fitted_ratio.into()),
        ("wellposed_margin", res.wellposed_margin.into()),
        ("g_l2_norm", res.g.l2_norm().into()),
    ];
    if let (Some(name), Some(r)) = (&cfg.oracle, &reference) {
        let err = relative(res.g.sub(r)?.l2_norm(), r.l2_norm());
        rows.push(("oracle", name.as_str().into()));
        rows.push(("oracle_relative_l2_error", err.into()));
        out.summary.push(format!("oracle {name}: relative L2 error {err:.3e}"));
    }
    for (q, v) in rows {
        out.push(summary, vec![q.into(), v]);
    }
    out.summary.push(format!(
        "series: {} terms, converged = {}, fitted ratio {:.4e}, |G psi|_L2 = {:.6e}",
        s.m_used,
        s.converged,
        s.fitted_ratio,
        res.g.l2_norm()
    ));
    if !s.converged {
        out.nonconverged = true;
    }
    Ok(())
}

/// Finite-difference errors of one derivative-check sample.
struct FdSample {
    first: Vec<f64>,
    second: Vec<f64>,
    g2_norm: f64,
    symmetry: f64,
}

fn fd_sample(
    space: &BallSpace,
    t_values: &[f64],
    (h, eta, eta2, psi): &(BoundaryField, BoundaryField, BoundaryField, BoundaryField),
) -> Result<FdSample> {
    let shape = ShapeState::new(space, h)?;
    let opts = derivative_options();
    let u = fixed_point_solve(&shape, psi, opts)?.u;
    let lin = Linearization::new(&shape, psi, u, opts)?;
    let d1 = lin.first(eta)?;
    let d2 = lin.second(eta, eta)?;
    let a = lin.second(eta, eta2)?;
    let b = lin.second(eta2, eta)?;
    let symmetry = relative(a.sub(&b)?.l2_norm(), a.l2_norm());
    let g0 = dn_apply_converged(space, h, psi)?;
    let mut first = Vec::new();
    let mut second = Vec::new();
    for &t in t_values {
        let gp = dn_apply_converged(space, &h.lincomb(1.0, eta, t)?, psi)?;
        let gm = dn_apply_converged(space, &h.lincomb(1.0, eta, -t)?, psi)?;
        first.push(gp.sub(&gm)?.scale(0.5 / t).sub(&d1)?.l2_norm());
        second.push(gp.add(&gm)?.sub(&g0.scale(2.0))?.scale(1.0 / (t * t)).sub(&d2)?.l2_norm());
    }
    Ok(FdSample {
        first,
        second,
        g2_norm: d2.l2_norm(),
        symmetry,
    })
}

fn derivative_check(cfg: &RunConfig, out: &mut Run) -> Result<()> {
    let space = space(cfg)?;
    let mut rng = seeded_rng(cfg.seed);
    let mut inputs = Vec::with_capacity(cfg.samples);
    for _ in 0..cfg.samples {
        let h = build_field(&cfg.h, cfg, &mut rng)?;
        let eta = build_field(&cfg.eta, cfg, &mut rng)?;
        let psi = build_field(&cfg.psi, cfg, &mut rng)?;
        let eta2 = build_field(&cfg.eta, cfg, &mut rng)?;
        inputs.push((h, eta, eta2, psi));
    }
    let results: Vec<Result<FdSample>> = inputs.par_iter().map(|x| fd_sample(&space, &cfg.t_values, x)).collect();

    let fd = out.add(Table::new("derivative_check", &["sample", "order", "t", "error", "ratio"]));
    let sym = out.add(Table::new("derivative_symmetry", &["sample", "g2_l2_norm", "symmetry_defect"]));
    let mut ratios = Vec::new();
    let mut worst_sym = 0.0f64;
    for (i, r) in results.into_iter().enumerate() {
        let r = r?;
        for (order, errs) in [(1usize, &r.first), (2, &r.second)] {
            for (j, (&t, &e)) in cfg.t_values.iter().zip(errs).enumerate() {
                let ratio = if j == 0 {
                    Cell::Empty
                } else {
                    let q = errs[j - 1] / e;
                    ratios.push(q);
                    q.into()
                };
                out.push(fd, vec![i.into(), order.into(), t.into(), e.into(), ratio]);
            }
        }
        worst_sym = worst_sym.max(r.symmetry);
        out.push(sym, vec![i.into(), r.g2_norm.into(), r.symmetry.into()]);
    }
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().cloned().fold(0.0, f64::max);
    out.summary.push(format!(
        "{} samples: FD error ratios in [{lo:.3}, {hi:.3}], worst G'' symmetry defect {worst_sym:.3e}",
        cfg.samples
    ));
    Ok(())
}

fn radius(cfg: &RunConfig, out: &mut Run) -> Result<()> {
    let space = space(cfg)?;
    let mut rng = seeded_rng(cfg.seed);
    let h = build_field(&cfg.h, cfg, &mut rng)?;
    let psi = build_field(&cfg.psi, cfg, &mut rng)?;
    let terms = out.add(Table::new("radius_terms", &["amplitude", "m", "h1_norm"]));
    let summary = out.add(Table::new(
        "radius_summary",
        &["amplitude", "terms", "fitted_ratio", "ratio_vs_previous", "converged"],
    ));
    let orders = out.add(Table::new("radius_orders", &["amplitude", "s", "order"]));
    let mut previous: Option<f64> = None;
    for &a in &cfg.amplitudes {
        let row = nearsphere::dn::radius_scan(&space, &h, &[a], &psi, &cfg.s_grid, cfg.radius_tol, cfg.radius_m_cap)?
            .pop()
            .expect("one amplitude");
        for (m, v) in row.terms_h1.iter().enumerate() {
            out.push(terms, vec![a.into(), m.into(), (*v).into()]);
        }
        let change: Cell = previous.map(|p| row.fitted_ratio / p).into();
        out.push(
            summary,
            vec![
                a.into(),
                row.terms_h1.len().into(),
                row.fitted_ratio.into(),
                change,
                row.converged.into(),
            ],
        );
        for (s, m) in &row.order_for_s {
            out.push(orders, vec![a.into(), (*s).into(), (*m).into()]);
        }
        let ms: Vec<usize> = row.order_for_s.iter().map(|p| p.1).collect();
        out.summary.push(format!(
            "amplitude {a}: fitted ratio {:.4e}, M(s) = {ms:?}, converged = {}",
            row.fitted_ratio, row.converged
        ));
        if !row.converged {
            out.nonconverged = true;
        }
        previous = Some(row.fitted_ratio);
    }
    Ok(())
}

fn tame(cfg: &RunConfig, out: &mut Run) -> Result<()> {
    let space = space(cfg)?;
    let mut rng = seeded_rng(cfg.seed);
    let mut inputs = Vec::with_capacity(cfg.samples);
    for _ in 0..cfg.samples {
        let h = build_field(&cfg.h, cfg, &mut rng)?;
        let psi = build_field(&cfg.psi, cfg, &mut rng)?;
        let eta = build_field(&cfg.eta, cfg, &mut rng)?;
        inputs.push((h, eta, psi));
    }
    let opts = series_options(cfg);
    let results: Vec<Result<TameSample>> = inputs
        .par_iter()
        .map(|(h, _, psi)| {
            let g = dn_apply(&space, h, psi, opts)?.g;
            Ok(TameSample {
                g_norm: cfg.s_grid.iter().map(|&s| g.sobolev_norm(s)).collect(),
                psi_norm: cfg.s_grid.iter().map(|&s| psi.sobolev_norm(s + 1.0)).collect(),
                h_norm: cfg.s_grid.iter().map(|&s| h.sobolev_norm(s + 1.0)).collect(),
                psi_low: psi.sobolev_norm(cfg.s0 + 1.0),
            })
        })
        .collect();
    let samples = out.add(Table::new(
        "tame_samples",
        &["sample", "s", "g_norm", "psi_norm", "h_norm", "psi_low"],
    ));
    let mut data = Vec::with_capacity(results.len());
    for (i, r) in results.into_iter().enumerate() {
        let d = r?;
        for (k, &s) in cfg.s_grid.iter().enumerate() {
            out.push(
                samples,
                vec![
                    i.into(),
                    s.into(),
                    d.g_norm[k].into(),
                    d.psi_norm[k].into(),
                    d.h_norm[k].into(),
                    d.psi_low.into(),
                ],
            );
        }
        data.push(d);
    }
    let fits = out.add(Table::new(
        "tame",
        &["estimate", "s", "C0_fit", "Cs_fit", "max_ratio", "violations"],
    ));
    let emit = |out: &mut Run, estimate: &str, rows: Vec<nearsphere::dn::TameRow>| {
        let c0: Vec<f64> = rows.iter().map(|r| r.c0).collect();
        let lo = c0.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = c0.iter().cloned().fold(0.0, f64::max);
        let violations: usize = rows.iter().map(|r| r.violations).sum();
        for r in rows {
            out.push(
                fits,
                vec![
                    estimate.into(),
                    r.s.into(),
                    r.c0.into(),
                    r.cs.into(),
                    r.max_ratio.into(),
                    r.violations.into(),
                ],
            );
        }
        out.summary.push(format!(
            "{estimate}: C0 in [{lo:.4e}, {hi:.4e}] (band {:.3}), {violations} violations",
            hi / lo
        ));
    };
    emit(out, "G", fit_rows(&data, cfg.s0, &cfg.s_grid));
    if cfg.tame_derivative {
        let rows = tame_derivative_scan(&space, &inputs, cfg.s0, &cfg.s_grid)?;
        emit(out, "G'", rows);
    }
    Ok(())
}

fn norms(cfg: &RunConfig, out: &mut Run) -> Result<()> {
    let dim = cfg.dim_tag();
    let atlas = Atlas::new(dim, cfg.atlas.atlas_options())?;
    let mut rng = seeded_rng(cfg.seed);
    let fields: Vec<BoundaryField> = (0..cfg.samples)
        .map(|_| build_field(&cfg.psi, cfg, &mut rng))
        .collect::<Result<_>>()?;
    let chart = fields
        .par_iter()
        .map(|f| Ok(chart_norms(std::slice::from_ref(f), &atlas, &cfg.norm_orders, cfg.atlas.chart_options())?.remove(0)))
        .collect::<Vec<Result<Vec<f64>>>>();

    let info = out.add(Table::new("norms_atlas", &["quantity", "value"]));
    for (q, v) in [
        ("charts", Cell::from(atlas.len())),
        ("delta", atlas.delta.into()),
        ("bump_radius", atlas.bump_radius.into()),
        ("measured_cover", atlas.measured_cover.into()),
    ] {
        out.push(info, vec![q.into(), v]);
    }
    let table = out.add(Table::new("norms_samples", &["sample", "s", "spectral", "chart", "ratio"]));
    let mut ratios: Vec<Vec<f64>> = vec![Vec::new(); cfg.norm_orders.len()];
    for (i, (f, c)) in fields.iter().zip(chart).enumerate() {
        let c = c?;
        for (k, &s) in cfg.norm_orders.iter().enumerate() {
            let spectral = f.sobolev_norm(s);
            let ratio = c[k] / spectral;
            ratios[k].push(ratio);
            out.push(table, vec![i.into(), s.into(), spectral.into(), c[k].into(), ratio.into()]);
        }
    }
    let summary = out.add(Table::new(
        "norms_summary",
        &["s", "samples", "ratio_min", "ratio_max", "half_min", "half_max", "min_change", "max_change"],
    ));
    for (k, &s) in cfg.norm_orders.iter().enumerate() {
        let r = &ratios[k];
        let half = &r[..r.len().div_ceil(2)];
        let min = |v: &[f64]| v.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = |v: &[f64]| v.iter().cloned().fold(0.0, f64::max);
        let (lo, hi, hlo, hhi) = (min(r), max(r), min(half), max(half));
        out.push(
            summary,
            vec![
                s.into(),
                r.len().into(),
                lo.into(),
                hi.into(),
                hlo.into(),
                hhi.into(),
                (lo / hlo - 1.0).into(),
                (hi / hhi - 1.0).into(),
            ],
        );
        out.summary.push(format!("s = {s}: chart/spectral ratio in [{lo:.4}, {hi:.4}]"));
    }

    if cfg.atlas.x_samples > 0 && !cfg.atlas.x_orders.is_empty() && !cfg.atlas.x_levels.is_empty() {
        let space = space(cfg)?;
        let k_max = cfg.atlas.x_levels.iter().copied().max().unwrap_or(0);
        let cut = CutoffFamily::new(atlas.delta, k_max);
        let orders: Vec<(f64, f64)> = cfg.atlas.x_orders.iter().map(|p| (p[0], p[1])).collect();
        let x = out.add(Table::new("x_seminorms", &["sample", "k", "starred", "s", "r", "value"]));
        for (i, psi) in fields.iter().take(cfg.atlas.x_samples).enumerate() {
            let u = space.harmonic_extension(psi)?;
            for &k in &cfg.atlas.x_levels {
                for starred in [false, true] {
                    let v = x_seminorms(&space, &u, &atlas, &cut, k, starred, &orders, cfg.atlas.x_options())?;
                    for (&(s, r), val) in orders.iter().zip(v) {
                        out.push(x, vec![i.into(), k.into(), starred.into(), s.into(), r.into(), val.into()]);
                    }
                }
            }
        }
    }
    Ok(())
}

fn witness(cfg: &RunConfig, out: &mut Run) -> Result<()> {
    let report = inequality_witness_suite(cfg.witness_config())?;
    let t = out.add(Table::new(
        "witness",
        &["id", "params", "samples", "max_ratio_half", "max_ratio", "doubling_change", "bound", "pass"],
    ));
    for r in &report.rows {
        out.push(
            t,
            vec![
                r.id.as_str().into(),
                r.params.as_str().into(),
                r.samples.into(),
                r.max_ratio_half.into(),
                r.max_ratio.into(),
                r.doubling_change().into(),
                r.bound.into(),
                r.pass.into(),
            ],
        );
    }
    let passed = report.rows.iter().filter(|r| r.pass).count();
    out.summary.push(format!("{passed} of {} witness rows pass", report.rows.len()));
    for r in report.rows.iter().filter(|r| !r.pass) {
        out.summary.push(format!("FAIL {} {}: max {:.4} (first half {:.4})", r.id, r.params, r.max_ratio, r.max_ratio_half));
    }
    Ok(())
}
