//! Run configuration: a TOML file of flat keys plus one table per field
//! family, merged with command-line overrides and resolved to explicit values.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use nearsphere::charts::{AtlasOptions, ChartNormOptions, WitnessConfig, XNormOptions};
use nearsphere::sampling::FieldFamily;
use nearsphere::{BoundaryField, Dim};

/// Failure to read or validate a configuration (exit status 2).
#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("invalid configuration: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

/// The experiment to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Apply,
    DerivativeCheck,
    Radius,
    Tame,
    Norms,
    Witness,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Apply => "apply",
            Command::DerivativeCheck => "derivative-check",
            Command::Radius => "radius",
            Command::Tame => "tame",
            Command::Norms => "norms",
            Command::Witness => "witness",
        }
    }

    fn default_samples(self) -> usize {
        match self {
            Command::Apply => 1,
            Command::DerivativeCheck => 5,
            Command::Radius => 1,
            Command::Tame => 20,
            Command::Norms => 50,
            Command::Witness => 24,
        }
    }
}

/// How a boundary field is produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    /// Seeded random band-limited field, rescaled to `‖f‖_{norm_order} = amplitude`.
    Random {
        /// Band limit; defaults to `L`.
        degree: Option<usize>,
        #[serde(default = "default_decay")]
        decay: f64,
        norm_order: Option<f64>,
        amplitude: f64,
        #[serde(default)]
        zero_mean: bool,
    },
    Zero,
    Constant {
        value: f64,
    },
    /// A single basis mode `scale · Y_{l,m}`.
    Mode {
        l: usize,
        m: i64,
        #[serde(default = "one")]
        scale: f64,
    },
    /// Explicit coefficients in the flat mode order.
    Coeffs {
        values: Vec<f64>,
    },
    /// Elevation of the unit ball translated by `eps` along the first axis
    /// (only for `h`).
    Translated {
        eps: f64,
    },
}

fn default_decay() -> f64 {
    4.0
}

fn one() -> f64 {
    1.0
}

/// Chart and seminorm parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AtlasConfig {
    pub delta: f64,
    pub cover_chord: f64,
    pub bump_radius: f64,
    pub chart_half_width: f64,
    pub chart_cells: usize,
    pub x_half_width: f64,
    pub x_cells: usize,
    pub x_depth: f64,
    pub x_normal_cells: usize,
    /// Radial cut-off indices `k` of the seminorm report.
    pub x_levels: Vec<usize>,
    /// `(s, r)` pairs of the seminorm report.
    pub x_orders: Vec<[f64; 2]>,
    /// Harmonic extensions of `psi` samples used for the seminorm report.
    pub x_samples: usize,
}

impl Default for AtlasConfig {
    fn default() -> Self {
        let a = AtlasOptions::default();
        let c = ChartNormOptions::default();
        let x = XNormOptions::default();
        Self {
            delta: a.delta,
            cover_chord: a.cover_chord,
            bump_radius: a.bump_radius,
            chart_half_width: c.half_width,
            chart_cells: c.m,
            x_half_width: x.half_width,
            x_cells: x.m,
            x_depth: x.depth,
            x_normal_cells: x.nz,
            x_levels: vec![0, 1],
            x_orders: vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]],
            x_samples: 2,
        }
    }
}

impl AtlasConfig {
    pub fn atlas_options(&self) -> AtlasOptions {
        AtlasOptions {
            delta: self.delta,
            cover_chord: self.cover_chord,
            bump_radius: self.bump_radius,
        }
    }

    pub fn chart_options(&self) -> ChartNormOptions {
        ChartNormOptions {
            half_width: self.chart_half_width,
            m: self.chart_cells,
        }
    }

    pub fn x_options(&self) -> XNormOptions {
        XNormOptions {
            half_width: self.x_half_width,
            m: self.x_cells,
            depth: self.x_depth,
            nz: self.x_normal_cells,
        }
    }
}

/// Configuration as written in the file. Every key is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    command: Option<Command>,
    dim: Option<usize>,
    #[serde(rename = "L")]
    l: Option<usize>,
    #[serde(rename = "N_r")]
    n_r: Option<usize>,
    #[serde(rename = "M")]
    m: Option<usize>,
    tol: Option<f64>,
    seed: Option<u64>,
    samples: Option<usize>,
    s0: Option<f64>,
    s_grid: Option<Vec<f64>>,
    out_dir: Option<String>,
    h: Option<FieldSpec>,
    psi: Option<FieldSpec>,
    eta: Option<FieldSpec>,
    oracle: Option<String>,
    oracle_resolution: Option<usize>,
    t_values: Option<Vec<f64>>,
    amplitudes: Option<Vec<f64>>,
    radius_tol: Option<f64>,
    radius_m_cap: Option<usize>,
    tame_derivative: Option<bool>,
    norm_orders: Option<Vec<f64>>,
    atlas: Option<AtlasConfig>,
}

/// Fully resolved configuration. Its JSON form is embedded in every output
/// file and its SHA-256 digest identifies the run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub dim: usize,
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "N_r")]
    pub n_r: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub tol: f64,
    pub seed: u64,
    pub samples: usize,
    pub s0: f64,
    pub s_grid: Vec<f64>,
    /// Where the files go; excluded from the embedded config and its hash so
    /// that identical runs written to different directories are identical.
    #[serde(skip)]
    pub out_dir: String,
    pub h: FieldSpec,
    pub psi: FieldSpec,
    pub eta: FieldSpec,
    pub oracle: Option<String>,
    pub oracle_resolution: usize,
    pub t_values: Vec<f64>,
    pub amplitudes: Vec<f64>,
    pub radius_tol: f64,
    pub radius_m_cap: usize,
    pub tame_derivative: bool,
    pub norm_orders: Vec<f64>,
    pub atlas: AtlasConfig,
}

/// Values given on the command line, which take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub command: Option<Command>,
    pub seed: Option<u64>,
    pub out_dir: Option<String>,
}

impl RunConfig {
    /// Reads a TOML file, or starts from defaults when `path` is `None`.
    pub fn load(path: Option<&Path>, over: &Overrides) -> Result<Self, ConfigError> {
        let raw = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|source| ConfigError::Read {
                    path: p.display().to_string(),
                    source,
                })?;
                toml::from_str(&text)?
            }
            None => RawConfig::default(),
        };
        Self::resolve(raw, over)
    }

    /// Parses TOML text directly.
    #[cfg(test)]
    pub fn from_toml(text: &str, over: &Overrides) -> Result<Self, ConfigError> {
        Self::resolve(toml::from_str(text)?, over)
    }

    fn resolve(raw: RawConfig, over: &Overrides) -> Result<Self, ConfigError> {
        let command = over
            .command
            .or(raw.command)
            .ok_or_else(|| invalid("no command given; set `command` or pass --command"))?;
        let dim = raw.dim.unwrap_or(2);
        Dim::new(dim).map_err(|e| invalid(e.to_string()))?;
        let l = raw.l.unwrap_or(16);
        let s0 = raw.s0.unwrap_or(1.5);
        let cfg = Self {
            command,
            dim,
            l,
            n_r: raw.n_r.unwrap_or(l + 8),
            m: raw.m.unwrap_or(16),
            tol: raw.tol.unwrap_or(1e-12),
            seed: over.seed.or(raw.seed).unwrap_or(0),
            samples: raw.samples.unwrap_or(command.default_samples()),
            s0,
            s_grid: raw.s_grid.unwrap_or_else(|| vec![0.5, 1.0, 2.0, 3.0, 4.0]),
            out_dir: over.out_dir.clone().or(raw.out_dir).unwrap_or_else(|| "out".into()),
            h: resolve_field(raw.h.unwrap_or(default_h(command)), l, s0),
            psi: resolve_field(raw.psi.unwrap_or(default_psi(command)), l, s0),
            eta: resolve_field(raw.eta.unwrap_or(default_eta(command)), l, s0),
            oracle: raw.oracle,
            oracle_resolution: raw.oracle_resolution.unwrap_or(4 * l),
            t_values: raw.t_values.unwrap_or_else(|| vec![1e-2, 1e-3]),
            amplitudes: raw.amplitudes.unwrap_or_else(|| vec![0.04, 0.02, 0.01]),
            radius_tol: raw.radius_tol.unwrap_or(1e-10),
            radius_m_cap: raw.radius_m_cap.unwrap_or(40),
            tame_derivative: raw.tame_derivative.unwrap_or(true),
            norm_orders: raw.norm_orders.unwrap_or_else(|| vec![0.0, 1.0, 2.0]),
            atlas: raw.atlas.unwrap_or_default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if self.l == 0 {
            return Err(invalid("L must be positive"));
        }
        if self.n_r < 2 {
            return Err(invalid("N_r must be at least 2"));
        }
        if self.m == 0 || self.radius_m_cap == 0 {
            return Err(invalid("M and radius_m_cap must be positive"));
        }
        if self.samples == 0 {
            return Err(invalid("samples must be positive"));
        }
        if !(self.tol > 0.0 && self.radius_tol > 0.0) {
            return Err(invalid("tolerances must be positive"));
        }
        if self.s_grid.is_empty() || self.s_grid.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(invalid("s_grid must be a non-empty list of finite orders ≥ 0"));
        }
        if !self.s0.is_finite() {
            return Err(invalid("s0 must be finite"));
        }
        if self.t_values.len() < 2 || self.t_values.iter().any(|t| !(*t > 0.0)) {
            return Err(invalid("t_values needs at least two positive steps"));
        }
        if self.amplitudes.is_empty() || self.amplitudes.iter().any(|a| !a.is_finite()) {
            return Err(invalid("amplitudes must be a non-empty list of finite values"));
        }
        if self.norm_orders.iter().any(|s| !s.is_finite()) {
            return Err(invalid("norm_orders must be finite"));
        }
        for (name, spec) in [("h", &self.h), ("psi", &self.psi), ("eta", &self.eta)] {
            check_field(name, spec, self.dim, self.l)?;
        }
        if let Some(name) = &self.oracle {
            let oracle: nearsphere::oracles::OracleName = name.parse().map_err(|e: nearsphere::Error| invalid(e.to_string()))?;
            use nearsphere::oracles::OracleName::*;
            match (oracle, &self.h) {
                (ScaledSphere, FieldSpec::Constant { .. } | FieldSpec::Zero) => {}
                (ScaledSphere, _) => return Err(invalid("oracle scaled_sphere needs h of kind constant or zero")),
                (TranslatedBall, FieldSpec::Translated { .. }) => {}
                (TranslatedBall, _) => return Err(invalid("oracle translated_ball needs h of kind translated")),
                (DirectGalerkin, _) => {}
            }
            if self.command != Command::Apply {
                return Err(invalid("oracle is only used by the apply command"));
            }
        }
        Ok(())
    }

    pub fn dim_tag(&self) -> Dim {
        Dim::new(self.dim).expect("validated dimension")
    }

    pub fn witness_config(&self) -> WitnessConfig {
        WitnessConfig {
            samples: self.samples,
            seed: self.seed,
        }
    }

    /// JSON form of the resolved configuration (field order is fixed by the
    /// struct, so the text is deterministic).
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("configuration serializes")
    }

    /// Hex SHA-256 of [`RunConfig::to_json`].
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_json().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn default_h(command: Command) -> FieldSpec {
    match command {
        Command::Radius => FieldSpec::Mode { l: 1, m: 1, scale: 1.0 },
        Command::Apply => FieldSpec::Zero,
        _ => FieldSpec::Random {
            degree: None,
            decay: 5.0,
            norm_order: None,
            amplitude: 0.05,
            zero_mean: false,
        },
    }
}

fn default_psi(command: Command) -> FieldSpec {
    match command {
        Command::Apply | Command::Radius => FieldSpec::Mode { l: 2, m: 2, scale: 1.0 },
        _ => FieldSpec::Random {
            degree: None,
            decay: 4.0,
            norm_order: None,
            amplitude: 1.0,
            zero_mean: false,
        },
    }
}

fn default_eta(command: Command) -> FieldSpec {
    let amplitude = if command == Command::DerivativeCheck { 8.0 } else { 1.0 };
    FieldSpec::Random {
        degree: None,
        decay: 4.0,
        norm_order: None,
        amplitude,
        zero_mean: false,
    }
}

/// Fills the band limit and the normalizing order of random families.
fn resolve_field(spec: FieldSpec, l: usize, s0: f64) -> FieldSpec {
    match spec {
        FieldSpec::Random {
            degree,
            decay,
            norm_order,
            amplitude,
            zero_mean,
        } => FieldSpec::Random {
            degree: Some(degree.unwrap_or(l)),
            decay,
            norm_order: Some(norm_order.unwrap_or(s0 + 1.0)),
            amplitude,
            zero_mean,
        },
        other => other,
    }
}

fn check_field(name: &str, spec: &FieldSpec, dim: usize, l: usize) -> Result<(), ConfigError> {
    let dim_tag = Dim::new(dim).map_err(|e| invalid(e.to_string()))?;
    match spec {
        FieldSpec::Random {
            degree,
            decay,
            norm_order,
            amplitude,
            ..
        } => {
            if degree.is_some_and(|d| d > l) {
                return Err(invalid(format!("{name}.degree exceeds L = {l}")));
            }
            if !(decay.is_finite() && norm_order.is_some_and(f64::is_finite) && amplitude.is_finite()) {
                return Err(invalid(format!("{name}: random family parameters must be finite")));
            }
        }
        FieldSpec::Zero => {}
        FieldSpec::Constant { value } => {
            if !value.is_finite() {
                return Err(invalid(format!("{name}.value must be finite")));
            }
        }
        FieldSpec::Mode { l: deg, m, .. } => {
            if *deg > l {
                return Err(invalid(format!("{name}: mode degree {deg} exceeds L = {l}")));
            }
            let ok = match dim_tag {
                Dim::Two => m.unsigned_abs() as usize == *deg,
                Dim::Three => m.unsigned_abs() as usize <= *deg,
            };
            if !ok {
                return Err(invalid(format!(
                    "{name}: no mode (l = {deg}, m = {m}); for n = 2 use m = l (cos) or m = -l (sin)"
                )));
            }
        }
        FieldSpec::Coeffs { values } => {
            if values.len() != dim_tag.n_modes(l) {
                return Err(invalid(format!(
                    "{name}.values has {} entries, expected {} for L = {l}",
                    values.len(),
                    dim_tag.n_modes(l)
                )));
            }
        }
        FieldSpec::Translated { eps } => {
            if name != "h" {
                return Err(invalid(format!("{name}: kind translated is only valid for h")));
            }
            if !(eps.abs() < 0.5) {
                return Err(invalid("translated eps must satisfy |eps| < 1/2"));
            }
        }
    }
    Ok(())
}

/// Builds deterministic fields from a field description. Random families draw from the
/// shared generator in call order.
pub fn build_field<R: rand::Rng>(spec: &FieldSpec, cfg: &RunConfig, rng: &mut R) -> nearsphere::Result<BoundaryField> {
    let dim = cfg.dim_tag();
    let l = cfg.l;
    Ok(match spec {
        FieldSpec::Random {
            degree,
            decay,
            norm_order,
            amplitude,
            zero_mean,
        } => FieldFamily {
            dim,
            degree: degree.unwrap_or(l),
            decay: *decay,
            s_norm: norm_order.unwrap_or(cfg.s0 + 1.0),
            amplitude: *amplitude,
            zero_mean: *zero_mean,
        }
        .sample(rng)
        .resized(l),
        FieldSpec::Zero => BoundaryField::zeros(dim, l),
        FieldSpec::Constant { value } => BoundaryField::constant(dim, l, *value),
        FieldSpec::Mode { l: deg, m, scale } => BoundaryField::mode(dim, l, *deg, *m, *scale),
        FieldSpec::Coeffs { values } => BoundaryField::new(dim, l, values.clone())?,
        FieldSpec::Translated { .. } => {
            return Err(nearsphere::Error::Parameter(
                "translated elevations are built by the apply command".into(),
            ))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn over(command: Command) -> Overrides {
        Overrides {
            command: Some(command),
            ..Overrides::default()
        }
    }

    #[test]
    fn defaults_resolve_and_hash_is_stable() {
        let a = RunConfig::from_toml("", &over(Command::Tame)).unwrap();
        let b = RunConfig::from_toml("dim = 2\n", &over(Command::Tame)).unwrap();
        assert_eq!(a.samples, 20);
        assert_eq!(a.n_r, a.l + 8);
        assert_eq!(a.hash(), b.hash());
        let c = RunConfig::from_toml("seed = 1\n", &over(Command::Tame)).unwrap();
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn unknown_keys_and_bad_values_are_rejected() {
        assert!(matches!(
            RunConfig::from_toml("bogus = 1\n", &over(Command::Apply)),
            Err(ConfigError::Parse(_))
        ));
        assert!(matches!(
            RunConfig::from_toml("dim = 4\n", &over(Command::Apply)),
            Err(ConfigError::Invalid(_))
        ));
        assert!(RunConfig::from_toml("", &Overrides::default()).is_err());
        let bad_mode = "[psi]\nkind = \"mode\"\nl = 2\nm = 1\n";
        assert!(RunConfig::from_toml(&format!("dim = 2\n{bad_mode}"), &over(Command::Apply)).is_err());
        assert!(RunConfig::from_toml(&format!("dim = 3\n{bad_mode}"), &over(Command::Apply)).is_ok());
    }

    #[test]
    fn command_line_overrides_file() {
        let o = Overrides {
            command: Some(Command::Radius),
            seed: Some(9),
            out_dir: Some("x".into()),
        };
        let c = RunConfig::from_toml("command = \"tame\"\nseed = 3\n", &o).unwrap();
        assert_eq!((c.command, c.seed, c.out_dir.as_str()), (Command::Radius, 9, "x"));
    }
}
