//! Run configuration: the TOML schema, flag mirroring, and validation.
//!
//! Unknown keys anywhere in a config file are hard errors — a misspelled
//! physics parameter must never silently fall back to a default.

use std::path::PathBuf;

use num_complex::Complex64 as C64;
use serde::Deserialize;

use ptdiamond::{
    build_cls, cls_support, gaussian_initial, ClsSpec, ClsVariant, EvolveConfig, LatticeState,
    ModelParams, SiteRef,
};

use crate::error::{AppError, Result};
use crate::output;

/// Default lattice extent used by the propagation and spectrum commands.
pub const DEFAULT_N_MIN: i64 = -150;
/// See [`DEFAULT_N_MIN`].
pub const DEFAULT_N_MAX: i64 = 150;
/// Default number of quasimomentum samples for band sweeps.
pub const DEFAULT_N_K: usize = 401;
/// Default cap on the number of z rows written to a heatmap CSV.
pub const DEFAULT_HEATMAP_LIMIT: usize = 2000;

/// Parses a flux phase given either as a number or as one of the common
/// exact fractions of pi: `0`, `pi`, `-pi`, `2pi`, `pi/2`, `pi/3`, `pi/4`.
pub fn parse_phi(text: &str) -> std::result::Result<f64, String> {
    let t = text.trim().to_ascii_lowercase();
    let pi = std::f64::consts::PI;
    match t.as_str() {
        "pi" => Ok(pi),
        "-pi" => Ok(-pi),
        "2pi" | "2*pi" => Ok(2.0 * pi),
        "pi/2" => Ok(pi / 2.0),
        "pi/3" => Ok(pi / 3.0),
        "pi/4" => Ok(pi / 4.0),
        _ => t
            .parse::<f64>()
            .map_err(|_| format!("cannot parse flux phase {text:?}: expected a number or pi, -pi, 2pi, pi/2, pi/3, pi/4")),
    }
}

/// Parses a compact-localized-state variant name.
pub fn parse_cls_variant(text: &str) -> std::result::Result<ClsVariant, String> {
    match text.trim().to_ascii_lowercase().as_str() {
        "phi0" => Ok(ClsVariant::TwoSitePhi0),
        "phi-pi" => Ok(ClsVariant::TwoSitePhiPi),
        "phi0-eperp" => Ok(ClsVariant::TwoSitePhi0EPerp),
        "phi-pi-eperp" => Ok(ClsVariant::TwoSitePhiPiEPerp),
        other => Err(format!(
            "unknown CLS variant {other:?}: expected phi0, phi-pi, phi0-eperp, or phi-pi-eperp"
        )),
    }
}

/// Canonical name of a variant, inverse of [`parse_cls_variant`].
pub fn cls_variant_name(v: ClsVariant) -> &'static str {
    match v {
        ClsVariant::TwoSitePhi0 => "phi0",
        ClsVariant::TwoSitePhiPi => "phi-pi",
        ClsVariant::TwoSitePhi0EPerp => "phi0-eperp",
        ClsVariant::TwoSitePhiPiEPerp => "phi-pi-eperp",
    }
}

/// A flux phase in TOML: either a bare number or a string accepted by
/// [`parse_phi`].
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum PhiValue {
    Number(f64),
    Text(String),
}

impl PhiValue {
    pub fn resolve(&self) -> Result<f64> {
        match self {
            PhiValue::Number(x) => Ok(*x),
            PhiValue::Text(t) => parse_phi(t).map_err(AppError::Validation),
        }
    }
}

/// Top-level schema of an `evolve --config` file.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfigFile {
    pub model: ModelSection,
    pub initial: InitialSection,
    pub evolve: EvolveSection,
    pub output: OutputSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub gamma: f64,
    #[serde(default)]
    pub e_par: f64,
    #[serde(default)]
    pub e_perp: f64,
    pub phi: PhiValue,
    #[serde(default = "default_n_min")]
    pub n_min: i64,
    #[serde(default = "default_n_max")]
    pub n_max: i64,
}

fn default_n_min() -> i64 {
    DEFAULT_N_MIN
}

fn default_n_max() -> i64 {
    DEFAULT_N_MAX
}

impl ModelSection {
    pub fn to_params(&self) -> Result<ModelParams> {
        let phi = self.phi.resolve()?;
        Ok(ModelParams::new(
            self.gamma,
            self.e_par,
            self.e_perp,
            phi,
            self.n_min,
            self.n_max,
        )?)
    }
}

/// Initial-state description. `kind` selects which of the remaining fields
/// apply; the combination is validated by [`InitialSection::resolve`].
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    /// One of `cls`, `gaussian`, `custom`.
    pub kind: String,
    pub variant: Option<String>,
    pub anchor: Option<i64>,
    pub a0_re: Option<f64>,
    pub a0_im: Option<f64>,
    pub sigma: Option<f64>,
    pub center: Option<f64>,
    pub path: Option<PathBuf>,
}

impl InitialSection {
    pub fn resolve(&self) -> Result<InitialSpec> {
        let reject = |field: &str, set: bool| -> Result<()> {
            if set {
                Err(AppError::Validation(format!(
                    "initial.{field} does not apply to kind = {:?}",
                    self.kind
                )))
            } else {
                Ok(())
            }
        };
        match self.kind.as_str() {
            "cls" => {
                reject("sigma", self.sigma.is_some())?;
                reject("center", self.center.is_some())?;
                reject("path", self.path.is_some())?;
                let variant = self
                    .variant
                    .as_deref()
                    .ok_or_else(|| AppError::validation("initial.variant is required for kind = \"cls\""))?;
                let variant = parse_cls_variant(variant).map_err(AppError::Validation)?;
                Ok(InitialSpec::Cls {
                    variant,
                    anchor: self.anchor.unwrap_or(0),
                    a0: C64::new(self.a0_re.unwrap_or(1.0), self.a0_im.unwrap_or(0.0)),
                })
            }
            "gaussian" => {
                reject("variant", self.variant.is_some())?;
                reject("anchor", self.anchor.is_some())?;
                reject("a0_re", self.a0_re.is_some())?;
                reject("a0_im", self.a0_im.is_some())?;
                reject("path", self.path.is_some())?;
                Ok(InitialSpec::Gaussian {
                    sigma: self.sigma.unwrap_or(70.0),
                    center: self.center.unwrap_or(0.0),
                })
            }
            "custom" => {
                reject("variant", self.variant.is_some())?;
                reject("anchor", self.anchor.is_some())?;
                reject("a0_re", self.a0_re.is_some())?;
                reject("a0_im", self.a0_im.is_some())?;
                reject("sigma", self.sigma.is_some())?;
                reject("center", self.center.is_some())?;
                let path = self
                    .path
                    .clone()
                    .ok_or_else(|| AppError::validation("initial.path is required for kind = \"custom\""))?;
                Ok(InitialSpec::Custom { path })
            }
            other => Err(AppError::Validation(format!(
                "unknown initial.kind {other:?}: expected cls, gaussian, or custom"
            ))),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveSection {
    pub z_end: f64,
    #[serde(default = "default_dz")]
    pub dz: f64,
    #[serde(default = "default_sample_every")]
    pub sample_every: usize,
    #[serde(default = "default_overflow_cap")]
    pub overflow_cap: f64,
    #[serde(default = "default_heatmap_limit")]
    pub heatmap_limit: usize,
}

fn default_dz() -> f64 {
    0.01
}

fn default_sample_every() -> usize {
    100
}

fn default_overflow_cap() -> f64 {
    1e12
}

fn default_heatmap_limit() -> usize {
    DEFAULT_HEATMAP_LIMIT
}

impl EvolveSection {
    pub fn to_config(&self) -> EvolveConfig {
        EvolveConfig {
            z_end: self.z_end,
            dz: self.dz,
            sample_every: self.sample_every,
            overflow_cap: self.overflow_cap,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub tag: String,
}

/// A fully validated initial-state recipe.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialSpec {
    Cls { variant: ClsVariant, anchor: i64, a0: C64 },
    Gaussian { sigma: f64, center: f64 },
    Custom { path: PathBuf },
}

impl InitialSpec {
    /// Materializes the state on the given lattice.
    pub fn build(&self, params: &ModelParams) -> Result<LatticeState> {
        match self {
            InitialSpec::Cls { variant, anchor, a0 } => {
                let spec = ClsSpec { variant: *variant, a0: *a0, anchor: *anchor };
                Ok(build_cls(&spec, params)?)
            }
            InitialSpec::Gaussian { sigma, center } => {
                Ok(gaussian_initial(params, *sigma, *center)?)
            }
            InitialSpec::Custom { path } => {
                let (z, n_min, n_max, amps) = output::read_state_csv(path)?;
                if n_min != params.n_min() || n_max != params.n_max() {
                    return Err(AppError::Validation(format!(
                        "state file covers cells [{n_min}, {n_max}] but the model expects [{}, {}]",
                        params.n_min(),
                        params.n_max()
                    )));
                }
                Ok(LatticeState::new(z, amps, params)?)
            }
        }
    }

    /// The sites whose power is tracked separately in the diagnostics: the
    /// five-site support for a compact localized state, nothing otherwise.
    pub fn excited_sites(&self) -> Vec<SiteRef> {
        match self {
            InitialSpec::Cls { anchor, .. } => cls_support(*anchor),
            _ => Vec::new(),
        }
    }

    /// JSON description for the metadata document.
    pub fn describe(&self) -> serde_json::Value {
        match self {
            InitialSpec::Cls { variant, anchor, a0 } => serde_json::json!({
                "kind": "cls",
                "variant": cls_variant_name(*variant),
                "anchor": anchor,
                "a0": { "re": a0.re, "im": a0.im },
            }),
            InitialSpec::Gaussian { sigma, center } => serde_json::json!({
                "kind": "gaussian",
                "sigma": sigma,
                "center": center,
            }),
            InitialSpec::Custom { path } => serde_json::json!({
                "kind": "custom",
                "path": path.display().to_string(),
            }),
        }
    }
}

/// Parses and fully validates an `evolve --config` TOML file.
pub fn load_run_config(path: &std::path::Path) -> Result<RunConfigFile> {
    let text = std::fs::read_to_string(path).map_err(|e| crate::error::io_err(path, e))?;
    let cfg: RunConfigFile = toml::from_str(&text)
        .map_err(|e| AppError::Validation(format!("{}: {e}", path.display())))?;
    Ok(cfg)
}

/// Schema of a `sweep` config file.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFile {
    pub sweep: SweepSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// Scenario names to run; duplicates are rejected (they would race on
    /// the same output files).
    pub scenarios: Vec<String>,
    pub out_dir: PathBuf,
    /// Worker threads (default: one per scenario, at most 4).
    pub threads: Option<usize>,
}

/// Parses and validates a sweep config file.
pub fn load_sweep_config(path: &std::path::Path) -> Result<SweepFile> {
    let text = std::fs::read_to_string(path).map_err(|e| crate::error::io_err(path, e))?;
    let cfg: SweepFile = toml::from_str(&text)
        .map_err(|e| AppError::Validation(format!("{}: {e}", path.display())))?;
    if cfg.sweep.scenarios.is_empty() {
        return Err(AppError::validation("sweep.scenarios must not be empty"));
    }
    for (i, a) in cfg.sweep.scenarios.iter().enumerate() {
        if cfg.sweep.scenarios[..i].contains(a) {
            return Err(AppError::Validation(format!(
                "sweep.scenarios lists {a:?} twice; runs would overwrite each other"
            )));
        }
    }
    if cfg.sweep.threads == Some(0) {
        return Err(AppError::validation("sweep.threads must be at least 1"));
    }
    Ok(cfg)
}
