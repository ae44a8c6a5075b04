//! Simulation configuration.
//!
//! Configurations are TOML documents with six sections. Unknown keys are
//! rejected; every key has a default:
//!
//! | key | default | meaning |
//! |-----|---------|---------|
//! | `material.m` | 1 | mass density |
//! | `material.gamma` | 0.01 | bending stiffness |
//! | `material.k` | 1 | elastic constant |
//! | `material.k_v` | 0.5 | viscous constant |
//! | `material.kappa` | 1 | permeability |
//! | `material.rho_a`, `rho_b`, `rho_ell`, `rho_w0` | 1, 0, 1, 0 | density `a p + b tanh(p/ell) + w0` |
//! | `material.nu_c`, `nu_ref`, `nu_ell` | 0, 0, 1 | pressure stress `c tanh((p - ref)/ell)` |
//! | `material.phi_c`, `phi_ref`, `phi_ell` | 0, 1, 1 | swelling force, same family in `s` |
//! | `material.psi_c`, `psi_ref`, `psi_ell` | 0, 1, 1 | pore storage rate, same family in `s` |
//! | `material.h0` | 0 | constant boundary flux |
//! | `material.h0_table` | none | `[[t, h], ...]`, overrides `h0` |
//! | `discretization.n_beam`, `n_pore` | 64, 64 | grid cells |
//! | `discretization.dt` | 1e-3 | time step |
//! | `discretization.t_final` | 1 | final time |
//! | `discretization.advection` | `"central"` | or `"upwind"` |
//! | `discretization.newton_tol` | 1e-12 | scaled Newton tolerance |
//! | `discretization.newton_max_iter` | 50 | Newton cap |
//! | `discretization.gradient_floor` | 1e-8 | smallest accepted cell gradient |
//! | `coupling.tol`, `max_iter`, `omega` | 1e-8, 30, 1 | Picard settings |
//! | `initial.stretch`, `alpha` | 1, 0 | `u0 = stretch x + alpha sin(pi x)` |
//! | `initial.p0_family` | `"constant"` | or `"cosine"` |
//! | `initial.p0_mean`, `p0_amp` | 0, 0 | `p0 = mean + amp cos(pi x)` |
//! | `initial.v0_slope` | 0 | `v0 = slope x` |
//! | `initial.auto_compatibility` | true | solve `v0_slope` from the compatibility identity |
//! | `output.directory` | `"foamswell-out"` | output directory |
//! | `output.snapshot_stride` | 100 | steps between snapshots, 0 for none |
//! | `checks.strain_floor` | 1e-8 | required minimum strain over the run |
//! | `checks.mass_tol` | 1e-3 | relative mass-balance tolerance |

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error as ThisError;

use crate::beam::BeamProblem;
use crate::constitutive::{
    validate_assumptions, BoundarySource, BoundedLipschitzLaw, DensityLaw, MaterialSystem, PhysicalConstants,
    SamplingRange,
};
use crate::coupled::{CoupledState, CouplingConfig};
use crate::error::Error;
use crate::initial::{InitialData, PressureProfile};
use crate::pore::{AdvectionScheme, DiffusionProblem};

#[derive(Debug, Clone, PartialEq, ThisError)]
pub enum ConfigError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("invalid value for `{field}`: {message}")]
    Semantic { field: String, message: String },
}

fn semantic(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Semantic {
        field: field.to_string(),
        message: message.into(),
    }
}

/// Maps a library error raised while building section `section` to a
/// semantic error with a field path.
fn from_error(section: &str, e: Error) -> ConfigError {
    match e {
        Error::InvalidParameter { name, reason } => semantic(&format!("{section}.{name}"), reason),
        other => semantic(section, other.to_string()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaterialConfig {
    pub m: f64,
    pub gamma: f64,
    pub k: f64,
    pub k_v: f64,
    pub kappa: f64,
    pub rho_a: f64,
    pub rho_b: f64,
    pub rho_ell: f64,
    pub rho_w0: f64,
    pub nu_c: f64,
    pub nu_ref: f64,
    pub nu_ell: f64,
    pub phi_c: f64,
    pub phi_ref: f64,
    pub phi_ell: f64,
    pub psi_c: f64,
    pub psi_ref: f64,
    pub psi_ell: f64,
    pub h0: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h0_table: Option<Vec<[f64; 2]>>,
}

impl Default for MaterialConfig {
    fn default() -> Self {
        Self {
            m: 1.0,
            gamma: 0.01,
            k: 1.0,
            k_v: 0.5,
            kappa: 1.0,
            rho_a: 1.0,
            rho_b: 0.0,
            rho_ell: 1.0,
            rho_w0: 0.0,
            nu_c: 0.0,
            nu_ref: 0.0,
            nu_ell: 1.0,
            phi_c: 0.0,
            phi_ref: 1.0,
            phi_ell: 1.0,
            psi_c: 0.0,
            psi_ref: 1.0,
            psi_ell: 1.0,
            h0: 0.0,
            h0_table: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiscretizationConfig {
    pub n_beam: usize,
    pub n_pore: usize,
    pub dt: f64,
    pub t_final: f64,
    pub advection: AdvectionScheme,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub gradient_floor: f64,
}

impl Default for DiscretizationConfig {
    fn default() -> Self {
        Self {
            n_beam: 64,
            n_pore: 64,
            dt: 1e-3,
            t_final: 1.0,
            advection: AdvectionScheme::Central,
            newton_tol: 1e-12,
            newton_max_iter: 50,
            gradient_floor: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PressureFamily {
    #[default]
    Constant,
    Cosine,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialConfig {
    pub stretch: f64,
    pub alpha: f64,
    pub p0_family: PressureFamily,
    pub p0_mean: f64,
    pub p0_amp: f64,
    pub v0_slope: f64,
    pub auto_compatibility: bool,
}

impl Default for InitialConfig {
    fn default() -> Self {
        Self {
            stretch: 1.0,
            alpha: 0.0,
            p0_family: PressureFamily::Constant,
            p0_mean: 0.0,
            p0_amp: 0.0,
            v0_slope: 0.0,
            auto_compatibility: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: String,
    pub snapshot_stride: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: "foamswell-out".into(),
            snapshot_stride: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChecksConfig {
    pub strain_floor: f64,
    pub mass_tol: f64,
}

impl Default for ChecksConfig {
    fn default() -> Self {
        Self {
            strain_floor: 1e-8,
            mass_tol: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub material: MaterialConfig,
    pub discretization: DiscretizationConfig,
    pub coupling: CouplingConfig,
    pub initial: InitialConfig,
    pub output: OutputConfig,
    pub checks: ChecksConfig,
}

/// Everything needed to start a run.
#[derive(Debug, Clone)]
pub struct Setup {
    pub material: MaterialSystem,
    pub beam: BeamProblem,
    pub pore: DiffusionProblem,
    pub coupling: CouplingConfig,
    /// Initial data after the compatibility adjustment.
    pub initial: InitialData,
    pub state: CoupledState,
    pub t_final: f64,
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

/// Strict parse followed by full validation.
pub fn parse_config(text: &str) -> Result<SimConfig, ConfigError> {
    let cfg: SimConfig = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((1, 1), |s| line_column(text, s.start));
        ConfigError::Syntax {
            line,
            column,
            message: e.message().to_string(),
        }
    })?;
    cfg.validate()?;
    Ok(cfg)
}

impl SimConfig {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("configuration serializes");
        Sha256::digest(json.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.build().map(|_| ())
    }

    pub fn material_system(&self) -> Result<MaterialSystem, ConfigError> {
        let m = &self.material;
        let constants = PhysicalConstants::new(m.m, m.gamma, m.k, m.k_v, m.kappa).map_err(|e| from_error("material", e))?;
        let law = |prefix: &str, c: f64, r: f64, ell: f64| {
            BoundedLipschitzLaw::new(c, ell, r).map_err(|e| match e {
                Error::InvalidParameter { name, reason } => {
                    let key = match name.as_str() {
                        "amplitude" => "c",
                        "scale" => "ell",
                        _ => "ref",
                    };
                    semantic(&format!("material.{prefix}_{key}"), reason)
                }
                other => semantic("material", other.to_string()),
            })
        };
        let rho = DensityLaw::new(m.rho_a, m.rho_b, m.rho_ell, m.rho_w0).map_err(|e| match e {
            Error::InvalidParameter { name, reason } => semantic(&format!("material.rho_{name}"), reason),
            other => semantic("material", other.to_string()),
        })?;
        let system = MaterialSystem {
            constants,
            rho,
            nu: law("nu", m.nu_c, m.nu_ref, m.nu_ell)?,
            phi: law("phi", m.phi_c, m.phi_ref, m.phi_ell)?,
            psi: law("psi", m.psi_c, m.psi_ref, m.psi_ell)?,
        };
        validate_assumptions(&system, SamplingRange::default()).map_err(|e| semantic("material", e.to_string()))?;
        Ok(system)
    }

    pub fn boundary_source(&self) -> Result<BoundarySource, ConfigError> {
        match &self.material.h0_table {
            Some(knots) => BoundarySource::table(knots.iter().map(|k| (k[0], k[1])).collect())
                .map_err(|e| semantic("material.h0_table", e.to_string())),
            None if self.material.h0.is_finite() => Ok(BoundarySource::Constant(self.material.h0)),
            None => Err(semantic("material.h0", "must be finite")),
        }
    }

    pub fn initial_data(&self) -> InitialData {
        let i = &self.initial;
        InitialData {
            stretch: i.stretch,
            alpha: i.alpha,
            pressure: match i.p0_family {
                PressureFamily::Constant => PressureProfile::Constant { mean: i.p0_mean },
                PressureFamily::Cosine => PressureProfile::Cosine {
                    mean: i.p0_mean,
                    amp: i.p0_amp,
                },
            },
            v0_slope: i.v0_slope,
        }
    }

    /// Validates every field and assembles problems and the initial state.
    /// No time step is taken.
    pub fn build(&self) -> Result<Setup, ConfigError> {
        let material = self.material_system()?;
        let h0 = self.boundary_source()?;
        let d = &self.discretization;
        if !(d.t_final.is_finite() && d.t_final > 0.0) {
            return Err(semantic("discretization.t_final", format!("must be > 0, got {}", d.t_final)));
        }
        if !(d.dt.is_finite() && d.dt > 0.0) {
            return Err(semantic("discretization.dt", format!("must be > 0, got {}", d.dt)));
        }
        if !(d.newton_tol > 0.0 && d.newton_tol < 1.0) {
            return Err(semantic("discretization.newton_tol", "must lie in (0, 1)"));
        }
        for (name, n) in [("n_beam", d.n_beam), ("n_pore", d.n_pore)] {
            if n < crate::grid::MIN_CELLS {
                return Err(semantic(
                    &format!("discretization.{name}"),
                    format!("need at least {} cells, got {n}", crate::grid::MIN_CELLS),
                ));
            }
        }
        if !(self.checks.mass_tol > 0.0) {
            return Err(semantic("checks.mass_tol", "must be > 0"));
        }
        if !(self.checks.strain_floor >= 0.0) {
            return Err(semantic("checks.strain_floor", "must be >= 0"));
        }
        self.coupling.validate().map_err(|e| from_error("coupling", e))?;
        let mut beam = BeamProblem::new(material.constants, material.phi, material.nu, d.n_beam, d.dt)
            .map_err(|e| from_error("discretization", e))?;
        beam.newton_tol = d.newton_tol;
        beam.newton_max_iter = d.newton_max_iter;
        beam.gradient_floor = d.gradient_floor;
        beam.validate().map_err(|e| from_error("discretization", e))?;
        let mut pore = DiffusionProblem::new(material.constants, material.rho, material.psi, h0, d.n_pore, d.dt)
            .map_err(|e| from_error("discretization", e))?;
        pore.newton_tol = d.newton_tol;
        pore.newton_max_iter = d.newton_max_iter;
        pore.advection = d.advection;

        let mut initial = self.initial_data();
        initial.check_monotone().map_err(|e| {
            let field = if self.initial.alpha != 0.0 { "initial.alpha" } else { "initial.stretch" };
            semantic(field, e.to_string())
        })?;
        if self.initial.auto_compatibility {
            initial = initial
                .with_compatible_velocity(&material)
                .map_err(|e| semantic("initial", e.to_string()))?;
        } else {
            initial
                .check_compatible(&material)
                .map_err(|e| semantic("initial.v0_slope", e.to_string()))?;
        }
        let (u0, v0, p0) = initial
            .sample(d.n_beam, d.n_pore)
            .map_err(|e| semantic("initial", e.to_string()))?;
        let min_cell = u0.min_cell_gradient();
        if !(min_cell > d.gradient_floor) {
            return Err(semantic(
                "initial.alpha",
                format!("sampled initial strain {min_cell:.3e} is below the gradient floor"),
            ));
        }
        let state = CoupledState::initial(u0, v0, p0, &beam).map_err(|e| semantic("initial", e.to_string()))?;
        Ok(Setup {
            material,
            beam,
            pore,
            coupling: self.coupling,
            initial,
            state,
            t_final: d.t_final,
        })
    }
}
