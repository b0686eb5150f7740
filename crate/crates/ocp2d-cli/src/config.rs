//! Experiment configuration: a single versioned TOML file with per-command
//! sections. Unknown keys are hard errors so typos cannot silently change a
//! run.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use ocp2d::Region;

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    /// Must match the invoked subcommand.
    pub command: String,
    pub seeds: Vec<u64>,
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
    #[serde(default)]
    pub model: Option<ModelSection>,
    #[serde(default)]
    pub sampler: Option<SamplerSection>,
    #[serde(default)]
    pub statistics: Option<StatisticsSection>,
    #[serde(default)]
    pub ginibre: Option<GinibreSection>,
    #[serde(default)]
    pub poisson: Option<PoissonSection>,
    #[serde(default)]
    pub errorci: Option<ErrorCiSection>,
    #[serde(default)]
    pub spinwave_check: Option<SpinwaveSection>,
    #[serde(default)]
    pub transport_check: Option<TransportSection>,
    #[serde(default)]
    pub audit: Option<AuditSection>,
    #[serde(default)]
    pub report: Option<ReportSection>,
}

fn default_output_dir() -> String {
    "runs".into()
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub beta: f64,
    pub n_points: usize,
    #[serde(default = "default_bulk_delta")]
    pub bulk_delta: f64,
}

fn default_bulk_delta() -> f64 {
    0.15
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerSection {
    #[serde(default = "default_proposal_scale")]
    pub proposal_scale: f64,
    pub sweeps: usize,
    pub burn_in: usize,
    #[serde(default = "default_thin")]
    pub thin: usize,
    /// Sweeps between checkpoint flushes; 0 = only at the end / on interrupt.
    #[serde(default)]
    pub checkpoint_every: usize,
}

fn default_proposal_scale() -> f64 {
    0.5
}

fn default_thin() -> usize {
    1
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct StatisticsSection {
    #[serde(default)]
    pub radii: Vec<f64>,
    #[serde(default)]
    pub thresholds: Vec<f64>,
    #[serde(default)]
    pub center: [f64; 2],
    #[serde(default)]
    pub tail_region: Option<Region>,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GinibreSection {
    pub n_points: usize,
    pub n_samples: usize,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PoissonSection {
    pub intensity: f64,
    pub region: Region,
    pub n_samples: usize,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ErrorCiSection {
    /// Disk radii T to sweep.
    pub t_sweep: Vec<f64>,
    pub n_instances: usize,
    #[serde(default = "default_min_subsystems")]
    pub min_subsystems: usize,
    #[serde(default = "default_max_subsystems")]
    pub max_subsystems: usize,
}

fn default_min_subsystems() -> usize {
    2
}

fn default_max_subsystems() -> usize {
    5
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SpinwaveSection {
    pub epsilon: f64,
    pub ell: f64,
    pub t: f64,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct TransportSection {
    pub s: f64,
    pub beta: f64,
    pub phi_inner: f64,
    pub phi_outer: f64,
    #[serde(default = "default_phi_height")]
    pub phi_height: f64,
    pub n_samples: usize,
}

fn default_phi_height() -> f64 {
    1.0
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct AuditSection {
    pub n_samples: usize,
    #[serde(default = "default_c_beta")]
    pub c_beta: f64,
    #[serde(default = "default_square_side")]
    pub square_side: f64,
    #[serde(default = "default_grid_h")]
    pub grid_h: f64,
    #[serde(default = "default_wellspread_k")]
    pub wellspread_k: f64,
    #[serde(default = "default_wellspread_ell")]
    pub wellspread_ell: f64,
    /// Sample source: "poisson" or "ginibre".
    #[serde(default = "default_audit_source")]
    pub source: String,
}

fn default_c_beta() -> f64 {
    20.0
}
fn default_square_side() -> f64 {
    4.0
}
fn default_grid_h() -> f64 {
    0.1
}
fn default_wellspread_k() -> f64 {
    20.0
}
fn default_wellspread_ell() -> f64 {
    4.0
}
fn default_audit_source() -> String {
    "ginibre".into()
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ReportSection {
    pub inputs: Vec<String>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<(Self, Vec<u8>), CliError> {
        let bytes = std::fs::read(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let text = std::str::from_utf8(&bytes)
            .map_err(|e| CliError::Config(format!("config is not UTF-8: {e}")))?;
        let cfg: ExperimentConfig = toml::from_str(text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        if cfg.version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "unsupported config version {} (expected {SCHEMA_VERSION})",
                cfg.version
            )));
        }
        if cfg.seeds.is_empty() {
            return Err(CliError::Config("seeds must be nonempty".into()));
        }
        Ok((cfg, bytes))
    }

    pub fn require_model(&self) -> Result<&ModelSection, CliError> {
        self.model.as_ref().ok_or_else(|| CliError::Config("missing [model] section".into()))
    }

    pub fn require_sampler(&self) -> Result<&SamplerSection, CliError> {
        self.sampler.as_ref().ok_or_else(|| CliError::Config("missing [sampler] section".into()))
    }

    pub fn require_statistics(&self) -> Result<&StatisticsSection, CliError> {
        self.statistics
            .as_ref()
            .ok_or_else(|| CliError::Config("missing [statistics] section".into()))
    }
}

/// Hex SHA-256 of arbitrary bytes (content hashes and config digests).
pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    let out = h.finalize();
    let mut s = String::with_capacity(64);
    for b in out {
        s.push_str(&format!("{b:02x}"));
    }
    s
}

/// Digest binding the config bytes to the command and effective seeds.
pub fn config_digest(config_bytes: &[u8], command: &str, seeds: &[u64]) -> String {
    let mut material = Vec::from(config_bytes);
    material.extend_from_slice(command.as_bytes());
    for s in seeds {
        material.extend_from_slice(&s.to_le_bytes());
    }
    sha256_hex(&material)
}
