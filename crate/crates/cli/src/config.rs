//! Run configuration: TOML with dotted keys (`grid.N = 32`), validated on
//! load. Unknown keys are errors.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use landau_core::evolution::{SourceModel, TimeFactor, MAX_LADDER_DEPTH};
use landau_core::field::{packet_field, random_field, FieldProfile, ScalarField, VelocityGrid};
use landau_core::kernel::{KernelParams, QuadratureSpec};
use landau_core::operator::remove_invariants;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(rename = "R")]
    pub half_width: f64,
    #[serde(rename = "N")]
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureConfig {
    pub radial_order: usize,
    pub angular_order: usize,
    pub rtol: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        let q = QuadratureSpec::default();
        Self {
            radial_order: q.radial_order,
            angular_order: q.angular_order,
            rtol: q.rtol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConvConfig {
    /// 1 periodic, 2 linear convolution.
    pub pad: usize,
}

impl Default for ConvConfig {
    fn default() -> Self {
        Self { pad: 1 }
    }
}

/// Profile of the random initial datum; its seed is `verify.seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialConfig {
    pub bandlimit: u32,
    pub envelope_width: f64,
}

impl Default for InitialConfig {
    fn default() -> Self {
        let p = FieldProfile::default();
        Self {
            bandlimit: p.bandlimit,
            envelope_width: p.envelope_width,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceProfile {
    /// Unit-norm centered Gaussian of the given width.
    Gaussian,
    /// The same Gaussian with its mass, momentum and energy components
    /// removed.
    Conservative,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TauKind {
    /// `exp(-params[0] t)`
    Exp,
    /// `sum params[i] t^i`
    Polynomial,
    /// `cos(params[0] t)`
    Cos,
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SourceConfig {
    pub profile: SourceProfile,
    pub width: f64,
    pub amplitude: f64,
    pub tau_kind: TauKind,
    pub params: Vec<f64>,
}

impl Default for SourceConfig {
    fn default() -> Self {
        Self {
            profile: SourceProfile::Conservative,
            width: 1.0,
            amplitude: 1.0,
            tau_kind: TauKind::Exp,
            params: vec![1.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    #[serde(rename = "T")]
    pub horizon: f64,
    #[serde(default = "default_safety")]
    pub safety: f64,
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
}

fn default_safety() -> f64 {
    0.4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LadderConfig {
    #[serde(default = "default_kmax")]
    pub kmax: usize,
    pub eval_times: Vec<f64>,
}

fn default_kmax() -> usize {
    6
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Kernel,
    Coefficients,
    Coercivity,
    Bilinear,
    Energy,
    Smoothing,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Kernel,
        Suite::Coefficients,
        Suite::Coercivity,
        Suite::Bilinear,
        Suite::Energy,
        Suite::Smoothing,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Kernel => "kernel",
            Suite::Coefficients => "coefficients",
            Suite::Coercivity => "coercivity",
            Suite::Bilinear => "bilinear",
            Suite::Energy => "energy",
            Suite::Smoothing => "smoothing",
        }
    }

    pub fn parse(s: &str) -> Option<Suite> {
        Suite::ALL.into_iter().find(|x| x.name() == s)
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub ensemble_size: usize,
    pub seed: u64,
    pub suites: Vec<Suite>,
    /// Seed of the random-only re-check ensemble.
    pub fresh_seed: u64,
    pub slack: f64,
    pub identity_samples: usize,
    pub conv_deltas: Vec<f64>,
    /// Horizon and number of step-halving levels of the energy study.
    pub halving_horizon: f64,
    pub halving_levels: u32,
    /// Coarser grid size for refinement stability; none disables it.
    #[serde(rename = "coarse_N")]
    pub coarse_n: Option<usize>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            ensemble_size: 64,
            seed: 42,
            suites: Suite::ALL.to_vec(),
            fresh_seed: 4242,
            slack: 0.1,
            identity_samples: 1000,
            conv_deltas: vec![0.25, 1.0],
            halving_horizon: 0.125,
            halving_levels: 3,
            coarse_n: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IoConfig {
    pub cache_dir: PathBuf,
    pub out_dir: PathBuf,
}

impl Default for IoConfig {
    fn default() -> Self {
        Self {
            cache_dir: PathBuf::from("cache"),
            out_dir: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub gamma: f64,
    #[serde(default = "default_true")]
    pub mu_normalized: bool,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default)]
    pub conv: ConvConfig,
    #[serde(default)]
    pub initial: InitialConfig,
    #[serde(default)]
    pub source: SourceConfig,
    pub time: TimeConfig,
    pub ladder: LadderConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
    #[serde(default)]
    pub io: IoConfig,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    Read(String),
    Parse(String),
    Invalid(String),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Read(m) => write!(f, "cannot read config: {m}"),
            ConfigError::Parse(m) => write!(f, "config parse error: {m}"),
            ConfigError::Invalid(m) => write!(f, "invalid config: {m}"),
        }
    }
}

impl std::error::Error for ConfigError {}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

fn check_times(name: &str, times: &[f64], horizon: f64) -> Result<(), ConfigError> {
    for &t in times {
        if !(t > 0.0 && t <= horizon) {
            return Err(invalid(format!("{name} entry {t} outside ]0, T] with T = {horizon}")));
        }
    }
    Ok(())
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.gamma > -3.0 && self.gamma < 0.0) {
            return Err(invalid(format!(
                "gamma = {} is outside the soft potential range -3 < gamma < 0",
                self.gamma
            )));
        }
        let n = self.grid.n;
        if n < 16 || n % 2 != 0 {
            return Err(invalid(format!("grid.N = {n} must be even and at least 16")));
        }
        if !(self.grid.half_width > 0.0 && self.grid.half_width.is_finite()) {
            return Err(invalid("grid.R must be positive"));
        }
        if let Some(c) = self.verify.coarse_n {
            if c < 16 || c % 2 != 0 || c >= n {
                return Err(invalid(format!("verify.coarse_N = {c} must be even, at least 16 and below grid.N")));
            }
        }
        if !(self.time.horizon > 0.0 && self.time.horizon.is_finite()) {
            return Err(invalid(format!("time.T = {} must be positive", self.time.horizon)));
        }
        if !(self.time.safety > 0.0 && self.time.safety <= 1.0) {
            return Err(invalid("time.safety must lie in ]0, 1]"));
        }
        check_times("time.snapshot_times", &self.time.snapshot_times, self.time.horizon)?;
        check_times("ladder.eval_times", &self.ladder.eval_times, self.time.horizon)?;
        if self.ladder.kmax > MAX_LADDER_DEPTH {
            return Err(invalid(format!(
                "ladder.kmax = {} exceeds the cap {MAX_LADDER_DEPTH}",
                self.ladder.kmax
            )));
        }
        if self.conv.pad != 1 && self.conv.pad != 2 {
            return Err(invalid("conv.pad must be 1 or 2"));
        }
        self.quadrature_spec()
            .validate()
            .map_err(|e| invalid(format!("quadrature: {e}")))?;
        if self.verify.ensemble_size < 2 {
            return Err(invalid("verify.ensemble_size must be at least 2"));
        }
        if self.verify.fresh_seed == self.verify.seed {
            return Err(invalid("verify.fresh_seed must differ from verify.seed"));
        }
        if !(self.verify.halving_horizon > 0.0) || self.verify.halving_levels < 2 {
            return Err(invalid("energy study needs a positive horizon and at least two levels"));
        }
        if self.verify.conv_deltas.iter().any(|d| !(*d > 0.0)) {
            return Err(invalid("verify.conv_deltas must be positive"));
        }
        if !(self.source.width > 0.0) {
            return Err(invalid("source.width must be positive"));
        }
        let need = match self.source.tau_kind {
            TauKind::Exp | TauKind::Cos => 1,
            TauKind::Polynomial => 1,
            TauKind::Zero => 0,
        };
        if self.source.params.len() < need {
            return Err(invalid(format!("source.params needs {need} value(s) for {:?}", self.source.tau_kind)));
        }
        Ok(())
    }

    pub fn kernel_params(&self) -> KernelParams {
        KernelParams::new(self.gamma, self.mu_normalized).expect("validated")
    }

    pub fn quadrature_spec(&self) -> QuadratureSpec {
        QuadratureSpec {
            radial_order: self.quadrature.radial_order,
            angular_order: self.quadrature.angular_order,
            rtol: self.quadrature.rtol,
        }
    }

    pub fn velocity_grid(&self) -> VelocityGrid {
        VelocityGrid::new(self.grid.half_width, self.grid.n).expect("validated")
    }

    /// Same configuration on `N` nodes per axis.
    pub fn with_grid_size(&self, n: usize) -> RunConfig {
        let mut c = self.clone();
        c.grid.n = n;
        c.verify.coarse_n = None;
        c
    }

    pub fn field_profile(&self) -> FieldProfile {
        FieldProfile {
            bandlimit: self.initial.bandlimit,
            envelope_width: self.initial.envelope_width,
        }
    }

    pub fn initial_field(&self, grid: VelocityGrid) -> landau_core::Result<ScalarField> {
        random_field(grid, self.verify.seed, self.field_profile())
    }

    pub fn source_model(&self, grid: VelocityGrid) -> landau_core::Result<SourceModel> {
        let s = &self.source;
        let phi = match s.profile {
            SourceProfile::None => return Ok(SourceModel::zero(grid)),
            SourceProfile::Gaussian => packet_field(grid, [0.0; 3], s.width, [0.0; 3])?,
            SourceProfile::Conservative => remove_invariants(&packet_field(grid, [0.0; 3], s.width, [0.0; 3])?),
        };
        let tau = match s.tau_kind {
            TauKind::Exp => TimeFactor::Exp { rate: s.params[0] },
            TauKind::Polynomial => TimeFactor::Polynomial {
                coeffs: s.params.clone(),
            },
            TauKind::Cos => TimeFactor::Cos { omega: s.params[0] },
            TauKind::Zero => TimeFactor::Zero,
        };
        Ok(SourceModel::new(phi.scaled(s.amplitude), tau))
    }

    /// Snapshot times of a run: configured snapshots plus ladder times,
    /// sorted and deduplicated.
    pub fn all_snapshot_times(&self) -> Vec<f64> {
        let mut t: Vec<f64> = self
            .time
            .snapshot_times
            .iter()
            .chain(&self.ladder.eval_times)
            .copied()
            .collect();
        t.sort_by(f64::total_cmp);
        t.dedup();
        t
    }

    /// SHA-256 of the canonical JSON form, without the `io` section (paths
    /// do not change results).
    pub fn fingerprint(&self) -> String {
        let mut c = self.clone();
        c.io = IoConfig::default();
        let json = serde_json::to_string(&c).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}
