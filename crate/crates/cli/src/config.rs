//! JSON run configuration. Parsing rejects unknown keys; [`RunConfig::validate`]
//! checks every value before any computation starts.

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::PathBuf;

use gravchan_core::interferometer::{GravityModel, PulseTiming};
use gravchan_core::noise::{NoiseParams, ShotNoiseModel};
use gravchan_core::{ChannelSpec, Complex64, InterferometerParams, LaserPhases};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_version")]
    pub version: u32,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub interferometer: InterferometerConfig,
    #[serde(default)]
    pub channel: ChannelConfig,
    /// 0-based index of the atom read out; must not be the probe (last atom).
    #[serde(default)]
    pub remote_atom: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanConfig>,
    #[serde(default)]
    pub noise: NoiseConfig,
    #[serde(default)]
    pub optimize: OptimizeConfig,
    #[serde(default)]
    pub prepare: PrepareConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_version() -> u32 {
    CONFIG_VERSION
}

fn default_seed() -> u64 {
    42
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            version: CONFIG_VERSION,
            seed: default_seed(),
            interferometer: InterferometerConfig::default(),
            channel: ChannelConfig::default(),
            remote_atom: 0,
            scan: None,
            noise: NoiseConfig::default(),
            optimize: OptimizeConfig::default(),
            prepare: PrepareConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InterferometerConfig {
    /// Effective wave number, m⁻¹.
    pub k: f64,
    /// Pulse separation, s.
    pub t: f64,
    /// Gravitational acceleration at the reference height, m·s⁻².
    pub g0: f64,
    /// Fractional gradient per metre; multiplied by `g0` to give γ in s⁻².
    pub gradient_per_m: f64,
    pub gradient_correction: bool,
    /// Laser phases φ1, φ2, φ3 in radians.
    pub phases: [f64; 3],
}

impl Default for InterferometerConfig {
    fn default() -> Self {
        InterferometerConfig {
            k: 1.61e7,
            t: 0.1,
            g0: 9.8,
            gradient_per_m: 3e-7,
            gradient_correction: false,
            phases: [0.0; 3],
        }
    }
}

/// A complex amplitude: a bare number or `[re, im]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Amplitude {
    Real(f64),
    Complex([f64; 2]),
}

impl Amplitude {
    pub fn value(self) -> Complex64 {
        match self {
            Amplitude::Real(re) => Complex64::new(re, 0.0),
            Amplitude::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelConfig {
    // Empty braces so that stray keys are rejected for these kinds too.
    Bell {},
    General { a: Amplitude, b: Amplitude },
    Cat { atoms: usize },
    ClassicalMixture {},
}

impl Default for ChannelConfig {
    fn default() -> Self {
        ChannelConfig::Bell {}
    }
}

impl ChannelConfig {
    pub fn spec(&self) -> ChannelSpec {
        match *self {
            ChannelConfig::Bell {} => ChannelSpec::Bell,
            ChannelConfig::General { a, b } => ChannelSpec::General { a: a.value(), b: b.value() },
            ChannelConfig::Cat { atoms } => ChannelSpec::Cat { atoms },
            ChannelConfig::ClassicalMixture {} => ChannelSpec::ClassicalMixture,
        }
    }
}

/// Either an explicit list or `points` evenly spaced values on `[start, stop)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_phi: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
}

impl ScanConfig {
    pub fn grid(&self) -> Result<Vec<f64>, CliError> {
        let ranged = self.points.is_some() || self.start.is_some() || self.stop.is_some();
        let grid = match (&self.delta_phi, ranged) {
            (Some(_), true) => {
                return Err(CliError::Config(
                    "scan: give either delta_phi or points/start/stop, not both".into(),
                ))
            }
            (Some(list), false) => list.clone(),
            (None, _) => {
                let points = self.points.ok_or_else(|| CliError::Config("scan.points is required".into()))?;
                let start = self.start.unwrap_or(0.0);
                let stop = self.stop.unwrap_or(2.0 * PI);
                if !start.is_finite() || !stop.is_finite() || stop <= start {
                    return Err(CliError::Config(format!(
                        "scan range [{start}, {stop}) is empty or not finite"
                    )));
                }
                let step = (stop - start) / points as f64;
                (0..points).map(|j| start + step * j as f64).collect()
            }
        };
        if grid.is_empty() {
            return Err(CliError::Config("scan grid is empty".into()));
        }
        if let Some(x) = grid.iter().find(|x| !x.is_finite()) {
            return Err(CliError::Config(format!("scan grid contains {x}")));
        }
        Ok(grid)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseConfig {
    pub n_atoms: u64,
    pub c: f64,
    pub delta_phi_mean: f64,
    pub n_runs: usize,
    pub dominance_weight: f64,
    pub shot_model: ShotModelConfig,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        let p = NoiseParams::default();
        NoiseConfig {
            n_atoms: p.n_atoms,
            c: p.c,
            delta_phi_mean: FRAC_PI_2,
            n_runs: p.n_runs,
            dominance_weight: p.dominance_weight,
            shot_model: ShotModelConfig::AtomLoss,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShotModelConfig {
    #[default]
    AtomLoss,
    Naive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizeConfig {
    /// Final bracket width of the golden-section search.
    pub tolerance: f64,
    /// Δφ points in the fringe-averaged entropy.
    pub grid_points: usize,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        OptimizeConfig { tolerance: 1e-4, grid_points: gravchan_core::optimize::ENTROPY_GRID_POINTS }
    }
}

/// Pulse areas Ωt for the two cavity transits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PrepareConfig {
    pub omega_t1: f64,
    pub omega_t2: f64,
}

impl Default for PrepareConfig {
    fn default() -> Self {
        PrepareConfig { omega_t1: FRAC_PI_2, omega_t2: PI }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<PathBuf>,
}

fn finite(name: &str, x: f64) -> Result<(), CliError> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(CliError::Config(format!("{name} must be finite, got {x}")))
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))
    }

    pub fn interferometer_params(&self) -> Result<InterferometerParams, CliError> {
        let i = &self.interferometer;
        for (name, x) in [("interferometer.gradient_per_m", i.gradient_per_m)]
            .into_iter()
            .chain(i.phases.iter().map(|&p| ("interferometer.phases", p)))
        {
            finite(name, x)?;
        }
        let timing = PulseTiming::new(i.t, i.k).map_err(CliError::config)?;
        let gravity =
            GravityModel::from_fractional_gradient(i.g0, i.gradient_per_m).map_err(CliError::config)?;
        let [p1, p2, p3] = i.phases;
        Ok(InterferometerParams::new(timing, gravity, LaserPhases::new(p1, p2, p3), i.gradient_correction))
    }

    pub fn noise_params(&self) -> Result<NoiseParams, CliError> {
        let n = &self.noise;
        let p = NoiseParams {
            n_atoms: n.n_atoms,
            c: n.c,
            delta_phi_mean: n.delta_phi_mean,
            seed: self.seed,
            n_runs: n.n_runs,
            dominance_weight: n.dominance_weight,
            shot_model: match n.shot_model {
                ShotModelConfig::AtomLoss => ShotNoiseModel::AtomLoss,
                ShotModelConfig::Naive => ShotNoiseModel::Naive,
            },
        };
        p.validate().map_err(CliError::config)?;
        Ok(p)
    }

    pub fn channel_spec(&self) -> Result<ChannelSpec, CliError> {
        let spec = self.channel.spec();
        spec.validate().map_err(CliError::config)?;
        let probe = spec.n_atoms() - 1;
        if self.remote_atom >= probe {
            return Err(CliError::Config(format!(
                "remote_atom {} must be below the probe index {probe}",
                self.remote_atom
            )));
        }
        Ok(spec)
    }

    pub fn scan_grid(&self) -> Result<Option<Vec<f64>>, CliError> {
        self.scan.as_ref().map(ScanConfig::grid).transpose()
    }

    pub fn validate_optimize(&self) -> Result<(), CliError> {
        let o = &self.optimize;
        if !(o.tolerance > 0.0 && o.tolerance < 1.0) {
            return Err(CliError::Config(format!(
                "optimize.tolerance must be in (0, 1), got {}",
                o.tolerance
            )));
        }
        if o.grid_points < 2 {
            return Err(CliError::Config(format!(
                "optimize.grid_points must be >= 2, got {}",
                o.grid_points
            )));
        }
        Ok(())
    }

    pub fn validate_prepare(&self) -> Result<(), CliError> {
        finite("prepare.omega_t1", self.prepare.omega_t1)?;
        finite("prepare.omega_t2", self.prepare.omega_t2)
    }

    /// Checks every section, whichever command runs.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.version != CONFIG_VERSION {
            return Err(CliError::Config(format!(
                "unsupported config version {}, expected {CONFIG_VERSION}",
                self.version
            )));
        }
        self.interferometer_params()?;
        self.channel_spec()?;
        self.scan_grid()?;
        self.noise_params()?;
        self.validate_optimize()?;
        self.validate_prepare()
    }
}
