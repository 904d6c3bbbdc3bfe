//! Shot-noise and phase-noise figures with and without the channel.
//!
//! Closed forms sit next to Monte Carlo estimators that sample the
//! underlying counting and fluctuation models directly.
//!
//! # Shot noise with the channel
//!
//! Two counting models are available:
//!
//! * [`ShotNoiseModel::AtomLoss`] (default): velocity selection keeps half
//!   the atoms, `N/2`, and the ground-state count among them is binomial with
//!   the direct fringe probability. The count is read against the
//!   half-amplitude fringe `N₁/N = (1 + cos Δφ)/4`. The phase noise is then
//!   `√(2/N)` at every mean phase.
//! * [`ShotNoiseModel::Naive`]: `N₁ ~ Binomial(N, (1 + cos Δφ)/4)` over all
//!   `N` atoms. This gives `√((1+cos)(3−cos)/N)/|sin|`, which is `√3/√N` at
//!   Δφ = π/2 and not a constant multiple of the direct figure.
//!
//! # Phase noise
//!
//! Phase samples are Gaussian around the mean with variance
//! `c²·κ·(1 + cos⟨Δφ⟩)/2`, where κ = 1 without the channel, ½ for the Bell
//! channel and |a||b| for a general channel. The sample standard deviation is
//! therefore `c·√κ·|cos(⟨Δφ⟩/2)|`; the closed-form figure `c·√κ·sin(⟨Δφ⟩/2)`
//! coincides with it at ⟨Δφ⟩ = π/2, and the with/without ratio `√κ` holds at
//! every mean phase.
//!
//! # Random streams
//!
//! Run `r` of estimator `tag` draws from ChaCha8 keyed by
//! `seed.to_le_bytes() ‖ tag.to_le_bytes() ‖ 0…`, on stream `r`. Every run
//! owns its generator, so serial and parallel execution give identical
//! samples.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::mean_and_std;

/// Default phase-vs-shot dominance weight.
pub const DEFAULT_DOMINANCE_WEIGHT: f64 = 100.0;
/// Below this |sin⟨Δφ⟩| the linearised count-to-phase inversion is refused.
pub const MIN_FRINGE_SLOPE: f64 = 0.1;

const TAG_SHOT_DIRECT: u64 = 1;
const TAG_SHOT_ATOM_LOSS: u64 = 2;
const TAG_SHOT_NAIVE: u64 = 3;
const TAG_PHASE_DIRECT: u64 = 4;
const TAG_PHASE_CHANNEL: u64 = 5;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ShotNoiseModel {
    #[default]
    AtomLoss,
    Naive,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NoiseParams {
    /// Atoms per phase measurement, N.
    pub n_atoms: u64,
    /// Phase-noise proportionality constant.
    pub c: f64,
    pub delta_phi_mean: f64,
    pub seed: u64,
    /// Monte Carlo repetitions.
    pub n_runs: usize,
    pub dominance_weight: f64,
    pub shot_model: ShotNoiseModel,
}

impl Default for NoiseParams {
    fn default() -> Self {
        NoiseParams {
            n_atoms: 1_000_000,
            c: 1e-3,
            delta_phi_mean: std::f64::consts::FRAC_PI_2,
            seed: 42,
            n_runs: 10_000,
            dominance_weight: DEFAULT_DOMINANCE_WEIGHT,
            shot_model: ShotNoiseModel::AtomLoss,
        }
    }
}

impl NoiseParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_atoms < 1 {
            return Err(Error::InvalidParameter("n_atoms must be >= 1".into()));
        }
        if !self.c.is_finite() || self.c < 0.0 {
            return Err(Error::InvalidParameter(format!("c must be finite and >= 0, got {}", self.c)));
        }
        if !self.delta_phi_mean.is_finite() {
            return Err(Error::InvalidParameter("delta_phi_mean must be finite".into()));
        }
        if self.n_runs < 2 {
            return Err(Error::InvalidParameter(format!(
                "n_runs must be >= 2 for a variance estimate, got {}",
                self.n_runs
            )));
        }
        if !self.dominance_weight.is_finite() || self.dominance_weight < 0.0 {
            return Err(Error::InvalidParameter("dominance_weight must be finite and >= 0".into()));
        }
        Ok(())
    }
}

/// Readout path for the phase-noise model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum PhaseNoiseChannel {
    Direct,
    Bell,
    /// General channel with remote-ground amplitude |a|.
    General {
        a_abs: f64,
    },
}

impl PhaseNoiseChannel {
    /// Variance scale κ relative to the direct readout.
    fn variance_scale(&self) -> f64 {
        match *self {
            PhaseNoiseChannel::Direct => 1.0,
            PhaseNoiseChannel::Bell => 0.5,
            PhaseNoiseChannel::General { a_abs } => a_abs * (1.0 - a_abs * a_abs).max(0.0).sqrt(),
        }
    }
}

/// A Monte Carlo standard-deviation estimate and its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub n_runs: usize,
}

impl McEstimate {
    fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len();
        let (_, sd) = mean_and_std(samples);
        McEstimate { estimate: sd, std_error: sd / (2.0 * (n as f64 - 1.0)).sqrt(), n_runs: n }
    }

    /// Number of standard errors between the estimate and `target`.
    pub fn z_score(&self, target: f64) -> f64 {
        (self.estimate - target) / self.std_error
    }
}

/// Ratio of two independent Monte Carlo estimates with propagated error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct McRatio {
    pub estimate: f64,
    pub std_error: f64,
}

impl McRatio {
    pub fn of(num: McEstimate, den: McEstimate) -> Self {
        let r = num.estimate / den.estimate;
        let rel = ((num.std_error / num.estimate).powi(2) + (den.std_error / den.estimate).powi(2)).sqrt();
        McRatio { estimate: r, std_error: (r * rel).abs() }
    }
}

/// `1/√N` without the channel, `√(2/N)` with it.
pub fn shot_noise_closed_form(n_atoms: u64, with_channel: bool) -> f64 {
    let n = n_atoms as f64;
    if with_channel {
        (2.0 / n).sqrt()
    } else {
        1.0 / n.sqrt()
    }
}

/// Closed-form phase noise of the naive counting model.
pub fn naive_channel_shot_noise(n_atoms: u64, delta_phi_mean: f64) -> f64 {
    let p = 0.25 * (1.0 + delta_phi_mean.cos());
    (p * (1.0 - p) / n_atoms as f64).sqrt() / (0.25 * delta_phi_mean.sin().abs())
}

/// `c·sin(⟨Δφ⟩/2)` scaled by √κ of the readout path.
pub fn phase_noise_closed_form(c: f64, delta_phi_mean: f64, channel: PhaseNoiseChannel) -> f64 {
    c * (0.5 * delta_phi_mean).sin() * phase_noise_ratio(channel)
}

/// With/without-channel phase-noise ratio: 1/√2 for Bell, √(|a||b|) in general.
pub fn phase_noise_ratio(channel: PhaseNoiseChannel) -> f64 {
    match channel {
        PhaseNoiseChannel::Bell => std::f64::consts::FRAC_1_SQRT_2,
        other => other.variance_scale().sqrt(),
    }
}

fn stream_rng(seed: u64, tag: u64, run: usize) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&tag.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(run as u64);
    rng
}

fn sample_runs<F>(params: &NoiseParams, tag: u64, draw: F) -> Vec<f64>
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    (0..params.n_runs).into_par_iter().map(|r| draw(&mut stream_rng(params.seed, tag, r))).collect()
}

/// Shot-noise Monte Carlo using the model in `params.shot_model` for the
/// channel case.
pub fn mc_shot_noise(params: &NoiseParams, with_channel: bool) -> Result<McEstimate> {
    mc_shot_noise_with_model(params, with_channel, params.shot_model)
}

pub fn mc_shot_noise_with_model(
    params: &NoiseParams,
    with_channel: bool,
    model: ShotNoiseModel,
) -> Result<McEstimate> {
    params.validate()?;
    let mean = params.delta_phi_mean;
    let slope = mean.sin();
    if slope.abs() <= MIN_FRINGE_SLOPE {
        return Err(Error::IllConditioned(slope.abs()));
    }
    let n = params.n_atoms;
    let nf = n as f64;
    let p_direct = 0.5 * (1.0 + mean.cos());
    let binomial = |trials: u64, p: f64| {
        Binomial::new(trials, p.clamp(0.0, 1.0))
            .map_err(|e| Error::InvalidParameter(format!("binomial: {e}")))
    };
    // Linearised inversion: Δφ ≈ ⟨Δφ⟩ + (count/N − P)/(dP/dΔφ).
    let samples = if !with_channel {
        let dist = binomial(n, p_direct)?;
        let dp = -0.5 * slope;
        sample_runs(params, TAG_SHOT_DIRECT, |rng| mean + (dist.sample(rng) as f64 / nf - p_direct) / dp)
    } else {
        let p_channel = 0.5 * p_direct;
        let dp = -0.25 * slope;
        match model {
            ShotNoiseModel::AtomLoss => {
                let dist = binomial(n / 2, p_direct)?;
                let expected = (n / 2) as f64 * p_direct / nf;
                sample_runs(params, TAG_SHOT_ATOM_LOSS, |rng| {
                    mean + (dist.sample(rng) as f64 / nf - expected) / dp
                })
            }
            ShotNoiseModel::Naive => {
                let dist = binomial(n, p_channel)?;
                sample_runs(params, TAG_SHOT_NAIVE, |rng| {
                    mean + (dist.sample(rng) as f64 / nf - p_channel) / dp
                })
            }
        }
    };
    Ok(McEstimate::from_samples(&samples))
}

/// Phase-noise Monte Carlo: standard deviation of Gaussian phase samples
/// under the fluorescence-proportional variance model.
pub fn mc_phase_noise(params: &NoiseParams, channel: PhaseNoiseChannel) -> Result<McEstimate> {
    params.validate()?;
    let mean = params.delta_phi_mean;
    let variance = params.c * params.c * channel.variance_scale() * 0.5 * (1.0 + mean.cos());
    let sd = variance.sqrt();
    let tag = match channel {
        PhaseNoiseChannel::Direct => TAG_PHASE_DIRECT,
        _ => TAG_PHASE_CHANNEL,
    };
    let samples = sample_runs(params, tag, |rng| {
        let z: f64 = StandardNormal.sample(rng);
        mean + sd * z
    });
    Ok(McEstimate::from_samples(&samples))
}

pub fn mc_phase_ratio(params: &NoiseParams, channel: PhaseNoiseChannel) -> Result<McRatio> {
    let with = mc_phase_noise(params, channel)?;
    let without = mc_phase_noise(params, PhaseNoiseChannel::Direct)?;
    Ok(McRatio::of(with, without))
}

/// `√((w·phase)² + shot²)`.
pub fn combined_noise(shot: f64, phase: f64, weight: f64) -> f64 {
    ((weight * phase).powi(2) + shot * shot).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NoiseReport {
    pub shot_no_channel: f64,
    pub shot_with_channel: f64,
    pub shot_ratio: f64,
    /// Closed form of the naive counting model, for comparison.
    pub shot_with_channel_naive: f64,
    pub phase_no_channel: f64,
    pub phase_with_channel: f64,
    pub phase_ratio: f64,
    pub dominance_weight: f64,
    pub combined_no_channel: f64,
    pub combined_with_channel: f64,
    pub combined_ratio: f64,
    pub channel_reduces_noise: bool,
    pub shot_model: ShotNoiseModel,
    pub mc_shot_no_channel: McEstimate,
    pub mc_shot_with_channel: McEstimate,
    pub mc_shot_with_channel_naive: McEstimate,
    pub mc_phase_no_channel: McEstimate,
    pub mc_phase_with_channel: McEstimate,
    pub mc_phase_ratio: McRatio,
}

/// All closed-form and Monte Carlo figures for the Bell channel.
pub fn snr_report(params: &NoiseParams) -> Result<NoiseReport> {
    params.validate()?;
    let shot_no = shot_noise_closed_form(params.n_atoms, false);
    let shot_with = match params.shot_model {
        ShotNoiseModel::AtomLoss => shot_noise_closed_form(params.n_atoms, true),
        ShotNoiseModel::Naive => naive_channel_shot_noise(params.n_atoms, params.delta_phi_mean),
    };
    let phase_no = phase_noise_closed_form(params.c, params.delta_phi_mean, PhaseNoiseChannel::Direct);
    let phase_with = phase_noise_closed_form(params.c, params.delta_phi_mean, PhaseNoiseChannel::Bell);
    let w = params.dominance_weight;
    let combined_no = combined_noise(shot_no, phase_no, w);
    let combined_with = combined_noise(shot_with, phase_with, w);

    let mc_phase_no = mc_phase_noise(params, PhaseNoiseChannel::Direct)?;
    let mc_phase_with = mc_phase_noise(params, PhaseNoiseChannel::Bell)?;
    Ok(NoiseReport {
        shot_no_channel: shot_no,
        shot_with_channel: shot_with,
        shot_ratio: shot_with / shot_no,
        shot_with_channel_naive: naive_channel_shot_noise(params.n_atoms, params.delta_phi_mean),
        phase_no_channel: phase_no,
        phase_with_channel: phase_with,
        phase_ratio: phase_noise_ratio(PhaseNoiseChannel::Bell),
        dominance_weight: w,
        combined_no_channel: combined_no,
        combined_with_channel: combined_with,
        combined_ratio: combined_with / combined_no,
        channel_reduces_noise: combined_with < combined_no,
        shot_model: params.shot_model,
        mc_shot_no_channel: mc_shot_noise(params, false)?,
        mc_shot_with_channel: mc_shot_noise(params, true)?,
        mc_shot_with_channel_naive: mc_shot_noise_with_model(params, true, ShotNoiseModel::Naive)?,
        mc_phase_no_channel: mc_phase_no,
        mc_phase_with_channel: mc_phase_with,
        mc_phase_ratio: McRatio::of(mc_phase_with, mc_phase_no),
    })
}
