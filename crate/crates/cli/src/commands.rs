use std::path::PathBuf;

use gravchan_core::channel::{make_channel, prepare_pair, CavityPreparation, Channel};
use gravchan_core::noise::{combined_noise, snr_report, McRatio, NoiseReport, MIN_FRINGE_SLOPE};
use gravchan_core::optimize::{
    fringe_averaged_entropy_on, golden_section_maximize, png_ratio_extremum, OptimizationResult,
};
use gravchan_core::protocol::{direct_measurement, fringe_scan};
use gravchan_core::{ChannelSpec, PureState};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{num, Csv};

pub const FRINGE_COLUMNS: [&str; 5] =
    ["delta_phi_rad", "p_direct", "p_channel_joint_g", "p_channel_closed_form", "abs_error"];
pub const NOISE_COLUMNS: [&str; 4] = ["metric", "closed_form", "mc_estimate", "mc_std_error"];

/// Everything a command produces, before it touches the file system.
#[derive(Debug, Clone, PartialEq)]
pub struct CommandOutput {
    pub csv: Option<(PathBuf, String)>,
    pub summary_path: PathBuf,
    pub summary: Value,
}

fn envelope(command: &str, config: &RunConfig, result: Value) -> Result<Value, CliError> {
    let config = serde_json::to_value(config).map_err(|e| CliError::Internal(e.to_string()))?;
    Ok(json!({
        "format_version": crate::SUMMARY_FORMAT_VERSION,
        "command": command,
        "config": config,
        "result": result,
    }))
}

fn summary_path(config: &RunConfig, command: &str) -> PathBuf {
    config.output.summary.clone().unwrap_or_else(|| PathBuf::from(format!("{command}_summary.json")))
}

fn csv_path(config: &RunConfig, command: &str) -> PathBuf {
    config.output.csv.clone().unwrap_or_else(|| PathBuf::from(format!("{command}.csv")))
}

fn to_value<T: Serialize>(x: &T) -> Result<Value, CliError> {
    serde_json::to_value(x).map_err(|e| CliError::Internal(e.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FringeRow {
    pub delta_phi_rad: f64,
    pub p_direct: f64,
    pub p_channel_joint_g: f64,
    pub p_channel_closed_form: f64,
    pub abs_error: f64,
}

/// Direct and channel fringes on the configured grid, or at the single phase
/// implied by (k, T, g) when no grid is given.
pub fn fringe_rows(config: &RunConfig) -> Result<Vec<FringeRow>, CliError> {
    let params = config.interferometer_params()?;
    let spec = config.channel_spec()?;
    let grid = config.scan_grid()?.unwrap_or_else(|| vec![params.delta_phi()]);
    let scan = fringe_scan(&spec, &params, config.remote_atom, &grid).map_err(CliError::internal)?;
    scan.iter()
        .map(|pt| {
            let o = pt.outcome;
            Ok(FringeRow {
                delta_phi_rad: pt.delta_phi,
                p_direct: direct_measurement(&params, Some(pt.delta_phi)).map_err(CliError::internal)?,
                p_channel_joint_g: o.p_joint_g,
                p_channel_closed_form: o.p_closed_form,
                abs_error: (o.p_joint_g - o.p_closed_form).abs(),
            })
        })
        .collect()
}

pub fn cmd_fringe(config: &RunConfig) -> Result<CommandOutput, CliError> {
    config.validate()?;
    let rows = fringe_rows(config)?;
    let mut csv = Csv::new(&FRINGE_COLUMNS);
    for r in &rows {
        csv.row(
            [r.delta_phi_rad, r.p_direct, r.p_channel_joint_g, r.p_channel_closed_form, r.abs_error].map(num),
        );
    }
    let max_abs_error = rows.iter().map(|r| r.abs_error).fold(0.0, f64::max);
    let path = csv_path(config, "fringe");
    let result = json!({
        "points": rows.len(),
        "remote_atom": config.remote_atom,
        "max_abs_error": max_abs_error,
        "delta_phi_from_params": config.interferometer_params()?.delta_phi(),
        "csv": path,
    });
    Ok(CommandOutput {
        csv: Some((path, csv.finish())),
        summary_path: summary_path(config, "fringe"),
        summary: envelope("fringe", config, result)?,
    })
}

fn noise_table(r: &NoiseReport) -> Csv {
    let mut csv = Csv::new(&NOISE_COLUMNS);
    let mut put = |metric: &str, closed: f64, mc: Option<f64>, se: Option<f64>| {
        let cell = |x: Option<f64>| x.map(num).unwrap_or_default();
        csv.row([metric.to_string(), num(closed), cell(mc), cell(se)]);
    };
    let shot_ratio = McRatio::of(r.mc_shot_with_channel, r.mc_shot_no_channel);
    let rows = [
        ("shot_no_channel", r.shot_no_channel, r.mc_shot_no_channel.estimate, r.mc_shot_no_channel.std_error),
        (
            "shot_with_channel",
            r.shot_with_channel,
            r.mc_shot_with_channel.estimate,
            r.mc_shot_with_channel.std_error,
        ),
        (
            "shot_with_channel_naive",
            r.shot_with_channel_naive,
            r.mc_shot_with_channel_naive.estimate,
            r.mc_shot_with_channel_naive.std_error,
        ),
        ("shot_ratio", r.shot_ratio, shot_ratio.estimate, shot_ratio.std_error),
        (
            "phase_no_channel",
            r.phase_no_channel,
            r.mc_phase_no_channel.estimate,
            r.mc_phase_no_channel.std_error,
        ),
        (
            "phase_with_channel",
            r.phase_with_channel,
            r.mc_phase_with_channel.estimate,
            r.mc_phase_with_channel.std_error,
        ),
        ("phase_ratio", r.phase_ratio, r.mc_phase_ratio.estimate, r.mc_phase_ratio.std_error),
    ];
    for (metric, closed, mc, se) in rows {
        put(metric, closed, Some(mc), Some(se));
    }
    // Combined figures are plugged from the MC standard deviations; no error is propagated.
    let w = r.dominance_weight;
    let mc_no = combined_noise(r.mc_shot_no_channel.estimate, r.mc_phase_no_channel.estimate, w);
    let mc_with = combined_noise(r.mc_shot_with_channel.estimate, r.mc_phase_with_channel.estimate, w);
    put("combined_no_channel", r.combined_no_channel, Some(mc_no), None);
    put("combined_with_channel", r.combined_with_channel, Some(mc_with), None);
    put("combined_ratio", r.combined_ratio, Some(mc_with / mc_no), None);
    csv
}

pub fn cmd_noise(config: &RunConfig) -> Result<CommandOutput, CliError> {
    config.validate()?;
    let params = config.noise_params()?;
    if params.delta_phi_mean.sin().abs() <= MIN_FRINGE_SLOPE {
        return Err(CliError::Config(format!(
            "noise.delta_phi_mean {} sits too close to a fringe extremum (|sin| <= {MIN_FRINGE_SLOPE})",
            params.delta_phi_mean
        )));
    }
    let report = snr_report(&params).map_err(CliError::internal)?;
    let path = csv_path(config, "noise");
    let mut result = to_value(&report)?;
    result["mc_shot_ratio"] = to_value(&McRatio::of(report.mc_shot_with_channel, report.mc_shot_no_channel))?;
    result["seed"] = json!(params.seed);
    result["csv"] = json!(path);
    Ok(CommandOutput {
        csv: Some((path, noise_table(&report).finish())),
        summary_path: summary_path(config, "noise"),
        summary: envelope("noise", config, result)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizeSummary {
    pub a_star_entropy: f64,
    pub b_star_entropy: f64,
    pub entropy_bits: f64,
    pub entropy_iterations: usize,
    pub entropy_bracket: (f64, f64),
    pub a_star_png: f64,
    pub b_star_png: f64,
    pub png_ratio: f64,
    pub png_iterations: usize,
}

pub fn optimize(config: &RunConfig) -> Result<OptimizeSummary, CliError> {
    config.validate_optimize()?;
    let o = &config.optimize;
    let points = o.grid_points;
    let entropy: OptimizationResult =
        golden_section_maximize(|a| fringe_averaged_entropy_on(a, points), 0.0, 1.0, o.tolerance)
            .map_err(CliError::internal)?;
    let png = png_ratio_extremum();
    Ok(OptimizeSummary {
        a_star_entropy: entropy.a_star,
        b_star_entropy: entropy.b_star,
        entropy_bits: entropy.objective_value,
        entropy_iterations: entropy.iterations,
        entropy_bracket: entropy.bracket,
        a_star_png: png.a_star,
        b_star_png: png.b_star,
        png_ratio: png.objective_value,
        png_iterations: png.iterations,
    })
}

pub fn cmd_optimize(config: &RunConfig) -> Result<CommandOutput, CliError> {
    config.validate()?;
    let result = to_value(&optimize(config)?)?;
    Ok(CommandOutput {
        csv: None,
        summary_path: summary_path(config, "optimize"),
        summary: envelope("optimize", config, result)?,
    })
}

fn amplitudes(state: &PureState) -> Value {
    Value::Array(state.iter().map(|(k, a)| json!({ "ket": k.label(), "re": a.re, "im": a.im })).collect())
}

pub fn cmd_prepare(config: &RunConfig) -> Result<CommandOutput, CliError> {
    config.validate()?;
    let spec = config.channel_spec()?;
    let target = make_channel(&spec).map_err(CliError::internal)?;
    let result = match (&spec, &target) {
        (ChannelSpec::Bell, Channel::Pure(ideal)) => {
            let settings =
                CavityPreparation { omega_t1: config.prepare.omega_t1, omega_t2: config.prepare.omega_t2 };
            let prepared = prepare_pair(settings).map_err(|e| match e {
                gravchan_core::Error::ResidualPhoton(_) => {
                    CliError::Config(format!("prepare: pulse areas leave the cavity excited ({e})"))
                }
                other => CliError::internal(other),
            })?;
            json!({
                "route": "cavity",
                "amplitudes": amplitudes(&prepared.state),
                "norm": prepared.state.norm_sqr().sqrt(),
                "fidelity": prepared.state.fidelity(ideal).map_err(CliError::internal)?,
                "cavity_residual": prepared.cavity_residual,
            })
        }
        (_, Channel::Pure(state)) => json!({
            "route": "direct",
            "amplitudes": amplitudes(state),
            "norm": state.norm_sqr().sqrt(),
            "fidelity": state.fidelity(state).map_err(CliError::internal)?,
            "cavity_residual": Value::Null,
        }),
        (_, Channel::Mixed(e)) => json!({
            "route": "direct",
            "members": e.members().iter().map(|(w, s)| json!({
                "weight": w,
                "amplitudes": amplitudes(s),
                "norm": s.norm_sqr().sqrt(),
            })).collect::<Vec<_>>(),
            "fidelity": Value::Null,
            "cavity_residual": Value::Null,
        }),
    };
    Ok(CommandOutput {
        csv: None,
        summary_path: summary_path(config, "prepare"),
        summary: envelope("prepare", config, result)?,
    })
}
