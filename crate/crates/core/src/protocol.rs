//! End-to-end transfer: the probe crosses the interferometer, is velocity
//! selected back onto momentum index 0, and a remote atom's spin is read.
//!
//! Probabilities are joint: "selection succeeded and the remote atom is in
//! the given state". The conditional probability (divided by the selection
//! rate) carries no fringe for the Bell channel and is exposed separately.

use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{make_channel, ChannelSpec};
use crate::error::{Error, Result};
use crate::interferometer::{apply_composite, run_pulse_sequence, InterferometerParams};
use crate::state::{BasisVector, MomentumIndex, PureState, SpinLabel};

/// Slack allowed on `p_observed` above the fringe amplitude before it is
/// rejected rather than clamped.
pub const READOUT_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TransferOutcome {
    pub p_select: f64,
    pub p_joint_g: f64,
    pub p_joint_e: f64,
    pub p_closed_form: f64,
    pub delta_phi_used: f64,
}

impl TransferOutcome {
    /// P(remote = g | selection succeeded), `None` when selection never succeeds.
    pub fn conditional_g(&self) -> Option<f64> {
        (self.p_select > 0.0).then(|| self.p_joint_g / self.p_select)
    }
}

/// `|a|²(1 + cos Δφ)/2`.
pub fn closed_form_transfer(remote_ground_weight: f64, delta_phi: f64) -> f64 {
    remote_ground_weight * 0.5 * (1.0 + delta_phi.cos())
}

fn selected(k: &BasisVector) -> bool {
    k.momentum() == MomentumIndex::ZERO
}

/// Joint selection/readout masses for one pure member.
fn readout(state: &PureState, remote: usize) -> (f64, f64, f64) {
    let p_select = state.probability(selected);
    let p_g = state.probability(|k| selected(k) && k.spin(remote) == SpinLabel::G);
    let p_e = state.probability(|k| selected(k) && k.spin(remote) == SpinLabel::E);
    (p_select, p_g, p_e)
}

/// Runs the protocol with atom index `remote` (0-based; the probe is the last
/// atom) as the readout atom.
pub fn run_transfer(
    spec: &ChannelSpec,
    params: &InterferometerParams,
    remote: usize,
    delta_phi_override: Option<f64>,
) -> Result<TransferOutcome> {
    let channel = make_channel(spec)?;
    let n_atoms = channel.n_atoms();
    if remote >= n_atoms {
        return Err(Error::IndexOutOfRange { index: remote, len: n_atoms });
    }
    if remote == n_atoms - 1 {
        return Err(Error::RemoteIsProbe(remote));
    }
    let delta_phi = delta_phi_override.unwrap_or_else(|| params.delta_phi());
    let (mut p_select, mut p_g, mut p_e) = (0.0, 0.0, 0.0);
    for (w, member) in channel.members() {
        let out = apply_composite(member, params, Some(delta_phi))?;
        let (s, g, e) = readout(&out, remote);
        p_select += w * s;
        p_g += w * g;
        p_e += w * e;
    }
    Ok(TransferOutcome {
        p_select,
        p_joint_g: p_g,
        p_joint_e: p_e,
        p_closed_form: closed_form_transfer(spec.remote_ground_weight(), delta_phi),
        delta_phi_used: delta_phi,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FringePoint {
    pub delta_phi: f64,
    pub outcome: TransferOutcome,
}

/// One [`run_transfer`] per grid value, in grid order.
pub fn fringe_scan(
    spec: &ChannelSpec,
    params: &InterferometerParams,
    remote: usize,
    grid: &[f64],
) -> Result<Vec<FringePoint>> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("phase grid is empty".into()));
    }
    if let Some(bad) = grid.iter().find(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter(format!("non-finite grid value {bad}")));
    }
    grid.par_iter()
        .map(|&d| {
            let outcome = run_transfer(spec, params, remote, Some(d))?;
            Ok(FringePoint { delta_phi: d, outcome })
        })
        .collect()
}

/// Ground-state probability of a lone probe starting in `|g,0⟩`, from the
/// pulse-by-pulse simulation (no velocity selection).
pub fn direct_measurement(params: &InterferometerParams, delta_phi_override: Option<f64>) -> Result<f64> {
    let start = PureState::basis(BasisVector::at_rest(vec![SpinLabel::G]));
    let out = run_pulse_sequence(&start, params, delta_phi_override)?;
    Ok(out.probability(|k| k.spin(0) == SpinLabel::G))
}

/// Inverts `p = |a|²(1 + cos Δφ)/2` on the principal branch `[0, π]`.
///
/// Δφ and −Δφ (and every 2π shift) give the same reading; resolving the
/// branch needs extra information such as a second scan point.
pub fn estimate_phase(p_observed: f64, remote_ground_weight: f64) -> Result<f64> {
    if remote_ground_weight.is_nan() || remote_ground_weight <= 0.0 || remote_ground_weight > 1.0 {
        return Err(Error::InvalidParameter(format!(
            "fringe weight must lie in (0, 1], got {remote_ground_weight}"
        )));
    }
    if !p_observed.is_finite()
        || p_observed > remote_ground_weight + READOUT_SLACK
        || p_observed < -READOUT_SLACK
    {
        return Err(Error::OutOfRange { value: p_observed, limit: remote_ground_weight });
    }
    let x = (2.0 * p_observed / remote_ground_weight - 1.0).clamp(-1.0, 1.0);
    Ok(x.acos())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn params() -> InterferometerParams {
        InterferometerParams::default()
    }

    #[test]
    fn bell_examples() {
        let top = run_transfer(&ChannelSpec::Bell, &params(), 0, Some(0.0)).unwrap();
        assert!((top.p_joint_g - 0.5).abs() < 1e-15);
        let bottom = run_transfer(&ChannelSpec::Bell, &params(), 0, Some(PI)).unwrap();
        assert!(bottom.p_joint_g.abs() < 1e-15);
    }

    #[test]
    fn general_channel_example() {
        let spec = ChannelSpec::General { a: Complex64::new(0.6, 0.0), b: Complex64::new(0.8, 0.0) };
        let out = run_transfer(&spec, &params(), 0, Some(FRAC_PI_2)).unwrap();
        assert!((out.p_joint_g - 0.18).abs() < 1e-12);
        assert!((out.p_closed_form - 0.18).abs() < 1e-15);
    }

    #[test]
    fn joint_masses_add_up() {
        for d in [0.0, 0.4, 2.0, 3.0, -1.0] {
            let o = run_transfer(&ChannelSpec::Bell, &params(), 0, Some(d)).unwrap();
            assert!((o.p_joint_g + o.p_joint_e - o.p_select).abs() < 1e-12);
        }
    }

    #[test]
    fn conditional_readout_is_flat_for_bell() {
        for d in [0.1, 1.0, 2.5] {
            let o = run_transfer(&ChannelSpec::Bell, &params(), 0, Some(d)).unwrap();
            assert!((o.conditional_g().unwrap() - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn probe_cannot_be_remote() {
        assert_eq!(run_transfer(&ChannelSpec::Bell, &params(), 1, None), Err(Error::RemoteIsProbe(1)));
        assert_eq!(
            run_transfer(&ChannelSpec::Bell, &params(), 5, None),
            Err(Error::IndexOutOfRange { index: 5, len: 2 })
        );
    }

    #[test]
    fn scan_rejects_empty_grid() {
        assert!(fringe_scan(&ChannelSpec::Bell, &params(), 0, &[]).is_err());
        assert!(fringe_scan(&ChannelSpec::Bell, &params(), 0, &[f64::NAN]).is_err());
    }

    #[test]
    fn scan_examples() {
        let grid = [0.0, FRAC_PI_2, PI];
        let pts = fringe_scan(&ChannelSpec::Bell, &params(), 0, &grid).unwrap();
        for (p, want) in pts.iter().zip([0.5, 0.25, 0.0]) {
            assert!((p.outcome.p_joint_g - want).abs() < 1e-12);
        }
        for (&d, want) in grid.iter().zip([1.0, 0.5, 0.0]) {
            assert!((direct_measurement(&params(), Some(d)).unwrap() - want).abs() < 1e-12);
        }
        assert!((direct_measurement(&params(), Some(2.0 * PI / 3.0)).unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn phase_estimation() {
        assert_eq!(estimate_phase(0.5, 0.5).unwrap(), 0.0);
        assert!((estimate_phase(0.0, 0.5).unwrap() - PI).abs() < 1e-15);
        assert!((estimate_phase(0.25, 0.5).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert_eq!(estimate_phase(0.5 + 1e-10, 0.5).unwrap(), 0.0);
        assert!(matches!(estimate_phase(0.6, 0.5), Err(Error::OutOfRange { .. })));
        assert!(estimate_phase(0.1, 0.0).is_err());
    }
}
