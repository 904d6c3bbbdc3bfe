//! Mach-Zehnder light-pulse interferometer acting on the probe atom.
//!
//! Two independent routes are provided. [`apply_composite`] uses the
//! closed-form transfer coefficients of the whole π/2–π–π/2 sequence;
//! [`run_pulse_sequence`] applies each Raman pulse and the free-flight phase
//! one at a time. Both act on the `{|g,n⟩, |e,n+1⟩}` momentum ladder of the
//! probe and agree amplitude by amplitude for probes entering at momentum
//! index 0.
//!
//! Sign convention: `delta_phi` is the total interferometric phase, laser
//! phases included. The free-flight step therefore carries
//! `φ1 − 2φ2 + φ3 − Δφ` per unit of probe momentum.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::state::{BasisOperator, MomentumPattern, PureState, Rule, RuleOutput, SpinLabel, Target};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GravityModel {
    /// Gravitational acceleration, m/s².
    pub g0: f64,
    /// Vertical gravity gradient, s⁻².
    pub gamma: f64,
}

impl GravityModel {
    pub fn new(g0: f64, gamma: f64) -> Result<Self> {
        if !g0.is_finite() || g0 < 0.0 {
            return Err(Error::InvalidParameter(format!("g0 must be finite and >= 0, got {g0}")));
        }
        if !gamma.is_finite() {
            return Err(Error::InvalidParameter(format!("gamma must be finite, got {gamma}")));
        }
        Ok(GravityModel { g0, gamma })
    }

    /// Gradient quoted as a fraction of g per metre (e.g. `3e-7`).
    pub fn from_fractional_gradient(g0: f64, gradient_per_m: f64) -> Result<Self> {
        Self::new(g0, gradient_per_m * g0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PulseTiming {
    /// Time between successive pulses, s.
    pub t: f64,
    /// Effective two-photon wavevector, 1/m.
    pub k: f64,
}

impl PulseTiming {
    pub fn new(t: f64, k: f64) -> Result<Self> {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::InvalidParameter(format!("T must be finite and >= 0, got {t}")));
        }
        if !k.is_finite() || k <= 0.0 {
            return Err(Error::InvalidParameter(format!("k must be finite and > 0, got {k}")));
        }
        Ok(PulseTiming { t, k })
    }
}

/// Laser phases of the three pulses, radians. Not reduced modulo 2π.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct LaserPhases {
    pub phi1: f64,
    pub phi2: f64,
    pub phi3: f64,
}

impl LaserPhases {
    pub fn new(phi1: f64, phi2: f64, phi3: f64) -> Self {
        LaserPhases { phi1, phi2, phi3 }
    }

    /// φ1 − 2φ2 + φ3, the laser contribution to the closed-loop phase.
    pub fn interferometric(&self) -> f64 {
        self.phi1 - 2.0 * self.phi2 + self.phi3
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InterferometerParams {
    pub timing: PulseTiming,
    pub gravity: GravityModel,
    pub phases: LaserPhases,
    pub gradient_correction: bool,
}

impl InterferometerParams {
    pub fn new(
        timing: PulseTiming,
        gravity: GravityModel,
        phases: LaserPhases,
        gradient_correction: bool,
    ) -> Self {
        InterferometerParams { timing, gravity, phases, gradient_correction }
    }

    pub fn delta_phi(&self) -> f64 {
        total_phase(self.timing, self.gravity, self.gradient_correction)
    }

    fn resolve(&self, delta_phi_override: Option<f64>) -> f64 {
        delta_phi_override.unwrap_or_else(|| self.delta_phi())
    }
}

impl Default for InterferometerParams {
    /// Rb-like fountain: k = 1.61e7 m⁻¹, T = 0.1 s, g0 = 9.8 m/s², zero laser phases.
    fn default() -> Self {
        InterferometerParams {
            timing: PulseTiming { t: 0.1, k: 1.61e7 },
            gravity: GravityModel { g0: 9.8, gamma: 3e-7 * 9.8 },
            phases: LaserPhases::default(),
            gradient_correction: false,
        }
    }
}

/// Transfer coefficients of the full sequence:
/// `|g,n⟩ → a1|g,n⟩ + a2|e,n+1⟩`, `|e,n⟩ → b1|g,n−1⟩ + b2|e,n⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CompositeCoefficients {
    pub a1: Complex64,
    pub a2: Complex64,
    pub b1: Complex64,
    pub b2: Complex64,
}

impl CompositeCoefficients {
    /// Largest violation among column norms and column orthogonality of
    /// `[[a1, b1], [a2, b2]]`.
    pub fn unitarity_defect(&self) -> f64 {
        let col_a = (self.a1.norm_sqr() + self.a2.norm_sqr() - 1.0).abs();
        let col_b = (self.b1.norm_sqr() + self.b2.norm_sqr() - 1.0).abs();
        let cross = (self.a1 * self.b1.conj() + self.a2 * self.b2.conj()).norm();
        col_a.max(col_b).max(cross)
    }

    pub fn operator(&self) -> BasisOperator {
        BasisOperator::new(
            Target::Probe,
            vec![
                Rule {
                    spin: SpinLabel::G,
                    momentum: MomentumPattern::Any,
                    outputs: vec![
                        RuleOutput::new(self.a1, SpinLabel::G, 0),
                        RuleOutput::new(self.a2, SpinLabel::E, 1),
                    ],
                },
                Rule {
                    spin: SpinLabel::E,
                    momentum: MomentumPattern::Any,
                    outputs: vec![
                        RuleOutput::new(self.b1, SpinLabel::G, -1),
                        RuleOutput::new(self.b2, SpinLabel::E, 0),
                    ],
                },
            ],
            true,
        )
    }
}

/// Leading-order interferometer phase `k·g0·T²`, optionally with the
/// `(1 + 7/12·γT²)` gradient factor. Terms of order T³ and beyond are not
/// modeled.
pub fn total_phase(timing: PulseTiming, gravity: GravityModel, gradient_correction: bool) -> f64 {
    let t2 = timing.t * timing.t;
    let base = timing.k * gravity.g0 * t2;
    if gradient_correction {
        (1.0 + 7.0 / 12.0 * gravity.gamma * t2) * base
    } else {
        base
    }
}

pub fn composite_coefficients(phases: LaserPhases, delta_phi: f64) -> CompositeCoefficients {
    let LaserPhases { phi1, phi2, phi3 } = phases;
    let i = Complex64::i();
    let half = Complex64::new(0.5, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let e = |x: f64| Complex64::from_polar(1.0, x);
    CompositeCoefficients {
        a1: -half * e(phi1 - phi2) * (one + e(-delta_phi)),
        a2: i * half * e(phi1 - phi2 + phi3) * (one - e(-delta_phi)),
        b1: i * half * e(phi2 - phi1 - phi3) * (one - e(delta_phi)),
        b2: -half * e(phi2 - phi1) * (one + e(delta_phi)),
    }
}

pub fn apply_composite(
    state: &PureState,
    params: &InterferometerParams,
    delta_phi_override: Option<f64>,
) -> Result<PureState> {
    let delta_phi = params.resolve(delta_phi_override);
    composite_coefficients(params.phases, delta_phi).operator().apply(state)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PulseKind {
    /// π/2 pulse.
    BeamSplitter,
    /// π pulse.
    Mirror,
}

/// Resonant Raman pulse on the probe.
///
/// π/2: `|g,n⟩ → (|g,n⟩ − i e^{iφ}|e,n+1⟩)/√2`,
/// `|e,n+1⟩ → (|e,n+1⟩ − i e^{−iφ}|g,n⟩)/√2`.
/// π: `|g,n⟩ → −i e^{iφ}|e,n+1⟩`, `|e,n+1⟩ → −i e^{−iφ}|g,n⟩`.
pub fn pulse(kind: PulseKind, phase: f64) -> BasisOperator {
    let (stay, swap) = match kind {
        PulseKind::BeamSplitter => {
            let h = std::f64::consts::FRAC_1_SQRT_2;
            (Complex64::new(h, 0.0), Complex64::new(0.0, -h))
        }
        PulseKind::Mirror => (Complex64::new(0.0, 0.0), Complex64::new(0.0, -1.0)),
    };
    let up = swap * Complex64::from_polar(1.0, phase);
    let down = swap * Complex64::from_polar(1.0, -phase);
    let mut g_out = vec![RuleOutput::new(up, SpinLabel::E, 1)];
    let mut e_out = vec![RuleOutput::new(down, SpinLabel::G, -1)];
    if stay != Complex64::new(0.0, 0.0) {
        g_out.insert(0, RuleOutput::new(stay, SpinLabel::G, 0));
        e_out.insert(0, RuleOutput::new(stay, SpinLabel::E, 0));
    }
    BasisOperator::new(
        Target::Probe,
        vec![
            Rule { spin: SpinLabel::G, momentum: MomentumPattern::Any, outputs: g_out },
            Rule { spin: SpinLabel::E, momentum: MomentumPattern::Any, outputs: e_out },
        ],
        true,
    )
}

/// Free evolution: every probe ket picks up `exp(i·phase_per_momentum·n)`.
pub fn free_flight(phase_per_momentum: f64) -> BasisOperator {
    let rules = [SpinLabel::G, SpinLabel::E]
        .into_iter()
        .map(|s| Rule {
            spin: s,
            momentum: MomentumPattern::Any,
            outputs: vec![RuleOutput {
                coefficient: Complex64::new(1.0, 0.0),
                spin: s,
                momentum_shift: 0,
                momentum_phase: phase_per_momentum,
            }],
        })
        .collect();
    BasisOperator::new(Target::Probe, rules, true)
}

/// Pulse-by-pulse evolution: π/2(φ1), π(φ2), free flight, π/2(φ3).
///
/// The phase frame puts all accumulated free-flight phase in the segment
/// between the mirror and the final beamsplitter.
pub fn run_pulse_sequence(
    state: &PureState,
    params: &InterferometerParams,
    delta_phi_override: Option<f64>,
) -> Result<PureState> {
    let delta_phi = params.resolve(delta_phi_override);
    let phases = params.phases;
    let flight = phases.interferometric() - delta_phi;
    let s = pulse(PulseKind::BeamSplitter, phases.phi1).apply(state)?;
    let s = pulse(PulseKind::Mirror, phases.phi2).apply(&s)?;
    let s = free_flight(flight).apply(&s)?;
    pulse(PulseKind::BeamSplitter, phases.phi3).apply(&s)
}

/// Ground-state fringe `(1 + cos Δφ)/2`.
pub fn ground_probability(delta_phi: f64) -> f64 {
    0.5 * (1.0 + delta_phi.cos())
}
