//! Entangled-channel construction.
//!
//! The Bell pair is prepared by a single-photon exchange through a high-Q
//! cavity: atom 0 enters excited and interacts for a quarter Rabi cycle
//! (Ωt = π/2), atom 1 enters in the ground state and interacts for a half
//! cycle (Ωt = π). Pulse areas follow the usual Rabi convention, so the
//! rotation angle on each `{|e,0⟩, |g,1⟩}` pair is Ωt/2.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::state::{BasisOperator, BasisVector, Ensemble, PureState, SpinLabel, Target, NORM_TOLERANCE};

/// Atoms plus a cavity mode truncated at one photon.
#[derive(Clone, Debug, PartialEq)]
pub struct CavityState {
    n_atoms: usize,
    amplitudes: BTreeMap<(Vec<SpinLabel>, u8), Complex64>,
}

impl CavityState {
    /// Product state of the given spins with an empty cavity.
    pub fn empty_cavity(spins: Vec<SpinLabel>) -> Self {
        assert!(!spins.is_empty());
        let n_atoms = spins.len();
        let mut amplitudes = BTreeMap::new();
        amplitudes.insert((spins, 0), Complex64::new(1.0, 0.0));
        CavityState { n_atoms, amplitudes }
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn amplitude(&self, spins: &[SpinLabel], photons: u8) -> Complex64 {
        self.amplitudes.get(&(spins.to_vec(), photons)).copied().unwrap_or_default()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.values().map(|a| a.norm_sqr()).fold(0.0, |s, x| s + x)
    }

    pub fn photon_probability(&self) -> f64 {
        self.amplitudes
            .iter()
            .filter(|((_, n), _)| *n == 1)
            .map(|(_, a)| a.norm_sqr())
            .fold(0.0, |s, x| s + x)
    }

    /// Drops the cavity factor, which must be |0⟩. The probe (last atom)
    /// starts at momentum index 0.
    pub fn into_atomic(self) -> Result<PureState> {
        let residual = self.photon_probability();
        if residual > NORM_TOLERANCE {
            return Err(Error::ResidualPhoton(residual));
        }
        PureState::from_amplitudes(
            self.n_atoms,
            self.amplitudes
                .into_iter()
                .filter(|((_, n), _)| *n == 0)
                .map(|((spins, _), a)| (BasisVector::at_rest(spins), a)),
        )
    }
}

/// Atom–cavity exchange for one atom over pulse area `omega_t`:
/// `|e,0⟩ → cos(Ωt/2)|e,0⟩ + sin(Ωt/2)|g,1⟩`,
/// `|g,1⟩ → cos(Ωt/2)|g,1⟩ − sin(Ωt/2)|e,0⟩`, `|g,0⟩` unchanged.
pub fn jc_exchange(state: &CavityState, atom: usize, omega_t: f64) -> Result<CavityState> {
    if atom >= state.n_atoms {
        return Err(Error::IndexOutOfRange { index: atom, len: state.n_atoms });
    }
    let (s, c) = (0.5 * omega_t).sin_cos();
    let mut out: BTreeMap<(Vec<SpinLabel>, u8), Complex64> = BTreeMap::new();
    let mut push = |spins: Vec<SpinLabel>, n: u8, a: Complex64| {
        *out.entry((spins, n)).or_default() += a;
    };
    for ((spins, n), &amp) in &state.amplitudes {
        let mut swapped = spins.clone();
        swapped[atom] = spins[atom].flipped();
        match (spins[atom], *n) {
            (SpinLabel::G, 0) => push(spins.clone(), 0, amp),
            (SpinLabel::E, 0) => {
                push(spins.clone(), 0, amp * c);
                push(swapped, 1, amp * s);
            }
            (SpinLabel::G, 1) => {
                push(spins.clone(), 1, amp * c);
                push(swapped, 0, -amp * s);
            }
            _ => {
                let label: String = spins.iter().map(|x| x.as_char()).collect();
                return Err(Error::PhotonOverflow(format!("|{label};{n} photon⟩")));
            }
        }
    }
    out.retain(|_, a| a.norm() >= crate::state::AMPLITUDE_CUTOFF);
    Ok(CavityState { n_atoms: state.n_atoms, amplitudes: out })
}

/// Pulse areas for the two cavity transits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CavityPreparation {
    pub omega_t1: f64,
    pub omega_t2: f64,
}

impl Default for CavityPreparation {
    fn default() -> Self {
        CavityPreparation { omega_t1: std::f64::consts::FRAC_PI_2, omega_t2: std::f64::consts::PI }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PreparedPair {
    /// Two-atom state after the cavity is traced out and the phase of atom 1
    /// is corrected.
    pub state: PureState,
    /// Photon probability left in the cavity.
    pub cavity_residual: f64,
}

/// Runs the two cavity transits and removes the cavity.
///
/// A real exchange rotation leaves the pair as `(|eg⟩ − |ge⟩)/√2`; a fixed
/// phase flip on the excited level of atom 1 (a local unitary) maps it onto
/// `(|ge⟩ + |eg⟩)/√2`.
pub fn prepare_pair(settings: CavityPreparation) -> Result<PreparedPair> {
    let start = CavityState::empty_cavity(vec![SpinLabel::E, SpinLabel::G]);
    let after_first = jc_exchange(&start, 0, settings.omega_t1)?;
    let after_second = jc_exchange(&after_first, 1, settings.omega_t2)?;
    let cavity_residual = after_second.photon_probability();
    let atoms = after_second.into_atomic()?;
    let state = excited_phase_flip(1).apply(&atoms)?;
    Ok(PreparedPair { state, cavity_residual })
}

/// `(|g⟩₀|e⟩₁ + |e⟩₀|g⟩₁)/√2` from the cavity protocol.
pub fn prepare_bell() -> Result<PureState> {
    Ok(prepare_pair(CavityPreparation::default())?.state)
}

fn excited_phase_flip(atom: usize) -> BasisOperator {
    use crate::state::{MomentumPattern, Rule, RuleOutput};
    let rules = [(SpinLabel::G, 1.0), (SpinLabel::E, -1.0)]
        .into_iter()
        .map(|(s, sign)| Rule {
            spin: s,
            momentum: MomentumPattern::Any,
            outputs: vec![RuleOutput::new(Complex64::new(sign, 0.0), s, 0)],
        })
        .collect();
    BasisOperator::new(Target::Atom(atom), rules, true)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ChannelSpec {
    /// `(|g⟩₀|e⟩₁ + |e⟩₀|g⟩₁)/√2`.
    Bell,
    /// `a|g⟩₀|e⟩₁ + b|e⟩₀|g⟩₁`.
    General { a: Complex64, b: Complex64 },
    /// `(|g…g⟩|e⟩ + |e…e⟩|g⟩)/√2` over `atoms` atoms, probe last.
    Cat { atoms: usize },
    /// Equal mixture of `|g⟩₀|e⟩₁` and `|e⟩₀|g⟩₁`.
    ClassicalMixture,
}

impl ChannelSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ChannelSpec::General { a, b } => {
                let n = a.norm_sqr() + b.norm_sqr();
                if !n.is_finite() || (n - 1.0).abs() > NORM_TOLERANCE {
                    return Err(Error::InvalidSpec(format!("|a|² + |b|² = {n}, expected 1")));
                }
            }
            ChannelSpec::Cat { atoms } if atoms < 2 => {
                return Err(Error::InvalidSpec(format!("cat channel needs >= 2 atoms, got {atoms}")));
            }
            _ => {}
        }
        Ok(())
    }

    pub fn n_atoms(&self) -> usize {
        match *self {
            ChannelSpec::Cat { atoms } => atoms,
            _ => 2,
        }
    }

    /// Weight of the branch where the remote atoms are ground and the probe
    /// excited (|a|² for the general channel).
    pub fn remote_ground_weight(&self) -> f64 {
        match *self {
            ChannelSpec::General { a, .. } => a.norm_sqr(),
            _ => 0.5,
        }
    }
}

/// A built channel: pure for entangled specs, a mixture for the classical one.
#[derive(Clone, Debug, PartialEq)]
pub enum Channel {
    Pure(PureState),
    Mixed(Ensemble),
}

impl Channel {
    pub fn n_atoms(&self) -> usize {
        match self {
            Channel::Pure(s) => s.n_atoms(),
            Channel::Mixed(e) => e.n_atoms(),
        }
    }

    /// (weight, state) pairs; a pure channel is a single member of weight 1.
    pub fn members(&self) -> Vec<(f64, &PureState)> {
        match self {
            Channel::Pure(s) => vec![(1.0, s)],
            Channel::Mixed(e) => e.members().iter().map(|(w, s)| (*w, s)).collect(),
        }
    }

    pub fn as_pure(&self) -> Option<&PureState> {
        match self {
            Channel::Pure(s) => Some(s),
            Channel::Mixed(_) => None,
        }
    }
}

pub fn make_channel(spec: &ChannelSpec) -> Result<Channel> {
    use SpinLabel::{E, G};
    spec.validate()?;
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let ge = BasisVector::at_rest(vec![G, E]);
    let eg = BasisVector::at_rest(vec![E, G]);
    match *spec {
        ChannelSpec::Bell => Ok(Channel::Pure(PureState::from_amplitudes(2, [(ge, h), (eg, h)])?)),
        ChannelSpec::General { a, b } => {
            Ok(Channel::Pure(PureState::from_amplitudes(2, [(ge, a), (eg, b)])?))
        }
        ChannelSpec::Cat { atoms } => {
            let mut low = vec![G; atoms];
            low[atoms - 1] = E;
            let mut high = vec![E; atoms];
            high[atoms - 1] = G;
            Ok(Channel::Pure(PureState::from_amplitudes(
                atoms,
                [(BasisVector::at_rest(low), h), (BasisVector::at_rest(high), h)],
            )?))
        }
        ChannelSpec::ClassicalMixture => {
            Ok(Channel::Mixed(Ensemble::new(vec![(0.5, PureState::basis(ge)), (0.5, PureState::basis(eg))])?))
        }
    }
}
