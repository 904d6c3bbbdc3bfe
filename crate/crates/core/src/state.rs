//! Finite-dimensional state engine.
//!
//! A basis vector is a list of atomic spins plus a single momentum ladder
//! index carried by the probe atom (by convention the last atom). Pure states
//! are sparse maps from basis vectors to complex amplitudes; classical
//! mixtures are ensembles of pure states. Operators act on one atom at a time
//! and are described by rules keyed on that atom's spin and, optionally, the
//! probe momentum.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::NeumaierSum;

/// Amplitudes with magnitude below this are dropped.
pub const AMPLITUDE_CUTOFF: f64 = 1e-15;
/// Tolerance used for every normalization and unitarity check.
pub const NORM_TOLERANCE: f64 = 1e-12;
const ZERO_NORM_SQR: f64 = 1e-24;
const MAX_CLOSURE: usize = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum SpinLabel {
    /// Ground state |g⟩.
    G,
    /// Excited state |e⟩.
    E,
}

impl SpinLabel {
    pub fn flipped(self) -> Self {
        match self {
            SpinLabel::G => SpinLabel::E,
            SpinLabel::E => SpinLabel::G,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            SpinLabel::G => 'g',
            SpinLabel::E => 'e',
        }
    }
}

impl fmt::Display for SpinLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// Probe momentum `p + n·k` in units of the effective wavevector.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct MomentumIndex(pub i32);

impl MomentumIndex {
    pub const ZERO: MomentumIndex = MomentumIndex(0);

    pub fn shifted(self, by: i32) -> Self {
        MomentumIndex(self.0 + by)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasisVector {
    spins: Vec<SpinLabel>,
    momentum: MomentumIndex,
}

impl BasisVector {
    /// Panics if `spins` is empty: every state space has at least the probe.
    pub fn new(spins: Vec<SpinLabel>, momentum: MomentumIndex) -> Self {
        assert!(!spins.is_empty(), "basis vector needs at least one atom");
        BasisVector { spins, momentum }
    }

    /// Ket with momentum index 0.
    pub fn at_rest(spins: Vec<SpinLabel>) -> Self {
        Self::new(spins, MomentumIndex::ZERO)
    }

    pub fn spins(&self) -> &[SpinLabel] {
        &self.spins
    }

    pub fn spin(&self, atom: usize) -> SpinLabel {
        self.spins[atom]
    }

    pub fn momentum(&self) -> MomentumIndex {
        self.momentum
    }

    pub fn n_atoms(&self) -> usize {
        self.spins.len()
    }

    pub fn probe_index(&self) -> usize {
        self.spins.len() - 1
    }

    pub fn with_spin(&self, atom: usize, spin: SpinLabel) -> Self {
        let mut out = self.clone();
        out.spins[atom] = spin;
        out
    }

    pub fn with_momentum(&self, momentum: MomentumIndex) -> Self {
        BasisVector { spins: self.spins.clone(), momentum }
    }

    /// Compact label such as `ge;+0`.
    pub fn label(&self) -> String {
        let spins: String = self.spins.iter().map(|s| s.as_char()).collect();
        format!("{};{:+}", spins, self.momentum.0)
    }
}

impl fmt::Display for BasisVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{}⟩", self.label())
    }
}

/// Sparse complex amplitude map over a fixed number of atoms.
///
/// Constructors do not normalize; `normalized` does. Amplitudes below
/// [`AMPLITUDE_CUTOFF`] are never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    n_atoms: usize,
    amplitudes: BTreeMap<BasisVector, Complex64>,
}

impl PureState {
    /// Empty (zero) vector over `n_atoms` atoms.
    pub fn zero(n_atoms: usize) -> Self {
        assert!(n_atoms >= 1, "state space needs at least one atom");
        PureState { n_atoms, amplitudes: BTreeMap::new() }
    }

    pub fn basis(ket: BasisVector) -> Self {
        let mut amplitudes = BTreeMap::new();
        let n_atoms = ket.n_atoms();
        amplitudes.insert(ket, Complex64::new(1.0, 0.0));
        PureState { n_atoms, amplitudes }
    }

    /// Sums repeated kets; rejects kets with the wrong atom count.
    pub fn from_amplitudes<I>(n_atoms: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (BasisVector, Complex64)>,
    {
        let mut out = PureState::zero(n_atoms);
        for (ket, amp) in terms {
            if ket.n_atoms() != n_atoms {
                return Err(Error::BasisMismatch(format!(
                    "{} has {} atoms, expected {}",
                    ket,
                    ket.n_atoms(),
                    n_atoms
                )));
            }
            *out.amplitudes.entry(ket).or_insert(Complex64::new(0.0, 0.0)) += amp;
        }
        out.prune();
        Ok(out)
    }

    fn prune(&mut self) {
        self.amplitudes.retain(|_, a| a.norm() >= AMPLITUDE_CUTOFF);
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn probe_index(&self) -> usize {
        self.n_atoms - 1
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn amplitude(&self, ket: &BasisVector) -> Complex64 {
        self.amplitudes.get(ket).copied().unwrap_or_default()
    }

    /// Terms in canonical basis order.
    pub fn iter(&self) -> impl Iterator<Item = (&BasisVector, &Complex64)> {
        self.amplitudes.iter()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.values().map(|a| a.norm_sqr()).collect::<NeumaierSum>().value()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= NORM_TOLERANCE
    }

    pub fn normalized(&self) -> Result<PureState> {
        let n2 = self.norm_sqr();
        if n2 < ZERO_NORM_SQR {
            return Err(Error::ZeroNorm);
        }
        Ok(self.scaled(Complex64::new(1.0 / n2.sqrt(), 0.0)))
    }

    pub fn scaled(&self, factor: Complex64) -> PureState {
        let mut out = PureState {
            n_atoms: self.n_atoms,
            amplitudes: self.amplitudes.iter().map(|(k, a)| (k.clone(), a * factor)).collect(),
        };
        out.prune();
        out
    }

    /// Vector sum `self + other` without renormalization.
    pub fn plus(&self, other: &PureState) -> Result<PureState> {
        self.check_same_space(other)?;
        let terms = self.amplitudes.iter().chain(other.amplitudes.iter()).map(|(k, a)| (k.clone(), *a));
        PureState::from_amplitudes(self.n_atoms, terms)
    }

    fn check_same_space(&self, other: &PureState) -> Result<()> {
        if self.n_atoms != other.n_atoms {
            return Err(Error::BasisMismatch(format!("{} atoms vs {} atoms", self.n_atoms, other.n_atoms)));
        }
        Ok(())
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &PureState) -> Result<Complex64> {
        self.check_same_space(other)?;
        let (mut re, mut im) = (NeumaierSum::default(), NeumaierSum::default());
        for (ket, a) in &self.amplitudes {
            if let Some(b) = other.amplitudes.get(ket) {
                let z = a.conj() * b;
                re.add(z.re);
                im.add(z.im);
            }
        }
        Ok(Complex64::new(re.value(), im.value()))
    }

    /// Largest per-amplitude difference after rotating `other` by the global
    /// phase that best aligns it with `self`.
    pub fn distance_up_to_global_phase(&self, other: &PureState) -> Result<f64> {
        let overlap = other.inner(self)?;
        let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { Complex64::new(1.0, 0.0) };
        let worst = self
            .amplitudes
            .keys()
            .chain(other.amplitudes.keys())
            .map(|k| (self.amplitude(k) - phase * other.amplitude(k)).norm())
            .fold(0.0, f64::max);
        Ok(worst)
    }

    /// |⟨self|other⟩|², clamped into [0, 1].
    pub fn fidelity(&self, other: &PureState) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr().clamp(0.0, 1.0))
    }

    /// Squared norm of the part of the state matching `predicate`.
    pub fn probability<F>(&self, predicate: F) -> f64
    where
        F: Fn(&BasisVector) -> bool,
    {
        self.amplitudes
            .iter()
            .filter(|(k, _)| predicate(k))
            .map(|(_, a)| a.norm_sqr())
            .collect::<NeumaierSum>()
            .value()
    }

    /// Unnormalized restriction to the kets matching `predicate`.
    pub fn restrict<F>(&self, predicate: F) -> PureState
    where
        F: Fn(&BasisVector) -> bool,
    {
        PureState {
            n_atoms: self.n_atoms,
            amplitudes: self
                .amplitudes
                .iter()
                .filter(|(k, _)| predicate(k))
                .map(|(k, a)| (k.clone(), *a))
                .collect(),
        }
    }

    /// Projective measurement of a yes/no property.
    pub fn project<F>(&self, predicate: F) -> Projection
    where
        F: Fn(&BasisVector) -> bool,
    {
        let kept = self.restrict(predicate);
        let probability = kept.norm_sqr();
        let state = kept.normalized().ok();
        Projection { probability, state }
    }

    /// Outcome distribution for measuring one atom's spin.
    pub fn measure_spin(&self, atom: usize) -> Result<SpinDistribution> {
        let masses = self.spin_masses(atom)?;
        let total = masses.g + masses.e;
        if total < ZERO_NORM_SQR {
            return Err(Error::ZeroNorm);
        }
        Ok(SpinDistribution { g: masses.g / total, e: masses.e / total })
    }

    /// Unnormalized squared norm of each spin value of `atom`.
    pub fn spin_masses(&self, atom: usize) -> Result<SpinDistribution> {
        if atom >= self.n_atoms {
            return Err(Error::IndexOutOfRange { index: atom, len: self.n_atoms });
        }
        Ok(SpinDistribution {
            g: self.probability(|k| k.spin(atom) == SpinLabel::G),
            e: self.probability(|k| k.spin(atom) == SpinLabel::E),
        })
    }
}

/// Outcome of [`PureState::project`]. `state` is `None` for a zero-probability
/// outcome.
#[derive(Clone, Debug, PartialEq)]
pub struct Projection {
    pub probability: f64,
    pub state: Option<PureState>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpinDistribution {
    pub g: f64,
    pub e: f64,
}

impl SpinDistribution {
    pub fn get(&self, spin: SpinLabel) -> f64 {
        match spin {
            SpinLabel::G => self.g,
            SpinLabel::E => self.e,
        }
    }
}

/// Classical mixture of pure states.
#[derive(Clone, Debug, PartialEq)]
pub struct Ensemble {
    members: Vec<(f64, PureState)>,
}

impl Ensemble {
    pub fn new(members: Vec<(f64, PureState)>) -> Result<Self> {
        let first = members.first().ok_or_else(|| Error::InvalidSpec("ensemble has no members".into()))?;
        let n_atoms = first.1.n_atoms();
        let mut total = NeumaierSum::default();
        for (w, s) in &members {
            if w.is_nan() || *w < 0.0 {
                return Err(Error::InvalidSpec(format!("negative ensemble weight {w}")));
            }
            if s.n_atoms() != n_atoms {
                return Err(Error::BasisMismatch("ensemble members differ in atom count".into()));
            }
            total.add(*w);
        }
        if (total.value() - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidSpec(format!("ensemble weights sum to {}", total.value())));
        }
        Ok(Ensemble { members })
    }

    pub fn members(&self) -> &[(f64, PureState)] {
        &self.members
    }

    pub fn n_atoms(&self) -> usize {
        self.members[0].1.n_atoms()
    }

    /// Weight-averaged value of a per-member quantity.
    pub fn expectation<F>(&self, f: F) -> f64
    where
        F: Fn(&PureState) -> f64,
    {
        self.members.iter().map(|(w, s)| w * f(s)).collect::<NeumaierSum>().value()
    }

    pub fn probability<F>(&self, predicate: F) -> f64
    where
        F: Fn(&BasisVector) -> bool,
    {
        self.expectation(|s| s.probability(&predicate))
    }

    /// Applies `f` to every member, keeping weights.
    pub fn map<F>(&self, f: F) -> Result<Ensemble>
    where
        F: Fn(&PureState) -> Result<PureState>,
    {
        let members = self.members.iter().map(|(w, s)| Ok((*w, f(s)?))).collect::<Result<Vec<_>>>()?;
        Ok(Ensemble { members })
    }
}

/// Which atom an operator addresses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    Atom(usize),
    /// The last atom, whatever the state's atom count.
    Probe,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MomentumPattern {
    Any,
    Exactly(MomentumIndex),
}

/// One output term of a rule. The coefficient is multiplied by
/// `exp(i·momentum_phase·n)` where `n` is the input ket's momentum index.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RuleOutput {
    pub coefficient: Complex64,
    pub spin: SpinLabel,
    pub momentum_shift: i32,
    pub momentum_phase: f64,
}

impl RuleOutput {
    pub fn new(coefficient: Complex64, spin: SpinLabel, momentum_shift: i32) -> Self {
        RuleOutput { coefficient, spin, momentum_shift, momentum_phase: 0.0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Rule {
    pub spin: SpinLabel,
    pub momentum: MomentumPattern,
    pub outputs: Vec<RuleOutput>,
}

/// Linear operator defined by its action on basis vectors of one atom.
///
/// Rules with an exact momentum pattern take precedence over `Any` rules.
#[derive(Clone, Debug, PartialEq)]
pub struct BasisOperator {
    target: Target,
    rules: Vec<Rule>,
    unitary: bool,
}

impl BasisOperator {
    pub fn new(target: Target, rules: Vec<Rule>, unitary: bool) -> Self {
        BasisOperator { target, rules, unitary }
    }

    pub fn identity(target: Target) -> Self {
        let one = Complex64::new(1.0, 0.0);
        let rules = [SpinLabel::G, SpinLabel::E]
            .into_iter()
            .map(|s| Rule {
                spin: s,
                momentum: MomentumPattern::Any,
                outputs: vec![RuleOutput::new(one, s, 0)],
            })
            .collect();
        BasisOperator::new(target, rules, true)
    }

    /// |g⟩ ↔ |e⟩ on one atom, momentum untouched.
    pub fn spin_flip(target: Target) -> Self {
        let one = Complex64::new(1.0, 0.0);
        let rules = [SpinLabel::G, SpinLabel::E]
            .into_iter()
            .map(|s| Rule {
                spin: s,
                momentum: MomentumPattern::Any,
                outputs: vec![RuleOutput::new(one, s.flipped(), 0)],
            })
            .collect();
        BasisOperator::new(target, rules, true)
    }

    pub fn is_unitary(&self) -> bool {
        self.unitary
    }

    pub fn target(&self) -> Target {
        self.target
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    fn resolve_atom(&self, n_atoms: usize) -> Result<usize> {
        let atom = match self.target {
            Target::Atom(i) => i,
            Target::Probe => n_atoms - 1,
        };
        if atom >= n_atoms {
            return Err(Error::IndexOutOfRange { index: atom, len: n_atoms });
        }
        let moves_momentum = self.rules.iter().flat_map(|r| r.outputs.iter()).any(|o| o.momentum_shift != 0);
        if moves_momentum && atom != n_atoms - 1 {
            return Err(Error::InvalidOperator(format!("momentum kick on non-probe atom {atom}")));
        }
        Ok(atom)
    }

    fn rule_for(&self, spin: SpinLabel, momentum: MomentumIndex) -> Option<&Rule> {
        self.rules
            .iter()
            .find(|r| r.spin == spin && r.momentum == MomentumPattern::Exactly(momentum))
            .or_else(|| self.rules.iter().find(|r| r.spin == spin && r.momentum == MomentumPattern::Any))
    }

    /// Image of a single basis vector.
    pub fn image(&self, ket: &BasisVector) -> Result<Vec<(Complex64, BasisVector)>> {
        let atom = self.resolve_atom(ket.n_atoms())?;
        let rule = self
            .rule_for(ket.spin(atom), ket.momentum())
            .ok_or_else(|| Error::UncoveredBasisVector(ket.to_string()))?;
        let n = f64::from(ket.momentum().0);
        Ok(rule
            .outputs
            .iter()
            .map(|o| {
                let coef = if o.momentum_phase == 0.0 {
                    o.coefficient
                } else {
                    o.coefficient * Complex64::from_polar(1.0, o.momentum_phase * n)
                };
                let mut out = ket.with_spin(atom, o.spin);
                out.momentum = ket.momentum().shifted(o.momentum_shift);
                (coef, out)
            })
            .collect())
    }

    /// Linear extension of the rules. No renormalization is applied.
    pub fn apply(&self, state: &PureState) -> Result<PureState> {
        let mut terms = Vec::with_capacity(state.len() * 2);
        for (ket, amp) in state.iter() {
            for (coef, out) in self.image(ket)? {
                terms.push((out, coef * amp));
            }
        }
        PureState::from_amplitudes(state.n_atoms(), terms)
    }

    /// Largest entry of |U†U − I| on the smallest operator-closed subspace
    /// containing `support`.
    pub fn unitarity_defect(&self, support: &[BasisVector]) -> Result<f64> {
        let mut seen: BTreeSet<BasisVector> = BTreeSet::new();
        let mut queue: VecDeque<BasisVector> = support.iter().cloned().collect();
        let mut columns: Vec<PureState> = Vec::new();
        while let Some(ket) = queue.pop_front() {
            if !seen.insert(ket.clone()) {
                continue;
            }
            if seen.len() > MAX_CLOSURE {
                return Err(Error::InvalidOperator("reachable basis is unbounded".into()));
            }
            let image = self.image(&ket)?;
            for (_, out) in &image {
                if !seen.contains(out) {
                    queue.push_back(out.clone());
                }
            }
            columns.push(PureState::from_amplitudes(ket.n_atoms(), image.into_iter().map(|(c, k)| (k, c)))?);
        }
        let mut worst = 0.0_f64;
        for (i, ci) in columns.iter().enumerate() {
            for (j, cj) in columns.iter().enumerate().skip(i) {
                let target = if i == j { 1.0 } else { 0.0 };
                let dev = (ci.inner(cj)? - Complex64::new(target, 0.0)).norm();
                worst = worst.max(dev);
            }
        }
        Ok(worst)
    }
}
