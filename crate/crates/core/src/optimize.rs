//! Choice of channel amplitude |a| (with |b| = √(1 − |a|²)).
//!
//! Two objectives: the Shannon entropy of the readout, averaged over a full
//! fringe, and the general-channel phase-noise ratio √(|a||b|). Both peak at
//! |a| = |b| = 1/√2. The ratio's extremum is a maximum, so the symmetric
//! channel is the one that suppresses phase noise the least among general
//! channels; it is reported as the extremum regardless.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::NeumaierSum;

/// Default number of Δφ points in the fringe average.
pub const ENTROPY_GRID_POINTS: usize = 1024;
/// Points in the unimodality pre-check.
pub const UNIMODAL_CHECK_POINTS: usize = 33;
/// 1/φ, the golden-section shrink factor.
pub const GOLDEN_SHRINK: f64 = 0.618_033_988_749_894_8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OptimizationResult {
    pub a_star: f64,
    pub b_star: f64,
    pub objective_value: f64,
    pub iterations: usize,
    /// Final bracket `[lo, hi]`; collapses to a point for analytic results.
    pub bracket: (f64, f64),
}

fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        p * p.log2()
    } else {
        0.0
    }
}

/// Readout entropy in bits over {remote g, remote e, selection failed}:
/// `P₁ = (1+cos Δφ)/2·|a|²`, `P₂ = (1−cos Δφ)/2·|b|²`, `P₃ = 1 − P₁ − P₂`.
/// Expects `a_abs` in [0, 1].
pub fn outcome_entropy(a_abs: f64, delta_phi: f64) -> f64 {
    let a2 = a_abs * a_abs;
    let c = delta_phi.cos();
    let p1 = 0.5 * (1.0 + c) * a2;
    let p2 = 0.5 * (1.0 - c) * (1.0 - a2);
    let p3 = (1.0 - p1 - p2).max(0.0);
    let h = -(plogp(p1) + plogp(p2) + plogp(p3));
    h.max(0.0)
}

pub fn fringe_averaged_entropy(a_abs: f64) -> f64 {
    fringe_averaged_entropy_on(a_abs, ENTROPY_GRID_POINTS)
}

/// Mean of [`outcome_entropy`] over `Δφ_j = 2πj/points`, j = 0..points.
pub fn fringe_averaged_entropy_on(a_abs: f64, points: usize) -> f64 {
    let step = std::f64::consts::TAU / points as f64;
    let sum: NeumaierSum = (0..points).map(|j| outcome_entropy(a_abs, step * j as f64)).collect();
    sum.value() / points as f64
}

/// √(|a|·√(1 − |a|²)).
pub fn png_ratio(a_abs: f64) -> f64 {
    (a_abs * (1.0 - a_abs * a_abs).max(0.0).sqrt()).sqrt()
}

/// Fails with [`Error::Multimodal`] unless samples rise then fall.
fn check_unimodal<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Result<()> {
    const FLAT: f64 = 1e-12;
    let n = UNIMODAL_CHECK_POINTS;
    let values: Vec<f64> = (0..n).map(|i| f(lo + (hi - lo) * i as f64 / (n - 1) as f64)).collect();
    let mut descending = false;
    for w in values.windows(2) {
        let d = w[1] - w[0];
        if d < -FLAT {
            descending = true;
        } else if d > FLAT && descending {
            return Err(Error::Multimodal);
        }
    }
    Ok(())
}

/// Golden-section maximisation; stops once the bracket is narrower than `tolerance`.
pub fn golden_section_maximize<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    tolerance: f64,
) -> Result<OptimizationResult> {
    if !tolerance.is_finite() || tolerance <= 0.0 {
        return Err(Error::InvalidParameter(format!("tolerance must be > 0, got {tolerance}")));
    }
    check_unimodal(&f, lo, hi)?;
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - GOLDEN_SHRINK * (b - a);
    let mut x2 = a + GOLDEN_SHRINK * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    let mut iterations = 0;
    while b - a >= tolerance {
        iterations += 1;
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - GOLDEN_SHRINK * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + GOLDEN_SHRINK * (b - a);
            f2 = f(x2);
        }
    }
    let a_star = 0.5 * (a + b);
    Ok(OptimizationResult {
        a_star,
        b_star: (1.0 - a_star * a_star).max(0.0).sqrt(),
        objective_value: f(a_star),
        iterations,
        bracket: (a, b),
    })
}

/// Maximises [`fringe_averaged_entropy`] over |a| ∈ [0, 1].
pub fn optimize_entropy(tolerance: f64) -> Result<OptimizationResult> {
    golden_section_maximize(fringe_averaged_entropy, 0.0, 1.0, tolerance)
}

/// Analytic extremum of [`png_ratio`]: |a| = 1/√2, value 2^(−1/2).
pub fn png_ratio_extremum() -> OptimizationResult {
    let a = std::f64::consts::FRAC_1_SQRT_2;
    OptimizationResult {
        a_star: a,
        b_star: a,
        objective_value: std::f64::consts::FRAC_1_SQRT_2,
        iterations: 0,
        bracket: (a, a),
    }
}
