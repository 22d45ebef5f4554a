//! Piecewise resonance model: at every position only the nearest-resonant
//! tone is kept as a two-level coupling while all other tones enter through
//! an effective Stark shift, and the segments are glued into one continuous
//! adiabatic potential.
//!
//! All energies returned here are angular frequencies (energy over ħ, rad/s).
//! The Rabi frequencies Ω_n in [`PiecewiseConfig`] follow the two-level
//! convention in which the avoided-crossing gap at resonance equals Ω_n
//! exactly (for a linear tone of in-plane amplitude B, Ω = μ_B g_F B / 2ħ).

use crate::fields::{PhysicalConstants, RFDrive, SpinSystem, StaticFieldModel};
use thiserror::Error;

/// Fraction of the smallest Rabi frequency below which a non-nearest
/// detuning makes the Stark expansion invalid.
pub const STARK_EPSILON_FACTOR: f64 = 1e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PiecewiseError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(
        "Stark shift diverges at z = {z} m: tone {tone} is within {epsilon} rad/s of resonance"
    )]
    StarkDivergence { z: f64, tone: usize, epsilon: f64 },
}

/// Which of the two local dressed branches to follow.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
}

/// Static model, drive and per-tone Rabi frequencies for one evaluation.
#[derive(Debug, Clone)]
pub struct PiecewiseConfig {
    pub consts: PhysicalConstants,
    pub spin: SpinSystem,
    pub model: StaticFieldModel,
    pub drive: RFDrive,
    /// One Rabi frequency (rad/s, gap convention) per tone.
    pub rabi: Vec<f64>,
    /// Overrides [`STARK_EPSILON_FACTOR`] when set.
    pub stark_epsilon_factor: Option<f64>,
}

/// Adiabatic potential sampled on a grid, with the nearest-resonance segment
/// index retained per sample.
#[derive(Debug, Clone)]
pub struct PotentialCurve {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub branch: Branch,
    pub segments: Vec<usize>,
}

/// Largest jump between adjacent samples at a segment boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpDiagnostic {
    /// |V(z_{i+1}) - V(z_i)| at the worst boundary (rad/s).
    pub jump: f64,
    /// Midpoint of the two samples bracketing the worst boundary (m).
    pub position: f64,
    /// Left sample index of the worst boundary.
    pub index: usize,
    /// True when the curve contains no segment boundary and the jump reported
    /// is simply the largest adjacent increment.
    pub interior_only: bool,
}

impl PiecewiseConfig {
    pub fn new(
        consts: PhysicalConstants,
        spin: SpinSystem,
        model: StaticFieldModel,
        drive: RFDrive,
        rabi: Vec<f64>,
    ) -> Result<Self, PiecewiseError> {
        if rabi.len() != drive.len() {
            return Err(PiecewiseError::InvalidConfig(
                "need exactly one Rabi frequency per tone".into(),
            ));
        }
        if rabi.iter().any(|w| !(*w >= 0.0)) {
            return Err(PiecewiseError::InvalidConfig(
                "Rabi frequencies must be non-negative".into(),
            ));
        }
        Ok(Self { consts, spin, model, drive, rabi, stark_epsilon_factor: None })
    }

    fn epsilon(&self) -> f64 {
        let factor = self.stark_epsilon_factor.unwrap_or(STARK_EPSILON_FACTOR);
        let min_rabi = self
            .rabi
            .iter()
            .cloned()
            .filter(|w| *w > 0.0)
            .fold(f64::INFINITY, f64::min);
        if min_rabi.is_finite() {
            factor * min_rabi
        } else {
            0.0
        }
    }

    /// Detuning δ_n(z) = (μ_B g_F B_s(z) - ħ ω_n)/ħ of tone `n`.
    pub fn detuning(&self, z: f64, n: usize) -> f64 {
        let beta = self.spin.larmor(&self.consts, self.model.modulus(z));
        beta - self.drive.tones()[n].omega
    }

    /// Index of the tone minimising |δ_n(z)|; ties fall to the lower index.
    pub fn nearest_resonance_index(&self, z: f64) -> usize {
        let mut best = 0;
        let mut best_abs = f64::INFINITY;
        for n in 0..self.drive.len() {
            let d = self.detuning(z, n).abs();
            if d < best_abs {
                best_abs = d;
                best = n;
            }
        }
        best
    }

    /// Exact two-level energies E_± = ±(1/2)√(Ω_n² + δ_n²) of the nearest
    /// resonance, without Stark corrections.
    pub fn two_level_energies(&self, z: f64, n: usize) -> (f64, f64) {
        let delta = self.detuning(z, n);
        let e = 0.5 * (self.rabi[n] * self.rabi[n] + delta * delta).sqrt();
        (e, -e)
    }

    /// Effective Stark shift L_n(z)/ħ = Σ_{j≠n} Ω_j² / (4 δ_j(z)) from all
    /// other tones.
    pub fn stark_shift(&self, z: f64, n: usize) -> Result<f64, PiecewiseError> {
        let epsilon = self.epsilon();
        let mut shift = 0.0;
        for j in 0..self.drive.len() {
            if j == n {
                continue;
            }
            let delta = self.detuning(z, j);
            if delta.abs() < epsilon {
                return Err(PiecewiseError::StarkDivergence { z, tone: j, epsilon });
            }
            shift += self.rabi[j] * self.rabi[j] / (4.0 * delta);
        }
        Ok(shift)
    }

    /// Stark-corrected energies E_± = ±(1/2)√(Ω_n² + (δ_n + 2 L_n/ħ)²).
    pub fn corrected_energies(&self, z: f64, n: usize) -> Result<(f64, f64), PiecewiseError> {
        let delta = self.detuning(z, n) + 2.0 * self.stark_shift(z, n)?;
        let e = 0.5 * (self.rabi[n] * self.rabi[n] + delta * delta).sqrt();
        Ok((e, -e))
    }

    /// Adiabatic potential at one point,
    /// V_±(z) = (-1)ⁿ [E_±(z) ∓ ω_n/2] ∓ Σ_{k=1}^{n-1} (-1)ᵏ ω_k,
    /// with n the 1-based nearest-resonance index.
    pub fn potential_at(&self, z: f64, branch: Branch) -> Result<f64, PiecewiseError> {
        let n0 = self.nearest_resonance_index(z);
        let (e_plus, e_minus) = self.corrected_energies(z, n0)?;
        let omega_n = self.drive.tones()[n0].omega;
        let parity = if (n0 + 1) % 2 == 0 { 1.0 } else { -1.0 };
        let mut ladder = 0.0;
        for k in 1..=n0 {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            ladder += sign * self.drive.tones()[k - 1].omega;
        }
        Ok(match branch {
            Branch::Plus => parity * (e_plus - 0.5 * omega_n) - ladder,
            Branch::Minus => parity * (e_minus + 0.5 * omega_n) + ladder,
        })
    }

    /// Samples the adiabatic potential over a sorted grid.
    pub fn adiabatic_potential(
        &self,
        grid: &[f64],
        branch: Branch,
    ) -> Result<PotentialCurve, PiecewiseError> {
        if grid.windows(2).any(|p| !(p[0] < p[1])) {
            return Err(PiecewiseError::InvalidConfig("grid must be sorted ascending".into()));
        }
        let mut values = Vec::with_capacity(grid.len());
        let mut segments = Vec::with_capacity(grid.len());
        for &z in grid {
            values.push(self.potential_at(z, branch)?);
            segments.push(self.nearest_resonance_index(z));
        }
        Ok(PotentialCurve { grid: grid.to_vec(), values, branch, segments })
    }
}

/// Largest adjacent-sample jump across a segment boundary of `curve`; when
/// the curve has no boundary the largest adjacent increment is reported with
/// `interior_only` set.
pub fn segment_jump_diagnostic(curve: &PotentialCurve) -> Option<JumpDiagnostic> {
    if curve.values.len() < 2 {
        return None;
    }
    let jump_at = |i: usize| (curve.values[i + 1] - curve.values[i]).abs();
    let boundaries: Vec<usize> = (0..curve.values.len() - 1)
        .filter(|&i| curve.segments[i] != curve.segments[i + 1])
        .collect();
    let (candidates, interior_only) = if boundaries.is_empty() {
        ((0..curve.values.len() - 1).collect::<Vec<_>>(), true)
    } else {
        (boundaries, false)
    };
    let index = candidates
        .into_iter()
        .max_by(|&a, &b| jump_at(a).total_cmp(&jump_at(b)))?;
    Some(JumpDiagnostic {
        jump: jump_at(index),
        position: 0.5 * (curve.grid[index] + curve.grid[index + 1]),
        index,
        interior_only,
    })
}

/// Median of |V(z_{i+1}) - V(z_i)| over all adjacent samples.
pub fn median_adjacent_increment(values: &[f64]) -> f64 {
    let mut increments: Vec<f64> =
        values.windows(2).map(|p| (p[1] - p[0]).abs()).collect();
    if increments.is_empty() {
        return 0.0;
    }
    increments.sort_by(f64::total_cmp);
    let mid = increments.len() / 2;
    if increments.len() % 2 == 1 {
        increments[mid]
    } else {
        0.5 * (increments[mid - 1] + increments[mid])
    }
}
