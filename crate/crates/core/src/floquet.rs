//! Truncated Floquet matrices for the driven spin-1/2 problem and their
//! eigendecomposition.
//!
//! The time-periodic Hamiltonian is replaced by a block matrix over photon
//! indices. For a single drive the diagonal carries ±β/2 + n₁ω₁ (β is the
//! Larmor frequency) and the drive couples opposite spins in adjacent photon
//! blocks. With two drives the matrix becomes block-tridiagonal in a second
//! index counting quanta of ω_r = ω₁ + ω₂, so each basis state is labelled
//! (m_F, n₁, n₂) with diagonal ±β/2 + n₁ω₁ + n₂ω_r.
//!
//! Each tone enters through the two Fourier amplitudes of its spin-flip
//! matrix element,
//!
//! ```text
//! <+|H(t)|-> = Ω₊ e^{-iωt} + Ω₋ e^{+iωt}    (rad/s)
//! ```
//!
//! For a linearly polarised tone Ω₊ = Ω₋ = Ω* with Ω = μ_B g_F (B'_x + i
//! B'_y)/4ħ; a circularly polarised (σ+) tone has Ω₋ = 0, with the rotating
//! wave approximation then exact. The resonance gap at β = ω equals 2|Ω|.

use crate::fields::{
    pi_neglect_ratio, rabi_frequency, PhysicalConstants, SpinSystem, PI_NEGLECT_WARN_RATIO,
};
use nalgebra::{DMatrix, DVector, Matrix2, Vector3};
use num_complex::Complex64 as C64;
use thiserror::Error;

/// Default photon-number cutoff per mode.
pub const DEFAULT_ORDER: usize = 5;
/// Hard cap for automatic order raising.
pub const MAX_ORDER: usize = 10;
/// Convergence demands an interior ladder mismatch below this fraction of
/// the smallest drive frequency.
pub const LADDER_TOL_FACTOR: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FloquetError {
    #[error("invalid truncation: {0}")]
    InvalidTruncation(String),
    #[error("eigensolver did not converge for a {dim}x{dim} matrix (order p1={p1}, p2={p2})")]
    NonConvergence { dim: usize, p1: usize, p2: usize },
}

/// Photon-number cutoffs; `p2 = 0` marks a single-mode problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TruncationOrder {
    pub p1: usize,
    pub p2: usize,
}

impl TruncationOrder {
    pub fn single(p1: usize) -> Self {
        Self { p1, p2: 0 }
    }

    pub fn two_mode(p1: usize, p2: usize) -> Self {
        Self { p1, p2 }
    }

    /// Matrix dimension 2 (2p₁+1)(2p₂+1).
    pub fn dim(&self) -> usize {
        2 * (2 * self.p1 + 1) * (2 * self.p2 + 1)
    }
}

/// Fourier amplitudes of one tone's spin-flip coupling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToneCoupling {
    pub omega: f64,
    /// Amplitude multiplying e^{-iωt} in ⟨+|H|−⟩.
    pub plus: C64,
    /// Amplitude multiplying e^{+iωt} in ⟨+|H|−⟩.
    pub minus: C64,
}

impl ToneCoupling {
    /// Linearly polarised tone with matrix Rabi frequency Ω (both Fourier
    /// amplitudes equal Ω*).
    pub fn linear(omega: f64, rabi: C64) -> Self {
        Self { omega, plus: rabi.conj(), minus: rabi.conj() }
    }

    /// Linearly polarised tone given the two-level (gap-convention) Rabi
    /// frequency, i.e. the avoided-crossing gap at resonance.
    pub fn linear_from_gap(omega: f64, gap_rabi: f64) -> Self {
        Self::linear(omega, C64::new(0.5 * gap_rabi, 0.0))
    }

    /// σ+ polarised tone; the counter-rotating amplitude vanishes, the gap
    /// at resonance is 2 |Ω|.
    pub fn sigma_plus(omega: f64, rabi: C64) -> Self {
        Self { omega, plus: rabi, minus: C64::new(0.0, 0.0) }
    }

    /// σ+ tone given the gap-convention Rabi frequency.
    pub fn sigma_plus_from_gap(omega: f64, gap_rabi: f64) -> Self {
        Self::sigma_plus(omega, C64::new(0.5 * gap_rabi, 0.0))
    }

    /// Tone built from a local-frame field vector; the axial component is
    /// dropped and its (|μ_B g_F B'_z| / ħω) ratio returned so callers can
    /// surface a diagnostic when it exceeds [`PI_NEGLECT_WARN_RATIO`].
    pub fn from_rotated_vector(
        omega: f64,
        b_prime: &Vector3<f64>,
        consts: &PhysicalConstants,
        spin: &SpinSystem,
    ) -> (Self, f64) {
        let rabi = rabi_frequency(b_prime, consts, spin);
        let ratio = pi_neglect_ratio(b_prime.z, omega, consts, spin);
        (Self::linear(omega, rabi), ratio)
    }

    /// Largest coupling magnitude.
    pub fn magnitude(&self) -> f64 {
        self.plus.norm().max(self.minus.norm())
    }
}

/// True when the axial-neglect ratio warrants a diagnostic.
pub fn neglect_ratio_warrants_warning(ratio: f64) -> bool {
    ratio > PI_NEGLECT_WARN_RATIO
}

/// Basis label of one matrix row: spin sign and the two photon indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RowLabel {
    /// +1 for m_F = +1/2, -1 for m_F = -1/2.
    pub spin: i8,
    pub n1: i32,
    pub n2: i32,
}

/// Dense Hermitian Floquet matrix with its basis labels.
#[derive(Debug, Clone)]
pub struct FloquetMatrix {
    mat: DMatrix<C64>,
    labels: Vec<RowLabel>,
    order: TruncationOrder,
    omega1: f64,
    omega_r: Option<f64>,
    beta: f64,
}

impl FloquetMatrix {
    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn labels(&self) -> &[RowLabel] {
        &self.labels
    }

    pub fn order(&self) -> TruncationOrder {
        self.order
    }

    pub fn omega1(&self) -> f64 {
        self.omega1
    }

    /// ω_r = ω₁ + ω₂ for two-mode matrices.
    pub fn omega_r(&self) -> Option<f64> {
        self.omega_r
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Diagonal value implied by a row label.
    pub fn diagonal_for(&self, label: &RowLabel) -> f64 {
        f64::from(label.spin) * 0.5 * self.beta
            + f64::from(label.n1) * self.omega1
            + f64::from(label.n2) * self.omega_r.unwrap_or(0.0)
    }

    /// Sum of the label-implied diagonal; couplings are traceless so this
    /// must equal the matrix trace exactly.
    pub fn label_trace(&self) -> f64 {
        self.labels.iter().map(|l| self.diagonal_for(l)).sum()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.mat[(i, i)].re).sum()
    }

    pub fn eigendecompose(&self) -> Result<EigenDecomposition, FloquetError> {
        hermitian_eigs(&self.mat).map_err(|_| FloquetError::NonConvergence {
            dim: self.dim(),
            p1: self.order.p1,
            p2: self.order.p2,
        })
    }
}

/// Spin-flip entry ⟨row|H|col⟩ for a photon-index step (dn1, dn2), or zero
/// when the step is not driven. `row_up` tells whether the row is spin +1/2
/// (the column then has the opposite spin).
fn coupling_entry(tone1: &ToneCoupling, tone2: Option<&ToneCoupling>, row_up: bool, dn1: i32, dn2: i32) -> C64 {
    let zero = C64::new(0.0, 0.0);
    let from_tone = |tone: &ToneCoupling, step: i32| -> C64 {
        match (step, row_up) {
            // e^{+iωt} term of <+|H|->, e^{-iωt} of <-|H|+>
            (1, true) => tone.minus,
            (1, false) => tone.plus.conj(),
            (-1, true) => tone.plus,
            (-1, false) => tone.minus.conj(),
            _ => zero,
        }
    };
    match (dn1, dn2) {
        (d, 0) if d.abs() == 1 => from_tone(tone1, d),
        // one ω₂ quantum: opposite unit steps in n₁ and n₂ since ω₂ = ω_r - ω₁
        (d1, d2) if d1 == -d2 && d2.abs() == 1 => match tone2 {
            Some(tone) => from_tone(tone, d2),
            None => zero,
        },
        _ => zero,
    }
}

fn assemble(
    beta: f64,
    tone1: &ToneCoupling,
    tone2: Option<&ToneCoupling>,
    order: TruncationOrder,
) -> FloquetMatrix {
    let p1 = order.p1 as i32;
    let p2 = order.p2 as i32;
    let omega_r = tone2.map(|t| tone1.omega + t.omega);
    let mut labels = Vec::with_capacity(order.dim());
    for n2 in (-p2..=p2).rev() {
        for n1 in (-p1..=p1).rev() {
            for spin in [1i8, -1i8] {
                labels.push(RowLabel { spin, n1, n2 });
            }
        }
    }
    let dim = labels.len();
    let mut mat = DMatrix::from_element(dim, dim, C64::new(0.0, 0.0));
    for (i, li) in labels.iter().enumerate() {
        mat[(i, i)] = C64::new(
            f64::from(li.spin) * 0.5 * beta
                + f64::from(li.n1) * tone1.omega
                + f64::from(li.n2) * omega_r.unwrap_or(0.0),
            0.0,
        );
        for (j, lj) in labels.iter().enumerate().skip(i + 1) {
            if li.spin == lj.spin {
                continue;
            }
            let entry = coupling_entry(
                tone1,
                tone2,
                li.spin > 0,
                li.n1 - lj.n1,
                li.n2 - lj.n2,
            );
            if entry != C64::new(0.0, 0.0) {
                mat[(i, j)] = entry;
                mat[(j, i)] = entry.conj();
            }
        }
    }
    FloquetMatrix { mat, labels, order, omega1: tone1.omega, omega_r, beta }
}

/// Fourier blocks of a single tone: H₀ = diag(β/2, −β/2) plus the two
/// coupling blocks, H₋₁ = H₊₁†.
pub fn floquet_blocks(beta: f64, tone: &ToneCoupling) -> (Matrix2<C64>, Matrix2<C64>, Matrix2<C64>) {
    let zero = C64::new(0.0, 0.0);
    let h0 = Matrix2::new(C64::new(0.5 * beta, 0.0), zero, zero, C64::new(-0.5 * beta, 0.0));
    let h_plus = Matrix2::new(zero, tone.minus, tone.plus.conj(), zero);
    let h_minus = Matrix2::new(zero, tone.plus, tone.minus.conj(), zero);
    (h0, h_plus, h_minus)
}

/// Single-mode Floquet matrix of dimension 2(2p₁+1); rows ordered by
/// descending photon index, spin up before down.
pub fn build_single(beta: f64, tone: &ToneCoupling, p1: usize) -> Result<FloquetMatrix, FloquetError> {
    if p1 < 1 {
        return Err(FloquetError::InvalidTruncation("p1 must be at least 1".into()));
    }
    Ok(assemble(beta, tone, None, TruncationOrder::single(p1)))
}

/// Two-mode composite matrix of dimension 2(2p₁+1)(2p₂+1); the second index
/// counts quanta of ω_r = ω₁ + ω₂, rows ordered by descending n₂, then
/// descending n₁, spin up before down.
pub fn build_two_mode(
    beta: f64,
    tones: &[ToneCoupling; 2],
    order: TruncationOrder,
) -> Result<FloquetMatrix, FloquetError> {
    if order.p1 < 1 || order.p2 < 1 {
        return Err(FloquetError::InvalidTruncation(
            "two-mode truncation needs p1 >= 1 and p2 >= 1".into(),
        ));
    }
    Ok(assemble(beta, &tones[0], Some(&tones[1]), order))
}

/// Eigendecomposition with deterministic ordering: eigenvalues ascending,
/// exact ties broken by lexicographic comparison of the phase-fixed vectors;
/// each vector's first significant component is made real positive.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    /// Column k pairs with `values[k]`.
    pub vectors: DMatrix<C64>,
}

impl EigenDecomposition {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn vector(&self, k: usize) -> DVector<C64> {
        DVector::from_column_slice(self.vectors.column(k).as_slice())
    }
}

fn phase_fix(column: &mut [C64]) {
    let max_abs = column.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if max_abs == 0.0 {
        return;
    }
    let pivot = column.iter().find(|c| c.norm() > 1e-12 * max_abs);
    if let Some(&c) = pivot {
        let phase = c.conj() / c.norm();
        for v in column.iter_mut() {
            *v *= phase;
        }
    }
}

fn lex_less(a: &[C64], b: &[C64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x.re != y.re {
            return x.re < y.re;
        }
        if x.im != y.im {
            return x.im < y.im;
        }
    }
    false
}

/// Full eigendecomposition of a dense Hermitian matrix. The input must be
/// exactly Hermitian (asserted); the only failure mode is the iteration cap.
pub fn hermitian_eigs(matrix: &DMatrix<C64>) -> Result<EigenDecomposition, FloquetError> {
    let n = matrix.nrows();
    assert_eq!(n, matrix.ncols(), "matrix must be square");
    for i in 0..n {
        for j in i..n {
            assert_eq!(
                matrix[(i, j)],
                matrix[(j, i)].conj(),
                "matrix must be Hermitian (rows {i}, {j})"
            );
        }
    }
    let eig = nalgebra::SymmetricEigen::try_new(matrix.clone(), f64::EPSILON, 100 * n.max(8))
        .ok_or(FloquetError::NonConvergence { dim: n, p1: 0, p2: 0 })?;
    let mut order: Vec<usize> = (0..n).collect();
    let mut vectors = eig.eigenvectors;
    for k in 0..n {
        let mut col = vectors.column_mut(k);
        phase_fix(col.as_mut_slice());
    }
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then_with(|| {
            if lex_less(vectors.column(a).as_slice(), vectors.column(b).as_slice()) {
                std::cmp::Ordering::Less
            } else {
                std::cmp::Ordering::Greater
            }
        })
    });
    let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut sorted = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
    for (dst, &src) in order.iter().enumerate() {
        sorted.set_column(dst, &vectors.column(src));
    }
    Ok(EigenDecomposition { values, vectors: sorted })
}

/// Worst interior ladder mismatch between truncations p and p+1: every
/// eigenvalue of `coarse` whose dominant photon label satisfies |n₁| ≤ p−1
/// must reappear in `fine`, and again shifted by ±ω₁.
pub fn ladder_check(coarse: &FloquetMatrix, fine: &FloquetMatrix) -> Result<f64, FloquetError> {
    let dc = coarse.eigendecompose()?;
    let df = fine.eigendecompose()?;
    let omega1 = coarse.omega1();
    let p = coarse.order().p1 as i32;
    let mut worst: f64 = 0.0;
    for (k, &lambda) in dc.values.iter().enumerate() {
        let col = dc.vectors.column(k);
        let dominant = (0..col.len())
            .max_by(|&a, &b| col[a].norm().total_cmp(&col[b].norm()))
            .expect("nonzero dimension");
        if coarse.labels()[dominant].n1.abs() > p - 1 {
            continue;
        }
        for target in [lambda, lambda + omega1, lambda - omega1] {
            let nearest = df
                .values
                .iter()
                .map(|v| (v - target).abs())
                .fold(f64::INFINITY, f64::min);
            worst = worst.max(nearest);
        }
    }
    Ok(worst)
}

/// Outcome of the per-run truncation check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceReport {
    pub order: TruncationOrder,
    pub mismatch: f64,
    pub tolerance: f64,
    pub raised: bool,
    pub converged: bool,
}

/// Raises the truncation order (capped at [`MAX_ORDER`]) until the worst
/// ladder mismatch over the sample points drops below `tolerance`.
pub fn auto_raise_order(
    samples: &[(f64, Vec<ToneCoupling>)],
    start: TruncationOrder,
    tolerance: f64,
) -> Result<ConvergenceReport, FloquetError> {
    let mut order = start;
    loop {
        let mut mismatch: f64 = 0.0;
        for (beta, tones) in samples {
            let (coarse, fine) = match tones.len() {
                1 => (
                    build_single(*beta, &tones[0], order.p1)?,
                    build_single(*beta, &tones[0], order.p1 + 1)?,
                ),
                2 => {
                    let pair = [tones[0], tones[1]];
                    (
                        build_two_mode(*beta, &pair, order)?,
                        build_two_mode(
                            *beta,
                            &pair,
                            TruncationOrder::two_mode(order.p1 + 1, order.p2 + 1),
                        )?,
                    )
                }
                n => {
                    return Err(FloquetError::InvalidTruncation(format!(
                        "unsupported tone count {n}"
                    )))
                }
            };
            mismatch = mismatch.max(ladder_check(&coarse, &fine)?);
        }
        if mismatch < tolerance {
            return Ok(ConvergenceReport {
                order,
                mismatch,
                tolerance,
                raised: order != start,
                converged: true,
            });
        }
        if order.p1 >= MAX_ORDER || (order.p2 > 0 && order.p2 >= MAX_ORDER) {
            return Ok(ConvergenceReport {
                order,
                mismatch,
                tolerance,
                raised: order != start,
                converged: false,
            });
        }
        order = TruncationOrder {
            p1: order.p1 + 1,
            p2: if order.p2 > 0 { order.p2 + 1 } else { 0 },
        };
    }
}

/// Reduce a quasi-energy into the window (-ω/2, ω/2].
pub fn fold(value: f64, omega: f64) -> f64 {
    let mut v = value.rem_euclid(omega);
    if v > 0.5 * omega {
        v -= omega;
    }
    v
}
