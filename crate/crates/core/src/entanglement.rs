//! Two-qubit concurrence of chains and of physical spins, GHZ postselection
//! on the ancilla, and collective magnetization statistics.
//!
//! Concurrence follows Wootters: with `ρ̃ = (σʸ⊗σʸ) ρ* (σʸ⊗σʸ)` and `λᵢ` the
//! decreasing square roots of the eigenvalues of `ρ ρ̃`,
//! `C = max(0, λ₁ − λ₂ − λ₃ − λ₄)`. For any factorization `ρ = F F†` the `λᵢ`
//! are the singular values of the complex-symmetric matrix
//! `Fᵀ (σʸ⊗σʸ) F`, which is how they are computed here: no square roots of
//! near-zero eigenvalues are taken, so pure-state reductions keep full
//! precision.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::{DMatrix, SVD};
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::dynamics::{w_state, EvolutionTrace};
use crate::error::{Error, Result};
use crate::linalg::hermitian_eigen;
use crate::model::SpinLayout;
use crate::pauli::{site_bit, split_matrix, DensityMatrix, StateVector};
use crate::reduction::embed_effective;

/// Agreement required between the closed-form and partial-trace routes.
pub const PATH_TOL: f64 = 1e-9;
/// Outcomes less likely than this are refused by [`ghz_postselect`].
pub const MIN_OUTCOME_PROBABILITY: f64 = 1e-14;

const HERMITICITY_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;
const POSITIVITY_TOL: f64 = 1e-10;

fn spin_flip(f: &DMatrix<C64>) -> DMatrix<C64> {
    // (σʸ⊗σʸ) acting on rows: anti-diagonal (−1, 1, 1, −1)
    let mut out = DMatrix::zeros(4, f.ncols());
    for c in 0..f.ncols() {
        out[(0, c)] = -f[(3, c)];
        out[(1, c)] = f[(2, c)];
        out[(2, c)] = f[(1, c)];
        out[(3, c)] = -f[(0, c)];
    }
    out
}

/// Concurrence of `F F†` for a `4 × r` factor `F`.
fn concurrence_of_factor(f: &DMatrix<C64>) -> f64 {
    let b = f.transpose() * spin_flip(f);
    let mut lambda: Vec<f64> = SVD::new(b, false, false).singular_values.iter().copied().collect();
    lambda.sort_by(|a, b| b.total_cmp(a));
    lambda.resize(4, 0.0);
    (lambda[0] - lambda[1] - lambda[2] - lambda[3]).clamp(0.0, 1.0)
}

fn check_two_qubit(rho: &DensityMatrix) -> Result<()> {
    let e = rho.entries();
    if e.nrows() != 4 {
        return Err(Error::NotAState(format!("expected a two-qubit state, got dimension {}", e.nrows())));
    }
    let h = rho.hermiticity_residual();
    if h > HERMITICITY_TOL {
        return Err(Error::NotAState(format!("non-Hermitian (residual {h:e})")));
    }
    let tr = rho.trace();
    if (tr - C64::new(1.0, 0.0)).norm() > TRACE_TOL {
        return Err(Error::NotAState(format!("trace {tr}")));
    }
    Ok(())
}

/// Wootters concurrence of a two-qubit density matrix.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    check_two_qubit(rho)?;
    let (vals, vecs) = hermitian_eigen(rho.entries());
    if let Some(min) = vals.iter().copied().reduce(f64::min) {
        if min < -POSITIVITY_TOL {
            return Err(Error::NotAState(format!("negative eigenvalue {min:e}")));
        }
    }
    let mut f = vecs;
    for (k, &v) in vals.iter().enumerate() {
        let s = v.max(0.0).sqrt();
        f.column_mut(k).iter_mut().for_each(|z| *z *= s);
    }
    Ok(concurrence_of_factor(&f))
}

/// Concurrence of the two-site reduction of a pure state, computed from a
/// QR factor of the reshaped amplitudes.
fn pure_reduction_concurrence(v: &StateVector, a: usize, b: usize) -> Result<f64> {
    if a == b {
        return Err(Error::DuplicateSite(a));
    }
    let (_, m) = split_matrix(v, &[a, b], 2)?;
    let norm = v.norm_sqr();
    if (norm - 1.0).abs() > TRACE_TOL {
        return Err(Error::NotAState(format!("trace {norm}")));
    }
    // ρ = M M† = R† R with M† = Q R
    let r = m.adjoint().qr().r();
    Ok(concurrence_of_factor(&r.adjoint()))
}

/// Which two qubits a concurrence series refers to.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Subsystem {
    /// Effective chain qubits, 0-based chain indices.
    Chains(usize, usize),
    /// Physical spins, global site indices.
    Spins(usize, usize),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConcurrenceReport {
    pub subsystem: Subsystem,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl ConcurrenceReport {
    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// `t,concurrence` with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,concurrence\n");
        for (t, c) in self.times.iter().zip(&self.values) {
            let _ = writeln!(out, "{t:.16e},{c:.16e}");
        }
        out
    }
}

/// Concurrence between chains `i` and `j` along a trace. The closed form
/// `2|β_i||β_j|` is returned after checking it against the concurrence of
/// the effective state reduced onto the two chain qubits.
pub fn chain_pair_concurrence(trace: &EvolutionTrace, i: usize, j: usize) -> Result<ConcurrenceReport> {
    let n = trace.chain_count();
    for index in [i, j] {
        if index >= n {
            return Err(Error::IndexOutOfRange { index, count: n });
        }
    }
    if i == j {
        return Err(Error::InvalidSpec(format!("chain pair ({i}, {j}) is not a pair")));
    }
    let mut values = Vec::with_capacity(trace.len());
    for t in 0..trace.len() {
        let closed = 2.0 * trace.beta[t][i].norm() * trace.beta[t][j].norm();
        let reduced = pure_reduction_concurrence(&trace.effective_state(t), i + 1, j + 1)?;
        let gap = (closed - reduced).abs();
        if gap > PATH_TOL {
            return Err(Error::PathMismatch(gap));
        }
        values.push(closed.min(1.0));
    }
    Ok(ConcurrenceReport { subsystem: Subsystem::Chains(i, j), times: trace.times.clone(), values })
}

/// Concurrence of two physical chain spins of a full-register state.
pub fn spin_pair_concurrence(state: &StateVector, a: usize, b: usize) -> Result<f64> {
    if a == SpinLayout::ANCILLA || b == SpinLayout::ANCILLA {
        return Err(Error::AncillaNotAllowed);
    }
    spin_pair_concurrence_with_ancilla(state, a, b)
}

/// As [`spin_pair_concurrence`], but the ancilla may be one of the pair.
pub fn spin_pair_concurrence_with_ancilla(state: &StateVector, a: usize, b: usize) -> Result<f64> {
    for site in [a, b] {
        if site >= state.site_count() {
            return Err(Error::SiteOutOfRange { site, site_count: state.site_count() });
        }
    }
    pure_reduction_concurrence(state, a, b)
}

/// Largest concurrence over every pair of distinct chain spins.
pub fn max_spin_pair_concurrence(layout: &SpinLayout, state: &StateVector) -> Result<f64> {
    let s = layout.site_count();
    let mut best = 0.0f64;
    for a in 1..s {
        for b in a + 1..s {
            best = best.max(spin_pair_concurrence(state, a, b)?);
        }
    }
    Ok(best)
}

/// Eigenvalue of the ancilla `σᶻ` selected by a measurement.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Outcome {
    /// `+1`, ancilla up.
    Plus,
    /// `−1`, ancilla down.
    Minus,
}

impl Outcome {
    pub fn from_sign(sign: i8) -> Result<Self> {
        match sign {
            1 => Ok(Outcome::Plus),
            -1 => Ok(Outcome::Minus),
            other => Err(Error::InvalidSpec(format!("ancilla outcome must be ±1, got {other}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Postselection {
    pub probability: f64,
    /// Renormalized post-measurement state on the same register.
    pub state: StateVector,
}

/// Project the ancilla (site 0) onto `outcome` and renormalize.
pub fn ghz_postselect(state: &StateVector, outcome: Outcome) -> Result<Postselection> {
    let s = state.site_count();
    let down = site_bit(s, SpinLayout::ANCILLA);
    let keep_down = outcome == Outcome::Minus;
    let mut projected = state.clone();
    for (b, amp) in projected.amplitudes_mut().iter_mut().enumerate() {
        if (b & down != 0) != keep_down {
            *amp = C64::new(0.0, 0.0);
        }
    }
    let probability = projected.norm_sqr() / state.norm_sqr();
    if probability < MIN_OUTCOME_PROBABILITY {
        return Err(Error::ImpossibleOutcome(probability));
    }
    Ok(Postselection { probability, state: projected.normalized() })
}

/// `|↓_a⟩ ⊗ (|+⟩|−⟩ + |−⟩|+⟩)/√2` on a two-chain register.
pub fn ghz_chains(layout: &SpinLayout) -> Result<StateVector> {
    if layout.chain_count() != 2 {
        return Err(Error::ShapeMismatch(format!(
            "the two-chain GHZ state needs 2 chains, layout has {}",
            layout.chain_count()
        )));
    }
    embed_effective(layout, &w_state(2))
}

/// Distribution of `Σ σᶻ` over `sites`, as ascending `(value, probability)`.
pub fn collective_z_distribution(state: &StateVector, sites: &[usize]) -> Result<Vec<(i64, f64)>> {
    let s = state.site_count();
    if let Some(&site) = sites.iter().find(|&&x| x >= s) {
        return Err(Error::SiteOutOfRange { site, site_count: s });
    }
    let mut dist: BTreeMap<i64, f64> = BTreeMap::new();
    for (b, amp) in state.amplitudes().iter().enumerate() {
        let p = amp.norm_sqr();
        if p == 0.0 {
            continue;
        }
        let value: i64 = sites.iter().map(|&x| if b & site_bit(s, x) != 0 { -1 } else { 1 }).sum();
        *dist.entry(value).or_insert(0.0) += p;
    }
    Ok(dist.into_iter().collect())
}
