//! Exact dynamics: dense and Krylov propagation, the closed-form XX
//! amplitudes, coupling-convention calibration, W-state targeting and
//! revivals.
//!
//! Propagators use `U(t) = exp(−i H t)` (ħ = 1). The closed forms are
//!
//! ```text
//! α(t)   = cos(ωt) − i (Δ/ω) sin(ωt)
//! β_k(t) = −i (c γ_k / ω) sin(ωt)
//! ω      = √(Σ_k (c γ_k)² + Δ²)
//! ```
//!
//! where `c` absorbs the normalization of the `σˣσˣ + σʸσʸ` coupling and is
//! fixed by [`calibrate_convention`] against exact numerics.

mod krylov;

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::BlockEigen;
use crate::model::{build_chain_star, detuning, Family, ModelSpec, SpinLayout};
use crate::pauli::{materialize, site_bit, CompiledOperator, PauliString, StateVector, DEFAULT_DENSE_SITES};
use crate::reduction::{effective_to_global_index, embed_effective, project_effective};

pub use krylov::{KrylovOptions, KrylovPropagator};

/// Samples per period used when a caller does not supply a grid.
pub const DEFAULT_INTERVALS: usize = 400;
/// Candidate coupling conventions.
pub const CONVENTIONS: [f64; 3] = [0.5, 1.0, 2.0];
/// Largest population deviation accepted by the calibration.
pub const CALIBRATION_TOL: f64 = 1e-8;

/// Something that can apply `exp(−i H dt)`.
pub trait Evolver {
    fn site_count(&self) -> usize;

    fn advance(&self, v: &StateVector, dt: f64) -> Result<StateVector>;

    /// States at each of `times`, starting from `psi0` at `t = 0`.
    fn evolve(&self, psi0: &StateVector, times: &[f64]) -> Result<Vec<StateVector>> {
        check_times(times)?;
        let mut out = Vec::with_capacity(times.len());
        let mut state = psi0.clone();
        let mut now = 0.0;
        for &t in times {
            if t > now {
                state = self.advance(&state, t - now)?;
                now = t;
            }
            out.push(state.clone());
        }
        Ok(out)
    }
}

fn check_times(times: &[f64]) -> Result<()> {
    let ok = times.iter().all(|t| t.is_finite() && *t >= 0.0) && times.windows(2).all(|w| w[0] <= w[1]);
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidTimes)
    }
}

/// Exact propagator from the block-wise eigendecomposition of the
/// materialized Hamiltonian.
#[derive(Clone, Debug)]
pub struct DenseEvolver {
    site_count: usize,
    eigen: BlockEigen,
}

impl DenseEvolver {
    pub fn new(h: &[PauliString], site_count: usize) -> Result<Self> {
        let m = materialize(h, site_count)?;
        Ok(Self { site_count, eigen: BlockEigen::new(m.entries()) })
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.eigen.eigenvalues()
    }

    pub fn at(&self, psi0: &StateVector, t: f64) -> Result<StateVector> {
        self.advance(psi0, t)
    }
}

impl Evolver for DenseEvolver {
    fn site_count(&self) -> usize {
        self.site_count
    }

    fn advance(&self, v: &StateVector, dt: f64) -> Result<StateVector> {
        if v.site_count() != self.site_count {
            return Err(Error::DimensionMismatch { expected: self.site_count, found: v.site_count() });
        }
        StateVector::new(self.eigen.propagate(v.amplitudes(), dt))
    }

    fn evolve(&self, psi0: &StateVector, times: &[f64]) -> Result<Vec<StateVector>> {
        check_times(times)?;
        times.iter().map(|&t| self.advance(psi0, t)).collect()
    }
}

pub fn evolve_dense(h: &[PauliString], psi0: &StateVector, times: &[f64]) -> Result<Vec<StateVector>> {
    DenseEvolver::new(h, psi0.site_count())?.evolve(psi0, times)
}

pub fn evolve_matrix_free(
    h: &[PauliString],
    psi0: &StateVector,
    times: &[f64],
    opts: KrylovOptions,
) -> Result<Vec<StateVector>> {
    KrylovPropagator::new(h, psi0.site_count(), opts)?.evolve(psi0, times)
}

/// Dense propagation when the register fits the dense limit, Krylov otherwise.
pub fn evolver_for(h: &[PauliString], site_count: usize) -> Result<Box<dyn Evolver>> {
    if site_count <= DEFAULT_DENSE_SITES {
        Ok(Box::new(DenseEvolver::new(h, site_count)?))
    } else {
        Ok(Box::new(KrylovPropagator::new(h, site_count, KrylovOptions::default())?))
    }
}

/// `n + 1` equally spaced times covering `periods` periods of frequency `omega`.
pub fn period_grid(omega: f64, intervals: usize, periods: f64) -> Vec<f64> {
    let span = if omega > 0.0 { periods * 2.0 * PI / omega } else { 0.0 };
    (0..=intervals).map(|k| span * k as f64 / intervals as f64).collect()
}

/// `|↑_a⟩ ⊗ |↓⟩` on every chain spin.
pub fn initial_state(layout: &SpinLayout) -> StateVector {
    let mut up = vec![false; layout.site_count()];
    up[SpinLayout::ANCILLA] = true;
    StateVector::product(&up)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RabiParams {
    pub omega: f64,
    pub delta: f64,
    pub gammas: Vec<f64>,
    pub calibration: f64,
}

impl RabiParams {
    pub fn new(gammas: Vec<f64>, delta: f64, calibration: f64) -> Self {
        let omega = (gammas.iter().map(|g| (calibration * g).powi(2)).sum::<f64>() + delta * delta).sqrt();
        Self { omega, delta, gammas, calibration }
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }

    /// First zero of `α` under resonance, where `|β|` peaks.
    pub fn peak_time(&self) -> f64 {
        PI / (2.0 * self.omega)
    }
}

/// Closed-form `(α, β₁…β_N)` at time `t`.
pub fn xx_amplitudes(p: &RabiParams, t: f64) -> (C64, Vec<C64>) {
    if p.omega == 0.0 {
        return (C64::new(1.0, 0.0), vec![C64::new(0.0, 0.0); p.gammas.len()]);
    }
    let (s, c) = (p.omega * t).sin_cos();
    let alpha = C64::new(c, -p.delta / p.omega * s);
    let beta = p.gammas.iter().map(|g| C64::new(0.0, -p.calibration * g / p.omega * s)).collect();
    (alpha, beta)
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceSource {
    Analytic,
    Numeric,
}

impl TraceSource {
    fn as_str(self) -> &'static str {
        match self {
            TraceSource::Analytic => "analytic",
            TraceSource::Numeric => "numeric",
        }
    }
}

/// Amplitudes on the single-excitation kets `|↑_a⟩|−…−⟩` and
/// `|↓_a⟩|−…+_k…−⟩` over time.
#[derive(Clone, Debug, PartialEq)]
pub struct EvolutionTrace {
    pub times: Vec<f64>,
    pub alpha: Vec<C64>,
    /// `beta[i][k]` at `times[i]`.
    pub beta: Vec<Vec<C64>>,
    pub source: TraceSource,
}

impl EvolutionTrace {
    pub fn analytic(p: &RabiParams, times: &[f64]) -> Self {
        let (alpha, beta) = times.iter().map(|&t| xx_amplitudes(p, t)).unzip();
        Self { times: times.to_vec(), alpha, beta, source: TraceSource::Analytic }
    }

    /// Read the amplitudes off full-register states of `layout`, or off
    /// effective `(N+1)`-qubit states.
    pub fn from_states(layout: &SpinLayout, times: &[f64], states: &[StateVector]) -> Result<Self> {
        let n = layout.chain_count();
        let full = layout.site_count();
        let index = |effective: usize, sites: usize| {
            if sites == full {
                Ok(effective_to_global_index(layout, effective))
            } else if sites == n + 1 {
                Ok(effective)
            } else {
                Err(Error::DimensionMismatch { expected: full, found: sites })
            }
        };
        let mut alpha = Vec::with_capacity(states.len());
        let mut beta = Vec::with_capacity(states.len());
        for s in states {
            let sites = s.site_count();
            alpha.push(s.amplitude(index(alpha_index(n), sites)?));
            beta.push((0..n).map(|k| Ok(s.amplitude(index(beta_index(n, k), sites)?))).collect::<Result<Vec<_>>>()?);
        }
        Ok(Self { times: times.to_vec(), alpha, beta, source: TraceSource::Numeric })
    }

    pub fn chain_count(&self) -> usize {
        self.beta.first().map_or(0, Vec::len)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn alpha_population(&self, i: usize) -> f64 {
        self.alpha[i].norm_sqr()
    }

    pub fn beta_population(&self, i: usize, k: usize) -> f64 {
        self.beta[i][k].norm_sqr()
    }

    pub fn excitation(&self, i: usize) -> f64 {
        self.beta[i].iter().map(|b| b.norm_sqr()).sum()
    }

    /// Largest `| |α|² + Σ|β_k|² − 1 |` over the trace.
    pub fn normalization_residual(&self) -> f64 {
        (0..self.len()).map(|i| (self.alpha_population(i) + self.excitation(i) - 1.0).abs()).fold(0.0, f64::max)
    }

    /// The effective `(N+1)`-qubit state at sample `i`.
    pub fn effective_state(&self, i: usize) -> StateVector {
        let n = self.chain_count();
        let mut v = StateVector::zeros(n + 1);
        v.amplitudes_mut()[alpha_index(n)] = self.alpha[i];
        for (k, &b) in self.beta[i].iter().enumerate() {
            v.amplitudes_mut()[beta_index(n, k)] = b;
        }
        v
    }

    /// `t,abs_alpha_sq,abs_beta_1_sq,…,abs_beta_N_sq,source`, 17 significant
    /// digits.
    pub fn to_csv(&self) -> String {
        let n = self.chain_count();
        let mut out = String::from("t,abs_alpha_sq");
        for k in 1..=n {
            let _ = write!(out, ",abs_beta_{k}_sq");
        }
        out.push_str(",source\n");
        for i in 0..self.len() {
            let _ = write!(out, "{:.16e},{:.16e}", self.times[i], self.alpha_population(i));
            for k in 0..n {
                let _ = write!(out, ",{:.16e}", self.beta_population(i, k));
            }
            let _ = writeln!(out, ",{}", self.source.as_str());
        }
        out
    }
}

/// Effective index of `|↑_a⟩|−…−⟩`.
pub fn alpha_index(n: usize) -> usize {
    (1 << n) - 1
}

/// Effective index of `|↓_a⟩|−…+_k…−⟩`.
pub fn beta_index(n: usize, k: usize) -> usize {
    site_bit(n + 1, 0) | (alpha_index(n) & !site_bit(n + 1, k + 1))
}

/// `|↓_a⟩ ⊗ (1/√N) Σ_k |−…+_k…−⟩` on `N + 1` effective sites.
pub fn w_state(n: usize) -> StateVector {
    let mut v = StateVector::zeros(n + 1);
    let a = C64::new(1.0 / (n as f64).sqrt(), 0.0);
    for k in 0..n {
        v.amplitudes_mut()[beta_index(n, k)] = a;
    }
    v
}

/// The W state written on the full register of `layout`.
pub fn w_state_chains(layout: &SpinLayout) -> StateVector {
    embed_effective(layout, &w_state(layout.chain_count())).expect("effective size matches layout")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Calibration {
    pub c: f64,
    /// `(candidate, max population deviation)` for every candidate.
    pub deviations: Vec<(f64, f64)>,
}

fn xx_couplings(spec: &ModelSpec) -> Result<Vec<f64>> {
    if spec.family != Family::XX {
        return Err(Error::InvalidSpec("the closed form applies to the XX family only".into()));
    }
    spec.check_sign_free()?;
    Ok(spec.gamma_x.clone())
}

/// Pick the coupling convention `c` for which the closed-form populations
/// reproduce dense propagation of `|↑_a⟩|↓…↓⟩` over one period.
pub fn calibrate_convention(spec: &ModelSpec) -> Result<Calibration> {
    let gammas = xx_couplings(spec)?;
    let sites = spec.layout.site_count();
    if sites > DEFAULT_DENSE_SITES {
        return Err(Error::DimensionTooLarge { sites, limit: DEFAULT_DENSE_SITES });
    }
    if gammas.iter().all(|&g| g == 0.0) {
        return Ok(Calibration { c: 1.0, deviations: CONVENTIONS.iter().map(|&c| (c, 0.0)).collect() });
    }
    let delta = detuning(spec)?;
    let evolver = DenseEvolver::new(&build_chain_star(spec)?, sites)?;
    let psi0 = initial_state(&spec.layout);
    let mut deviations = Vec::with_capacity(CONVENTIONS.len());
    for &c in &CONVENTIONS {
        let p = RabiParams::new(gammas.clone(), delta, c);
        let times = period_grid(p.omega, DEFAULT_INTERVALS, 1.0);
        let numeric = EvolutionTrace::from_states(&spec.layout, &times, &evolver.evolve(&psi0, &times)?)?;
        let analytic = EvolutionTrace::analytic(&p, &times);
        deviations.push((c, max_population_deviation(&analytic, &numeric)));
    }
    let (c, best) = deviations.iter().copied().min_by(|a, b| a.1.total_cmp(&b.1)).expect("nonempty");
    if best >= CALIBRATION_TOL {
        return Err(Error::NoConventionMatches { best });
    }
    Ok(Calibration { c, deviations })
}

/// A dense-feasible stand-in for `spec` with the same closed-form dynamics:
/// the spec itself when small enough, otherwise its effective star with each
/// chain collapsed to one spin carrying the whole chain field.
pub fn calibration_proxy(spec: &ModelSpec) -> Result<ModelSpec> {
    if spec.layout.site_count() <= DEFAULT_DENSE_SITES {
        return Ok(spec.clone());
    }
    let chain_field = (0..spec.chain_count()).map(|k| spec.field_profile(k).iter().sum()).collect();
    ModelSpec { layout: spec.layout.effective(), chain_field, spin_fields: Vec::new(), ..spec.clone() }.validate_into()
}

impl ModelSpec {
    fn validate_into(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }
}

pub fn max_population_deviation(a: &EvolutionTrace, b: &EvolutionTrace) -> f64 {
    (0..a.len().min(b.len()))
        .flat_map(|i| {
            std::iter::once((a.alpha_population(i) - b.alpha_population(i)).abs())
                .chain((0..a.chain_count()).map(move |k| (a.beta_population(i, k) - b.beta_population(i, k)).abs()))
        })
        .fold(0.0, f64::max)
}

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`.
pub fn golden_max(mut f: impl FnMut(f64) -> Result<f64>, mut a: f64, mut b: f64, iterations: usize) -> Result<f64> {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    for _ in 0..iterations {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2)?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1)?;
        }
    }
    Ok(0.5 * (a + b))
}

/// Locate the first maximum of `Σ_k|β_k|²` along numeric propagation of
/// `psi0`, searching a grid over one period then refining.
pub fn locate_first_peak(evolver: &dyn Evolver, layout: &SpinLayout, psi0: &StateVector, period: f64) -> Result<f64> {
    let times = period_grid(2.0 * PI / period, DEFAULT_INTERVALS, 1.0);
    let n = layout.chain_count();
    let excitation = |s: &StateVector| -> Result<f64> {
        Ok(EvolutionTrace::from_states(layout, &[0.0], std::slice::from_ref(s))?.excitation(0)).map(|e| {
            if n == 0 {
                0.0
            } else {
                e
            }
        })
    };
    let mut prev = (0.0, psi0.clone(), excitation(psi0)?);
    let mut cur = prev.clone();
    for &t in &times[1..] {
        let next_state = evolver.advance(&cur.1, t - cur.0)?;
        let next = (t, next_state.clone(), excitation(&next_state)?);
        if next.2 < cur.2 && cur.0 > 0.0 {
            let start = prev.clone();
            let span = next.0 - start.0;
            return golden_max(|t| excitation(&evolver.advance(&start.1, t - start.0)?), start.0, start.0 + span, 80);
        }
        prev = cur;
        cur = next;
    }
    Ok(cur.0)
}

/// Full-register state at the first `|β|` maximum of an XX chain-star.
#[derive(Clone, Debug, PartialEq)]
pub struct PeakState {
    /// `π / (2ω)` from the calibrated closed form.
    pub t_star: f64,
    /// Numerically located maximum of `Σ|β_k|²`.
    pub t_located: f64,
    pub calibration: f64,
    pub delta: f64,
    pub state: StateVector,
    pub state_at_t_star: StateVector,
}

/// Relative tolerance under which a detuning counts as zero.
pub const RESONANCE_TOL: f64 = 1e-12;

/// `Ok(Δ)` when the spec is resonant, `NotResonant(Δ)` otherwise.
pub fn check_resonant(spec: &ModelSpec) -> Result<f64> {
    let delta = detuning(spec)?;
    let scale = spec.gamma_x.iter().fold(spec.omega_a.abs().max(1.0), |s, g| s.max(g.abs()));
    if delta.abs() > RESONANCE_TOL * scale {
        return Err(Error::NotResonant(delta));
    }
    Ok(delta)
}

/// Propagate `|↑_a⟩|↓…↓⟩` under an XX chain-star to its first excitation
/// maximum, densely or matrix-free depending on the register size.
pub fn first_peak(spec: &ModelSpec) -> Result<PeakState> {
    let gammas = xx_couplings(spec)?;
    let delta = detuning(spec)?;
    let calibration = calibrate_convention(&calibration_proxy(spec)?)?.c;
    let p = RabiParams::new(gammas, delta, calibration);
    let layout = &spec.layout;
    let evolver = evolver_for(&build_chain_star(spec)?, layout.site_count())?;
    let psi0 = initial_state(layout);
    let t_star = p.peak_time();
    let state_at_t_star = evolver.advance(&psi0, t_star)?;
    let t_located = locate_first_peak(evolver.as_ref(), layout, &psi0, p.period())?;
    let state = evolver.advance(&psi0, t_located)?;
    Ok(PeakState { t_star, t_located, calibration, delta, state, state_at_t_star })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WPeak {
    pub t_star: f64,
    pub t_located: f64,
    pub fidelity: f64,
    pub fidelity_at_t_star: f64,
    pub leakage: f64,
    pub calibration: f64,
}

impl WPeak {
    /// W-state figures of merit of an already located peak.
    pub fn from_peak(spec: &ModelSpec, peak: &PeakState) -> Result<Self> {
        let target = w_state_chains(&spec.layout);
        let (_, leakage) = project_effective(&spec.layout, &peak.state)?;
        Ok(WPeak {
            t_star: peak.t_star,
            t_located: peak.t_located,
            fidelity: target.fidelity(&peak.state),
            fidelity_at_t_star: target.fidelity(&peak.state_at_t_star),
            leakage,
            calibration: peak.calibration,
        })
    }
}

fn check_uniform_couplings(spec: &ModelSpec) -> Result<()> {
    if spec.gamma_x.windows(2).any(|w| w[0] != w[1]) {
        return Err(Error::InvalidSpec("W targeting needs identical couplings".into()));
    }
    Ok(())
}

/// W-state fidelity at the first `|β|` maximum of a resonant, uniformly
/// coupled XX chain-star.
pub fn w_fidelity_peak(spec: &ModelSpec) -> Result<WPeak> {
    check_uniform_couplings(spec)?;
    check_resonant(spec)?;
    WPeak::from_peak(spec, &first_peak(spec)?)
}

/// As [`w_fidelity_peak`] without the resonance requirement; off resonance
/// the fidelity falls short of one.
pub fn w_fidelity_at_peak_unchecked(spec: &ModelSpec) -> Result<WPeak> {
    check_uniform_couplings(spec)?;
    WPeak::from_peak(spec, &first_peak(spec)?)
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct Revival {
    pub time: f64,
    pub overlap_re: f64,
    pub overlap_im: f64,
    pub fidelity: f64,
}

impl Revival {
    pub fn overlap(&self) -> C64 {
        C64::new(self.overlap_re, self.overlap_im)
    }
}

/// `⟨ψ(0)|ψ(T)⟩` from a trace that starts at `t = 0` and has a sample at `T`.
pub fn revival_check(trace: &EvolutionTrace, period: f64) -> Result<Revival> {
    if trace.times.first() != Some(&0.0) {
        return Err(Error::TraceDoesNotCover(0.0));
    }
    let tol = 1e-9 * period.abs().max(1.0);
    let i = trace.times.iter().position(|t| (t - period).abs() <= tol).ok_or(Error::TraceDoesNotCover(period))?;
    let overlap = trace.effective_state(0).inner(&trace.effective_state(i));
    Ok(Revival { time: trace.times[i], overlap_re: overlap.re, overlap_im: overlap.im, fidelity: overlap.norm() })
}

/// `⟨ψ|H|ψ⟩` along a sequence of states.
pub fn energies(h: &[PauliString], states: &[StateVector]) -> Result<Vec<f64>> {
    let Some(first) = states.first() else { return Ok(Vec::new()) };
    let op = CompiledOperator::new(h, first.site_count())?;
    states.iter().map(|s| Ok(op.expectation(s)?.re)).collect()
}
