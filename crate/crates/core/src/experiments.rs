//! Reproducible experiment runners behind the `chainstar` command line.
//!
//! Every runner turns an [`ExperimentConfig`] into a [`RunOutput`]: a
//! pass/fail verdict, a JSON report (struct field order, so byte-stable) and
//! zero or more CSV artifacts. Runners are deterministic; the only source of
//! randomness is the seeded fixture used by `verify-mapping` when no model is
//! given.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    self, calibrate_convention, first_peak, golden_max, initial_state, period_grid, w_state, EvolutionTrace, Evolver,
    KrylovOptions, KrylovPropagator, RabiParams, DEFAULT_INTERVALS,
};
use crate::entanglement::{
    chain_pair_concurrence, collective_z_distribution, ghz_chains, ghz_postselect, max_spin_pair_concurrence,
    ConcurrenceReport, Outcome,
};
use crate::error::{Error, Result};
use crate::model::{build_chain_star, build_standard_star, detuning, Family, ModelSpec, SpinLayout};
use crate::pauli::{materialize, CompiledOperator, DEFAULT_DENSE_SITES};
use crate::reduction::{
    block_diagonality_residual, conjugate, effective_to_global_index, enumerate_sectors, layout_transform,
    sector_effective_model, SectorLabel,
};

/// Threshold for exact-mapping and postselection checks.
pub const MAPPING_TOL: f64 = 1e-9;
/// Threshold for closed-form identities.
pub const ANALYTIC_TOL: f64 = 1e-12;
/// Agreement required between closed-form and numeric peaks.
pub const NUMERIC_TOL: f64 = 1e-8;
/// Largest concurrence accepted for a pair of physical spins.
pub const SPIN_PAIR_TOL: f64 = 1e-10;
/// Largest invariant-subspace leakage accepted.
pub const LEAKAGE_TOL: f64 = 1e-10;
/// Seed of the randomized fixture when none is given.
pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Figure2a,
    DetuningSweep,
    VerifyMapping,
    WState,
    Ghz,
    Concurrence,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::Figure2a,
        ExperimentKind::DetuningSweep,
        ExperimentKind::VerifyMapping,
        ExperimentKind::WState,
        ExperimentKind::Ghz,
        ExperimentKind::Concurrence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Figure2a => "figure2a",
            ExperimentKind::DetuningSweep => "detuning-sweep",
            ExperimentKind::VerifyMapping => "verify-mapping",
            ExperimentKind::WState => "w-state",
            ExperimentKind::Ghz => "ghz",
            ExperimentKind::Concurrence => "concurrence",
        }
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment kind '{s}'")))
    }
}

/// Sampling of the time axis in units of the Rabi period.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeGrid {
    pub intervals: usize,
    pub periods: f64,
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self { intervals: DEFAULT_INTERVALS, periods: 1.0 }
    }
}

impl TimeGrid {
    fn validate(&self) -> Result<()> {
        if self.intervals == 0 || !(self.periods.is_finite() && self.periods > 0.0) {
            return Err(Error::Config("grid needs intervals ≥ 1 and a positive number of periods".into()));
        }
        Ok(())
    }

    pub fn times(&self, omega: f64) -> Vec<f64> {
        period_grid(omega, self.intervals, self.periods)
    }
}

/// JSON experiment configuration. Every key is optional; each runner reads
/// the keys relevant to it and falls back to the documented defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Informational; the command-line kind takes precedence.
    pub kind: Option<ExperimentKind>,
    /// Chain-star model for `verify-mapping`, `w-state`, `ghz` and
    /// `concurrence`.
    pub model: Option<ModelSpec>,
    pub grid: TimeGrid,
    /// Number of chains for `figure2a` and `detuning-sweep`.
    pub chains: usize,
    /// Uniform coupling γ for `figure2a` and `detuning-sweep`.
    pub gamma: f64,
    /// Values of Δ/γ for `detuning-sweep`.
    pub ratios: Vec<f64>,
    /// Ancilla frequency of the off-zero resonant scenario of `w-state` and
    /// `ghz`; the chain field is set to `omega_a / M`.
    pub resonant_omega_a: f64,
    /// Seed of the random `verify-mapping` fixture.
    pub seed: u64,
    /// Refuse detuned W/GHZ runs instead of reporting them as failures.
    pub strict: bool,
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            kind: None,
            model: None,
            grid: TimeGrid::default(),
            chains: 9,
            gamma: 1.0,
            ratios: vec![0.0, 1.0, 5.0, 10.0],
            resonant_omega_a: 0.8,
            seed: DEFAULT_SEED,
            strict: false,
            out: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if self.chains == 0 {
            return Err(Error::Config("chains must be at least 1".into()));
        }
        if !(self.gamma.is_finite() && self.gamma != 0.0) {
            return Err(Error::Config("gamma must be finite and nonzero".into()));
        }
        if self.ratios.is_empty() || self.ratios.iter().any(|r| !r.is_finite()) {
            return Err(Error::Config("ratios must be a nonempty list of finite numbers".into()));
        }
        if !self.resonant_omega_a.is_finite() {
            return Err(Error::Config("resonant_omega_a must be finite".into()));
        }
        Ok(())
    }
}

/// Result of one experiment run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub kind: ExperimentKind,
    pub passed: bool,
    /// Pretty-printed JSON report.
    pub report: String,
    /// `(file name, contents)` CSV artifacts.
    pub files: Vec<(String, String)>,
}

impl RunOutput {
    fn new<T: Serialize>(kind: ExperimentKind, passed: bool, report: &T, files: Vec<(String, String)>) -> Self {
        let report = serde_json::to_string_pretty(report).expect("reports serialize") + "\n";
        Self { kind, passed, report, files }
    }

    /// Write the report as `<kind>.json` and every artifact into `dir`,
    /// creating it if needed. Returns the written paths.
    pub fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::with_capacity(self.files.len() + 1);
        let report_path = dir.join(format!("{}.json", self.kind.name()));
        std::fs::write(&report_path, &self.report)?;
        written.push(report_path);
        for (name, contents) in &self.files {
            let path = dir.join(name);
            std::fs::write(&path, contents)?;
            written.push(path);
        }
        Ok(written)
    }
}

pub fn run(kind: ExperimentKind, cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    match kind {
        ExperimentKind::Figure2a => run_figure2a(cfg),
        ExperimentKind::DetuningSweep => run_detuning_sweep(cfg),
        ExperimentKind::VerifyMapping => run_verify_mapping(cfg),
        ExperimentKind::WState => run_w_state(cfg),
        ExperimentKind::Ghz => run_ghz(cfg),
        ExperimentKind::Concurrence => run_concurrence(cfg),
    }
}

fn e17(x: f64) -> String {
    format!("{x:.16e}")
}

/// `omega_t_over_pi,abs_alpha_sq,abs_beta_sq` rows of a trace; `β` is the
/// first chain's amplitude.
fn population_csv(trace: &EvolutionTrace, omega: f64, numeric: Option<&EvolutionTrace>) -> String {
    let mut out = String::from("omega_t_over_pi,abs_alpha_sq,abs_beta_sq");
    if numeric.is_some() {
        out.push_str(",numeric_abs_alpha_sq,numeric_abs_beta_sq");
    }
    out.push('\n');
    for i in 0..trace.len() {
        let x = omega * trace.times[i] / std::f64::consts::PI;
        let _ = write!(out, "{},{},{}", e17(x), e17(trace.alpha_population(i)), e17(trace.beta_population(i, 0)));
        if let Some(n) = numeric {
            let _ = write!(out, ",{},{}", e17(n.alpha_population(i)), e17(n.beta_population(i, 0)));
        }
        out.push('\n');
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Figure2aReport {
    pub chains: usize,
    pub gamma: f64,
    pub omega: f64,
    pub peak_omega_t_over_pi: f64,
    pub peak_beta_sq: f64,
    pub expected_peak_beta_sq: f64,
    pub max_grid_beta_sq: f64,
    pub max_normalization_residual: f64,
    pub passed: bool,
}

/// Closed-form `|α|²`, `|β|²` for `N` equally coupled chains at resonance.
pub fn run_figure2a(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let n = cfg.chains;
    let p = RabiParams::new(vec![cfg.gamma; n], 0.0, 1.0);
    let trace = EvolutionTrace::analytic(&p, &cfg.grid.times(p.omega));
    let peak_t = p.peak_time();
    let (_, beta) = dynamics::xx_amplitudes(&p, peak_t);
    let peak = beta[0].norm_sqr();
    let expected = 1.0 / n as f64;
    let max_grid = (0..trace.len()).map(|i| trace.beta_population(i, 0)).fold(0.0, f64::max);
    let residual = trace.normalization_residual();
    let starts_clean = trace.alpha_population(0) == 1.0 && trace.excitation(0) == 0.0;
    let passed = (peak - expected).abs() <= ANALYTIC_TOL
        && max_grid <= peak + ANALYTIC_TOL
        && residual <= ANALYTIC_TOL
        && starts_clean;
    let report = Figure2aReport {
        chains: n,
        gamma: cfg.gamma,
        omega: p.omega,
        peak_omega_t_over_pi: p.omega * peak_t / std::f64::consts::PI,
        peak_beta_sq: peak,
        expected_peak_beta_sq: expected,
        max_grid_beta_sq: max_grid,
        max_normalization_residual: residual,
        passed,
    };
    let csv = population_csv(&trace, p.omega, None);
    Ok(RunOutput::new(ExperimentKind::Figure2a, passed, &report, vec![("figure2a.csv".into(), csv)]))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepPoint {
    pub ratio: f64,
    pub omega: f64,
    pub expected_peak_beta_sq: f64,
    pub analytic_peak_beta_sq: f64,
    pub numeric_peak_beta_sq: f64,
    pub numeric_peak_omega_t_over_pi: f64,
    pub max_population_deviation: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepReport {
    pub chains: usize,
    pub gamma: f64,
    pub calibration: f64,
    pub points: Vec<SweepPoint>,
    pub peaks_decreasing: bool,
    pub passed: bool,
}

/// The calibration constant `c` of the XX coupling convention, from a small
/// two-chain reference.
pub fn reference_calibration() -> Result<f64> {
    let spec = ModelSpec::xx(SpinLayout::uniform(2, 1)?, 0.0, vec![0.6, 0.9])?;
    Ok(calibrate_convention(&spec)?.c)
}

/// The effective `N + 1`-qubit XX star whose dynamics follow the closed form
/// with coupling `gamma` and detuning `delta`.
pub fn effective_xx_star(n: usize, gamma: f64, delta: f64, calibration: f64) -> Result<ModelSpec> {
    ModelSpec::xx(SpinLayout::uniform(n, 1)?, 0.0, vec![gamma / calibration; n])?.with_chain_field(vec![delta; n])
}

/// Peak `|β|²` for each detuning ratio, closed form against matrix-free
/// propagation of the effective star.
pub fn run_detuning_sweep(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let n = cfg.chains;
    let c = reference_calibration()?;
    let mut points = Vec::with_capacity(cfg.ratios.len());
    let mut files = Vec::with_capacity(cfg.ratios.len());
    for &r in &cfg.ratios {
        let delta = r * cfg.gamma;
        let p = RabiParams::new(vec![cfg.gamma; n], delta, 1.0);
        let times = cfg.grid.times(p.omega);
        let analytic = EvolutionTrace::analytic(&p, &times);

        let spec = effective_xx_star(n, cfg.gamma, delta, c)?;
        let layout = spec.layout.clone();
        let krylov = KrylovPropagator::new(&build_chain_star(&spec)?, layout.site_count(), KrylovOptions::default())?;
        let psi0 = initial_state(&layout);
        let states = krylov.evolve(&psi0, &times)?;
        let numeric = EvolutionTrace::from_states(&layout, &times, &states)?;

        let t_peak = p.peak_time();
        let expected = 1.0 / (n as f64 + r * r);
        let analytic_peak = dynamics::xx_amplitudes(&p, t_peak).1[0].norm_sqr();
        let beta_sq = |t: f64| -> Result<f64> {
            let s = krylov.advance(&psi0, t)?;
            Ok(EvolutionTrace::from_states(&layout, &[t], &[s])?.beta_population(0, 0))
        };
        let half = 0.5 * t_peak;
        let t_num = golden_max(beta_sq, t_peak - half, t_peak + half, 80)?;
        let numeric_peak = beta_sq(t_num)?;
        let deviation = dynamics::max_population_deviation(&analytic, &numeric);
        let passed = (analytic_peak - expected).abs() <= ANALYTIC_TOL
            && (numeric_peak - expected).abs() <= NUMERIC_TOL
            && deviation <= NUMERIC_TOL;
        points.push(SweepPoint {
            ratio: r,
            omega: p.omega,
            expected_peak_beta_sq: expected,
            analytic_peak_beta_sq: analytic_peak,
            numeric_peak_beta_sq: numeric_peak,
            numeric_peak_omega_t_over_pi: p.omega * t_num / std::f64::consts::PI,
            max_population_deviation: deviation,
            passed,
        });
        files.push((format!("detuning_ratio_{r}.csv"), population_csv(&analytic, p.omega, Some(&numeric))));
    }
    let mut by_ratio: Vec<&SweepPoint> = points.iter().collect();
    by_ratio.sort_by(|a, b| a.ratio.abs().total_cmp(&b.ratio.abs()));
    let peaks_decreasing = by_ratio
        .windows(2)
        .all(|w| w[0].ratio.abs() == w[1].ratio.abs() || w[1].analytic_peak_beta_sq < w[0].analytic_peak_beta_sq);
    let passed = peaks_decreasing && points.iter().all(|p| p.passed);
    let report = SweepReport { chains: n, gamma: cfg.gamma, calibration: c, points, peaks_decreasing, passed };
    Ok(RunOutput::new(ExperimentKind::DetuningSweep, passed, &report, files))
}

/// XYZ chain-star with couplings, ancilla frequency and per-spin fields
/// drawn uniformly from `[−1, 1]`.
pub fn random_xyz_spec(layout: SpinLayout, seed: u64) -> Result<ModelSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = layout.chain_count();
    let mut draw = |count: usize| -> Vec<f64> { (0..count).map(|_| rng.gen_range(-1.0..=1.0)).collect() };
    let omega_a = draw(1)[0];
    let (gamma_x, gamma_y, gamma_z) = (draw(n), draw(n), draw(n));
    let spin_fields = layout.chain_sizes().iter().map(|&m| draw(m)).collect();
    let spec = ModelSpec { omega_a, gamma_x, gamma_y, gamma_z, spin_fields, ..ModelSpec::empty(Family::XYZ, layout) };
    spec.validate()?;
    Ok(spec)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MappingReport {
    pub model: ModelSpec,
    pub sectors: usize,
    pub eigenvalues: usize,
    pub max_spectral_deviation: f64,
    pub block_diagonality_residual: f64,
    pub restriction_deviation: f64,
    pub calibration: f64,
    pub passed: bool,
}

/// Sorted union of the effective-star spectra over all sectors.
pub fn sector_union_spectrum(spec: &ModelSpec) -> Result<Vec<f64>> {
    let mut all = Vec::new();
    for sector in enumerate_sectors(&spec.layout)? {
        let p = sector_effective_model(spec, &sector)?;
        all.extend(materialize(&build_standard_star(&p), p.site_count())?.eigenvalues());
    }
    all.sort_by(f64::total_cmp);
    Ok(all)
}

/// Largest entry of `P H P − H_eff` where `P` projects on the subspace of
/// uniformly polarized chains and `H_eff` is the all-(+1) effective star.
pub fn restriction_deviation(spec: &ModelSpec) -> Result<f64> {
    let layout = &spec.layout;
    let h = CompiledOperator::new(&build_chain_star(spec)?, layout.site_count())?;
    let eff = sector_effective_model(spec, &SectorLabel::all_plus(layout))?;
    let h_eff = materialize(&build_standard_star(&eff), eff.site_count())?;
    let dim = h_eff.dim();
    let mut worst = 0.0f64;
    for col in 0..dim {
        let basis = crate::pauli::StateVector::basis(layout.site_count(), effective_to_global_index(layout, col));
        let image = h.apply(&basis)?;
        for row in 0..dim {
            let got = image.amplitude(effective_to_global_index(layout, row));
            worst = worst.max((got - h_eff.entries()[(row, col)]).norm());
        }
    }
    Ok(worst)
}

/// Dense check of the sector decomposition: spectra, block structure after
/// the transform, and the restricted Hamiltonian.
pub fn verify_mapping(spec: &ModelSpec) -> Result<MappingReport> {
    let layout = &spec.layout;
    let sites = layout.site_count();
    if sites > DEFAULT_DENSE_SITES {
        return Err(Error::DimensionTooLarge { sites, limit: DEFAULT_DENSE_SITES });
    }
    let h = build_chain_star(spec)?;
    let full = dynamics::DenseEvolver::new(&h, sites)?.eigenvalues();
    let union = sector_union_spectrum(spec)?;
    let max_spectral_deviation = if full.len() == union.len() {
        full.iter().zip(&union).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    let block = block_diagonality_residual(layout, &conjugate(&h, &layout_transform(layout)));
    let restriction = restriction_deviation(spec)?;
    let calibration = reference_calibration()?;
    let passed = max_spectral_deviation < MAPPING_TOL && block < MAPPING_TOL && restriction < MAPPING_TOL;
    Ok(MappingReport {
        model: spec.clone(),
        sectors: enumerate_sectors(layout)?.len(),
        eigenvalues: full.len(),
        max_spectral_deviation,
        block_diagonality_residual: block,
        restriction_deviation: restriction,
        calibration,
        passed,
    })
}

pub fn run_verify_mapping(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let spec = match &cfg.model {
        Some(spec) => spec.clone(),
        None => random_xyz_spec(SpinLayout::uniform(2, 3)?, cfg.seed)?,
    };
    let report = verify_mapping(&spec)?;
    Ok(RunOutput::new(ExperimentKind::VerifyMapping, report.passed, &report, Vec::new()))
}

/// `spec` with ancilla frequency `omega_a` and chain fields `omega_a / M_k`.
pub fn resonant_variant(spec: &ModelSpec, omega_a: f64) -> Result<ModelSpec> {
    let chain_field = spec.layout.chain_sizes().iter().map(|&m| omega_a / m as f64).collect();
    ModelSpec { omega_a, spin_fields: Vec::new(), ..spec.clone() }.with_chain_field(chain_field)
}

fn scenarios(base: &ModelSpec, omega_a: f64) -> Result<Vec<(String, ModelSpec)>> {
    let mut out = vec![("as-configured".to_string(), base.clone())];
    if omega_a != 0.0 {
        out.push((format!("resonant-omega_a-{omega_a}"), resonant_variant(base, omega_a)?));
    }
    Ok(out)
}

fn gate_resonance(spec: &ModelSpec, strict: bool) -> Result<bool> {
    match dynamics::check_resonant(spec) {
        Ok(_) => Ok(true),
        Err(e @ Error::NotResonant(_)) if strict => Err(e),
        Err(Error::NotResonant(_)) => Ok(false),
        Err(e) => Err(e),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WScenario {
    pub label: String,
    pub omega_a: f64,
    pub chain_field: Vec<f64>,
    pub detuning: f64,
    pub time: f64,
    pub t_star: f64,
    pub fidelity: f64,
    pub fidelity_at_t_star: f64,
    pub leakage: f64,
    pub chain_pair_concurrence: Vec<f64>,
    pub expected_chain_pair_concurrence: f64,
    pub max_spin_pair_concurrence: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WReport {
    pub chain_sizes: Vec<usize>,
    pub calibration: f64,
    pub analytic_fidelity: f64,
    pub scenarios: Vec<WScenario>,
    pub passed: bool,
}

fn default_w_model() -> Result<ModelSpec> {
    ModelSpec::xx(SpinLayout::uniform(3, 5)?, 0.0, vec![1.0; 3])
}

fn default_ghz_model() -> Result<ModelSpec> {
    ModelSpec::xx(SpinLayout::uniform(2, 5)?, 0.0, vec![1.0; 2])
}

fn chain_concurrences_at(spec: &ModelSpec, state: &crate::pauli::StateVector) -> Result<Vec<f64>> {
    let n = spec.chain_count();
    let trace = EvolutionTrace::from_states(&spec.layout, &[0.0], std::slice::from_ref(state))?;
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            out.push(chain_pair_concurrence(&trace, i, j)?.values[0]);
        }
    }
    Ok(out)
}

/// W-state certification at the located excitation peak, for the configured
/// model and for its resonant variant with a nonzero ancilla frequency.
pub fn run_w_state(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let base = match &cfg.model {
        Some(spec) => spec.clone(),
        None => default_w_model()?,
    };
    let n = base.chain_count();
    let c = calibrate_convention(&dynamics::calibration_proxy(&base)?)?.c;
    let p = RabiParams::new(base.gamma_x.clone(), 0.0, c);
    let analytic = w_state(n).fidelity(&EvolutionTrace::analytic(&p, &[p.peak_time()]).effective_state(0));
    let expected_pair = if n > 1 { 2.0 / n as f64 } else { 0.0 };
    let mut out = Vec::new();
    for (label, spec) in scenarios(&base, cfg.resonant_omega_a)? {
        let resonant = gate_resonance(&spec, cfg.strict)?;
        let peak = first_peak(&spec)?;
        let w = dynamics::WPeak::from_peak(&spec, &peak)?;
        let pairs = chain_concurrences_at(&spec, &peak.state)?;
        let spin_pairs = max_spin_pair_concurrence(&spec.layout, &peak.state)?;
        let passed = resonant
            && w.fidelity >= 1.0 - NUMERIC_TOL
            && w.leakage < LEAKAGE_TOL
            && pairs.iter().all(|c| (c - expected_pair).abs() <= MAPPING_TOL)
            && spin_pairs < SPIN_PAIR_TOL;
        out.push(WScenario {
            label,
            omega_a: spec.omega_a,
            chain_field: spec.chain_field.clone(),
            detuning: detuning(&spec)?,
            time: peak.t_located,
            t_star: peak.t_star,
            fidelity: w.fidelity,
            fidelity_at_t_star: w.fidelity_at_t_star,
            leakage: w.leakage,
            chain_pair_concurrence: pairs,
            expected_chain_pair_concurrence: expected_pair,
            max_spin_pair_concurrence: spin_pairs,
            passed,
        });
    }
    let passed = (analytic - 1.0).abs() <= ANALYTIC_TOL && out.iter().all(|s| s.passed);
    let report = WReport {
        chain_sizes: base.layout.chain_sizes().to_vec(),
        calibration: c,
        analytic_fidelity: analytic,
        scenarios: out,
        passed,
    };
    Ok(RunOutput::new(ExperimentKind::WState, passed, &report, Vec::new()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GhzScenario {
    pub label: String,
    pub omega_a: f64,
    pub chain_field: Vec<f64>,
    pub detuning: f64,
    pub time: f64,
    pub probability: f64,
    pub fidelity: f64,
    pub chain_pair_concurrence: f64,
    pub max_spin_pair_concurrence: f64,
    /// Distribution of `Σσᶻ` over all chain spins, `(value, probability)`.
    pub collective_z: Vec<(i64, f64)>,
    /// Distribution of `Σσᶻ` over the spins of the first chain.
    pub first_chain_z: Vec<(i64, f64)>,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GhzReport {
    pub chain_sizes: Vec<usize>,
    pub scenarios: Vec<GhzScenario>,
    pub passed: bool,
}

/// GHZ certification: ancilla postselection at the excitation peak of a
/// two-chain XX star, for the configured model and its resonant variant with
/// a nonzero ancilla frequency.
pub fn run_ghz(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let base = match &cfg.model {
        Some(spec) => spec.clone(),
        None => default_ghz_model()?,
    };
    let target = ghz_chains(&base.layout)?;
    let mut out = Vec::new();
    for (label, spec) in scenarios(&base, cfg.resonant_omega_a)? {
        let resonant = gate_resonance(&spec, cfg.strict)?;
        let peak = first_peak(&spec)?;
        let post = ghz_postselect(&peak.state, Outcome::Minus)?;
        let fidelity = target.fidelity(&post.state);
        let chain_c = chain_concurrences_at(&spec, &peak.state)?[0];
        let spin_pairs = max_spin_pair_concurrence(&spec.layout, &post.state)?;
        let chain_spins: Vec<usize> = (1..spec.layout.site_count()).collect();
        let first: Vec<usize> = spec.layout.chain_sites(0).collect();
        let passed = resonant
            && (post.probability - 1.0).abs() <= MAPPING_TOL
            && fidelity >= 1.0 - MAPPING_TOL
            && (chain_c - 1.0).abs() <= MAPPING_TOL
            && spin_pairs < SPIN_PAIR_TOL;
        out.push(GhzScenario {
            label,
            omega_a: spec.omega_a,
            chain_field: spec.chain_field.clone(),
            detuning: detuning(&spec)?,
            time: peak.t_located,
            probability: post.probability,
            fidelity,
            chain_pair_concurrence: chain_c,
            max_spin_pair_concurrence: spin_pairs,
            collective_z: collective_z_distribution(&post.state, &chain_spins)?,
            first_chain_z: collective_z_distribution(&post.state, &first)?,
            passed,
        });
    }
    let passed = out.iter().all(|s| s.passed);
    let report = GhzReport { chain_sizes: base.layout.chain_sizes().to_vec(), scenarios: out, passed };
    Ok(RunOutput::new(ExperimentKind::Ghz, passed, &report, Vec::new()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConcurrencePair {
    pub chains: (usize, usize),
    pub max_concurrence: f64,
    pub max_deviation_from_closed_form: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConcurrenceRunReport {
    pub model: ModelSpec,
    pub calibration: f64,
    pub samples: usize,
    pub pairs: Vec<ConcurrencePair>,
    pub max_spin_pair_concurrence_at_peak: f64,
    pub passed: bool,
}

fn default_concurrence_model() -> Result<ModelSpec> {
    ModelSpec::xx(SpinLayout::uniform(2, 5)?, 0.0, vec![0.6, 1.1])
}

/// Chain-pair concurrence along numerically propagated traces, checked
/// against `2|β_i||β_j|` from the calibrated closed form.
pub fn run_concurrence(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let spec = match &cfg.model {
        Some(spec) => spec.clone(),
        None => default_concurrence_model()?,
    };
    let layout = &spec.layout;
    let delta = detuning(&spec)?;
    let c = calibrate_convention(&dynamics::calibration_proxy(&spec)?)?.c;
    let p = RabiParams::new(spec.gamma_x.clone(), delta, c);
    let times = cfg.grid.times(p.omega);
    let evolver = dynamics::evolver_for(&build_chain_star(&spec)?, layout.site_count())?;
    let states = evolver.evolve(&initial_state(layout), &times)?;
    let numeric = EvolutionTrace::from_states(layout, &times, &states)?;
    let analytic = EvolutionTrace::analytic(&p, &times);
    let mut pairs = Vec::new();
    let mut files = Vec::new();
    let n = spec.chain_count();
    for i in 0..n {
        for j in i + 1..n {
            let report: ConcurrenceReport = chain_pair_concurrence(&numeric, i, j)?;
            let closed = chain_pair_concurrence(&analytic, i, j)?;
            let deviation = report.values.iter().zip(&closed.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            pairs.push(ConcurrencePair {
                chains: (i, j),
                max_concurrence: report.max(),
                max_deviation_from_closed_form: deviation,
            });
            files.push((format!("concurrence_{i}_{j}.csv"), report.to_csv()));
        }
    }
    let peak = dynamics::evolver_for(&build_chain_star(&spec)?, layout.site_count())?
        .advance(&initial_state(layout), p.peak_time())?;
    let spin_pairs = max_spin_pair_concurrence(layout, &peak)?;
    let passed = spin_pairs < SPIN_PAIR_TOL
        && pairs.iter().all(|p| p.max_concurrence <= 1.0 && p.max_deviation_from_closed_form <= MAPPING_TOL);
    let report = ConcurrenceRunReport {
        model: spec.clone(),
        calibration: c,
        samples: times.len(),
        pairs,
        max_spin_pair_concurrence_at_peak: spin_pairs,
        passed,
    };
    Ok(RunOutput::new(ExperimentKind::Concurrence, passed, &report, files))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kinds_round_trip_by_name() {
        for k in ExperimentKind::ALL {
            assert_eq!(k.name().parse::<ExperimentKind>().unwrap(), k);
        }
        assert!("figure3".parse::<ExperimentKind>().is_err());
    }

    #[test]
    fn config_defaults_and_rejections() {
        let cfg = ExperimentConfig::from_json("{}").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        assert!(ExperimentConfig::from_json(r#"{"grid":{"intervals":0}}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"colour":"blue"}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"ratios":[]}"#).is_err());
        let cfg = ExperimentConfig::from_json(r#"{"kind":"ghz","chains":4,"grid":{"intervals":8}}"#).unwrap();
        assert_eq!(cfg.kind, Some(ExperimentKind::Ghz));
        assert_eq!(cfg.grid, TimeGrid { intervals: 8, periods: 1.0 });
    }

    #[test]
    fn figure2a_default() {
        let out = run_figure2a(&ExperimentConfig::default()).unwrap();
        assert!(out.passed, "{}", out.report);
        let csv = &out.files[0].1;
        let mut rows = csv.lines();
        assert_eq!(rows.next(), Some("omega_t_over_pi,abs_alpha_sq,abs_beta_sq"));
        let first: Vec<f64> = rows.next().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(first, vec![0.0, 1.0, 0.0]);
        for row in csv.lines().skip(1) {
            let v: Vec<f64> = row.split(',').map(|x| x.parse().unwrap()).collect();
            assert!((v[1] + 9.0 * v[2] - 1.0).abs() < 1e-12);
        }
        assert_eq!(csv.lines().count(), DEFAULT_INTERVALS + 2);
    }

    #[test]
    fn figure2a_is_byte_stable() {
        let cfg = ExperimentConfig::default();
        assert_eq!(run_figure2a(&cfg).unwrap(), run_figure2a(&cfg).unwrap());
    }

    #[test]
    fn random_fixture_is_seeded() {
        let l = SpinLayout::uniform(2, 3).unwrap();
        assert_eq!(random_xyz_spec(l.clone(), 5).unwrap(), random_xyz_spec(l.clone(), 5).unwrap());
        assert_ne!(random_xyz_spec(l.clone(), 5).unwrap(), random_xyz_spec(l, 6).unwrap());
    }

    #[test]
    fn mapping_of_zero_couplings_passes() {
        let spec = ModelSpec::empty(Family::XYZ, SpinLayout::uniform(2, 3).unwrap());
        let r = verify_mapping(&spec).unwrap();
        assert!(r.passed);
        assert_eq!(r.max_spectral_deviation, 0.0);
    }

    #[test]
    fn xy_mapping_needs_the_sign() {
        let spec = ModelSpec {
            omega_a: 0.4,
            gamma_x: vec![0.7, -0.3],
            gamma_y: vec![0.2, 0.9],
            chain_field: vec![0.1, -0.5],
            ..ModelSpec::empty(Family::XY, SpinLayout::uniform(2, 3).unwrap())
        };
        assert!(verify_mapping(&spec).unwrap().passed);
        // dropping the sign of the reduced σʸ coupling breaks the restriction
        let layout = &spec.layout;
        let mut eff = sector_effective_model(&spec, &SectorLabel::all_plus(layout)).unwrap();
        eff.g_y.iter_mut().for_each(|g| *g = -*g);
        let wrong = materialize(&build_standard_star(&eff), 3).unwrap();
        let right = sector_effective_model(&spec, &SectorLabel::all_plus(layout)).unwrap();
        let right = materialize(&build_standard_star(&right), 3).unwrap();
        assert!(wrong.max_deviation(&right) > 0.1);
        assert!(restriction_deviation(&spec).unwrap() < 1e-12);
    }

    #[test]
    fn mapping_refuses_large_registers() {
        let spec = ModelSpec::xx(SpinLayout::uniform(3, 5).unwrap(), 0.0, vec![1.0; 3]).unwrap();
        assert!(matches!(verify_mapping(&spec), Err(Error::DimensionTooLarge { .. })));
    }

    #[test]
    fn resonant_variant_sets_fields() {
        let base = ModelSpec::xx(SpinLayout::uniform(2, 5).unwrap(), 0.0, vec![1.0; 2]).unwrap();
        let v = resonant_variant(&base, 0.5).unwrap();
        assert_eq!(v.chain_field, vec![0.1, 0.1]);
        assert!(detuning(&v).unwrap().abs() < 1e-15);
    }

    #[test]
    fn strict_mode_refuses_detuned_runs() {
        let detuned = ModelSpec::xx(SpinLayout::uniform(2, 1).unwrap(), 0.5, vec![1.0; 2]).unwrap();
        let cfg = ExperimentConfig { model: Some(detuned.clone()), strict: true, ..Default::default() };
        assert!(matches!(run_ghz(&cfg), Err(Error::NotResonant(_))));
        let lax = ExperimentConfig { model: Some(detuned), ..Default::default() };
        assert!(!run_ghz(&lax).unwrap().passed);
    }
}
