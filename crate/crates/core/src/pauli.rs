//! Pauli strings, state vectors and the dense/matrix-free kernels that act
//! on them.
//!
//! Basis convention: a register of `S` sites is indexed by an `S`-bit integer
//! in which site 0 (the ancilla) is the most significant bit, and bit value
//! 0 is spin-up (`σᶻ = +1`), bit value 1 is spin-down (`σᶻ = −1`).

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Mul;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Largest register that may be materialized as a dense matrix.
pub const DEFAULT_DENSE_SITES: usize = 12;
/// Largest number of sites kept by a partial trace.
pub const DEFAULT_KEPT_SITES: usize = 10;

const I: C64 = C64::new(0.0, 1.0);

/// Bit mask of `site` in a register of `site_count` sites.
#[inline]
pub fn site_bit(site_count: usize, site: usize) -> usize {
    1usize << (site_count - 1 - site)
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    /// Single-site product `σᵃ σᵇ = phase · σᶜ`; `None` stands for the identity.
    pub fn product(self, other: Axis) -> (C64, Option<Axis>) {
        use Axis::*;
        match (self, other) {
            (a, b) if a == b => (C64::new(1.0, 0.0), None),
            (X, Y) => (I, Some(Z)),
            (Y, X) => (-I, Some(Z)),
            (Y, Z) => (I, Some(X)),
            (Z, Y) => (-I, Some(X)),
            (Z, X) => (I, Some(Y)),
            (X, Z) => (-I, Some(Y)),
            _ => unreachable!(),
        }
    }

    pub fn matrix(self) -> [[C64; 2]; 2] {
        let o = C64::new(0.0, 0.0);
        let l = C64::new(1.0, 0.0);
        match self {
            Axis::X => [[o, l], [l, o]],
            Axis::Y => [[o, -I], [I, o]],
            Axis::Z => [[l, o], [o, -l]],
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Axis::X => "X",
            Axis::Y => "Y",
            Axis::Z => "Z",
        };
        f.write_str(s)
    }
}

/// A complex-weighted tensor product of single-site Pauli operators.
///
/// Factors are kept sorted by site with no repeated sites; the identity is the
/// empty factor list.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliString {
    coefficient: C64,
    factors: Vec<(usize, Axis)>,
}

impl PauliString {
    pub fn new(coefficient: C64, factors: impl IntoIterator<Item = (usize, Axis)>) -> Result<Self> {
        let mut factors: Vec<(usize, Axis)> = factors.into_iter().collect();
        factors.sort_by_key(|&(s, _)| s);
        for w in factors.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::DuplicateSite(w[0].0));
            }
        }
        Ok(Self { coefficient, factors })
    }

    pub fn identity(coefficient: C64) -> Self {
        Self { coefficient, factors: Vec::new() }
    }

    pub fn single(coefficient: C64, site: usize, axis: Axis) -> Self {
        Self { coefficient, factors: vec![(site, axis)] }
    }

    /// The same axis on every listed site.
    pub fn uniform(coefficient: C64, sites: impl IntoIterator<Item = usize>, axis: Axis) -> Result<Self> {
        Self::new(coefficient, sites.into_iter().map(|s| (s, axis)))
    }

    pub fn real(coefficient: f64, factors: impl IntoIterator<Item = (usize, Axis)>) -> Result<Self> {
        Self::new(C64::new(coefficient, 0.0), factors)
    }

    pub fn coefficient(&self) -> C64 {
        self.coefficient
    }

    pub fn factors(&self) -> &[(usize, Axis)] {
        &self.factors
    }

    pub fn weight(&self) -> usize {
        self.factors.len()
    }

    pub fn is_identity(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn axis_at(&self, site: usize) -> Option<Axis> {
        self.factors.binary_search_by_key(&site, |&(s, _)| s).ok().map(|k| self.factors[k].1)
    }

    pub fn max_site(&self) -> Option<usize> {
        self.factors.last().map(|&(s, _)| s)
    }

    pub fn scaled(&self, by: C64) -> Self {
        Self { coefficient: self.coefficient * by, factors: self.factors.clone() }
    }

    pub fn with_coefficient(&self, coefficient: C64) -> Self {
        Self { coefficient, factors: self.factors.clone() }
    }

    /// True when both strings carry the same operator part, ignoring weights.
    pub fn same_operator(&self, other: &PauliString) -> bool {
        self.factors == other.factors
    }

    /// Two strings commute iff they anticommute on an even number of sites.
    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let (mut i, mut j, mut clashes) = (0, 0, 0usize);
        while i < self.factors.len() && j < other.factors.len() {
            let (sa, aa) = self.factors[i];
            let (sb, ab) = other.factors[j];
            if sa < sb {
                i += 1;
            } else if sb < sa {
                j += 1;
            } else {
                if aa != ab {
                    clashes += 1;
                }
                i += 1;
                j += 1;
            }
        }
        clashes % 2 == 0
    }

    /// Operator product with the phase folded into the coefficient.
    pub fn product(&self, other: &PauliString) -> PauliString {
        let mut coefficient = self.coefficient * other.coefficient;
        let mut factors = Vec::with_capacity(self.factors.len() + other.factors.len());
        let (mut i, mut j) = (0, 0);
        while i < self.factors.len() || j < other.factors.len() {
            let a = self.factors.get(i).copied();
            let b = other.factors.get(j).copied();
            match (a, b) {
                (Some((sa, aa)), Some((sb, ab))) if sa == sb => {
                    let (phase, axis) = aa.product(ab);
                    coefficient *= phase;
                    if let Some(axis) = axis {
                        factors.push((sa, axis));
                    }
                    i += 1;
                    j += 1;
                }
                (Some((sa, aa)), Some((sb, _))) if sa < sb => {
                    factors.push((sa, aa));
                    i += 1;
                }
                (Some(_), Some((sb, ab))) => {
                    factors.push((sb, ab));
                    j += 1;
                }
                (Some(f), None) => {
                    factors.push(f);
                    i += 1;
                }
                (None, Some(f)) => {
                    factors.push(f);
                    j += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        PauliString { coefficient, factors }
    }

    pub fn check_sites(&self, site_count: usize) -> Result<()> {
        match self.max_site() {
            Some(s) if s >= site_count => Err(Error::SiteOutOfRange { site: s, site_count }),
            _ => Ok(()),
        }
    }

    /// Bit-level description of the action on computational basis states.
    pub fn masks(&self, site_count: usize) -> Result<StringMasks> {
        self.check_sites(site_count)?;
        let mut flip = 0usize;
        let mut sign = 0usize;
        let mut phase = self.coefficient;
        for &(site, axis) in &self.factors {
            let bit = site_bit(site_count, site);
            match axis {
                Axis::X => flip |= bit,
                Axis::Y => {
                    flip |= bit;
                    sign |= bit;
                    phase *= I;
                }
                Axis::Z => sign |= bit,
            }
        }
        Ok(StringMasks { flip, sign, phase })
    }
}

impl Mul for &PauliString {
    type Output = PauliString;

    fn mul(self, rhs: &PauliString) -> PauliString {
        self.product(rhs)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}{:+}i)", self.coefficient.re, self.coefficient.im)?;
        if self.factors.is_empty() {
            return f.write_str(" I");
        }
        for (s, a) in &self.factors {
            write!(f, " {a}{s}")?;
        }
        Ok(())
    }
}

/// `P|b⟩ = phase · (−1)^popcount(b & sign) |b ⊕ flip⟩`.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct StringMasks {
    pub flip: usize,
    pub sign: usize,
    pub phase: C64,
}

impl StringMasks {
    #[inline]
    fn amplitude_factor(&self, b: usize) -> C64 {
        if (b & self.sign).count_ones() % 2 == 1 {
            -self.phase
        } else {
            self.phase
        }
    }
}

/// Merge strings with identical operator parts and drop exact zeros.
pub fn simplify(terms: impl IntoIterator<Item = PauliString>) -> Vec<PauliString> {
    let mut acc: BTreeMap<Vec<(usize, Axis)>, C64> = BTreeMap::new();
    for t in terms {
        *acc.entry(t.factors).or_insert(C64::new(0.0, 0.0)) += t.coefficient;
    }
    acc.into_iter()
        .filter(|(_, c)| *c != C64::new(0.0, 0.0))
        .map(|(factors, coefficient)| PauliString { coefficient, factors })
        .collect()
}

/// `[A, B] = AB − BA` for sums of strings, simplified.
pub fn commutator(a: &[PauliString], b: &[PauliString]) -> Vec<PauliString> {
    let mut out = Vec::new();
    for x in a {
        for y in b {
            if !x.commutes_with(y) {
                out.push(x.product(y).scaled(C64::new(2.0, 0.0)));
            }
        }
    }
    simplify(out)
}

/// A sum of Pauli strings compiled to bit masks for repeated matrix-free use.
#[derive(Clone, Debug)]
pub struct CompiledOperator {
    site_count: usize,
    terms: Vec<StringMasks>,
}

impl CompiledOperator {
    pub fn new(strings: &[PauliString], site_count: usize) -> Result<Self> {
        let mut grouped: BTreeMap<(usize, usize), C64> = BTreeMap::new();
        for s in strings {
            let m = s.masks(site_count)?;
            *grouped.entry((m.flip, m.sign)).or_insert(C64::new(0.0, 0.0)) += m.phase;
        }
        let terms = grouped
            .into_iter()
            .filter(|(_, p)| *p != C64::new(0.0, 0.0))
            .map(|((flip, sign), phase)| StringMasks { flip, sign, phase })
            .collect();
        Ok(Self { site_count, terms })
    }

    pub fn site_count(&self) -> usize {
        self.site_count
    }

    pub fn dim(&self) -> usize {
        1 << self.site_count
    }

    /// `dst = H · src`.
    pub fn apply_into(&self, src: &[C64], dst: &mut [C64]) {
        dst.iter_mut().for_each(|d| *d = C64::new(0.0, 0.0));
        for t in &self.terms {
            for (b, &amp) in src.iter().enumerate() {
                if amp != C64::new(0.0, 0.0) {
                    dst[b ^ t.flip] += t.amplitude_factor(b) * amp;
                }
            }
        }
    }

    pub fn apply(&self, v: &StateVector) -> Result<StateVector> {
        if v.site_count != self.site_count {
            return Err(Error::DimensionMismatch { expected: self.site_count, found: v.site_count });
        }
        let mut out = vec![C64::new(0.0, 0.0); v.amplitudes.len()];
        self.apply_into(&v.amplitudes, &mut out);
        Ok(StateVector { amplitudes: out, site_count: self.site_count })
    }

    pub fn expectation(&self, v: &StateVector) -> Result<C64> {
        Ok(v.inner(&self.apply(v)?))
    }
}

/// `ps · v` without building a matrix.
pub fn apply_string(ps: &PauliString, v: &StateVector) -> Result<StateVector> {
    let m = ps.masks(v.site_count)?;
    let mut out = vec![C64::new(0.0, 0.0); v.amplitudes.len()];
    for (b, &amp) in v.amplitudes.iter().enumerate() {
        out[b ^ m.flip] = m.amplitude_factor(b) * amp;
    }
    Ok(StateVector { amplitudes: out, site_count: v.site_count })
}

/// Dense matrix of `Σ strings` on `site_count` sites.
pub fn materialize(strings: &[PauliString], site_count: usize) -> Result<DenseOperator> {
    materialize_with_limit(strings, site_count, DEFAULT_DENSE_SITES)
}

pub fn materialize_with_limit(strings: &[PauliString], site_count: usize, limit: usize) -> Result<DenseOperator> {
    if site_count > limit {
        return Err(Error::DimensionTooLarge { sites: site_count, limit });
    }
    let dim = 1usize << site_count;
    let mut entries = DMatrix::<C64>::zeros(dim, dim);
    for s in strings {
        let m = s.masks(site_count)?;
        for b in 0..dim {
            entries[(b ^ m.flip, b)] += m.amplitude_factor(b);
        }
    }
    Ok(DenseOperator { site_count, entries })
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<C64>,
    site_count: usize,
}

impl StateVector {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        let n = amplitudes.len();
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(n));
        }
        Ok(Self { site_count: n.trailing_zeros() as usize, amplitudes })
    }

    pub fn zeros(site_count: usize) -> Self {
        Self { amplitudes: vec![C64::new(0.0, 0.0); 1 << site_count], site_count }
    }

    pub fn basis(site_count: usize, index: usize) -> Self {
        let mut v = Self::zeros(site_count);
        v.amplitudes[index] = C64::new(1.0, 0.0);
        v
    }

    /// Product state with `spin_up[s]` giving site `s`.
    pub fn product(spin_up: &[bool]) -> Self {
        let n = spin_up.len();
        let index = spin_up.iter().enumerate().filter(|(_, &up)| !up).fold(0usize, |acc, (s, _)| acc | site_bit(n, s));
        Self::basis(n, index)
    }

    pub fn site_count(&self) -> usize {
        self.site_count
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> C64 {
        self.amplitudes[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            self.amplitudes.iter_mut().for_each(|a| *a /= n);
        }
    }

    pub fn normalized(mut self) -> Self {
        self.normalize();
        self
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }

    /// `|⟨self|other⟩|`.
    pub fn fidelity(&self, other: &StateVector) -> f64 {
        self.inner(other).norm()
    }

    pub fn distance(&self, other: &StateVector) -> f64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, by: C64) -> Self {
        Self { amplitudes: self.amplitudes.iter().map(|a| a * by).collect(), site_count: self.site_count }
    }

    /// Tensor product `self ⊗ other`; `self` occupies the leading sites.
    pub fn tensor(&self, other: &StateVector) -> Self {
        let mut amplitudes = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amplitudes {
            amplitudes.extend(other.amplitudes.iter().map(|b| a * b));
        }
        Self { amplitudes, site_count: self.site_count + other.site_count }
    }

    pub fn expectation(&self, strings: &[PauliString]) -> Result<C64> {
        CompiledOperator::new(strings, self.site_count)?.expectation(self)
    }
}

/// Reduced state over a subset of sites, basis ordered by ascending site.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    sites: Vec<usize>,
    entries: DMatrix<C64>,
}

impl DensityMatrix {
    pub fn from_entries(sites: Vec<usize>, entries: DMatrix<C64>) -> Result<Self> {
        let dim = 1usize << sites.len();
        if entries.nrows() != dim || entries.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: entries.nrows() });
        }
        Ok(Self { sites, entries })
    }

    pub fn pure(v: &StateVector) -> Self {
        let d = v.dim();
        let entries = DMatrix::from_fn(d, d, |i, j| v.amplitudes[i] * v.amplitudes[j].conj());
        Self { sites: (0..v.site_count).collect(), entries }
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn trace(&self) -> C64 {
        self.entries.trace()
    }

    pub fn purity(&self) -> f64 {
        (&self.entries * &self.entries).trace().re
    }

    pub fn hermiticity_residual(&self) -> f64 {
        (&self.entries - self.entries.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigenvalues(&self.entries)
    }

    /// Checks Hermiticity, unit trace and positivity within `tol`.
    pub fn check_state(&self, tol: f64) -> Result<()> {
        let h = self.hermiticity_residual();
        if h > tol {
            return Err(Error::NotAState(format!("non-Hermitian (residual {h:e})")));
        }
        let tr = self.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > tol {
            return Err(Error::NotAState(format!("trace {tr}")));
        }
        let min = self.eigenvalues().first().copied().unwrap_or(0.0);
        if min < -tol {
            return Err(Error::NotAState(format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }
}

pub fn partial_trace(v: &StateVector, keep: &[usize]) -> Result<DensityMatrix> {
    partial_trace_with_limit(v, keep, DEFAULT_KEPT_SITES)
}

pub fn partial_trace_with_limit(v: &StateVector, keep: &[usize], limit: usize) -> Result<DensityMatrix> {
    let (keep, a) = split_matrix(v, keep, limit)?;
    let entries = &a * a.adjoint();
    Ok(DensityMatrix { sites: keep, entries })
}

/// The state reshaped into a (kept × environment) amplitude matrix `A`, so
/// that the reduced density matrix over `keep` is `A A†`. Returns the kept
/// sites in ascending order alongside `A`.
pub fn split_matrix(v: &StateVector, keep: &[usize], limit: usize) -> Result<(Vec<usize>, DMatrix<C64>)> {
    let n = v.site_count;
    let mut keep: Vec<usize> = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if keep.is_empty() || keep.len() > limit {
        return Err(Error::TooManySitesKept { kept: keep.len(), limit });
    }
    if let Some(&s) = keep.iter().find(|&&s| s >= n) {
        return Err(Error::SiteOutOfRange { site: s, site_count: n });
    }
    let k = keep.len();
    let env: Vec<usize> = (0..n).filter(|s| !keep.contains(s)).collect();
    let dk = 1usize << k;
    let de = 1usize << env.len();
    let mut a = DMatrix::<C64>::zeros(dk, de);
    for (b, &amp) in v.amplitudes.iter().enumerate() {
        let mut i = 0usize;
        for &s in &keep {
            i = (i << 1) | usize::from(b & site_bit(n, s) != 0);
        }
        let mut e = 0usize;
        for &s in &env {
            e = (e << 1) | usize::from(b & site_bit(n, s) != 0);
        }
        a[(i, e)] = amp;
    }
    Ok((keep, a))
}

#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator {
    site_count: usize,
    entries: DMatrix<C64>,
}

impl DenseOperator {
    pub fn from_entries(entries: DMatrix<C64>) -> Result<Self> {
        let d = entries.nrows();
        if d == 0 || !d.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(d));
        }
        if entries.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: entries.ncols() });
        }
        Ok(Self { site_count: d.trailing_zeros() as usize, entries })
    }

    pub fn site_count(&self) -> usize {
        self.site_count
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<C64> {
        self.entries
    }

    pub fn apply(&self, v: &StateVector) -> Result<StateVector> {
        if v.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: v.dim() });
        }
        let amplitudes =
            (0..self.dim()).map(|r| self.entries.row(r).iter().zip(&v.amplitudes).map(|(h, a)| h * a).sum()).collect();
        Ok(StateVector { amplitudes, site_count: self.site_count })
    }

    pub fn adjoint(&self) -> Self {
        Self { site_count: self.site_count, entries: self.entries.adjoint() }
    }

    pub fn is_hermitian(&self) -> bool {
        self.entries == self.entries.adjoint()
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_deviation(&self, other: &DenseOperator) -> f64 {
        (&self.entries - &other.entries).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Ascending eigenvalues of a Hermitian operator.
    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigenvalues(&self.entries)
    }
}

impl Mul for &DenseOperator {
    type Output = DenseOperator;

    fn mul(self, rhs: &DenseOperator) -> DenseOperator {
        DenseOperator { site_count: self.site_count, entries: &self.entries * &rhs.entries }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn identity_string_materializes_to_identity() {
        let m = materialize(&[PauliString::identity(c(1.0))], 1).unwrap();
        assert_eq!(m.entries(), &DMatrix::<C64>::identity(2, 2));
    }

    #[test]
    fn x_on_site_zero_uses_msb_convention() {
        let m = materialize(&[PauliString::single(c(1.0), 0, Axis::X)], 2).unwrap();
        let ones = [(0, 2), (1, 3), (2, 0), (3, 1)];
        for r in 0..4 {
            for col in 0..4 {
                let want = if ones.contains(&(r, col)) { 1.0 } else { 0.0 };
                assert_eq!(m.entries()[(r, col)], c(want));
            }
        }
    }

    #[test]
    fn xx_is_antidiagonal() {
        let ps = PauliString::uniform(c(1.0), [0, 1], Axis::X).unwrap();
        let m = materialize(&[ps], 2).unwrap();
        for r in 0..4 {
            for col in 0..4 {
                let want = if r + col == 3 { 1.0 } else { 0.0 };
                assert_eq!(m.entries()[(r, col)], c(want));
            }
        }
    }

    #[test]
    fn y_matrix_matches_textbook() {
        let m = materialize(&[PauliString::single(c(1.0), 0, Axis::Y)], 1).unwrap();
        assert_eq!(m.entries()[(0, 1)], -I);
        assert_eq!(m.entries()[(1, 0)], I);
    }

    #[test]
    fn z_on_down_flips_sign() {
        let down = StateVector::basis(1, 1);
        let out = apply_string(&PauliString::single(c(1.0), 0, Axis::Z), &down).unwrap();
        assert_eq!(out, down.scaled(c(-1.0)));
    }

    #[test]
    fn x_flips_ancilla_of_up_down() {
        let up_down = StateVector::product(&[true, false]);
        let out = apply_string(&PauliString::single(c(1.0), 0, Axis::X), &up_down).unwrap();
        assert_eq!(out, StateVector::product(&[false, false]));
    }

    #[test]
    fn duplicate_sites_rejected() {
        assert_eq!(PauliString::real(1.0, [(1, Axis::X), (1, Axis::Z)]).unwrap_err(), Error::DuplicateSite(1));
    }

    #[test]
    fn out_of_range_site_rejected() {
        let ps = PauliString::single(c(1.0), 3, Axis::X);
        assert!(matches!(materialize(std::slice::from_ref(&ps), 2), Err(Error::SiteOutOfRange { site: 3, .. })));
        assert!(matches!(apply_string(&ps, &StateVector::basis(2, 0)), Err(Error::SiteOutOfRange { .. })));
    }

    #[test]
    fn dense_limit_enforced() {
        let err = materialize(&[], DEFAULT_DENSE_SITES + 1).unwrap_err();
        assert!(matches!(err, Error::DimensionTooLarge { .. }));
    }

    #[test]
    fn products_fold_phases() {
        let x = PauliString::single(c(1.0), 2, Axis::X);
        let y = PauliString::single(c(1.0), 2, Axis::Y);
        let xy = &x * &y;
        assert_eq!(xy, PauliString::single(I, 2, Axis::Z));
        let xx = &x * &x;
        assert!(xx.is_identity());
        assert_eq!(xx.coefficient(), c(1.0));
    }

    #[test]
    fn commutation_is_syntactic() {
        let xx = PauliString::uniform(c(1.0), [0, 1], Axis::X).unwrap();
        let zz = PauliString::uniform(c(1.0), [0, 1], Axis::Z).unwrap();
        let z0 = PauliString::single(c(1.0), 0, Axis::Z);
        assert!(xx.commutes_with(&zz));
        assert!(!xx.commutes_with(&z0));
        assert!(commutator(std::slice::from_ref(&xx), &[zz]).is_empty());
        let comm = commutator(&[xx], &[z0]);
        assert_eq!(comm.len(), 1);
    }

    #[test]
    fn bell_state_reduces_to_maximally_mixed() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let bell = StateVector::new(vec![c(h), c(0.0), c(0.0), c(h)]).unwrap();
        let rho = partial_trace(&bell, &[0]).unwrap();
        let want = DMatrix::<C64>::identity(2, 2) * c(0.5);
        assert!((rho.entries() - want).iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn product_state_reduces_to_projector() {
        let v = StateVector::product(&[true, false]);
        let rho = partial_trace(&v, &[1]).unwrap();
        assert_eq!(rho.entries()[(1, 1)], c(1.0));
        assert_eq!(rho.entries()[(0, 0)], c(0.0));
        assert!((rho.purity() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn partial_trace_rejects_bad_sets() {
        let v = StateVector::basis(3, 0);
        assert!(matches!(partial_trace(&v, &[]), Err(Error::TooManySitesKept { .. })));
        assert!(matches!(partial_trace(&v, &[5]), Err(Error::SiteOutOfRange { .. })));
        assert!(matches!(partial_trace_with_limit(&v, &[0, 1], 1), Err(Error::TooManySitesKept { kept: 2, limit: 1 })));
    }

    #[test]
    fn simplify_cancels_and_merges() {
        let a = PauliString::single(c(1.5), 0, Axis::X);
        let b = PauliString::single(c(-1.5), 0, Axis::X);
        let z = PauliString::single(c(2.0), 1, Axis::Z);
        let out = simplify([a, b, z.clone(), z.clone()]);
        assert_eq!(out, vec![z.scaled(c(2.0))]);
    }
}
