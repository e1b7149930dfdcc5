//! Symmetry-based reduction of each chain to one effective qubit.
//!
//! The elementary move is the two-site transform
//! `T_ij = ½[1 + Z_i + X_j − Z_i X_j]`, which is the identity when site `i`
//! is up and flips site `j` when site `i` is down. It is Hermitian, unitary
//! and maps Pauli strings to Pauli strings, so conjugation is done exactly in
//! string form:
//!
//! ```text
//! X_i → X_i X_j    Z_i → Z_i    X_j → X_j    Z_j → Z_i Z_j
//! ```
//!
//! A chain `s_1 … s_M` is reduced by conjugating with `T(s_{M−1}, s_M)`,
//! then `T(s_{M−2}, s_{M−1})`, down to `T(s_1, s_2)`. Afterwards every chain
//! site but the first only carries `Z` factors, whose ±1 values label the
//! sector.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{EffectiveStarParams, ModelSpec, SpinLayout};
use crate::pauli::{self, site_bit, Axis, PauliString, StateVector};

pub const DEFAULT_SECTOR_CAP: u128 = 1 << 20;

/// Eigenvalues (±1) of the post-transformation `Z` on positions `2..=M_k`
/// of every chain.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct SectorLabel {
    values: Vec<Vec<i8>>,
}

impl SectorLabel {
    pub fn new(layout: &SpinLayout, values: Vec<Vec<i8>>) -> Result<Self> {
        if values.len() != layout.chain_count() {
            return Err(Error::ShapeMismatch(format!(
                "{} chains labelled, layout has {}",
                values.len(),
                layout.chain_count()
            )));
        }
        for (k, v) in values.iter().enumerate() {
            if v.len() != layout.chain_size(k) - 1 {
                return Err(Error::ShapeMismatch(format!(
                    "chain {k} needs {} values, got {}",
                    layout.chain_size(k) - 1,
                    v.len()
                )));
            }
            if v.iter().any(|&s| s != 1 && s != -1) {
                return Err(Error::ShapeMismatch(format!("chain {k} has a value other than ±1")));
            }
        }
        Ok(Self { values })
    }

    pub fn all_plus(layout: &SpinLayout) -> Self {
        Self { values: layout.chain_sizes().iter().map(|&m| vec![1; m - 1]).collect() }
    }

    pub fn chain_count(&self) -> usize {
        self.values.len()
    }

    /// Values `(σ₂, …, σ_M)` of chain `k`.
    pub fn chain(&self, k: usize) -> &[i8] {
        &self.values[k]
    }

    pub fn is_all_plus(&self) -> bool {
        self.values.iter().flatten().all(|&s| s == 1)
    }

    fn matches(&self, layout: &SpinLayout) -> bool {
        self.values.len() == layout.chain_count()
            && self.values.iter().enumerate().all(|(k, v)| v.len() == layout.chain_size(k) - 1)
    }
}

/// The controlled flip `T_ij`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TwoSiteTransform {
    pub control: usize,
    pub target: usize,
}

impl TwoSiteTransform {
    pub fn new(control: usize, target: usize) -> Result<Self> {
        if control == target {
            return Err(Error::DuplicateSite(control));
        }
        Ok(Self { control, target })
    }

    /// `½[1 + Z_i + X_j − Z_i X_j]`.
    pub fn strings(&self) -> Vec<PauliString> {
        let (i, j) = (self.control, self.target);
        let h = |x: f64| C64::new(x, 0.0);
        vec![
            PauliString::identity(h(0.5)),
            PauliString::single(h(0.5), i, Axis::Z),
            PauliString::single(h(0.5), j, Axis::X),
            PauliString::new(h(-0.5), [(i, Axis::Z), (j, Axis::X)]).expect("distinct sites"),
        ]
    }

    fn image(&self, site: usize, axis: Axis) -> PauliString {
        let one = C64::new(1.0, 0.0);
        let (i, j) = (self.control, self.target);
        let x_image = |s: usize| {
            if s == i {
                PauliString::new(one, [(i, Axis::X), (j, Axis::X)]).expect("distinct sites")
            } else {
                PauliString::single(one, s, Axis::X)
            }
        };
        let z_image = |s: usize| {
            if s == j {
                PauliString::new(one, [(i, Axis::Z), (j, Axis::Z)]).expect("distinct sites")
            } else {
                PauliString::single(one, s, Axis::Z)
            }
        };
        match axis {
            Axis::X => x_image(site),
            Axis::Z => z_image(site),
            // Y = i X Z
            Axis::Y => x_image(site).product(&z_image(site)).scaled(C64::new(0.0, 1.0)),
        }
    }

    /// `T† P T` (with `T† = T`).
    pub fn conjugate_string(&self, ps: &PauliString) -> PauliString {
        ps.factors().iter().fold(PauliString::identity(ps.coefficient()), |acc, &(site, axis)| {
            if site == self.control || site == self.target {
                acc.product(&self.image(site, axis))
            } else {
                acc.product(&PauliString::single(C64::new(1.0, 0.0), site, axis))
            }
        })
    }
}

/// String form of the two-site transform on sites `i`, `j`.
pub fn triplet_transform(i: usize, j: usize) -> Result<Vec<PauliString>> {
    Ok(TwoSiteTransform::new(i, j)?.strings())
}

/// Transform sequence reducing the chain on `sites` (in chain order) to its
/// first site. The composed unitary is `list[0] · list[1] · …`, so
/// [`conjugate`] applies `list[0]` first.
pub fn chain_transform_sites(sites: &[usize]) -> Result<Vec<TwoSiteTransform>> {
    if sites.len() < 2 {
        return Err(Error::ChainTooShort(sites.len()));
    }
    (1..sites.len()).rev().map(|p| TwoSiteTransform::new(sites[p - 1], sites[p])).collect()
}

pub fn chain_transform(layout: &SpinLayout, chain: usize) -> Result<Vec<TwoSiteTransform>> {
    if chain >= layout.chain_count() {
        return Err(Error::IndexOutOfRange { index: chain, count: layout.chain_count() });
    }
    let sites: Vec<usize> = layout.chain_sites(chain).collect();
    chain_transform_sites(&sites)
}

/// Transforms for every chain with at least two spins.
pub fn layout_transform(layout: &SpinLayout) -> Vec<TwoSiteTransform> {
    (0..layout.chain_count())
        .filter(|&k| layout.chain_size(k) >= 2)
        .flat_map(|k| chain_transform(layout, k).expect("chain has two or more sites"))
        .collect()
}

/// `T† H T` in string form; transforms are applied in list order.
pub fn conjugate(h: &[PauliString], transforms: &[TwoSiteTransform]) -> Vec<PauliString> {
    h.iter().map(|ps| transforms.iter().fold(ps.clone(), |acc, t| t.conjugate_string(&acc))).collect()
}

/// How an `M`-fold string of one axis reduces onto the chain's first site.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReductionReport {
    pub chain: Option<usize>,
    pub axis: Axis,
    pub result_axis: Axis,
    pub sign: i8,
    /// 1-based chain positions whose sector values multiply the coefficient.
    pub parity_sites: Vec<usize>,
}

impl ReductionReport {
    pub fn for_chain(mut self, chain: usize) -> Self {
        self.chain = Some(chain);
        self
    }

    /// Coefficient multiplier in a given chain sector `(σ₂, …, σ_M)`.
    pub fn factor(&self, chain_sector: &[i8]) -> f64 {
        let p: i8 = self.parity_sites.iter().map(|&s| chain_sector[s - 2]).product();
        f64::from(self.sign * p)
    }
}

pub fn reduce_chain_axis(axis: Axis, m: usize) -> Result<ReductionReport> {
    if m == 0 {
        return Err(Error::ChainTooShort(0));
    }
    let odd_sites = || (3..=m).step_by(2).collect::<Vec<_>>();
    let (sign, parity_sites) = match axis {
        Axis::X => (1, Vec::new()),
        _ if m.is_multiple_of(2) => return Err(Error::EvenMForYZ { axis, m }),
        Axis::Y => (if ((m - 1) / 2).is_multiple_of(2) { 1 } else { -1 }, odd_sites()),
        Axis::Z => (1, odd_sites()),
    };
    Ok(ReductionReport { chain: None, axis, result_axis: axis, sign, parity_sites })
}

/// Coefficient of `Z` on the first site after reducing per-spin fields
/// `ω_1 … ω_M` in chain sector `(σ₂, …, σ_M)`.
pub fn reduce_field(omegas: &[f64], sector: &[i8]) -> Result<f64> {
    if omegas.is_empty() || sector.len() + 1 != omegas.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} frequencies need {} sector values, got {}",
            omegas.len(),
            omegas.len().saturating_sub(1),
            sector.len()
        )));
    }
    let mut parity = 1.0;
    let mut total = omegas[0];
    for (w, &s) in omegas[1..].iter().zip(sector) {
        parity *= f64::from(s);
        total += parity * w;
    }
    Ok(total)
}

/// Effective star couplings and fields of `spec` inside `sector`.
pub fn sector_effective_model(spec: &ModelSpec, sector: &SectorLabel) -> Result<EffectiveStarParams> {
    spec.validate()?;
    let layout = &spec.layout;
    if !sector.matches(layout) {
        return Err(Error::ShapeMismatch("sector label does not fit the layout".into()));
    }
    let n = layout.chain_count();
    let (mut g_x, mut g_y, mut g_z, mut field) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for k in 0..n {
        let m = layout.chain_size(k);
        let s = sector.chain(k);
        for &axis in spec.family.axes() {
            let r = reduce_chain_axis(axis, m)?;
            let g = spec.gamma(axis)[k] * r.factor(s);
            match axis {
                Axis::X => g_x[k] = g,
                Axis::Y => g_y[k] = g,
                Axis::Z => g_z[k] = g,
            }
        }
        field[k] = reduce_field(&spec.field_profile(k), s)?;
    }
    Ok(EffectiveStarParams { omega_a: spec.omega_a, g_x, g_y, g_z, field, sector: sector.clone() })
}

pub fn enumerate_sectors(layout: &SpinLayout) -> Result<Vec<SectorLabel>> {
    enumerate_sectors_with_cap(layout, DEFAULT_SECTOR_CAP)
}

/// All sectors in lexicographic order over chains then positions, with +1
/// ordered before −1.
pub fn enumerate_sectors_with_cap(layout: &SpinLayout, cap: u128) -> Result<Vec<SectorLabel>> {
    let free: usize = layout.chain_sizes().iter().map(|m| m - 1).sum();
    let count: u128 = if free >= 127 { u128::MAX } else { 1u128 << free };
    if count > cap {
        return Err(Error::SectorCountTooLarge { count, cap });
    }
    let count = count as usize;
    let sectors = (0..count)
        .map(|idx| {
            let mut bit = free;
            let values = layout
                .chain_sizes()
                .iter()
                .map(|&m| {
                    (1..m)
                        .map(|_| {
                            bit -= 1;
                            if (idx >> bit) & 1 == 0 {
                                1
                            } else {
                                -1
                            }
                        })
                        .collect()
                })
                .collect();
            SectorLabel { values }
        })
        .collect();
    Ok(sectors)
}

/// Global basis index of the effective basis state `(s_a c_1 … c_N)`, with
/// each chain bit repeated over the whole chain.
pub fn effective_to_global_index(layout: &SpinLayout, effective: usize) -> usize {
    let n = layout.chain_count();
    let s = layout.site_count();
    let mut g = 0usize;
    if effective & site_bit(n + 1, 0) != 0 {
        g |= site_bit(s, SpinLayout::ANCILLA);
    }
    for k in 0..n {
        if effective & site_bit(n + 1, k + 1) != 0 {
            for site in layout.chain_sites(k) {
                g |= site_bit(s, site);
            }
        }
    }
    g
}

/// Basis of the `2^(N+1)`-dimensional subspace in which every chain is
/// fully up or fully down, ordered by the effective index.
pub fn invariant_subspace_basis(layout: &SpinLayout) -> Vec<StateVector> {
    let dim = 1usize << (layout.chain_count() + 1);
    (0..dim).map(|e| StateVector::basis(layout.site_count(), effective_to_global_index(layout, e))).collect()
}

/// Lift an effective `(N+1)`-qubit state into the full register.
pub fn embed_effective(layout: &SpinLayout, effective: &StateVector) -> Result<StateVector> {
    let n1 = layout.chain_count() + 1;
    if effective.site_count() != n1 {
        return Err(Error::DimensionMismatch { expected: n1, found: effective.site_count() });
    }
    let mut full = StateVector::zeros(layout.site_count());
    for (e, &a) in effective.amplitudes().iter().enumerate() {
        full.amplitudes_mut()[effective_to_global_index(layout, e)] = a;
    }
    Ok(full)
}

/// Component of a full-register state inside the invariant subspace, as an
/// effective state, together with the norm of what lies outside.
pub fn project_effective(layout: &SpinLayout, full: &StateVector) -> Result<(StateVector, f64)> {
    if full.site_count() != layout.site_count() {
        return Err(Error::DimensionMismatch { expected: layout.site_count(), found: full.site_count() });
    }
    let n1 = layout.chain_count() + 1;
    let mut eff = StateVector::zeros(n1);
    let mut inside = 0.0;
    for e in 0..(1usize << n1) {
        let a = full.amplitude(effective_to_global_index(layout, e));
        eff.amplitudes_mut()[e] = a;
        inside += a.norm_sqr();
    }
    let leakage = (full.norm_sqr() - inside).max(0.0).sqrt();
    Ok((eff, leakage))
}

/// Largest absolute coefficient of a transformed string that acts with `X`
/// or `Y` on a chain site other than the first. Zero means the transformed
/// Hamiltonian is block-diagonal over sectors.
pub fn block_diagonality_residual(layout: &SpinLayout, transformed: &[PauliString]) -> f64 {
    pauli::simplify(transformed.iter().cloned())
        .iter()
        .filter(|ps| {
            ps.factors()
                .iter()
                .any(|&(site, axis)| axis != Axis::Z && layout.locate(site).is_some_and(|(_, pos)| pos > 0))
        })
        .map(|ps| ps.coefficient().norm())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_chain_star, Family};
    use crate::pauli::materialize;

    fn real(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn two_site_transform_is_controlled_flip() {
        let m = materialize(&triplet_transform(0, 1).unwrap(), 2).unwrap();
        let e = m.entries();
        let want = [[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 0.0, 1.0], [0.0, 0.0, 1.0, 0.0]];
        for r in 0..4 {
            for c in 0..4 {
                assert_eq!(e[(r, c)], real(want[r][c]));
            }
        }
    }

    #[test]
    fn same_site_transform_rejected() {
        assert!(triplet_transform(2, 2).is_err());
    }

    #[test]
    fn two_spin_conjugations() {
        let t = TwoSiteTransform::new(0, 1).unwrap();
        let xx = PauliString::uniform(real(1.0), [0, 1], Axis::X).unwrap();
        let yy = PauliString::uniform(real(1.0), [0, 1], Axis::Y).unwrap();
        let zz = PauliString::uniform(real(1.0), [0, 1], Axis::Z).unwrap();
        assert_eq!(t.conjugate_string(&xx), PauliString::single(real(1.0), 0, Axis::X));
        assert_eq!(t.conjugate_string(&yy), PauliString::new(real(-1.0), [(0, Axis::X), (1, Axis::Z)]).unwrap());
        assert_eq!(t.conjugate_string(&zz), PauliString::single(real(1.0), 1, Axis::Z));
    }

    #[test]
    fn string_conjugation_matches_dense() {
        let t = TwoSiteTransform::new(1, 2).unwrap();
        let tm = materialize(&t.strings(), 3).unwrap();
        for a in Axis::ALL {
            for b in Axis::ALL {
                for c in Axis::ALL {
                    let ps = PauliString::new(real(0.7), [(0, a), (1, b), (2, c)]).unwrap();
                    let dense = &(&tm * &materialize(std::slice::from_ref(&ps), 3).unwrap()) * &tm;
                    let strings = materialize(&[t.conjugate_string(&ps)], 3).unwrap();
                    assert!(dense.max_deviation(&strings) < 1e-15, "{ps}");
                }
            }
        }
    }

    #[test]
    fn chain_transform_orders() {
        let l = SpinLayout::new(vec![2, 3]).unwrap();
        assert_eq!(chain_transform(&l, 0).unwrap(), vec![TwoSiteTransform::new(1, 2).unwrap()]);
        assert_eq!(
            chain_transform(&l, 1).unwrap(),
            vec![TwoSiteTransform::new(4, 5).unwrap(), TwoSiteTransform::new(3, 4).unwrap()]
        );
        assert_eq!(chain_transform_sites(&[7]).unwrap_err(), Error::ChainTooShort(1));
    }

    #[test]
    fn three_spin_walkthrough() {
        let sites = [0, 1, 2];
        let ts = chain_transform_sites(&sites).unwrap();
        let y3 = PauliString::uniform(real(1.0), sites, Axis::Y).unwrap();
        let first = ts[0].conjugate_string(&y3);
        assert_eq!(first, PauliString::new(real(-1.0), [(0, Axis::Y), (1, Axis::X), (2, Axis::Z)]).unwrap());
        let both = conjugate(&[y3], &ts);
        assert_eq!(both, vec![PauliString::new(real(-1.0), [(0, Axis::Y), (2, Axis::Z)]).unwrap()]);
    }

    #[test]
    fn five_spin_x_string_reduces_to_first_site() {
        let sites: Vec<usize> = (0..5).collect();
        let ts = chain_transform_sites(&sites).unwrap();
        let x5 = PauliString::uniform(real(1.0), sites.iter().copied(), Axis::X).unwrap();
        let got = conjugate(std::slice::from_ref(&x5), &ts);
        assert_eq!(got, vec![PauliString::single(real(1.0), 0, Axis::X)]);
        // dense check of the same identity
        let mut t = materialize(&[PauliString::identity(real(1.0))], 5).unwrap();
        for tr in &ts {
            t = &t * &materialize(&tr.strings(), 5).unwrap();
        }
        let lhs = &(&t.adjoint() * &materialize(&[x5], 5).unwrap()) * &t;
        let rhs = materialize(&got, 5).unwrap();
        assert!(lhs.max_deviation(&rhs) < 1e-14);
    }

    #[test]
    fn axis_reduction_reports() {
        let x = reduce_chain_axis(Axis::X, 5).unwrap();
        assert_eq!((x.sign, x.parity_sites.clone()), (1, vec![]));
        let y = reduce_chain_axis(Axis::Y, 3).unwrap();
        assert_eq!((y.sign, y.parity_sites.clone()), (-1, vec![3]));
        let z = reduce_chain_axis(Axis::Z, 5).unwrap();
        assert_eq!((z.sign, z.parity_sites.clone()), (1, vec![3, 5]));
        assert!(matches!(reduce_chain_axis(Axis::Y, 4), Err(Error::EvenMForYZ { .. })));
        assert!(reduce_chain_axis(Axis::X, 4).is_ok());
    }

    #[test]
    fn field_reduction_small_chains() {
        let (w1, w2, w3) = (0.3, -1.1, 0.45);
        for s2 in [1i8, -1] {
            let two = reduce_field(&[w1, w2], &[s2]).unwrap();
            assert_eq!(two, w1 + f64::from(s2) * w2);
            for s3 in [1i8, -1] {
                let three = reduce_field(&[w1, w2, w3], &[s2, s3]).unwrap();
                assert!((three - (w1 + f64::from(s2) * w2 + f64::from(s2 * s3) * w3)).abs() < 1e-15);
            }
        }
        assert_eq!(reduce_field(&[0.25; 7], &[1; 6]).unwrap(), 7.0 * 0.25);
        assert!(reduce_field(&[1.0, 2.0], &[]).is_err());
    }

    #[test]
    fn sector_effective_model_cases() {
        let layout = SpinLayout::uniform(2, 5).unwrap();
        let spec = ModelSpec::xx(layout.clone(), 0.2, vec![0.7, 1.3]).unwrap().with_chain_field(vec![0.1; 2]).unwrap();
        let p = sector_effective_model(&spec, &SectorLabel::all_plus(&layout)).unwrap();
        assert_eq!(p.g_x, vec![0.7, 1.3]);
        assert_eq!(p.g_y, vec![0.7, 1.3]);
        assert!(p.field.iter().all(|f| (f - 0.5).abs() < 1e-15));

        let l3 = SpinLayout::uniform(1, 3).unwrap();
        let xy = ModelSpec { gamma_x: vec![0.4], gamma_y: vec![0.9], ..ModelSpec::empty(Family::XY, l3.clone()) };
        let sec = SectorLabel::new(&l3, vec![vec![1, -1]]).unwrap();
        let p = sector_effective_model(&xy, &sec).unwrap();
        assert_eq!(p.g_y, vec![0.9]);
        let plus = sector_effective_model(&xy, &SectorLabel::all_plus(&l3)).unwrap();
        assert_eq!(plus.g_y, vec![-0.9]);

        let zero = ModelSpec::empty(Family::XYZ, l3.clone()).with_chain_field(vec![0.5]).unwrap();
        let p = sector_effective_model(&zero, &sec).unwrap();
        assert!(p.g_x.iter().chain(&p.g_y).chain(&p.g_z).all(|&g| g == 0.0));
        assert_eq!(p.field, vec![reduce_field(&[0.5; 3], &[1, -1]).unwrap()]);

        let wrong = SectorLabel::all_plus(&SpinLayout::uniform(1, 5).unwrap());
        assert!(matches!(sector_effective_model(&zero, &wrong), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn sector_counts_and_order() {
        assert_eq!(enumerate_sectors(&SpinLayout::uniform(1, 3).unwrap()).unwrap().len(), 4);
        assert_eq!(enumerate_sectors(&SpinLayout::uniform(2, 3).unwrap()).unwrap().len(), 16);
        assert_eq!(enumerate_sectors(&SpinLayout::uniform(2, 5).unwrap()).unwrap().len(), 256);
        let s = enumerate_sectors(&SpinLayout::uniform(2, 2).unwrap()).unwrap();
        let flat: Vec<Vec<i8>> = s.iter().map(|l| l.values.concat()).collect();
        assert_eq!(flat, vec![vec![1, 1], vec![1, -1], vec![-1, 1], vec![-1, -1]]);
        assert!(s[0].is_all_plus());
        let big = SpinLayout::uniform(3, 8).unwrap();
        assert!(matches!(enumerate_sectors(&big), Err(Error::SectorCountTooLarge { .. })));
    }

    #[test]
    fn invariant_basis_encoding() {
        let l = SpinLayout::uniform(1, 1).unwrap();
        let b = invariant_subspace_basis(&l);
        assert_eq!(b.len(), 4);
        for (i, v) in b.iter().enumerate() {
            assert_eq!(*v, StateVector::basis(2, i));
        }
        // |↓_a, +, −⟩ for N=2, M=5: ancilla bit 1, chain 1 up, chain 2 down
        let l = SpinLayout::uniform(2, 5).unwrap();
        let g = effective_to_global_index(&l, 0b101);
        assert_eq!(g, (1 << 10) | 0b11111);
    }

    #[test]
    fn embed_and_project_roundtrip() {
        let l = SpinLayout::new(vec![3, 1]).unwrap();
        let eff = StateVector::new((0..8).map(|k| C64::new(k as f64, 1.0)).collect()).unwrap().normalized();
        let full = embed_effective(&l, &eff).unwrap();
        let (back, leak) = project_effective(&l, &full).unwrap();
        assert_eq!(back, eff);
        assert!(leak < 1e-15);
    }

    #[test]
    fn transformed_hamiltonian_is_block_diagonal() {
        let layout = SpinLayout::new(vec![3, 5]).unwrap();
        let spec = ModelSpec {
            omega_a: 0.3,
            gamma_x: vec![0.5, -0.2],
            gamma_y: vec![0.1, 0.7],
            gamma_z: vec![-0.4, 0.9],
            chain_field: vec![0.2, -0.6],
            ..ModelSpec::empty(Family::XYZ, layout.clone())
        };
        let h = build_chain_star(&spec).unwrap();
        assert!(block_diagonality_residual(&layout, &h) > 0.0);
        let ht = conjugate(&h, &layout_transform(&layout));
        assert_eq!(block_diagonality_residual(&layout, &ht), 0.0);
        for j in (1..layout.site_count()).filter(|&s| layout.locate(s).unwrap().1 > 0) {
            let zj = PauliString::single(real(1.0), j, Axis::Z);
            assert!(ht.iter().all(|t| t.commutes_with(&zj)));
        }
    }
}
