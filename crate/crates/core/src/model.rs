//! Chain-star and standard-star Hamiltonians as Pauli-string collections.
//!
//! All frequencies and couplings are angular frequencies (ħ = 1).

use std::ops::Range;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{Axis, PauliString};
use crate::reduction::SectorLabel;

/// Ancilla at site 0 followed by the chains, each occupying a contiguous
/// run of sites.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpinLayout {
    chain_sizes: Vec<usize>,
    offsets: Vec<usize>,
}

impl SpinLayout {
    pub const ANCILLA: usize = 0;

    pub fn new(chain_sizes: Vec<usize>) -> Result<Self> {
        if chain_sizes.is_empty() {
            return Err(Error::InvalidSpec("at least one chain is required".into()));
        }
        if let Some(k) = chain_sizes.iter().position(|&m| m == 0) {
            return Err(Error::InvalidSpec(format!("chain {k} is empty")));
        }
        let mut offsets = Vec::with_capacity(chain_sizes.len());
        let mut next = 1;
        for &m in &chain_sizes {
            offsets.push(next);
            next += m;
        }
        Ok(Self { chain_sizes, offsets })
    }

    /// `n` chains of `m` spins each.
    pub fn uniform(n: usize, m: usize) -> Result<Self> {
        Self::new(vec![m; n])
    }

    pub fn chain_count(&self) -> usize {
        self.chain_sizes.len()
    }

    pub fn chain_sizes(&self) -> &[usize] {
        &self.chain_sizes
    }

    pub fn chain_size(&self, chain: usize) -> usize {
        self.chain_sizes[chain]
    }

    pub fn site_count(&self) -> usize {
        1 + self.chain_sizes.iter().sum::<usize>()
    }

    /// Global site of position `position` (0-based) in chain `chain`.
    pub fn site(&self, chain: usize, position: usize) -> usize {
        debug_assert!(position < self.chain_sizes[chain]);
        self.offsets[chain] + position
    }

    pub fn chain_sites(&self, chain: usize) -> Range<usize> {
        self.offsets[chain]..self.offsets[chain] + self.chain_sizes[chain]
    }

    /// Inverse of [`SpinLayout::site`]; `None` for the ancilla.
    pub fn locate(&self, site: usize) -> Option<(usize, usize)> {
        (0..self.chain_count()).find_map(|k| {
            let r = self.chain_sites(k);
            r.contains(&site).then(|| (k, site - r.start))
        })
    }

    /// Layout with every chain collapsed to a single spin: the effective star.
    pub fn effective(&self) -> SpinLayout {
        SpinLayout::uniform(self.chain_count(), 1).expect("chain count is nonzero")
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    X,
    XY,
    XYZ,
    XX,
}

impl Family {
    pub fn axes(self) -> &'static [Axis] {
        match self {
            Family::X => &[Axis::X],
            Family::XY | Family::XX => &[Axis::X, Axis::Y],
            Family::XYZ => &[Axis::X, Axis::Y, Axis::Z],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelSpecDoc", into = "ModelSpecDoc")]
pub struct ModelSpec {
    pub family: Family,
    pub layout: SpinLayout,
    pub omega_a: f64,
    pub gamma_x: Vec<f64>,
    pub gamma_y: Vec<f64>,
    pub gamma_z: Vec<f64>,
    /// Per-spin field frequency on each chain.
    pub chain_field: Vec<f64>,
    /// Optional extra field on individual spins, `spin_fields[k][j]` for
    /// chain `k`, position `j`; added to `chain_field[k]`. Empty means none.
    pub spin_fields: Vec<Vec<f64>>,
}

/// JSON form of [`ModelSpec`]. Missing coupling and field arrays mean zeros.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelSpecDoc {
    family: Family,
    chain_sizes: Vec<usize>,
    #[serde(default)]
    omega_a: f64,
    #[serde(default)]
    gamma_x: Vec<f64>,
    #[serde(default)]
    gamma_y: Vec<f64>,
    #[serde(default)]
    gamma_z: Vec<f64>,
    #[serde(default)]
    chain_field: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    spin_fields: Vec<Vec<f64>>,
}

impl TryFrom<ModelSpecDoc> for ModelSpec {
    type Error = Error;

    fn try_from(d: ModelSpecDoc) -> Result<Self> {
        let layout = SpinLayout::new(d.chain_sizes)?;
        let n = layout.chain_count();
        let fill = |v: Vec<f64>| if v.is_empty() { vec![0.0; n] } else { v };
        let spec = ModelSpec {
            family: d.family,
            layout,
            omega_a: d.omega_a,
            gamma_x: fill(d.gamma_x),
            gamma_y: fill(d.gamma_y),
            gamma_z: fill(d.gamma_z),
            chain_field: fill(d.chain_field),
            spin_fields: d.spin_fields,
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl From<ModelSpec> for ModelSpecDoc {
    fn from(s: ModelSpec) -> Self {
        ModelSpecDoc {
            family: s.family,
            chain_sizes: s.layout.chain_sizes,
            omega_a: s.omega_a,
            gamma_x: s.gamma_x,
            gamma_y: s.gamma_y,
            gamma_z: s.gamma_z,
            chain_field: s.chain_field,
            spin_fields: s.spin_fields,
        }
    }
}

impl ModelSpec {
    /// Zero couplings and fields for `family` on `layout`.
    pub fn empty(family: Family, layout: SpinLayout) -> Self {
        let n = layout.chain_count();
        Self {
            family,
            layout,
            omega_a: 0.0,
            gamma_x: vec![0.0; n],
            gamma_y: vec![0.0; n],
            gamma_z: vec![0.0; n],
            chain_field: vec![0.0; n],
            spin_fields: Vec::new(),
        }
    }

    /// XX chain-star with per-chain couplings `gamma`.
    pub fn xx(layout: SpinLayout, omega_a: f64, gamma: Vec<f64>) -> Result<Self> {
        let spec = Self { omega_a, gamma_x: gamma.clone(), gamma_y: gamma, ..Self::empty(Family::XX, layout) };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_chain_field(mut self, chain_field: Vec<f64>) -> Result<Self> {
        self.chain_field = chain_field;
        self.validate()?;
        Ok(self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidSpec(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model spec serializes")
    }

    pub fn chain_count(&self) -> usize {
        self.layout.chain_count()
    }

    pub fn gamma(&self, axis: Axis) -> &[f64] {
        match axis {
            Axis::X => &self.gamma_x,
            Axis::Y => &self.gamma_y,
            Axis::Z => &self.gamma_z,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.layout.chain_count();
        for (name, v) in [
            ("gamma_x", &self.gamma_x),
            ("gamma_y", &self.gamma_y),
            ("gamma_z", &self.gamma_z),
            ("chain_field", &self.chain_field),
        ] {
            if v.len() != n {
                return Err(Error::InvalidSpec(format!("{name} has {} entries for {n} chains", v.len())));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidSpec(format!("{name} contains a non-finite value")));
            }
        }
        if !self.spin_fields.is_empty() {
            if self.spin_fields.len() != n {
                return Err(Error::InvalidSpec(format!(
                    "spin_fields has {} chains, layout has {n}",
                    self.spin_fields.len()
                )));
            }
            for (k, row) in self.spin_fields.iter().enumerate() {
                if row.len() != self.layout.chain_size(k) {
                    return Err(Error::InvalidSpec(format!(
                        "spin_fields[{k}] has {} entries for {} spins",
                        row.len(),
                        self.layout.chain_size(k)
                    )));
                }
                if row.iter().any(|x| !x.is_finite()) {
                    return Err(Error::InvalidSpec("spin_fields contains a non-finite value".into()));
                }
            }
        }
        if !self.omega_a.is_finite() {
            return Err(Error::InvalidSpec("omega_a is not finite".into()));
        }
        let zero = |v: &[f64]| v.iter().all(|&x| x == 0.0);
        match self.family {
            Family::X => {
                if !zero(&self.gamma_y) || !zero(&self.gamma_z) {
                    return Err(Error::InvalidSpec("X family takes only gamma_x".into()));
                }
            }
            Family::XY => {
                if !zero(&self.gamma_z) {
                    return Err(Error::InvalidSpec("XY family takes no gamma_z".into()));
                }
            }
            Family::XX => {
                if self.gamma_x != self.gamma_y || !zero(&self.gamma_z) {
                    return Err(Error::InvalidSpec("XX family needs gamma_x = gamma_y and gamma_z = 0".into()));
                }
            }
            Family::XYZ => {}
        }
        if self.family != Family::X {
            if let Some(k) = self.layout.chain_sizes().iter().position(|m| m % 2 == 0) {
                return Err(Error::InvalidSpec(format!(
                    "{:?} family needs odd chain lengths; chain {k} has {} spins",
                    self.family,
                    self.layout.chain_size(k)
                )));
            }
        }
        Ok(())
    }

    /// Total field on each spin of chain `k`.
    pub fn field_profile(&self, k: usize) -> Vec<f64> {
        let base = self.chain_field[k];
        match self.spin_fields.get(k) {
            Some(extra) => extra.iter().map(|e| base + e).collect(),
            None => vec![base; self.layout.chain_size(k)],
        }
    }

    /// The all-(+1) sector reduces without a sign flip only when every
    /// `(M_k − 1)/2` is even.
    pub fn check_sign_free(&self) -> Result<()> {
        match self.layout.chain_sizes().iter().position(|m| m % 2 == 0 || (m - 1) / 2 % 2 != 0) {
            Some(k) => Err(Error::InvalidSpec(format!(
                "chain {k} has {} spins; (M - 1)/2 must be even",
                self.layout.chain_size(k)
            ))),
            None => Ok(()),
        }
    }
}

/// Couplings and fields of the effective star obtained in one sector.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EffectiveStarParams {
    pub omega_a: f64,
    pub g_x: Vec<f64>,
    pub g_y: Vec<f64>,
    pub g_z: Vec<f64>,
    pub field: Vec<f64>,
    pub sector: SectorLabel,
}

impl EffectiveStarParams {
    pub fn chain_count(&self) -> usize {
        self.g_x.len()
    }

    pub fn coupling(&self, axis: Axis) -> &[f64] {
        match axis {
            Axis::X => &self.g_x,
            Axis::Y => &self.g_y,
            Axis::Z => &self.g_z,
        }
    }

    pub fn site_count(&self) -> usize {
        self.chain_count() + 1
    }
}

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Terms of the chain-star Hamiltonian: ancilla Zeeman term, one N-wise
/// string per chain and active axis, and per-spin chain fields.
pub fn build_chain_star(spec: &ModelSpec) -> Result<Vec<PauliString>> {
    spec.validate()?;
    let layout = &spec.layout;
    let mut terms = vec![PauliString::single(real(spec.omega_a), SpinLayout::ANCILLA, Axis::Z)];
    for k in 0..layout.chain_count() {
        for &axis in spec.family.axes() {
            let sites = std::iter::once(SpinLayout::ANCILLA).chain(layout.chain_sites(k));
            terms.push(PauliString::uniform(real(spec.gamma(axis)[k]), sites, axis)?);
        }
    }
    for k in 0..layout.chain_count() {
        let profile = spec.field_profile(k);
        if profile.iter().any(|&f| f != 0.0) {
            for (s, f) in layout.chain_sites(k).zip(profile) {
                if f != 0.0 || spec.spin_fields.is_empty() {
                    terms.push(PauliString::single(real(f), s, Axis::Z));
                }
            }
        }
    }
    Ok(terms)
}

/// Standard star on `N + 1` sites (chain qubit `k` at site `k + 1`); zero
/// couplings and fields are omitted, the ancilla term is always present.
pub fn build_standard_star(p: &EffectiveStarParams) -> Vec<PauliString> {
    let mut terms = vec![PauliString::single(real(p.omega_a), SpinLayout::ANCILLA, Axis::Z)];
    for k in 0..p.chain_count() {
        for axis in Axis::ALL {
            let g = p.coupling(axis)[k];
            if g != 0.0 {
                terms.push(PauliString::uniform(real(g), [SpinLayout::ANCILLA, k + 1], axis).expect("distinct sites"));
            }
        }
    }
    for (k, &f) in p.field.iter().enumerate() {
        if f != 0.0 {
            terms.push(PauliString::single(real(f), k + 1, Axis::Z));
        }
    }
    terms
}

/// `Δ = ω₀ − ω_a` with `ω₀` the summed field along a chain
/// (`M_k · chain_field[k]` without per-spin extras), which must agree across
/// chains.
pub fn detuning(spec: &ModelSpec) -> Result<f64> {
    let totals: Vec<f64> = (0..spec.chain_count())
        .map(|k| {
            if spec.spin_fields.is_empty() {
                spec.chain_field[k] * spec.layout.chain_size(k) as f64
            } else {
                spec.field_profile(k).iter().sum()
            }
        })
        .collect();
    let omega_0 = totals[0];
    let scale = totals.iter().fold(1.0f64, |a, t| a.max(t.abs()));
    if totals.iter().any(|t| (t - omega_0).abs() > 1e-12 * scale) {
        return Err(Error::NonUniformFields);
    }
    Ok(omega_0 - spec.omega_a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::materialize;

    #[test]
    fn layout_index_map_is_bijective() {
        let l = SpinLayout::new(vec![2, 3, 1]).unwrap();
        assert_eq!(l.site_count(), 7);
        let mut seen = [false; 7];
        seen[0] = true;
        for k in 0..3 {
            for j in 0..l.chain_size(k) {
                let s = l.site(k, j);
                assert!(!seen[s]);
                seen[s] = true;
                assert_eq!(l.locate(s), Some((k, j)));
            }
        }
        assert!(seen.iter().all(|&x| x));
        assert_eq!(l.locate(0), None);
    }

    #[test]
    fn layout_rejects_empty() {
        assert!(SpinLayout::new(vec![]).is_err());
        assert!(SpinLayout::new(vec![3, 0]).is_err());
    }

    #[test]
    fn x_family_single_spin() {
        let spec = ModelSpec {
            omega_a: 0.7,
            gamma_x: vec![0.3],
            ..ModelSpec::empty(Family::X, SpinLayout::uniform(1, 1).unwrap())
        };
        let terms = build_chain_star(&spec).unwrap();
        assert_eq!(
            terms,
            vec![PauliString::single(real(0.7), 0, Axis::Z), PauliString::uniform(real(0.3), [0, 1], Axis::X).unwrap(),]
        );
    }

    #[test]
    fn xx_term_count_and_weight() {
        let spec = ModelSpec::xx(SpinLayout::uniform(2, 5).unwrap(), 0.0, vec![1.0, 1.0]).unwrap();
        let terms = build_chain_star(&spec).unwrap();
        assert_eq!(terms.len(), 5);
        assert!(terms[1..].iter().all(|t| t.weight() == 6));
    }

    #[test]
    fn field_terms_counted_per_spin() {
        let spec = ModelSpec::xx(SpinLayout::new(vec![3, 5]).unwrap(), 1.0, vec![1.0, 0.5])
            .unwrap()
            .with_chain_field(vec![0.2, 0.0])
            .unwrap();
        assert_eq!(build_chain_star(&spec).unwrap().len(), 1 + 2 * 2 + 3);
    }

    #[test]
    fn even_chain_rejected_for_xyz() {
        let spec = ModelSpec::empty(Family::XYZ, SpinLayout::uniform(1, 4).unwrap());
        assert!(matches!(build_chain_star(&spec), Err(Error::InvalidSpec(_))));
        let x = ModelSpec::empty(Family::X, SpinLayout::uniform(1, 4).unwrap());
        assert!(build_chain_star(&x).is_ok());
    }

    #[test]
    fn xx_requires_equal_couplings() {
        let mut spec = ModelSpec::xx(SpinLayout::uniform(1, 1).unwrap(), 0.0, vec![1.0]).unwrap();
        spec.gamma_y[0] = 0.5;
        assert!(spec.validate().is_err());
    }

    #[test]
    fn sign_free_condition() {
        let ok = ModelSpec::xx(SpinLayout::new(vec![1, 5, 9]).unwrap(), 0.0, vec![1.0; 3]).unwrap();
        assert!(ok.check_sign_free().is_ok());
        let bad = ModelSpec::xx(SpinLayout::new(vec![5, 3]).unwrap(), 0.0, vec![1.0; 2]).unwrap();
        assert!(bad.check_sign_free().is_err());
    }

    #[test]
    fn standard_star_omits_zero_terms() {
        let p = EffectiveStarParams {
            omega_a: 1.0,
            g_x: vec![0.0; 3],
            g_y: vec![0.0; 3],
            g_z: vec![0.0; 3],
            field: vec![0.0; 3],
            sector: SectorLabel::all_plus(&SpinLayout::uniform(3, 1).unwrap()),
        };
        assert_eq!(build_standard_star(&p), vec![PauliString::single(real(1.0), 0, Axis::Z)]);
        let xx = EffectiveStarParams {
            g_x: vec![1.0; 9],
            g_y: vec![1.0; 9],
            g_z: vec![0.0; 9],
            field: vec![0.0; 9],
            sector: SectorLabel::all_plus(&SpinLayout::uniform(9, 1).unwrap()),
            ..p
        };
        assert_eq!(build_standard_star(&xx).len(), 19);
    }

    #[test]
    fn standard_star_with_fields_term_by_term() {
        let (wa, w0, g) = (0.4, 0.9, 0.25);
        let p = EffectiveStarParams {
            omega_a: wa,
            g_x: vec![g; 2],
            g_y: vec![g; 2],
            g_z: vec![0.0; 2],
            field: vec![w0; 2],
            sector: SectorLabel::all_plus(&SpinLayout::uniform(2, 1).unwrap()),
        };
        let got = crate::pauli::simplify(build_standard_star(&p));
        let want = crate::pauli::simplify(vec![
            PauliString::single(real(wa), 0, Axis::Z),
            PauliString::single(real(w0), 1, Axis::Z),
            PauliString::single(real(w0), 2, Axis::Z),
            PauliString::uniform(real(g), [0, 1], Axis::X).unwrap(),
            PauliString::uniform(real(g), [0, 1], Axis::Y).unwrap(),
            PauliString::uniform(real(g), [0, 2], Axis::X).unwrap(),
            PauliString::uniform(real(g), [0, 2], Axis::Y).unwrap(),
        ]);
        assert_eq!(got, want);
    }

    #[test]
    fn detuning_cases() {
        let layout = SpinLayout::uniform(2, 5).unwrap();
        let res = ModelSpec::xx(layout.clone(), 2.0, vec![1.0; 2]).unwrap().with_chain_field(vec![0.4; 2]).unwrap();
        assert_eq!(detuning(&res).unwrap(), 0.0);
        let w0 = 3.0;
        let pure =
            ModelSpec::xx(layout.clone(), 0.0, vec![1.0; 2]).unwrap().with_chain_field(vec![w0 / 5.0; 2]).unwrap();
        assert!((detuning(&pure).unwrap() - w0).abs() < 1e-15);
        let anc = ModelSpec::xx(layout.clone(), 1.5, vec![1.0; 2]).unwrap();
        assert_eq!(detuning(&anc).unwrap(), -1.5);
        let uneven = ModelSpec::xx(layout, 0.0, vec![1.0; 2]).unwrap().with_chain_field(vec![0.1, 0.2]).unwrap();
        assert_eq!(detuning(&uneven), Err(Error::NonUniformFields));
    }

    #[test]
    fn per_spin_fields_add_to_chain_field() {
        let spec = ModelSpec {
            chain_field: vec![0.5],
            spin_fields: vec![vec![0.0, -0.5, 0.25]],
            ..ModelSpec::empty(Family::X, SpinLayout::uniform(1, 3).unwrap())
        };
        spec.validate().unwrap();
        assert_eq!(spec.field_profile(0), vec![0.5, 0.0, 0.75]);
        let fields: Vec<PauliString> = build_chain_star(&spec).unwrap().into_iter().skip(2).collect();
        assert_eq!(
            fields,
            vec![PauliString::single(real(0.5), 1, Axis::Z), PauliString::single(real(0.75), 3, Axis::Z)]
        );
        assert_eq!(detuning(&spec).unwrap(), 1.25);
        let bad = ModelSpec { spin_fields: vec![vec![0.0; 2]], ..spec.clone() };
        assert!(matches!(bad.validate(), Err(Error::InvalidSpec(_))));
        let text = r#"{"family":"X","chain_sizes":[3],"spin_fields":[[0.1,0.2,0.3]]}"#;
        let parsed = ModelSpec::from_json(text).unwrap();
        assert_eq!(parsed.spin_fields, vec![vec![0.1, 0.2, 0.3]]);
        assert_eq!(ModelSpec::from_json(&parsed.to_json()).unwrap(), parsed);
    }

    #[test]
    fn chain_star_is_hermitian() {
        let spec = ModelSpec {
            omega_a: 0.3,
            gamma_x: vec![0.5, -0.2],
            gamma_y: vec![0.1, 0.7],
            gamma_z: vec![-0.4, 0.9],
            chain_field: vec![0.2, -0.6],
            ..ModelSpec::empty(Family::XYZ, SpinLayout::uniform(2, 3).unwrap())
        };
        let h = materialize(&build_chain_star(&spec).unwrap(), 7).unwrap();
        assert!(h.is_hermitian());
    }

    #[test]
    fn json_roundtrip_and_unknown_keys() {
        let text = r#"{"family":"XX","chain_sizes":[5,5],"omega_a":0.5,"gamma_x":[1,1],"gamma_y":[1,1],"gamma_z":[0,0],"chain_field":[0.1,0.1]}"#;
        let spec = ModelSpec::from_json(text).unwrap();
        assert_eq!(spec.layout.chain_sizes(), &[5, 5]);
        assert_eq!(ModelSpec::from_json(&spec.to_json()).unwrap(), spec);
        let bad = r#"{"family":"XX","chain_sizes":[5],"gamma_x":[1],"gamma_y":[1],"bogus":1}"#;
        assert!(ModelSpec::from_json(bad).is_err());
        let invalid = r#"{"family":"XY","chain_sizes":[4],"gamma_x":[1]}"#;
        assert!(ModelSpec::from_json(invalid).is_err());
    }
}
