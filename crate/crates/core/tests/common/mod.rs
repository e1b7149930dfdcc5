//! Independent oracles shared by the integration tests: dense Kronecker
//! products of literal 2×2 Pauli matrices and explicitly enumerated target
//! states. Nothing here goes through the library's bit-mask kernels.

#![allow(dead_code)]

use chainstar::model::SpinLayout;
use chainstar::pauli::{Axis, PauliString, StateVector};
use chainstar::C64;
use nalgebra::DMatrix;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn pauli_matrix(axis: Option<Axis>) -> DMatrix<C64> {
    let z = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    match axis {
        None => DMatrix::from_row_slice(2, 2, &[one, z, z, one]),
        Some(Axis::X) => DMatrix::from_row_slice(2, 2, &[z, one, one, z]),
        Some(Axis::Y) => DMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        Some(Axis::Z) => DMatrix::from_row_slice(2, 2, &[one, z, z, -one]),
    }
}

/// `coefficient · σ_{0} ⊗ σ_{1} ⊗ … ⊗ σ_{S−1}` with site 0 leftmost.
pub fn kron_string(ps: &PauliString, sites: usize) -> DMatrix<C64> {
    let mut m = DMatrix::from_element(1, 1, ps.coefficient());
    for s in 0..sites {
        m = m.kronecker(&pauli_matrix(ps.axis_at(s)));
    }
    m
}

pub fn dense_sum(terms: &[PauliString], sites: usize) -> DMatrix<C64> {
    let d = 1usize << sites;
    terms.iter().fold(DMatrix::zeros(d, d), |acc, t| acc + kron_string(t, sites))
}

pub fn dense_apply(m: &DMatrix<C64>, v: &StateVector) -> Vec<C64> {
    let x = nalgebra::DVector::from_column_slice(v.amplitudes());
    (m * x).iter().copied().collect()
}

fn is_down(index: usize, sites: usize, site: usize) -> bool {
    (index >> (sites - 1 - site)) & 1 == 1
}

/// Classify a basis index: `Some(chains_up)` when every chain is uniformly
/// polarized, listing which chains are fully up; `None` otherwise.
fn uniform_chains(layout: &SpinLayout, index: usize) -> Option<Vec<bool>> {
    let s = layout.site_count();
    (0..layout.chain_count())
        .map(|k| {
            let downs: Vec<bool> = layout.chain_sites(k).map(|site| is_down(index, s, site)).collect();
            if downs.iter().all(|&d| d) {
                Some(false)
            } else if downs.iter().all(|&d| !d) {
                Some(true)
            } else {
                None
            }
        })
        .collect()
}

/// `|↓_a⟩ ⊗ (1/√N) Σ_k |↓…↓ ↑^{M_k} ↓…↓⟩`, built by scanning the basis.
pub fn w_oracle(layout: &SpinLayout) -> StateVector {
    let s = layout.site_count();
    let n = layout.chain_count();
    let mut amps = vec![c(0.0, 0.0); 1 << s];
    for (index, a) in amps.iter_mut().enumerate() {
        if !is_down(index, s, 0) {
            continue;
        }
        if let Some(up) = uniform_chains(layout, index) {
            if up.iter().filter(|&&u| u).count() == 1 {
                *a = c(1.0 / (n as f64).sqrt(), 0.0);
            }
        }
    }
    StateVector::new(amps).unwrap()
}

/// `|↓_a⟩ ⊗ (|↑…↑⟩|↓…↓⟩ + |↓…↓⟩|↑…↑⟩)/√2` for two chains.
pub fn ghz_oracle(layout: &SpinLayout) -> StateVector {
    assert_eq!(layout.chain_count(), 2);
    w_oracle(layout)
}

/// `|⟨a|b⟩|`, computed by hand.
pub fn overlap(a: &StateVector, b: &StateVector) -> f64 {
    a.amplitudes().iter().zip(b.amplitudes()).map(|(x, y)| x.conj() * y).sum::<C64>().norm()
}
