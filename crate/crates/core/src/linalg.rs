//! Small Hermitian eigen-solvers and block detection for sparse-structured
//! dense matrices.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

/// Ascending eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Eigen-decomposition `m = V diag(λ) V†` of a Hermitian matrix.
pub fn hermitian_eigen(m: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let eig = m.clone().symmetric_eigen();
    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

/// Principal square root of a positive semi-definite Hermitian matrix;
/// eigenvalues below zero (round-off) are clamped.
pub fn psd_sqrt(m: &DMatrix<C64>) -> DMatrix<C64> {
    let (vals, vecs) = hermitian_eigen(m);
    let d = m.nrows();
    let mut scaled = vecs.clone();
    for (k, &v) in vals.iter().enumerate() {
        let s = v.max(0.0).sqrt();
        for r in 0..d {
            scaled[(r, k)] *= s;
        }
    }
    &scaled * vecs.adjoint()
}

/// Connected components of the graph whose edges are the nonzero entries of
/// `m`. Each component is returned as an ascending list of indices; the list
/// of components is ordered by smallest index.
pub fn block_components(m: &DMatrix<C64>) -> Vec<Vec<usize>> {
    let n = m.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let zero = C64::new(0.0, 0.0);
    for c in 0..n {
        for r in 0..n {
            if r != c && m[(r, c)] != zero {
                let (a, b) = (find(&mut parent, r), find(&mut parent, c));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(i);
    }
    groups.into_values().collect()
}

/// Exact propagator data for a Hermitian matrix, stored block by block.
#[derive(Clone, Debug)]
pub struct BlockEigen {
    dim: usize,
    blocks: Vec<(Vec<usize>, Vec<f64>, DMatrix<C64>)>,
}

impl BlockEigen {
    pub fn new(m: &DMatrix<C64>) -> Self {
        let blocks = block_components(m)
            .into_iter()
            .map(|idx| {
                let k = idx.len();
                let sub = DMatrix::from_fn(k, k, |r, c| m[(idx[r], idx[c])]);
                let (vals, vecs) = hermitian_eigen(&sub);
                (idx, vals, vecs)
            })
            .collect();
        Self { dim: m.nrows(), blocks }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.0.len()).collect()
    }

    /// Ascending spectrum, merged over blocks.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.blocks.iter().flat_map(|b| b.1.iter().copied()).collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// `exp(−i H t) v`.
    pub fn propagate(&self, v: &[C64], t: f64) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.dim];
        for (idx, vals, vecs) in &self.blocks {
            let k = idx.len();
            // coefficients in the eigenbasis
            let coeffs: Vec<C64> =
                (0..k).map(|e| (0..k).map(|r| vecs[(r, e)].conj() * v[idx[r]]).sum::<C64>()).collect();
            if coeffs.iter().all(|c| *c == C64::new(0.0, 0.0)) {
                continue;
            }
            let phased: Vec<C64> =
                coeffs.iter().zip(vals).map(|(c, &lam)| c * C64::from_polar(1.0, -lam * t)).collect();
            for r in 0..k {
                out[idx[r]] = (0..k).map(|e| vecs[(r, e)] * phased[e]).sum();
            }
        }
        out
    }
}
