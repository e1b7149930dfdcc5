//! Lanczos approximation of `exp(−i H dt) v` with adaptive step size.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::pauli::{CompiledOperator, PauliString, StateVector};

use super::Evolver;

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct KrylovOptions {
    /// Largest Krylov subspace built per step.
    pub krylov_dim: usize,
    /// Target a-posteriori error per step.
    pub tol: f64,
    /// Step halvings allowed before giving up.
    pub max_halvings: u32,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self { krylov_dim: 30, tol: 1e-10, max_halvings: 40 }
    }
}

#[derive(Clone, Debug)]
pub struct KrylovPropagator {
    op: CompiledOperator,
    opts: KrylovOptions,
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// `exp(−i T dt) e₁` for the symmetric tridiagonal `T`.
fn tridiagonal_exp_e1(alphas: &[f64], betas: &[f64], dt: f64) -> Vec<C64> {
    let k = alphas.len();
    let t = DMatrix::from_fn(k, k, |r, c| {
        if r == c {
            alphas[r]
        } else if r + 1 == c {
            betas[r]
        } else if c + 1 == r {
            betas[c]
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(t);
    (0..k)
        .map(|r| {
            (0..k)
                .map(|e| {
                    let q = eig.eigenvectors[(r, e)] * eig.eigenvectors[(0, e)];
                    C64::from_polar(q, -eig.eigenvalues[e] * dt)
                })
                .sum()
        })
        .collect()
}

impl KrylovPropagator {
    pub fn new(h: &[PauliString], site_count: usize, opts: KrylovOptions) -> Result<Self> {
        Ok(Self { op: CompiledOperator::new(h, site_count)?, opts })
    }

    pub fn options(&self) -> KrylovOptions {
        self.opts
    }

    /// One Lanczos step; returns the propagated vector and its error estimate.
    /// The subspace grows until the estimate meets the tolerance, the
    /// iteration breaks down (exact invariant subspace) or `krylov_dim` is hit.
    fn try_step(&self, v: &[C64], dt: f64) -> (Vec<C64>, f64) {
        let beta0 = norm(v);
        if beta0 == 0.0 {
            return (v.to_vec(), 0.0);
        }
        let m = self.opts.krylov_dim.max(1);
        let mut basis: Vec<Vec<C64>> = vec![v.iter().map(|x| x / beta0).collect()];
        let mut alphas: Vec<f64> = Vec::with_capacity(m);
        let mut betas: Vec<f64> = Vec::with_capacity(m);
        let mut w = vec![C64::new(0.0, 0.0); v.len()];
        let mut y;
        let mut err;
        loop {
            let j = alphas.len();
            self.op.apply_into(&basis[j], &mut w);
            let a = dot(&basis[j], &w).re;
            for q in &basis {
                let c = dot(q, &w);
                w.iter_mut().zip(q).for_each(|(x, qi)| *x -= c * qi);
            }
            // second pass keeps the basis orthonormal to working precision
            for q in &basis {
                let c = dot(q, &w);
                w.iter_mut().zip(q).for_each(|(x, qi)| *x -= c * qi);
            }
            alphas.push(a);
            let b = norm(&w);
            y = tridiagonal_exp_e1(&alphas, &betas, dt);
            let scale = alphas.iter().fold(1.0f64, |s, x| s.max(x.abs()));
            if b <= 1e-14 * scale {
                err = 0.0;
                break;
            }
            err = b * y[j].norm() * beta0;
            if err <= self.opts.tol || alphas.len() >= m {
                break;
            }
            betas.push(b);
            basis.push(w.iter().map(|x| x / b).collect());
        }
        let mut out = vec![C64::new(0.0, 0.0); v.len()];
        for (q, yr) in basis.iter().zip(&y) {
            let s = yr * beta0;
            out.iter_mut().zip(q).for_each(|(o, qi)| *o += s * qi);
        }
        (out, err)
    }

    /// Propagate `v` by `duration` with adaptive sub-steps.
    pub fn advance_amplitudes(&self, v: &[C64], duration: f64) -> Result<Vec<C64>> {
        let mut v = v.to_vec();
        let mut remaining = duration;
        let mut dt = duration;
        let mut halvings = 0u32;
        let mut best = f64::INFINITY;
        while remaining > 0.0 {
            let step = dt.min(remaining);
            let (w, err) = self.try_step(&v, step);
            if err <= self.opts.tol {
                v = w;
                remaining = if step >= remaining { 0.0 } else { remaining - step };
                halvings = 0;
                best = f64::INFINITY;
                if err < self.opts.tol / 16.0 {
                    dt = step * 2.0;
                }
            } else {
                best = best.min(err);
                halvings += 1;
                if halvings > self.opts.max_halvings {
                    return Err(Error::NoConvergence { tol: self.opts.tol, best });
                }
                dt = step / 2.0;
            }
        }
        Ok(v)
    }
}

impl Evolver for KrylovPropagator {
    fn site_count(&self) -> usize {
        self.op.site_count()
    }

    fn advance(&self, v: &StateVector, dt: f64) -> Result<StateVector> {
        if v.site_count() != self.op.site_count() {
            return Err(Error::DimensionMismatch { expected: self.op.site_count(), found: v.site_count() });
        }
        StateVector::new(self.advance_amplitudes(v.amplitudes(), dt)?)
    }
}
