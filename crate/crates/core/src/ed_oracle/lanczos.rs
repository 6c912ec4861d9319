//! Thick-restart Lanczos for the lowest eigenpair of a symmetric operator.
//!
//! Every new Krylov vector is orthogonalized twice against the whole basis,
//! and the projected matrix is filled from those Gram–Schmidt coefficients,
//! so no tridiagonal bookkeeping survives a restart.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use super::lattice::Csr;
use crate::error::{Error, Result};
use crate::quadrature::pairwise_sum;

const CHUNK: usize = 4096;

/// Dot product with a fixed chunking and reduction order, so the result is
/// independent of the thread count.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    let partial: Vec<f64> = a
        .par_chunks(CHUNK)
        .zip(b.par_chunks(CHUNK))
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p * q).sum())
        .collect();
    pairwise_sum(&partial)
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.par_iter_mut()
        .zip(x.par_iter())
        .for_each(|(yi, xi)| *yi += alpha * xi);
}

fn scale(alpha: f64, x: &mut [f64]) {
    x.par_iter_mut().for_each(|v| *v *= alpha);
}

#[derive(Debug, Clone, Copy)]
pub struct LanczosOptions {
    /// Maximum basis size before a restart.
    pub basis: usize,
    /// Ritz vectors retained at a restart.
    pub keep: usize,
    /// Convergence threshold on `||A u - theta u|| / max(1, |theta|)`.
    pub tolerance: f64,
    pub max_matvecs: usize,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions {
            basis: 40,
            keep: 12,
            tolerance: 1e-9,
            max_matvecs: 200_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub value: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
    pub matvecs: usize,
    /// The next two Ritz values of the final basis (degeneracy diagnostics).
    pub next_values: Vec<f64>,
}

/// Lowest eigenpair of `a`, starting from `start`.
pub fn lowest_eigenpair(a: &Csr, start: &[f64], opts: LanczosOptions) -> Result<Eigenpair> {
    let n = a.dim;
    assert_eq!(start.len(), n);
    let norm = dot(start, start).sqrt();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::Internal("Lanczos start vector is zero".into()));
    }
    if n == 1 {
        let mut y = vec![0.0];
        a.apply(&[1.0], &mut y);
        return Ok(Eigenpair {
            value: y[0],
            vector: vec![1.0],
            residual: 0.0,
            matvecs: 1,
            next_values: Vec::new(),
        });
    }
    let basis = opts.basis.min(n).max(2);
    let keep = opts.keep.min(basis - 1).max(1);
    let spectral_scale = a.gershgorin_bound().max(1.0);

    let mut v: Vec<Vec<f64>> = Vec::with_capacity(basis + 1);
    let mut first = start.to_vec();
    scale(1.0 / norm, &mut first);
    v.push(first);
    let mut hmat = DMatrix::<f64>::zeros(basis, basis);
    let mut matvecs = 0usize;
    let mut w = vec![0.0; n];
    let mut last_residual;

    loop {
        // Extend the basis to full size.
        let mut j = v.len() - 1;
        let mut breakdown = false;
        loop {
            a.apply(&v[j], &mut w);
            matvecs += 1;
            let mut coeffs = vec![0.0; j + 1];
            for _pass in 0..2 {
                for (i, vi) in v.iter().enumerate().take(j + 1) {
                    let c = dot(vi, &w);
                    coeffs[i] += c;
                    axpy(-c, vi, &mut w);
                }
            }
            for (i, c) in coeffs.iter().enumerate() {
                hmat[(i, j)] = *c;
                hmat[(j, i)] = *c;
            }
            let beta = dot(&w, &w).sqrt();
            if beta <= 1e-14 * spectral_scale {
                breakdown = true;
                break;
            }
            if j + 1 == basis {
                break;
            }
            let mut next = w.clone();
            scale(1.0 / beta, &mut next);
            v.push(next);
            j += 1;
        }

        let size = j + 1;
        let sub = hmat.view((0, 0), (size, size)).into_owned();
        let eig = SymmetricEigen::new(sub);
        let mut order: Vec<usize> = (0..size).collect();
        order.sort_by(|&p, &q| eig.eigenvalues[p].partial_cmp(&eig.eigenvalues[q]).unwrap());
        let lowest = order[0];
        let theta = eig.eigenvalues[lowest];
        let beta = if breakdown { 0.0 } else { dot(&w, &w).sqrt() };
        let residual = beta * eig.eigenvectors[(size - 1, lowest)].abs();
        last_residual = residual;

        let ritz = |col: usize| -> Vec<f64> {
            let mut u = vec![0.0; n];
            for (i, vi) in v.iter().enumerate().take(size) {
                axpy(eig.eigenvectors[(i, col)], vi, &mut u);
            }
            u
        };

        if residual <= opts.tolerance * theta.abs().max(1.0) || breakdown {
            let vector = ritz(lowest);
            return Ok(Eigenpair {
                value: theta,
                vector,
                residual,
                matvecs,
                next_values: order
                    .iter()
                    .skip(1)
                    .take(2)
                    .map(|&k| eig.eigenvalues[k])
                    .collect(),
            });
        }
        if matvecs >= opts.max_matvecs {
            break;
        }

        // Thick restart: keep the lowest Ritz vectors plus the residual direction.
        let kept: Vec<Vec<f64>> = order.iter().take(keep).map(|&col| ritz(col)).collect();
        hmat.fill(0.0);
        for (i, &col) in order.iter().take(keep).enumerate() {
            hmat[(i, i)] = eig.eigenvalues[col];
        }
        let mut next = w.clone();
        scale(1.0 / beta, &mut next);
        v = kept;
        v.push(next);
    }
    Err(Error::Convergence {
        iterations: matvecs,
        residual: last_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian(n: usize) -> Csr {
        let mut row_ptr = vec![0];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for i in 0..n {
            if i > 0 {
                cols.push((i - 1) as u32);
                vals.push(-1.0);
            }
            cols.push(i as u32);
            vals.push(2.0);
            if i + 1 < n {
                cols.push((i + 1) as u32);
                vals.push(-1.0);
            }
            row_ptr.push(cols.len());
        }
        Csr {
            dim: n,
            row_ptr,
            cols,
            vals,
        }
    }

    #[test]
    fn finds_lowest_laplacian_mode() {
        let n = 300;
        let a = laplacian(n);
        let start: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.1 * ((i * 7919) % 13) as f64)
            .collect();
        let pair = lowest_eigenpair(&a, &start, LanczosOptions::default()).unwrap();
        let exact = 2.0 - 2.0 * (std::f64::consts::PI / (n as f64 + 1.0)).cos();
        assert!(
            (pair.value - exact).abs() < 1e-12,
            "{} vs {exact}",
            pair.value
        );
    }

    #[test]
    fn reports_non_convergence() {
        let a = laplacian(2000);
        let start = vec![1.0; 2000];
        let opts = LanczosOptions {
            max_matvecs: 50,
            ..LanczosOptions::default()
        };
        assert!(matches!(
            lowest_eigenpair(&a, &start, opts),
            Err(Error::Convergence { .. })
        ));
    }
}
