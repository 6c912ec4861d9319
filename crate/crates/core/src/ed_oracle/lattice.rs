//! Ordered-sector lattice and sparse Hamiltonian assembly.

use rayon::prelude::*;

use super::{Boundary, OracleProblem, Statistics};
use crate::error::{Error, Result};

/// Upper bound on stored nonzeros for a single operator.
pub const MAX_NONZEROS: usize = 20_000_000;

/// Compressed sparse row matrix.
#[derive(Debug, Clone)]
pub struct Csr {
    pub dim: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<u32>,
    pub vals: Vec<f64>,
}

impl Csr {
    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// `y = A x`, parallel over rows; every row is summed in a fixed order.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.par_iter_mut().enumerate().for_each(|(r, out)| {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k] as usize];
            }
            *out = acc;
        });
    }

    /// `max_i sum_j |a_ij|`, an upper bound on the spectral radius.
    pub fn gershgorin_bound(&self) -> f64 {
        (0..self.dim)
            .map(|r| {
                self.vals[self.row_ptr[r]..self.row_ptr[r + 1]]
                    .iter()
                    .map(|v| v.abs())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }
}

/// Grid geometry for one resolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub boundary: Boundary,
    pub points: usize,
    pub spacing: f64,
}

impl Grid {
    pub fn new(boundary: Boundary, length: f64, points: usize) -> Self {
        let spacing = match boundary {
            Boundary::Dirichlet => length / (points as f64 + 1.0),
            Boundary::Neumann => length / points as f64,
        };
        Grid {
            boundary,
            points,
            spacing,
        }
    }

    /// Physical coordinate of the 0-based site index.
    pub fn position(&self, k: usize) -> f64 {
        match self.boundary {
            Boundary::Dirichlet => (k as f64 + 1.0) * self.spacing,
            Boundary::Neumann => (k as f64 + 0.5) * self.spacing,
        }
    }
}

/// Sorted configurations of the symmetry sector together with the operator.
#[derive(Debug, Clone)]
pub struct Lattice {
    pub n: usize,
    pub grid: Grid,
    pub states: Vec<[u32; 3]>,
    index: Vec<u32>,
    /// `sqrt` of the number of coordinate permutations of each state.
    pub sqrt_mult: Vec<f64>,
}

const ABSENT: u32 = u32::MAX;

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

impl Lattice {
    fn flat(&self, t: &[u32; 3]) -> usize {
        let m = self.grid.points;
        let mut idx = 0usize;
        for &k in &t[..self.n] {
            idx = idx * m + k as usize;
        }
        idx
    }

    /// Row index of a sorted tuple, if it belongs to the sector.
    pub fn lookup(&self, t: &[u32; 3]) -> Option<usize> {
        let v = self.index[self.flat(t)];
        (v != ABSENT).then_some(v as usize)
    }

    /// Enumerates admissible sorted tuples.
    pub fn build(problem: &OracleProblem, grid: Grid) -> Result<Lattice> {
        let n = problem.n;
        let m = grid.points;
        let full = m.checked_pow(n as u32).filter(|f| *f < u32::MAX as usize);
        let full = full.ok_or_else(|| {
            Error::InvalidParameter(format!("grid of {m}^{n} sites is too large"))
        })?;
        let excluded = excluded_offsets(problem, grid);
        let strict = problem.statistics == Statistics::Fermi;

        let mut states = Vec::new();
        let mut tuple = [0u32; 3];
        enumerate(n, m as u32, strict, 0, 0, &mut tuple, &mut |t| {
            let blocked = (0..n).any(|i| (i + 1..n).any(|j| excluded[(t[j] - t[i]) as usize]));
            if !blocked {
                states.push(*t);
            }
        });
        if states.is_empty() {
            return Err(Error::InvalidParameter(
                "no admissible configurations on this grid".into(),
            ));
        }
        let mut lattice = Lattice {
            n,
            grid,
            states,
            index: vec![ABSENT; full],
            sqrt_mult: Vec::new(),
        };
        for (r, t) in lattice.states.iter().enumerate() {
            let f = lattice.flat(t);
            lattice.index[f] = r as u32;
        }
        lattice.sqrt_mult = lattice
            .states
            .iter()
            .map(|t| {
                if strict {
                    1.0
                } else {
                    let mut denom = 1.0;
                    let mut run = 1;
                    for i in 1..n {
                        if t[i] == t[i - 1] {
                            run += 1;
                        } else {
                            denom *= factorial(run);
                            run = 1;
                        }
                    }
                    denom *= factorial(run);
                    (factorial(n) / denom).sqrt()
                }
            })
            .collect();
        Ok(lattice)
    }

    /// Assembles the symmetrized ordered-sector Hamiltonian.
    pub fn hamiltonian(&self, problem: &OracleProblem) -> Result<Csr> {
        let n = self.n;
        let m = self.grid.points as i64;
        let h = self.grid.spacing;
        let hop = 1.0 / (h * h);
        let pair = pair_weights(problem, self.grid);
        let strict = problem.statistics == Statistics::Fermi;

        let rows: Vec<Vec<(u32, f64)>> = self
            .states
            .par_iter()
            .enumerate()
            .map(|(r, t)| {
                let mut diag = 2.0 * n as f64 * hop;
                for i in 0..n {
                    for j in (i + 1)..n {
                        diag += pair[(t[j] - t[i]) as usize];
                    }
                }
                let mut entries: Vec<(u32, f64)> = Vec::with_capacity(2 * n + 1);
                for i in 0..n {
                    for step in [-1i64, 1] {
                        let k = t[i] as i64 + step;
                        if k < 0 || k >= m {
                            if self.grid.boundary == Boundary::Neumann {
                                diag -= hop;
                            }
                            continue;
                        }
                        let mut s = *t;
                        s[i] = k as u32;
                        s[..n].sort_unstable();
                        if strict && (1..n).any(|q| s[q] == s[q - 1]) {
                            continue;
                        }
                        if let Some(c) = self.lookup(&s) {
                            let w = -hop * self.sqrt_mult[r] / self.sqrt_mult[c];
                            entries.push((c as u32, w));
                        }
                    }
                }
                entries.push((r as u32, diag));
                entries.sort_by_key(|e| e.0);
                let mut merged: Vec<(u32, f64)> = Vec::with_capacity(entries.len());
                for (c, v) in entries {
                    match merged.last_mut() {
                        Some(last) if last.0 == c => last.1 += v,
                        _ => merged.push((c, v)),
                    }
                }
                merged
            })
            .collect();

        let nnz: usize = rows.iter().map(Vec::len).sum();
        if nnz > MAX_NONZEROS {
            return Err(Error::InvalidParameter(format!(
                "operator would hold {nnz} nonzeros, above the limit of {MAX_NONZEROS}"
            )));
        }
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        let mut cols = Vec::with_capacity(nnz);
        let mut vals = Vec::with_capacity(nnz);
        row_ptr.push(0);
        for row in rows {
            for (c, v) in row {
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        Ok(Csr {
            dim: self.states.len(),
            row_ptr,
            cols,
            vals,
        })
    }

    /// Symmetric wave function `psi` (not the weighted vector) at physical
    /// positions, by multilinear interpolation of a stored eigenvector.
    pub fn interpolate(&self, phi: &[f64], x: &[f64]) -> f64 {
        let n = self.n;
        let g = self.grid;
        let mut lo = [0i64; 3];
        let mut frac = [0.0; 3];
        for i in 0..n {
            let u = match g.boundary {
                Boundary::Dirichlet => x[i] / g.spacing - 1.0,
                Boundary::Neumann => (x[i] / g.spacing - 0.5).clamp(0.0, (g.points - 1) as f64),
            };
            let f = u.floor();
            lo[i] = f as i64;
            frac[i] = u - f;
        }
        let mut total = 0.0;
        for corner in 0..(1usize << n) {
            let mut weight = 1.0;
            let mut t = [0u32; 3];
            let mut inside = true;
            for i in 0..n {
                let up = (corner >> i) & 1 == 1;
                let k = lo[i] + up as i64;
                weight *= if up { frac[i] } else { 1.0 - frac[i] };
                if k < 0 || k >= g.points as i64 {
                    inside = false;
                } else {
                    t[i] = k as u32;
                }
            }
            if !inside || weight == 0.0 {
                continue;
            }
            t[..n].sort_unstable();
            if let Some(r) = self.lookup(&t) {
                total += weight * phi[r] / self.sqrt_mult[r];
            }
        }
        total
    }
}

fn enumerate(
    n: usize,
    m: u32,
    strict: bool,
    depth: usize,
    min: u32,
    tuple: &mut [u32; 3],
    visit: &mut dyn FnMut(&[u32; 3]),
) {
    if depth == n {
        visit(tuple);
        return;
    }
    for k in min..m {
        tuple[depth] = k;
        enumerate(
            n,
            m,
            strict,
            depth + 1,
            if strict { k + 1 } else { k },
            tuple,
            visit,
        );
    }
}

/// `excluded[d]` is true when a pair separated by `d` sites sits inside a
/// hard-core band.
fn excluded_offsets(problem: &OracleProblem, grid: Grid) -> Vec<bool> {
    let h = grid.spacing;
    // Tolerance so commensurate band edges land on the intended site.
    let eps = 1e-9 * h;
    (0..grid.points)
        .map(|d| {
            let r = d as f64 * h;
            problem
                .potential
                .hard_core_bands()
                .any(|(a, b)| r >= a - eps && r <= b + eps)
        })
        .collect()
}

/// Diagonal interaction weight as a function of the site separation.
fn pair_weights(problem: &OracleProblem, grid: Grid) -> Vec<f64> {
    let h = grid.spacing;
    let p = &problem.potential;
    let mut w: Vec<f64> = (0..grid.points)
        .map(|d| p.regular_value(d as f64 * h))
        .collect();
    for (x0, strength) in p.spikes() {
        let u = x0 / h;
        let base = u.floor();
        let theta = u - base;
        let d = base as usize;
        // In ordered coordinates only one of the two spikes at +-x0 is met.
        let weight = strength / h;
        if theta < 1e-12 {
            if d < w.len() {
                w[d] += weight;
            }
        } else {
            if d < w.len() {
                w[d] += (1.0 - theta) * weight;
            }
            if d + 1 < w.len() {
                w[d + 1] += theta * weight;
            }
        }
    }
    w
}
