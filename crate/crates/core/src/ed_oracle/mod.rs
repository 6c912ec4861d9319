//! Exact diagonalization of `H = -sum_i d^2/dx_i^2 + sum_{i<j} v(x_i - x_j)`
//! for up to three particles on `[0, L]`.
//!
//! Configurations are restricted to the ordered sector `x_1 <= ... <= x_N`
//! (strictly ordered for fermions). Each grid is diagonalized with Lanczos and
//! the sequence of grids, with the spacing halved each time, is extrapolated
//! to the continuum.

pub mod lanczos;
pub mod lattice;
pub mod richardson;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::Potential;
pub use lanczos::LanczosOptions;
use lattice::{Csr, Grid, Lattice};
pub use richardson::{extrapolate, Extrapolation};

/// Seed of the Lanczos start vectors.
pub const DEFAULT_SEED: u64 = 0x5EED;

/// Smallest admissible grid.
pub const MIN_POINTS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Neumann,
    Dirichlet,
}

impl std::str::FromStr for Boundary {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "neumann" => Ok(Boundary::Neumann),
            "dirichlet" => Ok(Boundary::Dirichlet),
            other => Err(Error::InvalidParameter(format!(
                "unknown boundary '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistics {
    Bose,
    Fermi,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleProblem {
    pub n: usize,
    pub length: f64,
    pub boundary: Boundary,
    pub potential: Potential,
    pub statistics: Statistics,
    /// Points per dimension on the coarsest grid.
    pub points: usize,
}

impl OracleProblem {
    pub fn new(
        n: usize,
        length: f64,
        boundary: Boundary,
        potential: Potential,
        statistics: Statistics,
        points: usize,
    ) -> Result<Self> {
        if !(1..=3).contains(&n) {
            return Err(Error::InvalidParameter(format!(
                "the oracle supports 1 to 3 particles, got {n}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "box length must be > 0, got {length}"
            )));
        }
        if points < MIN_POINTS {
            return Err(Error::InvalidParameter(format!(
                "need at least {MIN_POINTS} grid points, got {points}"
            )));
        }
        Ok(OracleProblem {
            n,
            length,
            boundary,
            potential,
            statistics,
            points,
        })
    }

    /// Points per dimension at refinement level `level` (spacing halved per level).
    pub fn points_at(&self, level: usize) -> usize {
        match self.boundary {
            Boundary::Dirichlet => (self.points + 1) * (1 << level) - 1,
            Boundary::Neumann => self.points * (1 << level),
        }
    }

    fn grid_at(&self, level: usize) -> Grid {
        Grid::new(self.boundary, self.length, self.points_at(level))
    }

    fn fallback_order(&self) -> u32 {
        let singular =
            self.potential.spikes().next().is_some() || self.potential.regular_mass() > 0.0;
        if singular {
            1
        } else {
            2
        }
    }
}

/// Operator on one grid.
#[derive(Debug, Clone)]
pub struct DiscreteHamiltonian {
    pub lattice: Lattice,
    pub matrix: Csr,
}

fn build_on(problem: &OracleProblem, grid: Grid) -> Result<DiscreteHamiltonian> {
    let range = problem.potential.range();
    if range > 0.0 && grid.spacing > range / 4.0 {
        return Err(Error::Resolution(format!(
            "spacing {} does not resolve the potential range {range} with 4 cells",
            grid.spacing
        )));
    }
    let lattice = Lattice::build(problem, grid)?;
    let matrix = lattice.hamiltonian(problem)?;
    Ok(DiscreteHamiltonian { lattice, matrix })
}

/// Finite-difference operator on the coarsest grid of the problem.
pub fn build_hamiltonian(problem: &OracleProblem) -> Result<DiscreteHamiltonian> {
    build_on(problem, problem.grid_at(0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridLevel {
    pub points: usize,
    pub spacing: f64,
    pub dimension: usize,
    pub nonzeros: usize,
    pub energy: f64,
    pub matvecs: usize,
    pub residual: f64,
    /// Next Ritz values, for degeneracy diagnostics.
    pub excited: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralResult {
    pub levels: Vec<GridLevel>,
    pub extrapolated: f64,
    pub error_estimate: f64,
    pub order: u32,
    pub observed_order: Option<f64>,
    /// Finest-grid eigenvector in the symmetrized ordered-sector basis.
    #[serde(skip)]
    pub ground_state: Vec<f64>,
}

impl SpectralResult {
    pub fn finest(&self) -> f64 {
        self.levels.last().map_or(f64::NAN, |l| l.energy)
    }
}

/// Ground energy with the default seed and Lanczos settings.
pub fn ground_energy(problem: &OracleProblem, refinements: usize) -> Result<SpectralResult> {
    ground_energy_with(
        problem,
        refinements,
        LanczosOptions::default(),
        DEFAULT_SEED,
    )
}

/// Ground energy over `refinements` grids, extrapolated to zero spacing.
///
/// The first grid starts Lanczos from a seeded pseudo-random positive
/// vector; finer grids start from the interpolated coarser eigenvector
/// plus a small seeded perturbation.
pub fn ground_energy_with(
    problem: &OracleProblem,
    refinements: usize,
    opts: LanczosOptions,
    seed: u64,
) -> Result<SpectralResult> {
    if refinements < 3 {
        return Err(Error::InvalidParameter(format!(
            "Richardson extrapolation needs at least 3 grids, got {refinements}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut levels = Vec::with_capacity(refinements);
    let mut previous: Option<(Lattice, Vec<f64>)> = None;
    for level in 0..refinements {
        let op = build_on(problem, problem.grid_at(level))?;
        let dim = op.matrix.dim;
        let noise: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>()).collect();
        let start: Vec<f64> = match &previous {
            None => noise.iter().map(|u| 0.5 + u).collect(),
            Some((coarse, phi)) => {
                let mut x = [0.0; 3];
                let mut s: Vec<f64> = op
                    .lattice
                    .states
                    .iter()
                    .zip(&op.lattice.sqrt_mult)
                    .map(|(t, m)| {
                        for i in 0..problem.n {
                            x[i] = op.lattice.grid.position(t[i] as usize);
                        }
                        m * coarse.interpolate(phi, &x[..problem.n])
                    })
                    .collect();
                let amp = s.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-300);
                for (si, u) in s.iter_mut().zip(&noise) {
                    *si += 1e-3 * amp * u;
                }
                s
            }
        };
        let pair = lanczos::lowest_eigenpair(&op.matrix, &start, opts)?;
        levels.push(GridLevel {
            points: op.lattice.grid.points,
            spacing: op.lattice.grid.spacing,
            dimension: dim,
            nonzeros: op.matrix.nnz(),
            energy: pair.value,
            matvecs: pair.matvecs,
            residual: pair.residual,
            excited: pair.next_values.clone(),
        });
        previous = Some((op.lattice, pair.vector));
    }
    let energies: Vec<f64> = levels.iter().map(|l| l.energy).collect();
    let ex = extrapolate(&energies, problem.fallback_order());
    Ok(SpectralResult {
        levels,
        extrapolated: ex.value,
        error_estimate: ex.error_estimate,
        order: ex.order,
        observed_order: ex.observed_order,
        ground_state: previous.map(|(_, v)| v).unwrap_or_default(),
    })
}

/// Grid settings shared by composite oracle checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleSettings {
    pub points: usize,
    pub refinements: usize,
    pub seed: u64,
}

impl Default for OracleSettings {
    fn default() -> Self {
        OracleSettings {
            points: 64,
            refinements: 3,
            seed: DEFAULT_SEED,
        }
    }
}

impl OracleSettings {
    /// Runs [`ground_energy_with`] with these settings on `problem`'s
    /// boundary, statistics and potential; the coarsest grid is taken from
    /// the settings rather than from the problem.
    pub fn run(&self, problem: &OracleProblem) -> Result<SpectralResult> {
        let mut p = problem.clone();
        p.points = self.points.max(MIN_POINTS);
        ground_energy_with(&p, self.refinements, LanczosOptions::default(), self.seed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RobinsonCheck {
    /// `E^D(n, l + 2b)`.
    pub lhs_dirichlet: f64,
    /// `E^N(n, l)`.
    pub neumann: f64,
    /// `E^N(n, l) + 2n / b^2`.
    pub rhs: f64,
    /// Sum of the two extrapolation error estimates.
    pub oracle_error: f64,
    pub holds: bool,
}

/// Compares the Dirichlet energy in the enlarged box with the Neumann energy
/// plus the localization cost `2n / b^2`.
pub fn robinson_check(
    n: usize,
    ell: f64,
    b: f64,
    p: &Potential,
    settings: OracleSettings,
) -> Result<RobinsonCheck> {
    if !p.is_symmetric_decreasing() {
        return Err(Error::InvalidParameter(
            "the comparison requires a symmetric decreasing interaction".into(),
        ));
    }
    if !(b.is_finite() && b > 0.0) {
        return Err(Error::InvalidParameter(format!("b must be > 0, got {b}")));
    }
    let dirichlet = OracleProblem::new(
        n,
        ell + 2.0 * b,
        Boundary::Dirichlet,
        p.clone(),
        Statistics::Bose,
        settings.points,
    )?;
    let neumann = OracleProblem::new(
        n,
        ell,
        Boundary::Neumann,
        p.clone(),
        Statistics::Bose,
        settings.points,
    )?;
    let ed = settings.run(&dirichlet)?;
    let en = settings.run(&neumann)?;
    let rhs = en.extrapolated + 2.0 * n as f64 / (b * b);
    let oracle_error = ed.error_estimate + en.error_estimate;
    Ok(RobinsonCheck {
        lhs_dirichlet: ed.extrapolated,
        neumann: en.extrapolated,
        rhs,
        oracle_error,
        holds: ed.extrapolated <= rhs + oracle_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn problem(n: usize, bc: Boundary, p: Potential, s: Statistics) -> OracleProblem {
        OracleProblem::new(n, 1.0, bc, p, s, 64).unwrap()
    }

    #[test]
    fn single_particle_modes() {
        let d = ground_energy(
            &problem(1, Boundary::Dirichlet, Potential::free(), Statistics::Bose),
            4,
        )
        .unwrap();
        assert!((d.extrapolated - PI * PI).abs() < 1e-6, "{d:?}");
        let n = ground_energy(
            &problem(1, Boundary::Neumann, Potential::free(), Statistics::Bose),
            3,
        )
        .unwrap();
        assert!(n.extrapolated.abs() < 1e-8);
    }

    #[test]
    fn free_bosons_and_fermions_in_a_box() {
        let b = ground_energy(
            &problem(2, Boundary::Dirichlet, Potential::free(), Statistics::Bose),
            3,
        )
        .unwrap();
        assert!(
            (b.extrapolated - 2.0 * PI * PI).abs() < 1e-5,
            "{}",
            b.extrapolated
        );
        let f = ground_energy(
            &problem(2, Boundary::Dirichlet, Potential::free(), Statistics::Fermi),
            3,
        )
        .unwrap();
        assert!(
            (f.extrapolated - 5.0 * PI * PI).abs() < 1e-3,
            "{}",
            f.extrapolated
        );
    }

    #[test]
    fn fermions_equal_impenetrable_bosons_on_every_grid() {
        let hc = Potential::new(vec![crate::PotentialComponent::HardCoreBand {
            inner: 0.0,
            outer: 0.0,
        }])
        .unwrap();
        let a = build_hamiltonian(&problem(2, Boundary::Neumann, hc, Statistics::Bose)).unwrap();
        let b = build_hamiltonian(&problem(
            2,
            Boundary::Neumann,
            Potential::free(),
            Statistics::Fermi,
        ))
        .unwrap();
        assert_eq!(a.matrix.vals, b.matrix.vals);
        assert_eq!(a.matrix.cols, b.matrix.cols);
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let p = Potential::hard_core(0.01).unwrap();
        assert!(matches!(
            build_hamiltonian(&problem(2, Boundary::Dirichlet, p, Statistics::Bose)),
            Err(Error::Resolution(_))
        ));
        assert!(OracleProblem::new(
            2,
            1.0,
            Boundary::Dirichlet,
            Potential::free(),
            Statistics::Bose,
            32
        )
        .is_err());
        assert!(OracleProblem::new(
            4,
            1.0,
            Boundary::Dirichlet,
            Potential::free(),
            Statistics::Bose,
            64
        )
        .is_err());
    }

    #[test]
    fn symmetrized_operator_is_symmetric() {
        let p = Potential::lieb_liniger(3.0).unwrap();
        let op = build_hamiltonian(
            &OracleProblem::new(3, 1.0, Boundary::Neumann, p, Statistics::Bose, 64).unwrap(),
        )
        .unwrap();
        let m = &op.matrix;
        let mut entries = std::collections::HashMap::new();
        for r in 0..m.dim {
            for k in m.row_ptr[r]..m.row_ptr[r + 1] {
                entries.insert((r, m.cols[k] as usize), m.vals[k]);
            }
        }
        for ((r, c), v) in &entries {
            let t = entries.get(&(*c, *r)).copied().unwrap_or(f64::NAN);
            assert!((v - t).abs() < 1e-9 * v.abs().max(1.0));
        }
    }

    #[test]
    fn explicit_robinson_example() {
        let chk =
            robinson_check(1, 1.0, 0.5, &Potential::free(), OracleSettings::default()).unwrap();
        assert!((chk.lhs_dirichlet - PI * PI / 4.0).abs() < 1e-6);
        assert!((chk.rhs - 8.0).abs() < 1e-6);
        assert!(chk.holds);
    }
}
