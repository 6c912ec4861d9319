//! Free fermions in a box `[0, L]` with Dirichlet walls.
//!
//! Orbitals are `phi_j(x) = sqrt(2/L) sin(pi j x / L)`, `j = 1..N`. The
//! Slater determinant factorizes into
//! `4^{N(N-1)/2} (2/L)^{N/2} prod_k sin(pi x_k / L)
//!  prod_{i<j} sin(pi (x_j - x_i) / 2L) sin(pi (x_i + x_j) / 2L)`,
//! which equals `(-1)^{N(N-1)/2} det(phi_j(x_i))` and is positive on the
//! ordered sector `0 < x_1 < ... < x_N < L`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix3};
use serde::Serialize;

use crate::error::{Error, Result};

/// `|x - y|` (as a fraction of `L`) below which kernels switch to series.
const SERIES_THRESHOLD: f64 = 1e-8;

/// Above this particle number the wave function is accumulated in logs.
const LOG_DOMAIN_N: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FermiEnsemble {
    pub n: usize,
    pub length: f64,
}

/// `sum_{k=1}^{n} k^2`.
fn sum_k2(n: usize) -> f64 {
    let n = n as f64;
    n * (n + 1.0) * (2.0 * n + 1.0) / 6.0
}

/// `sum_{k=1}^{n} k^4`.
fn sum_k4(n: usize) -> f64 {
    let n = n as f64;
    n * (n + 1.0) * (2.0 * n + 1.0) * (3.0 * n * n + 3.0 * n - 1.0) / 30.0
}

/// Ground-state energy of `n` free fermions on `[0, length]`.
pub fn dirichlet_energy(n: usize, length: f64) -> f64 {
    (PI / length).powi(2) * sum_k2(n)
}

/// Exact energy of `n` hard rods of the given diameter on `[0, length]`,
/// obtained by removing the excluded volume and mapping to free fermions.
pub fn hardcore_exact_energy(n: usize, length: f64, diameter: f64) -> Result<f64> {
    if diameter < 0.0 || !diameter.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "diameter must be >= 0, got {diameter}"
        )));
    }
    let free = length - (n.saturating_sub(1)) as f64 * diameter;
    if !(free > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "{n} rods of diameter {diameter} do not fit in a box of length {length}"
        )));
    }
    Ok(dirichlet_energy(n, free))
}

/// Result of the three-body scaling experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Rho3Report {
    /// `rho3 / (rho^9 prod (x_i - x_j)^2)` for every sample without a coincident pair.
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
    /// Largest `|rho3|` over samples containing a coincident pair.
    pub coincident_max: f64,
}

/// Near-diagonal fit of the pair density.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NearDiagonalFit {
    /// Quadratic coefficient `C` in `rho2 ~ C s^2`.
    pub coefficient: f64,
    /// Next-order coefficient `D` in `rho2 / s^2 ~ C + D s^2`.
    pub curvature: f64,
    /// `pi^2 rho^4 / 3`.
    pub reference: f64,
    pub samples: usize,
}

impl NearDiagonalFit {
    pub fn relative_deviation(&self) -> f64 {
        (self.coefficient / self.reference - 1.0).abs()
    }
}

impl FermiEnsemble {
    pub fn new(n: usize, length: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("need at least one particle".into()));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "box length must be > 0, got {length}"
            )));
        }
        Ok(FermiEnsemble { n, length })
    }

    pub fn density(&self) -> f64 {
        self.n as f64 / self.length
    }

    pub fn energy(&self) -> f64 {
        dirichlet_energy(self.n, self.length)
    }

    /// `phi_j(x)` for `j >= 1`.
    pub fn orbital(&self, j: usize, x: f64) -> f64 {
        (2.0 / self.length).sqrt() * (PI * j as f64 * x / self.length).sin()
    }

    /// `det(phi_j(x_i))` by LU; the brute-force reference for [`Self::psi`].
    pub fn slater_determinant(&self, x: &[f64]) -> f64 {
        let n = self.n;
        assert_eq!(x.len(), n, "expected {n} coordinates");
        DMatrix::from_fn(n, n, |i, j| self.orbital(j + 1, x[i])).determinant()
    }

    /// Same determinant with entries and elimination carried out in 192-bit
    /// floating point, rounded to `f64` at the end. Clustered coordinates make
    /// the orbital matrix ill-conditioned, which the `f64` version cannot absorb.
    pub fn slater_determinant_extended(&self, x: &[f64]) -> f64 {
        use astro_float::{BigFloat, Consts, RoundingMode};
        const P: usize = 192;
        thread_local! {
            static CONSTS: std::cell::RefCell<Consts> =
                std::cell::RefCell::new(Consts::new().expect("constant cache"));
        }
        let rm = RoundingMode::ToEven;
        let n = self.n;
        assert_eq!(x.len(), n, "expected {n} coordinates");
        CONSTS.with(|cell| {
            let cc = &mut *cell.borrow_mut();
            let length = BigFloat::from_f64(self.length, P);
            let scale = BigFloat::from_f64(2.0, P).div(&length, P, rm).sqrt(P, rm);
            let step = cc.pi(P, rm).div(&length, P, rm);
            let mut m: Vec<Vec<BigFloat>> = x
                .iter()
                .map(|&xi| {
                    let theta = step.mul(&BigFloat::from_f64(xi, P), P, rm);
                    (1..=n)
                        .map(|j| {
                            let arg = theta.mul(&BigFloat::from_word(j as u64, P), P, rm);
                            scale.mul(&arg.sin(P, rm, cc), P, rm)
                        })
                        .collect()
                })
                .collect();
            let mut det = BigFloat::from_word(1, P);
            for k in 0..n {
                let pivot = (k..n)
                    .max_by(|&a, &b| m[a][k].abs_cmp(&m[b][k]).unwrap_or(0).cmp(&0))
                    .unwrap();
                if m[pivot][k].is_zero() {
                    return 0.0;
                }
                if pivot != k {
                    m.swap(pivot, k);
                    det = det.neg();
                }
                det = det.mul(&m[k][k], P, rm);
                for r in (k + 1)..n {
                    let factor = m[r][k].div(&m[k][k], P, rm);
                    for c in (k + 1)..n {
                        let t = factor.mul(&m[k][c], P, rm);
                        m[r][c] = m[r][c].sub(&t, P, rm);
                    }
                }
            }
            det.to_string().parse().unwrap_or(f64::NAN)
        })
    }

    /// Sign and `ln|psi|` of the product form.
    pub fn psi_log(&self, x: &[f64]) -> (f64, f64) {
        let n = self.n;
        assert_eq!(x.len(), n, "expected {n} coordinates");
        let l = self.length;
        let pairs = (n * (n - 1) / 2) as f64;
        let mut log = pairs * 4f64.ln() + 0.5 * n as f64 * (2.0 / l).ln();
        let mut sign = 1.0;
        let mut acc = |v: f64| {
            if v == 0.0 {
                sign = 0.0;
            } else {
                if v < 0.0 {
                    sign = -sign;
                }
                log += v.abs().ln();
            }
        };
        for i in 0..n {
            acc((PI * x[i] / l).sin());
            for j in (i + 1)..n {
                acc((PI * (x[j] - x[i]) / (2.0 * l)).sin());
                acc((PI * (x[i] + x[j]) / (2.0 * l)).sin());
            }
        }
        if sign == 0.0 {
            (0.0, f64::NEG_INFINITY)
        } else {
            (sign, log)
        }
    }

    /// Ground-state wave function in closed product form.
    pub fn psi(&self, x: &[f64]) -> f64 {
        let n = self.n;
        assert_eq!(x.len(), n, "expected {n} coordinates");
        if n > LOG_DOMAIN_N {
            let (sign, log) = self.psi_log(x);
            return sign * log.exp();
        }
        let l = self.length;
        let pairs = (n * (n - 1) / 2) as i32;
        let mut value = 4f64.powi(pairs) * (2.0 / l).powf(0.5 * n as f64);
        for i in 0..n {
            value *= (PI * x[i] / l).sin();
            for j in (i + 1)..n {
                value *=
                    (PI * (x[j] - x[i]) / (2.0 * l)).sin() * (PI * (x[i] + x[j]) / (2.0 * l)).sin();
            }
        }
        value
    }

    /// `D_N(t) = sin((N + 1/2) t) / (2 pi sin(t / 2))` with a series branch
    /// near multiples of `2 pi`.
    pub fn dirichlet_kernel(&self, t: f64) -> f64 {
        let tau = t - 2.0 * PI * (t / (2.0 * PI)).round();
        let n = self.n;
        if tau.abs() < PI * SERIES_THRESHOLD {
            let t2 = tau * tau;
            ((2 * n + 1) as f64 - t2 * sum_k2(n) + t2 * t2 * sum_k4(n) / 12.0) / (2.0 * PI)
        } else {
            ((n as f64 + 0.5) * tau).sin() / (2.0 * PI * (0.5 * tau).sin())
        }
    }

    /// One-body density matrix `gamma1(x, y)`.
    pub fn gamma1(&self, x: f64, y: f64) -> f64 {
        let alpha = PI / self.length;
        alpha * (self.dirichlet_kernel(alpha * (x - y)) - self.dirichlet_kernel(alpha * (x + y)))
    }

    /// Direct orbital sum for `gamma1`; used as a cross-check.
    pub fn gamma1_sum(&self, x: f64, y: f64) -> f64 {
        (1..=self.n)
            .map(|j| self.orbital(j, x) * self.orbital(j, y))
            .sum()
    }

    /// Mixed partial derivative `d^k1/dx^k1 d^k2/dy^k2 gamma1`.
    pub fn gamma1_derivative(&self, x: f64, y: f64, k1: u32, k2: u32) -> f64 {
        let alpha = PI / self.length;
        // k-th derivative of sin(u) is sin(u + k pi / 2).
        let shifted = |u: f64, k: u32| (u + 0.5 * PI * k as f64).sin();
        (1..=self.n)
            .map(|j| {
                let q = alpha * j as f64;
                q.powi((k1 + k2) as i32) * shifted(q * x, k1) * shifted(q * y, k2)
            })
            .sum::<f64>()
            * 2.0
            / self.length
    }

    pub fn rho1(&self, x: f64) -> f64 {
        self.gamma1(x, x)
    }

    /// Pair density `rho1(x1) rho1(x2) - gamma1(x1, x2)^2`.
    pub fn rho2(&self, x1: f64, x2: f64) -> f64 {
        let g = self.gamma1(x1, x2);
        (self.rho1(x1) * self.rho1(x2) - g * g).max(0.0)
    }

    /// Three-body density as the Wick determinant of `gamma1`.
    pub fn rho3(&self, x1: f64, x2: f64, x3: f64) -> f64 {
        let xs = [x1, x2, x3];
        Matrix3::from_fn(|i, j| self.gamma1(xs[i], xs[j])).determinant()
    }

    /// Evaluates `rho3 / (rho^9 prod (x_i - x_j)^2)` over the samples.
    pub fn rho3_scaling_check(&self, triples: &[[f64; 3]]) -> Result<Rho3Report> {
        if self.n < 10 {
            return Err(Error::InvalidParameter(format!(
                "three-body scaling check needs N >= 10, got {}",
                self.n
            )));
        }
        let rho = self.density();
        let mut ratios = Vec::new();
        let mut coincident_max: f64 = 0.0;
        for t in triples {
            let value = self.rho3(t[0], t[1], t[2]);
            let sep = (t[0] - t[1]).powi(2) * (t[1] - t[2]).powi(2) * (t[0] - t[2]).powi(2);
            if sep == 0.0 {
                coincident_max = coincident_max.max(value.abs());
            } else {
                ratios.push(value / (rho.powi(9) * sep));
            }
        }
        let max_ratio = ratios.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        Ok(Rho3Report {
            ratios,
            max_ratio,
            coincident_max,
        })
    }

    /// Fits `rho2(x0 + s/2, x0 - s/2) / s^2 = C + D s^2` over log-spaced
    /// separations `s` in `[1e-4, 1e-2] L`, restricted to `rho s <= 1/4`
    /// so the quadratic model stays valid.
    pub fn near_diagonal_fit(&self, x0: f64) -> Result<NearDiagonalFit> {
        let rho = self.density();
        let s_min = 1e-4 * self.length;
        let s_max = (1e-2 * self.length).min(0.25 / rho);
        if !(s_max > s_min) {
            return Err(Error::InvalidParameter(
                "no separations available for the near-diagonal fit".into(),
            ));
        }
        let count = 40;
        let (mut s00, mut s01, mut s11, mut b0, mut b1) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for i in 0..count {
            let s = s_min * (s_max / s_min).powf(i as f64 / (count - 1) as f64);
            let y = self.rho2(x0 + 0.5 * s, x0 - 0.5 * s) / (s * s);
            let u = s * s;
            s00 += 1.0;
            s01 += u;
            s11 += u * u;
            b0 += y;
            b1 += u * y;
        }
        let det = s00 * s11 - s01 * s01;
        let coefficient = (b0 * s11 - b1 * s01) / det;
        let curvature = (s00 * b1 - s01 * b0) / det;
        Ok(NearDiagonalFit {
            coefficient,
            curvature,
            reference: PI * PI / 3.0 * rho.powi(4),
            samples: count,
        })
    }

    /// Average of the fitted coefficient over the middle half of the box.
    pub fn near_diagonal_bulk_average(&self, points: usize) -> Result<NearDiagonalFit> {
        let points = points.max(1);
        let mut acc = 0.0;
        let mut curv = 0.0;
        let mut last = None;
        for i in 0..points {
            let x0 = self.length * (0.25 + 0.5 * (i as f64 + 0.5) / points as f64);
            let fit = self.near_diagonal_fit(x0)?;
            acc += fit.coefficient;
            curv += fit.curvature;
            last = Some(fit);
        }
        let mut fit = last.expect("at least one point");
        fit.coefficient = acc / points as f64;
        fit.curvature = curv / points as f64;
        fit.samples *= points;
        Ok(fit)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extended_determinant_resolves_clustered_points() {
        let e = FermiEnsemble::new(3, 3.0).unwrap();
        let x = [0.08881381968508317, 0.0789606947886996, 0.0977464897151048];
        // 50-digit reference for det(phi_j(x_i)).
        let reference = 5.123_158_250_662_22e-12;
        assert!((e.slater_determinant_extended(&x) / reference - 1.0).abs() < 1e-15);
        assert!((e.psi(&x) + reference).abs() < 1e-14 * reference);
    }

    #[test]
    fn energies() {
        assert!((dirichlet_energy(1, 1.0) - PI * PI).abs() < 1e-13);
        assert!((dirichlet_energy(3, 1.0) - 14.0 * PI * PI).abs() < 1e-12);
        let exact = dirichlet_energy(100, 100.0);
        let leading = PI * PI / 3.0 * 100.0;
        assert!((exact / leading - 1.0).abs() < 0.016);
        assert_eq!(
            hardcore_exact_energy(4, 2.0, 0.0).unwrap(),
            dirichlet_energy(4, 2.0)
        );
        assert!(hardcore_exact_energy(3, 1.0, 0.5).is_err());
    }

    #[test]
    fn product_form_matches_determinant_small_n() {
        let e = FermiEnsemble::new(2, 1.3).unwrap();
        let x = [0.2, 0.9];
        assert!((e.psi(&x) + e.slater_determinant(&x)).abs() < 1e-14);
        let e = FermiEnsemble::new(3, 1.0).unwrap();
        let x = [0.1, 0.45, 0.8];
        assert!((e.psi(&x) + e.slater_determinant(&x)).abs() < 1e-13);
        assert!(e.psi(&x) > 0.0);
        assert_eq!(e.psi(&[0.3, 0.3, 0.6]), 0.0);
    }

    #[test]
    fn log_domain_agrees_with_direct_product() {
        let e = FermiEnsemble::new(8, 2.0).unwrap();
        let x: Vec<f64> = (0..8).map(|i| 0.1 + 0.23 * i as f64).collect();
        let (sign, log) = e.psi_log(&x);
        assert!((sign * log.exp() / e.psi(&x) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kernel_closed_form_matches_sum_including_near_diagonal() {
        let e = FermiEnsemble::new(37, 5.0).unwrap();
        for (x, y) in [
            (1.2, 3.4),
            (2.0, 2.0),
            (2.0, 2.0 + 1e-11),
            (0.0, 0.0),
            (5.0, 5.0),
            (4.9999, 4.99995),
        ] {
            let a = e.gamma1(x, y);
            let b = e.gamma1_sum(x, y);
            assert!((a - b).abs() < 1e-12, "{x} {y}: {a} vs {b}");
        }
    }

    #[test]
    fn pauli_exclusion() {
        let e = FermiEnsemble::new(12, 3.0).unwrap();
        assert_eq!(e.rho2(1.1, 1.1), 0.0);
        assert!(e.rho3(0.5, 0.5, 2.0).abs() < 1e-10);
    }

    #[test]
    fn near_diagonal_coefficient_at_moderate_n() {
        let e = FermiEnsemble::new(200, 200.0).unwrap();
        let fit = e.near_diagonal_fit(100.0).unwrap();
        assert!(fit.relative_deviation() < 0.05, "{fit:?}");
    }
}
