//! Thermodynamic Lieb–Liniger ground state.
//!
//! The quasi-momentum density solves
//! `2 pi g(y) = 1 + 2 lambda int_{-1}^{1} g(x) / (lambda^2 + (x - y)^2) dx`,
//! after which `gamma = lambda / int g` and
//! `e(gamma) = (gamma / lambda)^3 int g(x) x^2 dx`.
//!
//! The equation is discretized by Nyström on Gauss–Legendre nodes. The
//! kernel becomes sharply peaked as `lambda -> 0`, so its exact integral is
//! subtracted out row by row: `int K g = int K (g - g(y)) + g(y) int K`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::{pairwise_sum, GaussLegendre};

/// `pi^2 / 3`, the impenetrable (free Fermi) ceiling of `e`.
pub const TONKS_ENERGY: f64 = PI * PI / 3.0;

/// Default Nyström order.
pub const DEFAULT_NODES: usize = 200;

/// Below this coupling the inversion is reported as ill-conditioned.
pub const ILL_CONDITIONED_GAMMA: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LLGroundState {
    pub gamma: f64,
    pub lambda: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub g: Vec<f64>,
    pub e: f64,
    pub n_nodes: usize,
    pub ill_conditioned: bool,
}

fn kernel(lambda: f64, x: f64, y: f64) -> f64 {
    1.0 / (lambda * lambda + (x - y) * (x - y))
}

/// `int_{-1}^{1} K(x, y) dx`.
fn kernel_mass(lambda: f64, y: f64) -> f64 {
    (((1.0 - y) / lambda).atan() + ((1.0 + y) / lambda).atan()) / lambda
}

/// Solves the integral equation at fixed `lambda`.
pub fn solve_at_lambda(lambda: f64, n_nodes: usize) -> Result<LLGroundState> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "lambda must be > 0, got {lambda}"
        )));
    }
    if n_nodes < 8 {
        return Err(Error::InvalidParameter(format!(
            "at least 8 quadrature nodes are required, got {n_nodes}"
        )));
    }
    let rule = GaussLegendre::new(n_nodes);
    let x = &rule.nodes;
    let w = &rule.weights;
    let scale = lambda / PI;

    let mut m = DMatrix::<f64>::zeros(n_nodes, n_nodes);
    for i in 0..n_nodes {
        let mut off_sum = 0.0;
        for j in 0..n_nodes {
            if j != i {
                let kij = w[j] * kernel(lambda, x[j], x[i]);
                m[(i, j)] = -scale * kij;
                off_sum += kij;
            }
        }
        m[(i, i)] = 1.0 - scale * (kernel_mass(lambda, x[i]) - off_sum);
    }
    let rhs = DVector::from_element(n_nodes, 1.0 / (2.0 * PI));
    let g = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Internal(format!("singular Nyström system at lambda = {lambda}")))?;
    let g: Vec<f64> = g.iter().copied().collect();

    let mass = pairwise_sum(&w.iter().zip(&g).map(|(wi, gi)| wi * gi).collect::<Vec<_>>());
    let second = pairwise_sum(
        &w.iter()
            .zip(&g)
            .zip(x)
            .map(|((wi, gi), xi)| wi * gi * xi * xi)
            .collect::<Vec<_>>(),
    );
    let gamma = lambda / mass;
    let e = (gamma / lambda).powi(3) * second;
    Ok(LLGroundState {
        gamma,
        lambda,
        nodes: rule.nodes.clone(),
        weights: rule.weights.clone(),
        g,
        e,
        n_nodes,
        ill_conditioned: gamma < ILL_CONDITIONED_GAMMA,
    })
}

impl LLGroundState {
    /// Nyström interpolant of `g` at an arbitrary `y` in `[-1, 1]`.
    pub fn g_at(&self, y: f64) -> f64 {
        let lambda = self.lambda;
        let mut ksum = 0.0;
        let mut kg = 0.0;
        for ((xj, wj), gj) in self.nodes.iter().zip(&self.weights).zip(&self.g) {
            let k = wj * kernel(lambda, *xj, y);
            ksum += k;
            kg += k * gj;
        }
        let denom = 2.0 * PI - 2.0 * lambda * (kernel_mass(lambda, y) - ksum);
        (1.0 + 2.0 * lambda * kg) / denom
    }

    /// Residual `2 pi g(y) - 1 - 2 lambda int K g` of the interpolant at `y`,
    /// with the integral evaluated on a refined composite rule split at `y`.
    pub fn residual_at(&self, y: f64) -> f64 {
        let rule = GaussLegendre::new(48);
        let lambda = self.lambda;
        let width = lambda.max(1e-3);
        let mut cuts = vec![-1.0, 1.0, y];
        for k in 1..=6 {
            let d = width * 4f64.powi(k - 3);
            cuts.push(y - d);
            cuts.push(y + d);
        }
        cuts.retain(|c| (-1.0..=1.0).contains(c));
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cuts.dedup();
        let mut pieces = Vec::new();
        for c in cuts.windows(2) {
            let n_sub = (((c[1] - c[0]) / 0.25).ceil() as usize).max(1);
            for s in 0..n_sub {
                let a = c[0] + (c[1] - c[0]) * s as f64 / n_sub as f64;
                let b = c[0] + (c[1] - c[0]) * (s + 1) as f64 / n_sub as f64;
                pieces.push(rule.integrate(a, b, |t| kernel(lambda, t, y) * self.g_at(t)));
            }
        }
        2.0 * PI * self.g_at(y) - 1.0 - 2.0 * lambda * pairwise_sum(&pieces)
    }

    /// `int g` as implied by the stored state.
    pub fn g_mass(&self) -> f64 {
        self.weights.iter().zip(&self.g).map(|(w, g)| w * g).sum()
    }
}

/// Solves for the state whose coupling equals `gamma` to relative `tol`.
pub fn e_of_gamma(gamma: f64, n_nodes: usize, tol: f64) -> Result<LLGroundState> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "gamma must be > 0, got {gamma}"
        )));
    }
    let tol = tol.max(4.0 * f64::EPSILON);
    let residual = |t: f64| -> Result<(f64, LLGroundState)> {
        let s = solve_at_lambda(t.exp(), n_nodes)?;
        Ok(((s.gamma / gamma).ln(), s))
    };

    let mut lo = (gamma / 10.0).ln();
    let mut hi = (10.0 * gamma + 10.0).ln();
    let (mut f_lo, mut s_lo) = residual(lo)?;
    let (mut f_hi, mut s_hi) = residual(hi)?;
    let mut expansions = 0;
    while f_lo > 0.0 || f_hi < 0.0 {
        if expansions >= 60 {
            return Err(Error::Internal(format!(
                "could not bracket lambda for gamma = {gamma}"
            )));
        }
        if f_lo > 0.0 {
            lo -= 10f64.ln();
            (f_lo, s_lo) = residual(lo)?;
        }
        if f_hi < 0.0 {
            hi += 10f64.ln();
            (f_hi, s_hi) = residual(hi)?;
        }
        expansions += 1;
    }
    if s_hi.gamma <= s_lo.gamma {
        return Err(Error::Internal(format!(
            "gamma(lambda) not increasing on [{}, {}]",
            s_lo.lambda, s_hi.lambda
        )));
    }

    // Illinois variant of regula falsi on log(gamma(lambda)/gamma) in log(lambda).
    let log_tol = tol;
    if f_lo.abs() <= log_tol {
        return Ok(s_lo);
    }
    if f_hi.abs() <= log_tol {
        return Ok(s_hi);
    }
    let mut side = 0i8;
    for _ in 0..200 {
        let t = if hi - lo < 1e-3 {
            (hi * f_lo.abs() + lo * f_hi.abs()) / (f_lo.abs() + f_hi.abs())
        } else {
            let secant = (hi * f_lo.abs() + lo * f_hi.abs()) / (f_lo.abs() + f_hi.abs());
            if secant > lo && secant < hi {
                secant
            } else {
                0.5 * (lo + hi)
            }
        };
        let (ft, st) = residual(t)?;
        if ft.abs() <= log_tol || (hi - lo) <= 1e-15 * t.abs().max(1.0) {
            return Ok(st);
        }
        if ft < 0.0 {
            lo = t;
            f_lo = ft;
            if side == -1 {
                f_hi *= 0.5;
            }
            side = -1;
        } else {
            hi = t;
            f_hi = ft;
            if side == 1 {
                f_lo *= 0.5;
            }
            side = 1;
        }
    }
    Err(Error::Internal(format!(
        "lambda inversion for gamma = {gamma} did not converge"
    )))
}

/// `pi^2/3 (gamma / (gamma + 2))^2`.
pub fn lower_bound(gamma: f64) -> f64 {
    TONKS_ENERGY * (gamma / (gamma + 2.0)).powi(2)
}

/// `pi^2/3 (1 + 2/gamma)^(-2)`; algebraically equal to [`lower_bound`].
pub fn expansion_value(gamma: f64) -> f64 {
    TONKS_ENERGY / (1.0 + 2.0 / gamma).powi(2)
}

pub fn check_lower_bound(state: &LLGroundState) -> bool {
    state.e >= lower_bound(state.gamma) - 1e-9
}

/// Minimum coupling for [`expansion_residual`].
pub const EXPANSION_MIN_GAMMA: f64 = 5.0;

/// `gamma^3 |e - pi^2/3 (1 + 2/gamma)^(-2)|`.
pub fn expansion_residual(state: &LLGroundState) -> Result<f64> {
    if state.gamma < EXPANSION_MIN_GAMMA {
        return Err(Error::OutOfRegime(format!(
            "expansion residual needs gamma >= {EXPANSION_MIN_GAMMA}, got {}",
            state.gamma
        )));
    }
    Ok(state.gamma.powi(3) * (state.e - expansion_value(state.gamma)).abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn large_lambda_approaches_free_fermions() {
        let s = solve_at_lambda(1e6, 64).unwrap();
        assert!(s.g.iter().all(|g| (g - 0.5 / PI).abs() < 1e-6));
        assert!((s.gamma / (PI * 1e6) - 1.0).abs() < 1e-5);
        assert!((s.e - TONKS_ENERGY).abs() < 1e-5);
    }

    #[test]
    fn density_is_symmetric_and_above_free_value() {
        let s = solve_at_lambda(0.7, 120).unwrap();
        let n = s.g.len();
        for i in 0..n {
            assert!((s.g[i] - s.g[n - 1 - i]).abs() < 1e-12);
            assert!(s.g[i] >= 0.5 / PI);
        }
    }

    #[test]
    fn inversion_hits_target() {
        for gamma in [0.1, 1.0, 10.0, 1000.0] {
            let s = e_of_gamma(gamma, 200, 1e-13).unwrap();
            assert!((s.gamma / gamma - 1.0).abs() < 1e-12);
            assert!((s.lambda / s.g_mass() - s.gamma).abs() < 1e-10 * gamma);
        }
    }

    #[test]
    fn gamma_ten_sandwich() {
        let s = e_of_gamma(10.0, 200, 1e-13).unwrap();
        assert!(s.e >= 2.2846 && s.e <= 3.2899);
        assert!(check_lower_bound(&s));
        let mut halved = s.clone();
        halved.e *= 0.5;
        assert!(!check_lower_bound(&halved));
    }

    #[test]
    fn weak_coupling_energy_vanishes() {
        let s = e_of_gamma(1e-4, 200, 1e-12).unwrap();
        assert!(s.e <= 1e-3 && s.e > 0.0);
        assert!(s.ill_conditioned);
    }

    #[test]
    fn residual_requires_strong_coupling() {
        let s = e_of_gamma(1.0, 64, 1e-12).unwrap();
        assert!(matches!(expansion_residual(&s), Err(Error::OutOfRegime(_))));
    }

    #[test]
    fn off_node_residual_is_small() {
        for lambda in [0.2, 1.0, 30.0] {
            let s = solve_at_lambda(lambda, 200).unwrap();
            for y in [-0.97, -0.3311, 0.0123, 0.5, 0.999] {
                assert!(s.residual_at(y).abs() < 1e-8, "lambda={lambda} y={y}");
            }
        }
    }
}
