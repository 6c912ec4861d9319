//! Variational trial states built from the two-body scattering solution.
//!
//! Near contact the free-Fermi ground state is modified along the closest
//! pair distance `r`: with `omega(r) = b f0(r)` (the even scattering solution
//! at radius `b`), the state is `omega(r) |Psi_F| / r` for `r < b` and
//! `|Psi_F|` otherwise. For `v = 0` the profile `omega(r) / r` is replaced by
//! its constant limit, which leaves `|Psi_F|` unchanged.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::free_fermi::FermiEnsemble;
use crate::potential::Potential;
use crate::quadrature::{pairwise_sum, GaussLegendre};
use crate::scattering::{solve_scattering, Channel, ScatteringResult};

/// Relative change between orders `m` and `2m` above which quadrature fails.
pub const QUADRATURE_TOLERANCE: f64 = 1e-6;

/// Smallest admissible Gauss–Legendre order per dimension.
pub const MIN_ORDER: usize = 64;

/// Maximum number of panel bisections attempted before giving up.
const MAX_SUBDIVISIONS: usize = 4;

#[derive(Debug, Clone)]
pub struct TrialState {
    pub n: usize,
    pub length: f64,
    pub potential: Potential,
    pub b: f64,
    pub scattering: ScatteringResult,
    pub ensemble: FermiEnsemble,
    /// Non-fatal diagnostics (scale separation, unsupported corners).
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialEnergy {
    pub energy: f64,
    pub kinetic: f64,
    pub potential: f64,
    pub norm: f64,
    pub order: usize,
    pub relative_change: f64,
    pub subdivisions: usize,
}

/// `sinc(z) = sin(z) / z` and its derivative, with series near zero.
fn sinc_and_derivative(z: f64) -> (f64, f64) {
    if z.abs() < 1e-4 {
        let z2 = z * z;
        (1.0 - z2 / 6.0 + z2 * z2 / 120.0, -z / 3.0 + z * z2 / 30.0)
    } else {
        let (s, c) = z.sin_cos();
        (s / z, (z * c - s) / (z * z))
    }
}

impl TrialState {
    /// `W(r) = omega(r)` for `r < b` and `r` beyond; `(W, W')`.
    fn profile(&self, r: f64) -> (f64, f64) {
        if self.potential.is_free() || r >= self.b {
            (r, 1.0)
        } else {
            (
                self.b * self.scattering.value(r),
                self.b * self.scattering.derivative(r),
            )
        }
    }

    /// Smooth factor `Q = |Psi_F| / |x2 - x1|` for two particles and its
    /// gradient, for `x1 <= x2`.
    fn pair_factor(&self, x1: f64, x2: f64) -> (f64, f64, f64) {
        let l = self.length;
        let k = 4.0 * (2.0 / l) * (PI / (2.0 * l));
        let (y1, y2) = (PI * x1 / l, PI * x2 / l);
        let sigma = 0.5 * (y1 + y2);
        let z = PI * (x2 - x1) / (2.0 * l);
        let (sc, dsc) = sinc_and_derivative(z);
        let (s1, c1) = y1.sin_cos();
        let (s2, c2) = y2.sin_cos();
        let (ss, cs) = sigma.sin_cos();
        let angular = s1 * s2 * ss;
        let q = k * angular * sc;
        let dz = PI / (2.0 * l);
        let d1 = k * (PI / l) * (c1 * s2 * ss + 0.5 * s1 * s2 * cs) * sc - k * angular * dsc * dz;
        let d2 = k * (PI / l) * (s1 * c2 * ss + 0.5 * s1 * s2 * cs) * sc + k * angular * dsc * dz;
        (q, d1, d2)
    }

    /// Value of the trial state at any point of `[0, L]^N`.
    pub fn value(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.n);
        let mut sorted = x.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if self.n == 2 {
            let (q, _, _) = self.pair_factor(sorted[0], sorted[1]);
            return self.profile(sorted[1] - sorted[0]).0 * q;
        }
        let (value, _) = self.three_body(&sorted);
        value
    }

    /// Value and gradient for three ordered coordinates.
    fn three_body(&self, x: &[f64]) -> (f64, [f64; 3]) {
        let l = self.length;
        let u1 = x[1] - x[0];
        let u2 = x[2] - x[1];
        let (r, pair) = if u1 <= u2 { (u1, (0, 1)) } else { (u2, (1, 2)) };
        let psi = self.ensemble.psi(x).abs();
        if r <= 0.0 {
            return (0.0, [0.0; 3]);
        }
        let p = psi / r;
        let (w, dw) = self.profile(r);
        // d/dx_i log psi, using only sin factors of the product form.
        let mut dlog = [0.0; 3];
        let cot = |t: f64| t.cos() / t.sin();
        for i in 0..3 {
            dlog[i] += (PI / l) * cot(PI * x[i] / l);
            for j in 0..3 {
                if j == i {
                    continue;
                }
                let diff = (x[i] - x[j]).abs();
                let sign = if x[i] > x[j] { 1.0 } else { -1.0 };
                dlog[i] += sign * (PI / (2.0 * l)) * cot(PI * diff / (2.0 * l));
                dlog[i] += (PI / (2.0 * l)) * cot(PI * (x[i] + x[j]) / (2.0 * l));
            }
        }
        let mut dr = [0.0; 3];
        dr[pair.0] = -1.0;
        dr[pair.1] = 1.0;
        let mut grad = [0.0; 3];
        for i in 0..3 {
            let dp = p * (dlog[i] - dr[i] / r);
            grad[i] = dw * dr[i] * p + w * dp;
        }
        (w * p, grad)
    }

    /// Energy expectation with Gauss–Legendre order `m` (checked against `2m`).
    pub fn energy(&self, m: usize) -> Result<TrialEnergy> {
        if m < MIN_ORDER {
            return Err(Error::InvalidParameter(format!(
                "quadrature order must be at least {MIN_ORDER}, got {m}"
            )));
        }
        let mut last_change = f64::INFINITY;
        for subdivisions in 0..=MAX_SUBDIVISIONS {
            let coarse = self.integrate(m, subdivisions);
            let fine = self.integrate(2 * m, subdivisions);
            let e_coarse = coarse.0 + coarse.1;
            let e_fine = fine.0 + fine.1;
            let energy_c = e_coarse / coarse.2;
            let energy_f = e_fine / fine.2;
            let change = ((energy_f - energy_c) / energy_f).abs();
            last_change = change;
            if change <= QUADRATURE_TOLERANCE {
                return Ok(TrialEnergy {
                    energy: energy_f,
                    kinetic: fine.0 / fine.2,
                    potential: fine.1 / fine.2,
                    norm: fine.2,
                    order: 2 * m,
                    relative_change: change,
                    subdivisions,
                });
            }
        }
        Err(Error::Accuracy {
            relative_change: last_change,
            order: 2 * m,
        })
    }

    /// Breakpoints in the pair distance where the integrand is not smooth.
    fn radial_cuts(&self, upper: f64, subdivisions: usize) -> Vec<f64> {
        let mut cuts = vec![0.0, upper];
        if self.b < upper {
            cuts.push(self.b);
        }
        for t in self.potential.event_points() {
            if t > 0.0 && t < upper {
                cuts.push(t);
            }
        }
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cuts.dedup();
        for _ in 0..subdivisions {
            let mut finer = Vec::with_capacity(2 * cuts.len());
            for w in cuts.windows(2) {
                finer.push(w[0]);
                finer.push(0.5 * (w[0] + w[1]));
            }
            finer.push(*cuts.last().unwrap());
            cuts = finer;
        }
        cuts
    }

    /// Returns `(kinetic, potential, norm)` integrals (unnormalized).
    fn integrate(&self, m: usize, subdivisions: usize) -> (f64, f64, f64) {
        match self.n {
            2 => self.integrate_two(m, subdivisions),
            _ => self.integrate_three(m, subdivisions),
        }
    }

    fn integrate_two(&self, m: usize, subdivisions: usize) -> (f64, f64, f64) {
        let l = self.length;
        let rule = GaussLegendre::new(m);
        let cuts = self.radial_cuts(l, subdivisions);
        let mut kin = Vec::new();
        let mut pot = Vec::new();
        let mut norm = Vec::new();
        for w in cuts.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            let v = self.potential.regular_value(mid);
            for (u, wu) in rule.on_interval(w[0], w[1]) {
                let (wp, dwp) = self.profile(u);
                let (mut k_acc, mut p_acc, mut n_acc) = (0.0, 0.0, 0.0);
                for (x1, wx) in rule.on_interval(0.0, l - u) {
                    let (q, d1, d2) = self.pair_factor(x1, x1 + u);
                    let psi = wp * q;
                    let g1 = -dwp * q + wp * d1;
                    let g2 = dwp * q + wp * d2;
                    k_acc += wx * (g1 * g1 + g2 * g2);
                    n_acc += wx * psi * psi;
                    p_acc += wx * v * psi * psi;
                }
                kin.push(2.0 * wu * k_acc);
                pot.push(2.0 * wu * p_acc);
                norm.push(2.0 * wu * n_acc);
            }
        }
        // Delta spikes act on lines of constant pair distance.
        for (x0, h) in self.potential.spikes() {
            if x0 >= l {
                continue;
            }
            let factor = if x0 == 0.0 { h } else { 2.0 * h };
            let (wp, _) = self.profile(x0);
            let line = rule.integrate(0.0, l - x0, |t| {
                let (q, _, _) = self.pair_factor(t, t + x0);
                (wp * q).powi(2)
            });
            pot.push(factor * line);
        }
        (pairwise_sum(&kin), pairwise_sum(&pot), pairwise_sum(&norm))
    }

    fn integrate_three(&self, m: usize, subdivisions: usize) -> (f64, f64, f64) {
        let l = self.length;
        let rule = GaussLegendre::new(m);
        let outer = self.radial_cuts(l, subdivisions);
        let mut kin = Vec::new();
        let mut pot = Vec::new();
        let mut norm = Vec::new();
        let p = &self.potential;
        for w in outer.windows(2) {
            for (u1, w1) in rule.on_interval(w[0], w[1]) {
                let mut inner = self.radial_cuts(l - u1, subdivisions);
                if u1 < l - u1 {
                    inner.push(u1);
                    inner.sort_by(|a, b| a.partial_cmp(b).unwrap());
                    inner.dedup();
                }
                for iw in inner.windows(2) {
                    for (u2, w2) in rule.on_interval(iw[0], iw[1]) {
                        let v =
                            p.regular_value(u1) + p.regular_value(u2) + p.regular_value(u1 + u2);
                        let (mut k_acc, mut p_acc, mut n_acc) = (0.0, 0.0, 0.0);
                        for (x1, wx) in rule.on_interval(0.0, l - u1 - u2) {
                            let x = [x1, x1 + u1, x1 + u1 + u2];
                            let (psi, g) = self.three_body(&x);
                            k_acc += wx * (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]);
                            n_acc += wx * psi * psi;
                            p_acc += wx * v * psi * psi;
                        }
                        let wt = 6.0 * w1 * w2;
                        kin.push(wt * k_acc);
                        pot.push(wt * p_acc);
                        norm.push(wt * n_acc);
                    }
                }
            }
        }
        // Each of the three pairs sees the spike; integrate over the plane
        // x_a - x_b = x0 (both signs for x0 > 0) and the free third coordinate.
        for (x0, h) in p.spikes() {
            if x0 >= l {
                continue;
            }
            let factor = if x0 == 0.0 { 3.0 * h } else { 6.0 * h };
            let plane = rule.integrate(0.0, l - x0, |s| {
                let mut cuts = vec![0.0, s, s + x0, l];
                cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
                cuts.dedup();
                let mut acc = 0.0;
                for c in cuts.windows(2) {
                    acc += rule.integrate(c[0], c[1], |t| self.value(&[s, s + x0, t]).powi(2));
                }
                acc
            });
            pot.push(factor * plane);
        }
        (pairwise_sum(&kin), pairwise_sum(&pot), pairwise_sum(&norm))
    }

    /// Largest jump of the state across the healing scale over samples.
    pub fn continuity_defect(&self, samples: usize) -> f64 {
        if self.n != 2 || self.b >= self.length {
            return 0.0;
        }
        let l = self.length;
        let b = self.b;
        let inner = b * self.scattering.value(b);
        let mut worst: f64 = 0.0;
        for i in 0..samples {
            let x1 = (l - b) * (i as f64 + 0.5) / samples as f64;
            let (q, _, _) = self.pair_factor(x1, x1 + b);
            worst = worst.max(((inner - b) * q).abs());
        }
        worst
    }
}

/// Builds the trial state at healing scale `b`.
pub fn build_trial(n: usize, length: f64, p: &Potential, b: f64) -> Result<TrialState> {
    if !(n == 2 || n == 3) {
        return Err(Error::InvalidParameter(format!(
            "trial states are available for N = 2 or 3, got {n}"
        )));
    }
    let range = p.range();
    if !(b.is_finite() && b > range) {
        return Err(Error::InvalidScale(format!(
            "healing scale b = {b} must exceed the range R0 = {range}"
        )));
    }
    if n == 3 && p.hard_core_bands().any(|(inner, _)| inner > 0.0) {
        return Err(Error::InvalidTrial(
            "three-body trial states do not support hard-core bands away from contact".into(),
        ));
    }
    let ensemble = FermiEnsemble::new(n, length)?;
    let scattering = solve_scattering(p, Channel::Even, b)?;
    let mut warnings = Vec::new();
    if b >= 0.5 * length {
        warnings.push(format!("b = {b} is not small compared with L = {length}"));
    }
    if let Some(a) = scattering.a.finite() {
        if a.abs() >= 0.5 * b {
            warnings.push(format!(
                "|a| = {} is not small compared with b = {b}",
                a.abs()
            ));
        }
    }
    if n == 3 {
        warnings.push(
            "three-body state: kinetic energy across the closest-pair switch is evaluated pointwise".into(),
        );
    }
    let state = TrialState {
        n,
        length,
        potential: p.clone(),
        b,
        scattering,
        ensemble,
        warnings,
    };
    let defect = state.continuity_defect(64);
    let scale = 4.0 * (2.0 / length) * b;
    if defect > 1e-10 * scale.max(1.0) {
        return Err(Error::Internal(format!(
            "trial state is discontinuous at the healing scale (jump {defect:e})"
        )));
    }
    Ok(state)
}

/// Energy of the trial state with the default order.
pub fn trial_energy(t: &TrialState, m: usize) -> Result<TrialEnergy> {
    t.energy(m)
}

/// Healing scale chosen in the upper-bound construction.
pub fn healing_scale(n: usize, length: f64, a: f64, range: f64) -> f64 {
    let rho = n as f64 / length;
    (rho.powf(-0.2) * a.abs().powf(0.8)).max(range)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UpperBound {
    pub value: f64,
    pub leading: f64,
    pub b: f64,
    pub a: f64,
    pub first_order: f64,
    pub error_terms: f64,
    pub c_u: f64,
}

/// Closed-form upper envelope with healing scale `b = max(rho^{-1/5}|a|^{4/5}, R0)`.
pub fn analytic_upper_bound(n: usize, length: f64, p: &Potential, c_u: f64) -> Result<UpperBound> {
    if n == 0 || !(length > 0.0) {
        return Err(Error::InvalidParameter("need N >= 1 and L > 0".into()));
    }
    let rho = n as f64 / length;
    let range = p.range();
    let a = if p.is_free() {
        0.0
    } else {
        solve_scattering(p, Channel::Even, range.max(1.0) * 2.0 + 1.0)?.length()?
    };
    let b = healing_scale(n, length, a, range);
    let first_order = if a == 0.0 {
        0.0
    } else {
        if b <= a {
            return Err(Error::InvalidScale(format!(
                "healing scale b = {b} does not exceed a = {a}"
            )));
        }
        2.0 * rho * a * b / (b - a)
    };
    let error_terms = ((rho * a.abs()).powf(1.2) + (rho * range).powf(1.5))
        * (1.0 + rho * range * range * p.regular_mass()).sqrt()
        + 1.0 / n as f64;
    let leading = n as f64 * PI * PI / 3.0 * rho * rho;
    Ok(UpperBound {
        value: leading * (1.0 + first_order + c_u * error_terms),
        leading,
        b,
        a,
        first_order,
        error_terms,
        c_u,
    })
}
