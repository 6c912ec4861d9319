//! Zero-energy two-body scattering on `[-R, R]`.
//!
//! The equation `f'' = v f / 2` is solved exactly segment by segment on the
//! half-line: between event points the potential is constant, so the solution
//! is linear (`v = 0`) or a `cosh`/`sinh` combination, and a delta spike of
//! strength `h` produces the derivative jump `f' -> f' + h f / 2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::Potential;
use crate::quadrature::{pairwise_sum, GaussLegendre};

/// Boundary condition at `x = -R`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    /// `f(R) = f(-R) = 1`.
    Even,
    /// `f(R) = -f(-R) = 1`.
    Odd,
}

impl std::str::FromStr for Channel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "even" => Ok(Channel::Even),
            "odd" => Ok(Channel::Odd),
            other => Err(Error::InvalidParameter(format!(
                "unknown channel '{other}'"
            ))),
        }
    }
}

/// Scattering length, which does not exist for the free interaction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "lowercase")]
pub enum ScatteringLength {
    Finite(f64),
    Undefined,
}

impl ScatteringLength {
    pub fn finite(self) -> Option<f64> {
        match self {
            ScatteringLength::Finite(a) => Some(a),
            ScatteringLength::Undefined => None,
        }
    }
}

/// Segments with `k * width` above this are split so `cosh`/`sinh` stay tame.
const MAX_EXPONENT: f64 = 40.0;
const RESCALE_THRESHOLD: f64 = 1e100;

#[derive(Debug, Clone, PartialEq)]
struct Segment {
    start: f64,
    end: f64,
    /// `sqrt(v / 2)` on the segment; zero for free segments.
    k: f64,
    /// `f` at `start`.
    f: f64,
    /// Right derivative at `start` (after any spike jump located there).
    df: f64,
}

impl Segment {
    fn eval(&self, x: f64) -> (f64, f64) {
        let s = x - self.start;
        if self.k == 0.0 {
            (self.f + self.df * s, self.df)
        } else {
            let (sh, ch) = ((self.k * s).sinh(), (self.k * s).cosh());
            (
                self.f * ch + self.df / self.k * sh,
                self.f * self.k * sh + self.df * ch,
            )
        }
    }

    /// `int_start^end 2 f'^2 + v f^2`.
    fn energy(&self) -> f64 {
        let width = self.end - self.start;
        if self.k == 0.0 {
            2.0 * self.df * self.df * width
        } else {
            let k = self.k;
            let alpha = self.f;
            let beta = self.df / k;
            let sh = (k * width).sinh();
            k * ((alpha * alpha + beta * beta) * (2.0 * k * width).sinh()
                + 4.0 * alpha * beta * sh * sh)
        }
    }
}

/// Solution of the scattering problem at radius `R`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringResult {
    pub channel: Channel,
    pub potential: Potential,
    pub radius: f64,
    pub a: ScatteringLength,
    /// Value of the energy functional at `f0`.
    pub energy: f64,
    segments: Vec<Segment>,
    /// Spikes with `x0 > 0` as `(x0, h)`, plus contact strength at the origin.
    contact: f64,
}

fn sub_segments(start: f64, end: f64, k: f64) -> Vec<(f64, f64)> {
    let pieces = ((k * (end - start)) / MAX_EXPONENT).ceil().max(1.0) as usize;
    (0..pieces)
        .map(|i| {
            let a = start + (end - start) * i as f64 / pieces as f64;
            let b = if i + 1 == pieces {
                end
            } else {
                start + (end - start) * (i + 1) as f64 / pieces as f64
            };
            (a, b)
        })
        .collect()
}

/// Solves `f'' = v f / 2` on `[0, R]` with the requested symmetry.
pub fn solve_scattering(p: &Potential, channel: Channel, radius: f64) -> Result<ScatteringResult> {
    let range = p.range();
    if !(radius.is_finite() && radius > range && radius > 0.0) {
        return Err(Error::InvalidRadius { radius, range });
    }

    let contact = p.contact_strength();
    let (start, mut f, mut df) = match (p.hard_core_edge(), channel) {
        (Some(edge), _) => (edge, 0.0, 1.0),
        (None, Channel::Even) => (0.0, 1.0, contact / 4.0),
        (None, Channel::Odd) => (0.0, 0.0, 1.0),
    };

    let mut events: Vec<f64> = p
        .event_points()
        .into_iter()
        .filter(|&x| x > start)
        .collect();
    events.push(radius);
    let mut segments: Vec<Segment> = Vec::new();
    let mut left = start;
    for &right in &events {
        if left > 0.0 {
            for (x0, h) in p.spikes() {
                if x0 == left {
                    df += 0.5 * h * f;
                }
            }
        }
        let v = p.regular_value(0.5 * (left + right));
        let k = (0.5 * v).sqrt();
        for (a, b) in sub_segments(left, right, k) {
            let seg = Segment {
                start: a,
                end: b,
                k,
                f,
                df,
            };
            let (fb, dfb) = seg.eval(b);
            segments.push(seg);
            f = fb;
            df = dfb;
            if f.abs() > RESCALE_THRESHOLD {
                let s = 1.0 / f.abs();
                for seg in &mut segments {
                    seg.f *= s;
                    seg.df *= s;
                }
                f *= s;
                df *= s;
            }
        }
        left = right;
    }

    if !(f > 0.0 && f.is_finite()) {
        return Err(Error::Internal(format!(
            "scattering solution has f(R) = {f}, expected a positive value"
        )));
    }
    let scale = 1.0 / f;
    for seg in &mut segments {
        seg.f *= scale;
        seg.df *= scale;
    }

    let mut result = ScatteringResult {
        channel,
        potential: p.clone(),
        radius,
        a: ScatteringLength::Undefined,
        energy: 0.0,
        segments,
        contact,
    };

    let (f_r0, df_r0) = result.eval_right(range);
    result.a = if df_r0 == 0.0 {
        if p.is_free() && channel == Channel::Even {
            ScatteringLength::Undefined
        } else {
            return Err(Error::Internal(
                "vanishing derivative at the potential range".into(),
            ));
        }
    } else {
        ScatteringLength::Finite(range - f_r0 / df_r0)
    };
    result.energy = result.functional();
    Ok(result)
}

impl ScatteringResult {
    /// Finite scattering length, or an error for the free interaction.
    pub fn length(&self) -> Result<f64> {
        self.a.finite().ok_or_else(|| {
            Error::InvalidParameter("the free interaction has no scattering length".into())
        })
    }

    /// `(f, f')` at `x >= 0`, derivative taken from the right.
    fn eval_right(&self, x: f64) -> (f64, f64) {
        let first = &self.segments[0];
        if x < first.start {
            return (0.0, 0.0);
        }
        let idx = self
            .segments
            .partition_point(|s| s.start <= x)
            .saturating_sub(1);
        self.segments[idx].eval(x)
    }

    /// `f0(x)` for any real `x`, extended by symmetry and linearly past `R`.
    pub fn value(&self, x: f64) -> f64 {
        let (f, _) = self.eval_right(x.abs());
        match self.channel {
            Channel::Odd if x < 0.0 => -f,
            _ => f,
        }
    }

    /// `f0'(x)`; at spikes the one-sided value away from the origin.
    pub fn derivative(&self, x: f64) -> f64 {
        let (_, d) = self.eval_right(x.abs());
        match self.channel {
            Channel::Even if x < 0.0 => -d,
            _ => d,
        }
    }

    /// Samples `(x, f0(x))` at `n + 1` equispaced points of `[0, R]`.
    pub fn samples(&self, n: usize) -> Vec<(f64, f64)> {
        let n = n.max(1);
        (0..=n)
            .map(|i| {
                let x = self.radius * i as f64 / n as f64;
                (x, self.value(x))
            })
            .collect()
    }

    /// `4 / (R - a)`, or zero for the free interaction.
    pub fn energy_bound(&self) -> f64 {
        match self.a {
            ScatteringLength::Finite(a) => 4.0 / (self.radius - a),
            ScatteringLength::Undefined => 0.0,
        }
    }

    fn functional(&self) -> f64 {
        let bulk: Vec<f64> = self.segments.iter().map(Segment::energy).collect();
        let mut total = 2.0 * pairwise_sum(&bulk);
        let f0 = self.value(0.0);
        total += self.contact * f0 * f0;
        for (x0, h) in self.potential.spikes() {
            if x0 > 0.0 {
                let fx = self.value(x0);
                total += 2.0 * h * fx * fx;
            }
        }
        total
    }
}

/// Value of the energy functional at the scattering solution.
pub fn scattering_energy(r: &ScatteringResult) -> f64 {
    r.functional()
}

/// A trial profile on `[-R, R]` that can be fed to the Dyson comparison.
pub trait TrialProfile {
    fn value(&self, x: f64) -> f64;
    /// `int_{-R}^{R} 2|f'|^2 + v|f|^2` for the given interaction.
    fn energy_functional(&self, p: &Potential, radius: f64) -> f64;
    /// True iff the profile vanishes on every hard-core band.
    fn respects_hard_core(&self, p: &Potential) -> bool;
}

impl TrialProfile for ScatteringResult {
    fn value(&self, x: f64) -> f64 {
        ScatteringResult::value(self, x)
    }

    fn energy_functional(&self, _p: &Potential, _radius: f64) -> f64 {
        self.functional()
    }

    fn respects_hard_core(&self, _p: &Potential) -> bool {
        true
    }
}

/// Continuous piecewise-linear profile through `(nodes[i], values[i])`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinearTrial {
    nodes: Vec<f64>,
    values: Vec<f64>,
}

impl PiecewiseLinearTrial {
    pub fn new(nodes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 || nodes.len() != values.len() {
            return Err(Error::InvalidTrial(
                "need at least two nodes and one value per node".into(),
            ));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidTrial(
                "nodes must be strictly increasing".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidTrial("values must be finite".into()));
        }
        Ok(PiecewiseLinearTrial { nodes, values })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    fn slope(&self, i: usize) -> f64 {
        (self.values[i + 1] - self.values[i]) / (self.nodes[i + 1] - self.nodes[i])
    }
}

impl TrialProfile for PiecewiseLinearTrial {
    fn value(&self, x: f64) -> f64 {
        let n = self.nodes.len();
        if x <= self.nodes[0] {
            return self.values[0];
        }
        if x >= self.nodes[n - 1] {
            return self.values[n - 1];
        }
        let i = self.nodes.partition_point(|&t| t <= x) - 1;
        self.values[i] + self.slope(i) * (x - self.nodes[i])
    }

    fn energy_functional(&self, p: &Potential, radius: f64) -> f64 {
        let mut cuts: Vec<f64> = self.nodes.clone();
        for t in p.event_points() {
            cuts.push(t);
            cuts.push(-t);
        }
        cuts.retain(|t| t.abs() <= radius);
        cuts.push(-radius);
        cuts.push(radius);
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cuts.dedup();

        // Two Gauss points integrate f^2 exactly on each linear piece.
        let rule = GaussLegendre::new(2);
        let mut terms = Vec::with_capacity(cuts.len());
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let mid = 0.5 * (a + b);
            if p.in_hard_core(mid) {
                continue;
            }
            let i = self
                .nodes
                .partition_point(|&t| t <= mid)
                .clamp(1, self.nodes.len() - 1)
                - 1;
            let d = self.slope(i);
            let v = p.regular_value(mid);
            let pot = if v > 0.0 {
                v * rule.integrate(a, b, |x| {
                    let f = self.value(x);
                    f * f
                })
            } else {
                0.0
            };
            terms.push(2.0 * d * d * (b - a) + pot);
        }
        let mut total = pairwise_sum(&terms);
        for (x0, h) in p.spikes() {
            if x0 == 0.0 {
                total += h * self.value(0.0).powi(2);
            } else {
                total += h * (self.value(x0).powi(2) + self.value(-x0).powi(2));
            }
        }
        total
    }

    fn respects_hard_core(&self, p: &Potential) -> bool {
        p.hard_core_bands().all(|(inner, outer)| {
            let mut probes = vec![inner, outer, -inner, -outer];
            probes.extend(
                self.nodes
                    .iter()
                    .copied()
                    .filter(|t| t.abs() >= inner && t.abs() <= outer),
            );
            probes.iter().all(|&x| self.value(x).abs() <= 1e-14)
        })
    }
}

/// Outcome of comparing a trial functional against `4 / (R - a)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DysonCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Relative slack allowed in the Dyson comparison.
pub const DYSON_TOLERANCE: f64 = 1e-9;

/// Checks `int 2|f'|^2 + v|f|^2 >= 4 / (R - a)` for an admissible trial.
pub fn check_dyson_inequality(
    r: &ScatteringResult,
    trial: &dyn TrialProfile,
) -> Result<DysonCheck> {
    let radius = r.radius;
    let right = trial.value(radius);
    let left = trial.value(-radius);
    let expected_left = match r.channel {
        Channel::Even => 1.0,
        Channel::Odd => -1.0,
    };
    if (right - 1.0).abs() > 1e-12 || (left - expected_left).abs() > 1e-12 {
        return Err(Error::InvalidTrial(format!(
            "boundary values f(-R) = {left}, f(R) = {right} do not match the channel"
        )));
    }
    if !trial.respects_hard_core(&r.potential) {
        return Err(Error::InvalidTrial(
            "trial does not vanish on the hard-core support".into(),
        ));
    }
    let lhs = trial.energy_functional(&r.potential, radius);
    let rhs = r.energy_bound();
    Ok(DysonCheck {
        lhs,
        rhs,
        holds: lhs >= rhs - DYSON_TOLERANCE * rhs.abs().max(1.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::PotentialComponent;

    fn a_of(p: &Potential, ch: Channel, r: f64) -> f64 {
        solve_scattering(p, ch, r).unwrap().length().unwrap()
    }

    #[test]
    fn lieb_liniger_length() {
        for c in [0.5, 1.0, 10.0] {
            let a = a_of(&Potential::lieb_liniger(c).unwrap(), Channel::Even, 1.0);
            assert!((a + 2.0 / c).abs() <= 1e-12 * (2.0 / c));
        }
    }

    #[test]
    fn hard_core_length_both_channels() {
        let p = Potential::hard_core(0.3).unwrap();
        assert_eq!(a_of(&p, Channel::Even, 1.0), 0.3);
        assert_eq!(a_of(&p, Channel::Odd, 1.0), 0.3);
    }

    #[test]
    fn odd_channel_ignores_contact_delta() {
        let p = Potential::lieb_liniger(3.0).unwrap();
        assert_eq!(a_of(&p, Channel::Odd, 1.0), 0.0);
    }

    #[test]
    fn square_barrier_closed_form() {
        for (v0, r0) in [(5.0, 0.2), (100.0, 0.5), (0.01, 1.0), (1e6, 0.3)] {
            let p = Potential::square_barrier(v0, r0).unwrap();
            let k = (v0 / 2.0f64).sqrt();
            let expected = r0 - 1.0 / ((k * r0).tanh() * k);
            let a = a_of(&p, Channel::Even, 2.0 * r0);
            assert!(
                (a - expected).abs() <= 1e-12 * expected.abs().max(1.0),
                "{a} vs {expected}"
            );
        }
    }

    #[test]
    fn free_interaction_has_undefined_length() {
        let r = solve_scattering(&Potential::free(), Channel::Even, 1.0).unwrap();
        assert_eq!(r.a, ScatteringLength::Undefined);
        assert_eq!(r.energy, 0.0);
        assert_eq!(r.value(0.3), 1.0);
        let odd = solve_scattering(&Potential::free(), Channel::Odd, 1.0).unwrap();
        assert_eq!(odd.a, ScatteringLength::Finite(0.0));
    }

    #[test]
    fn rejects_radius_inside_range() {
        let p = Potential::hard_core(0.3).unwrap();
        assert!(matches!(
            solve_scattering(&p, Channel::Even, 0.3),
            Err(Error::InvalidRadius { .. })
        ));
        assert!(
            solve_scattering(&Potential::lieb_liniger(1.0).unwrap(), Channel::Even, 0.0).is_err()
        );
    }

    #[test]
    fn energy_matches_bound_and_examples() {
        let r =
            solve_scattering(&Potential::lieb_liniger(1.0).unwrap(), Channel::Even, 1.0).unwrap();
        assert!((r.energy - 4.0 / 3.0).abs() < 1e-14);
        let r = solve_scattering(&Potential::hard_core(0.3).unwrap(), Channel::Even, 1.0).unwrap();
        assert!((r.energy - 4.0 / 0.7).abs() < 1e-12);
    }

    #[test]
    fn solution_is_linear_outside_range_and_jumps_at_spikes() {
        let p = Potential::new(vec![
            PotentialComponent::DeltaSpike {
                position: 0.2,
                strength: 3.0,
            },
            PotentialComponent::PiecewiseConstant {
                breakpoints: vec![0.0, 0.1],
                values: vec![7.0],
            },
        ])
        .unwrap();
        let r = solve_scattering(&p, Channel::Even, 1.5).unwrap();
        let a = r.length().unwrap();
        for x in [0.2, 0.5, 1.0, 1.5] {
            assert!((r.value(x) - (x - a) / (1.5 - a)).abs() < 1e-13);
        }
        let jump = r.derivative(0.2) - r.derivative(0.2 - 1e-13);
        assert!((jump - 1.5 * r.value(0.2)).abs() < 1e-9);
        assert!((r.energy - r.energy_bound()).abs() < 1e-12 * r.energy);
    }

    #[test]
    fn hard_core_band_away_from_contact() {
        let p = Potential::new(vec![PotentialComponent::HardCoreBand {
            inner: 0.1,
            outer: 0.25,
        }])
        .unwrap();
        let r = solve_scattering(&p, Channel::Even, 1.0).unwrap();
        assert_eq!(r.length().unwrap(), 0.25);
        assert_eq!(r.value(0.05), 0.0);
        assert_eq!(r.value(0.2), 0.0);
    }

    #[test]
    fn dyson_with_minimizer_and_constant() {
        let p = Potential::lieb_liniger(2.0).unwrap();
        let r = solve_scattering(&p, Channel::Even, 1.0).unwrap();
        let own = check_dyson_inequality(&r, &r).unwrap();
        assert!(own.holds);
        assert!((own.lhs - own.rhs).abs() < 1e-12);
        let one = PiecewiseLinearTrial::new(vec![-1.0, 1.0], vec![1.0, 1.0]).unwrap();
        let chk = check_dyson_inequality(&r, &one).unwrap();
        assert!((chk.lhs - 4.0).abs() < 1e-14);
        assert!(chk.holds);
    }

    #[test]
    fn dyson_rejects_trials_entering_the_core() {
        let p = Potential::hard_core(0.2).unwrap();
        let r = solve_scattering(&p, Channel::Even, 1.0).unwrap();
        let bad = PiecewiseLinearTrial::new(vec![-1.0, 1.0], vec![1.0, 1.0]).unwrap();
        assert!(matches!(
            check_dyson_inequality(&r, &bad),
            Err(Error::InvalidTrial(_))
        ));
        let good = PiecewiseLinearTrial::new(vec![-1.0, -0.2, 0.2, 1.0], vec![1.0, 0.0, 0.0, 1.0])
            .unwrap();
        let chk = check_dyson_inequality(&r, &good).unwrap();
        assert!(chk.holds);
        assert!((chk.lhs - chk.rhs).abs() < 1e-12);
    }
}
