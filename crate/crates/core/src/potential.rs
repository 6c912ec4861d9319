//! Symmetric, finite-range, repulsive pair interactions.
//!
//! An interaction is stored structurally as a list of components acting on
//! the relative coordinate `|x|`: hard-core exclusion bands, pairs of delta
//! spikes and a piecewise-constant regular part. Nothing is ever sampled or
//! mollified, so every consumer (scattering solver, lattice oracle, trial
//! state quadrature) sees the exact measure.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One term of the interaction, defined on `|x|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialComponent {
    /// Infinite wall on `inner <= |x| <= outer`. `inner == outer` is an
    /// impenetrable point (zero boundary condition at `|x| = inner`).
    HardCoreBand { inner: f64, outer: f64 },
    /// `strength * (delta_{-position} + delta_{position})`; at `position == 0`
    /// a single spike `strength * delta_0`.
    DeltaSpike { position: f64, strength: f64 },
    /// Value `values[k]` on `breakpoints[k] <= |x| < breakpoints[k + 1]`,
    /// with `breakpoints[0] == 0`.
    PiecewiseConstant {
        breakpoints: Vec<f64>,
        values: Vec<f64>,
    },
}

impl PotentialComponent {
    /// Largest radius on which the component is supported.
    pub fn outer_radius(&self) -> f64 {
        match self {
            PotentialComponent::HardCoreBand { outer, .. } => *outer,
            PotentialComponent::DeltaSpike { position, .. } => *position,
            PotentialComponent::PiecewiseConstant { breakpoints, .. } => {
                *breakpoints.last().unwrap_or(&0.0)
            }
        }
    }

    /// Integral of the regular part over the whole line.
    pub fn regular_mass(&self) -> f64 {
        match self {
            PotentialComponent::HardCoreBand { .. } => 0.0,
            PotentialComponent::DeltaSpike { position, strength } => {
                if *position == 0.0 {
                    *strength
                } else {
                    2.0 * strength
                }
            }
            PotentialComponent::PiecewiseConstant {
                breakpoints,
                values,
            } => breakpoints
                .windows(2)
                .zip(values)
                .map(|(w, v)| 2.0 * v * (w[1] - w[0]))
                .sum(),
        }
    }

    fn validate(&self) -> std::result::Result<(), String> {
        let finite_nonneg = |v: f64| v.is_finite() && v >= 0.0;
        match self {
            PotentialComponent::HardCoreBand { inner, outer } => {
                if !finite_nonneg(*inner) || !finite_nonneg(*outer) {
                    return Err(format!(
                        "hard-core radii must be finite and >= 0, got [{inner}, {outer}]"
                    ));
                }
                if outer < inner {
                    return Err(format!(
                        "hard-core band needs x1 <= x2, got [{inner}, {outer}]"
                    ));
                }
            }
            PotentialComponent::DeltaSpike { position, strength } => {
                if !finite_nonneg(*position) {
                    return Err(format!(
                        "delta position must be finite and >= 0, got {position}"
                    ));
                }
                if !(strength.is_finite() && *strength > 0.0) {
                    return Err(format!(
                        "delta strength must be finite and > 0, got {strength}"
                    ));
                }
            }
            PotentialComponent::PiecewiseConstant {
                breakpoints,
                values,
            } => {
                if breakpoints.len() < 2 {
                    return Err("piecewise-constant part needs at least two breakpoints".into());
                }
                if breakpoints[0] != 0.0 {
                    return Err(format!(
                        "first breakpoint must be 0, got {}",
                        breakpoints[0]
                    ));
                }
                if breakpoints
                    .windows(2)
                    .any(|w| !(w[1] > w[0]) || !w[1].is_finite())
                {
                    return Err("breakpoints must be finite and strictly increasing".into());
                }
                if values.len() + 1 != breakpoints.len() {
                    return Err(format!(
                        "expected {} values for {} breakpoints, got {}",
                        breakpoints.len() - 1,
                        breakpoints.len(),
                        values.len()
                    ));
                }
                if let Some(v) = values.iter().find(|v| !finite_nonneg(**v)) {
                    return Err(format!(
                        "piecewise-constant values must be finite and >= 0, got {v}"
                    ));
                }
            }
        }
        Ok(())
    }

    fn sort_key(&self) -> (u8, f64, f64) {
        match self {
            PotentialComponent::HardCoreBand { inner, outer } => (0, *inner, *outer),
            PotentialComponent::DeltaSpike { position, strength } => (1, *position, *strength),
            PotentialComponent::PiecewiseConstant {
                breakpoints,
                values,
            } => (2, *breakpoints.last().unwrap_or(&0.0), values.iter().sum()),
        }
    }
}

/// A validated interaction `v = v_reg + v_hc` with range `R0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Potential {
    components: Vec<PotentialComponent>,
    range: f64,
}

impl Potential {
    /// Validates the components and stores them in canonical order.
    pub fn new(mut components: Vec<PotentialComponent>) -> Result<Self> {
        for c in &components {
            c.validate().map_err(Error::InvalidParameter)?;
        }
        components.sort_by(|a, b| {
            a.sort_key()
                .partial_cmp(&b.sort_key())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let range = components
            .iter()
            .map(PotentialComponent::outer_radius)
            .fold(0.0, f64::max);
        Ok(Potential { components, range })
    }

    /// The free interaction `v = 0`.
    pub fn free() -> Self {
        Potential {
            components: Vec::new(),
            range: 0.0,
        }
    }

    /// Lieb-Liniger contact interaction `2c * delta_0`.
    pub fn lieb_liniger(c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "Lieb-Liniger coupling must be > 0, got {c}"
            )));
        }
        Potential::new(vec![PotentialComponent::DeltaSpike {
            position: 0.0,
            strength: 2.0 * c,
        }])
    }

    /// Hard rods of the given diameter.
    pub fn hard_core(diameter: f64) -> Result<Self> {
        if !(diameter.is_finite() && diameter > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "hard-core diameter must be > 0, got {diameter}"
            )));
        }
        Potential::new(vec![PotentialComponent::HardCoreBand {
            inner: 0.0,
            outer: diameter,
        }])
    }

    /// Square barrier of height `height` on `|x| < radius`.
    pub fn square_barrier(height: f64, radius: f64) -> Result<Self> {
        Potential::new(vec![PotentialComponent::PiecewiseConstant {
            breakpoints: vec![0.0, radius],
            values: vec![height],
        }])
    }

    /// Returns a new potential with `component` added.
    pub fn with(&self, component: PotentialComponent) -> Result<Self> {
        let mut components = self.components.clone();
        components.push(component);
        Potential::new(components)
    }

    pub fn components(&self) -> &[PotentialComponent] {
        &self.components
    }

    /// Range `R0`: `v(x) = 0` for `|x| > R0`.
    pub fn range(&self) -> f64 {
        self.range
    }

    pub fn is_free(&self) -> bool {
        self.components.is_empty()
    }

    /// Total mass of the regular part; hard cores contribute nothing.
    pub fn regular_mass(&self) -> f64 {
        self.components
            .iter()
            .map(PotentialComponent::regular_mass)
            .sum()
    }

    /// True iff the wave function is forced to vanish at contact.
    pub fn is_impenetrable(&self) -> bool {
        self.components
            .iter()
            .any(|c| matches!(c, PotentialComponent::HardCoreBand { inner, .. } if *inner == 0.0))
    }

    pub fn has_hard_core(&self) -> bool {
        self.hard_core_bands().next().is_some()
    }

    pub fn hard_core_bands(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.components.iter().filter_map(|c| match c {
            PotentialComponent::HardCoreBand { inner, outer } => Some((*inner, *outer)),
            _ => None,
        })
    }

    /// Outermost hard-core radius, if any band is present.
    pub fn hard_core_edge(&self) -> Option<f64> {
        self.hard_core_bands().map(|(_, o)| o).reduce(f64::max)
    }

    /// True iff `|x|` lies in a closed hard-core band.
    pub fn in_hard_core(&self, x: f64) -> bool {
        let r = x.abs();
        self.hard_core_bands().any(|(i, o)| r >= i && r <= o)
    }

    /// Total strength of spikes sitting at the origin.
    pub fn contact_strength(&self) -> f64 {
        self.spikes()
            .filter(|(p, _)| *p == 0.0)
            .map(|(_, h)| h)
            .sum()
    }

    /// All delta spikes as `(position, strength)`.
    pub fn spikes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.components.iter().filter_map(|c| match c {
            PotentialComponent::DeltaSpike { position, strength } => Some((*position, *strength)),
            _ => None,
        })
    }

    /// Value of the piecewise-constant part at `|x|` (zero beyond `R0`).
    pub fn regular_value(&self, x: f64) -> f64 {
        let r = x.abs();
        self.components
            .iter()
            .map(|c| match c {
                PotentialComponent::PiecewiseConstant {
                    breakpoints,
                    values,
                } => breakpoints
                    .windows(2)
                    .zip(values)
                    .find(|(w, _)| r >= w[0] && r < w[1])
                    .map_or(0.0, |(_, v)| *v),
                _ => 0.0,
            })
            .sum()
    }

    /// Sorted, deduplicated radii in `[0, R0]` where the potential changes
    /// (band edges, spike positions, step breakpoints).
    pub fn event_points(&self) -> Vec<f64> {
        let mut pts = vec![0.0];
        for c in &self.components {
            match c {
                PotentialComponent::HardCoreBand { inner, outer } => {
                    pts.push(*inner);
                    pts.push(*outer);
                }
                PotentialComponent::DeltaSpike { position, .. } => pts.push(*position),
                PotentialComponent::PiecewiseConstant { breakpoints, .. } => {
                    pts.extend_from_slice(breakpoints)
                }
            }
        }
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup();
        pts
    }

    /// Symmetric-decreasing in the sense used for boundary-condition
    /// comparison: `v(c x) >= v(x)` for any contraction `c`.
    pub fn is_symmetric_decreasing(&self) -> bool {
        self.components.iter().all(|c| match c {
            PotentialComponent::HardCoreBand { inner, .. } => *inner == 0.0,
            PotentialComponent::DeltaSpike { position, .. } => *position == 0.0,
            PotentialComponent::PiecewiseConstant { values, .. } => {
                values.windows(2).all(|w| w[1] <= w[0])
            }
        })
    }

    /// Short human-readable description used in reports.
    pub fn digest(&self) -> String {
        if self.components.is_empty() {
            return "free".into();
        }
        self.components
            .iter()
            .map(|c| match c {
                PotentialComponent::HardCoreBand { inner, outer } => {
                    format!("hardcore[{inner},{outer}]")
                }
                PotentialComponent::DeltaSpike { position, strength } => {
                    format!("delta(x0={position},h={strength})")
                }
                PotentialComponent::PiecewiseConstant {
                    breakpoints,
                    values,
                } => {
                    format!("steps(t={breakpoints:?},v={values:?})")
                }
            })
            .collect::<Vec<_>>()
            .join("+")
    }
}
