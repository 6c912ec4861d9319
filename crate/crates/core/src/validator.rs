//! Energy expansion `N (pi^2/3) rho^2 (1 + 2 rho a)` with its error envelope,
//! the mapping of fermions and anyons onto bosonic problems, and the
//! end-to-end comparison against the lattice oracle.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::ed_oracle::{Boundary, OracleProblem, OracleSettings, Statistics};
use crate::error::{Error, Result};
use crate::potential::{Potential, PotentialComponent};
use crate::scattering::{solve_scattering, Channel};

/// Threshold on `rho |a|` and `rho R0` beyond which the expansion is flagged.
pub const DILUTE_WARN: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "kappa", rename_all = "lowercase")]
pub enum Symmetry {
    Bose,
    Fermi,
    /// Exchange phase `exp(i kappa)`, `kappa` in `[0, pi]`.
    Anyon(f64),
}

impl fmt::Display for Symmetry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symmetry::Bose => write!(f, "bose"),
            Symmetry::Fermi => write!(f, "fermi"),
            Symmetry::Anyon(k) => write!(f, "anyon({k})"),
        }
    }
}

impl FromStr for Symmetry {
    type Err = Error;
    /// Accepts `bose`, `fermi`, `anyon:<kappa>` and `anyon(<kappa>)`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        match t.as_str() {
            "bose" | "boson" | "bosons" => return Ok(Symmetry::Bose),
            "fermi" | "fermion" | "fermions" => return Ok(Symmetry::Fermi),
            _ => {}
        }
        let arg = t
            .strip_prefix("anyon:")
            .or_else(|| t.strip_prefix("anyon(").and_then(|r| r.strip_suffix(')')));
        match arg.map(parse_angle) {
            Some(Ok(k)) => Ok(Symmetry::Anyon(k)),
            _ => Err(Error::InvalidParameter(format!(
                "unknown symmetry '{s}' (expected bose, fermi or anyon:<kappa>)"
            ))),
        }
    }
}

/// Parses a number that may carry a factor of `pi`, e.g. `0.5`, `pi`,
/// `3pi/4` or `2*pi`.
pub fn parse_angle(token: &str) -> Result<f64> {
    let t = token.trim().to_ascii_lowercase();
    let bad = || Error::InvalidParameter(format!("cannot parse number '{token}'"));
    if let Some((num, den)) = t.split_once('/') {
        return Ok(parse_angle(num)? / den.trim().parse::<f64>().map_err(|_| bad())?);
    }
    if let Some(rest) = t.strip_suffix("pi").map(str::trim) {
        let factor = match rest.trim_end_matches('*').trim() {
            "" => 1.0,
            f => f.parse::<f64>().map_err(|_| bad())?,
        };
        return Ok(factor * PI);
    }
    t.parse::<f64>().map_err(|_| bad())
}

/// A symmetry class together with the base contact coupling `c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymmetryMap {
    pub symmetry: Symmetry,
    pub coupling: f64,
}

impl SymmetryMap {
    pub fn new(symmetry: Symmetry, coupling: f64) -> Self {
        SymmetryMap { symmetry, coupling }
    }

    /// Contact strength of the mapped bosonic problem, `None` if impenetrable.
    pub fn effective_strength(&self) -> Result<Option<f64>> {
        let c = self.coupling;
        if !(c.is_finite() && c >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "coupling must be finite and >= 0, got {c}"
            )));
        }
        match self.symmetry {
            Symmetry::Bose => Ok(Some(2.0 * c)),
            Symmetry::Fermi => Ok(None),
            Symmetry::Anyon(k) => {
                if !(0.0..=PI).contains(&k) {
                    return Err(Error::InvalidParameter(format!(
                        "anyon parameter must lie in [0, pi], got {k}"
                    )));
                }
                if k == PI {
                    Ok(None)
                } else {
                    Ok(Some(2.0 * c / (0.5 * k).cos()))
                }
            }
        }
    }
}

/// Bosonic potential equivalent to `p` under the symmetry map.
pub fn map_symmetry(s: &SymmetryMap, p: &Potential) -> Result<Potential> {
    if let Symmetry::Anyon(_) = s.symmetry {
        if p.contact_strength() > 0.0 {
            return Err(Error::InvalidParameter(
                "anyonic interactions must carry their contact term through the coupling c".into(),
            ));
        }
    }
    match s.effective_strength()? {
        None => p.with(PotentialComponent::HardCoreBand {
            inner: 0.0,
            outer: 0.0,
        }),
        Some(h) if h > 0.0 => p.with(PotentialComponent::DeltaSpike {
            position: 0.0,
            strength: h,
        }),
        Some(_) => Ok(p.clone()),
    }
}

/// Even-channel scattering length, `None` for the free interaction.
pub fn scattering_length(p: &Potential) -> Result<Option<f64>> {
    if p.is_free() {
        return Ok(None);
    }
    let r = solve_scattering(p, Channel::Even, 2.0 * p.range() + 1.0)?;
    Ok(r.a.finite())
}

/// `N (pi^2/3) rho^2 (1 + 2 rho a)`.
pub fn expansion_energy(n: usize, length: f64, a: f64) -> f64 {
    let rho = n as f64 / length;
    n as f64 * PI * PI / 3.0 * rho * rho * (1.0 + 2.0 * rho * a)
}

/// Constants multiplying the error terms of the two-sided bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnvelopeConstants {
    pub c_u: f64,
    pub c_l: f64,
}

impl Default for EnvelopeConstants {
    fn default() -> Self {
        EnvelopeConstants { c_u: 1.0, c_l: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Envelope {
    pub leading: f64,
    /// `2 rho a` (relative to the leading term).
    pub first_order: f64,
    pub expansion: f64,
    /// `(rho |a|)^{6/5}`, `(rho R0)^{6/5}`, `N^{-2/3}`.
    pub terms: [f64; 3],
    pub constants: EnvelopeConstants,
    pub lower: f64,
    pub upper: f64,
}

pub fn envelope(
    n: usize,
    length: f64,
    a: f64,
    range: f64,
    constants: EnvelopeConstants,
) -> Envelope {
    let rho = n as f64 / length;
    let leading = n as f64 * PI * PI / 3.0 * rho * rho;
    let first_order = 2.0 * rho * a;
    let terms = [
        (rho * a.abs()).powf(1.2),
        (rho * range).powf(1.2),
        (n as f64).powf(-2.0 / 3.0),
    ];
    let sum: f64 = terms.iter().sum();
    let expansion = leading * (1.0 + first_order);
    Envelope {
        leading,
        first_order,
        expansion,
        terms,
        constants,
        lower: expansion - leading * constants.c_l * sum,
        upper: expansion + leading * constants.c_u * sum,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportInputs {
    pub n: usize,
    pub length: f64,
    pub rho: f64,
    pub potential: String,
    pub symmetry: Symmetry,
    pub coupling: f64,
}

/// One oracle energy compared with the expansion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleEnergy {
    pub energy: f64,
    pub error: f64,
    pub inside_envelope: bool,
    /// `|E - leading (1 + 2 rho a)| < |E - leading|`.
    pub first_order_improves: bool,
    pub levels: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleComparison {
    pub neumann: OracleEnergy,
    pub dirichlet: OracleEnergy,
    pub ordered: bool,
    pub settings: OracleSettings,
}

/// Everything derived from the mapped bosonic problem.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportOutcome {
    pub mapped_potential: String,
    pub scattering_length: Option<f64>,
    pub envelope: Envelope,
    pub oracle: Option<OracleComparison>,
    pub warnings: Vec<String>,
    pub verdict: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpansionReport {
    pub inputs: ReportInputs,
    #[serde(flatten)]
    pub outcome: ReportOutcome,
}

fn compare(result: &crate::ed_oracle::SpectralResult, env: &Envelope) -> OracleEnergy {
    let e = result.extrapolated;
    let err = result.error_estimate;
    OracleEnergy {
        energy: e,
        error: err,
        inside_envelope: e >= env.lower - err && e <= env.upper + err,
        first_order_improves: (e - env.expansion).abs() < (e - env.leading).abs(),
        levels: result.levels.iter().map(|l| l.energy).collect(),
    }
}

/// Maps the problem to bosons, evaluates the expansion and, if `oracle` is
/// given, compares with lattice energies under both boundary conditions.
///
/// With an oracle the verdict requires `E^N <= upper`, `E^D >= lower` and
/// `E^N <= E^D`, each up to the extrapolation error. Without one it checks
/// that the envelope brackets the expansion.
pub fn validate(
    n: usize,
    length: f64,
    p: &Potential,
    symmetry: SymmetryMap,
    constants: EnvelopeConstants,
    oracle: Option<OracleSettings>,
) -> Result<ExpansionReport> {
    if n == 0 || !(length.is_finite() && length > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need N >= 1 and L > 0, got N = {n}, L = {length}"
        )));
    }
    let mapped = map_symmetry(&symmetry, p)?;
    let a = scattering_length(&mapped)?;
    let rho = n as f64 / length;
    let env = envelope(n, length, a.unwrap_or(0.0), mapped.range(), constants);

    let mut warnings = Vec::new();
    if let Some(a) = a {
        if rho * a.abs() > DILUTE_WARN {
            warnings.push(format!("rho |a| = {} exceeds {DILUTE_WARN}", rho * a.abs()));
        }
    }
    if rho * mapped.range() > DILUTE_WARN {
        warnings.push(format!(
            "rho R0 = {} exceeds {DILUTE_WARN}",
            rho * mapped.range()
        ));
    }

    let comparison = match oracle {
        None => None,
        Some(settings) => {
            let problem = |bc| {
                OracleProblem::new(
                    n,
                    length,
                    bc,
                    mapped.clone(),
                    Statistics::Bose,
                    settings.points,
                )
            };
            let en = settings.run(&problem(Boundary::Neumann)?)?;
            let ed = settings.run(&problem(Boundary::Dirichlet)?)?;
            let slack = en.error_estimate + ed.error_estimate;
            Some(OracleComparison {
                ordered: en.extrapolated <= ed.extrapolated + slack,
                neumann: compare(&en, &env),
                dirichlet: compare(&ed, &env),
                settings,
            })
        }
    };
    let verdict = match &comparison {
        None => env.lower <= env.expansion && env.expansion <= env.upper,
        Some(c) => {
            c.ordered
                && c.neumann.energy <= env.upper + c.neumann.error
                && c.dirichlet.energy >= env.lower - c.dirichlet.error
        }
    };
    Ok(ExpansionReport {
        inputs: ReportInputs {
            n,
            length,
            rho,
            potential: p.digest(),
            symmetry: symmetry.symmetry,
            coupling: symmetry.coupling,
        },
        outcome: ReportOutcome {
            mapped_potential: mapped.digest(),
            scattering_length: a,
            envelope: env,
            oracle: comparison,
            warnings,
            verdict,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetry_accepts_pi_expressions() {
        assert_eq!(
            "anyon:pi/3".parse::<Symmetry>().unwrap(),
            Symmetry::Anyon(PI / 3.0)
        );
        assert_eq!(
            "anyon(3pi/4)".parse::<Symmetry>().unwrap(),
            Symmetry::Anyon(0.75 * PI)
        );
        assert_eq!(
            "anyon:0.5".parse::<Symmetry>().unwrap(),
            Symmetry::Anyon(0.5)
        );
        assert!("anyon:pie".parse::<Symmetry>().is_err());
    }

    #[test]
    fn expansion_arithmetic() {
        let e = expansion_energy(10, 100.0, -0.2);
        assert!((e - 10.0 * PI * PI / 3.0 * 0.01 * 0.96).abs() < 1e-15);
        assert!((e - 0.3158).abs() < 1e-4);
        assert_eq!(expansion_energy(4, 8.0, 0.0), 4.0 * PI * PI / 3.0 * 0.25);
    }

    #[test]
    fn anyon_couplings() {
        let p = Potential::free();
        let m = map_symmetry(&SymmetryMap::new(Symmetry::Anyon(0.0), 1.0), &p).unwrap();
        assert_eq!(m.contact_strength(), 2.0);
        let m = map_symmetry(&SymmetryMap::new(Symmetry::Anyon(2.0 * PI / 3.0), 1.0), &p).unwrap();
        assert!((m.contact_strength() - 4.0).abs() < 1e-12);
        let a = scattering_length(&m).unwrap().unwrap();
        assert!((a + 1.0).abs() < 1e-12);
        let m = map_symmetry(&SymmetryMap::new(Symmetry::Anyon(PI), 1.0), &p).unwrap();
        assert!(m.is_impenetrable());
        assert_eq!(scattering_length(&m).unwrap(), Some(0.0));
    }

    #[test]
    fn rejects_bad_anyon_inputs() {
        let p = Potential::free();
        assert!(map_symmetry(&SymmetryMap::new(Symmetry::Anyon(3.5), 1.0), &p).is_err());
        assert!(map_symmetry(&SymmetryMap::new(Symmetry::Anyon(-0.1), 1.0), &p).is_err());
        let ll = Potential::lieb_liniger(1.0).unwrap();
        assert!(map_symmetry(&SymmetryMap::new(Symmetry::Anyon(1.0), 1.0), &ll).is_err());
    }

    #[test]
    fn parses_symmetries() {
        assert_eq!("Bose".parse::<Symmetry>().unwrap(), Symmetry::Bose);
        assert_eq!("fermi".parse::<Symmetry>().unwrap(), Symmetry::Fermi);
        assert_eq!(
            "anyon:0.5".parse::<Symmetry>().unwrap(),
            Symmetry::Anyon(0.5)
        );
        assert_eq!(
            "anyon(1)".parse::<Symmetry>().unwrap(),
            Symmetry::Anyon(1.0)
        );
        assert!("para".parse::<Symmetry>().is_err());
    }

    #[test]
    fn envelope_brackets_expansion_and_sign_of_correction() {
        let c = EnvelopeConstants::default();
        let hc = envelope(10, 100.0, 0.1, 0.1, c);
        let delta = envelope(10, 100.0, -0.4, 0.0, c);
        assert!(hc.lower <= hc.expansion && hc.expansion <= hc.upper);
        assert!(hc.expansion > hc.leading);
        assert!(delta.expansion < delta.leading);
    }

    #[test]
    fn report_without_oracle() {
        let p = Potential::free();
        let r = validate(
            10,
            100.0,
            &p,
            SymmetryMap::new(Symmetry::Bose, 5.0),
            Default::default(),
            None,
        )
        .unwrap();
        assert!(r.outcome.verdict);
        assert!((r.outcome.scattering_length.unwrap() + 0.4).abs() < 1e-12);
        assert!(r.outcome.warnings.is_empty());
    }
}
