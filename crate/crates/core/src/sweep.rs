//! Cartesian parameter sweeps evaluated in parallel and written as tables.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lieb_liniger::{
    e_of_gamma, expansion_residual, expansion_value, lower_bound, EXPANSION_MIN_GAMMA,
};
use crate::potential::Potential;
use crate::validator::{
    envelope, map_symmetry, scattering_length, EnvelopeConstants, Symmetry, SymmetryMap,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

impl FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::InvalidParameter(format!("unknown format '{other}'"))),
        }
    }
}

/// Numeric table with named columns. Missing values are stored as NaN and
/// written as empty CSV fields or JSON `null`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(&self.columns).map_err(io)?;
        for row in &self.rows {
            let fields: Vec<String> = row
                .iter()
                .map(|v| {
                    if v.is_nan() {
                        String::new()
                    } else {
                        format!("{v:?}")
                    }
                })
                .collect();
            w.write_record(&fields).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Internal(e.to_string()))
    }

    /// Array of objects keyed by column name.
    pub fn to_json(&self) -> Result<String> {
        let records: Vec<serde_json::Map<String, serde_json::Value>> = self
            .rows
            .iter()
            .map(|row| {
                self.columns
                    .iter()
                    .zip(row)
                    .map(|(c, v)| {
                        let value = serde_json::Number::from_f64(*v)
                            .map_or(serde_json::Value::Null, serde_json::Value::Number);
                        (c.clone(), value)
                    })
                    .collect()
            })
            .collect();
        serde_json::to_string_pretty(&records).map_err(|e| Error::Internal(e.to_string()))
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    /// Writes `<dir>/<stem>.<ext>`, creating `dir` if needed.
    pub fn write(&self, dir: &Path, stem: &str, format: Format) -> Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let path = dir.join(format!("{stem}.{}", format.extension()));
        fs::write(&path, self.render(format)?)?;
        Ok(path)
    }
}

/// What to evaluate at each point of the sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "task", rename_all = "kebab-case")]
pub enum SweepSpec {
    /// Lieb–Liniger energy per `gamma`.
    LlSolve { gammas: Vec<f64>, nodes: usize },
    /// Scattering length of the anyonic contact problem over `(c, kappa)`.
    Anyon {
        couplings: Vec<f64>,
        kappas: Vec<f64>,
    },
    /// Expansion and envelope for a delta gas over `(N, rho, c, kappa)`.
    Expansion {
        particles: Vec<usize>,
        densities: Vec<f64>,
        couplings: Vec<f64>,
        kappas: Vec<f64>,
        constants: EnvelopeConstants,
    },
}

impl SweepSpec {
    /// Stem used for the output file.
    pub fn name(&self) -> &'static str {
        match self {
            SweepSpec::LlSolve { .. } => "sweep-ll-solve",
            SweepSpec::Anyon { .. } => "sweep-anyon",
            SweepSpec::Expansion { .. } => "sweep-expansion",
        }
    }
}

pub const LL_COLUMNS: [&str; 7] = [
    "gamma",
    "lambda",
    "e",
    "lower_bound",
    "expansion_value",
    "residual",
    "n_nodes",
];

/// One row of [`LL_COLUMNS`]; the residual is NaN below its regime.
pub fn ll_row(gamma: f64, nodes: usize) -> Result<Vec<f64>> {
    let s = e_of_gamma(gamma, nodes, 1e-13)?;
    let residual = if gamma >= EXPANSION_MIN_GAMMA {
        expansion_residual(&s)?
    } else {
        f64::NAN
    };
    Ok(vec![
        s.gamma,
        s.lambda,
        s.e,
        lower_bound(s.gamma),
        expansion_value(s.gamma),
        residual,
        s.n_nodes as f64,
    ])
}

fn check_kappa(k: f64) -> Result<()> {
    if (0.0..=PI).contains(&k) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "kappa must lie in [0, pi], got {k}"
        )))
    }
}

/// Evaluates the sweep in parallel; rows follow the cartesian order of the
/// inputs (last axis fastest) regardless of scheduling.
pub fn sweep(spec: &SweepSpec) -> Result<Table> {
    match spec {
        SweepSpec::LlSolve { gammas, nodes } => {
            let rows: Result<Vec<_>> = gammas.par_iter().map(|&g| ll_row(g, *nodes)).collect();
            Ok(Table {
                columns: LL_COLUMNS.iter().map(|c| c.to_string()).collect(),
                rows: rows?,
            })
        }
        SweepSpec::Anyon { couplings, kappas } => {
            let points: Vec<(f64, f64)> = couplings
                .iter()
                .flat_map(|&c| kappas.iter().map(move |&k| (c, k)))
                .collect();
            let rows: Result<Vec<_>> = points
                .par_iter()
                .map(|&(c, k)| {
                    check_kappa(k)?;
                    let map = SymmetryMap::new(Symmetry::Anyon(k), c);
                    let mapped = map_symmetry(&map, &Potential::free())?;
                    let a = scattering_length(&mapped)?.unwrap_or(f64::NAN);
                    let c_eff = if k == PI {
                        f64::INFINITY
                    } else {
                        c / (0.5 * k).cos()
                    };
                    Ok(vec![c, k, c_eff, a, -2.0 * (0.5 * k).cos() / c])
                })
                .collect();
            let mut t = Table::new(&["c", "kappa", "c_eff", "a_kappa", "a_formula"]);
            t.rows = rows?;
            Ok(t)
        }
        SweepSpec::Expansion {
            particles,
            densities,
            couplings,
            kappas,
            constants,
        } => {
            let mut points = Vec::new();
            for &n in particles {
                for &rho in densities {
                    for &c in couplings {
                        for &k in kappas {
                            points.push((n, rho, c, k));
                        }
                    }
                }
            }
            let rows: Result<Vec<_>> = points
                .par_iter()
                .map(|&(n, rho, c, k)| {
                    check_kappa(k)?;
                    if !(rho > 0.0) || n == 0 {
                        return Err(Error::InvalidParameter("need N >= 1 and rho > 0".into()));
                    }
                    let length = n as f64 / rho;
                    let mapped =
                        map_symmetry(&SymmetryMap::new(Symmetry::Anyon(k), c), &Potential::free())?;
                    let a = scattering_length(&mapped)?.unwrap_or(0.0);
                    let env = envelope(n, length, a, mapped.range(), *constants);
                    Ok(vec![
                        n as f64,
                        length,
                        rho,
                        c,
                        k,
                        a,
                        env.leading,
                        env.expansion,
                        env.lower,
                        env.upper,
                    ])
                })
                .collect();
            let mut t = Table::new(&[
                "n",
                "length",
                "rho",
                "c",
                "kappa",
                "a",
                "leading",
                "expansion",
                "lower",
                "upper",
            ]);
            t.rows = rows?;
            Ok(t)
        }
    }
}

/// Runs the sweep and writes `<dir>/<name>.<ext>`.
pub fn run_sweep(spec: &SweepSpec, dir: &Path, format: Format) -> Result<PathBuf> {
    sweep(spec)?.write(dir, spec.name(), format)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_sweep_has_one_row_per_value() {
        let spec = SweepSpec::LlSolve {
            gammas: vec![1.0, 10.0, 100.0],
            nodes: 64,
        };
        let t = sweep(&spec).unwrap();
        assert_eq!(t.rows.len(), 3);
        let csv = t.to_csv().unwrap();
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.starts_with("gamma,lambda,e,lower_bound,expansion_value,residual,n_nodes"));
        // residual is missing below the expansion regime
        assert!(csv.lines().nth(1).unwrap().contains(",,"));
    }

    #[test]
    fn anyon_lengths_increase_with_kappa() {
        let kappas = vec![0.0, PI / 4.0, PI / 2.0, 3.0 * PI / 4.0];
        let t = sweep(&SweepSpec::Anyon {
            couplings: vec![1.5],
            kappas,
        })
        .unwrap();
        let a = t.column("a_kappa").unwrap();
        let f = t.column("a_formula").unwrap();
        assert!(a.windows(2).all(|w| w[1] > w[0]));
        assert!(a.iter().all(|x| *x < 0.0));
        for (x, y) in a.iter().zip(&f) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn json_uses_null_for_missing_values() {
        let mut t = Table::new(&["x", "y"]);
        t.rows.push(vec![1.0, f64::NAN]);
        let json = t.to_json().unwrap();
        assert!(json.contains("\"y\": null"));
    }
}
