use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use dilute1d::acceptance::{self, CriterionReport};
use dilute1d::config::load_potential;
use dilute1d::ed_oracle::{Boundary, OracleProblem, OracleSettings, Statistics, DEFAULT_SEED};
use dilute1d::free_fermi::FermiEnsemble;
use dilute1d::scattering::{solve_scattering, Channel};
use dilute1d::sweep::{self, Format, SweepSpec, Table};
use dilute1d::trial_states::{analytic_upper_bound, build_trial, healing_scale};
use dilute1d::validator::{scattering_length, validate, EnvelopeConstants, Symmetry, SymmetryMap};
use dilute1d::{Error, Potential, Result};

#[derive(Parser)]
#[command(
    name = "dilute1d",
    version,
    about = "Ground-state energies of dilute one-dimensional gases"
)]
struct Cli {
    /// Directory for output files when `--out` is not given.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Output format for tables and reports.
    #[arg(long, global = true, default_value = "json")]
    format: Format,
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for the eigensolver start vectors and randomized checks.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Zero-energy two-body scattering solution and scattering length.
    Scatter(ScatterArgs),
    /// Lieb–Liniger energy e(gamma) from the integral equations.
    LlSolve(LlArgs),
    /// Free-fermion energy and sampled densities on a hard-wall box.
    Fermi(FermiArgs),
    /// Exact diagonalization on a grid, extrapolated to zero spacing.
    Oracle(OracleArgs),
    /// Energy of the variational trial state for two particles.
    Trial(TrialArgs),
    /// Expansion, envelope and optional oracle comparison.
    Validate(ValidateArgs),
    /// Parameter sweep written to `<out-dir>/sweep-<task>.<ext>`.
    Sweep(SweepArgs),
    /// Runs the acceptance criteria.
    Acceptance(AcceptanceArgs),
}

#[derive(Args)]
struct ScatterArgs {
    /// Potential configuration file (omit for the free interaction).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "even")]
    channel: Channel,
    /// Matching radius, must exceed the range (default `2 R0 + 1`).
    #[arg(long)]
    radius: Option<f64>,
    /// Number of sample intervals on `[0, R]`.
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LlArgs {
    /// Comma-separated list, or `lo:hi:n` for `n` log-spaced values.
    #[arg(long, allow_hyphen_values = true)]
    gamma: String,
    #[arg(long, default_value_t = 200)]
    nodes: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FermiArgs {
    #[arg(long = "N")]
    n: usize,
    #[arg(long = "L")]
    length: f64,
    /// Points for the one-body density samples.
    #[arg(long, default_value_t = 101)]
    grid: usize,
    /// Points per axis for pair-density samples (omitted if not given).
    #[arg(long)]
    rdm2_grid: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long = "N")]
    n: usize,
    #[arg(long = "L")]
    length: f64,
    #[arg(long, default_value = "dirichlet")]
    bc: Boundary,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Particle statistics on the grid (`bose` or `fermi`).
    #[arg(long, default_value = "bose")]
    statistics: String,
    /// Points per dimension on the coarsest grid.
    #[arg(long, default_value_t = 64)]
    points: usize,
    /// Number of grids (spacing halved each time).
    #[arg(long, default_value_t = 3)]
    refine: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TrialArgs {
    #[arg(long = "N", default_value_t = 2)]
    n: usize,
    #[arg(long = "L")]
    length: f64,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Healing scale, or `auto` for `max(rho^(-1/5) |a|^(4/5), R0)`.
    #[arg(long, default_value = "auto")]
    b: String,
    /// Gauss–Legendre order per dimension.
    #[arg(long, default_value_t = 64)]
    order: usize,
    #[arg(long, default_value_t = 1.0)]
    c_u: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long = "N")]
    n: usize,
    #[arg(long = "L")]
    length: f64,
    #[arg(long)]
    config: Option<PathBuf>,
    /// `bose`, `fermi` or `anyon:<kappa>`.
    #[arg(long, default_value = "bose")]
    symmetry: Symmetry,
    /// Contact coupling `c` added as `2 c delta` (bosons) or its anyonic analogue.
    #[arg(long, default_value_t = 0.0)]
    c: f64,
    #[arg(long, default_value_t = 1.0)]
    c_u: f64,
    #[arg(long, default_value_t = 1.0)]
    c_l: f64,
    /// Compare with the grid oracle under both boundary conditions.
    #[arg(long)]
    oracle: bool,
    #[arg(long, default_value_t = 64)]
    points: usize,
    #[arg(long, default_value_t = 3)]
    refine: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// `ll-solve`, `anyon` or `expansion`.
    #[arg(long)]
    task: String,
    #[arg(long, default_value = "1,10,100")]
    gamma: String,
    #[arg(long, default_value_t = 200)]
    nodes: usize,
    /// Couplings `c`.
    #[arg(long, default_value = "1")]
    c: String,
    /// Anyon parameters; `pi` may be used as a factor, e.g. `0,pi/4,pi/2`.
    #[arg(long, default_value = "0")]
    kappa: String,
    /// Particle numbers.
    #[arg(long = "N", default_value = "10")]
    n: String,
    /// Densities.
    #[arg(long, default_value = "0.1")]
    rho: String,
    #[arg(long, default_value_t = 1.0)]
    c_u: f64,
    #[arg(long, default_value_t = 1.0)]
    c_l: f64,
}

#[derive(Args)]
struct AcceptanceArgs {
    /// Subset of criteria, e.g. `1,2,5`.
    #[arg(long)]
    only: Option<String>,
}

fn parse_value(token: &str) -> Result<f64> {
    dilute1d::validator::parse_angle(token)
}

/// Comma-separated values, or `lo:hi:n` for `n` log-spaced points.
fn parse_list(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let lo = parse_value(parts[0])?;
        let hi = parse_value(parts[1])?;
        let n: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("bad count in '{s}'")))?;
        if !(lo > 0.0 && hi >= lo && n >= 1) {
            return Err(Error::InvalidParameter(format!("bad log range '{s}'")));
        }
        if n == 1 {
            return Ok(vec![lo]);
        }
        let (a, b) = (lo.ln(), hi.ln());
        return Ok((0..n)
            .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
            .collect());
    }
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(parse_value)
        .collect()
}

fn potential_from(path: &Option<PathBuf>) -> Result<Potential> {
    match path {
        Some(p) => load_potential(p),
        None => Ok(Potential::free()),
    }
}

struct Output {
    out_dir: Option<PathBuf>,
    format: Format,
}

impl Output {
    /// Writes `text` to `out`, to `<out-dir>/<stem>.<ext>`, or to stdout.
    fn emit(&self, out: &Option<PathBuf>, stem: &str, text: &str) -> Result<()> {
        let path = match (out, &self.out_dir) {
            (Some(p), _) => Some(p.clone()),
            (None, Some(dir)) => Some(dir.join(format!("{stem}.{}", self.format.extension()))),
            (None, None) => None,
        };
        match path {
            Some(p) => {
                if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                    fs::create_dir_all(parent)?;
                }
                fs::write(&p, text)?;
                eprintln!("wrote {}", p.display());
            }
            None => print!("{text}"),
        }
        Ok(())
    }

    fn json(&self, value: &Value) -> String {
        let mut s = serde_json::to_string_pretty(value).expect("serializable");
        s.push('\n');
        s
    }

    /// A report rendered as JSON, or as `key,value` rows of its scalar leaves.
    fn report(&self, value: &Value) -> Result<String> {
        match self.format {
            Format::Json => Ok(self.json(value)),
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                let io = |e: csv::Error| Error::Io(e.to_string());
                w.write_record(["key", "value"]).map_err(io)?;
                let mut rows = Vec::new();
                flatten("", value, &mut rows);
                for (k, v) in rows {
                    w.write_record([k, v]).map_err(io)?;
                }
                let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
                Ok(String::from_utf8_lossy(&bytes).into_owned())
            }
        }
    }
}

fn flatten(prefix: &str, value: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match value {
        Value::Object(map) => map.iter().for_each(|(k, v)| flatten(&key(k), v, out)),
        Value::Array(items) => items
            .iter()
            .enumerate()
            .for_each(|(i, v)| flatten(&key(&i.to_string()), v, out)),
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        Value::Null => out.push((prefix.to_string(), String::new())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

fn scatter(args: &ScatterArgs, io: &Output) -> Result<bool> {
    let p = potential_from(&args.config)?;
    let radius = args.radius.unwrap_or(2.0 * p.range() + 1.0);
    let r = solve_scattering(&p, args.channel, radius)?;
    let samples: Vec<(f64, f64)> = r.samples(args.samples);
    let text = match io.format {
        Format::Json => io.json(&json!({
            "potential": p.digest(),
            "channel": format!("{:?}", args.channel).to_lowercase(),
            "radius": r.radius,
            "a": r.a.finite(),
            "energy": r.energy,
            "energy_bound": r.energy_bound(),
            "samples": samples.iter().map(|(x, f)| [*x, *f]).collect::<Vec<_>>(),
        })),
        Format::Csv => {
            let mut t = Table::new(&["x", "f0", "f0_prime"]);
            t.rows = samples
                .iter()
                .map(|(x, f)| vec![*x, *f, r.derivative(*x)])
                .collect();
            t.to_csv()?
        }
    };
    io.emit(&args.out, "scatter", &text)?;
    Ok(true)
}

fn ll_solve(args: &LlArgs, io: &Output) -> Result<bool> {
    let spec = SweepSpec::LlSolve {
        gammas: parse_list(&args.gamma)?,
        nodes: args.nodes,
    };
    let table = sweep::sweep(&spec)?;
    io.emit(&args.out, "ll-solve", &table.render(io.format)?)?;
    Ok(true)
}

fn fermi(args: &FermiArgs, io: &Output) -> Result<bool> {
    let e = FermiEnsemble::new(args.n, args.length)?;
    let l = args.length;
    let grid = args.grid.max(2);
    let xs: Vec<f64> = (0..grid)
        .map(|i| l * i as f64 / (grid - 1) as f64)
        .collect();
    let rho1: Vec<f64> = xs.iter().map(|&x| e.rho1(x)).collect();
    let mut rho2 = Vec::new();
    if let Some(m) = args.rdm2_grid {
        let m = m.max(2);
        for i in 0..m {
            for j in 0..m {
                let (x, y) = (l * i as f64 / (m - 1) as f64, l * j as f64 / (m - 1) as f64);
                rho2.push([x, y, e.rho2(x, y)]);
            }
        }
    }
    let text = match io.format {
        Format::Json => io.json(&json!({
            "n": args.n,
            "length": l,
            "density": e.density(),
            "energy": e.energy(),
            "rho1": xs.iter().zip(&rho1).map(|(x, v)| [*x, *v]).collect::<Vec<_>>(),
            "rho2": rho2,
        })),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let io_err = |e: csv::Error| Error::Io(e.to_string());
            w.write_record(["quantity", "x", "y", "value"])
                .map_err(io_err)?;
            let f = |v: f64| format!("{v:?}");
            w.write_record(["energy", "", "", &f(e.energy())])
                .map_err(io_err)?;
            w.write_record(["density", "", "", &f(e.density())])
                .map_err(io_err)?;
            for (x, v) in xs.iter().zip(&rho1) {
                w.write_record(["rho1", &f(*x), "", &f(*v)])
                    .map_err(io_err)?;
            }
            for [x, y, v] in &rho2 {
                w.write_record(["rho2", &f(*x), &f(*y), &f(*v)])
                    .map_err(io_err)?;
            }
            let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
            String::from_utf8_lossy(&bytes).into_owned()
        }
    };
    io.emit(&args.out, "fermi", &text)?;
    Ok(true)
}

fn oracle(args: &OracleArgs, io: &Output, seed: u64) -> Result<bool> {
    let statistics = match args.statistics.to_ascii_lowercase().as_str() {
        "bose" => Statistics::Bose,
        "fermi" => Statistics::Fermi,
        other => {
            return Err(Error::InvalidParameter(format!(
                "unknown statistics '{other}'"
            )))
        }
    };
    let p = potential_from(&args.config)?;
    let problem = OracleProblem::new(args.n, args.length, args.bc, p, statistics, args.points)?;
    let settings = OracleSettings {
        points: args.points,
        refinements: args.refine,
        seed,
    };
    let result = settings.run(&problem)?;
    let value = json!({
        "problem": {
            "n": problem.n,
            "length": problem.length,
            "boundary": problem.boundary,
            "statistics": problem.statistics,
            "potential": problem.potential.digest(),
            "points": problem.points,
            "seed": seed,
        },
        "result": result,
    });
    io.emit(&args.out, "oracle", &io.report(&value)?)?;
    Ok(true)
}

fn trial(args: &TrialArgs, io: &Output) -> Result<bool> {
    let p = potential_from(&args.config)?;
    let a = scattering_length(&p)?;
    let b = if args.b.trim().eq_ignore_ascii_case("auto") {
        let b = healing_scale(args.n, args.length, a.unwrap_or(0.0), p.range());
        if b > p.range() {
            b
        } else {
            // Free or contact-only problems with a = 0 give b = 0.
            p.range().max(1e-3 * args.length) * 1.5
        }
    } else {
        parse_value(&args.b)?
    };
    let t = build_trial(args.n, args.length, &p, b)?;
    let energy = t.energy(args.order)?;
    let bound = analytic_upper_bound(args.n, args.length, &p, args.c_u).ok();
    let value = json!({
        "n": args.n,
        "length": args.length,
        "potential": p.digest(),
        "a": a,
        "b": b,
        "trial": energy,
        "upper_envelope": bound,
        "warnings": t.warnings,
    });
    io.emit(&args.out, "trial", &io.report(&value)?)?;
    Ok(true)
}

fn validate_cmd(args: &ValidateArgs, io: &Output, seed: u64) -> Result<bool> {
    let p = potential_from(&args.config)?;
    let oracle = args.oracle.then_some(OracleSettings {
        points: args.points,
        refinements: args.refine,
        seed,
    });
    let report = validate(
        args.n,
        args.length,
        &p,
        SymmetryMap::new(args.symmetry, args.c),
        EnvelopeConstants {
            c_u: args.c_u,
            c_l: args.c_l,
        },
        oracle,
    )?;
    let value = serde_json::to_value(&report).map_err(|e| Error::Internal(e.to_string()))?;
    io.emit(&args.out, "validate", &io.report(&value)?)?;
    Ok(report.outcome.verdict)
}

fn sweep_cmd(args: &SweepArgs, io: &Output) -> Result<bool> {
    let spec = match args.task.as_str() {
        "ll-solve" => SweepSpec::LlSolve {
            gammas: parse_list(&args.gamma)?,
            nodes: args.nodes,
        },
        "anyon" => SweepSpec::Anyon {
            couplings: parse_list(&args.c)?,
            kappas: parse_list(&args.kappa)?,
        },
        "expansion" => SweepSpec::Expansion {
            particles: parse_list(&args.n)?
                .into_iter()
                .map(|v| v as usize)
                .collect(),
            densities: parse_list(&args.rho)?,
            couplings: parse_list(&args.c)?,
            kappas: parse_list(&args.kappa)?,
            constants: EnvelopeConstants {
                c_u: args.c_u,
                c_l: args.c_l,
            },
        },
        other => {
            return Err(Error::InvalidParameter(format!(
                "unknown sweep task '{other}' (expected ll-solve, anyon or expansion)"
            )))
        }
    };
    let dir = io.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    let path = sweep::run_sweep(&spec, &dir, io.format)?;
    eprintln!("wrote {}", path.display());
    Ok(true)
}

fn acceptance_cmd(args: &AcceptanceArgs, io: &Output, seed: u64) -> Result<bool> {
    let ids: Vec<u32> = match &args.only {
        Some(list) => list
            .split(',')
            .map(|t| {
                t.trim()
                    .parse()
                    .map_err(|_| Error::InvalidParameter(format!("bad criterion id '{t}'")))
            })
            .collect::<Result<_>>()?,
        None => (1..=11).collect(),
    };
    let mut reports: Vec<CriterionReport> = Vec::new();
    for id in ids {
        let r = acceptance::run_criterion(id, seed);
        println!("{}", r.line());
        reports.push(r);
    }
    if let Some(dir) = &io.out_dir {
        let text = match io.format {
            Format::Json => io.json(&serde_json::to_value(&reports).expect("serializable")),
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                let io_err = |e: csv::Error| Error::Io(e.to_string());
                w.write_record(["id", "title", "passed", "seconds", "detail"])
                    .map_err(io_err)?;
                for r in &reports {
                    w.write_record([
                        r.id.to_string(),
                        r.title.to_string(),
                        r.passed.to_string(),
                        format!("{:.3}", r.seconds),
                        r.detail.clone(),
                    ])
                    .map_err(io_err)?;
                }
                let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
                String::from_utf8_lossy(&bytes).into_owned()
            }
        };
        io.emit(
            &Some(dir.join(format!("acceptance.{}", io.format.extension()))),
            "acceptance",
            &text,
        )?;
    }
    Ok(reports.iter().all(|r| r.passed))
}

fn run(cli: Cli) -> Result<bool> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Internal(e.to_string()))?;
    }
    let io = Output {
        out_dir: cli.out_dir.clone(),
        format: cli.format,
    };
    let oracle_seed = cli.seed.unwrap_or(DEFAULT_SEED);
    match &cli.command {
        Command::Scatter(a) => scatter(a, &io),
        Command::LlSolve(a) => ll_solve(a, &io),
        Command::Fermi(a) => fermi(a, &io),
        Command::Oracle(a) => oracle(a, &io, oracle_seed),
        Command::Trial(a) => trial(a, &io),
        Command::Validate(a) => validate_cmd(a, &io, oracle_seed),
        Command::Sweep(a) => sweep_cmd(a, &io),
        Command::Acceptance(a) => {
            acceptance_cmd(a, &io, cli.seed.unwrap_or(acceptance::DEFAULT_SEED))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn parses_lists_and_ranges() {
        assert_eq!(parse_list("1,10,100").unwrap(), vec![1.0, 10.0, 100.0]);
        let r = parse_list("1:100:3").unwrap();
        assert!((r[1] - 10.0).abs() < 1e-12 && (r[2] - 100.0).abs() < 1e-12);
        let k = parse_list("0,pi/4,pi/2,3pi/4").unwrap();
        assert!((k[3] - 0.75 * PI).abs() < 1e-15);
        assert!(parse_list("a,b").is_err());
    }

    #[test]
    fn flattens_nested_reports() {
        let mut rows = Vec::new();
        flatten("", &json!({"a": {"b": 1.5, "c": [true, null]}}), &mut rows);
        assert_eq!(rows[0], ("a.b".to_string(), "1.5".to_string()));
        assert_eq!(rows[2], ("a.c.1".to_string(), String::new()));
    }
}
