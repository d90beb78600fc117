use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use gl2_thermo::problem::SPEC_VERSION;
use gl2_thermo::{
    additive_pressure, bundle_consistency, classify, classify_triangular, default_k_max, gibbs_weights,
    irreducibility_witness, is_typical, livsic_test, load, lyapunov_monte_carlo, qm_scan, stable_holonomy,
    subadditive_pressure, unstable_holonomy, Branch, ClassificationResult, ClassifyBounds, Cocycle, CohomologyVerdict,
    Direction, LineField, PointSpec, Potential, Problem, ProblemError, TypicalityOutcome, Witness,
};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

const EXIT_ERROR: u8 = 1;
const EXIT_UNDETERMINED: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "gl2thermo", version, about = "Equilibrium states of GL(2,R) cocycles over subshifts of finite type")]
struct Cli {
    /// Output format for the run report.
    #[arg(long, global = true, value_enum, default_value_t = Output::Json)]
    output: Output,

    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Output {
    Json,
    Table,
}

#[derive(Args, Debug)]
struct SpecFile {
    /// Problem spec (JSON).
    spec: PathBuf,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum HolonomyKind {
    Auto,
    Stable,
    Unstable,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a problem spec and print its normalized form.
    Validate(SpecFile),
    /// Bracket the singular-value pressure from cylinder sums.
    Pressure {
        #[command(flatten)]
        file: SpecFile,
        #[arg(long, default_value_t = 12)]
        n_max: usize,
        /// Word length of a QM scan whose constants feed the lower bound.
        #[arg(long)]
        qm_n: Option<usize>,
        #[arg(long)]
        k_max: Option<usize>,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
    /// Pressure of a named additive potential.
    PressureAdditive {
        #[command(flatten)]
        file: SpecFile,
        /// Name in the spec's `potentials` block; optional when there is only one.
        #[arg(long)]
        potential: Option<String>,
    },
    /// Monte Carlo top Lyapunov exponent.
    Lyapunov {
        #[command(flatten)]
        file: SpecFile,
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        #[arg(long, default_value_t = 64)]
        trials: usize,
        /// Measure block (JSON) replacing the spec's measure.
        #[arg(long)]
        measure: Option<String>,
    },
    /// Stable or unstable holonomy between two points.
    Holonomy {
        #[command(flatten)]
        file: SpecFile,
        /// Point as JSON: {"left_period", "core", "right_period", "offset"}.
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        #[arg(long, value_enum, default_value_t = HolonomyKind::Auto)]
        kind: HolonomyKind,
    },
    /// Search for a typicality certificate.
    Typical {
        #[command(flatten)]
        file: SpecFile,
        #[arg(long, default_value_t = 6)]
        period_bound: usize,
        #[arg(long, default_value_t = 6)]
        core_bound: usize,
    },
    /// Look for a loop that moves a line at a periodic point.
    Witness {
        #[command(flatten)]
        file: SpecFile,
        /// Periodic point as JSON; defaults to the fixed point of symbol 1.
        #[arg(long)]
        p: Option<String>,
        /// Line as JSON `[x, y]`; defaults to the spec's invariant line, then e1.
        #[arg(long)]
        line: Option<String>,
        #[arg(long, default_value_t = 6)]
        core_bound: usize,
    },
    /// Empirical quasi-multiplicativity constant.
    Qm {
        #[command(flatten)]
        file: SpecFile,
        #[arg(long, default_value_t = 6)]
        n: usize,
        #[arg(long)]
        k_max: Option<usize>,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
    /// Normalized singular-value weights on cylinders of length n.
    Gibbs {
        #[command(flatten)]
        file: SpecFile,
        #[arg(long, default_value_t = 8)]
        n: usize,
    },
    /// Periodic-orbit test of whether two potentials are cohomologous.
    Livsic {
        #[command(flatten)]
        file: SpecFile,
        #[arg(long)]
        phi: String,
        #[arg(long)]
        psi: String,
        #[arg(long, default_value_t = 12)]
        period_bound: usize,
    },
    /// Decide the equilibrium-state branch and emit the states.
    Classify {
        #[command(flatten)]
        file: SpecFile,
        #[arg(long, default_value_t = 6)]
        period_bound: usize,
        #[arg(long, default_value_t = 6)]
        core_bound: usize,
        #[arg(long, default_value_t = 12)]
        livsic_period_bound: usize,
        #[arg(long, default_value_t = 8)]
        gibbs_depth: usize,
        /// Cylinder depth of the emitted states.
        #[arg(long, default_value_t = 8)]
        depth: usize,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Validate(_) => "validate",
            Command::Pressure { .. } => "pressure",
            Command::PressureAdditive { .. } => "pressure-additive",
            Command::Lyapunov { .. } => "lyapunov",
            Command::Holonomy { .. } => "holonomy",
            Command::Typical { .. } => "typical",
            Command::Witness { .. } => "witness",
            Command::Qm { .. } => "qm",
            Command::Gibbs { .. } => "gibbs",
            Command::Livsic { .. } => "livsic",
            Command::Classify { .. } => "classify",
        }
    }

    fn spec_path(&self) -> &Path {
        match self {
            Command::Validate(f)
            | Command::Pressure { file: f, .. }
            | Command::PressureAdditive { file: f, .. }
            | Command::Lyapunov { file: f, .. }
            | Command::Holonomy { file: f, .. }
            | Command::Typical { file: f, .. }
            | Command::Witness { file: f, .. }
            | Command::Qm { file: f, .. }
            | Command::Gibbs { file: f, .. }
            | Command::Livsic { file: f, .. }
            | Command::Classify { file: f, .. } => &f.spec,
        }
    }
}

#[derive(Serialize)]
struct RunReport {
    command: &'static str,
    spec_sha256: String,
    spec_version: u32,
    version: &'static str,
    seed: u64,
    wall_time_s: f64,
    result: Value,
}

/// A command's payload, whether it was inconclusive, and notes for stderr.
struct Outcome {
    payload: Value,
    undetermined: bool,
    diagnostics: Vec<String>,
}

impl Outcome {
    fn done(payload: impl Serialize) -> Result<Self> {
        Ok(Outcome {
            payload: serde_json::to_value(payload)?,
            undetermined: false,
            diagnostics: Vec::new(),
        })
    }
}

fn invalid_spec(errors: &[ProblemError]) -> anyhow::Error {
    let lines: Vec<String> = errors.iter().map(ToString::to_string).collect();
    anyhow!("invalid problem spec:\n  {}", lines.join("\n  "))
}

fn generator(problem: &Problem) -> Result<Cocycle> {
    problem
        .generator
        .as_ref()
        .map(|g| g.cocycle())
        .ok_or_else(|| anyhow!("spec has neither a cocycle nor a triangular block"))
}

fn potential<'a>(problem: &'a Problem, name: Option<&str>) -> Result<&'a Potential> {
    match name {
        Some(name) => problem
            .potentials
            .get(name)
            .ok_or_else(|| anyhow!("no potential named {name:?} in the spec")),
        None if problem.potentials.len() == 1 => Ok(problem.potentials.values().next().expect("one entry")),
        None => bail!("spec has {} potentials; choose one with --potential", problem.potentials.len()),
    }
}

fn parse_point(problem: &Problem, text: &str, flag: &str) -> Result<gl2_thermo::Point> {
    let spec: PointSpec = serde_json::from_str(text).with_context(|| format!("{flag} is not a point"))?;
    Ok(spec.resolve(&problem.shift)?)
}

fn parse_direction(text: &str) -> Result<Direction> {
    let [x, y]: [f64; 2] = serde_json::from_str(text).context("--line must be [x, y]")?;
    Direction::new(x, y).ok_or_else(|| anyhow!("--line must be non-zero"))
}

fn states_payload(result: &ClassificationResult, depth: usize) -> Result<Vec<Value>> {
    result
        .equilibrium_states
        .iter()
        .map(|state| {
            // Gibbs-weight states are only known to their own depth.
            let cylinders = state.cylinders(depth).or_else(|_| {
                let known = result.certificates.gibbs.as_ref().map_or(0, |g| g.depth);
                state.cylinders(known)
            })?;
            Ok(json!({
                "label": state.label,
                "entropy": state.entropy,
                "exponent": state.exponent,
                "cylinders": cylinders,
            }))
        })
        .collect()
}

fn run(command: &Command, problem: &Problem, seed: u64) -> Result<Outcome> {
    let tol = &problem.tolerances;
    match command {
        Command::Validate(_) => Outcome::done(json!({ "valid": true, "spec": problem.spec })),
        Command::Pressure {
            n_max, qm_n, k_max, samples, ..
        } => {
            let a = generator(problem)?;
            let qm = match qm_n {
                Some(n) => {
                    let k = k_max.unwrap_or_else(|| default_k_max(a.shift()));
                    Some(qm_scan(&a, *n, k, *samples, seed)?)
                }
                None => None,
            };
            let estimate = subadditive_pressure(&a, *n_max, qm.as_ref().map(|r| r.constants()))?;
            Outcome::done(json!({ "estimate": estimate, "midpoint": estimate.midpoint(), "width": estimate.width(), "qm": qm }))
        }
        Command::PressureAdditive { potential: name, .. } => {
            let phi = potential(problem, name.as_deref())?;
            Outcome::done(additive_pressure(phi)?)
        }
        Command::Lyapunov { n, trials, .. } => {
            let a = generator(problem)?;
            let mu = problem
                .measure
                .as_ref()
                .ok_or_else(|| anyhow!("no measure: add a measure block or pass --measure"))?;
            Outcome::done(lyapunov_monte_carlo(&a, mu, *n, *trials, seed)?)
        }
        Command::Holonomy { x, y, kind, .. } => {
            let a = generator(problem)?;
            let (x, y) = (parse_point(problem, x, "--x")?, parse_point(problem, y, "--y")?);
            let (used, result) = match kind {
                HolonomyKind::Stable => ("stable", stable_holonomy(&a, &x, &y)?),
                HolonomyKind::Unstable => ("unstable", unstable_holonomy(&a, &x, &y)?),
                HolonomyKind::Auto => match stable_holonomy(&a, &x, &y) {
                    Ok(h) => ("stable", h),
                    Err(_) => ("unstable", unstable_holonomy(&a, &x, &y).context("points share neither tail")?),
                },
            };
            let mut payload = serde_json::to_value(result)?;
            payload["kind"] = json!(used);
            Outcome::done(payload)
        }
        Command::Typical {
            period_bound, core_bound, ..
        } => {
            let outcome = is_typical(&generator(problem)?, *period_bound, *core_bound, tol)?;
            let undetermined = matches!(outcome, TypicalityOutcome::Undetermined { .. });
            Ok(Outcome {
                payload: serde_json::to_value(outcome)?,
                undetermined,
                diagnostics: Vec::new(),
            })
        }
        Command::Witness { p, line, core_bound, .. } => {
            let a = generator(problem)?;
            let p = match p {
                Some(text) => parse_point(problem, text, "--p")?,
                None => problem.shift.fixed_point(0)?,
            };
            let line = match (line, &problem.invariant_line) {
                (Some(text), _) => parse_direction(text)?,
                (None, Some(LineField::Constant(d))) => *d,
                (None, Some(LineField::PerSymbol(lines))) => lines[p.at(0) as usize],
                (None, None) => Direction::E1,
            };
            let witness = irreducibility_witness(&a, &p, &line, *core_bound, tol)?;
            let undetermined = matches!(witness, Witness::NoWitness { .. });
            Ok(Outcome {
                payload: json!({ "p": p, "line": line, "witness": witness }),
                undetermined,
                diagnostics: Vec::new(),
            })
        }
        Command::Qm { n, k_max, samples, .. } => {
            let a = generator(problem)?;
            let k = k_max.unwrap_or_else(|| default_k_max(a.shift()));
            Outcome::done(qm_scan(&a, *n, k, *samples, seed)?)
        }
        Command::Gibbs { n, .. } => {
            let a = generator(problem)?;
            let bracket = subadditive_pressure(&a, *n, None)?;
            Outcome::done(gibbs_weights(&a, *n, bracket.upper)?)
        }
        Command::Livsic {
            phi, psi, period_bound, ..
        } => {
            let verdict = livsic_test(
                potential(problem, Some(phi))?,
                potential(problem, Some(psi))?,
                *period_bound,
                tol.coh_tol,
            )?;
            let undetermined = matches!(verdict, CohomologyVerdict::PossiblyCohomologous { .. });
            Ok(Outcome {
                payload: serde_json::to_value(verdict)?,
                undetermined,
                diagnostics: Vec::new(),
            })
        }
        Command::Classify {
            period_bound,
            core_bound,
            livsic_period_bound,
            gibbs_depth,
            depth,
            ..
        } => {
            let bounds = ClassifyBounds {
                period_bound: *period_bound,
                core_bound: *core_bound,
                livsic_period_bound: *livsic_period_bound,
                gibbs_depth: *gibbs_depth,
            };
            let generator = problem
                .generator
                .as_ref()
                .ok_or_else(|| anyhow!("spec has neither a cocycle nor a triangular block"))?;
            let result = match generator.triangular() {
                Some(b) => classify_triangular(b, bounds.livsic_period_bound, tol)?,
                None => classify(&generator.cocycle(), &bounds, problem.invariant_line.as_ref(), tol)?,
            };
            let mut payload = json!({
                "branch": result.branch,
                "certificates": result.certificates,
                "equilibrium_states": states_payload(&result, *depth)?,
                "diagnostics": result.diagnostics,
            });
            if let (Some(first), Some(second)) = (&problem.invariant_line, &problem.second_invariant_line) {
                let verdicts = bundle_consistency(&generator.cocycle(), first, second, bounds.livsic_period_bound, tol)?;
                payload["bundle_consistency"] = serde_json::to_value(verdicts)?;
            }
            Ok(Outcome {
                payload,
                undetermined: result.branch == Branch::Undetermined,
                diagnostics: result.diagnostics.clone(),
            })
        }
    }
}

/// Reads the spec, splicing in a `--measure` override before validation.
fn read_spec(command: &Command) -> Result<(String, String)> {
    let path = command.spec_path();
    let raw = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let hash = hex::encode(Sha256::digest(raw.as_bytes()));
    let text = match command {
        Command::Lyapunov { measure: Some(m), .. } => {
            let mut value: Value = serde_json::from_str(&raw).context("spec is not JSON")?;
            let block: Value = serde_json::from_str(m).context("--measure is not JSON")?;
            value
                .as_object_mut()
                .ok_or_else(|| anyhow!("spec must be a JSON object"))?
                .insert("measure".into(), block);
            value.to_string()
        }
        _ => raw,
    };
    Ok((text, hash))
}

fn flatten(prefix: &str, value: &Value, out: &mut Vec<(String, String)>) {
    let join = |key: &str| if prefix.is_empty() { key.to_string() } else { format!("{prefix}.{key}") };
    match value {
        Value::Object(map) => map.iter().for_each(|(k, v)| flatten(&join(k), v, out)),
        Value::Array(items) if items.iter().any(|v| v.is_object() || v.is_array()) => {
            items.iter().enumerate().for_each(|(i, v)| flatten(&join(&i.to_string()), v, out))
        }
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

fn render(report: &RunReport, output: Output) -> Result<String> {
    Ok(match output {
        Output::Json => serde_json::to_string_pretty(report)?,
        Output::Table => {
            let mut rows = Vec::new();
            flatten("", &serde_json::to_value(report)?, &mut rows);
            let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
            rows.iter()
                .map(|(k, v)| format!("{k:<width$}  {v}"))
                .collect::<Vec<_>>()
                .join("\n")
        }
    })
}

fn execute(cli: &Cli) -> Result<u8> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .context("cannot configure the worker pool")?;
    }
    let start = Instant::now();
    let (text, hash) = read_spec(&cli.command)?;
    let report = |result: Value| RunReport {
        command: cli.command.name(),
        spec_sha256: hash.clone(),
        spec_version: SPEC_VERSION,
        version: env!("CARGO_PKG_VERSION"),
        seed: cli.seed,
        wall_time_s: start.elapsed().as_secs_f64(),
        result,
    };
    let problem = match load(&text) {
        Ok(problem) => problem,
        Err(errors) if matches!(cli.command, Command::Validate(_)) => {
            println!("{}", render(&report(json!({ "valid": false, "errors": errors })), cli.output)?);
            return Ok(EXIT_ERROR);
        }
        Err(errors) => return Err(invalid_spec(&errors)),
    };
    let outcome = run(&cli.command, &problem, cli.seed)?;
    for line in &outcome.diagnostics {
        eprintln!("note: {line}");
    }
    println!("{}", render(&report(outcome.payload), cli.output)?);
    Ok(if outcome.undetermined { EXIT_UNDETERMINED } else { 0 })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { EXIT_ERROR } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
