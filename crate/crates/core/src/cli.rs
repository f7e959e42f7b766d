//! Command-line front end.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::dynamic::{
    solve_daltd, verify_dynamic_equilibrium, DynamicEquilibrium, DynamicOptions, DynamicScenario, DynamicTolerances,
    DEFAULT_STEP_SCALE,
};
use crate::error::{EqError, Result};
use crate::fixtures;
use crate::oracle::{dp_welfare_sald, dp_welfare_saltd, OracleResult};
use crate::report::{fmt_sig, price_csv, sweep_csv, trajectory_csv};
use crate::shaping::{
    certify_worst_case_price, contour_sweep, is_admissible, ContourSpec, ShapingBounds, WorstCaseCertificate,
};
use crate::static_eq::{
    price_capacity_sweep, solve, verify_equilibrium, BisectionOptions, Mode, StaticEquilibrium, StaticScenario,
    SweepSpec, Tolerances,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;

#[derive(Debug, Clone, Parser)]
#[command(name = "eqkit", version, about = "Market-clearing prices for self-sustained multi-agent resource allocation")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    /// Scenario file.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Result file; standard output when absent.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Solver tolerance [default: 1e-9 static, 1e-4 dynamic residual].
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Iteration cap [default: 200 static bisection, 50000 dynamic].
    #[arg(long = "max-iter", global = true)]
    pub max_iter: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Grid step for oracle cross-checks.
    #[arg(long, global = true)]
    pub resolution: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Sald,
    Saltd,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Sald => Mode::Sald,
            ModeArg::Saltd => Mode::Saltd,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VerifyMode {
    Sald,
    Saltd,
    Daltd,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Clearing price and loads without explicit trades.
    SolveSald,
    /// Clearing price, loads and trades.
    SolveSaltd,
    /// Test a bounds box for guaranteed acceptable prices.
    ShapingCheck,
    /// Largest clearing price over a bounds box.
    ShapingCertify {
        /// Uniform samples drawn in addition to the corner search.
        #[arg(long, default_value_t = 10_000)]
        budget: usize,
    },
    /// Price over a two-parameter grid.
    ShapingContour,
    /// Clearing price across a capacity grid.
    SweepCapacity {
        #[arg(long, value_enum, default_value_t = ModeArg::Sald)]
        mode: ModeArg,
    },
    /// Dynamic prices by dual decomposition.
    SolveDaltd {
        #[arg(long = "step-scale", default_value_t = DEFAULT_STEP_SCALE)]
        step_scale: f64,
        #[arg(long = "prices-csv")]
        prices_csv: Option<PathBuf>,
        #[arg(long = "trajectory-csv")]
        trajectory_csv: Option<PathBuf>,
    },
    /// Check a candidate equilibrium against its scenario.
    Verify {
        #[arg(long)]
        equilibrium: PathBuf,
        #[arg(long, value_enum)]
        mode: VerifyMode,
    },
    /// Recompute a worked example and compare with the published figures.
    ReproduceExample { number: u8 },
}

struct Outcome {
    artifact: String,
    status: i32,
}

impl Outcome {
    fn ok(artifact: String) -> Self {
        Self {
            artifact,
            status: EXIT_OK,
        }
    }
}

/// Runs one command and returns the process exit status.
pub fn run(config: &RunConfig) -> i32 {
    match execute(config).and_then(|out| {
        emit(config.output.as_deref(), &out.artifact)?;
        Ok(out.status)
    }) {
        Ok(status) => status,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    }
}

fn emit(path: Option<&Path>, artifact: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, artifact)?,
        None => std::io::stdout().write_all(artifact.as_bytes())?,
    }
    Ok(())
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    parse_json(&text, &path.display().to_string())
}

fn parse_json<T: DeserializeOwned>(text: &str, origin: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|source| EqError::Schema {
        path: origin.to_string(),
        source,
    })
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn input(config: &RunConfig) -> Result<&Path> {
    config
        .input
        .as_deref()
        .ok_or_else(|| EqError::InvalidInput("--input is required for this command".into()))
}

fn tolerance(config: &RunConfig, default: f64) -> Result<f64> {
    let tol = config.tol.unwrap_or(default);
    if !(tol > 0.0) {
        return Err(EqError::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    Ok(tol)
}

fn bisection(config: &RunConfig) -> Result<BisectionOptions> {
    let defaults = BisectionOptions::default();
    Ok(BisectionOptions {
        tol: tolerance(config, defaults.tol)?,
        max_iter: config.max_iter.unwrap_or(defaults.max_iter),
    })
}

fn json_only(config: &RunConfig, command: &str) -> Result<()> {
    match config.format {
        Some(Format::Csv) => Err(EqError::InvalidInput(format!("{command} has no CSV output"))),
        _ => Ok(()),
    }
}

fn execute(config: &RunConfig) -> Result<Outcome> {
    match &config.command {
        Command::SolveSald => solve_static(config, Mode::Sald),
        Command::SolveSaltd => solve_static(config, Mode::Saltd),
        Command::ShapingCheck => {
            let bounds: ShapingBounds = read_json(input(config)?)?;
            bounds.validate()?;
            let report = is_admissible(&bounds);
            match config.format {
                Some(Format::Json) => Ok(Outcome::ok(to_json(&report)?)),
                Some(Format::Csv) => Err(EqError::InvalidInput("shaping-check has no CSV output".into())),
                None => {
                    let mut text = format!("admissible: {}\n", report.admissible);
                    for (j, s) in report.slacks.iter().enumerate() {
                        writeln!(text, "slack_{}: {}", j + 1, fmt_sig(*s, 12)).unwrap();
                    }
                    Ok(Outcome::ok(text))
                }
            }
        }
        Command::ShapingCertify { budget } => {
            json_only(config, "shaping-certify")?;
            let bounds: ShapingBounds = read_json(input(config)?)?;
            let cert = certify_worst_case_price(&bounds, *budget, config.seed)?;
            Ok(Outcome::ok(to_json(&CertifyOutput::new(cert, bounds.capacity)?)?))
        }
        Command::ShapingContour => {
            let spec: ContourSpec = read_json(input(config)?)?;
            let grid = contour_sweep(&spec)?;
            match config.format {
                Some(Format::Json) => Ok(Outcome::ok(to_json(&grid)?)),
                _ => Ok(Outcome::ok(grid.to_csv())),
            }
        }
        Command::SweepCapacity { mode } => {
            let spec: SweepSpec = read_json(input(config)?)?;
            let mode = Mode::from(*mode);
            let points = price_capacity_sweep(&spec.utilities, &spec.capacities(), mode, &bisection(config)?)?;
            match config.format {
                Some(Format::Json) => Ok(Outcome::ok(to_json(&points)?)),
                _ => Ok(Outcome::ok(sweep_csv(&points, mode))),
            }
        }
        Command::SolveDaltd {
            step_scale,
            prices_csv,
            trajectory_csv: trajectories,
        } => {
            let scenario: DynamicScenario = read_json(input(config)?)?;
            let opts = DynamicOptions {
                tol: tolerance(config, crate::dynamic::DEFAULT_TOL)?,
                max_iter: config.max_iter.unwrap_or(crate::dynamic::DEFAULT_MAX_ITER),
                step_scale: *step_scale,
                ..Default::default()
            };
            let (eq, status) = match solve_daltd(&scenario, &opts) {
                Ok(eq) => (eq, EXIT_OK),
                Err(EqError::NoConvergence { residual, iterations, last }) => {
                    eprintln!("warning: no convergence after {iterations} iterations (residual {residual:.3e})");
                    (*last, EXIT_SOLVER)
                }
                Err(e) => return Err(e),
            };
            if let Some(p) = prices_csv {
                fs::write(p, price_csv(&eq.lambda))?;
            }
            if let Some(p) = trajectories {
                fs::write(p, trajectory_csv(&eq.trajectories(&scenario)?))?;
            }
            let artifact = match config.format {
                Some(Format::Csv) => price_csv(&eq.lambda),
                _ => to_json(&DynamicOutput {
                    converged: status == EXIT_OK,
                    equilibrium: &eq,
                })?,
            };
            Ok(Outcome { artifact, status })
        }
        Command::Verify { equilibrium, mode } => {
            json_only(config, "verify")?;
            verify(config, equilibrium, *mode)
        }
        Command::ReproduceExample { number } => {
            let (table, pass) = reproduce(*number, config.seed)?;
            Ok(Outcome {
                artifact: table,
                status: if pass { EXIT_OK } else { EXIT_SOLVER },
            })
        }
    }
}

fn solve_static(config: &RunConfig, mode: Mode) -> Result<Outcome> {
    json_only(config, mode_command(mode))?;
    let scenario: StaticScenario = read_json(input(config)?)?;
    let eq = solve(&scenario, mode, &bisection(config)?)?;
    Ok(Outcome::ok(to_json(&eq)?))
}

fn mode_command(mode: Mode) -> &'static str {
    match mode {
        Mode::Sald => "solve-sald",
        Mode::Saltd => "solve-saltd",
    }
}

#[derive(Serialize)]
struct CertifyOutput {
    #[serde(flatten)]
    certificate: WorstCaseCertificate,
    /// Witness price recomputed by the general bisection solver.
    witness_solver_price: f64,
}

impl CertifyOutput {
    fn new(certificate: WorstCaseCertificate, capacity: f64) -> Result<Self> {
        let scenario = StaticScenario::uniform(&certificate.witness.utilities(), capacity);
        let eq = solve(&scenario, Mode::Sald, &BisectionOptions::default())?;
        Ok(Self {
            certificate,
            witness_solver_price: eq.lambda,
        })
    }
}

#[derive(Serialize)]
struct DynamicOutput<'a> {
    converged: bool,
    #[serde(flatten)]
    equilibrium: &'a DynamicEquilibrium,
}

#[derive(Serialize)]
struct StaticVerifyOutput {
    #[serde(flatten)]
    report: crate::static_eq::VerificationReport,
    welfare: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle: Option<OracleResult>,
}

fn verify(config: &RunConfig, equilibrium: &Path, mode: VerifyMode) -> Result<Outcome> {
    let scenario_path = input(config)?;
    let (artifact, accepted) = match mode {
        VerifyMode::Sald | VerifyMode::Saltd => {
            let mode = if mode == VerifyMode::Sald { Mode::Sald } else { Mode::Saltd };
            let scenario: StaticScenario = read_json(scenario_path)?;
            let eq: StaticEquilibrium = read_json(equilibrium)?;
            let tol = config.tol.map_or_else(Tolerances::default, Tolerances::uniform);
            let report = verify_equilibrium(&scenario, &eq, mode, &tol)?;
            let oracle = config
                .resolution
                .map(|r| match mode {
                    Mode::Sald => dp_welfare_sald(&scenario, r),
                    Mode::Saltd => dp_welfare_saltd(&scenario, r),
                })
                .transpose()?;
            let accepted = report.accepted;
            let out = StaticVerifyOutput {
                report,
                welfare: scenario.welfare(&eq.x),
                oracle,
            };
            (to_json(&out)?, accepted)
        }
        VerifyMode::Daltd => {
            let scenario: DynamicScenario = read_json(scenario_path)?;
            let eq: DynamicEquilibrium = read_json(equilibrium)?;
            let tol = DynamicTolerances {
                residual: config.tol.unwrap_or(crate::dynamic::DEFAULT_TOL),
                ..Default::default()
            };
            let report = verify_dynamic_equilibrium(&scenario, &eq, &tol)?;
            let accepted = report.accepted;
            (to_json(&report)?, accepted)
        }
    };
    Ok(Outcome {
        artifact,
        status: if accepted { EXIT_OK } else { EXIT_SOLVER },
    })
}

/// Rows of a comparison table.
struct Table {
    text: String,
    pass: bool,
}

impl Table {
    fn new(title: &str) -> Self {
        Self {
            text: format!("{title}\n{:<28} {:>16} {:>16} {:>12}  result\n", "quantity", "reference", "computed", "|diff|"),
            pass: true,
        }
    }

    fn compare(&mut self, name: &str, reference: f64, computed: f64, tol: f64) {
        let diff = (reference - computed).abs();
        self.record(name, &fmt_sig(reference, 8), computed, &fmt_sig(diff, 3), diff <= tol);
    }

    fn check(&mut self, name: &str, expectation: &str, computed: f64, ok: bool) {
        self.record(name, expectation, computed, "", ok);
    }

    fn record(&mut self, name: &str, reference: &str, computed: f64, diff: &str, ok: bool) {
        self.pass &= ok;
        let verdict = if ok { "PASS" } else { "FAIL" };
        writeln!(self.text, "{name:<28} {reference:>16} {:>16} {diff:>12}  {verdict}", fmt_sig(computed, 8)).unwrap();
    }

    fn finish(mut self) -> (String, bool) {
        writeln!(self.text, "overall: {}", if self.pass { "PASS" } else { "FAIL" }).unwrap();
        (self.text, self.pass)
    }
}

const PUBLISHED_X: [f64; 4] = [6.429, 21.232, 5.652, 4.688];
const PUBLISHED_E: [f64; 4] = [6.571, -7.232, -1.652, 2.313];

/// Recomputes example `number` and tabulates it against the published values.
pub fn reproduce(number: u8, seed: u64) -> Result<(String, bool)> {
    match number {
        1 => Ok(reproduce_example1()?),
        2 => Ok(reproduce_example2()?),
        3 => Ok(reproduce_example3(seed)?),
        4 => Ok(reproduce_example4()?),
        _ => Err(EqError::InvalidInput(format!("there is no example {number}; choose 1-4"))),
    }
}

fn reproduce_example1() -> Result<(String, bool)> {
    let scenario: StaticScenario = parse_json(fixtures::EXAMPLE1, "example1.json")?;
    let mut table = Table::new("Example 1: capped-linear market, four agents");
    let opts = BisectionOptions::default();
    for mode in [Mode::Sald, Mode::Saltd] {
        let eq = solve(&scenario, mode, &opts)?;
        let tag = mode.label();
        table.compare(&format!("{tag} lambda"), 20.0, eq.lambda, 1e-3);
        for (i, (p, x)) in PUBLISHED_X.iter().zip(&eq.x).enumerate() {
            table.compare(&format!("{tag} x{}", i + 1), *p, *x, 1e-3);
        }
        if let Some(e) = &eq.e {
            for (i, (p, v)) in PUBLISHED_E.iter().zip(e).enumerate() {
                table.compare(&format!("{tag} e{}", i + 1), *p, *v, 1e-3);
            }
        }
    }
    Ok(table.finish())
}

fn reproduce_example2() -> Result<(String, bool)> {
    let mut table = Table::new("Example 2: price against capacity, 50-point grid");
    let opts = BisectionOptions::default();
    for (name, text) in [("PM.1", fixtures::EXAMPLE2_PM1), ("PM.2", fixtures::EXAMPLE2_PM2)] {
        let spec: SweepSpec = parse_json(text, name)?;
        let grid = spec.capacities();
        let sald = price_capacity_sweep(&spec.utilities, &grid, Mode::Sald, &opts)?;
        let saltd = price_capacity_sweep(&spec.utilities, &grid, Mode::Saltd, &opts)?;
        let nonincreasing = |pts: &[crate::static_eq::SweepPoint]| pts.windows(2).all(|w| w[1].lambda <= w[0].lambda + 1e-9);
        let last = sald.last().expect("nonempty grid").lambda;
        table.check(&format!("{name} sald nonincreasing"), "true", last, nonincreasing(&sald));
        table.check(&format!("{name} saltd nonincreasing"), "true", saltd.last().expect("nonempty grid").lambda, nonincreasing(&saltd));
        let min_saltd = saltd.iter().map(|p| p.lambda).fold(f64::INFINITY, f64::min);
        table.check(&format!("{name} min saltd price"), ">= 0", min_saltd, min_saltd >= 0.0);
        let capacity = grid.last().copied().unwrap_or(0.0);
        let (num, den) = spec.utilities.iter().fold((0.0, 0.0), |(n, d), u| match u {
            crate::utility::UtilityFunction::Quadratic { b, k } => (n + k / b, d + 1.0 / b),
            _ => (n, d),
        });
        let reference = (num - capacity) / den;
        if name == "PM.1" {
            table.compare(&format!("{name} sald price at C=40"), reference, last, 1e-2);
        } else {
            table.check(&format!("{name} sald price at C=40"), "< 0", last, last < 0.0);
        }
    }
    Ok(table.finish())
}

fn reproduce_example3(seed: u64) -> Result<(String, bool)> {
    let mut table = Table::new("Example 3: socially admissible quadratic utilities");
    let bounds: ShapingBounds = parse_json(fixtures::EXAMPLE3_BOUNDS, "example3_bounds.json")?;
    let report = is_admissible(&bounds);
    table.check("admissible", "true", f64::from(u8::from(report.admissible)), report.admissible);
    for (j, s) in report.slacks.iter().enumerate() {
        table.check(&format!("slack {}", j + 1), ">= 0", *s, *s >= 0.0);
    }
    let k_spec: ContourSpec = parse_json(fixtures::EXAMPLE3_K_CONTOUR, "example3_k_contour.json")?;
    let b_spec: ContourSpec = parse_json(fixtures::EXAMPLE3_B_CONTOUR, "example3_b_contour.json")?;
    let mut k_max = f64::NEG_INFINITY;
    for k3 in [42.0, 44.0, 46.0, 48.0] {
        let mut spec = k_spec.clone();
        spec.k[2] = k3;
        let peak = contour_sweep(&spec)?.max().0;
        table.check(&format!("k-sweep max, k3={k3}"), "<= 42", peak, peak <= bounds.lambda_dagger);
        k_max = k_max.max(peak);
    }
    let mut b_max = f64::NEG_INFINITY;
    for b3 in [4.4, 4.8, 5.2, 5.6] {
        let mut spec = b_spec.clone();
        spec.b[2] = b3;
        let peak = contour_sweep(&spec)?.max().0;
        table.check(&format!("b-sweep max, b3={b3}"), "<= 42", peak, peak <= bounds.lambda_dagger);
        b_max = b_max.max(peak);
    }
    table.check("b-sweep overall max", "21 (20.9..21.5)", b_max, (20.9..=21.5).contains(&b_max));
    table.check("k-sweep overall max", "<= 42", k_max, k_max <= bounds.lambda_dagger);
    let cert = certify_worst_case_price(&bounds, 10_000, seed)?;
    let out = CertifyOutput::new(cert, bounds.capacity)?;
    table.check("certified worst price", "<= 42", out.certificate.worst_price, out.certificate.certified);
    table.compare("witness price by bisection", out.certificate.worst_price, out.witness_solver_price, 1e-6);
    Ok(table.finish())
}

fn reproduce_example4() -> Result<(String, bool)> {
    let scenario: DynamicScenario = parse_json(fixtures::EXAMPLE4, "example4.json")?;
    let mut table = Table::new("Example 4: dynamic market, three agents, T = 30");
    let (eq, converged) = match solve_daltd(&scenario, &DynamicOptions::default()) {
        Ok(eq) => (eq, true),
        Err(EqError::NoConvergence { last, .. }) => (*last, false),
        Err(e) => return Err(e),
    };
    table.check("converged", "true", eq.iterations as f64, converged);
    table.check("max balance residual", "<= 1e-4", eq.residual, eq.residual <= 1e-4);
    let min_price = eq.lambda.iter().copied().fold(f64::INFINITY, f64::min);
    table.check("min price", ">= 0", min_price, min_price >= 0.0);
    let report = verify_dynamic_equilibrium(&scenario, &eq, &DynamicTolerances::default())?;
    let worst = report
        .agents
        .iter()
        .map(|a| a.payoff_gap / (1.0 + a.best_payoff.abs()))
        .fold(0.0, f64::max);
    table.check("relative re-solve payoff gap", "<= 1e-3", worst, report.accepted);
    let (mut text, pass) = table.finish();
    text.push('\n');
    text.push_str(&price_csv(&eq.lambda));
    Ok((text, pass))
}
