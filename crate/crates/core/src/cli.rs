//! Command-line front end. Every subcommand builds a [`VerificationReport`],
//! prints one line per check and writes the report under `--out`.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails or a
//! computation breaks down, 2 for usage and configuration errors.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::discretize::{build_hamiltonian, DiscretizationConfig};
use crate::eigensolve::{count_below, extrapolated_spectrum_below, full_eigenbasis, spectrum_below};
use crate::error::{Error, Result};
use crate::heat_trace::{
    golden_thompson_check, heat_refinement_slack, heat_trace, oscillator_golden_thompson, scaled_heat_curve,
};
use crate::matrix_elements::{
    gap_formula_all_pairs, kinetic_matrix, quadratic_identity_check, sum_rule_discrete_corrected, sum_rule_residual,
    trace_formula_residual, KineticMatrix, TestFunction,
};
use crate::moments::{check_monotonicity, geometric_grid, lt_check, moment_curve, refinement_slack, sech_squared_curve};
use crate::oscillator_exact::{breakpoint, breakpoint_index, p_derivative, DerivativeSide, OscillatorModel, Sign};
use crate::potentials::{parse_potential, sech_squared_levels, ClassicalBound, Family, PotentialKind, PotentialSpec};
use crate::quadrature::QuadratureConfig;
use crate::report::{Check, Table, TheoremRef, VerificationReport};
use crate::suite::{self, CORRECTED_SUM_RULE_TOL, EIGENVALUE_TOL, GAP_TOL, LT_RATIO_MAX, QUADRATIC_TOL, RATIO_RANGE, TRACE_TOL};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Default grid order for commands that need every eigenvector of a well.
const MATRIX_POINTS_WELL: usize = 1999;
/// Default upper cutoff for listing the spectrum of a confining potential.
const DEFAULT_SPECTRUM_CUTOFF: f64 = 10.0;
/// Energy budget `t · cutoff` for the exponential test function.
const HEAT_EXPONENT_BUDGET: f64 = 60.0;

#[derive(Debug, Parser)]
#[command(name = "momentlab", version, about = "Eigenvalue-moment verifications for H(alpha) = -alpha d^2/dx^2 + V")]
#[command(args_override_self = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Options,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
enum Command {
    /// Eigenvalues below 0 (wells) or below --cutoff (confining).
    Spectrum,
    /// Gap formula, corrected and continuum sum rules on a full eigenbasis.
    SumRule,
    /// Trace formula with (z-E)_+^sigma on wells or e^{-tE} on confining potentials.
    TraceFormula,
    /// Quadratic identity at threshold --z.
    QuadraticIdentity,
    /// Scaled Riesz-mean curve over a geometric alpha grid.
    Moments,
    /// Ratio of the scaled moment to the classical bound (sigma >= 2).
    LtCheck,
    /// Heat trace at one alpha, or the scaled heat-trace curve over a grid.
    HeatTrace,
    /// Golden-Thompson ratio for a confining potential.
    GoldenThompson,
    /// Sign of the derivative of the exact oscillator moment at a breakpoint.
    Oscillator,
    /// The full acceptance suite.
    All,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::SumRule => "sum-rule",
            Command::TraceFormula => "trace-formula",
            Command::QuadraticIdentity => "quadratic-identity",
            Command::Moments => "moments",
            Command::LtCheck => "lt-check",
            Command::HeatTrace => "heat-trace",
            Command::GoldenThompson => "golden-thompson",
            Command::Oscillator => "oscillator",
            Command::All => "all",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    /// JSON report only.
    Json,
    /// JSON report plus CSV tables.
    Csv,
    /// Same as csv.
    Both,
}

#[derive(Debug, Clone, Default, Args)]
struct Options {
    /// Potential, e.g. sech2:g=6, harmonic:w2=1, square:depth=1,half_width=1,
    /// gauss:depth=1,width=1, quartic:c=1, grid:file=v.csv
    #[arg(long, global = true)]
    potential: Option<String>,
    /// Coupling constant.
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Smallest alpha of the geometric grid.
    #[arg(long, global = true)]
    alpha_min: Option<f64>,
    /// Largest alpha of the geometric grid.
    #[arg(long, global = true)]
    alpha_max: Option<f64>,
    /// Number of grid points.
    #[arg(long, global = true)]
    alpha_points: Option<usize>,
    /// Moment exponent.
    #[arg(long, global = true)]
    sigma: Option<f64>,
    /// Heat-trace time.
    #[arg(long, global = true)]
    t: Option<f64>,
    /// Spectral threshold of the Riesz mean.
    #[arg(long, global = true, allow_hyphen_values = true)]
    z: Option<f64>,
    /// Dimension; the potential becomes the isotropic separable sum.
    #[arg(long, global = true)]
    d: Option<usize>,
    /// Interior grid points of the finite-difference box.
    #[arg(long, global = true)]
    grid_n: Option<usize>,
    /// Half-width L of the box [-L, L].
    #[arg(long, global = true)]
    half_width: Option<f64>,
    /// Additive slack for monotonicity verdicts (default: refinement estimate).
    #[arg(long, global = true)]
    slack: Option<f64>,
    /// Output directory for report files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output files to write.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// File of `key = value` lines supplying any of these options.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// State index.
    #[arg(long, global = true)]
    j: Option<usize>,
    /// Oscillator breakpoint: first, second, or an index k >= 1.
    #[arg(long, global = true)]
    point: Option<String>,
    /// Energy cutoff for spectra and trace-formula truncation.
    #[arg(long, global = true, allow_hyphen_values = true)]
    cutoff: Option<f64>,
    /// Permit full eigenbases above the default size cap.
    #[arg(long, global = true)]
    allow_large: bool,
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match parse_with_config(&argv) {
        Ok(cli) => cli,
        Err(Failure::Clap(e)) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let start = Instant::now();
    let mut report = match execute(cli.command, &cli.opts) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code_for(&e);
        }
    };
    report.runtime_seconds = start.elapsed().as_secs_f64();
    for c in &report.checks {
        println!("{}", check_line(c));
    }
    let passed = report.checks.iter().filter(|c| c.passed).count();
    println!("{}: {passed}/{} checks passed", report.command, report.checks.len());
    let format = cli.opts.format.unwrap_or(Format::Both);
    let out = cli.opts.out.clone().unwrap_or_else(|| PathBuf::from("."));
    match report.write(&out, true, format != Format::Json) {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    }
    if report.passed() {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::AtAlpha { source, .. } => exit_code_for(source),
        Error::Config(_)
        | Error::Parse(_)
        | Error::Domain(_)
        | Error::Io { .. }
        | Error::BranchCrossing { .. }
        | Error::Breakpoint { .. }
        | Error::CutoffTooLow { .. } => EXIT_USAGE,
        _ => EXIT_FAIL,
    }
}

fn check_line(c: &Check) -> String {
    let status = if c.passed { "PASS" } else { "FAIL" };
    let values: Vec<String> = c.values.iter().map(|(k, v)| format!("{k}={v:.6e}")).collect();
    let mut line = format!("{status} {} [{}] {}", c.name, c.theorem_ref.as_str(), values.join(" "));
    if let Some(note) = &c.note {
        line.push_str(&format!(" ({note})"));
    }
    line
}

enum Failure {
    Clap(clap::Error),
    Lib(Error),
}

/// Parses `argv`; when `--config` is present its entries are inserted
/// ahead of the command-line flags, which therefore take precedence.
fn parse_with_config(argv: &[OsString]) -> std::result::Result<Cli, Failure> {
    let first = Cli::try_parse_from(argv).map_err(Failure::Clap)?;
    let Some(path) = first.opts.config.clone() else {
        return Ok(first);
    };
    let entries = read_config(&path).map_err(Failure::Lib)?;
    let mut merged: Vec<OsString> = Vec::with_capacity(argv.len() + 2 * entries.len());
    merged.push(argv.first().cloned().unwrap_or_else(|| "momentlab".into()));
    for (key, value) in entries {
        if key == "allow-large" {
            match value.as_str() {
                "true" => merged.push("--allow-large".into()),
                "false" => {}
                _ => return Err(Failure::Lib(Error::Config(format!("allow-large must be true or false, got {value:?}")))),
            }
        } else {
            merged.push(format!("--{key}").into());
            merged.push(value.into());
        }
    }
    merged.extend(argv.iter().skip(1).cloned());
    Cli::try_parse_from(&merged).map_err(Failure::Clap)
}

const CONFIG_KEYS: [&str; 18] = [
    "potential",
    "alpha",
    "alpha-min",
    "alpha-max",
    "alpha-points",
    "sigma",
    "t",
    "z",
    "d",
    "grid-n",
    "half-width",
    "slack",
    "out",
    "format",
    "j",
    "point",
    "cutoff",
    "allow-large",
];

/// Reads `key = value` lines; `#` starts a comment. Keys use the long flag
/// names, with `_` accepted for `-`.
fn read_config(path: &Path) -> Result<Vec<(String, String)>> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    let mut entries: Vec<(String, String)> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("{}:{}: expected `key = value`", path.display(), n + 1)))?;
        let key = key.trim().replace('_', "-");
        let value = value.trim().to_owned();
        if !CONFIG_KEYS.contains(&key.as_str()) {
            return Err(Error::Config(format!("{}:{}: unknown key {key:?}", path.display(), n + 1)));
        }
        if value.is_empty() {
            return Err(Error::Config(format!("{}:{}: empty value for {key}", path.display(), n + 1)));
        }
        if entries.iter().any(|(k, _)| *k == key) {
            return Err(Error::Config(format!("{}:{}: duplicate key {key}", path.display(), n + 1)));
        }
        entries.push((key, value));
    }
    Ok(entries)
}

/// Resolved inputs of one invocation, recorded verbatim in the report.
struct Ctx<'a> {
    opts: &'a Options,
    params: BTreeMap<String, String>,
}

impl<'a> Ctx<'a> {
    fn new(opts: &'a Options) -> Self {
        Self {
            opts,
            params: BTreeMap::new(),
        }
    }

    fn record(&mut self, key: &str, value: impl ToString) {
        self.params.insert(key.to_owned(), value.to_string());
    }

    fn real(&mut self, key: &str, value: Option<f64>, default: f64) -> f64 {
        let v = value.unwrap_or(default);
        self.record(key, v);
        v
    }

    fn dimension(&mut self) -> Result<usize> {
        let d = self.opts.d.unwrap_or(1);
        if d == 0 {
            return Err(Error::Config("--d must be at least 1".into()));
        }
        self.record("d", d);
        Ok(d)
    }

    fn potential(&mut self) -> Result<PotentialSpec> {
        let text = self
            .opts
            .potential
            .clone()
            .ok_or_else(|| Error::Config("--potential is required for this command".into()))?;
        let d = self.dimension()?;
        let spec = parse_potential(&text, d)?;
        self.record("potential", text.trim());
        Ok(spec)
    }

    fn one_dimensional(&mut self) -> Result<PotentialSpec> {
        let spec = self.potential()?;
        if spec.dimension() != 1 {
            return Err(Error::Config("this command works on one-dimensional grids; drop --d".into()));
        }
        Ok(spec)
    }

    fn alpha(&mut self) -> Result<f64> {
        let a = self.real("alpha", self.opts.alpha, 1.0);
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::Config(format!("--alpha must be positive, got {a}")));
        }
        Ok(a)
    }

    fn grid_requested(&self) -> bool {
        self.opts.alpha_min.is_some() || self.opts.alpha_max.is_some() || self.opts.alpha_points.is_some()
    }

    fn alpha_grid(&mut self, min: f64, max: f64, points: usize) -> Result<Vec<f64>> {
        let min = self.real("alpha-min", self.opts.alpha_min, min);
        let max = self.real("alpha-max", self.opts.alpha_max, max);
        let points = self.opts.alpha_points.unwrap_or(points);
        self.record("alpha-points", points);
        geometric_grid(min, max, points)
    }

    fn discretization(&mut self, spec: &PotentialSpec, matrix: bool) -> Result<DiscretizationConfig> {
        let standard = DiscretizationConfig::standard_for(spec);
        let default_points = if matrix && spec.kind() != PotentialKind::Confining {
            MATRIX_POINTS_WELL
        } else {
            standard.points
        };
        let half_width = self.opts.half_width.unwrap_or(standard.half_width);
        let points = self.opts.grid_n.unwrap_or(default_points);
        self.record("half-width", half_width);
        self.record("grid-n", points);
        if matrix {
            self.record("allow-large", self.opts.allow_large);
        }
        DiscretizationConfig::new(half_width, points)
    }

    fn finish(self, command: Command, checks: Vec<Check>, tables: Vec<Table>) -> VerificationReport {
        let mut report = VerificationReport::new(command.name(), self.params);
        report.checks = checks;
        report.tables = tables;
        report
    }
}

fn execute(command: Command, opts: &Options) -> Result<VerificationReport> {
    let mut ctx = Ctx::new(opts);
    let (checks, tables) = match command {
        Command::Spectrum => cmd_spectrum(&mut ctx)?,
        Command::SumRule => cmd_sum_rule(&mut ctx)?,
        Command::TraceFormula => cmd_trace_formula(&mut ctx)?,
        Command::QuadraticIdentity => cmd_quadratic(&mut ctx)?,
        Command::Moments => cmd_moments(&mut ctx)?,
        Command::LtCheck => cmd_lt_check(&mut ctx)?,
        Command::HeatTrace => cmd_heat_trace(&mut ctx)?,
        Command::GoldenThompson => cmd_golden_thompson(&mut ctx)?,
        Command::Oscillator => cmd_oscillator(&mut ctx)?,
        Command::All => cmd_all(),
    };
    Ok(ctx.finish(command, checks, tables))
}

type Outcome = Result<(Vec<Check>, Vec<Table>)>;

fn cmd_spectrum(ctx: &mut Ctx) -> Outcome {
    let spec = ctx.potential()?;
    let alpha = ctx.alpha()?;
    let cfg = ctx.discretization(&spec, false)?;
    let cutoff = match spec.kind() {
        PotentialKind::Decaying => ctx.real("cutoff", Some(0.0), 0.0),
        _ => ctx.real("cutoff", ctx.opts.cutoff, DEFAULT_SPECTRUM_CUTOFF),
    };
    if spec.kind() == PotentialKind::Decaying && ctx.opts.cutoff.is_some_and(|c| c != 0.0) {
        return Err(Error::Config("wells list their negative spectrum; --cutoff applies to confining potentials".into()));
    }
    let spectrum = spectrum_below(&spec, alpha, &cfg, cutoff, false)?;
    let mut checks = Vec::new();
    let mut table = Table::new("spectrum", &["index", "eigenvalue"]);
    for (j, e) in spectrum.eigenvalues().iter().enumerate() {
        table.push(vec![j as f64, *e]);
    }
    if spec.dimension() == 1 {
        let count = count_below(&build_hamiltonian(&spec, alpha, &cfg)?, cutoff);
        checks.push(
            Check::new("sturm-count-consistent", TheoremRef::SchrodingerOperator, 0.0, count == spectrum.len())
                .with("sturm_count", count as f64)
                .with("eigenvalues", spectrum.len() as f64),
        );
        let exact: Option<Vec<f64>> = match *spec.family() {
            Family::SechSquaredWell { depth } => Some(sech_squared_levels(depth, alpha)),
            Family::HarmonicWell { stiffness } => {
                let w = (alpha * stiffness).sqrt();
                Some((0..).map(|m| w * (2 * m + 1) as f64).take_while(|&e| e < cutoff).collect())
            }
            _ => None,
        };
        if let Some(exact) = exact {
            let rich = extrapolated_spectrum_below(&spec, alpha, &cfg, cutoff)?;
            let worst = rich
                .eigenvalues()
                .iter()
                .zip(&exact)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            checks.push(
                Check::new("closed-form-count", TheoremRef::SchrodingerOperator, 0.0, rich.len() == exact.len())
                    .with("numeric", rich.len() as f64)
                    .with("exact", exact.len() as f64),
            );
            let note = if spectrum.boundary_limited() {
                "h -> 0 extrapolation over n and (n-1)/2; shallowest state reaches the box walls, widen --half-width if this fails"
            } else {
                "h -> 0 extrapolation over n and (n-1)/2"
            };
            checks.push(Check::at_most("closed-form-max-error", TheoremRef::SchrodingerOperator, worst, EIGENVALUE_TOL).note(note));
        }
    }
    if checks.is_empty() {
        checks.push(Check::new("eigenvalues-finite", TheoremRef::SchrodingerOperator, 0.0, true).with("count", spectrum.len() as f64));
    }
    Ok((checks, vec![table]))
}

fn full_kinetic(ctx: &mut Ctx, spec: &PotentialSpec, alpha: f64, cfg: &DiscretizationConfig) -> Result<KineticMatrix> {
    kinetic_matrix(full_eigenbasis(spec, alpha, cfg, ctx.opts.allow_large)?)
}

fn refinement_check(name: &str, anchor: TheoremRef, coarse: f64, fine: f64) -> Check {
    Check::within(name, anchor, coarse / fine, RATIO_RANGE.0, RATIO_RANGE.1)
        .with("coarse_residual", coarse)
        .with("fine_residual", fine)
        .note("grid (n-1)/2 against n")
}

fn cmd_sum_rule(ctx: &mut Ctx) -> Outcome {
    let spec = ctx.one_dimensional()?;
    let alpha = ctx.alpha()?;
    let cfg = ctx.discretization(&spec, true)?;
    let j = ctx.opts.j.unwrap_or(0);
    ctx.record("j", j);
    let spectrum = full_eigenbasis(&spec, alpha, &cfg, ctx.opts.allow_large)?;
    let gap = gap_formula_all_pairs(&spectrum)?;
    let mut checks = vec![Check::at_most("gap-formula-all-pairs", TheoremRef::GapFormula, gap.relative(), GAP_TOL)
        .with("residual", gap.residual)
        .with("scale", gap.scale)];
    let kin = kinetic_matrix(spectrum)?;
    if j >= kin.len() {
        return Err(Error::Config(format!("--j {j} out of range (grid has {} states)", kin.len())));
    }
    let mut table = Table::new("sum-rule", &["j", "eigenvalue", "continuum_sum", "corrected_residual"]);
    let mut worst = 0.0f64;
    for k in 0..kin.len() {
        let r = sum_rule_discrete_corrected(&kin, k)?;
        worst = worst.max(r.relative());
        table.push(vec![k as f64, kin.eigenvalues()[k], r.value, r.residual]);
    }
    checks.push(Check::at_most("corrected-sum-rule-all-states", TheoremRef::SumRule, worst, CORRECTED_SUM_RULE_TOL));
    let fine = sum_rule_residual(&kin, j)?;
    let coarse_kin = full_kinetic(ctx, &spec, alpha, &cfg.coarsened()?)?;
    let coarse = sum_rule_residual(&coarse_kin, j)?;
    checks.push(
        refinement_check("continuum-sum-rule-refinement", TheoremRef::SumRule, coarse.residual, fine.residual)
            .with("sum", fine.value)
            .with("state", j as f64),
    );
    Ok((checks, vec![table]))
}

fn cmd_trace_formula(ctx: &mut Ctx) -> Outcome {
    let spec = ctx.one_dimensional()?;
    let alpha = ctx.alpha()?;
    let cfg = ctx.discretization(&spec, true)?;
    let (f, cutoff) = match spec.kind() {
        PotentialKind::Confining => {
            let t = ctx.real("t", ctx.opts.t, 1.0);
            let cutoff = ctx.real("cutoff", ctx.opts.cutoff, HEAT_EXPONENT_BUDGET / t);
            (TestFunction::Exponential { t }, cutoff)
        }
        _ => {
            let z = ctx.real("z", ctx.opts.z, 0.0);
            let sigma = ctx.real("sigma", ctx.opts.sigma, 2.0);
            if ctx.opts.cutoff.is_some() {
                return Err(Error::Config("(z-E)_+^sigma vanishes above z; --cutoff is fixed to z".into()));
            }
            (TestFunction::RieszPower { z, sigma }, z)
        }
    };
    f.validate().map_err(|e| Error::Config(e.to_string()))?;
    let fine = trace_formula_residual(&full_kinetic(ctx, &spec, alpha, &cfg)?, &f, cutoff)?;
    let coarse = trace_formula_residual(&full_kinetic(ctx, &spec, alpha, &cfg.coarsened()?)?, &f, cutoff)?;
    let checks = vec![
        Check::at_most("trace-formula", TheoremRef::TraceFormula, fine.relative(), TRACE_TOL)
            .with("residual", fine.residual)
            .with("scale", fine.scale)
            .with("cutoff", cutoff),
        refinement_check("trace-formula-refinement", TheoremRef::TraceFormula, coarse.residual, fine.residual),
    ];
    Ok((checks, Vec::new()))
}

fn cmd_quadratic(ctx: &mut Ctx) -> Outcome {
    let spec = ctx.one_dimensional()?;
    let alpha = ctx.alpha()?;
    let cfg = ctx.discretization(&spec, true)?;
    let z = ctx.real("z", ctx.opts.z, 0.0);
    let q = quadratic_identity_check(&full_kinetic(ctx, &spec, alpha, &cfg)?, z)?;
    let mut checks = vec![Check::at_most("quadratic-identity", TheoremRef::QuadraticIdentity, q.residual / q.scale, QUADRATIC_TOL)
        .with("lhs", q.lhs)
        .with("rhs", q.rhs)
        .with("scale", q.scale)
        .with("states_below", q.states_below as f64)];
    if z <= 0.0 {
        checks.push(Check::at_most("rhs-nonpositive", TheoremRef::QuadraticIdentity, q.rhs, 0.0));
    }
    Ok((checks, Vec::new()))
}

fn cmd_moments(ctx: &mut Ctx) -> Outcome {
    let spec = ctx.potential()?;
    let sigma = ctx.real("sigma", ctx.opts.sigma, 2.0);
    let z = ctx.real("z", ctx.opts.z, 0.0);
    let grid = ctx.alpha_grid(0.05, 5.0, 50)?;
    let cfg = ctx.discretization(&spec, false)?;
    let curve = moment_curve(&spec, sigma, &grid, &cfg, z)?;
    let mut table = Table::new("curve", &["alpha", "value", "bound_state_count"]);
    for ((a, v), c) in curve.alpha_grid.iter().zip(&curve.values).zip(&curve.bound_state_counts) {
        table.push(vec![*a, *v, *c as f64]);
    }
    let mut checks = vec![Check::new("values-nonnegative", TheoremRef::CouplingMonotonicity, 0.0, curve.values.iter().all(|v| *v >= 0.0))];
    let theorem_applies = sigma >= 2.0 && z == 0.0 && spec.kind() == PotentialKind::Decaying;
    if theorem_applies {
        let slack = match ctx.opts.slack {
            Some(s) => s,
            None => refinement_slack(&spec, sigma, &grid, &cfg, z)?,
        };
        ctx.record("slack", slack);
        let verdict = check_monotonicity(&curve, slack);
        let mut c = Check::new("non-increasing", TheoremRef::CouplingMonotonicity, slack, verdict.non_increasing)
            .with("max_violation", verdict.max_violation)
            .with("slack", verdict.slack_used);
        if let Some((lo, hi)) = verdict.violation_location {
            c = c.with("violation_alpha_lo", lo).with("violation_alpha_hi", hi);
        }
        checks.push(c);
        if spec.dimension() == 1 {
            let bound = ClassicalBound::new(&spec, sigma, &QuadratureConfig::default())?.bound;
            let worst = curve.values.iter().fold(0.0f64, |m, v| m.max(v / bound));
            checks.push(
                Check::at_most("sharp-bound-ratio-max", TheoremRef::SharpLiebThirring, worst, LT_RATIO_MAX).with("classical_bound", bound),
            );
        }
        if let (Family::SechSquaredWell { depth }, 1) = (spec.family(), spec.dimension()) {
            let exact = sech_squared_curve(*depth, sigma, &grid, 0.0)?;
            let verdict = check_monotonicity(&exact, 0.0);
            checks.push(
                Check::new("closed-form-non-increasing", TheoremRef::CouplingMonotonicity, 0.0, verdict.non_increasing)
                    .with("max_violation", verdict.max_violation),
            );
        }
    }
    Ok((checks, vec![table]))
}

fn cmd_lt_check(ctx: &mut Ctx) -> Outcome {
    let spec = ctx.potential()?;
    let sigma = ctx.real("sigma", ctx.opts.sigma, 2.0);
    let alpha = ctx.alpha()?;
    let cfg = ctx.discretization(&spec, false)?;
    let quad = QuadratureConfig::default();
    let r = lt_check(&spec, sigma, alpha, &cfg, &quad)?;
    let mut c = Check::at_most("ratio", TheoremRef::SharpLiebThirring, r.ratio, LT_RATIO_MAX)
        .with("scaled_moment", r.scaled_moment)
        .with("classical_bound", r.classical_bound)
        .with("bound_states", r.bound_states as f64);
    if r.boundary_limited {
        c = c.note("shallowest state is boundary-limited");
    }
    let mut checks = vec![c];
    if let (Family::SechSquaredWell { depth }, 1) = (spec.family(), spec.dimension()) {
        let exact = alpha.sqrt() * sech_squared_levels(*depth, alpha).iter().map(|e| (-e).powf(sigma)).sum::<f64>();
        let ratio = exact / r.classical_bound;
        checks.push(Check::at_most("closed-form-ratio", TheoremRef::SharpLiebThirring, ratio, 1.0).with("scaled_moment", exact));
    }
    Ok((checks, Vec::new()))
}

fn require_confining(spec: &PotentialSpec) -> Result<()> {
    if spec.kind() == PotentialKind::Confining {
        Ok(())
    } else {
        Err(Error::Domain("heat traces need a confining potential (harmonic, quartic)".into()))
    }
}

fn cmd_heat_trace(ctx: &mut Ctx) -> Outcome {
    let spec = ctx.potential()?;
    require_confining(&spec)?;
    let t = ctx.real("t", ctx.opts.t, 1.0);
    let cfg = ctx.discretization(&spec, false)?;
    if ctx.grid_requested() {
        let grid = ctx.alpha_grid(0.25, 4.0, 12)?;
        let slack = match ctx.opts.slack {
            Some(s) => s,
            None => heat_refinement_slack(&spec, t, &grid, &cfg)?,
        };
        ctx.record("slack", slack);
        let (curve, verdict) = scaled_heat_curve(&spec, t, &grid, &cfg, slack)?;
        let mut table = Table::new("curve", &["alpha", "value"]);
        for (a, v) in curve.alpha_grid.iter().zip(&curve.values) {
            table.push(vec![*a, *v]);
        }
        let check = Check::new("non-increasing", TheoremRef::HeatTraceMonotonicity, slack, verdict.non_increasing)
            .with("max_violation", verdict.max_violation)
            .with("slack", verdict.slack_used)
            .with("truncation_tail_bound", curve.truncation_tail_bound);
        return Ok((vec![check], vec![table]));
    }
    let alpha = ctx.alpha()?;
    let ht = heat_trace(&spec, alpha, t, &cfg, ctx.opts.cutoff)?;
    let mut checks = vec![Check::at_most("tail-certified", TheoremRef::HeatTraceMonotonicity, ht.tail_bound, 1e-10 * ht.trace)
        .with("trace", ht.trace)
        .with("cutoff", ht.cutoff)
        .with("states", ht.states as f64)];
    if let Family::HarmonicWell { stiffness } = *spec.family() {
        let exact = (2.0 * (t * (alpha * stiffness).sqrt()).sinh()).powi(-(spec.dimension() as i32));
        let refined = heat_trace(&spec, alpha, t, &cfg.refined(), ctx.opts.cutoff)?.trace;
        let tolerance = 10.0 * (ht.trace - refined).abs();
        checks.push(
            Check::close("closed-form", TheoremRef::HeatTraceMonotonicity, ht.trace, exact, tolerance)
                .note("tolerance is 10x the change under one grid refinement"),
        );
    }
    Ok((checks, Vec::new()))
}

fn cmd_golden_thompson(ctx: &mut Ctx) -> Outcome {
    let spec = ctx.potential()?;
    require_confining(&spec)?;
    let alpha = ctx.alpha()?;
    let t = ctx.real("t", ctx.opts.t, 1.0);
    let cfg = ctx.discretization(&spec, false)?;
    let gt = golden_thompson_check(&spec, alpha, t, &cfg, &QuadratureConfig::default())?;
    let mut checks = vec![Check::at_most("ratio", TheoremRef::GoldenThompson, gt.ratio, 1.0)
        .with("trace", gt.trace)
        .with("tail_bound", gt.tail_bound)
        .with("bound", gt.bound)];
    if let Family::HarmonicWell { stiffness } = *spec.family() {
        // the oscillator model has unit stiffness; rescaling alpha absorbs w2
        let model = OscillatorModel::new(spec.dimension(), alpha * stiffness)?;
        let exact = oscillator_golden_thompson(&model, t)?;
        checks.push(Check::at_most("closed-form-ratio", TheoremRef::GoldenThompson, exact.ratio, 1.0));
    }
    Ok((checks, Vec::new()))
}

fn cmd_oscillator(ctx: &mut Ctx) -> Outcome {
    let d = ctx.dimension()?;
    let sigma = ctx.real("sigma", ctx.opts.sigma, 2.0);
    let (alpha, k) = match (&ctx.opts.point, ctx.opts.alpha) {
        (Some(_), Some(_)) => return Err(Error::Config("give either --point or --alpha".into())),
        (Some(p), None) => {
            let k = match p.as_str() {
                "first" => 1,
                "second" => 2,
                other => other
                    .parse::<usize>()
                    .ok()
                    .filter(|k| *k >= 1)
                    .ok_or_else(|| Error::Config(format!("--point must be first, second or an index >= 1, got {other:?}")))?,
            };
            ctx.record("point", k);
            (breakpoint(d, k), Some(k))
        }
        (None, _) => {
            let a = ctx.alpha()?;
            (a, breakpoint_index(d, a))
        }
    };
    let side = if k.is_some() { DerivativeSide::Right } else { DerivativeSide::Central };
    let r = p_derivative(d, sigma, alpha, 1e-3 * alpha, side)?;
    let mut table = Table::new("derivative", &["alpha", "derivative", "error_estimate"]);
    table.push(vec![alpha, r.value, r.error_estimate]);
    let anchor = TheoremRef::OscillatorCounterexample;
    let mut checks = vec![Check::at_most(
        "extrapolation-error",
        anchor,
        r.error_estimate,
        1e-6 * r.value.abs().max(1.0),
    )];
    let sign_name = |s: Sign| match s {
        Sign::Positive => "positive",
        Sign::Zero => "zero",
        Sign::Negative => "negative",
    };
    let mut sign_check = |name: &str, passed: bool| {
        checks.push(
            Check::new(name, anchor, 0.0, passed)
                .with("derivative", r.value)
                .with("alpha", alpha)
                .note(format!("right derivative, sign {}", sign_name(r.sign))),
        )
    };
    match k {
        Some(1 | 2) if sigma < 2.0 => sign_check("derivative-positive", r.sign == Sign::Positive),
        Some(_) if sigma == 2.0 => {
            checks.push(Check::at_most("derivative-zero", anchor, r.value.abs(), suite::ZERO_DERIVATIVE_TOL).with("alpha", alpha))
        }
        _ => {}
    }
    Ok((checks, vec![table]))
}

fn cmd_all() -> (Vec<Check>, Vec<Table>) {
    let mut checks = Vec::new();
    let mut table = Table::new("criteria", &["criterion", "passed", "checks"]);
    for outcome in suite::run_all() {
        println!(
            "{} criterion {:2} {}",
            if outcome.passed() { "PASS" } else { "FAIL" },
            outcome.id,
            outcome.title
        );
        table.push(vec![outcome.id as f64, f64::from(u8::from(outcome.passed())), outcome.checks.len() as f64]);
        for mut c in outcome.checks {
            c.name = format!("criterion-{}/{}", outcome.id, c.name);
            checks.push(c);
        }
    }
    (checks, vec![table])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(args: &[&str]) -> (Command, Options) {
        let mut argv = vec!["momentlab"];
        argv.extend_from_slice(args);
        let cli = Cli::try_parse_from(argv).unwrap();
        (cli.command, cli.opts)
    }

    #[test]
    fn flags_parse_after_the_subcommand() {
        let (cmd, o) = opts(&["lt-check", "--potential", "sech2:g=6", "--sigma", "2", "--alpha", "1", "--z", "-2"]);
        assert_eq!(cmd, Command::LtCheck);
        assert_eq!(o.potential.as_deref(), Some("sech2:g=6"));
        assert_eq!(o.z, Some(-2.0));
    }

    #[test]
    fn config_lines_are_validated() {
        let dir = tempfile::tempdir().unwrap();
        let good = dir.path().join("good.conf");
        fs::write(&good, "# sweep\npotential = sech2:g=6\nalpha_min = 0.1 # lower\n\n").unwrap();
        let entries = read_config(&good).unwrap();
        assert_eq!(entries[1], ("alpha-min".to_owned(), "0.1".to_owned()));
        for bad in ["nonsense", "colour = red", "alpha = ", "alpha = 1\nalpha = 2"] {
            let path = dir.path().join("bad.conf");
            fs::write(&path, bad).unwrap();
            assert!(matches!(read_config(&path), Err(Error::Config(_))), "{bad:?}");
        }
    }

    #[test]
    fn command_line_overrides_config() {
        let dir = tempfile::tempdir().unwrap();
        let conf = dir.path().join("c.conf");
        fs::write(&conf, "alpha = 3\nsigma = 2.5\n").unwrap();
        let argv: Vec<OsString> = ["momentlab", "lt-check", "--config", conf.to_str().unwrap(), "--alpha", "1"]
            .iter()
            .map(OsString::from)
            .collect();
        let Ok(cli) = parse_with_config(&argv) else { panic!("parse failed") };
        assert_eq!(cli.opts.alpha, Some(1.0));
        assert_eq!(cli.opts.sigma, Some(2.5));
    }

    #[test]
    fn exit_codes_follow_error_kind() {
        assert_eq!(exit_code_for(&Error::Config("x".into())), EXIT_USAGE);
        assert_eq!(exit_code_for(&Error::Domain("x".into()).at_alpha(1.0)), EXIT_USAGE);
        assert_eq!(
            exit_code_for(&Error::Solver {
                message: "x".into(),
                residual: 1.0
            }),
            EXIT_FAIL
        );
    }

    #[test]
    fn lt_check_report_at_alpha_one() {
        let (cmd, o) = opts(&["lt-check", "--potential", "sech2:g=6", "--sigma", "2", "--alpha", "1"]);
        let report = execute(cmd, &o).unwrap();
        assert!(report.passed());
        let ratio = report.checks[0].values["value"];
        assert!((ratio - 0.9640).abs() < 2e-3, "{ratio}");
        assert_eq!(report.parameters["potential"], "sech2:g=6");
    }

    #[test]
    fn oscillator_first_point_is_zero_at_sigma_two() {
        let (cmd, o) = opts(&["oscillator", "--d", "1", "--sigma", "2", "--point", "first"]);
        let report = execute(cmd, &o).unwrap();
        assert!(report.passed(), "{:?}", report.checks);
        assert!(report.checks.iter().any(|c| c.name == "derivative-zero"));
    }

    #[test]
    fn oscillator_reports_later_points_without_expectation() {
        let (cmd, o) = opts(&["oscillator", "--d", "2", "--sigma", "1", "--point", "3"]);
        let report = execute(cmd, &o).unwrap();
        assert_eq!(report.checks.len(), 1);
        assert_eq!(report.checks[0].name, "extrapolation-error");
    }

    #[test]
    fn sigma_below_two_is_a_usage_error_for_lt_check_only() {
        let (cmd, o) = opts(&["lt-check", "--potential", "sech2:g=6", "--sigma", "1"]);
        let err = execute(cmd, &o).unwrap_err();
        assert_eq!(exit_code_for(&err), EXIT_USAGE);
        let (cmd, o) = opts(&["moments", "--potential", "sech2:g=6", "--sigma", "1", "--alpha-points", "5", "--grid-n", "999"]);
        let report = execute(cmd, &o).unwrap();
        assert!(report.passed());
        assert!(report.checks.iter().all(|c| c.theorem_ref != TheoremRef::SharpLiebThirring));
        assert_eq!(report.tables[0].rows.len(), 5);
    }
}
