//! Command-line front end: `solve`, `sweep`, `criterion` and `qualify`.
//!
//! Settings are layered, later layers winning: module defaults, a figure
//! preset, a flat `key = value` config file, then command-line flags.
//!
//! ```text
//! # run.cfg
//! dim = 2
//! interaction = attractive
//! psi0 = 3
//! xmax = 60
//! out_dir = out/fig3-green
//! ```

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::analysis::{classify, reference_levels, ClassificationReport, Label, Tolerances};
use crate::cnls::{
    effective_coefficient, first_integral, BoundaryCondition, Dimension, EquationSpec, Interaction, Potential,
    PSI_PLUS,
};
use crate::error::{Error, Result};
use crate::integrate::{
    dense_eval, fmt_float, integrate, order_check, IntegratorConfig, SolutionTrace, Termination, NOMINAL_ORDER,
};
use crate::oscillation::{criterion_bound, criterion_region, default_resolution, CoefficientPair};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Tolerances used by the exact-solution checks of `qualify`.
pub const ORACLE_RTOL: f64 = 1e-14;
pub const ORACLE_ATOL: f64 = 1e-17;
/// Tolerances used by the energy-drift checks of `qualify`.
pub const ENERGY_RTOL: f64 = 1e-10;
pub const ENERGY_ATOL: f64 = 1e-13;

/// Keys accepted in a config file.
pub const CONFIG_KEYS: &[&str] = &[
    "preset",
    "dim",
    "interaction",
    "potential",
    "psi0",
    "dpsi0",
    "grid",
    "xmax",
    "rtol",
    "atol",
    "epsilon_start",
    "blowup_threshold",
    "max_steps",
    "tangency_tol",
    "jobs",
    "out_dir",
    "trace_csv",
    "events_json",
    "report_json",
    "criterion_csv",
    "sweep_csv",
];

/// Boundary values of the published figures (`N = 2`, `ψ'(0) = 0`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Fig1,
    Fig2,
    Fig3,
}

impl Preset {
    pub fn interaction(self) -> Interaction {
        match self {
            Preset::Fig1 => Interaction::Repulsive,
            Preset::Fig2 | Preset::Fig3 => Interaction::Attractive,
        }
    }

    /// `ψ(0)` of the three curves in caption order.
    pub fn values(self) -> [f64; 3] {
        match self {
            Preset::Fig1 => [0.7, PSI_PLUS, 0.71],
            Preset::Fig2 => [0.65, PSI_PLUS, 0.75],
            Preset::Fig3 => [1.0, 3.0, 5.0],
        }
    }
}

/// Explicit output paths. Unset paths fall back to `out_dir`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outputs {
    pub trace_csv: Option<PathBuf>,
    pub events_json: Option<PathBuf>,
    pub report_json: Option<PathBuf>,
    pub criterion_csv: Option<PathBuf>,
    pub sweep_csv: Option<PathBuf>,
}

/// Everything one command needs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub dimension: Dimension,
    pub interaction: Interaction,
    /// `none`, `constant:V0` or `quadratic:A` (`V = A x²`).
    pub potential: Option<String>,
    pub psi0: Option<f64>,
    pub dpsi0: f64,
    pub grid: Vec<f64>,
    pub integrator: IntegratorConfig,
    pub preset: Option<Preset>,
    /// Worker threads for `sweep`; `None` uses every core.
    pub jobs: Option<usize>,
    pub out_dir: Option<PathBuf>,
    pub outputs: Outputs,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dimension: Dimension::Two,
            interaction: Interaction::Repulsive,
            potential: None,
            psi0: None,
            dpsi0: 0.0,
            grid: Vec::new(),
            integrator: IntegratorConfig::default(),
            preset: None,
            jobs: None,
            out_dir: None,
            outputs: Outputs::default(),
        }
    }
}

/// Writes to stdout, ignoring a closed pipe (`cnls-lab ... | head`).
fn emit_str(text: &str) {
    use std::io::Write as _;
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

macro_rules! emit {
    ($($arg:tt)*) => {
        emit_str(&format!("{}\n", format_args!($($arg)*)))
    };
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}

/// Parses a number, also accepting `1/sqrt2` and `-1/sqrt2`.
pub fn parse_value(key: &str, v: &str) -> Result<f64> {
    let v = v.trim();
    let x = match v {
        "1/sqrt2" | "+1/sqrt2" => PSI_PLUS,
        "-1/sqrt2" => -PSI_PLUS,
        _ => v
            .parse::<f64>()
            .map_err(|_| usage(format!("`{key}`: cannot parse `{v}` as a number")))?,
    };
    if x.is_finite() {
        Ok(x)
    } else {
        Err(usage(format!("`{key}`: `{v}` is not finite")))
    }
}

/// Comma-separated list of values; an empty string is an empty grid.
pub fn parse_grid(v: &str) -> Result<Vec<f64>> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_value("grid", s))
        .collect()
}

/// Builds the potential named by a preset string.
pub fn potential_preset(name: &str) -> Result<Option<Potential>> {
    let name = name.trim();
    if name == "none" {
        return Ok(None);
    }
    let (kind, arg) = name
        .split_once(':')
        .ok_or_else(|| usage(format!("`potential`: expected kind:value, got `{name}`")))?;
    let a = parse_value("potential", arg)?;
    match kind {
        "constant" => Ok(Some(Potential::new(name, move |_| a))),
        "quadratic" => Ok(Some(Potential::new(name, move |x| a * x * x))),
        _ => Err(usage(format!(
            "`potential`: unknown kind `{kind}` (expected constant or quadratic)"
        ))),
    }
}

/// Parses a flat config document into `(key, value)` pairs.
///
/// Blank lines and `#` comments are skipped; unknown and repeated keys are
/// rejected with the line number.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut out: Vec<(String, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("line {}: expected `key = value`", i + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if !CONFIG_KEYS.contains(&k) {
            return Err(usage(format!("line {}: unknown key `{k}`", i + 1)));
        }
        if out.iter().any(|(seen, _)| seen == k) {
            return Err(usage(format!("line {}: key `{k}` given twice", i + 1)));
        }
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io)?;
    }
    std::fs::write(path, contents).map_err(io)
}

impl RunConfig {
    pub fn apply_preset(&mut self, preset: Preset) {
        self.preset = Some(preset);
        self.dimension = Dimension::Two;
        self.interaction = preset.interaction();
        self.dpsi0 = 0.0;
        self.grid = preset.values().to_vec();
    }

    /// Sets one key; config-file entries and flags both go through here.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let num = |v: &str| parse_value(key, v);
        let path = |v: &str| Some(PathBuf::from(v));
        match key {
            "preset" => {
                let p = Preset::from_str(value, true).map_err(|_| {
                    usage(format!("`preset`: unknown preset `{value}` (expected fig1, fig2 or fig3)"))
                })?;
                self.apply_preset(p);
            }
            "dim" => {
                let n: u8 = value
                    .parse()
                    .map_err(|_| usage(format!("`dim`: expected 1, 2 or 3, got `{value}`")))?;
                self.dimension =
                    Dimension::new(n).map_err(|_| usage(format!("`dim`: expected 1, 2 or 3, got `{value}`")))?;
            }
            "interaction" => {
                self.interaction = match value {
                    "repulsive" => Interaction::Repulsive,
                    "attractive" => Interaction::Attractive,
                    _ => {
                        return Err(usage(format!(
                            "`interaction`: expected repulsive or attractive, got `{value}`"
                        )))
                    }
                }
            }
            "potential" => {
                potential_preset(value)?;
                self.potential = (value != "none").then(|| value.to_string());
            }
            "psi0" => self.psi0 = Some(num(value)?),
            "dpsi0" => self.dpsi0 = num(value)?,
            "grid" => self.grid = parse_grid(value)?,
            "xmax" => self.integrator.x_max = num(value)?,
            "rtol" => self.integrator.rel_tol = num(value)?,
            "atol" => self.integrator.abs_tol = num(value)?,
            "epsilon_start" => self.integrator.epsilon_start = num(value)?,
            "blowup_threshold" => self.integrator.blowup_threshold = Some(num(value)?),
            "tangency_tol" => self.integrator.tangency_tol = num(value)?,
            "max_steps" => {
                self.integrator.max_steps = value
                    .parse()
                    .map_err(|_| usage(format!("`max_steps`: expected a positive integer, got `{value}`")))?
            }
            "jobs" => {
                let n: usize = value
                    .parse()
                    .ok()
                    .filter(|&n| n > 0)
                    .ok_or_else(|| usage(format!("`jobs`: expected a positive integer, got `{value}`")))?;
                self.jobs = Some(n);
            }
            "out_dir" => self.out_dir = path(value),
            "trace_csv" => self.outputs.trace_csv = path(value),
            "events_json" => self.outputs.events_json = path(value),
            "report_json" => self.outputs.report_json = path(value),
            "criterion_csv" => self.outputs.criterion_csv = path(value),
            "sweep_csv" => self.outputs.sweep_csv = path(value),
            other => return Err(usage(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Defaults, then the preset, then the remaining entries in order.
    pub fn from_entries(entries: &[(String, String)]) -> Result<Self> {
        let mut cfg = Self::default();
        if let Some((_, p)) = entries.iter().find(|(k, _)| k == "preset") {
            cfg.set("preset", p)?;
        }
        for (k, v) in entries.iter().filter(|(k, _)| k != "preset") {
            cfg.set(k, v)?;
        }
        Ok(cfg)
    }

    pub fn equation(&self) -> Result<EquationSpec> {
        let mut spec = EquationSpec::new(self.dimension, self.interaction);
        if let Some(p) = self.potential.as_deref().map(potential_preset).transpose()?.flatten() {
            spec = spec.with_potential(p);
        }
        Ok(spec)
    }

    /// `psi0` if given, otherwise the preset's caption values.
    pub fn solve_values(&self) -> Result<Vec<f64>> {
        match (self.psi0, self.preset) {
            (Some(p), _) => Ok(vec![p]),
            (None, Some(preset)) => Ok(preset.values().to_vec()),
            (None, None) => Err(usage("`psi0` is required (or pick a --preset)")),
        }
    }

    /// Output path: the explicit one, else `out_dir[/<psi0>]/<file>`.
    fn output(&self, explicit: &Option<PathBuf>, file: &str, subdir: Option<f64>) -> Option<PathBuf> {
        if explicit.is_some() {
            return explicit.clone();
        }
        let dir = self.out_dir.as_ref()?;
        Some(match subdir {
            Some(p) => dir.join(fmt_float(p)).join(file),
            None => dir.join(file),
        })
    }
}

/// Integrates one boundary value with the reference levels watched and
/// classifies the result.
pub fn solve_one(cfg: &RunConfig, spec: &EquationSpec, psi0: f64) -> Result<(SolutionTrace, ClassificationReport)> {
    let bc = BoundaryCondition::new(cfg.dimension, psi0, cfg.dpsi0)?;
    let trace = integrate(spec, &bc, &cfg.integrator, &reference_levels(spec))?;
    let report = classify(&trace, spec, &Tolerances::default())?;
    Ok((trace, report))
}

/// Bound on the effective coefficient equivalent to `q > 1/(4x²)`.
///
/// The damping `(N-1)/x` adds `(N-1)(3-N)/(4x²)` to `q`: exactly the bound
/// for `N = 2`, nothing for `N = 1` and `N = 3`.
pub fn coefficient_bound(dimension: Dimension, x: f64) -> f64 {
    match dimension {
        Dimension::Two => 0.0,
        Dimension::One | Dimension::Three => criterion_bound(x, 0.0),
    }
}

/// CSV `x,psi,c_eff,criterion_bound,holds`, one row per trace sample.
pub fn criterion_csv(trace: &SolutionTrace, spec: &EquationSpec) -> Result<String> {
    let mut out = String::from("x,psi,c_eff,criterion_bound,holds\n");
    for s in trace.samples() {
        let c = effective_coefficient(spec, s.psi, s.x)?;
        let bound = coefficient_bound(spec.dimension, s.x);
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt_float(s.x),
            fmt_float(s.psi),
            fmt_float(c),
            fmt_float(bound),
            c > bound
        );
    }
    Ok(out)
}

/// One sweep row; failures are kept as their message.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub psi0: f64,
    pub outcome: std::result::Result<ClassificationReport, String>,
}

/// Classifies every grid value on up to `jobs` threads, in grid order.
pub fn run_sweep(cfg: &RunConfig, grid: &[f64]) -> Result<Vec<SweepRow>> {
    let spec = cfg.equation()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs.unwrap_or(0))
        .build()
        .map_err(|e| usage(format!("`jobs`: {e}")))?;
    Ok(pool.install(|| {
        grid.par_iter()
            .map(|&psi0| SweepRow {
                psi0,
                outcome: solve_one(cfg, &spec, psi0)
                    .map(|(_, r)| r)
                    .map_err(|e| e.to_string()),
            })
            .collect()
    }))
}

pub const SWEEP_HEADER: &str =
    "psi0,label,baseline,zero_crossings,first_wavelength,last_wavelength,inflection_x,error";

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let opt = |v: Option<f64>| v.map(fmt_float).unwrap_or_default();
    let mut out = format!("{SWEEP_HEADER}\n");
    for row in rows {
        let line = match &row.outcome {
            Ok(r) => format!(
                "{},{},{},{},{},{},{},{}",
                fmt_float(row.psi0),
                r.label,
                opt(r.baseline),
                r.zero_crossings,
                opt(r.wavelengths.first().map(|w| w.1)),
                opt(r.wavelengths.last().map(|w| w.1)),
                opt(r.inflection_x),
                r.diagnostic.as_deref().map(csv_field).unwrap_or_default()
            ),
            Err(e) => format!("{},,,,,,,{}", fmt_float(row.psi0), csv_field(e)),
        };
        out.push_str(&line);
        out.push('\n');
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// One line of the `qualify` report.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub pass: bool,
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        write!(f, "{verdict}  {}: {:.3e} (limit {:.1e})", self.name, self.value, self.limit)
    }
}

fn max_oracle_error(trace: &SolutionTrace, x_end: f64, exact: impl Fn(f64) -> f64) -> Result<f64> {
    let (lo, _) = trace.x_range();
    let n = 20_000;
    let mut worst = 0.0f64;
    for i in 0..=n {
        let x = lo + (x_end - lo) * i as f64 / n as f64;
        worst = worst.max((dense_eval(trace, x)?.0 - exact(x)).abs());
    }
    Ok(worst)
}

fn energy_drift(spec: &EquationSpec, psi0: f64) -> Result<f64> {
    let cfg = IntegratorConfig::default().with_tolerances(ENERGY_RTOL, ENERGY_ATOL);
    let bc = BoundaryCondition::new(spec.dimension, psi0, 0.0)?;
    let trace = integrate(spec, &bc, &cfg, &[])?;
    let s0 = trace.samples()[0];
    let e0 = first_integral(spec.interaction, s0.psi, s0.dpsi);
    Ok(trace
        .samples()
        .iter()
        .map(|s| (first_integral(spec.interaction, s.psi, s.dpsi) - e0).abs())
        .fold(0.0, f64::max))
}

/// Convergence order, exact one-dimensional solitons, energy drift and the
/// Cauchy–Euler criterion check.
pub fn qualify_checks() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let order = order_check()?;
    checks.push(Check {
        name: format!("convergence order {:.3} vs nominal {NOMINAL_ORDER}", order.order),
        value: (order.order - NOMINAL_ORDER).abs(),
        limit: 0.3,
        pass: (order.order - NOMINAL_ORDER).abs() <= 0.3,
    });

    let x_end = 20.0;
    let cfg = IntegratorConfig::default()
        .with_tolerances(ORACLE_RTOL, ORACLE_ATOL)
        .with_x_max(x_end);
    let one = Dimension::One;
    let sech = integrate(
        &EquationSpec::attractive(one),
        &BoundaryCondition::new(one, 1.0, 0.0)?,
        &cfg,
        &[],
    )?;
    let tanh = integrate(
        &EquationSpec::repulsive(one),
        &BoundaryCondition::new(one, 0.0, 0.5)?,
        &cfg,
        &[],
    )?;
    for (name, trace, exact) in [
        ("sech soliton max error", &sech, (|x: f64| 1.0 / x.cosh()) as fn(f64) -> f64),
        ("tanh kink max error", &tanh, |x: f64| PSI_PLUS * (x * PSI_PLUS).tanh()),
    ] {
        let err = max_oracle_error(trace, x_end, exact)?;
        checks.push(Check {
            name: name.to_string(),
            value: err,
            limit: 1e-6,
            pass: err < 1e-6,
        });
    }

    for (spec, psi0) in [
        (EquationSpec::repulsive(one), 0.5),
        (EquationSpec::repulsive(one), 0.7),
        (EquationSpec::attractive(one), 1.5),
    ] {
        let drift = energy_drift(&spec, psi0)?;
        checks.push(Check {
            name: format!("energy drift, {:?} psi0 = {psi0}", spec.interaction).to_lowercase(),
            value: drift,
            limit: 1e-8,
            pass: drift < 1e-8,
        });
    }

    let domain = (0.1, 10.0);
    let mut wrong = 0usize;
    for k in [-1.0, -0.1, 0.0, 0.1, 1.0] {
        let pair = CoefficientPair::new(|x: f64| 1.0 / x, move |x: f64| k / (x * x), |x: f64| -1.0 / (x * x));
        let region = criterion_region(&pair, domain, 0.0, default_resolution(domain, 0.0))?;
        wrong += usize::from(region.is_empty() == (k > 0.0));
    }
    checks.push(Check {
        name: "Cauchy-Euler region nonempty iff k > 0, mismatches".to_string(),
        value: wrong as f64,
        limit: 0.0,
        pass: wrong == 0,
    });
    Ok(checks)
}

#[derive(Debug, Parser)]
#[command(name = "cnls-lab", version, about = "Stationary cubic NLS solutions: solve, sweep, criterion maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate and classify one boundary value (or every value of a preset).
    Solve(RunFlags),
    /// Classify a grid of boundary values.
    Sweep(SweepFlags),
    /// Effective coefficient and oscillation bound along a solution.
    Criterion(RunFlags),
    /// Convergence order and exact-solution checks of the integrator.
    Qualify,
}

#[derive(Debug, Clone, Default, Args)]
struct RunFlags {
    /// Flat `key = value` file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    dim: Option<u8>,
    #[arg(long, conflicts_with = "attractive")]
    repulsive: bool,
    #[arg(long)]
    attractive: bool,
    /// ψ(0); `1/sqrt2` is accepted.
    #[arg(long, allow_hyphen_values = true)]
    psi0: Option<String>,
    /// ψ'(0); must be 0 unless `--dim 1`.
    #[arg(long, allow_hyphen_values = true)]
    dpsi0: Option<String>,
    #[arg(long)]
    xmax: Option<String>,
    #[arg(long)]
    rtol: Option<String>,
    #[arg(long)]
    atol: Option<String>,
    /// `none`, `constant:V0` or `quadratic:A`.
    #[arg(long)]
    potential: Option<String>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
struct SweepFlags {
    #[command(flatten)]
    run: RunFlags,
    /// Comma-separated ψ(0) values.
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    #[arg(long)]
    jobs: Option<String>,
}

impl RunFlags {
    fn entries(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        if let Some(p) = self.preset {
            out.push(("preset", p.to_possible_value().expect("named").get_name().to_string()));
        }
        if let Some(d) = self.dim {
            out.push(("dim", d.to_string()));
        }
        if self.repulsive {
            out.push(("interaction", "repulsive".into()));
        }
        if self.attractive {
            out.push(("interaction", "attractive".into()));
        }
        for (k, v) in [
            ("psi0", &self.psi0),
            ("dpsi0", &self.dpsi0),
            ("xmax", &self.xmax),
            ("rtol", &self.rtol),
            ("atol", &self.atol),
            ("potential", &self.potential),
        ] {
            if let Some(v) = v {
                out.push((k, v.clone()));
            }
        }
        if let Some(d) = &self.out_dir {
            out.push(("out_dir", d.to_string_lossy().into_owned()));
        }
        out
    }

    /// File entries, then flags. A preset flag is applied before the file's
    /// other entries so that the file can refine it.
    fn resolve(&self, extra: Vec<(&'static str, String)>) -> Result<RunConfig> {
        let mut file = match &self.config {
            Some(path) => parse_config(&read_file(path)?)?,
            None => Vec::new(),
        };
        let mut flags = self.entries();
        flags.extend(extra);
        if let Some(pos) = flags.iter().position(|(k, _)| *k == "preset") {
            let (_, p) = flags.remove(pos);
            file.retain(|(k, _)| k != "preset");
            file.insert(0, ("preset".to_string(), p));
        }
        let mut cfg = RunConfig::from_entries(&file)?;
        for (k, v) in flags {
            cfg.set(k, &v)?;
        }
        Ok(cfg)
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io { .. } => EXIT_IO,
        Error::Usage(_)
        | Error::Config(_)
        | Error::Boundary(_)
        | Error::Domain { .. }
        | Error::Unsupported(_)
        | Error::MissingWatchLevel(_) => EXIT_USAGE,
        Error::Evaluation { .. }
        | Error::Singular { .. }
        | Error::Range { .. }
        | Error::InsufficientExtrema(_) => EXIT_NUMERICAL,
    }
}

/// Runs the command line `args` (program name first) and returns the exit
/// status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = match cli.command {
        Command::Solve(flags) => flags.resolve(Vec::new()).and_then(|cfg| cmd_solve(&cfg)),
        Command::Criterion(flags) => flags.resolve(Vec::new()).and_then(|cfg| cmd_criterion(&cfg)),
        Command::Sweep(flags) => {
            let mut extra = Vec::new();
            if let Some(g) = &flags.grid {
                extra.push(("grid", g.clone()));
            }
            if let Some(j) = &flags.jobs {
                extra.push(("jobs", j.clone()));
            }
            flags.run.resolve(extra).and_then(|cfg| cmd_sweep(&cfg))
        }
        Command::Qualify => cmd_qualify(),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn single_value_outputs(values: &[f64], explicit: &[&Option<PathBuf>]) -> Result<()> {
    if values.len() > 1 && explicit.iter().any(|p| p.is_some()) {
        return Err(usage(
            "explicit output paths need a single psi0; use out_dir for presets",
        ));
    }
    Ok(())
}

/// Writes trace, events and report for every value; exit 3 if any trace
/// failed numerically or could not be classified.
pub fn cmd_solve(cfg: &RunConfig) -> Result<i32> {
    let spec = cfg.equation()?;
    let values = cfg.solve_values()?;
    let o = &cfg.outputs;
    single_value_outputs(&values, &[&o.trace_csv, &o.events_json, &o.report_json])?;
    let many = values.len() > 1;
    let mut failed = false;
    for &psi0 in &values {
        let (trace, report) = solve_one(cfg, &spec, psi0)?;
        failed |= report.label == Label::Undetermined || trace.termination() == Termination::StepFailure;
        let sub = many.then_some(psi0);
        if let Some(p) = cfg.output(&o.trace_csv, "trace.csv", sub) {
            write_file(&p, &trace.to_csv())?;
        }
        if let Some(p) = cfg.output(&o.events_json, "events.json", sub) {
            write_file(&p, &trace.events_json())?;
        }
        match cfg.output(&o.report_json, "report.json", sub) {
            Some(p) => {
                write_file(&p, &report.to_json())?;
                emit!("psi0 = {}: {}", fmt_float(psi0), report.label);
            }
            None if many => emit!("psi0 = {}: {}", fmt_float(psi0), report.label),
            None => emit!("{}", report.to_json()),
        }
        if let Some(d) = &report.diagnostic {
            eprintln!("psi0 = {}: {d}", fmt_float(psi0));
        }
    }
    Ok(if failed { EXIT_NUMERICAL } else { EXIT_OK })
}

pub fn cmd_criterion(cfg: &RunConfig) -> Result<i32> {
    let spec = cfg.equation()?;
    let values = cfg.solve_values()?;
    single_value_outputs(&values, &[&cfg.outputs.criterion_csv])?;
    let many = values.len() > 1;
    let mut failed = false;
    for &psi0 in &values {
        let bc = BoundaryCondition::new(cfg.dimension, psi0, cfg.dpsi0)?;
        let trace = integrate(&spec, &bc, &cfg.integrator, &reference_levels(&spec))?;
        failed |= trace.termination() == Termination::StepFailure;
        let csv = criterion_csv(&trace, &spec)?;
        match cfg.output(&cfg.outputs.criterion_csv, "criterion.csv", many.then_some(psi0)) {
            Some(p) => write_file(&p, &csv)?,
            None => emit_str(&csv),
        }
    }
    Ok(if failed { EXIT_NUMERICAL } else { EXIT_OK })
}

/// Per-row failures are reported in the table; the exit status is 0.
pub fn cmd_sweep(cfg: &RunConfig) -> Result<i32> {
    let rows = run_sweep(cfg, &cfg.grid)?;
    let csv = sweep_csv(&rows);
    match cfg.output(&cfg.outputs.sweep_csv, "sweep.csv", None) {
        Some(p) => write_file(&p, &csv)?,
        None => emit_str(&csv),
    }
    Ok(EXIT_OK)
}

pub fn cmd_qualify() -> Result<i32> {
    let checks = qualify_checks()?;
    for c in &checks {
        emit!("{c}");
    }
    Ok(if checks.iter().all(|c| c.pass) {
        EXIT_OK
    } else {
        EXIT_NUMERICAL
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oscillation::canonical_q;

    #[test]
    fn defaults_match_the_modules() {
        let cfg = RunConfig::default();
        assert_eq!(cfg.integrator, IntegratorConfig::default());
        assert_eq!(cfg.dpsi0, 0.0);
        assert_eq!(cfg.dimension, Dimension::Two);
    }

    #[test]
    fn config_parsing() {
        let text = "# fig 3\npreset = fig3\npsi0 = 3   # green\n\nxmax=40\n";
        let cfg = RunConfig::from_entries(&parse_config(text).unwrap()).unwrap();
        assert_eq!(cfg.interaction, Interaction::Attractive);
        assert_eq!(cfg.psi0, Some(3.0));
        assert_eq!(cfg.integrator.x_max, 40.0);
        assert_eq!(cfg.grid, vec![1.0, 3.0, 5.0]);

        let err = parse_config("psi0 = 1\nspeed = 3\n").unwrap_err().to_string();
        assert!(err.contains("speed") && err.contains("line 2"), "{err}");
        assert!(parse_config("psi0 = 1\npsi0 = 2\n").is_err());
        assert!(parse_config("psi0 1\n").is_err());
        let err = RunConfig::from_entries(&parse_config("dim = 4").unwrap()).unwrap_err();
        assert!(err.to_string().contains("dim"));
    }

    #[test]
    fn values_and_grids() {
        assert_eq!(parse_value("psi0", "1/sqrt2").unwrap(), PSI_PLUS);
        assert_eq!(parse_value("psi0", "-1/sqrt2").unwrap(), -PSI_PLUS);
        assert!(parse_value("psi0", "nan").is_err());
        assert_eq!(parse_grid("").unwrap(), Vec::<f64>::new());
        assert_eq!(parse_grid("0.5, 1/sqrt2,2").unwrap(), vec![0.5, PSI_PLUS, 2.0]);
    }

    #[test]
    fn potential_presets() {
        assert!(potential_preset("none").unwrap().is_none());
        let v = potential_preset("quadratic:0.5").unwrap().unwrap();
        assert_eq!(v.eval(2.0).unwrap(), 2.0);
        assert!(potential_preset("cubic:1").is_err());
        assert!(potential_preset("constant").is_err());
    }

    #[test]
    fn coefficient_bound_matches_canonical_form() {
        for (dim, n) in [(Dimension::One, 1.0), (Dimension::Two, 2.0), (Dimension::Three, 3.0)] {
            let damping = CoefficientPair::new(
                move |x: f64| (n - 1.0) / x,
                |_| 0.0,
                move |x: f64| -(n - 1.0) / (x * x),
            );
            for x in [0.3, 1.0, 7.5] {
                let expected = criterion_bound(x, 0.0) - canonical_q(&damping, x).unwrap();
                assert!((coefficient_bound(dim, x) - expected).abs() < 1e-14, "N = {n}, x = {x}");
            }
        }
    }

    #[test]
    fn sweep_rows_keep_failures() {
        let rows = vec![
            SweepRow {
                psi0: 0.5,
                outcome: Err("bad, \"thing\"".into()),
            },
        ];
        assert_eq!(
            sweep_csv(&rows),
            format!("{SWEEP_HEADER}\n0.5,,,,,,,\"bad, \"\"thing\"\"\"\n")
        );
    }
}
