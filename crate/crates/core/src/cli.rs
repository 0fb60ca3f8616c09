//! `phasent` command-line front end.
//!
//! Data goes to `--out` (or stdout); run metadata and summaries go to stderr.
//! Every number is written with 12 significant digits. Exit codes: 0 on
//! success, 1 on numerical failure, 2 on configuration error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::Error;
use crate::grid::{GridPlan, GridSpec};
use crate::model::{diffusion_length, BreakupParams, PurePhaseParams};
use crate::observables::VarianceReport;
use crate::scenarios::{self, ProbeReport, FIGURE1_R, SCHMIDT_MODES};
use crate::schmidt::{schmidt_number, significant_coefficients};

pub const SCHEMA_VERSION: u32 = 1;

const DEFAULT_A: f64 = 2.0;
const DEFAULT_B: f64 = 0.5;
const DEFAULT_GRID_N: usize = 512;

#[derive(Debug, Parser)]
#[command(name = "phasent", version, about = "Phase entanglement of free two-particle Gaussian breakup states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form variances, ratios and C(t) over a time range.
    Sweep(Flags),
    /// C(t) for several squeezing parameters, time in units of t0.
    Fig1(Flags),
    /// Analytic and SVD Schmidt spectra.
    Schmidt(Flags),
    /// Cross-check every closed form against the grid oracle.
    Verify(Flags),
    /// Pure-phase entangled state probe.
    Phase(Flags),
}

#[derive(Debug, Clone, Args)]
struct Flags {
    /// Relative-coordinate packet width.
    #[arg(long, allow_negative_numbers = true)]
    a: Option<f64>,
    /// Center-of-mass packet width.
    #[arg(long, allow_negative_numbers = true)]
    b: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    m: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    hbar: Option<f64>,
    /// Squeezing parameter ln(a/b) (with --alpha); for fig1 a comma-separated list.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    r: Vec<f64>,
    /// Geometric-mean width sqrt(ab) (with --r).
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    /// Last time sampled (fig1: in units of t0).
    #[arg(long, allow_negative_numbers = true)]
    t_max: Option<f64>,
    /// Number of time samples.
    #[arg(long)]
    t_steps: Option<usize>,
    /// Time at which the numeric Schmidt spectrum is computed.
    #[arg(long, allow_negative_numbers = true)]
    time: Option<f64>,
    /// Grid points per axis (power of two, >= 64).
    #[arg(long)]
    grid_n: Option<usize>,
    /// Grid half-width; sized automatically per time when omitted.
    #[arg(long, allow_negative_numbers = true)]
    extent: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    mu: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    nu: Option<f64>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Sweep,
    Fig1,
    Schmidt,
    Verify,
    Phase,
}

/// Validated configuration for one command.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: BreakupParams,
    pub plan: GridPlan,
    pub times: Vec<f64>,
    pub r_list: Vec<f64>,
    pub phase: PurePhaseParams,
    pub format: Format,
    pub out: Option<PathBuf>,
}

/// Collects every violation before giving up.
#[derive(Default)]
struct Violations(Vec<String>);

impl Violations {
    fn push(&mut self, msg: impl Into<String>) {
        self.0.push(msg.into());
    }

    fn positive(&mut self, flag: &str, v: Option<f64>, default: f64) -> f64 {
        let v = v.unwrap_or(default);
        if !(v.is_finite() && v > 0.0) {
            self.push(format!("{flag} must be a finite number > 0 (got {v})"));
        }
        v
    }

    fn non_negative(&mut self, flag: &str, v: f64) -> f64 {
        if !(v.is_finite() && v >= 0.0) {
            self.push(format!("{flag} must be a finite number >= 0 (got {v})"));
        }
        v
    }
}

fn build_config(kind: Kind, f: &Flags) -> Result<RunConfig, Vec<String>> {
    let mut bad = Violations::default();

    let m = bad.positive("--m", f.m, 1.0);
    let hbar = bad.positive("--hbar", f.hbar, 1.0);
    let widths_given = f.a.is_some() || f.b.is_some();
    let squeeze_given = kind != Kind::Fig1 && (!f.r.is_empty() || f.alpha.is_some());
    if widths_given && squeeze_given {
        bad.push("--a/--b and --r/--alpha are mutually exclusive");
    }
    let params = if squeeze_given {
        if f.r.len() > 1 {
            bad.push("--r takes a single value outside fig1");
        }
        let r = f.r.first().copied().unwrap_or(0.0);
        if !r.is_finite() {
            bad.push(format!("--r must be finite (got {r})"));
        }
        let alpha = bad.positive("--alpha", f.alpha, 1.0);
        BreakupParams::from_squeezing(r, alpha, m, hbar)
    } else {
        let a = bad.positive("--a", f.a, DEFAULT_A);
        let b = bad.positive("--b", f.b, DEFAULT_B);
        BreakupParams::with_units(a, b, m, hbar)
    };

    let grid_n = f.grid_n.unwrap_or(DEFAULT_GRID_N);
    if grid_n < 64 || !grid_n.is_power_of_two() {
        bad.push(format!("--grid-n must be a power of two >= 64 (got {grid_n})"));
    }
    let extent = f.extent.map(|e| bad.positive("--extent", Some(e), 1.0));

    let (mu, nu) = match kind {
        Kind::Phase => {
            if f.mu.is_none() {
                bad.push("phase requires --mu");
            }
            if f.nu.is_none() {
                bad.push("phase requires --nu");
            }
            (f.mu, f.nu)
        }
        _ => (f.mu.or(Some(1.0)), f.nu.or(Some(1.0))),
    };
    let mu = mu.map_or(1.0, |v| bad.positive("--mu", Some(v), 1.0));
    let nu = nu.map_or(0.0, |v| bad.non_negative("--nu", v));

    if let Some(t) = f.t_max {
        bad.non_negative("--t-max", t);
    }
    if let Some(t) = f.time {
        bad.non_negative("--time", t);
    }
    if f.t_steps == Some(0) {
        bad.push("--t-steps must be >= 1");
    }
    if kind == Kind::Fig1 && f.r.iter().any(|r| !r.is_finite()) {
        bad.push("--r values must be finite");
    }

    let format = match (kind, f.format) {
        (Kind::Sweep | Kind::Fig1, fmt) => fmt.unwrap_or(Format::Csv),
        (_, Some(Format::Csv)) => {
            bad.push("--format csv is only available for sweep and fig1");
            Format::Csv
        }
        _ => Format::Json,
    };

    if !bad.0.is_empty() {
        return Err(bad.0);
    }
    let params = params.map_err(|e| vec![e.to_string()])?;
    let plan = match extent {
        Some(e) => GridPlan::Fixed(GridSpec::new(grid_n, e).map_err(|e| vec![e.to_string()])?),
        None => GridPlan::Auto { n: grid_n },
    };
    let phase = PurePhaseParams::new(mu, nu).map_err(|e| vec![e.to_string()])?;
    let t0 = params.scales().t0;
    let times = match kind {
        Kind::Sweep => scenarios::time_grid(f.t_max.unwrap_or(5.0 * t0), f.t_steps.unwrap_or(101)),
        Kind::Fig1 => scenarios::time_grid(f.t_max.unwrap_or(5.0), f.t_steps.unwrap_or(201)),
        Kind::Schmidt => vec![f.time.unwrap_or(0.0)],
        Kind::Verify if f.t_max.is_some() || f.t_steps.is_some() => {
            scenarios::time_grid(f.t_max.unwrap_or(2.0 * t0), f.t_steps.unwrap_or(5))
        }
        Kind::Verify => vec![0.0, 0.5 * t0, t0, 2.0 * t0],
        Kind::Phase => Vec::new(),
    };
    let r_list = if kind == Kind::Fig1 && !f.r.is_empty() {
        f.r.clone()
    } else {
        FIGURE1_R.to_vec()
    };
    Ok(RunConfig {
        params,
        plan,
        times,
        r_list,
        phase,
        format,
        out: f.out.clone(),
    })
}

/// `%.12g`-style rendering: 12 significant digits, trailing zeros trimmed.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn round_sig(x: f64) -> f64 {
    format_sig(x).parse().unwrap_or(x)
}

fn round_json(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(x) = n.as_f64() {
                *v = json!(round_sig(x));
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_json),
        Value::Object(map) => map.values_mut().for_each(round_json),
        _ => {}
    }
}

fn render_json(mut v: Value) -> String {
    round_json(&mut v);
    let mut s = serde_json::to_string_pretty(&v).expect("serializable");
    s.push('\n');
    s
}

fn render_csv(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&x| format_sig(x)).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

fn params_json(p: &BreakupParams) -> Value {
    let s = p.scales();
    json!({
        "a": p.a(), "b": p.b(), "m": p.m(), "hbar": p.hbar(),
        "r": s.r, "alpha": s.alpha, "t0": s.t0, "K": s.schmidt_number,
    })
}

fn grid_json(spec: &GridSpec) -> Value {
    json!({ "n": spec.n(), "extent": spec.extent() })
}

/// Outcome of a command before it is written out.
struct Output {
    data: String,
    summary: String,
    success: bool,
}

enum Failure {
    Config(Vec<String>),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(msg) => Failure::Config(vec![msg]),
            other => Failure::Numerical(other.to_string()),
        }
    }
}

const SWEEP_HEADER: [&str; 9] = [
    "t",
    "t_over_t0",
    "Q",
    "var_x_single",
    "var_x_coinc",
    "R_x",
    "C",
    "heisenberg_product",
    "einstein_product",
];

fn cmd_sweep(cfg: &RunConfig) -> Result<Output, Failure> {
    let p = &cfg.params;
    let t0 = p.scales().t0;
    let mut rows = Vec::with_capacity(cfg.times.len());
    for &t in &cfg.times {
        let r = VarianceReport::evaluate(t, p)?;
        let row = vec![
            t,
            t / t0,
            diffusion_length(t, p)?,
            r.var_x_single,
            r.var_x_coinc,
            r.r_x,
            r.c,
            r.heisenberg_product,
            r.einstein_product,
        ];
        if let Some(i) = row.iter().position(|v| !v.is_finite()) {
            return Err(Failure::Numerical(format!("{} is not finite at t = {t}", SWEEP_HEADER[i])));
        }
        rows.push(row);
    }
    let data = match cfg.format {
        Format::Csv => render_csv(&SWEEP_HEADER, &rows),
        Format::Json => {
            let rows: Vec<Value> = rows
                .iter()
                .map(|row| Value::Object(SWEEP_HEADER.iter().zip(row).map(|(k, v)| (k.to_string(), json!(v))).collect()))
                .collect();
            render_json(json!({
                "schema": SCHEMA_VERSION, "command": "sweep", "params": params_json(p), "rows": rows,
            }))
        }
    };
    Ok(Output {
        data,
        summary: format!("sweep: {} rows, t0 = {}", rows.len(), format_sig(t0)),
        success: true,
    })
}

fn cmd_fig1(cfg: &RunConfig) -> Result<Output, Failure> {
    let table = scenarios::figure1(&cfg.r_list, &cfg.times)?;
    let data = match cfg.format {
        Format::Csv => {
            let rows: Vec<Vec<f64>> = table
                .r_values
                .iter()
                .zip(&table.c_values)
                .flat_map(|(&r, row)| table.t_over_t0.iter().zip(row).map(move |(&t, &c)| vec![r, t, c]))
                .collect();
            render_csv(&["r", "t_over_t0", "C"], &rows)
        }
        Format::Json => {
            let mut v = serde_json::to_value(&table).expect("serializable");
            v["schema"] = json!(SCHEMA_VERSION);
            v["command"] = json!("fig1");
            render_json(v)
        }
    };
    let probe = scenarios::figure1_probe(&table);
    Ok(Output {
        data,
        summary: format!("fig1: {} curves x {} times", table.r_values.len(), table.t_over_t0.len()),
        success: probe.verdict,
    })
}

fn cmd_schmidt(cfg: &RunConfig) -> Result<Output, Failure> {
    let p = &cfg.params;
    let t = cfg.times[0];
    let spec = cfg.plan.resolve(p, t)?;
    let (_, x) = scenarios::evolved_position_grid(p, t, &spec)?;
    let numeric = x.schmidt_svd()?;
    let analytic = significant_coefficients(p, crate::grid::SCHMIDT_FLOOR, 4096);
    let k = schmidt_number(p);
    let rel = |a: f64, b: f64| ((a - b) / b).abs();
    let max_rel_error = analytic
        .iter()
        .take(SCHMIDT_MODES)
        .enumerate()
        .map(|(i, &l)| rel(numeric.lambdas.get(i).copied().unwrap_or(0.0), l))
        .fold(rel(numeric.k_numeric, k), f64::max);
    let data = render_json(json!({
        "schema": SCHEMA_VERSION,
        "command": "schmidt",
        "params": params_json(p),
        "t": t,
        "grid": grid_json(&spec),
        "analytic": { "lambdas": analytic, "K": k },
        "numeric": { "lambdas": numeric.lambdas, "K": numeric.k_numeric },
        "max_rel_error": max_rel_error,
    }));
    Ok(Output {
        data,
        summary: format!(
            "schmidt: K = {} analytic, {} numeric; max rel error {}",
            format_sig(k),
            format_sig(numeric.k_numeric),
            format_sig(max_rel_error)
        ),
        success: true,
    })
}

fn summarize(reports: &[&ProbeReport]) -> String {
    let mut s = String::new();
    for r in reports {
        let _ = writeln!(s, "[{}] {}", if r.verdict { "PASS" } else { "FAIL" }, r.name);
        for q in r.quantities.iter().filter(|q| !q.pass) {
            let _ = writeln!(s, "    failed: {} = {} ({:?} {})", q.label, format_sig(q.value), q.rule, format_sig(q.tolerance));
        }
        for sk in &r.skipped {
            let _ = writeln!(s, "    skipped: {}: {}", sk.label, sk.reason);
        }
    }
    s.trim_end().to_string()
}

fn cmd_verify(cfg: &RunConfig) -> Result<Output, Failure> {
    let p = &cfg.params;
    let oracle = scenarios::analytic_vs_oracle(p, &cfg.times, &cfg.plan)?;
    let factor = scenarios::factorization_probe(p, &cfg.plan)?;
    let cases = scenarios::uncertainty_cases(p)?;
    let phase = scenarios::pure_phase_probe(&cfg.phase, &GridPlan::Auto { n: cfg.plan.n() })?;
    let fig = scenarios::figure1_probe(&scenarios::figure1(&FIGURE1_R, &scenarios::time_grid(5.0, 201))?);
    let reports = [&oracle.report, &factor, &cases, &phase.report, &fig];
    let verdict = reports.iter().all(|r| r.verdict);
    let data = render_json(json!({
        "schema": SCHEMA_VERSION,
        "command": "verify",
        "params": params_json(p),
        "phase_params": { "mu": cfg.phase.mu(), "nu": cfg.phase.nu() },
        "grid_n": cfg.plan.n(),
        "times": cfg.times,
        "reports": reports,
        "oracle_samples": oracle.samples,
        "verdict": verdict,
    }));
    Ok(Output {
        data,
        summary: summarize(&reports),
        success: verdict,
    })
}

fn cmd_phase(cfg: &RunConfig) -> Result<Output, Failure> {
    let q = &cfg.phase;
    let spec = scenarios::pure_phase_grid(q, &cfg.plan)?;
    let probe = scenarios::pure_phase_probe(q, &GridPlan::Fixed(spec))?;
    let data = render_json(json!({
        "schema": SCHEMA_VERSION,
        "command": "phase",
        "mu": q.mu(),
        "nu": q.nu(),
        "grid": grid_json(&spec),
        "report": probe.report,
        "K_numeric": probe.k_numeric,
        "lambdas": probe.lambdas,
        "ridge": probe.ridge,
    }));
    Ok(Output {
        data,
        summary: format!("{}\nK_numeric = {}", summarize(&[&probe.report]), format_sig(probe.k_numeric)),
        success: probe.report.verdict,
    })
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    let (kind, flags) = match &cli.command {
        Command::Sweep(f) => (Kind::Sweep, f),
        Command::Fig1(f) => (Kind::Fig1, f),
        Command::Schmidt(f) => (Kind::Schmidt, f),
        Command::Verify(f) => (Kind::Verify, f),
        Command::Phase(f) => (Kind::Phase, f),
    };
    let result = build_config(kind, flags).map_err(Failure::Config).and_then(|cfg| {
        let out = match kind {
            Kind::Sweep => cmd_sweep(&cfg),
            Kind::Fig1 => cmd_fig1(&cfg),
            Kind::Schmidt => cmd_schmidt(&cfg),
            Kind::Verify => cmd_verify(&cfg),
            Kind::Phase => cmd_phase(&cfg),
        }?;
        Ok((cfg, out))
    });
    match result {
        Err(Failure::Config(list)) => {
            let _ = writeln!(stderr, "configuration error:");
            for msg in list {
                let _ = writeln!(stderr, "  - {msg}");
            }
            2
        }
        Err(Failure::Numerical(msg)) => {
            let _ = writeln!(stderr, "numerical failure: {msg}");
            1
        }
        Ok((cfg, out)) => {
            let written = match &cfg.out {
                Some(path) => std::fs::write(path, out.data.as_bytes()),
                None => stdout.write_all(out.data.as_bytes()),
            };
            if let Err(e) = written {
                let _ = writeln!(stderr, "could not write output: {e}");
                return 1;
            }
            let _ = writeln!(stderr, "{}", out.summary);
            if out.success {
                0
            } else {
                1
            }
        }
    }
}
