//! Reproducible probes: the `C(t)` family of curves, the uncertainty-product
//! limiting cases, factorization of the joint density at `t0`, the pure-phase
//! state, and a full closed-form versus grid cross-validation.

use serde::Serialize;

use crate::error::{check_time, Error, Result};
use crate::grid::{discretize, nyquist_check, Grid2D, GridPlan, GridSpec, Particle, SchmidtSpectrum, SpaceTag};
use crate::model::{pure_phase_psi, BreakupParams, PurePhaseParams};
use crate::observables::{self as obs, c_factor, einstein_product, heisenberg_product};
use crate::schmidt::{schmidt_coefficients, schmidt_number};

/// Correlations below this count as null.
pub const NULL_CORRELATION: f64 = 1e-8;
/// Correlations above this count as significantly nonzero.
pub const NONZERO_CORRELATION: f64 = 0.01;
/// Moment agreement between closed forms and the grid (relative).
pub const MOMENT_TOL: f64 = 1e-5;
/// Schmidt coefficient agreement (absolute) and Schmidt number (relative).
pub const SCHMIDT_TOL: f64 = 1e-6;
/// Number of leading Schmidt coefficients compared against the series.
pub const SCHMIDT_MODES: usize = 8;
/// Peak-relative pointwise agreement of the evolved grid with `psi_position`.
pub const AMPLITUDE_TOL: f64 = 1e-8;
/// Exact closed-form identities.
pub const IDENTITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    /// `|value - reference| <= tolerance`
    Abs,
    /// `|value - reference| <= tolerance · |reference|`
    Rel,
    /// `value < tolerance`
    LessThan,
    /// `value > tolerance`
    GreaterThan,
    /// `value >= tolerance`
    AtLeast,
    /// `value <= tolerance`
    AtMost,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Quantity {
    pub label: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<f64>,
    pub rule: Rule,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Skipped {
    pub label: String,
    pub reason: String,
}

/// Named list of checked quantities. The verdict is the conjunction of all
/// checks; skipped items do not count against it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport {
    pub name: String,
    pub quantities: Vec<Quantity>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub skipped: Vec<Skipped>,
    pub verdict: bool,
}

impl ProbeReport {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            quantities: Vec::new(),
            skipped: Vec::new(),
            verdict: true,
        }
    }

    fn push(&mut self, label: impl Into<String>, value: f64, reference: Option<f64>, rule: Rule, tolerance: f64) {
        let pass = match (rule, reference) {
            (Rule::Abs, Some(r)) => (value - r).abs() <= tolerance,
            (Rule::Rel, Some(r)) => (value - r).abs() <= tolerance * r.abs(),
            (Rule::LessThan, _) => value < tolerance,
            (Rule::GreaterThan, _) => value > tolerance,
            (Rule::AtLeast, _) => value >= tolerance,
            (Rule::AtMost, _) => value <= tolerance,
            (Rule::Abs | Rule::Rel, None) => false,
        };
        self.verdict &= pass;
        self.quantities.push(Quantity {
            label: label.into(),
            value,
            reference,
            rule,
            tolerance,
            pass,
        });
    }

    pub fn check_abs(&mut self, label: impl Into<String>, value: f64, reference: f64, tolerance: f64) {
        self.push(label, value, Some(reference), Rule::Abs, tolerance);
    }

    pub fn check_rel(&mut self, label: impl Into<String>, value: f64, reference: f64, tolerance: f64) {
        self.push(label, value, Some(reference), Rule::Rel, tolerance);
    }

    pub fn check_less(&mut self, label: impl Into<String>, value: f64, bound: f64) {
        self.push(label, value, None, Rule::LessThan, bound);
    }

    pub fn check_greater(&mut self, label: impl Into<String>, value: f64, bound: f64) {
        self.push(label, value, None, Rule::GreaterThan, bound);
    }

    pub fn check_at_least(&mut self, label: impl Into<String>, value: f64, bound: f64) {
        self.push(label, value, None, Rule::AtLeast, bound);
    }

    pub fn check_at_most(&mut self, label: impl Into<String>, value: f64, bound: f64) {
        self.push(label, value, None, Rule::AtMost, bound);
    }

    pub fn skip(&mut self, label: impl Into<String>, reason: impl Into<String>) {
        self.skipped.push(Skipped {
            label: label.into(),
            reason: reason.into(),
        });
    }

    pub fn quantity(&self, label: &str) -> Option<&Quantity> {
        self.quantities.iter().find(|q| q.label == label)
    }
}

/// `samples` evenly spaced points on `[0, t_max]`, endpoints included.
pub fn time_grid(t_max: f64, samples: usize) -> Vec<f64> {
    match samples {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => {
            let last = (samples - 1) as f64;
            (0..samples).map(|i| t_max * i as f64 / last).collect()
        }
    }
}

/// `C(t)` for a family of squeezing parameters, time in units of `t0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Figure1Table {
    pub r_values: Vec<f64>,
    pub t_over_t0: Vec<f64>,
    /// One row per entry of `r_values`.
    pub c_values: Vec<Vec<f64>>,
}

impl Figure1Table {
    /// `(t/t0, C)` at the minimum of row `row`, first occurrence.
    pub fn row_minimum(&self, row: usize) -> (f64, f64) {
        self.c_values[row]
            .iter()
            .zip(&self.t_over_t0)
            .fold((f64::NAN, f64::INFINITY), |best, (&c, &t)| if c < best.1 { (t, c) } else { best })
    }
}

pub const FIGURE1_R: [f64; 4] = [0.0, 1.0, 2.0, 5.0];

/// Evaluates `C(t)` with `a = e^{r/2}`, `b = e^{-r/2}` (so `α = t0 = 1`).
pub fn figure1(r_values: &[f64], t_over_t0: &[f64]) -> Result<Figure1Table> {
    if r_values.is_empty() {
        return Err(Error::Config("figure1 needs at least one r value".into()));
    }
    let mut c_values = Vec::with_capacity(r_values.len());
    for &r in r_values {
        let p = BreakupParams::from_squeezing(r, 1.0, 1.0, 1.0)?;
        let t0 = p.scales().t0;
        let row = t_over_t0
            .iter()
            .map(|&tau| c_factor(tau * t0, &p))
            .collect::<Result<Vec<_>>>()?;
        c_values.push(row);
    }
    Ok(Figure1Table {
        r_values: r_values.to_vec(),
        t_over_t0: t_over_t0.to_vec(),
        c_values,
    })
}

/// Shape checks on a [`Figure1Table`]: `C(0) = 1`, the dip to `1/cosh r` at
/// `t = t0`, recovery afterwards, and a flat `r = 0` row.
pub fn figure1_probe(table: &Figure1Table) -> ProbeReport {
    let mut report = ProbeReport::new("figure1");
    let idx_of = |target: f64| {
        table
            .t_over_t0
            .iter()
            .position(|&t| (t - target).abs() < 1e-12)
    };
    for (row, &r) in table.r_values.iter().enumerate() {
        let c = &table.c_values[row];
        let tag = format!("r={r}");
        report.check_at_most(format!("{tag}: max C"), c.iter().cloned().fold(0.0, f64::max), 1.0);
        report.check_greater(format!("{tag}: min C"), c.iter().cloned().fold(f64::INFINITY, f64::min), 0.0);
        if let Some(i0) = idx_of(0.0) {
            report.check_abs(format!("{tag}: C(0)"), c[i0], 1.0, 0.0);
        }
        if r == 0.0 {
            let dev = c.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
            report.check_at_most(format!("{tag}: max |C - 1|"), dev, 0.0);
            continue;
        }
        match idx_of(1.0) {
            Some(i1) => {
                let (t_min, c_min) = table.row_minimum(row);
                report.check_abs(format!("{tag}: argmin t/t0"), t_min, 1.0, 0.0);
                report.check_abs(format!("{tag}: C(t0)"), c[i1], 1.0 / r.cosh(), IDENTITY_TOL);
                report.check_abs(format!("{tag}: min C"), c_min, 1.0 / r.cosh(), IDENTITY_TOL);
                if let Some(last) = table.t_over_t0.iter().rposition(|&t| t > 1.0) {
                    report.check_greater(format!("{tag}: C(t_last) - C(t0)"), c[last] - c[i1], 0.0);
                }
            }
            None => report.skip(format!("{tag}: dip"), "time grid does not contain t/t0 = 1"),
        }
    }
    report
}

/// Einstein product at the three limiting regimes, plus the Heisenberg bound
/// over a sweep of `t/t0` from 0 to `100 e^{|r|}`.
pub fn uncertainty_cases(p: &BreakupParams) -> Result<ProbeReport> {
    let s = p.scales();
    let cosh2 = s.schmidt_number.powi(2);
    let mut report = ProbeReport::new("uncertainty_cases");

    let e0 = einstein_product(0.0, p)?;
    report.check_abs("(i) einstein(0)", e0, 1.0 / (4.0 * cosh2), IDENTITY_TOL);
    report.check_at_most("(i) einstein(0) <= 1/4", e0, 0.25);

    report.check_abs("(ii) einstein(t0)", einstein_product(s.t0, p)?, 0.5, IDENTITY_TOL);

    let tau = 100.0 * s.r.abs().exp();
    let asymptote = tau * tau / (4.0 * cosh2);
    report.check_abs(
        "(iii) einstein / asymptote at t/t0 = 100 e^|r|",
        einstein_product(tau * s.t0, p)? / asymptote,
        1.0,
        0.01,
    );

    let mut sweep = time_grid(10.0, 401);
    sweep.extend(time_grid(tau, 201));
    let min_h = sweep
        .iter()
        .map(|&t| heisenberg_product(t * s.t0, p))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    report.check_at_least("min heisenberg product", min_h, 0.25);
    Ok(report)
}

/// Momentum-space grid of the breakup state at `t = 0`, normalized.
pub fn initial_momentum_grid(p: &BreakupParams, spec: &GridSpec) -> Result<Grid2D> {
    let state = p.at(0.0)?;
    discretize(|k1, k2| state.psi_momentum(k1, k2), spec, SpaceTag::Momentum)?.normalize()
}

/// The oracle's route to `Ψ(x1, x2; t)`: sample the initial momentum state,
/// apply the free-flight chirp, transform back.
pub fn evolved_position_grid(p: &BreakupParams, t: f64, spec: &GridSpec) -> Result<(Grid2D, Grid2D)> {
    let k = initial_momentum_grid(p, spec)?.evolve_free(t, p)?;
    let x = k.to_position()?;
    Ok((k, x))
}

fn nyquist_reason(t: f64, max_safe: f64) -> String {
    format!("t = {t} exceeds the maximum alias-free time {max_safe} for this grid")
}

/// At `t0` the joint density factorizes while the state stays entangled.
pub fn factorization_probe(p: &BreakupParams, plan: &GridPlan) -> Result<ProbeReport> {
    factorization_probe_at(p, p.scales().t0, plan)
}

/// The same checks at an arbitrary time; they pass only at `t0` (or `a = b`).
pub fn factorization_probe_at(p: &BreakupParams, t: f64, plan: &GridPlan) -> Result<ProbeReport> {
    check_time(t)?;
    let mut report = ProbeReport::new(format!("factorization t={t}"));
    let spec = plan.resolve(p, t)?;
    let max_safe = nyquist_check(&spec, p);
    if !(t < max_safe) {
        report.skip("grid checks", nyquist_reason(t, max_safe));
    } else {
        let (_, x) = evolved_position_grid(p, t, &spec)?;
        report.check_less("|corr(x1, x2)| of |psi|^2", x.moments().correlation().abs(), NULL_CORRELATION);
        let spectrum = x.schmidt_svd()?;
        report.check_rel("K_numeric", spectrum.k_numeric, schmidt_number(p), SCHMIDT_TOL);
    }
    report.check_abs("R_x", obs::fedorov_ratio_x(t, p)?, 1.0, 1e-10);
    Ok(report)
}

/// Ridge point of `|Ψ(x1, k2)|²`: the `k2` maximizing each row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RidgePoint {
    pub x1: f64,
    pub argmax_k2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PurePhaseProbe {
    pub report: ProbeReport,
    pub k_numeric: f64,
    pub lambdas: Vec<f64>,
    pub ridge: Vec<RidgePoint>,
}

/// Grid for the pure-phase state: `Δ²x = 1/4μ²`, `Δ²k = (4μ⁴ + ν⁴)/4μ²`.
pub fn pure_phase_grid(q: &PurePhaseParams, plan: &GridPlan) -> Result<GridSpec> {
    match *plan {
        GridPlan::Fixed(spec) => Ok(spec),
        GridPlan::Auto { n } => {
            let mu2 = q.mu().powi(2);
            let var_x = 0.25 / mu2;
            let var_k = (4.0 * mu2 * mu2 + q.nu().powi(4)) / (4.0 * mu2);
            GridSpec::balanced(n, var_x, var_k)
        }
    }
}

/// Density-based tests are blind to the pure-phase state's entanglement;
/// the hybrid `(x1, k2)` correlation and the Schmidt number are not.
pub fn pure_phase_probe(q: &PurePhaseParams, plan: &GridPlan) -> Result<PurePhaseProbe> {
    let spec = pure_phase_grid(q, plan)?;
    let x = discretize(|x1, x2| pure_phase_psi(x1, x2, q), &spec, SpaceTag::Position)?.normalize()?;
    let k = x.to_momentum()?;
    let h = x.partial_transform_x2()?;
    let entangled = q.nu() > 0.0;

    let mut report = ProbeReport::new(format!("pure_phase mu={} nu={}", q.mu(), q.nu()));
    report.check_less("|cov(x1, x2)|", x.moments().cov12.abs(), NULL_CORRELATION);
    report.check_less("|cov(k1, k2)|", k.moments().cov12.abs(), NULL_CORRELATION);
    let hybrid = h.moments().cov12;
    if entangled {
        report.check_greater("|cov(x1, k2)|", hybrid.abs(), NONZERO_CORRELATION);
    } else {
        report.check_less("|cov(x1, k2)|", hybrid.abs(), NULL_CORRELATION);
    }

    let spectrum = x.schmidt_svd()?;
    if entangled {
        report.check_greater("K_numeric", spectrum.k_numeric, 1.0 + 1e-3);
    } else {
        report.check_abs("K_numeric", spectrum.k_numeric, 1.0, SCHMIDT_TOL);
    }

    let ridge = ridge_of(&h);
    let nu2 = q.nu().powi(2);
    let dk = h.axis2().step;
    let offset = ridge
        .iter()
        .filter(|pt| h.axis2().nearest(nu2 * pt.x1).is_ok())
        .map(|pt| (pt.argmax_k2 - nu2 * pt.x1).abs() / dk)
        .fold(0.0, f64::max);
    report.check_at_most("ridge offset from k2 = nu^2 x1 [cells]", offset, 1.0);

    Ok(PurePhaseProbe {
        report,
        k_numeric: spectrum.k_numeric,
        lambdas: spectrum.lambdas,
        ridge,
    })
}

/// Row-wise argmax of `|Ψ(x1, k2)|²` over rows carrying at least `1e-6` of
/// the heaviest row's probability.
fn ridge_of(h: &Grid2D) -> Vec<RidgePoint> {
    let n = h.n();
    let rows: Vec<(f64, usize)> = (0..n)
        .map(|i| {
            let mut best = (0.0, 0);
            let mut mass = 0.0;
            for j in 0..n {
                let w = h.get(i, j).norm_sqr();
                mass += w;
                if w > best.0 {
                    best = (w, j);
                }
            }
            (mass, best.1)
        })
        .collect();
    let heaviest = rows.iter().map(|r| r.0).fold(0.0, f64::max);
    rows.iter()
        .enumerate()
        .filter(|(_, r)| r.0 >= 1e-6 * heaviest)
        .map(|(i, r)| RidgePoint {
            x1: h.axis1().coord(i),
            argmax_k2: h.axis2().coord(r.1),
        })
        .collect()
}

/// Grid estimates of the observables at one time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleSample {
    pub t: f64,
    pub extent: f64,
    pub var_k_single: f64,
    pub var_k_coinc: f64,
    pub var_x_single: f64,
    pub var_x_coinc: f64,
    pub r_p: f64,
    pub r_x: f64,
    pub c: f64,
    pub heisenberg_product: f64,
    pub einstein_product: f64,
    pub amplitude_error: f64,
    pub spectrum: SchmidtSpectrum,
}

/// Conditioning values, in units of the relevant single-particle width.
const CONDITIONING: [f64; 3] = [0.0, 0.5, 1.0];

/// Runs the grid pipeline at time `t` and returns its estimates together with
/// the slice sweeps needed for a conditional-variance comparison.
fn oracle_sample(p: &BreakupParams, t: f64, spec: &GridSpec) -> Result<(OracleSample, SliceSweep)> {
    let (k, x) = evolved_position_grid(p, t, spec)?;
    let km = k.moments();
    let xm = x.moments();

    let sk = obs::var_k_single(p).sqrt();
    let sx = obs::var_x_single(t, p)?.sqrt();
    let mut sweep = SliceSweep::default();
    for f in CONDITIONING {
        let ks = k.conditional_slice(Particle::Two, f * sk)?;
        sweep.k.push((ks.at, ks.mean, ks.variance));
        let xs = x.conditional_slice(Particle::Two, f * sx)?;
        sweep.x.push((xs.at, xs.mean, xs.variance));
    }
    let var_k_coinc = sweep.k[0].2;
    let var_x_coinc = sweep.x[0].2;

    let state = p.at(t)?;
    let analytic = discretize(|x1, x2| state.psi_position(x1, x2), spec, SpaceTag::Position)?;
    let amplitude_error = x.max_abs_diff(&analytic) / analytic.max_abs();

    let r_p = (km.var1 / var_k_coinc).sqrt();
    let r_x = (xm.var1 / var_x_coinc).sqrt();
    let sample = OracleSample {
        t,
        extent: spec.extent(),
        var_k_single: km.var1,
        var_k_coinc,
        var_x_single: xm.var1,
        var_x_coinc,
        r_p,
        r_x,
        c: r_x / r_p,
        heisenberg_product: xm.var1 * km.var1,
        einstein_product: var_x_coinc * var_k_coinc,
        amplitude_error,
        spectrum: x.schmidt_svd()?,
    };
    Ok((sample, sweep))
}

#[derive(Debug, Default)]
struct SliceSweep {
    /// `(conditioned k2, mean k1, var k1)`
    k: Vec<(f64, f64, f64)>,
    /// `(conditioned x2, mean x1, var x1)`
    x: Vec<(f64, f64, f64)>,
}

/// Full cross-validation of every closed form against the grid pipeline.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleComparison {
    pub report: ProbeReport,
    pub samples: Vec<OracleSample>,
}

/// Compares all closed forms with the grid at each time and keeps the worst
/// error per quantity. Times violating the sampling bound are skipped.
pub fn analytic_vs_oracle(p: &BreakupParams, times: &[f64], plan: &GridPlan) -> Result<OracleComparison> {
    let mut report = ProbeReport::new("analytic_vs_oracle");
    let mut samples = Vec::new();
    let mut worst = Worst::default();
    let analytic_lambdas = schmidt_coefficients(SCHMIDT_MODES, p);
    let k_exact = schmidt_number(p);

    for &t in times {
        check_time(t)?;
        let spec = plan.resolve(p, t)?;
        let max_safe = nyquist_check(&spec, p);
        if !(t < max_safe) {
            report.skip(format!("t={t}"), nyquist_reason(t, max_safe));
            continue;
        }
        let (sample, sweep) = oracle_sample(p, t, &spec)?;
        let exact = obs::VarianceReport::evaluate(t, p)?;
        let rel = |grid: f64, closed: f64| ((grid - closed) / closed).abs();

        worst.note("var_k_single", rel(sample.var_k_single, exact.var_k_single));
        worst.note("var_x_single", rel(sample.var_x_single, exact.var_x_single));
        for &(at, mean, var) in &sweep.k {
            worst.note("var_k_coinc", rel(var, exact.var_k_coinc));
            worst.note("mean_k_coinc", (mean - obs::mean_k_coinc(p, at)).abs() / exact.var_k_single.sqrt());
        }
        for &(at, mean, var) in &sweep.x {
            worst.note("var_x_coinc", rel(var, exact.var_x_coinc));
            worst.note("mean_x_coinc", (mean - obs::mean_x_coinc(t, p, at)?).abs() / exact.var_x_single.sqrt());
        }
        worst.note("r_p", rel(sample.r_p, exact.r_p));
        worst.note("r_x", rel(sample.r_x, exact.r_x));
        worst.note("c", rel(sample.c, exact.c));
        worst.note("heisenberg_product", rel(sample.heisenberg_product, exact.heisenberg_product));
        worst.note("einstein_product", rel(sample.einstein_product, exact.einstein_product));
        worst.note_amp(sample.amplitude_error);

        let lam_err = analytic_lambdas
            .iter()
            .enumerate()
            .map(|(i, l)| (sample.spectrum.lambdas.get(i).copied().unwrap_or(0.0) - l).abs())
            .fold(0.0, f64::max);
        worst.note_lambda(lam_err);
        worst.note_k(rel(sample.spectrum.k_numeric, k_exact));
        samples.push(sample);
    }

    if !samples.is_empty() {
        for (label, err) in &worst.moments {
            report.check_less(format!("{label} (worst rel err)"), *err, MOMENT_TOL);
        }
        report.check_less("psi_position (worst peak-rel err)", worst.amplitude, AMPLITUDE_TOL);
        report.check_less(format!("lambda_0..{} (worst abs err)", SCHMIDT_MODES - 1), worst.lambda, SCHMIDT_TOL);
        report.check_less("K_numeric (worst rel err)", worst.k, SCHMIDT_TOL);
    }
    Ok(OracleComparison { report, samples })
}

#[derive(Default)]
struct Worst {
    moments: Vec<(&'static str, f64)>,
    amplitude: f64,
    lambda: f64,
    k: f64,
}

impl Worst {
    fn note(&mut self, label: &'static str, err: f64) {
        match self.moments.iter_mut().find(|(l, _)| *l == label) {
            Some(slot) => slot.1 = slot.1.max(err),
            None => self.moments.push((label, err)),
        }
    }

    fn note_amp(&mut self, err: f64) {
        self.amplitude = self.amplitude.max(err);
    }

    fn note_lambda(&mut self, err: f64) {
        self.lambda = self.lambda.max(err);
    }

    fn note_k(&mut self, err: f64) {
        self.k = self.k.max(err);
    }
}
