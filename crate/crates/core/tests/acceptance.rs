//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero if any fail.

use std::process::Command;
use std::time::{Duration, Instant};

use rand::{rngs::StdRng, Rng, SeedableRng};

use phasent::grid::{discretize, GridPlan, GridSpec, SpaceTag};
use phasent::model::{pure_phase_psi, BreakupParams, PurePhaseParams};
use phasent::observables::{
    einstein_product, fedorov_ratio_x, heisenberg_product, var_k_coinc, var_k_single, var_x_coinc, var_x_single,
};
use phasent::scenarios::{self, evolved_position_grid, initial_momentum_grid, FIGURE1_R};
use phasent::schmidt::schmidt_coefficients;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn rel(x: f64, y: f64) -> f64 {
    ((x - y) / y).abs()
}

fn default_params() -> BreakupParams {
    BreakupParams::new(2.0, 0.5).unwrap()
}

fn schmidt_identity() -> Outcome {
    let mut rng = StdRng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let (a, b) = (rng.gen_range(0.3..3.0), rng.gen_range(0.3..3.0));
        let p = BreakupParams::new(a, b).unwrap();
        let r_p = (var_k_single(&p) / var_k_coinc(&p)).sqrt();
        let cosh = (a / b).ln().cosh();
        let purity: f64 = schmidt_coefficients(4000, &p).iter().map(|l| l * l).sum();
        worst = worst.max(rel(r_p, cosh)).max(rel(1.0 / purity, cosh));
    }
    outcome(worst < 1e-12, format!("worst rel err {worst:.2e} over 100 random (a, b)"))
}

fn oracle_equivalence() -> Outcome {
    let p = default_params();
    let t0 = p.scales().t0;
    let times = [0.0, 0.5 * t0, t0, 2.0 * t0];
    let cmp = match scenarios::analytic_vs_oracle(&p, &times, &GridPlan::Auto { n: 512 }) {
        Ok(c) => c,
        Err(e) => return outcome(false, e.to_string()),
    };
    if cmp.samples.len() != times.len() {
        return outcome(false, format!("only {} of {} times evaluated", cmp.samples.len(), times.len()));
    }
    let (mut moments, mut lambda, mut k): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for s in &cmp.samples {
        moments = moments
            .max(rel(s.var_k_single, var_k_single(&p)))
            .max(rel(s.var_k_coinc, var_k_coinc(&p)))
            .max(rel(s.var_x_single, var_x_single(s.t, &p).unwrap()))
            .max(rel(s.var_x_coinc, var_x_coinc(s.t, &p).unwrap()));
        for n in 0..8 {
            lambda = lambda.max((s.spectrum.lambdas[n] - 0.64 * 0.36f64.powi(n as i32)).abs());
        }
        k = k.max((s.spectrum.k_numeric - 2.125).abs());
    }
    outcome(
        moments < 1e-5 && lambda < 1e-6 && k < 1e-6 && cmp.report.verdict,
        format!("moments rel {moments:.2e}, lambda_0..7 abs {lambda:.2e}, K abs {k:.2e}"),
    )
}

fn figure1() -> Outcome {
    let t = scenarios::time_grid(5.0, 201);
    let table = scenarios::figure1(&FIGURE1_R, &t).unwrap();
    let i1 = t.iter().position(|&x| x == 1.0).unwrap();
    let mut pass = true;
    let mut worst_dip: f64 = 0.0;
    for (row, &r) in table.r_values.iter().enumerate() {
        let c = &table.c_values[row];
        pass &= c[0] == 1.0;
        if r == 0.0 {
            pass &= c.iter().all(|&v| v == 1.0);
            continue;
        }
        let (t_min, c_min) = table.row_minimum(row);
        worst_dip = worst_dip.max((c_min - 1.0 / r.cosh()).abs());
        pass &= t_min == 1.0 && c[c.len() - 1] > c[i1];
    }
    outcome(pass && worst_dip < 1e-12, format!("worst |C_min - 1/cosh r| {worst_dip:.2e}"))
}

fn limiting_cases() -> Outcome {
    let mut rng = StdRng::seed_from_u64(2);
    let mut rs = vec![default_params().scales().r];
    rs.extend((0..20).map(|_| rng.gen_range(-3.0..3.0)));
    let (mut e0, mut et0, mut asym): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut min_h = f64::INFINITY;
    for &r in &rs {
        let p = BreakupParams::from_squeezing(r, rng.gen_range(0.5..2.0), 1.0, 1.0).unwrap();
        let t0 = p.scales().t0;
        let cosh2 = r.cosh().powi(2);
        e0 = e0.max((einstein_product(0.0, &p).unwrap() - 1.0 / (4.0 * cosh2)).abs());
        et0 = et0.max((einstein_product(t0, &p).unwrap() - 0.5).abs());
        let tau = 100.0 * r.abs().exp();
        asym = asym.max(rel(einstein_product(tau * t0, &p).unwrap(), tau * tau / (4.0 * cosh2)));
        for i in 0..=1000 {
            let t = tau * t0 * i as f64 / 1000.0;
            min_h = min_h.min(heisenberg_product(t, &p).unwrap());
        }
    }
    outcome(
        e0 < 1e-12 && et0 < 1e-12 && asym < 0.01 && min_h >= 0.25,
        format!("einstein(0) {e0:.2e}, einstein(t0) {et0:.2e}, case iii {asym:.2e}, min heisenberg {min_h}"),
    )
}

fn factorization() -> Outcome {
    let p = default_params();
    let t0 = p.scales().t0;
    let spec = GridSpec::auto(512, &p, t0).unwrap();
    let (_, x) = evolved_position_grid(&p, t0, &spec).unwrap();
    let density = x.moments();
    let corr = density.correlation().abs();
    let k = x.schmidt_svd().unwrap().k_numeric;
    let r_x = fedorov_ratio_x(t0, &p).unwrap();
    outcome(
        corr < 1e-8 && (k - p.scales().r.cosh()).abs() < 1e-6 && (r_x - 1.0).abs() < 1e-10,
        format!("density corr {corr:.2e}, K_numeric {k:.10}, R_x(t0) - 1 = {:.2e}", r_x - 1.0),
    )
}

fn pure_phase() -> Outcome {
    let mut detail = Vec::new();
    let mut pass = true;
    for nu in [1.0, 0.0] {
        let q = PurePhaseParams::new(1.0, nu).unwrap();
        let spec = scenarios::pure_phase_grid(&q, &GridPlan::Auto { n: 512 }).unwrap();
        let x = discretize(|x1, x2| pure_phase_psi(x1, x2, &q), &spec, SpaceTag::Position)
            .unwrap()
            .normalize()
            .unwrap();
        let cx = x.moments().cov12.abs();
        let ck = x.to_momentum().unwrap().moments().cov12.abs();
        let ch = x.partial_transform_x2().unwrap().moments().cov12.abs();
        let k = x.schmidt_svd().unwrap().k_numeric;
        if nu > 0.0 {
            pass &= cx < 1e-8 && ck < 1e-8 && ch > 0.01 && k > 1.0 + 1e-3;
            detail.push(format!("nu=1: cov x {cx:.1e}, cov k {ck:.1e}, cov(x1,k2) {ch:.4}, K {k:.6}"));
        } else {
            pass &= (k - 1.0).abs() < 1e-6;
            detail.push(format!("nu=0: K - 1 = {:.1e}", k - 1.0));
        }
    }
    outcome(pass, detail.join("; "))
}

fn unitarity() -> Outcome {
    let p = default_params();
    let t0 = p.scales().t0;
    let spec = GridSpec::auto(512, &p, 3.0 * t0).unwrap();
    let k = initial_momentum_grid(&p, &spec).unwrap();
    let x = k.to_position().unwrap();
    let round = x.to_momentum().unwrap().max_abs_diff(&k) / k.max_abs();
    let parseval = (x.norm_sqr() - k.norm_sqr()).abs();
    let mut phase_only: f64 = 0.0;
    let mut drift: f64 = 0.0;
    let reference = x.schmidt_svd().unwrap();
    for t in [t0, 3.0 * t0] {
        let e = k.evolve_free(t, &p).unwrap();
        for (u, v) in k.values().iter().zip(e.values()) {
            phase_only = phase_only.max((u.norm() - v.norm()).abs());
        }
        let s = e.to_position().unwrap().schmidt_svd().unwrap();
        for n in 0..8 {
            drift = drift.max((s.lambdas[n] - reference.lambdas[n]).abs());
        }
    }
    outcome(
        round < 1e-12 && parseval < 1e-12 && phase_only <= f64::EPSILON * k.max_abs() && drift < 1e-8,
        format!("round trip {round:.1e}, Parseval {parseval:.1e}, |modulus change| {phase_only:.1e}, spectrum drift {drift:.1e}"),
    )
}

fn cli_determinism() -> Outcome {
    let run = || {
        let start = Instant::now();
        let out = Command::new(env!("CARGO_BIN_EXE_phasent")).arg("verify").output().unwrap();
        (out, start.elapsed())
    };
    let (first, d1) = run();
    let (second, d2) = run();
    let slowest = d1.max(d2);
    outcome(
        first.status.code() == Some(0)
            && second.status.code() == Some(0)
            && first.stdout == second.stdout
            && slowest < Duration::from_secs(60),
        format!(
            "exit codes {:?}/{:?}, identical output {}, slowest run {:.1} s",
            first.status.code(),
            second.status.code(),
            first.stdout == second.stdout,
            slowest.as_secs_f64()
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, f64); 8] = [
        ("Schmidt identity", schmidt_identity, 1.0),
        ("oracle equivalence", oracle_equivalence, 30.0),
        ("C(t) dip reproduction", figure1, 1.0),
        ("limiting cases", limiting_cases, f64::INFINITY),
        ("t0 factorization", factorization, 15.0),
        ("pure-phase separation", pure_phase, 15.0),
        ("transform unitarity", unitarity, f64::INFINITY),
        ("CLI determinism", cli_determinism, f64::INFINITY),
    ];
    let mut failures = 0;
    for (i, (name, check, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let secs = start.elapsed().as_secs_f64();
        let pass = result.pass && secs < *budget;
        if !pass {
            failures += 1;
        }
        let limit = if budget.is_finite() { format!(" (limit {budget} s)") } else { String::new() };
        println!(
            "criterion {} {}: {} | {} | {secs:.2} s{limit}",
            i + 1,
            name,
            if pass { "PASS" } else { "FAIL" },
            result.detail
        );
    }
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
