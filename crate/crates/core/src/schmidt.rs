//! Closed-form Schmidt decomposition of the breakup state.
//!
//! In scaled momentum `κ = α k` the state is a two-mode squeezed Gaussian, so
//! its Schmidt modes are chirped Hermite functions and the coefficients form a
//! geometric series with ratio `ζ² = ((a - b)/(a + b))²`.

use num_complex::Complex64;

use crate::error::Result;
use crate::model::BreakupParams;

/// Signed Schmidt ratio `ζ = (a - b)/(a + b) = tanh(r/2)`.
pub fn schmidt_ratio(p: &BreakupParams) -> f64 {
    (p.a() - p.b()) / (p.a() + p.b())
}

/// `λ_n = 4ab/(a+b)² · ζ^(2n)`.
pub fn schmidt_coefficient(n: usize, p: &BreakupParams) -> f64 {
    let z2 = schmidt_ratio(p).powi(2);
    leading_coefficient(p) * pow_index(z2, n)
}

/// The first `count` coefficients, largest first.
pub fn schmidt_coefficients(count: usize, p: &BreakupParams) -> Vec<f64> {
    let z2 = schmidt_ratio(p).powi(2);
    let mut out = Vec::with_capacity(count);
    let mut lam = leading_coefficient(p);
    for _ in 0..count {
        out.push(lam);
        lam *= z2;
    }
    out
}

/// Coefficients down to (and excluding) anything below `floor`.
pub fn significant_coefficients(p: &BreakupParams, floor: f64, max_count: usize) -> Vec<f64> {
    schmidt_coefficients(max_count, p)
        .into_iter()
        .take_while(|&l| l >= floor)
        .collect()
}

/// `Σ_{n > n_max} λ_n = ζ^(2(n_max + 1))`.
pub fn schmidt_tail(n_max: usize, p: &BreakupParams) -> f64 {
    pow_index(schmidt_ratio(p).powi(2), n_max + 1)
}

/// Schmidt number `K = cosh r = (a/b + b/a)/2`.
pub fn schmidt_number(p: &BreakupParams) -> f64 {
    p.scales().schmidt_number
}

/// `(Σ λ_n²)^(-1)` summed in closed form from the coefficient series,
/// `λ_0² / (1 - ζ⁴)`. Kept separate from [`schmidt_number`] as a second route.
pub fn schmidt_number_from_coefficients(p: &BreakupParams) -> f64 {
    let l0 = leading_coefficient(p);
    let z4 = schmidt_ratio(p).powi(4);
    (1.0 - z4) / (l0 * l0)
}

fn leading_coefficient(p: &BreakupParams) -> f64 {
    let (a, b) = (p.a(), p.b());
    4.0 * a * b / (a + b).powi(2)
}

fn pow_index(x: f64, n: usize) -> f64 {
    match i32::try_from(n) {
        Ok(n) => x.powi(n),
        Err(_) => x.powf(n as f64),
    }
}

/// Normalized Hermite functions `h_0(x) ..= h_{n_max}(x)` via the three-term
/// recurrence
///
/// ```text
/// h_{n+1} = sqrt(2/(n+1)) x h_n - sqrt(n/(n+1)) h_{n-1}
/// ```
///
/// which never forms `H_n(x)` or `n!` and so stays finite for large `n`.
pub fn hermite_functions(n_max: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let h0 = std::f64::consts::PI.powf(-0.25) * (-0.5 * x * x).exp();
    out.push(h0);
    if n_max == 0 {
        return out;
    }
    out.push(std::f64::consts::SQRT_2 * x * h0);
    for n in 1..n_max {
        let nf = n as f64;
        let next = (2.0 / (nf + 1.0)).sqrt() * x * out[n] - (nf / (nf + 1.0)).sqrt() * out[n - 1];
        out.push(next);
    }
    out
}

pub fn hermite_function(n: usize, x: f64) -> f64 {
    hermite_functions(n, x)[n]
}

/// Chirped Schmidt mode `h_n(κ) exp(-i κ² τ / 2)`.
pub fn schmidt_mode(n: usize, kappa: f64, tau: f64) -> Complex64 {
    Complex64::from_polar(1.0, -0.5 * kappa * kappa * tau) * hermite_function(n, kappa)
}

/// Truncated Schmidt expansion of the momentum-space state,
///
/// ```text
/// α Σ_{n <= n_max} sgn(ζ)^n sqrt(λ_n) φ_n(α k1, τ) φ_n(α k2, τ),   τ = Q²/α².
/// ```
///
/// The `sgn(ζ)^n` factor is needed when `b > a`; for `a >= b` it is 1.
pub fn schmidt_partial_sum(
    n_max: usize,
    k1: f64,
    k2: f64,
    t: f64,
    p: &BreakupParams,
) -> Result<Complex64> {
    let q2 = p.q_squared(t)?;
    let alpha = p.scales().alpha;
    let (kappa1, kappa2) = (alpha * k1, alpha * k2);
    let tau = q2 / (alpha * alpha);
    let h1 = hermite_functions(n_max, kappa1);
    let h2 = hermite_functions(n_max, kappa2);
    let zeta = schmidt_ratio(p);
    let mut amp = leading_coefficient(p).sqrt();
    let mut sum = 0.0;
    for n in 0..=n_max {
        sum += amp * h1[n] * h2[n];
        amp *= zeta;
    }
    let chirp = Complex64::from_polar(1.0, -0.5 * tau * (kappa1 * kappa1 + kappa2 * kappa2));
    Ok(chirp * alpha * sum)
}
