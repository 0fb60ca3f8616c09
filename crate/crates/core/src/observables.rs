//! Closed-form second moments of the breakup state: single-particle and
//! coincidence (conditional) variances, Fedorov width ratios, the phase
//! entanglement function `C(t)`, and the two uncertainty products.
//!
//! Momentum moments are time-independent. Position moments follow from
//! `x_i(t) = x_i(0) + ħ t k_i / m` and the vanishing position-momentum
//! correlations of the real initial state.

use serde::{Deserialize, Serialize};

use crate::error::{check_time, Result};
use crate::model::BreakupParams;

/// `Δ²k1 = (a² + b²) / 4a²b²`.
pub fn var_k_single(p: &BreakupParams) -> f64 {
    let (a2, b2) = (p.a().powi(2), p.b().powi(2));
    (a2 + b2) / (4.0 * a2 * b2)
}

/// `Δ²k1 | k2 = 1 / (a² + b²)`, the same for every conditioning value.
pub fn var_k_coinc(p: &BreakupParams) -> f64 {
    1.0 / (p.a().powi(2) + p.b().powi(2))
}

/// `<k1>` given `k2`: `(a² - b²)/(a² + b²) · k2`.
pub fn mean_k_coinc(p: &BreakupParams, k2: f64) -> f64 {
    let (a2, b2) = (p.a().powi(2), p.b().powi(2));
    (a2 - b2) / (a2 + b2) * k2
}

/// Momentum Fedorov ratio `Δk1_single / Δk1_coinc`, equal to `cosh r`.
pub fn fedorov_ratio_p(p: &BreakupParams) -> f64 {
    (var_k_single(p) / var_k_coinc(p)).sqrt()
}

/// `Δ²x1(t) = (a² + b²)(a²b² + Q⁴) / 4a²b²`.
pub fn var_x_single(t: f64, p: &BreakupParams) -> Result<f64> {
    let q4 = p.q_squared(t)?.powi(2);
    let (a2, b2) = (p.a().powi(2), p.b().powi(2));
    Ok((a2 + b2) * (a2 * b2 + q4) / (4.0 * a2 * b2))
}

/// `Δ²x1(t) | x2 = (a⁴ + Q⁴)(b⁴ + Q⁴) / ((a² + b²)(a²b² + Q⁴))`.
pub fn var_x_coinc(t: f64, p: &BreakupParams) -> Result<f64> {
    let q4 = p.q_squared(t)?.powi(2);
    let (a2, b2) = (p.a().powi(2), p.b().powi(2));
    Ok((a2 * a2 + q4) * (b2 * b2 + q4) / ((a2 + b2) * (a2 * b2 + q4)))
}

/// `cov(x1, x2)(t) = (b² - a²)/4 · (1 - Q⁴/a²b²)`.
pub fn cov_x(t: f64, p: &BreakupParams) -> Result<f64> {
    let q4 = p.q_squared(t)?.powi(2);
    let (a2, b2) = (p.a().powi(2), p.b().powi(2));
    Ok(0.25 * (b2 - a2) * (1.0 - q4 / (a2 * b2)))
}

/// `<x1>` given `x2`, linear in the conditioning value.
pub fn mean_x_coinc(t: f64, p: &BreakupParams, x2: f64) -> Result<f64> {
    Ok(cov_x(t, p)? / var_x_single(t, p)? * x2)
}

/// Phase entanglement function
///
/// ```text
/// C(t) = (1 + t²/t0²) / sqrt((e^{2r} + t²/t0²)(e^{-2r} + t²/t0²))
/// ```
///
/// with minimum `1/cosh r` at `t = t0`. Evaluated as
/// `(1 + τ²) / sqrt((1 + τ²)² + τ² (a/b - b/a)²)`, the same expression
/// expanded, which is exactly 1 at `t = 0` and for `a = b`.
pub fn c_factor(t: f64, p: &BreakupParams) -> Result<f64> {
    let s = p.scales();
    let tau2 = (check_time(t)? / s.t0).powi(2);
    let skew = (p.a() / p.b() - p.b() / p.a()).powi(2);
    Ok((1.0 + tau2) / ((1.0 + tau2).powi(2) + tau2 * skew).sqrt())
}

/// Position Fedorov ratio `Δx1_single / Δx1_coinc`, equal to `K · C(t)`.
pub fn fedorov_ratio_x(t: f64, p: &BreakupParams) -> Result<f64> {
    Ok((var_x_single(t, p)? / var_x_coinc(t, p)?).sqrt())
}

/// Unconditional product `Δ²x1 · Δ²k1 = cosh²r (1 + t²/t0²)/4 >= 1/4`.
pub fn heisenberg_product(t: f64, p: &BreakupParams) -> Result<f64> {
    Ok(var_x_single(t, p)? * var_k_single(p))
}

/// Conditional (EPR) product `Δ²x1|x2 · Δ²k1|k2`.
pub fn einstein_product(t: f64, p: &BreakupParams) -> Result<f64> {
    Ok(var_x_coinc(t, p)? * var_k_coinc(p))
}

/// All second-moment observables at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceReport {
    pub t: f64,
    pub var_k_single: f64,
    pub var_k_coinc: f64,
    pub var_x_single: f64,
    pub var_x_coinc: f64,
    pub r_p: f64,
    pub r_x: f64,
    pub c: f64,
    pub heisenberg_product: f64,
    pub einstein_product: f64,
}

impl VarianceReport {
    pub fn evaluate(t: f64, p: &BreakupParams) -> Result<Self> {
        Ok(Self {
            t,
            var_k_single: var_k_single(p),
            var_k_coinc: var_k_coinc(p),
            var_x_single: var_x_single(t, p)?,
            var_x_coinc: var_x_coinc(t, p)?,
            r_p: fedorov_ratio_p(p),
            r_x: fedorov_ratio_x(t, p)?,
            c: c_factor(t, p)?,
            heisenberg_product: heisenberg_product(t, p)?,
            einstein_product: einstein_product(t, p)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p(a: f64, b: f64) -> BreakupParams {
        BreakupParams::new(a, b).unwrap()
    }

    /// The `cosh r`, `t/t0` forms of each closed form.
    fn tau_forms(t: f64, q: &BreakupParams) -> (f64, f64, f64) {
        let s = q.scales();
        let tau2 = (t / s.t0).powi(2);
        let (a, b, r) = (q.a(), q.b(), s.r);
        let single = (1.0 + tau2) * a * b * r.cosh() / 2.0;
        let coinc = a * b / (2.0 * r.cosh()) * ((2.0 * r).exp() + tau2) * ((-2.0 * r).exp() + tau2)
            / (1.0 + tau2);
        let einstein = ((2.0 * r).exp() + tau2) * ((-2.0 * r).exp() + tau2)
            / (1.0 + tau2)
            / (4.0 * r.cosh().powi(2));
        (single, coinc, einstein)
    }

    #[test]
    fn momentum_values() {
        assert_eq!(var_k_single(&p(1.0, 1.0)), 0.5);
        assert_eq!(var_k_coinc(&p(1.0, 1.0)), 0.5);
        let q = p(2.0, 0.5);
        assert_relative_eq!(var_k_single(&q), 1.0625, epsilon = 1e-15);
        assert_relative_eq!(var_k_single(&q), q.scales().r.cosh() / 2.0, epsilon = 1e-14);
        assert_relative_eq!(var_k_coinc(&q), 1.0 / 4.25, epsilon = 1e-15);
        assert_relative_eq!(fedorov_ratio_p(&q), 2.125, epsilon = 1e-14);
        assert_relative_eq!(fedorov_ratio_p(&p(0.8, 0.8)), 1.0, max_relative = 1e-15);
    }

    #[test]
    fn position_values() {
        assert_eq!(var_x_single(0.0, &p(1.0, 1.0)).unwrap(), 0.5);
        let q = p(2.0, 0.5);
        assert_relative_eq!(var_x_single(0.0, &q).unwrap(), 1.0625, epsilon = 1e-15);
        assert_relative_eq!(var_x_single(1.0, &q).unwrap(), 2.125, epsilon = 1e-14);
        assert_relative_eq!(var_x_coinc(0.0, &q).unwrap(), 1.0 / 4.25, epsilon = 1e-15);
        for t in [0.0, 0.5, 1.0, 2.7] {
            let (single, coinc, einstein) = tau_forms(t, &q);
            assert_relative_eq!(var_x_single(t, &q).unwrap(), single, max_relative = 1e-13);
            assert_relative_eq!(var_x_coinc(t, &q).unwrap(), coinc, max_relative = 1e-13);
            assert_relative_eq!(einstein_product(t, &q).unwrap(), einstein, max_relative = 1e-13);
        }
        let sym = p(1.3, 1.3);
        for t in [0.0, 0.4, 5.0] {
            assert_relative_eq!(
                var_x_single(t, &sym).unwrap(),
                var_x_coinc(t, &sym).unwrap(),
                max_relative = 1e-14
            );
        }
    }

    #[test]
    fn c_factor_shape() {
        let q = BreakupParams::from_squeezing(2.0, 1.0, 1.0, 1.0).unwrap();
        let t0 = q.scales().t0;
        assert_eq!(c_factor(0.0, &q).unwrap(), 1.0);
        assert_relative_eq!(c_factor(t0, &q).unwrap(), 1.0 / 2f64.cosh(), max_relative = 1e-13);
        assert_relative_eq!(1.0 / 2f64.cosh(), 0.265802, epsilon = 1e-6);
        assert!(c_factor(1e6 * t0, &q).unwrap() > 1.0 - 1e-6);
        for tau in [0.1, 0.7, 1.3, 4.0] {
            let tau2: f64 = tau * tau;
            let printed = (1.0 + tau2) / ((4f64.exp() + tau2) * ((-4f64).exp() + tau2)).sqrt();
            assert_relative_eq!(c_factor(tau * t0, &q).unwrap(), printed, max_relative = 1e-13);
        }
        let flat = p(1.0, 1.0);
        for t in [0.0, 0.3, 1.0, 4.0] {
            assert_eq!(c_factor(t, &flat).unwrap(), 1.0);
        }
    }

    #[test]
    fn position_ratio_limits() {
        let q = p(2.0, 0.5);
        let t0 = q.scales().t0;
        assert_relative_eq!(fedorov_ratio_x(0.0, &q).unwrap(), 2.125, max_relative = 1e-14);
        assert_relative_eq!(fedorov_ratio_x(t0, &q).unwrap(), 1.0, max_relative = 1e-14);
        assert_relative_eq!(fedorov_ratio_x(1e5 * t0, &q).unwrap(), 2.125, max_relative = 1e-6);
        for t in [0.2, 0.9, 3.3] {
            assert_relative_eq!(
                fedorov_ratio_x(t, &q).unwrap(),
                fedorov_ratio_p(&q) * c_factor(t, &q).unwrap(),
                max_relative = 1e-13
            );
        }
    }

    #[test]
    fn uncertainty_products() {
        assert_eq!(heisenberg_product(0.0, &p(1.0, 1.0)).unwrap(), 0.25);
        let q = p(2.0, 0.5);
        assert_relative_eq!(heisenberg_product(0.0, &q).unwrap(), 1.12890625, epsilon = 1e-14);
        assert_relative_eq!(heisenberg_product(1.0, &q).unwrap(), 2.0 * 1.12890625, epsilon = 1e-13);
        assert_relative_eq!(einstein_product(0.0, &q).unwrap(), 1.0 / 18.0625, epsilon = 1e-15);
        assert_relative_eq!(einstein_product(1.0, &q).unwrap(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn conditional_means() {
        let q = p(2.0, 0.5);
        assert_relative_eq!(mean_k_coinc(&q, 1.0), 3.75 / 4.25, epsilon = 1e-15);
        assert_eq!(mean_x_coinc(1.0, &q, 2.0).unwrap(), 0.0);
        assert_relative_eq!(mean_x_coinc(0.0, &q, 1.0).unwrap(), -0.9375 / 1.0625, epsilon = 1e-15);
    }

    #[test]
    fn negative_time_rejected() {
        let q = p(2.0, 0.5);
        assert!(var_x_single(-1.0, &q).is_err());
        assert!(c_factor(-0.1, &q).is_err());
        assert!(VarianceReport::evaluate(f64::NAN, &q).is_err());
    }

    #[test]
    fn report_consistency() {
        let q = p(0.6, 2.2);
        let r = VarianceReport::evaluate(1.7, &q).unwrap();
        assert_relative_eq!(r.r_x, r.r_p * r.c, max_relative = 1e-13);
        assert!(r.r_p >= r.r_x && r.r_x >= 1.0);
        assert!(r.heisenberg_product >= 0.25);
    }
}
