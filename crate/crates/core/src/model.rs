//! The free two-particle breakup state and its closed-form amplitudes.
//!
//! At breakup the pair is a product of a center-of-mass Gaussian of width `b`
//! and a relative-coordinate Gaussian of width `a`:
//!
//! ```text
//! Ψ(x1, x2; 0) = (π a b)^(-1/2) exp(-(x1 + x2)² / 4b²) exp(-(x1 - x2)² / 4a²)
//! ```
//!
//! Free evolution only adds the phase `exp(-i Q² (k1² + k2²) / 2)` in momentum
//! space, with `Q = sqrt(ħ t / m)` the quantum diffusion length. All
//! amplitudes returned here are normalized to unit L² norm, and the Fourier
//! convention is the symmetric one (`1/sqrt(2π)` per axis in both directions).

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_time, positive, Error, Result};

/// Pointwise value of a two-particle wavefunction.
pub type ComplexAmplitude = Complex64;

/// Physical inputs of the breakup state. Equal masses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BreakupParams {
    a: f64,
    b: f64,
    m: f64,
    hbar: f64,
}

impl BreakupParams {
    /// Packet widths in natural units (`m = ħ = 1`).
    pub fn new(a: f64, b: f64) -> Result<Self> {
        Self::with_units(a, b, 1.0, 1.0)
    }

    pub fn with_units(a: f64, b: f64, m: f64, hbar: f64) -> Result<Self> {
        Ok(Self {
            a: positive("a", a)?,
            b: positive("b", b)?,
            m: positive("m", m)?,
            hbar: positive("hbar", hbar)?,
        })
    }

    /// Builds the state from the squeezing parameter `r = ln(a/b)` and the
    /// geometric-mean width `α = sqrt(ab)`.
    pub fn from_squeezing(r: f64, alpha: f64, m: f64, hbar: f64) -> Result<Self> {
        if !r.is_finite() {
            return Err(Error::InvalidParameter {
                name: "r",
                value: r,
                reason: "must be finite",
            });
        }
        let alpha = positive("alpha", alpha)?;
        Self::with_units(alpha * (0.5 * r).exp(), alpha * (-0.5 * r).exp(), m, hbar)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// The same state with the relative and center-of-mass widths exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            a: self.b,
            b: self.a,
            ..*self
        }
    }

    pub fn scales(&self) -> DerivedScales {
        derive_scales(self)
    }

    /// `Q²(t) = ħ t / m`.
    pub fn q_squared(&self, t: f64) -> Result<f64> {
        Ok(self.hbar * check_time(t)? / self.m)
    }

    /// The state frozen at time `t`.
    pub fn at(&self, t: f64) -> Result<BreakupState> {
        let q2 = self.q_squared(t)?;
        let (a2, b2) = (self.a * self.a, self.b * self.b);
        let denom = Complex64::new(a2 * b2 - q2 * q2, q2 * (a2 + b2));
        Ok(BreakupState {
            params: *self,
            t,
            q2,
            denom,
            prefactor: (self.a * self.b / PI).sqrt() / denom.sqrt(),
        })
    }
}

/// Scales derived from [`BreakupParams`] that every closed form uses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedScales {
    /// `sqrt(ab)`
    pub alpha: f64,
    /// `ln(a/b)`; negative when the center-of-mass packet is the wider one.
    pub r: f64,
    /// `m a b / ħ`, the time at which the joint density factorizes.
    pub t0: f64,
    /// Schmidt number `cosh r = (a/b + b/a) / 2`.
    pub schmidt_number: f64,
}

pub fn derive_scales(p: &BreakupParams) -> DerivedScales {
    let (a, b) = (p.a, p.b);
    DerivedScales {
        alpha: (a * b).sqrt(),
        r: (a / b).ln(),
        t0: p.m * a * b / p.hbar,
        schmidt_number: 0.5 * (a / b + b / a),
    }
}

/// Quantum diffusion length `Q = sqrt(ħ t / m)`.
pub fn diffusion_length(t: f64, p: &BreakupParams) -> Result<f64> {
    Ok(p.q_squared(t)?.sqrt())
}

/// A breakup state evaluated at a fixed, validated time.
///
/// Caches the complex Gaussian denominator
/// `D = a²b² - Q⁴ + i Q² (a² + b²)` so pointwise evaluation on a grid
/// does no repeated validation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BreakupState {
    params: BreakupParams,
    t: f64,
    q2: f64,
    denom: Complex64,
    prefactor: Complex64,
}

impl BreakupState {
    pub fn params(&self) -> &BreakupParams {
        &self.params
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn q_squared(&self) -> f64 {
        self.q2
    }

    /// Position-space amplitude, the exact 2-D Fourier inverse of the
    /// momentum-space state:
    ///
    /// ```text
    /// Ψ = sqrt(ab/π) D^(-1/2) exp(-[a²(x1+x2)² + b²(x1-x2)² + 2iQ²(x1²+x2²)] / 4D)
    /// ```
    ///
    /// `D` stays in the closed upper half plane for t >= 0, so the principal
    /// square root is continuous in time.
    pub fn psi_position(&self, x1: f64, x2: f64) -> ComplexAmplitude {
        let (a2, b2) = (self.params.a.powi(2), self.params.b.powi(2));
        let (u, v) = (x1 + x2, x1 - x2);
        let num = Complex64::new(a2 * u * u + b2 * v * v, 2.0 * self.q2 * (x1 * x1 + x2 * x2));
        self.prefactor * (-num / (4.0 * self.denom)).exp()
    }

    /// Momentum-space amplitude; time enters only through the chirp phase.
    pub fn psi_momentum(&self, k1: f64, k2: f64) -> ComplexAmplitude {
        let (a, b) = (self.params.a, self.params.b);
        let (d, s) = (k1 - k2, k1 + k2);
        let modulus = (a * b / PI).sqrt() * (-0.25 * (a * a * d * d + b * b * s * s)).exp();
        Complex64::from_polar(modulus, -0.5 * self.q2 * (k1 * k1 + k2 * k2))
    }

    /// `|Ψ(x1, x2; t)|²`, from its own closed form rather than by squaring
    /// [`Self::psi_position`].
    pub fn joint_density(&self, x1: f64, x2: f64) -> f64 {
        let (a2, b2) = (self.params.a.powi(2), self.params.b.powi(2));
        let (u, v) = (x1 + x2, x1 - x2);
        let re = self.denom.re;
        let mod2 = self.denom.norm_sqr();
        let quad = re * (a2 * u * u + b2 * v * v)
            + 2.0 * self.q2 * self.q2 * (a2 + b2) * (x1 * x1 + x2 * x2);
        (self.params.a * self.params.b / PI) / mod2.sqrt() * (-0.5 * quad / mod2).exp()
    }

    /// Mixed derivative `∂² ln P / ∂x1 ∂x2`. Constant in space; zero at
    /// `t = t0` or when `a = b`.
    pub fn density_cross_coupling(&self) -> f64 {
        let (a2, b2) = (self.params.a.powi(2), self.params.b.powi(2));
        self.denom.re * (b2 - a2) / self.denom.norm_sqr()
    }
}

pub fn psi_position(x1: f64, x2: f64, t: f64, p: &BreakupParams) -> Result<ComplexAmplitude> {
    Ok(p.at(t)?.psi_position(x1, x2))
}

pub fn psi_momentum(k1: f64, k2: f64, t: f64, p: &BreakupParams) -> Result<ComplexAmplitude> {
    Ok(p.at(t)?.psi_momentum(k1, k2))
}

pub fn joint_density(x1: f64, x2: f64, t: f64, p: &BreakupParams) -> Result<f64> {
    Ok(p.at(t)?.joint_density(x1, x2))
}

/// Parameters of the pure-phase entangled state
/// `exp(-μ²(x1² + x2²) + i ν² x1 x2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PurePhaseParams {
    mu: f64,
    nu: f64,
}

impl PurePhaseParams {
    pub fn new(mu: f64, nu: f64) -> Result<Self> {
        let mu = positive("mu", mu)?;
        if !nu.is_finite() || nu < 0.0 {
            return Err(Error::InvalidParameter {
                name: "nu",
                value: nu,
                reason: "must be finite and >= 0",
            });
        }
        Ok(Self { mu, nu })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }
}

/// Normalized pure-phase state. Its density `|Ψ|²` factorizes for every ν.
pub fn pure_phase_psi(x1: f64, x2: f64, q: &PurePhaseParams) -> ComplexAmplitude {
    let mu2 = q.mu * q.mu;
    let modulus = (2.0 / PI).sqrt() * q.mu * (-mu2 * (x1 * x1 + x2 * x2)).exp();
    Complex64::from_polar(modulus, q.nu * q.nu * x1 * x2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p(a: f64, b: f64) -> BreakupParams {
        BreakupParams::new(a, b).unwrap()
    }

    #[test]
    fn rejects_bad_params() {
        assert!(BreakupParams::new(0.0, 1.0).is_err());
        assert!(BreakupParams::new(1.0, -1.0).is_err());
        assert!(BreakupParams::new(f64::NAN, 1.0).is_err());
        assert!(BreakupParams::with_units(1.0, 1.0, f64::INFINITY, 1.0).is_err());
        assert!(BreakupParams::with_units(1.0, 1.0, 1.0, 0.0).is_err());
        assert!(PurePhaseParams::new(0.0, 1.0).is_err());
        assert!(PurePhaseParams::new(1.0, -0.1).is_err());
        assert!(PurePhaseParams::new(1.0, 0.0).is_ok());
    }

    #[test]
    fn scales_symmetric() {
        let s = p(1.0, 1.0).scales();
        assert_eq!((s.alpha, s.r, s.t0, s.schmidt_number), (1.0, 0.0, 1.0, 1.0));
    }

    #[test]
    fn scales_asymmetric_and_swap() {
        let s = p(2.0, 0.5).scales();
        assert_relative_eq!(s.alpha, 1.0, epsilon = 1e-15);
        assert_relative_eq!(s.r, 4f64.ln(), epsilon = 1e-15);
        assert_relative_eq!(s.t0, 1.0, epsilon = 1e-15);
        assert_relative_eq!(s.schmidt_number, 2.125, epsilon = 1e-15);
        assert_relative_eq!(s.schmidt_number, s.r.cosh(), epsilon = 1e-14);

        let w = p(0.5, 2.0).scales();
        assert_eq!(w.schmidt_number, 2.125);
        assert_relative_eq!(w.r, -s.r, epsilon = 1e-15);
    }

    #[test]
    fn from_squeezing_round_trips() {
        let q = BreakupParams::from_squeezing(2.0, 1.5, 1.0, 1.0).unwrap();
        let s = q.scales();
        assert_relative_eq!(s.r, 2.0, epsilon = 1e-14);
        assert_relative_eq!(s.alpha, 1.5, epsilon = 1e-14);
    }

    #[test]
    fn diffusion_length_values() {
        let q = p(2.0, 0.5);
        assert_eq!(diffusion_length(0.0, &q).unwrap(), 0.0);
        assert_eq!(diffusion_length(4.0, &q).unwrap(), 2.0);
        let t0 = q.scales().t0;
        assert_relative_eq!(diffusion_length(t0, &q).unwrap().powi(2), 1.0, epsilon = 1e-15);
        assert!(matches!(diffusion_length(-1.0, &q), Err(Error::InvalidTime(_))));
        let heavy = BreakupParams::with_units(1.0, 1.0, 4.0, 1.0).unwrap();
        assert_eq!(diffusion_length(16.0, &heavy).unwrap(), 2.0);
    }

    #[test]
    fn position_at_origin_is_prefactor() {
        for t in [0.0, 0.3, 1.0, 7.0] {
            let s = p(2.0, 0.5).at(t).unwrap();
            let psi = s.psi_position(0.0, 0.0);
            let d = Complex64::new(1.0 - t * t, t * 4.25);
            assert_relative_eq!(psi.norm(), (1.0 / PI).sqrt() / d.norm().sqrt(), epsilon = 1e-15);
        }
    }

    #[test]
    fn position_at_t0_is_real_initial_state() {
        let (a, b) = (2.0, 0.5);
        let s = p(a, b).at(0.0).unwrap();
        for &(x1, x2) in &[(0.3, -1.2), (1.0, 1.0), (-2.0, 0.5)] {
            let psi = s.psi_position(x1, x2);
            let u: f64 = x1 + x2;
            let v: f64 = x1 - x2;
            let expected = (PI * a * b).powf(-0.5)
                * (-(u * u) / (4.0 * b * b)).exp()
                * (-(v * v) / (4.0 * a * a)).exp();
            assert_eq!(psi.im, 0.0);
            assert_relative_eq!(psi.re, expected, max_relative = 1e-14);
        }
    }

    #[test]
    fn symmetric_state_is_product_at_t0() {
        let s = p(1.0, 1.0).at(0.0).unwrap();
        for &(x1, x2) in &[(0.7, -0.2), (1.5, 1.1)] {
            let lhs = s.psi_position(x1, x2) * s.psi_position(0.0, 0.0);
            let rhs = s.psi_position(x1, 0.0) * s.psi_position(0.0, x2);
            assert_relative_eq!(lhs.re, rhs.re, max_relative = 1e-14);
            let g = (-(x1 * x1 + x2 * x2) / 2.0).exp();
            assert_relative_eq!(s.psi_position(x1, x2).re, g / PI.sqrt(), max_relative = 1e-14);
        }
    }

    #[test]
    fn momentum_modulus_is_time_independent() {
        let q = p(2.0, 0.5);
        let s0 = q.at(0.0).unwrap();
        for t in [0.1, 1.0, 13.0] {
            let st = q.at(t).unwrap();
            for &(k1, k2) in &[(0.0, 0.0), (0.4, -1.1), (2.0, 1.5)] {
                assert_relative_eq!(
                    st.psi_momentum(k1, k2).norm(),
                    s0.psi_momentum(k1, k2).norm(),
                    max_relative = 1e-15
                );
            }
        }
        let peak = s0.psi_momentum(0.0, 0.0);
        assert!(peak.re > 0.0 && peak.im == 0.0);
        assert!(peak.re > s0.psi_momentum(0.1, 0.0).re);
    }

    #[test]
    fn density_matches_amplitude_and_cross_coupling() {
        let q = p(2.0, 0.5);
        for t in [0.0, 0.5, 1.0, 3.0] {
            let s = q.at(t).unwrap();
            for &(x1, x2) in &[(0.0, 0.0), (0.4, -1.1), (2.0, 1.5)] {
                assert_relative_eq!(
                    s.joint_density(x1, x2),
                    s.psi_position(x1, x2).norm_sqr(),
                    max_relative = 1e-13
                );
            }
            // Finite-difference mixed log-derivative.
            let h = 1e-3;
            let lp = |x1: f64, x2: f64| s.joint_density(x1, x2).ln();
            let fd = (lp(0.3 + h, 0.2 + h) - lp(0.3 + h, 0.2 - h) - lp(0.3 - h, 0.2 + h)
                + lp(0.3 - h, 0.2 - h))
                / (4.0 * h * h);
            assert!((fd - s.density_cross_coupling()).abs() < 1e-6);
        }
        let at_t0 = q.at(q.scales().t0).unwrap();
        assert!(at_t0.density_cross_coupling().abs() < 1e-15);
    }

    #[test]
    fn pure_phase_density_factorizes() {
        let q = PurePhaseParams::new(1.0, 1.3).unwrap();
        let d = |x1, x2| pure_phase_psi(x1, x2, &q).norm_sqr();
        for &(x1, x2) in &[(0.3, -0.7), (1.2, 0.9)] {
            assert_relative_eq!(d(x1, x2) * d(0.0, 0.0), d(x1, 0.0) * d(0.0, x2), max_relative = 1e-14);
        }
        let real = PurePhaseParams::new(1.0, 0.0).unwrap();
        assert_eq!(pure_phase_psi(0.4, -0.9, &real).im, 0.0);
    }
}
