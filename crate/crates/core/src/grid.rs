//! Grid-based numerical oracle.
//!
//! Two-particle amplitudes are sampled on an `n × n` grid over `[-L, L)²`.
//! Transforms use the symmetric continuous-Fourier convention discretized on
//! centred axes:
//!
//! ```text
//! x_j = (j - n/2) Δx,   Δx = 2L/n
//! k_m = (m - n/2) Δk,   Δk = π/L,   k_max = π n / 2L
//! ψ̃_m = Δx/sqrt(2π) · (-1)^m Σ_j e^{-2πi mj/n} (-1)^j ψ_j
//! ```
//!
//! so a sampled position-space state maps onto the sampled momentum-space
//! state and the discrete norm `Σ|ψ|² Δ1 Δ2` is preserved exactly.
//!
//! Nothing in this module uses the closed forms it is meant to check, apart
//! from [`nyquist_check`] and [`GridPlan::Auto`], which only use them to size
//! the grid.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{check_time, positive, Error, Result};
use crate::model::BreakupParams;
use crate::observables::{var_k_single, var_x_single};

/// Relative amplitude at which the evolved state is treated as band-limited
/// when checking the free-evolution chirp.
pub const BANDWIDTH_TOL: f64 = 1e-10;
/// Relative amplitude the automatic grid sizing pushes below at both the
/// position and momentum edges.
pub const EXTENT_TOL: f64 = 1e-16;
/// Schmidt coefficients below this are dropped from a [`SchmidtSpectrum`].
pub const SCHMIDT_FLOOR: f64 = 1e-14;
/// Minimum probability mass of a conditioning slice.
pub const SLICE_FLOOR: f64 = 1e-300;
/// Tolerance on the discrete norm accepted by [`Grid2D::schmidt_svd`].
pub const NORM_TOL: f64 = 1e-10;

/// Which representation each grid axis carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceTag {
    /// `(x1, x2)`
    Position,
    /// `(k1, k2)`
    Momentum,
    /// `(x1, k2)`, after a partial transform in the second coordinate.
    Hybrid,
}

/// Selects the particle whose coordinate is fixed when conditioning.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Particle {
    One,
    Two,
}

/// Grid resolution: `n` points per axis on `[-extent, extent)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    n: usize,
    extent: f64,
}

impl GridSpec {
    pub fn new(n: usize, extent: f64) -> Result<Self> {
        if n < 64 || !n.is_power_of_two() {
            return Err(Error::InvalidGridSize(n));
        }
        Ok(Self {
            n,
            extent: positive("extent", extent)?,
        })
    }

    /// Sizes the domain for the breakup state at time `t`.
    ///
    /// Along `x1` the amplitude `|Ψ|` falls to a fraction `ε` of its peak at
    /// `2 sqrt(ln(1/ε) Δ²x1(t))`, and similarly in momentum. With the
    /// sampling budget `L · k_max = π n / 2` fixed by `n`, the extent is
    /// chosen so both edges keep the same relative margin.
    pub fn auto(n: usize, p: &BreakupParams, t: f64) -> Result<Self> {
        Self::balanced(n, var_x_single(t, p)?, var_k_single(p))
    }

    /// Extent for a Gaussian state with single-particle position variance
    /// `var_x` and momentum variance `var_k`.
    pub fn balanced(n: usize, var_x: f64, var_k: f64) -> Result<Self> {
        let log_tol = (1.0 / EXTENT_TOL).ln();
        let x_need = 2.0 * (log_tol * var_x).sqrt();
        let k_need = 2.0 * (log_tol * var_k).sqrt();
        let budget = PI * n as f64 / 2.0;
        Self::new(n, (budget * x_need / k_need).sqrt())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.extent / self.n as f64
    }

    pub fn dk(&self) -> f64 {
        PI / self.extent
    }

    pub fn k_max(&self) -> f64 {
        PI * self.n as f64 / (2.0 * self.extent)
    }

    pub fn position_axis(&self) -> Axis {
        Axis::centred(self.n, self.dx())
    }

    pub fn momentum_axis(&self) -> Axis {
        Axis::centred(self.n, self.dk())
    }
}

/// Either a fixed grid or one sized per time by [`GridSpec::auto`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridPlan {
    Auto { n: usize },
    Fixed(GridSpec),
}

impl GridPlan {
    pub fn resolve(&self, p: &BreakupParams, t: f64) -> Result<GridSpec> {
        match *self {
            GridPlan::Auto { n } => GridSpec::auto(n, p, t),
            GridPlan::Fixed(spec) => Ok(spec),
        }
    }

    pub fn n(&self) -> usize {
        match self {
            GridPlan::Auto { n } => *n,
            GridPlan::Fixed(spec) => spec.n(),
        }
    }
}

impl Default for GridPlan {
    fn default() -> Self {
        GridPlan::Auto { n: 512 }
    }
}

/// Uniform axis `start + i · step` for `i < len`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub start: f64,
    pub step: f64,
    pub len: usize,
}

impl Axis {
    fn centred(len: usize, step: f64) -> Self {
        Self {
            start: -((len / 2) as f64) * step,
            step,
            len,
        }
    }

    pub fn coord(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.len).map(|i| self.coord(i)).collect()
    }

    pub fn min(&self) -> f64 {
        self.start
    }

    pub fn max(&self) -> f64 {
        self.coord(self.len - 1)
    }

    /// Index of the sample nearest to `value`.
    pub fn nearest(&self, value: f64) -> Result<usize> {
        let half = 0.5 * self.step;
        if !(value >= self.min() - half && value <= self.max() + half) {
            return Err(Error::SliceOutOfRange {
                value,
                min: self.min(),
                max: self.max(),
            });
        }
        let i = ((value - self.start) / self.step).round() as usize;
        Ok(i.min(self.len - 1))
    }
}

/// Discrete second moments of `|ψ|²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean1: f64,
    pub mean2: f64,
    pub var1: f64,
    pub var2: f64,
    pub cov12: f64,
}

impl Moments {
    /// Pearson correlation of the two coordinates.
    pub fn correlation(&self) -> f64 {
        self.cov12 / (self.var1 * self.var2).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SliceStats {
    /// Grid coordinate actually conditioned on (nearest sample).
    pub at: f64,
    pub mean: f64,
    pub variance: f64,
}

/// Schmidt coefficients, largest first, with the Schmidt number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchmidtSpectrum {
    pub lambdas: Vec<f64>,
    pub k_numeric: f64,
}

impl SchmidtSpectrum {
    /// Sorts, drops coefficients below [`SCHMIDT_FLOOR`] and computes
    /// `K = (Σ λ²)^(-1)`.
    pub fn from_coefficients(mut lambdas: Vec<f64>) -> Self {
        lambdas.sort_by(|x, y| y.total_cmp(x));
        lambdas.retain(|&l| l >= SCHMIDT_FLOOR);
        let purity: f64 = lambdas.iter().map(|l| l * l).sum();
        Self {
            k_numeric: 1.0 / purity,
            lambdas,
        }
    }

    pub fn total(&self) -> f64 {
        self.lambdas.iter().sum()
    }
}

/// An `n × n` sampled complex amplitude. Row index runs along axis 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid2D {
    values: Vec<Complex64>,
    axis1: Axis,
    axis2: Axis,
    tag: SpaceTag,
}

/// Samples `f` on the grid. Hybrid grids use the position axis for the
/// first coordinate and the momentum axis for the second.
pub fn discretize<F>(f: F, spec: &GridSpec, tag: SpaceTag) -> Result<Grid2D>
where
    F: Fn(f64, f64) -> Complex64 + Sync,
{
    let (axis1, axis2) = match tag {
        SpaceTag::Position => (spec.position_axis(), spec.position_axis()),
        SpaceTag::Momentum => (spec.momentum_axis(), spec.momentum_axis()),
        SpaceTag::Hybrid => (spec.position_axis(), spec.momentum_axis()),
    };
    let n = spec.n();
    let mut values = vec![Complex64::new(0.0, 0.0); n * n];
    values.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        let c1 = axis1.coord(i);
        for (j, v) in row.iter_mut().enumerate() {
            *v = f(c1, axis2.coord(j));
        }
    });
    if let Some(idx) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
        let (i, j) = (idx / n, idx % n);
        return Err(Error::NonFiniteSample {
            i,
            j,
            x1: axis1.coord(i),
            x2: axis2.coord(j),
        });
    }
    Ok(Grid2D {
        values,
        axis1,
        axis2,
        tag,
    })
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Direction {
    Forward,
    Inverse,
}

impl Grid2D {
    pub fn n(&self) -> usize {
        self.axis1.len
    }

    pub fn tag(&self) -> SpaceTag {
        self.tag
    }

    pub fn axis1(&self) -> &Axis {
        &self.axis1
    }

    pub fn axis2(&self) -> &Axis {
        &self.axis2
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.n() + j]
    }

    /// The resolution this grid was sampled at.
    pub fn spec(&self) -> GridSpec {
        let n = self.n();
        let extent = match self.tag {
            SpaceTag::Momentum => PI / self.axis1.step,
            _ => 0.5 * n as f64 * self.axis1.step,
        };
        GridSpec { n, extent }
    }

    fn measure(&self) -> f64 {
        self.axis1.step * self.axis2.step
    }

    /// `Σ |ψ|² Δ1 Δ2`.
    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.measure()
    }

    pub fn normalize(mut self) -> Result<Self> {
        let norm = self.norm_sqr();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::ZeroNorm);
        }
        let scale = norm.sqrt().recip();
        self.values.par_iter_mut().for_each(|v| *v *= scale);
        Ok(self)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `max |ψ - φ|` over the grid; both must share axes.
    pub fn max_abs_diff(&self, other: &Grid2D) -> f64 {
        assert_eq!(self.values.len(), other.values.len(), "grid shapes differ");
        self.values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    /// Swaps the roles of the two coordinates.
    pub fn transpose(&self) -> Self {
        Self {
            values: transpose(&self.values, self.n()),
            axis1: self.axis2,
            axis2: self.axis1,
            tag: self.tag,
        }
    }

    fn expect(&self, expected: SpaceTag) -> Result<()> {
        if self.tag == expected {
            Ok(())
        } else {
            Err(Error::TagMismatch {
                expected,
                found: self.tag,
            })
        }
    }

    /// Full 2-D transform `(x1, x2) → (k1, k2)`.
    pub fn to_momentum(&self) -> Result<Self> {
        self.expect(SpaceTag::Position)?;
        let spec = self.spec();
        let mut out = self.clone();
        out.transform_axis2(Direction::Forward, spec.dx());
        out.transform_axis1(Direction::Forward, spec.dx());
        out.axis1 = spec.momentum_axis();
        out.axis2 = spec.momentum_axis();
        out.tag = SpaceTag::Momentum;
        Ok(out)
    }

    /// Full 2-D inverse transform `(k1, k2) → (x1, x2)`.
    pub fn to_position(&self) -> Result<Self> {
        self.expect(SpaceTag::Momentum)?;
        let spec = self.spec();
        let mut out = self.clone();
        out.transform_axis2(Direction::Inverse, spec.dk());
        out.transform_axis1(Direction::Inverse, spec.dk());
        out.axis1 = spec.position_axis();
        out.axis2 = spec.position_axis();
        out.tag = SpaceTag::Position;
        Ok(out)
    }

    /// Transform in the second coordinate only: `(x1, x2) → (x1, k2)`.
    pub fn partial_transform_x2(&self) -> Result<Self> {
        self.expect(SpaceTag::Position)?;
        let spec = self.spec();
        let mut out = self.clone();
        out.transform_axis2(Direction::Forward, spec.dx());
        out.axis2 = spec.momentum_axis();
        out.tag = SpaceTag::Hybrid;
        Ok(out)
    }

    /// Inverse of [`Self::partial_transform_x2`].
    pub fn inverse_partial_transform_x2(&self) -> Result<Self> {
        self.expect(SpaceTag::Hybrid)?;
        let spec = self.spec();
        let mut out = self.clone();
        out.transform_axis2(Direction::Inverse, spec.dk());
        out.axis2 = spec.position_axis();
        out.tag = SpaceTag::Position;
        Ok(out)
    }

    /// Free evolution for time `t`: multiplication by
    /// `exp(-i Q² (k1² + k2²) / 2)`.
    pub fn evolve_free(&self, t: f64, p: &BreakupParams) -> Result<Self> {
        self.expect(SpaceTag::Momentum)?;
        let max_safe = nyquist_check(&self.spec(), p);
        if !(check_time(t)? < max_safe) {
            return Err(Error::Nyquist { t, max_safe });
        }
        let q2 = p.q_squared(t)?;
        let n = self.n();
        let k: Vec<f64> = self.axis1.coords();
        let half_phase: Vec<Complex64> = k
            .iter()
            .map(|&k| Complex64::from_polar(1.0, -0.5 * q2 * k * k))
            .collect();
        let mut out = self.clone();
        out.values.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
            for (j, v) in row.iter_mut().enumerate() {
                *v *= half_phase[i] * half_phase[j];
            }
        });
        Ok(out)
    }

    pub fn moments(&self) -> Moments {
        let n = self.n();
        let c1 = self.axis1.coords();
        let c2 = self.axis2.coords();
        let mut w1 = vec![0.0; n];
        let mut w2 = vec![0.0; n];
        let mut total = 0.0;
        for i in 0..n {
            for j in 0..n {
                let w = self.values[i * n + j].norm_sqr();
                w1[i] += w;
                w2[j] += w;
                total += w;
            }
        }
        let mean = |w: &[f64], c: &[f64]| w.iter().zip(c).map(|(w, c)| w * c).sum::<f64>() / total;
        let (mean1, mean2) = (mean(&w1, &c1), mean(&w2, &c2));
        let var = |w: &[f64], c: &[f64], m: f64| {
            w.iter().zip(c).map(|(w, c)| w * (c - m).powi(2)).sum::<f64>() / total
        };
        let mut cov = 0.0;
        for i in 0..n {
            let d1 = c1[i] - mean1;
            let row: f64 = (0..n)
                .map(|j| self.values[i * n + j].norm_sqr() * (c2[j] - mean2))
                .sum();
            cov += d1 * row;
        }
        Moments {
            mean1,
            mean2,
            var1: var(&w1, &c1, mean1),
            var2: var(&w2, &c2, mean2),
            cov12: cov / total,
        }
    }

    /// Mean and variance of one particle's coordinate with the other's held
    /// at the grid sample nearest `value`.
    pub fn conditional_slice(&self, fixed: Particle, value: f64) -> Result<SliceStats> {
        let n = self.n();
        let (fixed_axis, free_axis) = match fixed {
            Particle::Two => (&self.axis2, &self.axis1),
            Particle::One => (&self.axis1, &self.axis2),
        };
        let idx = fixed_axis.nearest(value)?;
        let weights: Vec<f64> = (0..n)
            .map(|l| match fixed {
                Particle::Two => self.values[l * n + idx].norm_sqr(),
                Particle::One => self.values[idx * n + l].norm_sqr(),
            })
            .collect();
        let mass: f64 = weights.iter().sum::<f64>() * free_axis.step;
        if !(mass >= SLICE_FLOOR) {
            return Err(Error::NegligibleSlice { value, norm: mass });
        }
        let total: f64 = weights.iter().sum();
        let coords = free_axis.coords();
        let mean = weights.iter().zip(&coords).map(|(w, c)| w * c).sum::<f64>() / total;
        let variance = weights
            .iter()
            .zip(&coords)
            .map(|(w, c)| w * (c - mean).powi(2))
            .sum::<f64>()
            / total;
        Ok(SliceStats {
            at: fixed_axis.coord(idx),
            mean,
            variance,
        })
    }

    /// Schmidt spectrum from the singular values of the amplitude matrix.
    ///
    /// Discrete Schmidt vectors are orthonormal under `Σ_i u_i* v_i Δ`, so
    /// `λ_n = σ_n² Δ1 Δ2`, which sums to the discrete norm.
    pub fn schmidt_svd(&self) -> Result<SchmidtSpectrum> {
        let norm = self.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        let n = self.n();
        let m = DMatrix::from_row_slice(n, n, &self.values);
        let measure = self.measure();
        let lambdas = m
            .singular_values()
            .iter()
            .map(|s| s * s * measure)
            .collect();
        Ok(SchmidtSpectrum::from_coefficients(lambdas))
    }

    fn transform_axis2(&mut self, dir: Direction, step: f64) {
        let n = self.n();
        transform_rows(&mut self.values, n, dir, step);
    }

    fn transform_axis1(&mut self, dir: Direction, step: f64) {
        let n = self.n();
        let mut t = transpose(&self.values, n);
        transform_rows(&mut t, n, dir, step);
        self.values = transpose(&t, n);
    }
}

fn transpose(values: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    out.par_chunks_mut(n).enumerate().for_each(|(j, row)| {
        for (i, v) in row.iter_mut().enumerate() {
            *v = values[i * n + j];
        }
    });
    out
}

fn transform_rows(values: &mut [Complex64], n: usize, dir: Direction, step: f64) {
    let fft: Arc<dyn Fft<f64>> = match dir {
        Direction::Forward => FftPlanner::new().plan_fft_forward(n),
        Direction::Inverse => FftPlanner::new().plan_fft_inverse(n),
    };
    let scale = step / (2.0 * PI).sqrt();
    let scratch_len = fft.get_inplace_scratch_len();
    values.par_chunks_mut(n).for_each_init(
        || vec![Complex64::new(0.0, 0.0); scratch_len],
        |scratch, row| {
            // (-1)^j shifts the origin to the centre of both axes.
            for v in row.iter_mut().skip(1).step_by(2) {
                *v = -*v;
            }
            fft.process_with_scratch(row, scratch);
            for (m, v) in row.iter_mut().enumerate() {
                *v *= if m % 2 == 0 { scale } else { -scale };
            }
        },
    );
}

/// Largest time for which free evolution on `spec` is alias-free.
///
/// A momentum component `k` is displaced by `Q² k` during free flight; on the
/// periodic grid the chirp phase step between neighbouring momentum samples,
/// `Q² k Δk`, must stay below `π`. The bound is applied at
/// `k_edge = min(k_max, k_band)`, where `k_band = 2 sqrt(ln(1/ε) Δ²k1)` is the
/// largest `|k1|` at which `|Ψ̃|` still exceeds `ε = BANDWIDTH_TOL` of its peak.
/// Solving `Q² k_edge Δk = π` gives `t = m L / (ħ k_edge)`.
pub fn nyquist_check(spec: &GridSpec, p: &BreakupParams) -> f64 {
    let k_band = 2.0 * ((1.0 / BANDWIDTH_TOL).ln() * var_k_single(p)).sqrt();
    let k_edge = spec.k_max().min(k_band);
    p.m() * PI / (p.hbar() * k_edge * spec.dk())
}
