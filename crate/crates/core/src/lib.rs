//! Phase entanglement of a freely expanding two-particle Gaussian breakup
//! state.
//!
//! * [`model`] and [`schmidt`]: closed-form amplitudes and Schmidt spectrum.
//! * [`observables`]: variances, Fedorov ratios, `C(t)`, uncertainty products.
//! * [`grid`]: an independent FFT/SVD oracle that checks all of the above.
//! * [`scenarios`]: reproducible probes built from the two.
//! * [`cli`]: the `phasent` command-line front end.

pub mod cli;
pub mod error;
pub mod grid;
pub mod model;
pub mod observables;
pub mod scenarios;
pub mod schmidt;

pub use error::{Error, Result};
pub use grid::{discretize, nyquist_check, Grid2D, GridPlan, GridSpec, Moments, Particle, SchmidtSpectrum, SpaceTag};
pub use model::{
    derive_scales, diffusion_length, joint_density, psi_momentum, psi_position, pure_phase_psi, BreakupParams,
    BreakupState, ComplexAmplitude, DerivedScales, PurePhaseParams,
};
pub use observables::VarianceReport;
