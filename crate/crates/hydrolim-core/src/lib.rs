//! Pseudo-spectral simulation core for the small-aspect-ratio scaled
//! compressible flow system and its hydrostatic limit, the compressible
//! primitive equations.
//!
//! The crate provides:
//!
//! - [`spectral`]: Fourier fields on the periodic box [0,2)^3 with parity
//!   tracking, differentiation, Sobolev norms, dealiasing, and vertical
//!   average/integral primitives;
//! - [`state`]: prognostic containers for both systems and generation of
//!   paired (well- or ill-prepared) initial data;
//! - [`cf`]: IMEX time integration of the scaled compressible system with
//!   the stiff vertical acoustics implicit per mode, equation-substituted
//!   time derivatives, vertical-velocity reconstruction, and the mixed
//!   wave-identity residual;
//! - [`cpe`]: time integration of the hydrostatic limit with diagnostic
//!   vertical velocity;
//! - [`linear`]: exact per-mode solutions of the linear model system, the
//!   trusted oracle for stepper accuracy and the acoustic averaging story;
//! - [`diagnostics`]: the energy/dissipation functionals, difference norms,
//!   and rate fitting.

pub mod cf;
pub mod cpe;
pub mod diagnostics;
pub mod error;
pub mod linear;
pub mod spectral;
pub mod state;
pub mod testing;

pub use cf::{
    mixed_wave_residual, nonlinear_rhs, reconstruct_w, step, time_derivatives, ModeMatrix,
    NonlinearRhs, Scheme, StepperConfig, TimeDerivatives, WReconstruction, WaveResidual,
};
pub use cpe::{cpe_rhs, reconstruct_wp, step_cpe, CpeForcingTerms, CpeRhs};
pub use diagnostics::{
    delta_norms, fit_rate, functional_d, functional_d1, functional_e, functional_e1, record,
    DeltaNorms, DiagnosticsRecord, Functional, RateFit,
};
pub use error::CoreError;
pub use linear::{
    uniform_bound_check, vertical_block_eigenvalues, EvolveMethod, LinearModeSystem, ModeEigen,
    UniformBoundReport,
};
pub use spectral::{Axis3, AxisH, Grid, HorizontalField, Parity, SpectralField, VerticalPrimitive};
pub use state::{
    compatibility_derivatives, default_cpe_initial, make_ill_prepared_ic, make_well_prepared_ic,
    CfState, CpeState, InitialDerivatives,
};
