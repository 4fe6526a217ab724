//! Prognostic states of the two systems and generation of paired initial
//! data.
//!
//! The scaled compressible state carries (sigma, v1, v2, w) on the full box
//! with the symmetry classes (even, even, even, odd) in z. The hydrostatic
//! state carries a genuinely two-dimensional log-density `sigma_p`, a
//! three-dimensional horizontal velocity, and a diagnostic vertical velocity
//! reconstructed from them.

use crate::cpe;
use crate::error::CoreError;
use crate::spectral::{Grid, HorizontalField, Parity, SpectralField};
use std::f64::consts::PI;

/// Prognostic state of the scaled compressible system.
#[derive(Debug, Clone)]
pub struct CfState {
    pub sigma: SpectralField,
    pub v1: SpectralField,
    pub v2: SpectralField,
    pub w: SpectralField,
    pub epsilon: f64,
    pub time: f64,
}

impl CfState {
    pub fn new(
        sigma: SpectralField,
        v1: SpectralField,
        v2: SpectralField,
        w: SpectralField,
        epsilon: f64,
        time: f64,
    ) -> Result<CfState, CoreError> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(CoreError::BadEpsilon(epsilon));
        }
        let grid = sigma.grid();
        if v1.grid() != grid || v2.grid() != grid || w.grid() != grid {
            return Err(CoreError::GridMismatch);
        }
        for f in [&sigma, &v1, &v2] {
            if f.parity() != Parity::EvenZ {
                return Err(CoreError::ParityContract(f.parity()));
            }
        }
        if w.parity() != Parity::OddZ {
            return Err(CoreError::ParityContract(w.parity()));
        }
        Ok(CfState {
            sigma,
            v1,
            v2,
            w,
            epsilon,
            time,
        })
    }

    pub fn zeros(grid: Grid, epsilon: f64) -> Result<CfState, CoreError> {
        CfState::new(
            SpectralField::zeros(grid, Parity::EvenZ),
            SpectralField::zeros(grid, Parity::EvenZ),
            SpectralField::zeros(grid, Parity::EvenZ),
            SpectralField::zeros(grid, Parity::OddZ),
            epsilon,
            0.0,
        )
    }

    pub fn grid(&self) -> Grid {
        self.sigma.grid()
    }

    /// Fails with the offending field name if any coefficient is non-finite.
    pub fn check_finite(&self) -> Result<(), CoreError> {
        for (name, f) in [
            ("sigma", &self.sigma),
            ("v1", &self.v1),
            ("v2", &self.v2),
            ("w", &self.w),
        ] {
            if !f.is_finite() {
                return Err(CoreError::Diverged {
                    field: name,
                    time: self.time,
                });
            }
        }
        Ok(())
    }
}

/// Prognostic state of the hydrostatic limit system. `wp` is diagnostic and
/// is refreshed from (sigma_p, v_p) after every update.
#[derive(Debug, Clone)]
pub struct CpeState {
    pub sigma_p: HorizontalField,
    pub vp1: SpectralField,
    pub vp2: SpectralField,
    pub wp: SpectralField,
    pub time: f64,
}

impl CpeState {
    /// Build a state and reconstruct its vertical velocity.
    pub fn new(
        sigma_p: HorizontalField,
        vp1: SpectralField,
        vp2: SpectralField,
        time: f64,
    ) -> Result<CpeState, CoreError> {
        let grid = vp1.grid();
        if vp2.grid() != grid || sigma_p.shape() != (grid.nx, grid.ny) {
            return Err(CoreError::GridMismatch);
        }
        for f in [&vp1, &vp2] {
            if f.parity() != Parity::EvenZ {
                return Err(CoreError::ParityContract(f.parity()));
            }
        }
        let mut state = CpeState {
            sigma_p,
            vp1,
            vp2,
            wp: SpectralField::zeros(grid, Parity::OddZ),
            time,
        };
        state.wp = cpe::reconstruct_wp(&state, true);
        Ok(state)
    }

    pub fn grid(&self) -> Grid {
        self.vp1.grid()
    }

    pub fn check_finite(&self) -> Result<(), CoreError> {
        for (name, f) in [("vp1", &self.vp1), ("vp2", &self.vp2), ("wp", &self.wp)] {
            if !f.is_finite() {
                return Err(CoreError::Diverged {
                    field: name,
                    time: self.time,
                });
            }
        }
        if !self.sigma_p.is_finite() {
            return Err(CoreError::Diverged {
                field: "sigma_p",
                time: self.time,
            });
        }
        Ok(())
    }
}

/// Time derivatives of the initial data obtained by substituting the data
/// into the equations (first order) and into their formal time derivative
/// (second order density).
#[derive(Debug, Clone)]
pub struct InitialDerivatives {
    pub sigma_t: SpectralField,
    pub v1_t: SpectralField,
    pub v2_t: SpectralField,
    pub w_t: SpectralField,
    pub sigma_tt: SpectralField,
}

/// Compatibility derivatives of a state, usually applied at t = 0.
pub fn compatibility_derivatives(state: &CfState) -> InitialDerivatives {
    let d = crate::cf::time_derivatives(state);
    InitialDerivatives {
        sigma_t: d.sigma_t,
        v1_t: d.v1_t,
        v2_t: d.v2_t,
        w_t: d.w_t,
        sigma_tt: d.sigma_tt,
    }
}

/// Fixed perturbation shapes. Deterministic so experiments are reproducible,
/// band-limited so dealiasing never clips initial data. The density shape is
/// z-independent: a z-dependent O(eps) density perturbation would seed a
/// vertical acoustic oscillation of eps-independent amplitude in w (the
/// fluctuating density converts to w with a 1/eps factor), drowning the w
/// convergence rates the sweep is meant to measure.
pub mod perturbation {
    use std::f64::consts::PI;

    pub fn zeta_sigma(x: f64, y: f64, _z: f64) -> f64 {
        (PI * x).cos() * (PI * y).cos()
    }

    pub fn zeta_v1(_x: f64, y: f64, z: f64) -> f64 {
        (PI * y).cos() * (PI * z).cos()
    }

    pub fn zeta_v2(x: f64, _y: f64, z: f64) -> f64 {
        (PI * x).cos() * (PI * z).cos()
    }

    pub fn zeta_w(x: f64, _y: f64, z: f64) -> f64 {
        (PI * z).sin() * (PI * x).cos()
    }
}

fn perturbed_state(
    cpe_init: &CpeState,
    epsilon: f64,
    scale: f64,
) -> Result<CfState, CoreError> {
    let grid = cpe_init.grid();
    let mut sigma = cpe_init.sigma_p.embed(grid);
    let mut v1 = cpe_init.vp1.clone();
    let mut v2 = cpe_init.vp2.clone();
    let mut w = cpe_init.wp.clone();
    if scale != 0.0 {
        let zs = SpectralField::from_fn(grid, Parity::EvenZ, perturbation::zeta_sigma);
        let z1 = SpectralField::from_fn(grid, Parity::EvenZ, perturbation::zeta_v1);
        let z2 = SpectralField::from_fn(grid, Parity::EvenZ, perturbation::zeta_v2);
        let zw = SpectralField::from_fn(grid, Parity::OddZ, perturbation::zeta_w);
        sigma.add_scaled(&zs, scale);
        v1.add_scaled(&z1, scale);
        v2.add_scaled(&z2, scale);
        w.add_scaled(&zw, scale);
    }
    CfState::new(sigma, v1, v2, w, epsilon, cpe_init.time)
}

/// Well-prepared initial data: the hydrostatic state plus an O(eps)
/// perturbation, so ||sigma0 - sigma_p, v0 - v_p||_{L^2} scales exactly
/// linearly in eps and d_z sigma0 = 0.
pub fn make_well_prepared_ic(
    cpe_init: &CpeState,
    epsilon: f64,
    amplitude: f64,
) -> Result<CfState, CoreError> {
    perturbed_state(cpe_init, epsilon, epsilon * amplitude)
}

/// General ("ill-prepared") initial data: an eps-independent O(1)
/// perturbation with d_z sigma0 = 0, violating the closeness-in-velocity
/// condition while keeping the energy functional finite for each fixed eps.
pub fn make_ill_prepared_ic(
    cpe_init: &CpeState,
    epsilon: f64,
    amplitude: f64,
) -> Result<CfState, CoreError> {
    perturbed_state(cpe_init, epsilon, amplitude)
}

/// Default hydrostatic base state used by the experiment harness: a smooth,
/// band-limited flow with genuine vertical shear so the reconstructed
/// vertical velocity is nontrivial.
pub fn default_cpe_initial(grid: Grid) -> Result<CpeState, CoreError> {
    let sigma_p = HorizontalField::from_fn(grid.nx, grid.ny, |x, y| {
        0.25 * (PI * x).cos() * (PI * y).cos()
    });
    let vp1 = SpectralField::from_fn(grid, Parity::EvenZ, |_, y, z| {
        0.25 * (PI * y).cos() + 0.12 * (PI * z).cos() * (PI * y).sin()
    });
    let vp2 = SpectralField::from_fn(grid, Parity::EvenZ, |x, _, z| {
        0.25 * (PI * x).sin() + 0.12 * (PI * z).cos() * (PI * x).cos()
    });
    CpeState::new(sigma_p, vp1, vp2, 0.0)
}
