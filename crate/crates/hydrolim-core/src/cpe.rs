//! Time integration of the hydrostatic limit system (compressible primitive
//! equations): a two-dimensional evolution for the log-density coupled to a
//! three-dimensional horizontal velocity with implicit viscosity, plus the
//! diagnostic reconstruction of the vertical velocity.

use crate::cf::{Scheme, StepperConfig};
use crate::error::CoreError;
use crate::spectral::{Axis3, AxisH, Grid, HorizontalField, Parity, SpectralField};
use crate::state::CpeState;
use ndarray::{Array3, Zip};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Vertical velocity of the hydrostatic system,
///
/// ```text
/// w_p(.,z) = -int_0^z ( vtilde_p . grad_h sigma_p + div_h vtilde_p ) dz',
/// ```
///
/// where vtilde_p is the baroclinic (zero-vertical-mean) part of v_p. The
/// density weights e^{+-sigma_p} of the general reconstruction cancel here
/// because sigma_p does not depend on z. The integrand has no kz = 0 content,
/// so w_p is exactly odd and vanishes at z = 0 and z = 1 by construction.
pub fn reconstruct_wp(state: &CpeState, dealias: bool) -> SpectralField {
    let grid = state.grid();
    let fluct1 = state.vp1.vertical_fluctuation().expect("vp1 is even");
    let fluct2 = state.vp2.vertical_fluctuation().expect("vp2 is even");

    let sx = state.sigma_p.derivative(AxisH::X, 1).embed(grid);
    let sy = state.sigma_p.derivative(AxisH::Y, 1).embed(grid);

    let mut integrand = fluct1.multiply(&sx, dealias);
    integrand.add_scaled(&fluct2.multiply(&sy, dealias), 1.0);
    integrand.add_scaled(&fluct1.derivative(Axis3::X, 1), 1.0);
    integrand.add_scaled(&fluct2.derivative(Axis3::Y, 1), 1.0);

    let prim = integrand.vertical_integral();
    debug_assert!(prim.slope_l2() < 1e-12);
    prim.periodic.scaled(-1.0)
}

/// Explicit part of the right-hand side. Viscosity on v_p is handled
/// implicitly by [`step_cpe`]; the density equation has no stiff term.
#[derive(Debug, Clone)]
pub struct CpeRhs {
    pub d_sigma_p: HorizontalField,
    pub d_vp1: SpectralField,
    pub d_vp2: SpectralField,
}

/// External forcing evaluated at a given time, used by manufactured-solution
/// tests.
pub struct CpeForcingTerms {
    pub sigma: HorizontalField,
    pub v1: SpectralField,
    pub v2: SpectralField,
}

pub type CpeForcing<'a> = Option<&'a dyn Fn(f64) -> CpeForcingTerms>;

/// Right-hand side of the hydrostatic system: the barotropic density
/// equation d_t sigma_p = -(vbar_p . grad_h sigma_p + div_h vbar_p) and the
/// advective/pressure part of the momentum equation.
pub fn cpe_rhs(state: &CpeState, dealias: bool, forcing: CpeForcing) -> CpeRhs {
    let grid = state.grid();

    // 2-D barotropic density equation driven by the vertical mean of v_p
    let vbar1 = HorizontalField::from_level_zero(&state.vp1);
    let vbar2 = HorizontalField::from_level_zero(&state.vp2);
    let sx = state.sigma_p.derivative(AxisH::X, 1);
    let sy = state.sigma_p.derivative(AxisH::Y, 1);
    let mut d_sigma_p = vbar1.multiply(&sx, dealias);
    d_sigma_p.add_scaled(&vbar2.multiply(&sy, dealias), 1.0);
    d_sigma_p.add_scaled(&vbar1.derivative(AxisH::X, 1), 1.0);
    d_sigma_p.add_scaled(&vbar2.derivative(AxisH::Y, 1), 1.0);
    let mut d_sigma_p = d_sigma_p.scaled(-1.0);

    // momentum advection in physical space
    let v1p = state.vp1.to_physical();
    let v2p = state.vp2.to_physical();
    let wp = state.wp.to_physical();
    let advect = |f: &SpectralField| {
        let fx = f.derivative(Axis3::X, 1).to_physical();
        let fy = f.derivative(Axis3::Y, 1).to_physical();
        let fz = f.derivative(Axis3::Z, 1).to_physical();
        let mut prod = Array3::zeros(grid.shape());
        Zip::from(&mut prod)
            .and(&v1p)
            .and(&fx)
            .for_each(|p, &a, &dx| *p = a * dx);
        Zip::from(&mut prod)
            .and(&v2p)
            .and(&fy)
            .for_each(|p, &b, &dy| *p += b * dy);
        Zip::from(&mut prod)
            .and(&wp)
            .and(&fz)
            .for_each(|p, &c, &dz| *p += c * dz);
        let field = SpectralField::from_physical_unchecked(grid, &prod, Parity::EvenZ);
        let field = if dealias { field.dealias() } else { field };
        field.project_parity(Parity::EvenZ)
    };

    let mut d_vp1 = advect(&state.vp1).scaled(-1.0);
    d_vp1.add_scaled(&state.sigma_p.derivative(AxisH::X, 1).embed(grid), -1.0);
    let mut d_vp2 = advect(&state.vp2).scaled(-1.0);
    d_vp2.add_scaled(&state.sigma_p.derivative(AxisH::Y, 1).embed(grid), -1.0);

    if let Some(f) = forcing {
        let terms = f(state.time);
        d_sigma_p.add_scaled(&terms.sigma, 1.0);
        d_vp1.add_scaled(&terms.v1, 1.0);
        d_vp2.add_scaled(&terms.v2, 1.0);
    }

    CpeRhs {
        d_sigma_p,
        d_vp1,
        d_vp2,
    }
}

/// Advance the hydrostatic state by one step: the density explicitly, the
/// velocity with implicit viscosity, then refresh the diagnostic w_p.
pub fn step_cpe(
    state: &CpeState,
    cfg: &StepperConfig,
    prev: Option<&CpeRhs>,
    forcing: CpeForcing,
) -> Result<(CpeState, CpeRhs), CoreError> {
    let grid = state.grid();
    let dt = cfg.dt;
    let rhs = cpe_rhs(state, cfg.dealias, forcing);

    let (theta, w_new, w_old) = match (cfg.scheme, prev) {
        (Scheme::ImexEuler, _) | (Scheme::Cnab2, None) => (1.0, 1.0, 0.0),
        (Scheme::Cnab2, Some(_)) => (0.5, 1.5, -0.5),
    };

    // density: fully explicit (Euler or AB2)
    let mut sigma_p = state.sigma_p.clone();
    sigma_p.add_scaled(&rhs.d_sigma_p, dt * w_new);
    if let Some(p) = prev {
        sigma_p.add_scaled(&p.d_sigma_p, dt * w_old);
    }

    // velocity: explicit advection/pressure plus implicit (or CN) viscosity
    let crank = theta < 1.0;
    let solve_momentum = |v: &SpectralField, d: &SpectralField, d_old: Option<&SpectralField>| {
        let (nx, ny, nz) = grid.shape();
        let mut out = v.coeffs().clone();
        for ix in 0..nx {
            let kx = Grid::mode_of(ix, nx) as f64;
            for iy in 0..ny {
                let ky = Grid::mode_of(iy, ny) as f64;
                for iz in 0..nz {
                    let kz = Grid::mode_of(iz, nz) as f64;
                    let lap = PI * PI * (kx * kx + ky * ky + kz * kz);
                    let mut b = v.coeffs()[[ix, iy, iz]]
                        * Complex64::new(if crank { 1.0 - 0.5 * dt * lap } else { 1.0 }, 0.0);
                    b += d.coeffs()[[ix, iy, iz]] * (dt * w_new);
                    if let Some(o) = d_old {
                        b += o.coeffs()[[ix, iy, iz]] * (dt * w_old);
                    }
                    out[[ix, iy, iz]] = b / (1.0 + theta * dt * lap);
                }
            }
        }
        SpectralField::from_coeffs(grid, out, Parity::EvenZ)
    };

    let vp1 = solve_momentum(&state.vp1, &rhs.d_vp1, prev.map(|p| &p.d_vp1));
    let vp2 = solve_momentum(&state.vp2, &rhs.d_vp2, prev.map(|p| &p.d_vp2));

    let mut next = CpeState {
        sigma_p,
        vp1,
        vp2,
        wp: SpectralField::zeros(grid, Parity::OddZ),
        time: state.time + dt,
    };
    next.wp = reconstruct_wp(&next, cfg.dealias);
    next.check_finite()?;
    Ok((next, rhs))
}
