//! Energy/dissipation functionals, difference norms between the compressible
//! and hydrostatic solutions, and log-log rate fitting.
//!
//! Comma-lists in the functional definitions are summed term by term
//! (||a, b|| = ||a|| + ||b||); every term is also reported individually so a
//! different aggregation convention is a post-processing step. Vector-valued
//! entries (v, grad_h sigma) use the natural Euclidean norm over components.

use crate::cf::TimeDerivatives;
use crate::error::CoreError;
use crate::spectral::{Axis3, SpectralField};
use crate::state::{CfState, CpeState};

/// A functional value with its individual terms, in definition order.
#[derive(Debug, Clone)]
pub struct Functional {
    pub total: f64,
    pub terms: Vec<(&'static str, f64)>,
}

impl Functional {
    fn from_terms(terms: Vec<(&'static str, f64)>) -> Functional {
        let total = terms.iter().map(|(_, v)| v).sum();
        Functional { total, terms }
    }
}

fn vec2_hs(a: &SpectralField, b: &SpectralField, s: u32) -> f64 {
    a.hs_norm(s).hypot(b.hs_norm(s))
}

fn grad_h_hs(f: &SpectralField, s: u32) -> f64 {
    vec2_hs(&f.derivative(Axis3::X, 1), &f.derivative(Axis3::Y, 1), s)
}

/// E(t): the energy functional
/// ||v, eps w||_{H^3} + ||d_t sigma, grad_h sigma, d_z sigma/eps||_{H^2}
/// + ||sigma||_{H^4} + ||w, d_z w||_{H^2}.
pub fn functional_e(state: &CfState, derivs: &TimeDerivatives) -> Functional {
    let eps = state.epsilon;
    Functional::from_terms(vec![
        ("v_h3", vec2_hs(&state.v1, &state.v2, 3)),
        ("eps_w_h3", eps * state.w.hs_norm(3)),
        ("sigma_t_h2", derivs.sigma_t.hs_norm(2)),
        ("grad_h_sigma_h2", grad_h_hs(&state.sigma, 2)),
        (
            "dz_sigma_over_eps_h2",
            state.sigma.derivative(Axis3::Z, 1).hs_norm(2) / eps,
        ),
        ("sigma_h4", state.sigma.hs_norm(4)),
        ("w_h2", state.w.hs_norm(2)),
        ("dz_w_h2", state.w.derivative(Axis3::Z, 1).hs_norm(2)),
    ])
}

/// D(t): the dissipation functional, one Sobolev index above E.
pub fn functional_d(state: &CfState, derivs: &TimeDerivatives) -> Functional {
    let eps = state.epsilon;
    Functional::from_terms(vec![
        ("v_t_h2", vec2_hs(&derivs.v1_t, &derivs.v2_t, 2)),
        ("eps_w_t_h2", eps * derivs.w_t.hs_norm(2)),
        ("v_h4", vec2_hs(&state.v1, &state.v2, 4)),
        ("eps_w_h4", eps * state.w.hs_norm(4)),
        ("sigma_t_h3", derivs.sigma_t.hs_norm(3)),
        ("grad_h_sigma_h3", grad_h_hs(&state.sigma, 3)),
        (
            "dz_sigma_over_eps_h3",
            state.sigma.derivative(Axis3::Z, 1).hs_norm(3) / eps,
        ),
        ("w_h3", state.w.hs_norm(3)),
        ("dz_w_h3", state.w.derivative(Axis3::Z, 1).hs_norm(3)),
    ])
}

/// E1(t): first-time-derivative energy.
pub fn functional_e1(state: &CfState, derivs: &TimeDerivatives) -> Functional {
    let eps = state.epsilon;
    Functional::from_terms(vec![
        ("v_t_h1", vec2_hs(&derivs.v1_t, &derivs.v2_t, 1)),
        ("eps_w_t_h1", eps * derivs.w_t.hs_norm(1)),
        ("sigma_tt_l2", derivs.sigma_tt.hs_norm(0)),
        ("grad_h_sigma_t_l2", grad_h_hs(&derivs.sigma_t, 0)),
        (
            "dz_sigma_t_over_eps_l2",
            derivs.sigma_t.derivative(Axis3::Z, 1).hs_norm(0) / eps,
        ),
        ("sigma_t_h2", derivs.sigma_t.hs_norm(2)),
        ("w_t_l2", derivs.w_t.hs_norm(0)),
        ("dz_w_t_l2", derivs.w_t.derivative(Axis3::Z, 1).hs_norm(0)),
    ])
}

/// D1(t): first-time-derivative dissipation.
pub fn functional_d1(state: &CfState, derivs: &TimeDerivatives) -> Functional {
    let eps = state.epsilon;
    Functional::from_terms(vec![
        ("v_tt_l2", vec2_hs(&derivs.v1_tt, &derivs.v2_tt, 0)),
        ("eps_w_tt_l2", eps * derivs.w_tt.hs_norm(0)),
        ("v_t_h2", vec2_hs(&derivs.v1_t, &derivs.v2_t, 2)),
        ("eps_w_t_h2", eps * derivs.w_t.hs_norm(2)),
        ("sigma_tt_h1", derivs.sigma_tt.hs_norm(1)),
        ("grad_h_sigma_t_h1", grad_h_hs(&derivs.sigma_t, 1)),
        (
            "dz_sigma_t_over_eps_h1",
            derivs.sigma_t.derivative(Axis3::Z, 1).hs_norm(1) / eps,
        ),
        ("w_t_h1", derivs.w_t.hs_norm(1)),
        ("dz_w_t_h1", derivs.w_t.derivative(Axis3::Z, 1).hs_norm(1)),
    ])
}

/// Difference norms between paired compressible and hydrostatic states.
#[derive(Debug, Clone)]
pub struct DeltaNorms {
    pub delta_sigma_l2: f64,
    pub delta_v_l2: f64,
    pub delta_v_h1: f64,
    pub delta_w_l2: f64,
    /// ||d_z sigma||_{H^2}; equals ||d_z (sigma - sigma_p)||_{H^2} since the
    /// hydrostatic density has no vertical structure.
    pub dz_sigma_h2: f64,
    /// ||d_z d_t sigma||_{L^2}.
    pub dz_dt_sigma_l2: f64,
    pub avg_delta_sigma_l2: f64,
    pub fluct_delta_sigma_l2: f64,
}

/// Compute the difference norms; the states must live on the same grid and
/// agree in time within `time_tol`.
pub fn delta_norms(
    cf: &CfState,
    derivs: &TimeDerivatives,
    cpe: &CpeState,
    time_tol: f64,
) -> Result<DeltaNorms, CoreError> {
    if cf.grid() != cpe.grid() {
        return Err(CoreError::GridMismatch);
    }
    let separation = (cf.time - cpe.time).abs();
    if separation > time_tol {
        return Err(CoreError::TimeMismatch {
            separation,
            tolerance: time_tol,
        });
    }
    let grid = cf.grid();
    let delta_sigma = &cf.sigma - &cpe.sigma_p.embed(grid);
    let delta_v1 = &cf.v1 - &cpe.vp1;
    let delta_v2 = &cf.v2 - &cpe.vp2;
    let delta_w = &cf.w - &cpe.wp;

    let avg = delta_sigma.vertical_average()?;
    let fluct = delta_sigma.vertical_fluctuation()?;

    Ok(DeltaNorms {
        delta_sigma_l2: delta_sigma.hs_norm(0),
        delta_v_l2: vec2_hs(&delta_v1, &delta_v2, 0),
        delta_v_h1: vec2_hs(&delta_v1, &delta_v2, 1),
        delta_w_l2: delta_w.hs_norm(0),
        dz_sigma_h2: cf.sigma.derivative(Axis3::Z, 1).hs_norm(2),
        dz_dt_sigma_l2: derivs.sigma_t.derivative(Axis3::Z, 1).hs_norm(0),
        avg_delta_sigma_l2: avg.hs_norm(0),
        fluct_delta_sigma_l2: fluct.hs_norm(0),
    })
}

/// One diagnostics sample: the four functionals plus the difference norms.
#[derive(Debug, Clone)]
pub struct DiagnosticsRecord {
    pub time: f64,
    pub e: f64,
    pub d: f64,
    pub e1: f64,
    pub d1: f64,
    pub delta_sigma_l2: f64,
    pub delta_v_l2: f64,
    pub delta_v_h1: f64,
    pub delta_w_l2: f64,
    pub dz_sigma_h2: f64,
    pub dz_dt_sigma_l2: f64,
    pub avg_delta_sigma_l2: f64,
    pub fluct_delta_sigma_l2: f64,
}

pub fn record(
    cf: &CfState,
    derivs: &TimeDerivatives,
    cpe: &CpeState,
    time_tol: f64,
) -> Result<DiagnosticsRecord, CoreError> {
    let delta = delta_norms(cf, derivs, cpe, time_tol)?;
    Ok(DiagnosticsRecord {
        time: cf.time,
        e: functional_e(cf, derivs).total,
        d: functional_d(cf, derivs).total,
        e1: functional_e1(cf, derivs).total,
        d1: functional_d1(cf, derivs).total,
        delta_sigma_l2: delta.delta_sigma_l2,
        delta_v_l2: delta.delta_v_l2,
        delta_v_h1: delta.delta_v_h1,
        delta_w_l2: delta.delta_w_l2,
        dz_sigma_h2: delta.dz_sigma_h2,
        dz_dt_sigma_l2: delta.dz_dt_sigma_l2,
        avg_delta_sigma_l2: delta.avg_delta_sigma_l2,
        fluct_delta_sigma_l2: delta.fluct_delta_sigma_l2,
    })
}

/// Least-squares fit of log(err) against log(eps).
#[derive(Debug, Clone)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// Largest absolute residual of the fit in log space.
    pub max_residual: f64,
    pub points_used: usize,
    /// Indices of points excluded because their error was exactly zero.
    pub excluded: Vec<usize>,
}

pub fn fit_rate(points: &[(f64, f64)]) -> Result<RateFit, CoreError> {
    let mut excluded = Vec::new();
    let mut logs: Vec<(f64, f64)> = Vec::new();
    for (i, &(eps, err)) in points.iter().enumerate() {
        assert!(eps > 0.0, "rate fit needs positive eps");
        if err == 0.0 {
            excluded.push(i);
        } else {
            logs.push((eps.ln(), err.ln()));
        }
    }
    let mut eps_seen: Vec<f64> = logs.iter().map(|&(x, _)| x).collect();
    eps_seen.sort_by(|a, b| a.partial_cmp(b).unwrap());
    eps_seen.dedup();
    if eps_seen.len() < 3 {
        return Err(CoreError::TooFewPoints(eps_seen.len()));
    }

    let n = logs.len() as f64;
    let sx: f64 = logs.iter().map(|&(x, _)| x).sum();
    let sy: f64 = logs.iter().map(|&(_, y)| y).sum();
    let sxx: f64 = logs.iter().map(|&(x, _)| x * x).sum();
    let sxy: f64 = logs.iter().map(|&(x, y)| x * y).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    let max_residual = logs
        .iter()
        .map(|&(x, y)| (y - (intercept + slope * x)).abs())
        .fold(0.0f64, f64::max);
    Ok(RateFit {
        slope,
        intercept,
        max_residual,
        points_used: logs.len(),
        excluded,
    })
}
