//! Hydrostatic solver checks: manufactured-solution temporal order, the
//! structural wall condition on w_p, and agreement with an independent 2-D
//! reference integrator for z-independent data.

use hydrolim_core::spectral::{Grid, HorizontalField, Parity, SpectralField};
use hydrolim_core::{step_cpe, CpeForcingTerms, CpeState, Scheme, StepperConfig};
use ndarray::Array2;
use std::f64::consts::PI;

/// Manufactured solution sigma_p = e^{-t} cos(pi x), v_p = 0. Substituting
/// into the equations gives the forcing
///   F_sigma = -e^{-t} cos(pi x),   F_v = grad_h sigma_p.
fn manufactured_error(dt: f64, t_final: f64, grid: Grid) -> f64 {
    let (nx, ny) = (grid.nx, grid.ny);
    let sigma0 = HorizontalField::from_fn(nx, ny, |x, _| (PI * x).cos());
    let state = CpeState::new(
        sigma0,
        SpectralField::zeros(grid, Parity::EvenZ),
        SpectralField::zeros(grid, Parity::EvenZ),
        0.0,
    )
    .unwrap();

    let forcing = move |t: f64| -> CpeForcingTerms {
        let decay = (-t).exp();
        CpeForcingTerms {
            sigma: HorizontalField::from_fn(nx, ny, move |x, _| -decay * (PI * x).cos()),
            v1: SpectralField::from_fn(grid, Parity::EvenZ, move |x, _, _| {
                -PI * decay * (PI * x).sin()
            }),
            v2: SpectralField::zeros(grid, Parity::EvenZ),
        }
    };

    let cfg = StepperConfig::new(dt, Scheme::Cnab2);
    let steps = (t_final / dt).round() as usize;
    let mut s = state;
    let mut prev = None;
    for _ in 0..steps {
        let (next, rhs) = step_cpe(&s, &cfg, prev.as_ref(), Some(&forcing)).unwrap();
        s = next;
        prev = Some(rhs);
    }
    let t = dt * steps as f64;
    let exact = HorizontalField::from_fn(nx, ny, |x, _| (-t).exp() * (PI * x).cos());
    let diff = (&s.sigma_p - &exact)
        .coeffs()
        .iter()
        .map(|c| c.norm_sqr())
        .sum::<f64>()
        .sqrt();
    let vnorm = s.vp1.l2_norm().hypot(s.vp2.l2_norm());
    diff + vnorm
}

#[test]
fn manufactured_solution_shows_second_order() {
    let grid = Grid::cube(8).unwrap();
    let errs: Vec<f64> = [1e-2, 5e-3, 2.5e-3]
        .iter()
        .map(|&dt| manufactured_error(dt, 0.5, grid))
        .collect();
    let order1 = (errs[0] / errs[1]).log2();
    let order2 = (errs[1] / errs[2]).log2();
    assert!(
        order1 >= 1.8 && order2 >= 1.8,
        "orders {order1:.3}/{order2:.3}, errors {errs:?}"
    );
}

#[test]
fn wall_condition_holds_at_every_step() {
    let grid = Grid::cube(16).unwrap();
    let state = hydrolim_core::default_cpe_initial(grid).unwrap();
    let cfg = StepperConfig::new(1e-3, Scheme::Cnab2);
    let mut s = state;
    let mut prev = None;
    for _ in 0..50 {
        let (next, rhs) = step_cpe(&s, &cfg, prev.as_ref(), None).unwrap();
        s = next;
        prev = Some(rhs);
        let phys = s.wp.to_physical();
        let mut worst = 0.0f64;
        for ix in 0..grid.nx {
            for iy in 0..grid.ny {
                worst = worst.max(phys[[ix, iy, 0]].abs());
                worst = worst.max(phys[[ix, iy, grid.nz / 2]].abs());
            }
        }
        assert!(worst <= 1e-12, "w_p wall value {worst:.3e} at t={}", s.time);
    }
}

/// Independent reference: classical RK4 on the 2-D compressible system
///   d_t sigma + v.grad sigma + div v = 0
///   d_t v + v.grad v + grad sigma = lap v
/// using the same spectral representation but none of the solver code.
struct Rk2d {
    sigma: HorizontalField,
    v1: HorizontalField,
    v2: HorizontalField,
}

impl Rk2d {
    fn rhs(&self) -> (HorizontalField, HorizontalField, HorizontalField) {
        use hydrolim_core::spectral::AxisH;
        let adv = |f: &HorizontalField| {
            let fx = f.derivative(AxisH::X, 1);
            let fy = f.derivative(AxisH::Y, 1);
            let mut a = self.v1.multiply(&fx, true);
            a.add_scaled(&self.v2.multiply(&fy, true), 1.0);
            a
        };
        let lap = |f: &HorizontalField| {
            let mut l = f.derivative(AxisH::X, 2);
            l.add_scaled(&f.derivative(AxisH::Y, 2), 1.0);
            l
        };
        let mut ds = adv(&self.sigma).scaled(-1.0);
        ds.add_scaled(&self.v1.derivative(AxisH::X, 1), -1.0);
        ds.add_scaled(&self.v2.derivative(AxisH::Y, 1), -1.0);
        let mut d1 = adv(&self.v1).scaled(-1.0);
        d1.add_scaled(&self.sigma.derivative(AxisH::X, 1), -1.0);
        d1.add_scaled(&lap(&self.v1), 1.0);
        let mut d2 = adv(&self.v2).scaled(-1.0);
        d2.add_scaled(&self.sigma.derivative(AxisH::Y, 1), -1.0);
        d2.add_scaled(&lap(&self.v2), 1.0);
        (ds, d1, d2)
    }

    fn rk4_step(&mut self, dt: f64) {
        let add = |base: &Rk2d, k: &(HorizontalField, HorizontalField, HorizontalField), h: f64| {
            let mut s = Rk2d {
                sigma: base.sigma.clone(),
                v1: base.v1.clone(),
                v2: base.v2.clone(),
            };
            s.sigma.add_scaled(&k.0, h);
            s.v1.add_scaled(&k.1, h);
            s.v2.add_scaled(&k.2, h);
            s
        };
        let k1 = self.rhs();
        let k2 = add(self, &k1, dt / 2.0).rhs();
        let k3 = add(self, &k2, dt / 2.0).rhs();
        let k4 = add(self, &k3, dt).rhs();
        for (k, w) in [(&k1, 1.0), (&k2, 2.0), (&k3, 2.0), (&k4, 1.0)] {
            self.sigma.add_scaled(&k.0, w * dt / 6.0);
            self.v1.add_scaled(&k.1, w * dt / 6.0);
            self.v2.add_scaled(&k.2, w * dt / 6.0);
        }
    }
}

#[test]
fn z_independent_dynamics_matches_a_2d_reference_solver() {
    let grid = Grid::cube(16).unwrap();
    let sigma0 = |x: f64, y: f64| 0.1 * (PI * x).cos() * (PI * y).cos();
    let v10 = |_x: f64, y: f64| 0.1 * (PI * y).cos();
    let v20 = |x: f64, _y: f64| 0.1 * (PI * x).sin();

    let cpe = CpeState::new(
        HorizontalField::from_fn(16, 16, sigma0),
        SpectralField::from_fn(grid, Parity::EvenZ, |x, y, _| v10(x, y)),
        SpectralField::from_fn(grid, Parity::EvenZ, |x, y, _| v20(x, y)),
        0.0,
    )
    .unwrap();

    let dt = 2e-4_f64;
    let t_final = 0.05_f64;
    let steps = (t_final / dt).round() as usize;

    let cfg = StepperConfig::new(dt, Scheme::Cnab2);
    let mut s = cpe;
    let mut prev = None;
    for _ in 0..steps {
        let (next, rhs) = step_cpe(&s, &cfg, prev.as_ref(), None).unwrap();
        s = next;
        prev = Some(rhs);
    }

    let mut reference = Rk2d {
        sigma: HorizontalField::from_fn(16, 16, sigma0),
        v1: HorizontalField::from_fn(16, 16, v10),
        v2: HorizontalField::from_fn(16, 16, v20),
    };
    for _ in 0..steps {
        reference.rk4_step(dt);
    }

    let norm2 = |f: &Array2<num_complex::Complex64>| -> f64 {
        f.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    };
    let sig_err = norm2((&s.sigma_p - &reference.sigma).coeffs());
    let v_err = norm2((&HorizontalField::from_level_zero(&s.vp1) - &reference.v1).coeffs());
    let scale = norm2(reference.sigma.coeffs());
    assert!(sig_err / scale < 5e-6, "sigma mismatch {:.3e}", sig_err / scale);
    assert!(v_err / scale < 5e-6, "velocity mismatch {:.3e}", v_err / scale);
}
