//! Runtime self-checks behind the `oracle` and `check` subcommands: quick,
//! deterministic verifications of the linear oracle and the structural
//! solver invariants, printed one line per check.

use hydrolim_core::spectral::{Axis3, Grid, Parity, SpectralField};
use hydrolim_core::testing::{random_band_limited, random_cf_state};
use hydrolim_core::{
    default_cpe_initial, fit_rate, make_well_prepared_ic, mixed_wave_residual, reconstruct_w,
    step, step_cpe, time_derivatives, uniform_bound_check, vertical_block_eigenvalues, CfState,
    LinearModeSystem, Scheme, StepperConfig,
};
use num_complex::Complex64;
use std::f64::consts::PI;

pub struct CheckReport {
    pub lines: Vec<String>,
    pub ok: bool,
}

impl CheckReport {
    fn new() -> CheckReport {
        CheckReport {
            lines: Vec::new(),
            ok: true,
        }
    }

    fn check(&mut self, name: &str, passed: bool, detail: String) {
        if passed {
            self.lines.push(format!("ok    {name} ({detail})"));
        } else {
            self.ok = false;
            self.lines.push(format!("FAIL  {name}: {detail}"));
        }
    }
}

/// Eigenvalue table of the vertical acoustic block plus oracle self-tests.
pub fn oracle_report() -> CheckReport {
    let mut report = CheckReport::new();
    report
        .lines
        .push("vertical-block eigenvalues (mode m, aspect ratio eps):".into());
    report.lines.push(format!(
        "{:>4} {:>6} {:>32} {:>32}",
        "m", "eps", "lambda+", "lambda-"
    ));
    for &eps in &[0.2, 0.1, 0.05] {
        for m in 1..=3 {
            let (lp, lm) = vertical_block_eigenvalues(m, eps);
            report.lines.push(format!(
                "{m:>4} {eps:>6} {:>15.6} {:+.6}i {:>15.6} {:+.6}i",
                lp.re, lp.im, lm.re, lm.im
            ));
        }
    }

    // quadratic-formula agreement for the acceptance mode
    let (lp, _) = vertical_block_eigenvalues(1, 0.1);
    let expect = Complex64::new(-PI * PI / 2.0, PI / 2.0 * (400.0 - PI * PI).sqrt());
    report.check(
        "vertical block eigenvalues match the quadratic formula",
        (lp - expect).norm() <= 1e-10,
        format!("|diff| = {:.3e}", (lp - expect).norm()),
    );

    // eigen residuals across a sample of modes
    let mut worst = 0.0f64;
    for k in [[0, 0, 1], [1, 0, 0], [2, 1, 3], [0, 2, 2]] {
        for eps in [0.2, 0.05] {
            let sys = LinearModeSystem::new(k, eps);
            let eig = sys.eigen();
            for j in 0..4 {
                let mv = sys.apply(eig.vectors[j]);
                let mut r = 0.0;
                for i in 0..4 {
                    r += (mv[i] - eig.values[j] * eig.vectors[j][i]).norm_sqr();
                }
                worst = worst.max(r.sqrt());
            }
        }
    }
    report.check(
        "eigen residuals ||m v - lambda v||",
        worst <= 1e-12,
        format!("worst = {worst:.3e}"),
    );

    // semigroup property of the exact propagator
    let sys = LinearModeSystem::new([1, -1, 2], 0.08);
    let init = [
        Complex64::new(0.4, 0.1),
        Complex64::new(-0.3, 0.2),
        Complex64::new(0.1, -0.5),
        Complex64::new(0.7, 0.3),
    ];
    let (direct, _) = sys.evolve_exact(init, 0.4);
    let (half, _) = sys.evolve_exact(init, 0.25);
    let (composed, _) = sys.evolve_exact(half, 0.15);
    let semigroup_err: f64 = (0..4)
        .map(|j| (direct[j] - composed[j]).norm_sqr())
        .sum::<f64>()
        .sqrt();
    report.check(
        "semigroup property of the exact evolution",
        semigroup_err <= 1e-12,
        format!("|diff| = {semigroup_err:.3e}"),
    );

    // uniform-bound narrative: density-seeded data has bounded scaled energy
    // while psi_z alone blows up like 1/eps; velocity-seeded data keeps
    // d_t eta bounded
    let eps_list = [0.2, 0.1, 0.05];
    let t_grid: Vec<f64> = (0..3000).map(|i| i as f64 * 5e-4).collect();
    let eta_seed = [Complex64::ONE, Complex64::ZERO, Complex64::ZERO, Complex64::ZERO];
    let r = uniform_bound_check([0, 0, 1], eta_seed, &eps_list, &t_grid, 2.0);
    report.check(
        "density-seeded mode: scaled energy uniform, psi_z not",
        r.scaled_energy_uniform && !r.psi_z_uniform,
        format!(
            "sup|psi_z| = {:?}, eps*sup|psi_z| = {:?}",
            r.sup_psi_z
                .iter()
                .map(|v| format!("{v:.2}"))
                .collect::<Vec<_>>(),
            r.sup_eps_psi_z
                .iter()
                .map(|v| format!("{v:.3}"))
                .collect::<Vec<_>>()
        ),
    );
    let psi_seed = [Complex64::ZERO, Complex64::ZERO, Complex64::ZERO, Complex64::ONE];
    let r = uniform_bound_check([0, 0, 1], psi_seed, &eps_list, &t_grid, 2.0);
    report.check(
        "velocity-seeded mode: d_t eta uniform in eps",
        r.eta_t_uniform,
        format!(
            "sup|d_t eta| = {:?}",
            r.sup_eta_t
                .iter()
                .map(|v| format!("{v:.3}"))
                .collect::<Vec<_>>()
        ),
    );
    report
}

/// Structural invariant suite at small scale.
pub fn invariant_suite() -> CheckReport {
    let mut report = CheckReport::new();
    let grid = Grid::cube(16).expect("valid grid");

    // transforms: round trip and Parseval
    let f = random_band_limited(grid, 5, Parity::None, 1.3, 41);
    let back = SpectralField::from_physical(grid, &f.to_physical()).unwrap();
    let rt = (&back - &f).l2_norm() / f.l2_norm();
    report.check("transform round trip", rt <= 1e-13, format!("rel = {rt:.3e}"));

    let phys = f.to_physical();
    let quad: f64 = phys.iter().map(|v| v * v).sum::<f64>() * grid.cell_volume();
    let parseval = (f.l2_norm().powi(2) - quad).abs() / quad;
    report.check("Parseval vs quadrature", parseval <= 1e-12, format!("rel = {parseval:.3e}"));

    // parity split and dealias projection
    let even = f.project_parity(Parity::EvenZ);
    let odd = f.project_parity(Parity::OddZ);
    let split = (&(&even + &odd) - &f).l2_norm();
    report.check("parity split is exact", split <= 1e-14, format!("|diff| = {split:.3e}"));
    let da = f.dealias();
    let idem = (&da.dealias() - &da).l2_norm();
    report.check("dealias is idempotent", idem == 0.0, format!("|diff| = {idem:.3e}"));

    // vertical integral inverts the derivative
    let prim = f.vertical_integral();
    let inv = (&prim.derivative_z() - &f).l2_norm() / f.l2_norm();
    report.check(
        "vertical integral inverts d_z",
        inv <= 1e-11,
        format!("rel = {inv:.3e}"),
    );

    // constant state is an equilibrium of the compressible stepper
    let mut state = CfState::zeros(grid, 0.1).unwrap();
    state.sigma.set_mode_pair(0, 0, 0, Complex64::new(0.5, 0.0));
    let cfg = StepperConfig::new(1e-3, Scheme::Cnab2);
    let (next, _) = step(&state, &cfg, None).unwrap();
    let eq = (&next.sigma - &state.sigma).l2_norm() + next.v1.l2_norm() + next.w.l2_norm();
    report.check("constant state is an equilibrium", eq <= 1e-13, format!("|drift| = {eq:.3e}"));

    // short trajectory: parity, mass, reconstruction consistency
    let cpe0 = default_cpe_initial(grid).unwrap();
    let ic = make_well_prepared_ic(&cpe0, 0.1, 1.0).unwrap();
    let mass = |s: &CfState| -> f64 {
        s.sigma.to_physical().iter().map(|v| v.exp()).sum::<f64>() * grid.cell_volume()
    };
    let mass0 = mass(&ic);
    let cfg = StepperConfig::new(1e-4, Scheme::Cnab2);
    let mut s = ic;
    let mut prev = None;
    for _ in 0..20 {
        let (n, r) = step(&s, &cfg, prev.as_ref()).unwrap();
        s = n;
        prev = Some(r);
    }
    let leak = s.sigma.project_parity(Parity::OddZ).l2_norm() / s.sigma.l2_norm();
    report.check("parity preserved over 20 steps", leak <= 1e-12, format!("rel = {leak:.3e}"));
    let drift = (mass(&s) - mass0).abs() / mass0;
    report.check("mass conserved over 20 steps", drift <= 1e-8, format!("rel = {drift:.3e}"));

    let d = time_derivatives(&s);
    let rec = reconstruct_w(&s.sigma, &d.sigma_t, &s.v1, &s.v2, true);
    let wrel = (&rec.field - &s.w).l2_norm() / s.w.l2_norm();
    report.check(
        "w reconstruction tracks prognostic w",
        rec.is_consistent(1e-6) && wrel <= 10.0 * cfg.dt,
        format!("rel = {wrel:.3e}, defect = {:.3e}", rec.mean_defect),
    );

    // wave identity residual on band-limited random states
    let mut worst = 0.0f64;
    for seed in 0..3 {
        let state = random_cf_state(grid, 2, 0.5, 0.1, 500 + seed);
        worst = worst.max(mixed_wave_residual(&state).relative());
    }
    report.check(
        "mixed wave identity residual",
        worst <= 1e-10,
        format!("worst rel = {worst:.3e}"),
    );

    // hydrostatic side: wall condition along a short run
    let cfg = StepperConfig::new(1e-3, Scheme::Cnab2);
    let mut cpe = default_cpe_initial(grid).unwrap();
    let mut prev = None;
    let mut wall = 0.0f64;
    for _ in 0..10 {
        let (n, r) = step_cpe(&cpe, &cfg, prev.as_ref(), None).unwrap();
        cpe = n;
        prev = Some(r);
        let phys = cpe.wp.to_physical();
        for ix in 0..grid.nx {
            for iy in 0..grid.ny {
                wall = wall.max(phys[[ix, iy, 0]].abs());
                wall = wall.max(phys[[ix, iy, grid.nz / 2]].abs());
            }
        }
    }
    report.check("w_p vanishes on the walls", wall <= 1e-12, format!("max = {wall:.3e}"));

    // z-derivative of sigma on sigma_p is structurally zero
    let embedded = cpe.sigma_p.embed(grid);
    let dz = embedded.derivative(Axis3::Z, 1).l2_norm();
    report.check("sigma_p has no vertical structure", dz == 0.0, format!("|dz| = {dz:.3e}"));

    // rate fitting recovers a planted exponent
    let pts: Vec<(f64, f64)> = [0.2, 0.1, 0.05, 0.025]
        .iter()
        .map(|&e: &f64| (e, 1.7 * e.powf(0.75)))
        .collect();
    let fit = fit_rate(&pts).unwrap();
    report.check(
        "rate fit recovers a planted exponent",
        (fit.slope - 0.75).abs() <= 1e-12,
        format!("slope = {:.12}", fit.slope),
    );

    report
}
