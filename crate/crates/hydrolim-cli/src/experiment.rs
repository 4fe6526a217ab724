//! Experiment orchestration: paired sweeps of the compressible system over a
//! list of aspect ratios against one hydrostatic reference trajectory, with
//! per-step diagnostics, time-aggregated norms, and fitted convergence rates.

use crate::config::{ExperimentConfig, IcKind};
use crate::error::HarnessError;
use crate::output;
use hydrolim_core::{
    default_cpe_initial, fit_rate, make_ill_prepared_ic, make_well_prepared_ic, step, step_cpe,
    time_derivatives, DiagnosticsRecord, StepperConfig,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    /// Worker threads for the eps sweep; 0 picks the rayon default.
    pub threads: usize,
    pub quiet: bool,
}

/// Aggregates of one diagnostics series. Suprema are over record times;
/// time integrals use the trapezoid rule on the recorded samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub sup_e: f64,
    pub int_d_sq: f64,
    pub sup_delta_sigma_l2: f64,
    pub sup_delta_v_l2: f64,
    /// sup over time of (delta sigma + delta v) in L^2, the quantity the
    /// first rate claim is about.
    pub sup_delta_sigma_v_l2: f64,
    pub sup_delta_w_l2: f64,
    pub l2t_delta_v_h1: f64,
    pub l2t_delta_w_l2: f64,
    pub sup_dz_sigma_h2: f64,
}

pub fn aggregate(records: &[DiagnosticsRecord]) -> Aggregates {
    let sup = |f: &dyn Fn(&DiagnosticsRecord) -> f64| {
        records.iter().map(|r| f(r)).fold(0.0f64, f64::max)
    };
    let l2t = |f: &dyn Fn(&DiagnosticsRecord) -> f64| {
        let mut acc = 0.0;
        for pair in records.windows(2) {
            let dt = pair[1].time - pair[0].time;
            acc += 0.5 * dt * (f(&pair[0]).powi(2) + f(&pair[1]).powi(2));
        }
        acc.sqrt()
    };
    Aggregates {
        sup_e: sup(&|r| r.e),
        int_d_sq: l2t(&|r| r.d).powi(2),
        sup_delta_sigma_l2: sup(&|r| r.delta_sigma_l2),
        sup_delta_v_l2: sup(&|r| r.delta_v_l2),
        sup_delta_sigma_v_l2: sup(&|r| r.delta_sigma_l2 + r.delta_v_l2),
        sup_delta_w_l2: sup(&|r| r.delta_w_l2),
        l2t_delta_v_h1: l2t(&|r| r.delta_v_h1),
        l2t_delta_w_l2: l2t(&|r| r.delta_w_l2),
        sup_dz_sigma_h2: sup(&|r| r.dz_sigma_h2),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpsRunSummary {
    pub eps: f64,
    pub csv: String,
    pub completed: bool,
    pub diverged_at: Option<f64>,
    #[serde(flatten)]
    pub aggregates: Aggregates,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NamedRate {
    pub name: String,
    /// Guaranteed asymptotic exponent the measurement is compared against.
    pub target: f64,
    pub slope: f64,
    pub intercept: f64,
    pub max_residual: f64,
    pub points_used: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSummary {
    pub version: u32,
    pub config: ExperimentConfig,
    pub runs: Vec<EpsRunSummary>,
    /// Present only when at least three eps values completed.
    pub rates: Option<Vec<NamedRate>>,
}

pub const SUMMARY_FILE: &str = "summary.json";

/// Rate metrics with their guaranteed exponents: the density/velocity
/// differences converge at rate 1, the vertical velocity at 2/3 (sup in
/// time) and 3/4 (L^2 in time), and the vertical density gradient at 1.
fn rate_metrics() -> [(&'static str, f64, fn(&Aggregates) -> f64); 5] {
    [
        ("delta_sigma_v_linf_l2", 1.0, |a| a.sup_delta_sigma_v_l2),
        ("delta_v_l2h1", 1.0, |a| a.l2t_delta_v_h1),
        ("delta_w_linf_l2", 2.0 / 3.0, |a| a.sup_delta_w_l2),
        ("delta_w_l2l2", 0.75, |a| a.l2t_delta_w_l2),
        ("dz_sigma_linf_h2", 1.0, |a| a.sup_dz_sigma_h2),
    ]
}

pub fn fit_rates(runs: &[EpsRunSummary]) -> Option<Vec<NamedRate>> {
    let completed: Vec<&EpsRunSummary> = runs.iter().filter(|r| r.completed).collect();
    if completed.len() < 3 {
        return None;
    }
    let mut out = Vec::new();
    for (name, target, extract) in rate_metrics() {
        let points: Vec<(f64, f64)> = completed
            .iter()
            .map(|r| (r.eps, extract(&r.aggregates)))
            .collect();
        if let Ok(fit) = fit_rate(&points) {
            out.push(NamedRate {
                name: name.to_string(),
                target,
                slope: fit.slope,
                intercept: fit.intercept,
                max_residual: fit.max_residual,
                points_used: fit.points_used,
            });
        }
    }
    if out.is_empty() {
        None
    } else {
        Some(out)
    }
}

struct EpsOutcome {
    records: Vec<DiagnosticsRecord>,
    diverged_at: Option<f64>,
    wall_seconds: f64,
}

fn run_one_eps(config: &ExperimentConfig, eps: f64) -> Result<EpsOutcome, HarnessError> {
    let start = Instant::now();
    let grid = config.grid();
    let cpe0 = default_cpe_initial(grid)?;
    let mut cf = match config.ic.kind {
        IcKind::WellPrepared => make_well_prepared_ic(&cpe0, eps, config.ic.amplitude)?,
        IcKind::IllPrepared => make_ill_prepared_ic(&cpe0, eps, config.ic.amplitude)?,
    };
    let mut cpe = cpe0;
    let cfg = StepperConfig::new(config.dt, config.scheme.into());
    let steps = config.steps();
    let time_tol = config.dt / 2.0;

    let mut records = Vec::new();
    let derivs = time_derivatives(&cf);
    records.push(hydrolim_core::record(&cf, &derivs, &cpe, time_tol)?);

    let mut prev_cf = None;
    let mut prev_cpe = None;
    let mut diverged_at = None;
    for step_idx in 1..=steps {
        let advanced = step(&cf, &cfg, prev_cf.as_ref()).and_then(|(next_cf, rhs_cf)| {
            step_cpe(&cpe, &cfg, prev_cpe.as_ref(), None)
                .map(|(next_cpe, rhs_cpe)| (next_cf, rhs_cf, next_cpe, rhs_cpe))
        });
        match advanced {
            Ok((next_cf, rhs_cf, next_cpe, rhs_cpe)) => {
                cf = next_cf;
                prev_cf = Some(rhs_cf);
                cpe = next_cpe;
                prev_cpe = Some(rhs_cpe);
            }
            Err(_) => {
                diverged_at = Some(cf.time);
                break;
            }
        }
        if step_idx % config.record_every == 0 || step_idx == steps {
            let derivs = time_derivatives(&cf);
            records.push(hydrolim_core::record(&cf, &derivs, &cpe, time_tol)?);
        }
    }

    Ok(EpsOutcome {
        records,
        diverged_at,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

pub fn csv_name(index: usize) -> String {
    format!("diag_eps{index:02}.csv")
}

/// Run the full sweep: one hydrostatic reference trajectory (recomputed in
/// lockstep with each compressible run so comparisons never interpolate in
/// time), one compressible trajectory per eps, CSV series and a JSON summary
/// with fitted rates. A diverging eps is flagged and the sweep continues.
pub fn run_experiment(
    config: &ExperimentConfig,
    opts: &RunOptions,
) -> Result<RunSummary, HarnessError> {
    config.validate()?;
    std::fs::create_dir_all(&opts.out_dir).map_err(|source| HarnessError::WriteFile {
        path: opts.out_dir.clone(),
        source,
    })?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads)
        .build()
        .map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?;
    let outcomes: Vec<Result<EpsOutcome, HarnessError>> = pool.install(|| {
        config
            .eps_list
            .par_iter()
            .map(|&eps| {
                let out = run_one_eps(config, eps);
                if !opts.quiet {
                    match &out {
                        Ok(o) => eprintln!(
                            "eps = {eps}: {} records, wall {:.1}s{}",
                            o.records.len(),
                            o.wall_seconds,
                            o.diverged_at
                                .map(|t| format!(", DIVERGED at t = {t:.4}"))
                                .unwrap_or_default()
                        ),
                        Err(e) => eprintln!("eps = {eps}: error: {e}"),
                    }
                }
                out
            })
            .collect()
    });

    let mut runs = Vec::new();
    for (i, (&eps, outcome)) in config.eps_list.iter().zip(outcomes).enumerate() {
        let outcome = outcome?;
        let csv = csv_name(i);
        output::write_csv(&outcome.records, &opts.out_dir.join(&csv))?;
        runs.push(EpsRunSummary {
            eps,
            csv,
            completed: outcome.diverged_at.is_none(),
            diverged_at: outcome.diverged_at,
            aggregates: aggregate(&outcome.records),
            wall_seconds: outcome.wall_seconds,
        });
    }

    let rates = fit_rates(&runs);
    let summary = RunSummary {
        version: 1,
        config: config.clone(),
        runs,
        rates,
    };
    output::write_json(&summary, &opts.out_dir.join(SUMMARY_FILE))?;
    Ok(summary)
}

pub fn load_summary(dir: &Path) -> Result<RunSummary, HarnessError> {
    let path = dir.join(SUMMARY_FILE);
    let text = std::fs::read_to_string(&path).map_err(|source| HarnessError::ReadFile {
        path: path.clone(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| HarnessError::Json {
        path,
        message: e.to_string(),
    })
}

/// Recompute every aggregate from the stored CSV series and require
/// agreement with the summary to 1e-12 relative; returns the table of rates
/// rebuilt from the recomputed aggregates.
pub fn verify_summary_against_csv(dir: &Path) -> Result<RunSummary, HarnessError> {
    let summary = load_summary(dir)?;
    let mut recomputed_runs = Vec::new();
    for run in &summary.runs {
        let records = output::read_csv(&dir.join(&run.csv))?;
        let agg = aggregate(&records);
        let pairs: [(&'static str, f64, f64); 9] = [
            ("sup_e", run.aggregates.sup_e, agg.sup_e),
            ("int_d_sq", run.aggregates.int_d_sq, agg.int_d_sq),
            (
                "sup_delta_sigma_l2",
                run.aggregates.sup_delta_sigma_l2,
                agg.sup_delta_sigma_l2,
            ),
            (
                "sup_delta_v_l2",
                run.aggregates.sup_delta_v_l2,
                agg.sup_delta_v_l2,
            ),
            (
                "sup_delta_sigma_v_l2",
                run.aggregates.sup_delta_sigma_v_l2,
                agg.sup_delta_sigma_v_l2,
            ),
            (
                "sup_delta_w_l2",
                run.aggregates.sup_delta_w_l2,
                agg.sup_delta_w_l2,
            ),
            (
                "l2t_delta_v_h1",
                run.aggregates.l2t_delta_v_h1,
                agg.l2t_delta_v_h1,
            ),
            (
                "l2t_delta_w_l2",
                run.aggregates.l2t_delta_w_l2,
                agg.l2t_delta_w_l2,
            ),
            (
                "sup_dz_sigma_h2",
                run.aggregates.sup_dz_sigma_h2,
                agg.sup_dz_sigma_h2,
            ),
        ];
        for (field, from_summary, from_csv) in pairs {
            let scale = from_summary.abs().max(from_csv.abs()).max(1.0);
            if (from_summary - from_csv).abs() > 1e-12 * scale {
                return Err(HarnessError::SummaryMismatch {
                    field,
                    eps: run.eps,
                    summary: from_summary,
                    recomputed: from_csv,
                });
            }
        }
        let mut run = run.clone();
        run.aggregates = agg;
        recomputed_runs.push(run);
    }
    let rates = fit_rates(&recomputed_runs);
    Ok(RunSummary {
        version: summary.version,
        config: summary.config,
        runs: recomputed_runs,
        rates,
    })
}

/// Printable rate table.
pub fn format_rate_table(summary: &RunSummary) -> String {
    let mut out = String::new();
    out.push_str("metric                      target   slope    intercept  max_resid  points\n");
    match &summary.rates {
        Some(rates) => {
            for r in rates {
                out.push_str(&format!(
                    "{:<26} {:>7.4} {:>8.4} {:>10.4} {:>10.3e} {:>7}\n",
                    r.name, r.target, r.slope, r.intercept, r.max_residual, r.points_used
                ));
            }
        }
        None => out.push_str("(rates withheld: fewer than three completed eps runs)\n"),
    }
    out
}
