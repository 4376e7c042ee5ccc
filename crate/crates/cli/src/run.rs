//! Experiment orchestration: build the problem from a config, run the
//! requested pipeline, write CSV/JSON reports, and check every reported
//! distance against its a-priori bounds.

use crate::config::{Mode, RunConfig};
use crate::expr::{eval_expression, to_polynomial};
use num_complex::Complex64;
use picard_core::bench::{rate_report_csv, RateRow};
use picard_core::complex::{ComplexIVProblem, ComplexReference, ComplexSolveOptions};
use picard_core::real::{Backend, IVProblem, Reference, Rhs, SolveOptions};
use picard_core::report::ConvergenceReport;
use picard_core::series::{Monomial, PolyMap};
use std::path::Path;
use std::sync::Arc;

/// Failure classes mapped to process exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Exit 1: the configuration is invalid.
    Config(String),
    /// Exit 2: a solver failed at runtime.
    Solver(String),
    /// Exit 3: an observed distance exceeded its a-priori bound.
    BoundViolation(String),
    /// Exit 2: filesystem trouble around reports.
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Solver(_) | CliError::Io(_) => 2,
            CliError::BoundViolation(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Solver(m) => write!(f, "solver error: {m}"),
            CliError::BoundViolation(m) => write!(f, "bound violation: {m}"),
            CliError::Io(m) => write!(f, "io error: {m}"),
        }
    }
}

impl From<crate::config::ConfigError> for CliError {
    fn from(e: crate::config::ConfigError) -> Self {
        CliError::Config(e.0)
    }
}

/// Test hooks threaded through from hidden CLI flags.
#[derive(Debug, Clone, Copy)]
pub struct Hooks {
    /// Multiplies the contraction factors; anything other than 1 corrupts
    /// the bound bookkeeping on purpose so the violation detector can be
    /// exercised end to end.
    pub kappa_scale: f64,
}

impl Default for Hooks {
    fn default() -> Self {
        Hooks { kappa_scale: 1.0 }
    }
}

fn build_real_problem(config: &RunConfig) -> Result<(IVProblem, bool), CliError> {
    let p = &config.problem;
    let dim = p.y0.len();
    let rhs = if let Some(poly) = &p.rhs_poly {
        let components = poly
            .iter()
            .map(|monos| {
                monos
                    .iter()
                    .map(|m| {
                        let c = m.coeff.to_complex();
                        if c.im != 0.0 {
                            return Err(CliError::Config(
                                "real modes need real monomial coefficients".into(),
                            ));
                        }
                        Ok(Monomial {
                            coeff: c.re,
                            t_pow: m.t_pow,
                            y_pows: m.y_pows.clone(),
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Rhs::Poly(PolyMap::new(dim, components))
    } else {
        let exprs = config.parse_rhs()?;
        match to_polynomial(&exprs, dim) {
            Some(map) => Rhs::Poly(map),
            None => {
                let exprs = Arc::new(exprs);
                Rhs::Func(Arc::new(move |t: f64, y: &[f64]| {
                    exprs
                        .iter()
                        .map(|e| eval_expression(e, t, y).unwrap_or(f64::NAN))
                        .collect()
                }))
            }
        }
    };

    let norm = p.norm.to_kind();
    let (lipschitz, field_bound) = match (p.lipschitz, p.field_bound) {
        (Some(l), Some(m)) => (l, m),
        (l, m) => {
            let (l_est, m_est) =
                IVProblem::estimate_constants(p.t0, &p.y0, p.a, p.b, &rhs, norm, 48)
                    .map_err(|e| CliError::Solver(e.to_string()))?;
            (l.unwrap_or(l_est), m.unwrap_or(m_est))
        }
    };

    let problem = match p.alpha {
        Some(alpha) => IVProblem::with_declared_alpha(
            p.t0,
            p.y0.clone(),
            p.a,
            p.b,
            rhs,
            lipschitz,
            field_bound,
            alpha,
            norm,
        ),
        None => IVProblem::new(
            p.t0,
            p.y0.clone(),
            p.a,
            p.b,
            rhs,
            lipschitz,
            field_bound,
            norm,
        ),
    }
    .map_err(|e| CliError::Config(e.to_string()))?;
    let is_poly = matches!(problem.rhs, Rhs::Poly(_));
    Ok((problem, is_poly))
}

fn build_complex_problem(config: &RunConfig) -> Result<ComplexIVProblem, CliError> {
    let p = &config.problem;
    let dim = p.y0.len();
    let poly = p.rhs_poly.as_ref().expect("validated");
    let components = poly
        .iter()
        .map(|monos| {
            monos
                .iter()
                .map(|m| Monomial {
                    coeff: m.coeff.to_complex(),
                    t_pow: m.t_pow,
                    y_pows: m.y_pows.clone(),
                })
                .collect::<Vec<_>>()
        })
        .collect::<Vec<_>>();
    let rhs = PolyMap::new(dim, components);

    let t0 = Complex64::new(p.t0, p.t0_im);
    let zeros = vec![0.0; dim];
    let z0: Vec<Complex64> =
        p.y0.iter()
            .zip(p.y0_im.as_deref().unwrap_or(&zeros))
            .map(|(re, im)| Complex64::new(*re, *im))
            .collect();
    let lipschitz = p
        .lipschitz
        .ok_or_else(|| CliError::Config("complex mode requires problem.L".into()))?;
    let field_bound = p
        .field_bound
        .ok_or_else(|| CliError::Config("complex mode requires problem.M".into()))?;

    match p.alpha {
        Some(alpha) => ComplexIVProblem::with_declared_alpha(
            t0,
            z0,
            p.a,
            p.b,
            rhs,
            lipschitz,
            field_bound,
            alpha,
        ),
        None => ComplexIVProblem::new(t0, z0, p.a, p.b, rhs, lipschitz, field_bound),
    }
    .map_err(|e| CliError::Config(e.to_string()))
}

/// Stable 17-significant-digit float formatting shared by every report.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn convergence_csv(report: &ConvergenceReport) -> String {
    let mut out = String::from("n,observed,factorial_bound,geometric_bound,euler_matched\n");
    for row in &report.rows {
        out.push_str(&format!(
            "{},{},{},{},\n",
            row.n,
            fmt_float(row.observed),
            fmt_float(row.factorial_bound),
            row.geometric_bound.map(fmt_float).unwrap_or_default(),
        ));
    }
    out
}

fn write_report_files(
    csv_text: &str,
    json_value: &impl serde::Serialize,
    csv_path: Option<&Path>,
    json_path: Option<&Path>,
) -> Result<(), CliError> {
    if let Some(path) = csv_path {
        std::fs::write(path, csv_text)
            .map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))?;
    }
    if let Some(path) = json_path {
        let mut text =
            serde_json::to_string_pretty(json_value).map_err(|e| CliError::Io(e.to_string()))?;
        text.push('\n');
        std::fs::write(path, text)
            .map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))?;
    }
    Ok(())
}

/// Every observed distance must respect both bound columns. Grid runs sit
/// on a trapezoid noise floor, which the budget accounts for; the exact
/// backends get essentially zero slack.
fn check_bounds(report: &ConvergenceReport) -> Result<(), CliError> {
    let noise_floor = match report.grid_n {
        Some(n) => {
            let h = report.alpha / n as f64;
            h * h * (1.0 + report.field_bound) * (report.alpha * report.lipschitz).exp()
        }
        None => 1e-12 * (1.0 + report.first_step),
    };
    for row in &report.rows {
        for (name, bound) in [
            ("factorial", row.factorial_bound),
            ("iteration", row.chain_bound),
        ] {
            if row.observed > bound * (1.0 + 1e-9) + noise_floor {
                return Err(CliError::BoundViolation(format!(
                    "n = {}: observed {} exceeds the {name} bound {}",
                    row.n,
                    fmt_float(row.observed),
                    fmt_float(bound)
                )));
            }
        }
    }
    Ok(())
}

fn print_summary(report: &ConvergenceReport) {
    if let Some(name) = &report.name {
        println!("problem: {name}");
    }
    println!(
        "backend: {}   alpha = {}   L = {}   M = {}",
        report.backend, report.alpha, report.lipschitz, report.field_bound
    );
    println!("{:>4}  {:>24}  {:>24}", "n", "observed", "bound");
    for row in &report.rows {
        println!(
            "{:>4}  {:>24}  {:>24}",
            row.n,
            fmt_float(row.observed),
            fmt_float(row.factorial_bound)
        );
    }
    for w in &report.warnings {
        println!("warning: {w}");
    }
}

/// Run one experiment described by a config. Returns the report after
/// writing any requested files and verifying the bound columns.
pub fn run_experiment(config: &RunConfig, hooks: Hooks) -> Result<ConvergenceReport, CliError> {
    let n_max = config.solver.n_max;
    let report = match config.mode {
        Mode::RealGrid | Mode::RealExact => {
            let (problem, is_poly) = build_real_problem(config)?;
            if config.mode == Mode::RealExact && !is_poly {
                return Err(CliError::Config(
                    "real-exact mode requires a polynomial right-hand side".into(),
                ));
            }
            problem
                .validate_sampled(24, config.solver.tol)
                .map_err(|e| CliError::Config(e.to_string()))?;
            let backend = match config.mode {
                Mode::RealExact => Backend::Poly {
                    k_max: config.solver.k_max,
                },
                _ => Backend::Grid {
                    n_half: config.solver.grid_n,
                },
            };
            let opts = SolveOptions {
                backend,
                reference: Reference::HighIterate { extra: 8 },
                name: None,
                kappa_scale: hooks.kappa_scale,
            };
            picard_core::real::solve_ivp(&problem, None, n_max, &opts)
                .map_err(|e| CliError::Solver(e.to_string()))?
        }
        Mode::Complex => {
            let problem = build_complex_problem(config)?;
            let opts = ComplexSolveOptions {
                k_max: config.solver.k_max,
                reference: ComplexReference::HighIterate { extra: 8 },
                name: None,
                kappa_scale: hooks.kappa_scale,
            };
            picard_core::complex::solve_complex(&problem, n_max, &opts)
                .map_err(|e| CliError::Solver(e.to_string()))?
        }
    };

    let csv = convergence_csv(&report);
    write_report_files(
        &csv,
        &report,
        config.output.csv.as_deref(),
        config.output.json.as_deref(),
    )?;
    print_summary(&report);
    check_bounds(&report)?;
    Ok(report)
}

/// Run the comparison harness on registry entries (`name` or `all`), plus
/// the `sqrt2` demo of the generic engine.
pub fn run_bench(
    registry_arg: &str,
    n_max: usize,
    csv_path: Option<&Path>,
    json_path: Option<&Path>,
) -> Result<(), CliError> {
    if registry_arg == "sqrt2" {
        let demo = picard_core::bench::sqrt_demo(2.0, 2.0, 8)
            .map_err(|e| CliError::Solver(e.to_string()))?;
        println!("sqrt2 demo: divide-and-average toward sqrt(2)");
        println!(
            "{:>4}  {:>24}  {:>24}",
            "n", "|x_n - sqrt(2)|", "chain bound"
        );
        for (n, err, bound) in &demo.rows {
            println!(
                "{:>4}  {:>24}  {:>24}",
                n,
                fmt_float(*err),
                bound.map(fmt_float).unwrap_or_default()
            );
        }
        println!("classification: {:?}", demo.classification);
        if let Some(path) = json_path {
            let mut text =
                serde_json::to_string_pretty(&demo).map_err(|e| CliError::Io(e.to_string()))?;
            text.push('\n');
            std::fs::write(path, text).map_err(|e| CliError::Io(e.to_string()))?;
        }
        return Ok(());
    }

    let entries = picard_core::bench::registry();
    let selected: Vec<_> = if registry_arg == "all" {
        entries
    } else {
        let entry = entries
            .into_iter()
            .find(|e| e.name == registry_arg)
            .ok_or_else(|| {
                CliError::Config(format!(
                    "unknown registry entry '{registry_arg}' \
                 (try one of: exp, exp-half, gaussian, zero, sine, cexp, csquare, sqrt2, all)"
                ))
            })?;
        vec![entry]
    };

    for entry in &selected {
        let report = picard_core::bench::compare_rates(
            entry,
            n_max,
            &[2, 3, 4, 5, 6, 7, 8],
            &picard_core::bench::CompareOptions::default(),
        )
        .map_err(|e| CliError::Solver(e.to_string()))?;
        println!(
            "entry: {}   backend: {}   alpha·L = {}",
            report.name,
            report.backend,
            report.alpha * report.lipschitz
        );
        println!(
            "{:>4}  {:>24}  {:>24}  {:>24}  {:>24}",
            "n", "observed", "factorial_bound", "geometric_bound", "euler_matched"
        );
        for row in &report.rows {
            println!(
                "{:>4}  {:>24}  {:>24}  {:>24}  {:>24}",
                row.n,
                fmt_float(row.observed),
                fmt_float(row.factorial_bound),
                row.geometric_bound.map(fmt_float).unwrap_or_default(),
                row.euler_matched.map(fmt_float).unwrap_or_default(),
            );
        }
        println!(
            "classification: observed {:?}, geometric column {:?}, euler slope {}",
            report.classification.observed,
            report.classification.geometric_column,
            report
                .classification
                .euler_slope
                .map(|s| format!("{s:.3}"))
                .unwrap_or_else(|| "n/a".into())
        );
        for w in &report.warnings {
            println!("warning: {w}");
        }
        let observed_sound = report
            .rows
            .iter()
            .all(|r: &RateRow| r.observed <= r.factorial_bound * (1.0 + 1e-2) + 1e-7);
        if !observed_sound {
            return Err(CliError::BoundViolation(format!(
                "entry {}: an observed error exceeded the factorial bound",
                report.name
            )));
        }
        if selected.len() == 1 {
            write_report_files(&rate_report_csv(&report), &report, csv_path, json_path)?;
        }
        println!();
    }
    Ok(())
}
