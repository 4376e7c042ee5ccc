//! Comparison harness: Euler polygonal baseline, the plain geometric
//! contraction bound, a registry of problems with closed-form solutions,
//! and decay-rate classification of observed errors.
//!
//! The point of the comparison: per iteration, Picard errors decay like
//! `(αL)^n/n!` (factorial), the plain contraction estimate only gives
//! `(αL)^n/(1−αL)` (geometric, and only when `αL < 1`), and the Euler
//! polygon converges at first order in its step. The harness measures all
//! three on the same problem and classifies which decay model fits.

use crate::complex::{ComplexIVProblem, ComplexReference, ComplexSolveOptions};
use crate::error::{ChainError, PicardError};
use crate::grid::GridFunction;
use crate::real::{
    distance_to_closure, Backend, Curve, IVProblem, NormKind, Reference, Rhs, SolveOptions,
};
use crate::report::ReferenceKind;
use crate::series::{Monomial, PolyMap};
use crate::util::{factorial, linear_fit, vec_sub};
use crate::{chain, ChainMap, ChainSpec, IterationTrace, Sequence, StopRule, TailKind};
use num_complex::Complex64;
use serde::Serialize;
use std::sync::Arc;

// ---------------------------------------------------------------------------
// Euler baseline
// ---------------------------------------------------------------------------

/// Result of a forward-Euler sweep, interpolated onto a solver grid.
#[derive(Debug, Clone)]
pub struct EulerPolygon {
    pub curve: GridFunction,
    /// Step used by the polygon (divides the half-width).
    pub h: f64,
    /// True when some step left the b-ball; stepping was frozen at the
    /// projected boundary value from there on.
    pub escaped: bool,
}

/// Forward Euler from the centre outward in both directions, with linear
/// interpolation onto the `2·grid_n + 1`-node solver grid.
///
/// `h` must divide the half-width `α`. Euler has no a-priori confinement,
/// so a step leaving the b-ball is projected back and frozen, with the
/// event flagged.
pub fn euler_polygon(
    problem: &IVProblem,
    h: f64,
    grid_n: usize,
) -> Result<EulerPolygon, PicardError> {
    let alpha = problem.alpha;
    if !h.is_finite() || h <= 0.0 {
        return Err(PicardError::Domain(format!(
            "step h = {h} must be positive"
        )));
    }
    let steps_f = alpha / h;
    let steps = steps_f.round() as usize;
    if steps == 0 || (steps_f - steps as f64).abs() > 1e-9 * steps_f {
        return Err(PicardError::StepMisaligned {
            h,
            half_width: alpha,
        });
    }

    let mut escaped = false;
    let mut sweep = |direction: f64| -> Result<Vec<Vec<f64>>, PicardError> {
        let mut nodes = Vec::with_capacity(steps + 1);
        let mut y = problem.y0.clone();
        nodes.push(y.clone());
        let mut frozen = false;
        for k in 0..steps {
            if !frozen {
                let t = problem.t0 + direction * h * k as f64;
                let f = problem.rhs.eval(t, &y)?;
                for (yi, fi) in y.iter_mut().zip(&f) {
                    *yi += direction * h * fi;
                }
                let offset = vec_sub(&y, &problem.y0);
                let r = problem.norm.eval(&offset);
                if r > problem.b {
                    // project onto the ball surface and stop stepping
                    for (yi, (y0, o)) in y.iter_mut().zip(problem.y0.iter().zip(&offset)) {
                        *yi = y0 + o * problem.b / r;
                    }
                    escaped = true;
                    frozen = true;
                }
            }
            nodes.push(y.clone());
        }
        Ok(nodes)
    };
    let right = sweep(1.0)?;
    let left = sweep(-1.0)?;

    // linear interpolation onto the solver grid
    let grid = problem.grid(grid_n);
    let dim = problem.dim();
    let mut values = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let offset = grid.offset(i);
        let (nodes, s) = if offset >= 0.0 {
            (&right, offset / h)
        } else {
            (&left, -offset / h)
        };
        let idx = (s.floor() as usize).min(steps - 1);
        let frac = s - idx as f64;
        let mut v = vec![0.0; dim];
        for c in 0..dim {
            v[c] = nodes[idx][c] * (1.0 - frac) + nodes[idx + 1][c] * frac;
        }
        values.push(v);
    }
    Ok(EulerPolygon {
        curve: GridFunction::new(grid, values)?,
        h,
        escaped,
    })
}

/// Fitted log-log slope of the Euler endpoint error against the step:
/// `error(h)` at `t = t0 ± α` for `h = α/2^k`, `k ∈ levels`. First-order
/// convergence shows up as a slope near one.
pub fn euler_order_fit(
    problem: &IVProblem,
    reference: &(dyn Fn(f64) -> Vec<f64> + Send + Sync),
    levels: &[u32],
) -> Result<Option<f64>, PicardError> {
    let mut ln_h = Vec::new();
    let mut ln_err = Vec::new();
    for &k in levels {
        let h = problem.alpha / 2f64.powi(k as i32);
        let polygon = euler_polygon(problem, h, 2usize.pow(k))?;
        let g = &polygon.curve;
        let err_right = problem.norm.eval(&vec_sub(
            &g.values[g.grid.len() - 1],
            &reference(problem.t0 + problem.alpha),
        ));
        let err_left = problem.norm.eval(&vec_sub(
            &g.values[0],
            &reference(problem.t0 - problem.alpha),
        ));
        let err = err_right.max(err_left);
        if err > 1e-14 {
            ln_h.push(h.ln());
            ln_err.push(err.ln());
        }
    }
    Ok(linear_fit(&ln_h, &ln_err).map(|(slope, _, _)| slope))
}

// ---------------------------------------------------------------------------
// Geometric bound
// ---------------------------------------------------------------------------

/// The plain contraction estimate `(αL)^n / (1 − αL) · first_step`.
///
/// Returns `None` when `αL ≥ 1`: the single-metric contraction argument
/// needs `αL < 1` and simply does not apply, which is exactly what the
/// factorial bound improves on.
pub fn geometric_bound(problem: &IVProblem, n: usize, first_step: f64) -> Option<f64> {
    geometric_bound_from(problem.alpha * problem.lipschitz, n, first_step)
}

/// Same from a raw contraction factor.
pub use crate::util::geometric_bound_from;

// ---------------------------------------------------------------------------
// Decay classification
// ---------------------------------------------------------------------------

/// Which decay model fits an error sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecayClass {
    /// Errors at the noise floor from the first step on.
    Exact,
    /// `error ≈ c (αL)^n / n!` — the compensated sequence
    /// `log(error · n!/(αL)^n)` has bounded slope.
    Factorial,
    /// `error ≈ c ρ^n`.
    Geometric,
    /// Faster than factorial in this window (e.g. quadratic iteration).
    Superlinear,
    /// Too little usable data, or no model fits.
    Indeterminate,
}

/// Classify an error-vs-iteration sequence against the decay models.
///
/// `rate` is the per-level contraction budget `αL` used by the factorial
/// compensation. Needs at least four rows above the noise floor.
pub fn classify_decay(rows: &[(usize, f64)], rate: f64, noise_floor: f64) -> DecayClass {
    let usable: Vec<(usize, f64)> = rows
        .iter()
        .copied()
        .filter(|(_, e)| e.is_finite() && *e > noise_floor)
        .collect();
    if rows.iter().all(|(n, e)| *n == 0 || *e <= noise_floor) && rows.len() > 1 {
        return DecayClass::Exact;
    }
    if usable.len() < 4 {
        return DecayClass::Indeterminate;
    }
    let ln_err: Vec<f64> = usable.iter().map(|(_, e)| e.ln()).collect();

    // superlinear: the per-step log decrements themselves accelerate
    let decrements: Vec<f64> = ln_err.windows(2).map(|w| w[1] - w[0]).collect();
    if decrements.len() >= 2 {
        let accel: f64 =
            decrements.windows(2).map(|w| w[1] - w[0]).sum::<f64>() / (decrements.len() - 1) as f64;
        if accel < -0.69 && decrements.iter().all(|d| *d < 0.0) {
            return DecayClass::Superlinear;
        }
    }

    // factorial: log(error · n!/rate^n) has bounded slope in n
    if rate > 0.0 {
        let xs: Vec<f64> = usable.iter().map(|(n, _)| *n as f64).collect();
        let compensated: Vec<f64> = usable
            .iter()
            .map(|(n, e)| e.ln() + factorial(*n).ln() - (*n as f64) * rate.ln())
            .collect();
        if let Some((slope, _, _)) = linear_fit(&xs, &compensated) {
            if slope.abs() <= 1.0 {
                return DecayClass::Factorial;
            }
        }
    }

    // geometric: straight line in (n, log error)
    let xs: Vec<f64> = usable.iter().map(|(n, _)| *n as f64).collect();
    if let Some((slope, _, r2)) = linear_fit(&xs, &ln_err) {
        if slope < 0.0 && r2 >= 0.98 {
            return DecayClass::Geometric;
        }
    }
    DecayClass::Indeterminate
}

// ---------------------------------------------------------------------------
// Problem registry
// ---------------------------------------------------------------------------

/// A registered problem instance, optionally with its exact solution.
#[derive(Clone)]
pub enum RegistryProblem {
    Real {
        problem: IVProblem,
        closed_form: Option<Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>>,
    },
    Complex {
        problem: ComplexIVProblem,
        /// Taylor coefficient generator of the exact solution.
        closed_series: Option<Arc<dyn Fn(usize) -> Vec<Complex64> + Send + Sync>>,
    },
}

/// A named registry entry.
#[derive(Clone)]
pub struct RegistryEntry {
    pub name: &'static str,
    pub tags: &'static [&'static str],
    pub kind: RegistryProblem,
}

impl std::fmt::Debug for RegistryEntry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "RegistryEntry({})", self.name)
    }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// The built-in problem registry.
///
/// Constants are chosen so the bound arithmetic is reproducible:
/// - `exp`: `y' = y`, `y(0) = 1` on `|t| ≤ 1`, `|y − 1| ≤ e − 1`. `M = e`
///   is the true field sup on that rectangle and `α = 1` is declared (the
///   iterates from `y ≡ 1` stay inside the ball on the whole interval,
///   although `min(a, b/M) = (e−1)/e` would be smaller). `αL = 1`, so the
///   geometric bound is inapplicable while the factorial bound holds.
/// - `exp-half`: `y' = y/2` with derived `α = 1`, `αL = 1/2`: both bounds
///   apply and can be compared.
/// - `gaussian`: `y' = −2ty` with the closed form `e^{−t²}`.
/// - `zero`: the zero field; everything is exact after one step.
/// - `sine`: `y' = sin y`, non-polynomial, grid backend only.
/// - `cexp`: complex `z' = z` on the unit disc, declared `α = 1`.
/// - `csquare`: complex `z' = z²` with solution `1/(1 − t)`, declared
///   `α = 1/2`.
pub fn registry() -> Vec<RegistryEntry> {
    let e = std::f64::consts::E;
    let mut entries = Vec::new();

    entries.push(RegistryEntry {
        name: "exp",
        tags: &["linear", "polynomial-rhs"],
        kind: RegistryProblem::Real {
            problem: IVProblem::with_declared_alpha(
                0.0,
                vec![1.0],
                1.0,
                e - 1.0,
                Rhs::Poly(PolyMap::linear_1d(1.0)),
                1.0,
                e,
                1.0,
                NormKind::Euclidean,
            )
            .expect("registry entry exp"),
            closed_form: Some(Arc::new(|t: f64| vec![t.exp()])),
        },
    });

    entries.push(RegistryEntry {
        name: "exp-half",
        tags: &["linear", "polynomial-rhs"],
        kind: RegistryProblem::Real {
            problem: IVProblem::new(
                0.0,
                vec![1.0],
                1.0,
                2.0,
                Rhs::Poly(PolyMap::linear_1d(0.5)),
                0.5,
                1.5,
                NormKind::Euclidean,
            )
            .expect("registry entry exp-half"),
            closed_form: Some(Arc::new(|t: f64| vec![(0.5 * t).exp()])),
        },
    });

    entries.push(RegistryEntry {
        name: "gaussian",
        tags: &["polynomial-rhs"],
        kind: RegistryProblem::Real {
            problem: IVProblem::new(
                0.0,
                vec![1.0],
                0.5,
                1.0,
                Rhs::Poly(PolyMap::new(
                    1,
                    vec![vec![Monomial {
                        coeff: -2.0,
                        t_pow: 1,
                        y_pows: vec![1],
                    }]],
                )),
                1.0,
                2.0,
                NormKind::Euclidean,
            )
            .expect("registry entry gaussian"),
            closed_form: Some(Arc::new(|t: f64| vec![(-t * t).exp()])),
        },
    });

    entries.push(RegistryEntry {
        name: "zero",
        tags: &["trivial"],
        kind: RegistryProblem::Real {
            problem: IVProblem::new(
                0.0,
                vec![1.0],
                1.0,
                1.0,
                Rhs::Poly(PolyMap::new(1, vec![vec![]])),
                0.0,
                0.0,
                NormKind::Euclidean,
            )
            .expect("registry entry zero"),
            closed_form: Some(Arc::new(|_t: f64| vec![1.0])),
        },
    });

    entries.push(RegistryEntry {
        name: "sine",
        tags: &["trig"],
        kind: RegistryProblem::Real {
            problem: IVProblem::new(
                0.0,
                vec![1.0],
                0.5,
                1.0,
                Rhs::Func(Arc::new(|_t: f64, y: &[f64]| vec![y[0].sin()])),
                1.0,
                1.0,
                NormKind::Euclidean,
            )
            .expect("registry entry sine"),
            // separable: tan(y/2) = tan(1/2) e^t
            closed_form: Some(Arc::new(|t: f64| {
                vec![2.0 * (0.5f64.tan() * t.exp()).atan()]
            })),
        },
    });

    entries.push(RegistryEntry {
        name: "cexp",
        tags: &["linear", "complex"],
        kind: RegistryProblem::Complex {
            problem: ComplexIVProblem::with_declared_alpha(
                c(0.0),
                vec![c(1.0)],
                1.0,
                e - 1.0,
                PolyMap::linear_1d(c(1.0)),
                1.0,
                e,
                1.0,
            )
            .expect("registry entry cexp"),
            closed_series: Some(Arc::new(|m: usize| vec![c(1.0 / factorial(m))])),
        },
    });

    entries.push(RegistryEntry {
        name: "csquare",
        tags: &["polynomial-rhs", "complex"],
        kind: RegistryProblem::Complex {
            problem: ComplexIVProblem::with_declared_alpha(
                c(0.0),
                vec![c(1.0)],
                0.5,
                1.0,
                PolyMap::new(
                    1,
                    vec![vec![Monomial {
                        coeff: c(1.0),
                        t_pow: 0,
                        y_pows: vec![2],
                    }]],
                ),
                4.0,
                4.0,
                0.5,
            )
            .expect("registry entry csquare"),
            closed_series: Some(Arc::new(|_m: usize| vec![c(1.0)])),
        },
    });

    entries
}

/// Look up one registry entry by name.
pub fn find_entry(name: &str) -> Option<RegistryEntry> {
    registry().into_iter().find(|e| e.name == name)
}

// ---------------------------------------------------------------------------
// Rate comparison
// ---------------------------------------------------------------------------

/// One row of the comparison table.
#[derive(Debug, Clone, Serialize)]
pub struct RateRow {
    pub n: usize,
    pub observed: f64,
    pub factorial_bound: f64,
    /// `None` when `αL ≥ 1` (the geometric argument is inapplicable).
    pub geometric_bound: Option<f64>,
    /// Euler endpoint error at step count matching the cumulative field
    /// evaluations of `n` grid iterations; `None` for complex entries and
    /// at `n = 0`.
    pub euler_matched: Option<f64>,
}

/// Fitted classification of the table columns.
#[derive(Debug, Clone, Serialize)]
pub struct RateClassification {
    pub observed: DecayClass,
    pub geometric_column: DecayClass,
    /// Euler log-log order against the step (about 1 for a first-order
    /// method); `None` without a closed form or for complex entries.
    pub euler_slope: Option<f64>,
}

/// Comparison report for one registry entry.
#[derive(Debug, Clone, Serialize)]
pub struct RateReport {
    pub name: String,
    pub alpha: f64,
    pub lipschitz: f64,
    pub field_bound: f64,
    pub backend: String,
    pub reference: ReferenceKind,
    pub first_step: f64,
    pub rows: Vec<RateRow>,
    pub classification: RateClassification,
    pub warnings: Vec<String>,
}

/// Options for [`compare_rates`].
#[derive(Debug, Clone, Copy)]
pub struct CompareOptions {
    /// Grid half-resolution for non-polynomial fields and the Euler cost
    /// model.
    pub grid_n: usize,
    /// Fault-injection scale on the contraction factors (1.0 = honest).
    pub kappa_scale: f64,
}

impl Default for CompareOptions {
    fn default() -> Self {
        CompareOptions {
            grid_n: 1024,
            kappa_scale: 1.0,
        }
    }
}

/// Run the three-way comparison on a registry entry: Picard observed
/// errors, factorial and geometric bounds, matched-cost Euler errors, and
/// the decay classification of each column.
pub fn compare_rates(
    entry: &RegistryEntry,
    n_max: usize,
    euler_levels: &[u32],
    opts: &CompareOptions,
) -> Result<RateReport, PicardError> {
    match &entry.kind {
        RegistryProblem::Real {
            problem,
            closed_form,
        } => {
            let backend = if problem.rhs.as_poly().is_some() {
                Backend::default_poly()
            } else {
                Backend::Grid {
                    n_half: opts.grid_n,
                }
            };
            let reference = match closed_form {
                Some(f) => Reference::ClosedForm(f.clone()),
                None => Reference::HighIterate { extra: 8 },
            };
            let solve_opts = SolveOptions {
                backend,
                reference,
                name: Some(entry.name.to_string()),
                kappa_scale: opts.kappa_scale,
            };
            let report = crate::real::solve_ivp(problem, None, n_max, &solve_opts)?;

            let noise_floor = match backend {
                Backend::Poly { .. } => 1e-13,
                Backend::Grid { .. } => 1e-9,
            };
            let al = problem.alpha * problem.lipschitz;
            let mut rows = Vec::with_capacity(report.rows.len());
            for r in &report.rows {
                let euler_matched = match (closed_form, r.n) {
                    (Some(f), n) if n >= 1 => {
                        // cost model: n Picard grid sweeps = n·(2N+1) field
                        // evaluations, split over the two Euler directions
                        let evals = n * (2 * opts.grid_n + 1);
                        let steps_per_dir = evals.div_ceil(2);
                        let h = problem.alpha / steps_per_dir as f64;
                        let polygon = euler_polygon(problem, h, opts.grid_n)?;
                        Some(distance_to_closure(
                            problem,
                            &Curve::Grid(polygon.curve),
                            f.as_ref(),
                        ))
                    }
                    _ => None,
                };
                rows.push(RateRow {
                    n: r.n,
                    observed: r.observed,
                    factorial_bound: r.factorial_bound,
                    geometric_bound: r.geometric_bound,
                    euler_matched,
                });
            }

            let observed_class = classify_decay(
                &rows.iter().map(|r| (r.n, r.observed)).collect::<Vec<_>>(),
                al,
                noise_floor,
            );
            let geometric_class = classify_decay(
                &rows
                    .iter()
                    .filter_map(|r| r.geometric_bound.map(|g| (r.n, g)))
                    .collect::<Vec<_>>(),
                al,
                1e-300,
            );
            let euler_slope = match closed_form {
                Some(f) => euler_order_fit(problem, f.as_ref(), euler_levels)?,
                None => None,
            };

            Ok(RateReport {
                name: entry.name.to_string(),
                alpha: problem.alpha,
                lipschitz: problem.lipschitz,
                field_bound: problem.field_bound,
                backend: report.backend,
                reference: report.reference,
                first_step: report.first_step,
                rows,
                classification: RateClassification {
                    observed: observed_class,
                    geometric_column: geometric_class,
                    euler_slope,
                },
                warnings: report.warnings,
            })
        }
        RegistryProblem::Complex {
            problem,
            closed_series,
        } => {
            let reference = match closed_series {
                Some(coeffs) => ComplexReference::ClosedFormSeries {
                    coeffs: coeffs.clone(),
                    order: (n_max + 18).max(30),
                },
                None => ComplexReference::HighIterate { extra: 8 },
            };
            let solve_opts = ComplexSolveOptions {
                reference,
                name: Some(entry.name.to_string()),
                kappa_scale: opts.kappa_scale,
                ..Default::default()
            };
            let report = crate::complex::solve_complex(problem, n_max, &solve_opts)?;
            let al = problem.alpha * problem.lipschitz;
            let rows: Vec<RateRow> = report
                .rows
                .iter()
                .map(|r| RateRow {
                    n: r.n,
                    observed: r.observed,
                    factorial_bound: r.factorial_bound,
                    geometric_bound: r.geometric_bound,
                    euler_matched: None,
                })
                .collect();
            let observed_class = classify_decay(
                &rows.iter().map(|r| (r.n, r.observed)).collect::<Vec<_>>(),
                al,
                1e-13,
            );
            let geometric_class = classify_decay(
                &rows
                    .iter()
                    .filter_map(|r| r.geometric_bound.map(|g| (r.n, g)))
                    .collect::<Vec<_>>(),
                al,
                1e-300,
            );
            Ok(RateReport {
                name: entry.name.to_string(),
                alpha: problem.alpha,
                lipschitz: problem.lipschitz,
                field_bound: problem.field_bound,
                backend: report.backend,
                reference: report.reference,
                first_step: report.first_step,
                rows,
                classification: RateClassification {
                    observed: observed_class,
                    geometric_column: geometric_class,
                    euler_slope: None,
                },
                warnings: report.warnings,
            })
        }
    }
}

/// Serialise the comparison rows as CSV with stable 17-significant-digit
/// float formatting; inapplicable cells are left empty.
pub fn rate_report_csv(report: &RateReport) -> String {
    let mut out = String::from("n,observed,factorial_bound,geometric_bound,euler_matched\n");
    for r in &report.rows {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.16e}")).unwrap_or_default();
        out.push_str(&format!(
            "{},{:.16e},{:.16e},{},{}\n",
            r.n,
            r.observed,
            r.factorial_bound,
            opt(r.geometric_bound),
            opt(r.euler_matched),
        ));
    }
    out
}

// ---------------------------------------------------------------------------
// Square-root iteration demo on the generic engine
// ---------------------------------------------------------------------------

/// The ancient divide-and-average map `x ↦ (x + R/x)/2` on intervals
/// shrinking toward `√R`, as a chain for the generic engine: `H_j` is
/// `[√R, √R + 2^{−j}]` with `d_j = 2^j |x − y|`.
pub struct SqrtChain {
    pub radicand: f64,
}

impl SqrtChain {
    /// Level-0 contraction factor of the map on `[√R, √R + 1]`:
    /// `sup |T'| = (1 − R/(√R+1)²)/2`, valid on every deeper level too.
    pub fn kappa(&self) -> f64 {
        let root = self.radicand.sqrt();
        0.5 * (1.0 - self.radicand / ((root + 1.0) * (root + 1.0)))
    }

    pub fn spec(&self) -> ChainSpec {
        let kappa = self.kappa();
        ChainSpec::new(
            Sequence::Constant(0.5),
            Sequence::Constant(kappa),
            TailKind::EventuallyConstant {
                from: 1,
                value: 0.5 * kappa,
            },
        )
    }
}

impl ChainMap for SqrtChain {
    type Point = f64;

    fn metric(&self, level: usize, x: &f64, y: &f64) -> Result<f64, ChainError> {
        let root = self.radicand.sqrt();
        let cap = root + 2f64.powi(-(level as i32));
        for v in [x, y] {
            // slack below the root absorbs floating-point rounding
            if *v < root - 1e-12 || *v > cap {
                return Err(ChainError::NotInLevel { level });
            }
        }
        Ok(2f64.powi(level as i32) * (x - y).abs())
    }

    fn apply(&self, x: &f64) -> Result<f64, ChainError> {
        Ok(0.5 * (x + self.radicand / x))
    }
}

/// Demo report for the square-root iteration.
#[derive(Debug, Clone, Serialize)]
pub struct SqrtDemoReport {
    pub radicand: f64,
    pub final_value: f64,
    /// Rows `(n, |x_n − √R|, chain a-priori bound)`.
    pub rows: Vec<(usize, f64, Option<f64>)>,
    /// Quadratic convergence outruns both decay models of the harness.
    pub classification: DecayClass,
}

/// Run the square-root demo through the generic engine and classify its
/// observed convergence.
pub fn sqrt_demo(radicand: f64, x0: f64, max_steps: usize) -> Result<SqrtDemoReport, ChainError> {
    let map = SqrtChain { radicand };
    let spec = map.spec();
    let trace: IterationTrace<f64> =
        chain::iterate(&spec, &map, x0, StopRule::max_steps(max_steps), 0)?;
    let root = radicand.sqrt();
    let rows: Vec<(usize, f64, Option<f64>)> = trace
        .points
        .iter()
        .enumerate()
        .map(|(n, x)| (n, (x - root).abs(), trace.bounds[n]))
        .collect();
    let classification = classify_decay(
        &rows.iter().map(|(n, e, _)| (*n, *e)).collect::<Vec<_>>(),
        0.5 * map.kappa(),
        1e-15,
    );
    Ok(SqrtDemoReport {
        radicand,
        final_value: *trace.last_point(),
        rows,
        classification,
    })
}
