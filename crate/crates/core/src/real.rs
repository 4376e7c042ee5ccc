//! Real-time Picard iteration for `y' = f(t, y)`, `y(t0) = y0` on
//! `[t0 − α, t0 + α]`, `α = min(a, b/M)`.
//!
//! The solution is the fixed point of `(Py)(t) = y0 + ∫_{t0}^{t} f(s, y(s)) ds`
//! acting on curves confined to the `b`-ball around `y0`. Weighted metrics
//! `d_j(x, y) = sup_{t≠t0} ‖x(t) − y(t)‖/|t−t0|^j` make `P` contract with
//! factor `L/(j+1)` from level `j` to `j+1`, which plugs into the chain
//! engine with `α_j ≡ α`, `κ_j = L/j` and yields the factorial bound
//! `e^{αL} (αL)^n M / n!`.
//!
//! Two curve backends:
//! - grid: `2N+1` uniform samples, composite trapezoid cumulative
//!   quadrature. Handles any continuous field. Quadrature noise is `O(h²)`,
//!   so every grid inequality check carries a small multiplicative slack
//!   and weighted metrics with `j ≥ 1` are taken over `|t − t0| ≥ α/16`,
//!   where the noise amplification `(h/t)²` is negligible.
//! - poly: truncated power series, exact for polynomial fields. Rate
//!   measurements run here so quadrature error cannot mask factorial decay.

use crate::chain::{self, ChainMap, ChainSpec, Sequence, StopRule, TailKind};
use crate::error::{ChainError, PicardError};
use crate::grid::{cumulative_trapezoid, cumulative_trapezoid_abs, Grid, GridFunction, ScalarGrid};
use crate::report::{ConvergenceReport, ConvergenceRow, ReferenceKind};
use crate::series::{PolyMap, PowerSeries, SeriesFunction, K_MAX_DEFAULT};
use crate::util::{norm_euclid, norm_max, sup_scan, vec_sub};
use serde::Serialize;
use std::sync::Arc;

/// Exact-backend curve: a truncated power series with real coefficients.
pub type PolyFunction = SeriesFunction<f64>;

/// Norm on the state space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormKind {
    Euclidean,
    MaxAbs,
}

impl NormKind {
    pub fn eval(&self, v: &[f64]) -> f64 {
        match self {
            NormKind::Euclidean => norm_euclid(v),
            NormKind::MaxAbs => norm_max(v),
        }
    }
}

/// Shared handle to an arbitrary continuous field evaluation.
pub type RhsFn = Arc<dyn Fn(f64, &[f64]) -> Vec<f64> + Send + Sync>;

/// Right-hand side of the differential equation.
#[derive(Clone)]
pub enum Rhs {
    /// Polynomial in `(t, y)`: usable by both backends, exactly by the
    /// series backend.
    Poly(PolyMap<f64>),
    /// Arbitrary continuous field: grid backend only.
    Func(RhsFn),
}

impl Rhs {
    pub fn eval(&self, t: f64, y: &[f64]) -> Result<Vec<f64>, PicardError> {
        let out = match self {
            Rhs::Poly(map) => map.eval(t, y),
            Rhs::Func(f) => f(t, y),
        };
        if out.iter().any(|v| !v.is_finite()) {
            return Err(PicardError::RhsEval {
                t,
                detail: "non-finite value".into(),
            });
        }
        Ok(out)
    }

    pub fn as_poly(&self) -> Option<&PolyMap<f64>> {
        match self {
            Rhs::Poly(map) => Some(map),
            Rhs::Func(_) => None,
        }
    }
}

impl std::fmt::Debug for Rhs {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Rhs::Poly(map) => write!(f, "Rhs::Poly(degree {})", map.total_degree()),
            Rhs::Func(_) => write!(f, "Rhs::Func(..)"),
        }
    }
}

/// `α = min(a, b/M)`.
pub fn compute_alpha(a: f64, b: f64, m: f64) -> Result<f64, PicardError> {
    for (name, v) in [("a", a), ("b", b), ("M", m)] {
        if !v.is_finite() || v <= 0.0 {
            return Err(PicardError::Domain(format!(
                "{name} must be positive, got {v}"
            )));
        }
    }
    Ok(a.min(b / m))
}

/// Safety factor applied to sampled estimates of `L` and `M`.
pub const ESTIMATE_SAFETY: f64 = 1.05;

/// An initial value problem on the rectangle
/// `R = {|t − t0| ≤ a, ‖y − y0‖ ≤ b}` with Lipschitz constant `L` and
/// field bound `M`.
#[derive(Debug, Clone)]
pub struct IVProblem {
    pub t0: f64,
    pub y0: Vec<f64>,
    pub a: f64,
    pub b: f64,
    pub rhs: Rhs,
    pub lipschitz: f64,
    pub field_bound: f64,
    pub alpha: f64,
    pub norm: NormKind,
}

impl IVProblem {
    /// Standard construction: `α = min(a, b/M)`.
    ///
    /// `M = 0` is the degenerate constant-field case: the field must vanish
    /// identically on `R` (spot-checked here) and `α` becomes `a`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        t0: f64,
        y0: Vec<f64>,
        a: f64,
        b: f64,
        rhs: Rhs,
        lipschitz: f64,
        field_bound: f64,
        norm: NormKind,
    ) -> Result<Self, PicardError> {
        if y0.is_empty() {
            return Err(PicardError::Domain(
                "y0 must have at least one component".into(),
            ));
        }
        if a <= 0.0 || b <= 0.0 || !a.is_finite() || !b.is_finite() {
            return Err(PicardError::Domain(format!(
                "a = {a}, b = {b} must be positive"
            )));
        }
        if lipschitz < 0.0 || field_bound < 0.0 {
            return Err(PicardError::Domain("L and M must be nonnegative".into()));
        }
        let problem = IVProblem {
            t0,
            y0,
            a,
            b,
            rhs,
            lipschitz,
            field_bound,
            alpha: a,
            norm,
        };
        let alpha = if field_bound == 0.0 {
            problem.check_zero_field(16)?;
            a
        } else {
            compute_alpha(a, b, field_bound)?
        };
        Ok(IVProblem { alpha, ..problem })
    }

    /// Construction with a declared `α ≤ a` instead of `min(a, b/M)`.
    ///
    /// Useful when confinement of the iterates to the b-ball is known for
    /// the specific problem even though `b/M < α` (the generic sufficient
    /// condition is conservative). The runtime b-ball checks stay active,
    /// so a wrong declaration surfaces instead of corrupting results.
    #[allow(clippy::too_many_arguments)]
    pub fn with_declared_alpha(
        t0: f64,
        y0: Vec<f64>,
        a: f64,
        b: f64,
        rhs: Rhs,
        lipschitz: f64,
        field_bound: f64,
        alpha: f64,
        norm: NormKind,
    ) -> Result<Self, PicardError> {
        if !alpha.is_finite() || alpha <= 0.0 || alpha > a {
            return Err(PicardError::Domain(format!(
                "declared alpha = {alpha} must lie in (0, a = {a}]"
            )));
        }
        let mut p = Self::new(t0, y0, a, b, rhs, lipschitz, field_bound, norm)?;
        p.alpha = alpha;
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.y0.len()
    }

    fn check_zero_field(&self, density: usize) -> Result<(), PicardError> {
        for (t, y) in self.sample_rectangle(density) {
            let f = self.rhs.eval(t, &y)?;
            if self.norm.eval(&f) > 1e-12 {
                return Err(PicardError::Domain(
                    "M = 0 declared but the field is not identically zero on R".into(),
                ));
            }
        }
        Ok(())
    }

    /// Deterministic sample sweep of the rectangle `R` (corners included).
    fn sample_rectangle(&self, density: usize) -> Vec<(f64, Vec<f64>)> {
        let d = self.dim();
        let nt = density.max(2);
        // keep the total point count manageable in higher dimensions
        let ny = match d {
            1 => density.max(2),
            2 => (density / 2).max(2),
            _ => 4,
        };
        let mut out = Vec::new();
        for it in 0..=nt {
            let t = self.t0 - self.a + 2.0 * self.a * it as f64 / nt as f64;
            let mut idx = vec![0usize; d];
            loop {
                let mut y = self.y0.clone();
                for (c, &i) in idx.iter().enumerate() {
                    y[c] += -self.b + 2.0 * self.b * i as f64 / ny as f64;
                }
                // project onto the ball when a corner pokes out of it
                let offset = vec_sub(&y, &self.y0);
                let r = self.norm.eval(&offset);
                if r <= self.b * (1.0 + 1e-12) {
                    out.push((t, y));
                } else if r > 0.0 {
                    let scaled: Vec<f64> = self
                        .y0
                        .iter()
                        .zip(&offset)
                        .map(|(c, o)| c + o * self.b / r)
                        .collect();
                    out.push((t, scaled));
                }
                // advance the multi-index
                let mut c = 0;
                while c < d {
                    idx[c] += 1;
                    if idx[c] <= ny {
                        break;
                    }
                    idx[c] = 0;
                    c += 1;
                }
                if c == d {
                    break;
                }
            }
        }
        out
    }

    /// Sampled estimates `(L_est, M_est)` of the Lipschitz constant and the
    /// field bound, inflated by [`ESTIMATE_SAFETY`]. User-supplied constants
    /// always take precedence over these.
    pub fn estimate_constants(
        t0: f64,
        y0: &[f64],
        a: f64,
        b: f64,
        rhs: &Rhs,
        norm: NormKind,
        density: usize,
    ) -> Result<(f64, f64), PicardError> {
        let probe = IVProblem {
            t0,
            y0: y0.to_vec(),
            a,
            b,
            rhs: rhs.clone(),
            lipschitz: 0.0,
            field_bound: 0.0,
            alpha: a,
            norm,
        };
        let samples = probe.sample_rectangle(density);
        let mut m_est = 0.0f64;
        for (t, y) in &samples {
            m_est = m_est.max(norm.eval(&rhs.eval(*t, y)?));
        }
        // difference quotients between samples sharing the same t
        let mut l_est = 0.0f64;
        let mut i = 0;
        while i < samples.len() {
            let t = samples[i].0;
            let mut j = i;
            while j < samples.len() && samples[j].0 == t {
                j += 1;
            }
            let group = &samples[i..j];
            for (gi, (_, y1)) in group.iter().enumerate() {
                let f1 = rhs.eval(t, y1)?;
                // a neighbour plus one long-range partner per point
                for partner in [gi + 1, gi + group.len() / 2 + 1] {
                    if partner >= group.len() {
                        continue;
                    }
                    let (_, y2) = &group[partner];
                    let dy = norm.eval(&vec_sub(y1, y2));
                    if dy > 1e-12 {
                        let df = norm.eval(&vec_sub(&f1, &rhs.eval(t, y2)?));
                        l_est = l_est.max(df / dy);
                    }
                }
            }
            i = j;
        }
        Ok((l_est * ESTIMATE_SAFETY, m_est * ESTIMATE_SAFETY))
    }

    /// Sampled verification of the declared constants: `‖f‖ ≤ M(1+tol)` on a
    /// rectangle sweep and the Lipschitz quotient `≤ L(1+tol)` on sampled
    /// pairs.
    pub fn validate_sampled(&self, density: usize, tol: f64) -> Result<(), PicardError> {
        if self.field_bound == 0.0 {
            return self.check_zero_field(density);
        }
        let (l_est, m_est) = Self::estimate_constants(
            self.t0, &self.y0, self.a, self.b, &self.rhs, self.norm, density,
        )?;
        let l_raw = l_est / ESTIMATE_SAFETY;
        let m_raw = m_est / ESTIMATE_SAFETY;
        if m_raw > self.field_bound * (1.0 + tol) {
            return Err(PicardError::Domain(format!(
                "sampled field bound {m_raw} exceeds declared M = {}",
                self.field_bound
            )));
        }
        if l_raw > self.lipschitz * (1.0 + tol) {
            return Err(PicardError::Domain(format!(
                "sampled Lipschitz quotient {l_raw} exceeds declared L = {}",
                self.lipschitz
            )));
        }
        Ok(())
    }

    /// The uniform grid used by the sampled backend at half-resolution `n`.
    pub fn grid(&self, n_half: usize) -> Grid {
        Grid::new(self.t0, self.alpha, n_half)
    }

    /// `‖v − y0‖` in the problem norm.
    fn ball_radius(&self, v: &[f64]) -> f64 {
        self.norm.eval(&vec_sub(v, &self.y0))
    }
}

/// The factorial a-priori bound `e^{αL} (αL)^n M / n!` on `d_0(y^n, y^∞)`.
pub fn factorial_error_bound(problem: &IVProblem, n: usize) -> f64 {
    crate::util::factorial_bound(problem.alpha, problem.lipschitz, problem.field_bound, n)
}

/// `(C_j(f, x) + C_j(f, y)) (1 + L^j (e^{Lα} − 1))`, the closed-form bound
/// showing the weighted metric `d_j` is finite on level `j`.
pub fn finiteness_bound_from_defects(problem: &IVProblem, cx: f64, cy: f64, j: usize) -> f64 {
    let l = problem.lipschitz;
    let lj = if j == 0 { 1.0 } else { l.powi(j as i32) };
    (cx + cy) * (1.0 + lj * ((l * problem.alpha).exp() - 1.0))
}

// ---------------------------------------------------------------------------
// Curves: the two backends behind one enum
// ---------------------------------------------------------------------------

/// A curve in `H_0`, in either backend representation.
#[derive(Debug, Clone)]
pub enum Curve {
    Grid(GridFunction),
    Poly(PolyFunction),
}

impl Curve {
    /// The constant start `y ≡ y0` in the requested backend.
    pub fn constant_start(problem: &IVProblem, backend: Backend) -> Curve {
        match backend {
            Backend::Grid { n_half } => {
                Curve::Grid(GridFunction::constant(problem.grid(n_half), &problem.y0))
            }
            Backend::Poly { .. } => Curve::Poly(PolyFunction::constant(
                problem.t0,
                problem.alpha,
                &problem.y0,
            )),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Curve::Grid(g) => g.dim(),
            Curve::Poly(p) => p.dim(),
        }
    }
}

/// Backend selection and its resolution parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    Grid { n_half: usize },
    Poly { k_max: usize },
}

impl Backend {
    pub fn default_grid() -> Self {
        Backend::Grid { n_half: 1024 }
    }

    pub fn default_poly() -> Self {
        Backend::Poly {
            k_max: K_MAX_DEFAULT,
        }
    }
}

/// Relative threshold below which a leading series coefficient counts as
/// zero when checking that a difference vanishes to a given order.
pub const COEFF_ZERO_TOL: f64 = 1e-12;

/// Weighted metrics with `j ≥ 1` on the grid backend are taken over
/// `|t − t0| ≥ half_width / GRID_TRIM_DENOM`: closer to the centre the
/// quotient divides quadrature noise by a vanishing power and becomes
/// meaningless.
pub const GRID_TRIM_DENOM: usize = 16;

/// Ratio over the trusted-region supremum beyond which a growing quotient
/// near the centre is flagged as non-membership (the threshold slope of
/// the membership heuristic).
const GRID_GROWTH_FACTOR: f64 = 4.0;

// --- Picard operator ---

/// Apply the Picard operator on the grid backend: cumulative trapezoid of
/// the sampled field, outward from the centre in both directions.
///
/// The image mathematically stays in the b-ball (`‖Py − y0‖ ≤ αM ≤ b`);
/// samples pushed outside by quadrature noise are clamped back and counted.
pub fn picard_apply_grid(
    problem: &IVProblem,
    y: &GridFunction,
) -> Result<GridFunction, PicardError> {
    let grid = y.grid;
    let mut field = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        field.push(problem.rhs.eval(grid.node(i), &y.values[i])?);
    }
    let integral = cumulative_trapezoid(&grid, &field);
    let mut clamped = 0usize;
    let values: Vec<Vec<f64>> = integral
        .into_iter()
        .map(|row| {
            let mut v: Vec<f64> = row.iter().zip(&problem.y0).map(|(i, y0)| y0 + i).collect();
            let r = problem.ball_radius(&v);
            if r > problem.b {
                clamped += 1;
                let scale = problem.b / r;
                for (c, y0) in v.iter_mut().zip(&problem.y0) {
                    *c = y0 + (*c - y0) * scale;
                }
            }
            v
        })
        .collect();
    let mut out = GridFunction::new(grid, values)?;
    out.clamped = y.clamped + clamped;
    Ok(out)
}

/// Certify that a series curve stays in the b-ball: first through the
/// coefficient majorant `Σ‖c_m‖α^m + tail` (cheap, pessimistic), then by a
/// sampled supremum when the majorant alone is inconclusive.
fn poly_ball_check(problem: &IVProblem, y: &PolyFunction) -> Result<(), PicardError> {
    let per_component: Vec<f64> = y
        .series
        .components
        .iter()
        .zip(&problem.y0)
        .map(|(c, &y0_i)| {
            let mut centred = c.clone();
            if !centred.coeffs.is_empty() {
                centred.coeffs[0] -= y0_i;
            }
            centred.sup_bound(y.radius)
        })
        .collect();
    let majorant = match problem.norm {
        NormKind::Euclidean => norm_euclid(&per_component),
        NormKind::MaxAbs => norm_max(&per_component),
    };
    if majorant <= problem.b * (1.0 + 1e-9) {
        return Ok(());
    }
    let tail: f64 = y.tail_sum();
    let sampled = sup_scan(
        |dt| {
            let v = y.series.eval(dt);
            problem.ball_radius(&v)
        },
        -y.radius,
        y.radius,
        1024,
    ) + tail;
    if sampled <= problem.b * (1.0 + 1e-9) {
        Ok(())
    } else {
        Err(PicardError::BallViolation(format!(
            "series curve reaches {sampled} from y0, outside b = {}",
            problem.b
        )))
    }
}

/// Certify membership of a curve in `H_0`: the centre value is `y0` and
/// the whole curve stays within the b-ball.
pub fn certify_h0(problem: &IVProblem, y: &Curve) -> Result<(), PicardError> {
    match y {
        Curve::Grid(g) => {
            let centre = g.center_value();
            let centre_gap = problem.norm.eval(&vec_sub(centre, &problem.y0));
            if centre_gap > 1e-12 * (1.0 + problem.norm.eval(&problem.y0)) {
                return Err(PicardError::Domain(format!(
                    "curve centre differs from y0 by {centre_gap}"
                )));
            }
            for v in &g.values {
                let r = problem.ball_radius(v);
                if r > problem.b * (1.0 + 1e-9) {
                    return Err(PicardError::BallViolation(format!(
                        "grid sample reaches {r} from y0, outside b = {}",
                        problem.b
                    )));
                }
            }
            Ok(())
        }
        Curve::Poly(p) => {
            let centre = p.center_value();
            let centre_gap = problem.norm.eval(&vec_sub(&centre, &problem.y0));
            if centre_gap > 1e-12 * (1.0 + problem.norm.eval(&problem.y0)) {
                return Err(PicardError::Domain(format!(
                    "curve centre differs from y0 by {centre_gap}"
                )));
            }
            poly_ball_check(problem, p)
        }
    }
}

/// Apply the Picard operator on the series backend (polynomial fields
/// only): exact termwise composition and integration, truncated at `k_max`
/// with the discarded mass recorded in the tails. The image's b-ball
/// membership is certified (majorant first, sampled fallback).
pub fn picard_apply_poly(
    problem: &IVProblem,
    y: &PolyFunction,
    k_max: usize,
) -> Result<PolyFunction, PicardError> {
    let field = problem
        .rhs
        .as_poly()
        .ok_or(PicardError::PolynomialRequired)?;
    let image = y.picard_image(field, &problem.y0, k_max);
    poly_ball_check(problem, &image)?;
    Ok(image)
}

/// Backend-dispatched Picard application.
pub fn picard_apply(problem: &IVProblem, y: &Curve, k_max: usize) -> Result<Curve, PicardError> {
    match y {
        Curve::Grid(g) => Ok(Curve::Grid(picard_apply_grid(problem, g)?)),
        Curve::Poly(p) => Ok(Curve::Poly(picard_apply_poly(problem, p, k_max)?)),
    }
}

// --- weighted metrics ---

fn metric_grid(
    norm: NormKind,
    x: &GridFunction,
    y: &GridFunction,
    j: usize,
) -> Result<f64, PicardError> {
    if !x.grid.matches(&y.grid) {
        return Err(PicardError::GridMismatch(
            "metric of curves on different grids".into(),
        ));
    }
    let grid = x.grid;
    let center = grid.center_index();
    let k_min = if j == 0 {
        1
    } else {
        (grid.n_half / GRID_TRIM_DENOM).max(1)
    };
    let q_at = |i: usize| -> f64 {
        let dt = grid.offset(i).abs();
        let diff = vec_sub(&x.values[i], &y.values[i]);
        norm.eval(&diff) / dt.powi(j as i32)
    };
    let mut trusted = 0.0f64;
    let mut inner_max = 0.0f64;
    for i in 0..grid.len() {
        let k = (i as i64 - center as i64).unsigned_abs() as usize;
        if k == 0 {
            continue;
        }
        let q = q_at(i);
        if k >= k_min {
            trusted = trusted.max(q);
        } else {
            inner_max = inner_max.max(q);
        }
    }
    if j >= 1 && k_min > 2 {
        // membership heuristic: a quotient that dominates the trusted
        // region and keeps growing toward the centre means the difference
        // does not vanish to order j there.
        let q1 = q_at(center + 1).max(q_at(center - 1));
        let q2 = q_at(center + 2).max(q_at(center - 2));
        if inner_max > GRID_GROWTH_FACTOR * trusted && q1 > 1.9 * q2 {
            return Err(PicardError::NotInLevel { level: j });
        }
    }
    Ok(trusted)
}

fn metric_poly(
    norm: NormKind,
    x: &PolyFunction,
    y: &PolyFunction,
    j: usize,
) -> Result<f64, PicardError> {
    if x.center != y.center || x.radius != y.radius {
        return Err(PicardError::GridMismatch(
            "metric of series on different intervals".into(),
        ));
    }
    let diff = x.series.sub(&y.series);
    if j > K_MAX_DEFAULT {
        // tails only vanish beyond the truncation order; deeper weights are
        // sound only for an exactly zero difference
        let zero = diff.tail_sum() == 0.0
            && diff
                .components
                .iter()
                .all(|c| c.coeffs.iter().all(|v| *v == 0.0));
        return if zero {
            Ok(0.0)
        } else {
            Err(PicardError::Domain(format!(
                "weighted level {j} exceeds the truncation order {K_MAX_DEFAULT}"
            )))
        };
    }
    let scale = diff
        .components
        .iter()
        .map(PowerSeries::coeff_scale)
        .fold(0.0f64, f64::max)
        .max(1e-300);
    let shifted: Option<Vec<PowerSeries<f64>>> = diff
        .components
        .iter()
        .map(|c| c.shift_down(j, COEFF_ZERO_TOL * scale))
        .collect();
    let shifted = shifted.ok_or(PicardError::NotInLevel { level: j })?;
    let radius = x.radius;
    let sampled = sup_scan(
        |dt| {
            let v: Vec<f64> = shifted.iter().map(|c| c.eval(dt)).collect();
            norm.eval(&v)
        },
        -radius,
        radius,
        1024,
    );
    // tails vanish to order above any level in use, so their quotient
    // contribution is bounded by tail / radius^j
    let tail: f64 = shifted.iter().map(|c| c.tail).sum();
    Ok(sampled + tail / radius.powi(j as i32))
}

/// The weighted metric
/// `d_j(x, y) = sup_{t ≠ t0} ‖x(t) − y(t)‖ / |t − t0|^j`; `j = 0` is the
/// uniform metric.
///
/// Returns [`PicardError::NotInLevel`] when the difference fails to vanish
/// to order `j` at the centre (detected exactly on the series backend, by
/// the growth heuristic on the grid backend).
pub fn metric_dj(problem: &IVProblem, x: &Curve, y: &Curve, j: usize) -> Result<f64, PicardError> {
    match (x, y) {
        (Curve::Grid(a), Curve::Grid(b)) => metric_grid(problem.norm, a, b, j),
        (Curve::Poly(a), Curve::Poly(b)) => metric_poly(problem.norm, a, b, j),
        _ => Err(PicardError::GridMismatch(
            "metric of curves from different backends".into(),
        )),
    }
}

/// A measured defect constant
/// `C_j(f, y) = sup_{t≠t0} ‖Py(t) − y(t)‖/|t−t0|^j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DefectConstant {
    pub level: usize,
    pub value: f64,
}

/// Measure the defect constant of a curve at level `j`. A curve belongs to
/// level `j` exactly when this is finite; non-membership surfaces as
/// [`PicardError::NotInLevel`].
pub fn picard_defect(
    problem: &IVProblem,
    y: &Curve,
    j: usize,
    k_max: usize,
) -> Result<DefectConstant, PicardError> {
    let image = picard_apply(problem, y, k_max)?;
    let value = metric_dj(problem, &image, y, j)?;
    Ok(DefectConstant { level: j, value })
}

/// `(C_j(f,x) + C_j(f,y)) (1 + L^j (e^{Lα} − 1))`, with the defects
/// measured on the given curves. Callers assert `d_j(x, y)` stays below it.
pub fn finiteness_bound(
    problem: &IVProblem,
    x: &Curve,
    y: &Curve,
    j: usize,
    k_max: usize,
) -> Result<f64, PicardError> {
    let cx = picard_defect(problem, x, j, k_max)?.value;
    let cy = picard_defect(problem, y, j, k_max)?.value;
    Ok(finiteness_bound_from_defects(problem, cx, cy, j))
}

// --- the integral operator and its resolvent ---

/// `n`-fold arc-length integral operator: `(Kg)(t) = ∫_{t0}^{t} g(s)|ds|`
/// applied `n` times by cumulative trapezoid. In closed form
/// `(K^n g)(t) = ∫_{t0}^{t} g(s) |t−s|^{n−1}/(n−1)! |ds|`, so `K^n 1`
/// is `|t−t0|^n/n!`.
pub fn apply_k(g: &ScalarGrid, n: usize) -> ScalarGrid {
    let mut values = g.values.clone();
    for _ in 0..n {
        values = cumulative_trapezoid_abs(&g.grid, &values);
    }
    ScalarGrid {
        grid: g.grid,
        values,
    }
}

/// The resolvent `(Id − LK)^{-1}`:
/// `(R_L g)(t) = g(t) + L ∫_{t0}^{t} g(s) e^{L|t−s|} |ds|`.
///
/// The kernel factors as `e^{L|t−t0|}·e^{−L|s−t0|}` along each
/// half-interval, so one weighted cumulative pass per side suffices.
pub fn apply_resolvent(g: &ScalarGrid, lipschitz: f64) -> ScalarGrid {
    let grid = g.grid;
    let center = grid.center_index();
    let h = grid.step();
    let mut values = g.values.clone();
    // right half: |t−s| = t − s for t0 ≤ s ≤ t
    let w_right = |idx: usize| g.values[idx] * (-lipschitz * grid.offset(idx)).exp();
    let mut acc = 0.0;
    for i in center..grid.len() - 1 {
        acc += 0.5 * h * (w_right(i) + w_right(i + 1));
        values[i + 1] += lipschitz * (lipschitz * grid.offset(i + 1)).exp() * acc;
    }
    // left half: |t−s| = s − t for t ≤ s ≤ t0, arc-length measure
    let w_left = |idx: usize| g.values[idx] * (lipschitz * grid.offset(idx)).exp();
    acc = 0.0;
    for i in (1..=center).rev() {
        acc += 0.5 * h * (w_left(i) + w_left(i - 1));
        values[i - 1] += lipschitz * (-lipschitz * grid.offset(i - 1)).exp() * acc;
    }
    ScalarGrid { grid, values }
}

// ---------------------------------------------------------------------------
// Chain wiring and the solver
// ---------------------------------------------------------------------------

/// Adapter exposing the Picard operator and the weighted metrics to the
/// chain engine.
pub struct PicardChain<'a> {
    pub problem: &'a IVProblem,
    pub k_max: usize,
}

impl ChainMap for PicardChain<'_> {
    type Point = Curve;

    fn metric(&self, level: usize, x: &Curve, y: &Curve) -> Result<f64, ChainError> {
        metric_dj(self.problem, x, y, level).map_err(ChainError::from)
    }

    fn apply(&self, x: &Curve) -> Result<Curve, ChainError> {
        picard_apply(self.problem, x, self.k_max).map_err(ChainError::from)
    }
}

/// The chain description of the Picard operator: `α_j ≡ α`, `κ_j = L/j`
/// (monotone decreasing tail, so the limsup condition is certified by the
/// first level with `αL/j < 1`).
pub fn picard_chain_spec(problem: &IVProblem) -> ChainSpec {
    picard_chain_spec_scaled(problem, 1.0)
}

/// Same, with the contraction factors multiplied by `kappa_scale`. Scales
/// other than 1 deliberately break the bound bookkeeping; this is the
/// fault-injection hook used to verify that bound violations are detected.
pub fn picard_chain_spec_scaled(problem: &IVProblem, kappa_scale: f64) -> ChainSpec {
    ChainSpec::new(
        Sequence::Constant(problem.alpha),
        Sequence::Harmonic {
            scale: problem.lipschitz * kappa_scale,
        },
        TailKind::MonotoneDecreasing { from: 1 },
    )
}

/// Reference against which iteration errors are measured.
#[derive(Clone)]
pub enum Reference {
    /// Known exact solution.
    ClosedForm(Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>),
    /// Iterate `extra` steps beyond `n_max` and use the deepest curve.
    HighIterate { extra: usize },
}

impl std::fmt::Debug for Reference {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Reference::ClosedForm(_) => write!(f, "Reference::ClosedForm"),
            Reference::HighIterate { extra } => write!(f, "Reference::HighIterate({extra})"),
        }
    }
}

/// Options for [`solve_ivp`].
#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub backend: Backend,
    pub reference: Reference,
    pub name: Option<String>,
    /// Fault-injection scale on the contraction factors (1.0 = honest).
    pub kappa_scale: f64,
}

impl SolveOptions {
    pub fn poly() -> Self {
        SolveOptions {
            backend: Backend::default_poly(),
            reference: Reference::HighIterate { extra: 8 },
            name: None,
            kappa_scale: 1.0,
        }
    }

    pub fn grid() -> Self {
        SolveOptions {
            backend: Backend::default_grid(),
            reference: Reference::HighIterate { extra: 8 },
            name: None,
            kappa_scale: 1.0,
        }
    }
}

/// Uniform distance from a curve to a reference closure, over the curve's
/// own domain.
pub fn distance_to_closure(
    problem: &IVProblem,
    curve: &Curve,
    reference: &(dyn Fn(f64) -> Vec<f64> + Send + Sync),
) -> f64 {
    match curve {
        Curve::Grid(g) => {
            let mut sup = 0.0f64;
            for i in 0..g.grid.len() {
                let t = g.grid.node(i);
                let d = vec_sub(&g.values[i], &reference(t));
                sup = sup.max(problem.norm.eval(&d));
            }
            sup
        }
        Curve::Poly(p) => {
            let tail: f64 = p.tail_sum();
            sup_scan(
                |dt| {
                    let t = p.center + dt;
                    let v = p.eval(t);
                    let d = vec_sub(&v, &reference(t));
                    problem.norm.eval(&d)
                },
                -p.radius,
                p.radius,
                2048,
            ) + tail
        }
    }
}

/// Run `n_max` Picard iterations from `start` (default: the constant curve
/// `y ≡ y0`), recording per-iteration uniform distances to the reference,
/// the factorial bound in both its forms, and the base-level defects.
pub fn solve_ivp(
    problem: &IVProblem,
    start: Option<Curve>,
    n_max: usize,
    opts: &SolveOptions,
) -> Result<ConvergenceReport, PicardError> {
    let k_max = match opts.backend {
        Backend::Poly { k_max } => k_max,
        Backend::Grid { .. } => K_MAX_DEFAULT,
    };
    if matches!(opts.backend, Backend::Poly { .. }) && problem.rhs.as_poly().is_none() {
        return Err(PicardError::PolynomialRequired);
    }
    let start = start.unwrap_or_else(|| Curve::constant_start(problem, opts.backend));
    certify_h0(problem, &start)?;
    let system = PicardChain { problem, k_max };
    let spec = picard_chain_spec_scaled(problem, opts.kappa_scale);

    let total_steps = match &opts.reference {
        Reference::ClosedForm(_) => n_max,
        Reference::HighIterate { extra } => n_max + extra,
    };
    let trace = chain::iterate(&spec, &system, start, StopRule::max_steps(total_steps), 0)?;

    // iterates, padded with the fixed point if the trace stopped early
    let curve_at = |n: usize| -> &Curve { &trace.points[n.min(trace.points.len() - 1)] };

    let observe = |c: &Curve| -> Result<f64, PicardError> {
        match &opts.reference {
            Reference::ClosedForm(f) => Ok(distance_to_closure(problem, c, f.as_ref())),
            Reference::HighIterate { .. } => metric_dj(problem, c, curve_at(total_steps), 0),
        }
    };
    let reference_kind = match &opts.reference {
        Reference::ClosedForm(_) => ReferenceKind::ClosedForm,
        Reference::HighIterate { .. } => ReferenceKind::HighIterate,
    };

    let first_step = trace.step_distances[0].unwrap_or(0.0);
    let mut warnings = Vec::new();
    let mut rows = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let curve = curve_at(n);
        let observed = observe(curve)?;
        let chain_bound = match trace.bounds.get(n).copied().flatten() {
            Some(b) => b,
            None => spec.a_priori_bound(0, n, first_step, trace.series_constant)?,
        };
        // base-level defect: the recorded step distance, or one extra
        // application for rows past the end of the trace
        let defect = match trace.step_distances.get(n).copied().flatten() {
            Some(d) => d,
            None => {
                let image = picard_apply(problem, curve, k_max)?;
                metric_dj(problem, &image, curve, 0)?
            }
        };
        if n == n_max {
            if let Curve::Grid(g) = curve {
                if g.clamped > 0 {
                    warnings.push(format!(
                        "{} grid samples clamped onto the b-ball",
                        g.clamped
                    ));
                }
            }
        }
        rows.push(ConvergenceRow {
            n,
            observed,
            factorial_bound: factorial_error_bound(problem, n),
            chain_bound,
            geometric_bound: crate::util::geometric_bound_from(
                problem.alpha * problem.lipschitz,
                n,
                first_step,
            ),
            defect,
        });
    }

    Ok(ConvergenceReport {
        name: opts.name.clone(),
        backend: match opts.backend {
            Backend::Grid { .. } => "grid".into(),
            Backend::Poly { .. } => "poly".into(),
        },
        dim: problem.dim(),
        alpha: problem.alpha,
        lipschitz: problem.lipschitz,
        field_bound: problem.field_bound,
        grid_n: match opts.backend {
            Backend::Grid { n_half } => Some(n_half),
            _ => None,
        },
        series_order: match opts.backend {
            Backend::Poly { k_max } => Some(k_max),
            _ => None,
        },
        reference: reference_kind,
        first_step,
        rows,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::util::factorial;
    use approx::assert_relative_eq;

    fn exp_problem() -> IVProblem {
        // y' = y on |t| ≤ 1, |y − 1| ≤ e − 1, alpha declared 1:
        // the rectangle hugs the solution and M = e is its true field sup,
        // while the generic min(a, b/M) would shrink the interval.
        let b = std::f64::consts::E - 1.0;
        IVProblem::with_declared_alpha(
            0.0,
            vec![1.0],
            1.0,
            b,
            Rhs::Poly(PolyMap::linear_1d(1.0)),
            1.0,
            std::f64::consts::E,
            1.0,
            NormKind::Euclidean,
        )
        .unwrap()
    }

    fn half_problem() -> IVProblem {
        // y' = y with alpha = 0.5 derived from a = 0.5
        IVProblem::new(
            0.0,
            vec![1.0],
            0.5,
            2.0,
            Rhs::Poly(PolyMap::linear_1d(1.0)),
            1.0,
            3.0,
            NormKind::Euclidean,
        )
        .unwrap()
    }

    #[test]
    fn compute_alpha_examples() {
        assert_relative_eq!(compute_alpha(1.0, 1.0, 2.0).unwrap(), 0.5);
        assert_relative_eq!(compute_alpha(0.3, 4.0, 10.0).unwrap(), 0.3);
        assert_relative_eq!(compute_alpha(2.0, 2.0, 1.0).unwrap(), 2.0);
        assert!(compute_alpha(-1.0, 1.0, 1.0).is_err());
        assert!(compute_alpha(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn estimate_constants_linear_field() {
        // y' = y on |t| ≤ 1, |y − 1| ≤ 1: sup |y| = 2, Lipschitz 1
        let rhs = Rhs::Poly(PolyMap::linear_1d(1.0));
        let (l, m) =
            IVProblem::estimate_constants(0.0, &[1.0], 1.0, 1.0, &rhs, NormKind::Euclidean, 40)
                .unwrap();
        assert_relative_eq!(m, 2.0 * ESTIMATE_SAFETY, epsilon = 1e-9);
        assert_relative_eq!(l, ESTIMATE_SAFETY, epsilon = 1e-9);
    }

    #[test]
    fn estimate_constants_sine_field() {
        let rhs = Rhs::Func(Arc::new(|_t, y: &[f64]| vec![y[0].sin()]));
        let (l, m) =
            IVProblem::estimate_constants(0.0, &[1.0], 1.0, 1.0, &rhs, NormKind::Euclidean, 80)
                .unwrap();
        // sup |sin| on [0, 2] is 1 (attained near pi/2), |cos| ≤ 1
        assert!(m > 0.98 && m <= ESTIMATE_SAFETY + 1e-9, "m = {m}");
        assert!(l > 0.95 && l <= ESTIMATE_SAFETY + 1e-9, "l = {l}");
    }

    #[test]
    fn zero_field_degenerates_to_full_interval() {
        let rhs = Rhs::Poly(PolyMap::new(1, vec![vec![]]));
        let p =
            IVProblem::new(0.0, vec![2.0], 1.5, 1.0, rhs, 0.0, 0.0, NormKind::Euclidean).unwrap();
        assert_eq!(p.alpha, 1.5);
    }

    #[test]
    fn declared_m_zero_with_nonzero_field_is_rejected() {
        let rhs = Rhs::Poly(PolyMap::linear_1d(1.0));
        assert!(
            IVProblem::new(0.0, vec![1.0], 1.0, 1.0, rhs, 0.0, 0.0, NormKind::Euclidean).is_err()
        );
    }

    #[test]
    fn validate_sampled_accepts_honest_constants() {
        half_problem().validate_sampled(32, 1e-9).unwrap();
    }

    #[test]
    fn validate_sampled_rejects_understated_m() {
        let rhs = Rhs::Poly(PolyMap::linear_1d(1.0));
        let p =
            IVProblem::new(0.0, vec![1.0], 0.5, 2.0, rhs, 1.0, 0.5, NormKind::Euclidean).unwrap();
        assert!(p.validate_sampled(32, 1e-3).is_err());
    }

    #[test]
    fn picard_apply_poly_linear_examples() {
        let p = half_problem();
        let one = PolyFunction::constant(0.0, 0.5, &[1.0]);
        let img = picard_apply_poly(&p, &one, 32).unwrap();
        assert_eq!(img.series.components[0].coeffs, vec![1.0, 1.0]);
        let img2 = picard_apply_poly(&p, &img, 32).unwrap();
        assert_eq!(img2.series.components[0].coeffs, vec![1.0, 1.0, 0.5]);
    }

    #[test]
    fn picard_apply_zero_field_returns_constant() {
        let rhs = Rhs::Poly(PolyMap::new(1, vec![vec![]]));
        let p =
            IVProblem::new(0.0, vec![3.0], 1.0, 1.0, rhs, 0.0, 0.0, NormKind::Euclidean).unwrap();
        let start = Curve::constant_start(&p, Backend::Grid { n_half: 64 });
        let img = picard_apply(&p, &start, 32).unwrap();
        match img {
            Curve::Grid(g) => assert!(g.values.iter().all(|v| v[0] == 3.0)),
            Curve::Poly(_) => panic!("expected grid curve"),
        }
    }

    #[test]
    fn picard_apply_grid_exact_for_low_degree() {
        // integrand of P(1) is constant, of P(1+t) linear: trapezoid exact
        let p = half_problem();
        let grid = p.grid(128);
        let one = GridFunction::constant(grid, &[1.0]);
        let img = picard_apply_grid(&p, &one).unwrap();
        for i in 0..grid.len() {
            assert_relative_eq!(img.values[i][0], 1.0 + grid.offset(i), epsilon = 1e-14);
        }
        let img2 = picard_apply_grid(&p, &img).unwrap();
        for i in 0..grid.len() {
            let t = grid.offset(i);
            assert_relative_eq!(img2.values[i][0], 1.0 + t + 0.5 * t * t, epsilon = 1e-13);
        }
    }

    #[test]
    fn metric_examples_on_both_backends() {
        let p = half_problem();
        // x = 1 + t, y ≡ 1 on alpha = 0.5
        let x =
            PolyFunction::from_components(0.0, 0.5, vec![PowerSeries::from_coeffs(vec![1.0, 1.0])]);
        let y = PolyFunction::constant(0.0, 0.5, &[1.0]);
        assert_relative_eq!(
            metric_poly(p.norm, &x, &y, 0).unwrap(),
            0.5,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            metric_poly(p.norm, &x, &y, 1).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        assert_eq!(metric_poly(p.norm, &x, &x, 3).unwrap(), 0.0);

        let grid = p.grid(256);
        let xg = GridFunction::from_fn(grid, |t| vec![1.0 + t]);
        let yg = GridFunction::constant(grid, &[1.0]);
        assert_relative_eq!(
            metric_grid(p.norm, &xg, &yg, 0).unwrap(),
            0.5,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            metric_grid(p.norm, &xg, &yg, 1).unwrap(),
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn metric_poly_signals_non_membership() {
        // difference t has a nonzero coefficient below order 2
        let x =
            PolyFunction::from_components(0.0, 0.5, vec![PowerSeries::from_coeffs(vec![1.0, 1.0])]);
        let y = PolyFunction::constant(0.0, 0.5, &[1.0]);
        assert!(matches!(
            metric_poly(NormKind::Euclidean, &x, &y, 2),
            Err(PicardError::NotInLevel { level: 2 })
        ));
    }

    #[test]
    fn metric_grid_flags_growth_toward_centre() {
        let grid = Grid::new(0.0, 1.0, 512);
        // difference |t|: fine at level 1, blows up at level 2
        let x = GridFunction::from_fn(grid, |t| vec![t.abs()]);
        let y = GridFunction::constant(grid, &[0.0]);
        assert!(metric_grid(NormKind::Euclidean, &x, &y, 1).is_ok());
        assert!(matches!(
            metric_grid(NormKind::Euclidean, &x, &y, 2),
            Err(PicardError::NotInLevel { level: 2 })
        ));
    }

    #[test]
    fn defect_examples_linear_field() {
        let p = half_problem();
        let x = Curve::Poly(PolyFunction::from_components(
            0.0,
            0.5,
            vec![PowerSeries::from_coeffs(vec![1.0, 1.0])],
        ));
        // P(1+t) − (1+t) = t²/2: level-1 quotient sup = α/2, level-2 = 1/2
        assert_relative_eq!(
            picard_defect(&p, &x, 1, 32).unwrap().value,
            0.25,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            picard_defect(&p, &x, 2, 32).unwrap().value,
            0.5,
            epsilon = 1e-12
        );
    }

    #[test]
    fn h0_certification_accepts_iterates_and_rejects_escapees() {
        let p = half_problem();
        let start = Curve::constant_start(&p, Backend::default_poly());
        certify_h0(&p, &start).unwrap();
        // wrong centre value
        let off = Curve::Poly(PolyFunction::constant(0.0, 0.5, &[1.5]));
        assert!(certify_h0(&p, &off).is_err());
        // leaves the ball: 1 + 6t reaches 4 at t = 0.5 > b = 2
        let wild = Curve::Poly(PolyFunction::from_components(
            0.0,
            0.5,
            vec![PowerSeries::from_coeffs(vec![1.0, 6.0])],
        ));
        assert!(matches!(
            certify_h0(&p, &wild),
            Err(PicardError::BallViolation(_))
        ));
    }

    #[test]
    fn poly_ball_check_uses_sampling_when_majorant_is_coarse() {
        // (1 − t)(1 + t)-style cancellation: majorant 1 + 0.5 + ... can
        // exceed a tight ball while the true sup stays inside
        let p = IVProblem::new(
            0.0,
            vec![0.0],
            0.5,
            0.3,
            Rhs::Poly(PolyMap::new(1, vec![vec![]])),
            0.0,
            0.0,
            NormKind::Euclidean,
        )
        .unwrap();
        // y(t) = t − t², sup on [−0.5, 0.5] is 0.75 at t = −0.5 → violation
        let escapes = Curve::Poly(PolyFunction::from_components(
            0.0,
            0.5,
            vec![PowerSeries::from_coeffs(vec![0.0, 1.0, -1.0])],
        ));
        assert!(certify_h0(&p, &escapes).is_err());
        // y(t) = 0.4(t − t²)·... scaled to fit: sup 0.3 exactly at the edge
        let fits = Curve::Poly(PolyFunction::from_components(
            0.0,
            0.5,
            vec![PowerSeries::from_coeffs(vec![0.0, 0.4, -0.4])],
        ));
        // majorant = 0.4·0.5 + 0.4·0.25 = 0.3 ≤ b: accepted without sampling
        certify_h0(&p, &fits).unwrap();
    }

    #[test]
    fn defect_of_near_solution_is_tiny() {
        let p = half_problem();
        let coeffs: Vec<f64> = (0..=25).map(|m| 1.0 / factorial(m)).collect();
        let x = Curve::Poly(PolyFunction::from_components(
            0.0,
            0.5,
            vec![PowerSeries::from_coeffs(coeffs)],
        ));
        let c0 = picard_defect(&p, &x, 0, 40).unwrap();
        assert!(c0.value < 1e-20, "defect {}", c0.value);
    }

    #[test]
    fn apply_k_closed_forms() {
        let grid = Grid::new(0.0, 1.0, 4096);
        let one = ScalarGrid::constant(grid, 1.0);
        let k1 = apply_k(&one, 1);
        let k3 = apply_k(&one, 3);
        let mut worst1 = 0.0f64;
        let mut worst3 = 0.0f64;
        for i in 0..grid.len() {
            let t = grid.offset(i).abs();
            worst1 = worst1.max((k1.values[i] - t).abs());
            worst3 = worst3.max((k3.values[i] - t * t * t / 6.0).abs());
        }
        assert!(worst1 < 1e-13, "K 1 error {worst1}");
        assert!(worst3 < 1e-6, "K^3 1 error {worst3}");
        let zero = ScalarGrid::constant(grid, 0.0);
        assert_eq!(apply_k(&zero, 2).sup_abs(), 0.0);
    }

    #[test]
    fn resolvent_of_one_is_exponential() {
        let grid = Grid::new(0.0, 1.0, 4096);
        let one = ScalarGrid::constant(grid, 1.0);
        let r = apply_resolvent(&one, 1.0);
        let mut worst = 0.0f64;
        for i in 0..grid.len() {
            let t = grid.offset(i).abs();
            worst = worst.max((r.values[i] - t.exp()).abs());
        }
        assert!(worst < 1e-6, "resolvent error {worst}");
    }

    #[test]
    fn resolvent_inverts_id_minus_lk() {
        let grid = Grid::new(0.0, 1.0, 4096);
        let g = ScalarGrid::from_fn(grid, f64::cos);
        let kg = apply_k(&g, 1);
        let lhs = ScalarGrid {
            grid,
            values: g
                .values
                .iter()
                .zip(&kg.values)
                .map(|(a, b)| a - b)
                .collect(),
        };
        let back = apply_resolvent(&lhs, 1.0);
        assert!(
            back.sup_abs_diff(&g) < 1e-7,
            "identity defect {}",
            back.sup_abs_diff(&g)
        );
        let zero = ScalarGrid::constant(grid, 0.0);
        assert_eq!(apply_resolvent(&zero, 1.0).sup_abs(), 0.0);
    }

    #[test]
    fn factorial_bound_values() {
        let p = exp_problem();
        let e = std::f64::consts::E;
        // alpha = L = 1, M = e: bound(5) = e·e/120
        assert_relative_eq!(factorial_error_bound(&p, 5), e * e / 120.0, epsilon = 1e-12);
        assert_relative_eq!(factorial_error_bound(&p, 0), e * e, epsilon = 1e-12);
    }

    #[test]
    fn factorial_bound_degenerate_field() {
        let rhs = Rhs::Poly(PolyMap::new(1, vec![vec![]]));
        let p =
            IVProblem::new(0.0, vec![1.0], 1.0, 1.0, rhs, 0.0, 0.0, NormKind::Euclidean).unwrap();
        assert_eq!(factorial_error_bound(&p, 0), 0.0);
        assert_eq!(factorial_error_bound(&p, 3), 0.0);
    }

    #[test]
    fn factorial_bound_vanishing_rate_keeps_only_the_first_term() {
        // constant field: L = 0 but M > 0, so the bound is M at n = 0 and
        // zero afterwards; the first Picard sweep already lands on the
        // solution y0 + c·t
        let rhs = Rhs::Poly(PolyMap::new(
            1,
            vec![vec![crate::series::Monomial {
                coeff: 1.0,
                t_pow: 0,
                y_pows: vec![0],
            }]],
        ));
        let p =
            IVProblem::new(0.0, vec![1.0], 0.5, 1.0, rhs, 0.0, 1.0, NormKind::Euclidean).unwrap();
        assert_eq!(factorial_error_bound(&p, 0), 1.0);
        assert_eq!(factorial_error_bound(&p, 1), 0.0);
        let report = solve_ivp(&p, None, 3, &SolveOptions::poly()).unwrap();
        for row in report.rows.iter().skip(1) {
            assert_eq!(row.observed, 0.0, "n = {}", row.n);
        }
    }

    #[test]
    fn finiteness_bound_explicit_pair() {
        let p = half_problem();
        let x = Curve::Poly(PolyFunction::from_components(
            0.0,
            0.5,
            vec![PowerSeries::from_coeffs(vec![1.0, 1.0])],
        ));
        let y = Curve::Poly(PolyFunction::constant(0.0, 0.5, &[1.0]));
        // C_0(f,x) = α²/2 = 0.125, C_0(f,y) = α = 0.5, bound = 0.625·e^0.5
        let bound = finiteness_bound(&p, &x, &y, 0, 32).unwrap();
        assert_relative_eq!(bound, 0.625 * 0.5f64.exp(), epsilon = 1e-12);
        assert!(metric_dj(&p, &x, &y, 0).unwrap() <= bound);
    }

    #[test]
    fn solve_linear_problem_matches_exp_tail() {
        let p = exp_problem();
        let mut opts = SolveOptions::poly();
        opts.reference = Reference::ClosedForm(Arc::new(|t: f64| vec![t.exp()]));
        let report = solve_ivp(&p, None, 8, &opts).unwrap();
        // oracle: d_0(y^n, exp) = sum_{k>n} 1/k!, summed to 40 terms
        for row in &report.rows {
            let tail: f64 = (row.n + 1..row.n + 40).map(|k| 1.0 / factorial(k)).sum();
            assert_relative_eq!(row.observed, tail, epsilon = 1e-12);
            assert!(row.observed <= row.factorial_bound);
        }
        assert_relative_eq!(
            report.rows[3].observed,
            0.05161516179237857,
            epsilon = 1e-12
        );
    }

    #[test]
    fn solve_zero_field_converges_at_once() {
        let rhs = Rhs::Poly(PolyMap::new(1, vec![vec![]]));
        let p =
            IVProblem::new(0.0, vec![1.0], 1.0, 1.0, rhs, 0.0, 0.0, NormKind::Euclidean).unwrap();
        let report = solve_ivp(&p, None, 4, &SolveOptions::poly()).unwrap();
        for row in &report.rows {
            assert_eq!(row.observed, 0.0);
        }
    }

    #[test]
    fn solve_gaussian_against_closed_form() {
        // y' = -2ty, closed form e^{-t²}
        let rhs = Rhs::Poly(PolyMap::new(
            1,
            vec![vec![crate::series::Monomial {
                coeff: -2.0,
                t_pow: 1,
                y_pows: vec![1],
            }]],
        ));
        let p =
            IVProblem::new(0.0, vec![1.0], 0.5, 1.0, rhs, 1.0, 2.0, NormKind::Euclidean).unwrap();
        assert_relative_eq!(p.alpha, 0.5);
        let mut opts = SolveOptions::poly();
        opts.reference = Reference::ClosedForm(Arc::new(|t: f64| vec![(-t * t).exp()]));
        let report = solve_ivp(&p, None, 8, &opts).unwrap();
        let row = &report.rows[8];
        assert!(
            row.observed <= row.factorial_bound,
            "{} > {}",
            row.observed,
            row.factorial_bound
        );
        assert!(row.observed < 1e-6);
    }

    #[test]
    fn fault_injection_shrinks_chain_bounds_below_truth() {
        let p = exp_problem();
        let mut opts = SolveOptions::poly();
        opts.reference = Reference::ClosedForm(Arc::new(|t: f64| vec![t.exp()]));
        opts.kappa_scale = 0.1;
        let report = solve_ivp(&p, None, 6, &opts).unwrap();
        assert!(
            report.worst_chain_ratio() > 1.0,
            "corrupted bounds must be violated"
        );
    }
}
