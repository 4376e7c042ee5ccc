//! Generic fixed-point engine for a map contracting along a decreasing
//! chain of metric spaces.
//!
//! The chain data are two positive sequences: comparison factors `α_j`
//! relating consecutive metrics (`d_j ≤ α_{j+1} d_{j+1}` on `H_{j+1}`) and
//! contraction factors `κ_j` (`d_{j+1}(Px, Py) ≤ κ_{j+1} d_j(x, y)` on
//! `H_j`). Under `limsup_j α_j κ_j < 1` the map has a unique fixed point
//! `x_∞` and the iterates satisfy
//!
//! ```text
//! d_j(x_∞, x_n) ≤ C · Π_{k=j+1}^{n} α_k κ_k · d_j(x_{j+1}, x_j),
//! C = sup_n Σ_{m≥0} Π_{k=n+1}^{n+m} α_k κ_k.
//! ```
//!
//! The `limsup` condition is asymptotic and cannot be verified by sampling
//! finitely many levels, so a [`ChainSpec`] carries a declared [`TailKind`]
//! — an analytic model of the tail of `(α_j κ_j)` — and every certification
//! and truncation bound is derived from that model. All series and product
//! computations round "up": the returned constants over-approximate the
//! true ones, so downstream inequalities stay valid bounds.

use crate::error::ChainError;
use std::fmt;
use std::sync::Arc;

/// A positive sequence indexed from level 1.
#[derive(Clone)]
pub enum Sequence {
    /// `s_j = value` for every level.
    Constant(f64),
    /// `s_j = scale / j` — the shape of the Picard contraction factors.
    Harmonic { scale: f64 },
    /// Arbitrary closed form.
    Formula(Arc<dyn Fn(usize) -> f64 + Send + Sync>),
}

impl Sequence {
    pub fn value(&self, level: usize) -> f64 {
        debug_assert!(level >= 1, "sequences are indexed from level 1");
        match self {
            Sequence::Constant(v) => *v,
            Sequence::Harmonic { scale } => scale / level as f64,
            Sequence::Formula(f) => f(level),
        }
    }
}

impl fmt::Debug for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sequence::Constant(v) => write!(f, "Constant({v})"),
            Sequence::Harmonic { scale } => write!(f, "Harmonic({scale}/j)"),
            Sequence::Formula(_) => write!(f, "Formula(..)"),
        }
    }
}

/// Declared tail behaviour of the products `α_j κ_j`, from which the
/// `limsup` condition is certified analytically.
#[derive(Clone)]
pub enum TailKind {
    /// `α_j κ_j` equals `value` for all `j ≥ from`.
    EventuallyConstant { from: usize, value: f64 },
    /// `α_j κ_j` is nonincreasing for `j ≥ from`; the supremum of any tail
    /// beyond `from` is its first term.
    MonotoneDecreasing { from: usize },
    /// Caller-supplied closed form: `tail_sup(j)` must be an upper bound
    /// for `sup_{k ≥ j} α_k κ_k`, valid for `j ≥ from`.
    Explicit {
        from: usize,
        tail_sup: Arc<dyn Fn(usize) -> f64 + Send + Sync>,
    },
}

impl fmt::Debug for TailKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TailKind::EventuallyConstant { from, value } => {
                write!(f, "EventuallyConstant(from {from}, value {value})")
            }
            TailKind::MonotoneDecreasing { from } => {
                write!(f, "MonotoneDecreasing(from {from})")
            }
            TailKind::Explicit { from, .. } => write!(f, "Explicit(from {from})"),
        }
    }
}

/// Certificate that `limsup_j α_j κ_j < 1` under the declared tail model.
#[derive(Debug, Clone, Copy)]
pub struct LimsupCertificate {
    /// Level from which the tail supremum is witnessed below one.
    pub witness: usize,
    /// The certified bound `sup_{k ≥ witness} α_k κ_k < 1`.
    pub bound: f64,
}

/// Description of one contraction chain: the factor sequences, their tail
/// model, and nothing about point representation — metrics and the map are
/// injected through [`ChainMap`].
#[derive(Debug, Clone)]
pub struct ChainSpec {
    alpha: Sequence,
    kappa: Sequence,
    tail: TailKind,
}

/// Levels probed when searching for a tail witness.
const PROBE_CAP: usize = 1 << 21;

impl ChainSpec {
    pub fn new(alpha: Sequence, kappa: Sequence, tail: TailKind) -> Self {
        ChainSpec { alpha, kappa, tail }
    }

    /// `α_j`, `j ≥ 1`.
    pub fn alpha(&self, level: usize) -> Result<f64, ChainError> {
        let v = self.alpha.value(level);
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(ChainError::NonPositiveSequence { level, value: v })
        }
    }

    /// `κ_j`, `j ≥ 1`.
    pub fn kappa(&self, level: usize) -> Result<f64, ChainError> {
        let v = self.kappa.value(level);
        // kappa = 0 is tolerated (a map can be exactly constant at a level);
        // negative or non-finite values are not.
        if v >= 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(ChainError::NonPositiveSequence { level, value: v })
        }
    }

    /// `α_j κ_j`.
    pub fn level_factor(&self, level: usize) -> Result<f64, ChainError> {
        Ok(self.alpha(level)? * self.kappa(level)?)
    }

    /// Upper bound for `sup_{k ≥ level} α_k κ_k` under the tail model.
    ///
    /// Below the model's `from` index the finite prefix is maximised
    /// explicitly and combined with the model bound at `from`.
    pub fn tail_sup(&self, level: usize) -> Result<f64, ChainError> {
        let level = level.max(1);
        let (from, model_bound) = match &self.tail {
            TailKind::EventuallyConstant { from, value } => (*from, *value),
            TailKind::MonotoneDecreasing { from } => {
                let j = (*from).max(level);
                (*from, self.level_factor(j)?)
            }
            TailKind::Explicit { from, tail_sup } => {
                let j = (*from).max(level);
                (*from, tail_sup(j))
            }
        };
        let mut sup = model_bound;
        // explicit prefix between the queried level and the model start
        for k in level..from.max(level) {
            sup = sup.max(self.level_factor(k)?);
        }
        Ok(sup)
    }

    /// Certify `limsup_j α_j κ_j < 1` from the tail model.
    ///
    /// Probes geometrically growing levels for a tail supremum below one;
    /// for a constant tail this is a single check, for a decreasing tail it
    /// finds the first level whose factor has dropped below one.
    pub fn certify_limsup(&self) -> Result<LimsupCertificate, ChainError> {
        let start = match &self.tail {
            TailKind::EventuallyConstant { from, .. } => *from,
            TailKind::MonotoneDecreasing { from } => *from,
            TailKind::Explicit { from, .. } => *from,
        }
        .max(1);
        let mut j = start;
        while j <= PROBE_CAP {
            let bound = match &self.tail {
                TailKind::EventuallyConstant { value, .. } => *value,
                TailKind::MonotoneDecreasing { .. } => self.level_factor(j)?,
                TailKind::Explicit { tail_sup, .. } => tail_sup(j),
            };
            if bound < 1.0 {
                return Ok(LimsupCertificate { witness: j, bound });
            }
            if matches!(self.tail, TailKind::EventuallyConstant { .. }) {
                break;
            }
            j = (j * 2).max(j + 1);
        }
        Err(ChainError::LimsupNotCertified {
            probed: j.min(PROBE_CAP),
        })
    }

    /// `Π_{k=j+1}^{n} α_k κ_k`; the empty product (`j = n`) is 1.
    pub fn partial_product(&self, j: usize, n: usize) -> Result<f64, ChainError> {
        if j > n {
            return Err(ChainError::LevelRange { j, n });
        }
        let mut prod = 1.0;
        for k in (j + 1)..=n {
            prod *= self.level_factor(k)?;
        }
        Ok(prod)
    }

    /// The series constant `C = sup_n S(n)`,
    /// `S(n) = Σ_{m≥0} Π_{k=n+1}^{n+m} α_k κ_k`.
    ///
    /// Each inner sum is truncated once its geometric tail majorant (ratio:
    /// the certified supremum of the unexplored factors) drops below `tol`,
    /// and that majorant is added back, so every `S(n)` and the returned
    /// value over-approximate the true ones. The supremum over `n` combines
    /// the explicit prefix `n ≤ n_max` with the closed geometric bound
    /// `1/(1 − r)` that dominates every later `S(n)`.
    pub fn series_constant(&self, n_max: usize, tol: f64) -> Result<f64, ChainError> {
        assert!(tol > 0.0, "series tolerance must be positive");
        self.certify_limsup()?;
        // Make sure the explored prefix reaches a level whose tail supremum
        // is below one, so the remaining S(n) can be bounded in closed form.
        let mut n_star = n_max;
        while self.tail_sup(n_star + 1)? >= 1.0 {
            n_star = (n_star * 2).max(n_star + 1);
            if n_star > PROBE_CAP {
                return Err(ChainError::LimsupNotCertified { probed: n_star });
            }
        }
        let mut sup = 0.0f64;
        for n in 0..=n_star {
            sup = sup.max(self.series_sum(n, tol)?);
        }
        let r = self.tail_sup(n_star + 1)?;
        sup = sup.max(1.0 / (1.0 - r));
        Ok(sup)
    }

    /// `S(n)` truncated with an over-approximating geometric majorant.
    fn series_sum(&self, n: usize, tol: f64) -> Result<f64, ChainError> {
        let mut sum = 0.0;
        let mut term = 1.0; // m = 0
        let mut m = 0usize;
        loop {
            sum += term;
            m += 1;
            term *= self.level_factor(n + m)?;
            let r = self.tail_sup(n + m + 1)?;
            if r < 1.0 {
                let majorant = term * (1.0 + r / (1.0 - r));
                if majorant < tol {
                    return Ok(sum + majorant);
                }
            }
            if m > 1_000_000 {
                return Err(ChainError::LimsupNotCertified { probed: n + m });
            }
        }
    }

    /// The a-priori bound `C · Π_{k=j+1}^{n} α_k κ_k · d_j(x_{j+1}, x_j)`
    /// on `d_j(x_∞, x_n)`.
    pub fn a_priori_bound(
        &self,
        j: usize,
        n: usize,
        first_step: f64,
        series_constant: f64,
    ) -> Result<f64, ChainError> {
        Ok(series_constant * self.partial_product(j, n)? * first_step)
    }
}

/// The injected point representation: per-level metrics and the map itself.
///
/// `metric` must return [`ChainError::NotInLevel`] when the pair is not a
/// member of level `j` (rather than an infinite value), so the engine can
/// distinguish non-membership from divergence.
pub trait ChainMap {
    type Point: Clone;

    /// `d_level(x, y)`.
    fn metric(&self, level: usize, x: &Self::Point, y: &Self::Point) -> Result<f64, ChainError>;

    /// The image `P x`.
    fn apply(&self, x: &Self::Point) -> Result<Self::Point, ChainError>;
}

/// Why an iteration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// The a-priori bound dropped below the requested target.
    BoundReached,
    /// Two consecutive iterates coincided at the base level.
    FixedPoint,
    /// Step budget exhausted.
    MaxSteps,
}

/// Stopping rule for [`iterate`].
#[derive(Debug, Clone, Copy)]
pub struct StopRule {
    pub max_steps: usize,
    pub target_bound: Option<f64>,
}

impl StopRule {
    pub fn max_steps(n: usize) -> Self {
        StopRule {
            max_steps: n,
            target_bound: None,
        }
    }
}

/// Record of one iteration run. The three sequences are index-aligned:
/// entry `m` holds the point `x_m`, the step distance `d_j(x_{m+1}, x_m)`
/// (when `x_{m+1}` exists and the pair is measurable at the base level)
/// and the a-priori bound on `d_j(x_∞, x_m)` (once the first step at the
/// base level has been measured).
#[derive(Debug, Clone)]
pub struct IterationTrace<P> {
    pub base_level: usize,
    pub points: Vec<P>,
    pub step_distances: Vec<Option<f64>>,
    pub bounds: Vec<Option<f64>>,
    /// The series constant used for the bounds.
    pub series_constant: f64,
    pub stop: StopReason,
}

impl<P> IterationTrace<P> {
    /// Number of map applications performed.
    pub fn steps(&self) -> usize {
        self.points.len() - 1
    }

    pub fn last_point(&self) -> &P {
        self.points.last().expect("trace holds at least the start")
    }
}

/// Iterate `x_{m+1} = P x_m`, recording step distances and a-priori bounds
/// at `base_level`.
///
/// Each new iterate `x_{m+1}` is membership-checked against level `m + 1`
/// through a self-metric evaluation; a `NotInLevel` there means the map
/// violated the nesting property and aborts the run. Step distances that
/// are unavailable because the pair is below the base level are recorded
/// as `None` rather than failing the run.
pub fn iterate<M: ChainMap>(
    spec: &ChainSpec,
    map: &M,
    x0: M::Point,
    stop: StopRule,
    base_level: usize,
) -> Result<IterationTrace<M::Point>, ChainError> {
    // Precondition: the start belongs to H_0.
    map.metric(0, &x0, &x0)?;
    let series_constant = spec.series_constant(base_level + 32, 1e-12)?;

    let mut points = vec![x0];
    let mut step_distances: Vec<Option<f64>> = Vec::new();
    let mut bounds: Vec<Option<f64>> = Vec::new();
    let mut first_step: Option<f64> = None;
    let mut stop_reason = StopReason::MaxSteps;

    let bound_at =
        |spec: &ChainSpec, first: Option<f64>, m: usize| -> Result<Option<f64>, ChainError> {
            match first {
                Some(fs) if m >= base_level => Ok(Some(spec.a_priori_bound(
                    base_level,
                    m,
                    fs,
                    series_constant,
                )?)),
                _ => Ok(None),
            }
        };

    bounds.push(bound_at(spec, first_step, 0)?);

    for m in 0..stop.max_steps {
        let next = map.apply(points.last().expect("nonempty"))?;
        // Nesting check: x_{m+1} should be a member of H_{m+1}.
        match map.metric(m + 1, &next, &next) {
            Ok(_) => {}
            Err(ChainError::NotInLevel { level }) => {
                return Err(ChainError::LeftChain { step: m + 1, level })
            }
            Err(e) => return Err(e),
        }
        let step = match map.metric(base_level, &next, points.last().expect("nonempty")) {
            Ok(d) => Some(d),
            Err(ChainError::NotInLevel { .. }) => None,
            Err(e) => return Err(e),
        };
        step_distances.push(step);
        if m == base_level {
            first_step = step;
            // bounds for already-recorded entries become available now
            for (idx, slot) in bounds.iter_mut().enumerate() {
                *slot = bound_at(spec, first_step, idx)?;
            }
        }
        points.push(next);
        let bound = bound_at(spec, first_step, m + 1)?;
        bounds.push(bound);

        if step == Some(0.0) {
            stop_reason = StopReason::FixedPoint;
            break;
        }
        if let (Some(target), Some(b)) = (stop.target_bound, bound) {
            if b <= target {
                stop_reason = StopReason::BoundReached;
                break;
            }
        }
    }
    // the last point has no successor yet; align the columns
    step_distances.push(None);
    debug_assert_eq!(step_distances.len(), points.len());
    debug_assert_eq!(bounds.len(), points.len());

    Ok(IterationTrace {
        base_level,
        points,
        step_distances,
        bounds,
        series_constant,
        stop: stop_reason,
    })
}

/// Which chain axiom a sample violated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxiomKind {
    /// `d_j(x, y) ≤ α_{j+1} d_{j+1}(x, y)` failed.
    MetricComparison,
    /// `d_{j+1}(Px, Py) ≤ κ_{j+1} d_j(x, y)` failed.
    Contraction,
}

/// A violated inequality, with its witness pair and both sides.
#[derive(Debug, Clone)]
pub struct AxiomViolation {
    pub level: usize,
    pub pair_index: usize,
    pub kind: AxiomKind,
    pub lhs: f64,
    pub rhs: f64,
}

/// Worst observed ratios at one level.
#[derive(Debug, Clone, Default)]
pub struct LevelCheck {
    pub level: usize,
    /// max over pairs of `d_j / (α_{j+1} d_{j+1})`; 1.0 means the
    /// comparison inequality is tight.
    pub worst_metric_ratio: Option<f64>,
    /// max over pairs of `d_{j+1}(Px, Py) / (κ_{j+1} d_j(x, y))`.
    pub worst_contraction_ratio: Option<f64>,
    pub checked_pairs: usize,
    pub skipped_pairs: usize,
}

/// Report from [`validate_chain_axioms`].
#[derive(Debug, Clone)]
pub struct AxiomReport {
    pub levels: Vec<LevelCheck>,
    pub violations: Vec<AxiomViolation>,
}

impl AxiomReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check the two chain inequalities on sample pairs for every level below
/// `j_max`, within a multiplicative tolerance.
///
/// Violations are reported, not raised; pairs that are not members of the
/// levels involved are counted as skipped.
pub fn validate_chain_axioms<M: ChainMap>(
    spec: &ChainSpec,
    map: &M,
    samples: &[(M::Point, M::Point)],
    j_max: usize,
    tol: f64,
) -> Result<AxiomReport, ChainError> {
    let mut levels = Vec::new();
    let mut violations = Vec::new();
    for j in 0..j_max {
        let alpha_next = spec.alpha(j + 1)?;
        let kappa_next = spec.kappa(j + 1)?;
        let mut check = LevelCheck {
            level: j,
            ..LevelCheck::default()
        };
        for (idx, (x, y)) in samples.iter().enumerate() {
            let dj = map.metric(j, x, y);
            let dj1 = map.metric(j + 1, x, y);
            let (dj, dj1) = match (dj, dj1) {
                (Ok(a), Ok(b)) => (a, b),
                (Err(ChainError::NotInLevel { .. }), _)
                | (_, Err(ChainError::NotInLevel { .. })) => {
                    check.skipped_pairs += 1;
                    continue;
                }
                (Err(e), _) | (_, Err(e)) => return Err(e),
            };
            // comparison: d_j ≤ α_{j+1} d_{j+1}
            if dj1 > 0.0 {
                let ratio = dj / (alpha_next * dj1);
                check.worst_metric_ratio = Some(
                    check
                        .worst_metric_ratio
                        .map_or(ratio, |w: f64| w.max(ratio)),
                );
                if ratio > 1.0 + tol {
                    violations.push(AxiomViolation {
                        level: j,
                        pair_index: idx,
                        kind: AxiomKind::MetricComparison,
                        lhs: dj,
                        rhs: alpha_next * dj1,
                    });
                }
            } else if dj > 0.0 {
                violations.push(AxiomViolation {
                    level: j,
                    pair_index: idx,
                    kind: AxiomKind::MetricComparison,
                    lhs: dj,
                    rhs: 0.0,
                });
            }
            // contraction: d_{j+1}(Px, Py) ≤ κ_{j+1} d_j(x, y)
            let px = map.apply(x)?;
            let py = map.apply(y)?;
            match map.metric(j + 1, &px, &py) {
                Ok(dp) => {
                    if dj > 0.0 && kappa_next > 0.0 {
                        let ratio = dp / (kappa_next * dj);
                        check.worst_contraction_ratio = Some(
                            check
                                .worst_contraction_ratio
                                .map_or(ratio, |w: f64| w.max(ratio)),
                        );
                        if ratio > 1.0 + tol {
                            violations.push(AxiomViolation {
                                level: j,
                                pair_index: idx,
                                kind: AxiomKind::Contraction,
                                lhs: dp,
                                rhs: kappa_next * dj,
                            });
                        }
                    } else if dp > 0.0 {
                        violations.push(AxiomViolation {
                            level: j,
                            pair_index: idx,
                            kind: AxiomKind::Contraction,
                            lhs: dp,
                            rhs: kappa_next * dj,
                        });
                    }
                }
                Err(ChainError::NotInLevel { .. }) => {
                    check.skipped_pairs += 1;
                    continue;
                }
                Err(e) => return Err(e),
            }
            check.checked_pairs += 1;
        }
        levels.push(check);
    }
    Ok(AxiomReport { levels, violations })
}
