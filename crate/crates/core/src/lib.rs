//! Fixed-point iteration on a decreasing chain of metric spaces, and its
//! application to initial value problems.
//!
//! The central object is a map `P` acting on a nested family of complete
//! metric spaces `H_0 ⊃ H_1 ⊃ …` with per-level metrics `d_j`, comparison
//! factors `α_j` (`d_j ≤ α_{j+1} d_{j+1}`) and contraction factors `κ_j`
//! (`d_{j+1}(Px, Py) ≤ κ_{j+1} d_j(x, y)`). When `limsup α_j κ_j < 1` the
//! map has a unique fixed point and the iterates obey the a-priori bound
//!
//! ```text
//! d_j(x_∞, x_n) ≤ C · α_n κ_n ⋯ α_{j+1} κ_{j+1} · d_j(x_{j+1}, x_j).
//! ```
//!
//! Instantiating the chain with weighted sup-metrics
//! `d_j(x, y) = sup ‖x(t) − y(t)‖ / |t − t0|^j` turns Picard iteration for
//! `y' = f(t, y)`, `y(t0) = y0` into such a map with `α_j ≡ α` and
//! `κ_j = L/j`, which yields the factorial error bound
//! `e^{αL} (αL)^n / n! · M` — much sharper than the geometric rate
//! `(αL)^n / (1 − αL)` of the plain contraction argument, and only valid
//! under the weaker hypothesis that `αL` is finite rather than `< 1`.
//!
//! Modules:
//! - [`chain`] — the generic engine: chain description, certification of the
//!   `limsup` condition, the series constant `C`, iteration traces.
//! - [`real`] — real-time Picard solver with two curve backends (sampled
//!   grid with trapezoid quadrature; truncated power series, exact for
//!   polynomial right-hand sides).
//! - [`complex`] — complex-time analogue on the disc via truncated power
//!   series, with certified sup-norm brackets over the closed disc.
//! - [`mod@bench`] — Euler baseline, geometric-bound comparison, problem
//!   registry with closed forms, decay-rate classification.
//! - [`report`] — convergence reports shared by solvers and front ends.

pub mod bench;
pub mod chain;
pub mod complex;
pub mod error;
pub mod grid;
pub mod real;
pub mod report;
pub mod series;
pub mod util;

pub use chain::{ChainMap, ChainSpec, IterationTrace, Sequence, StopReason, StopRule, TailKind};
pub use error::{ChainError, PicardError};
pub use real::{IVProblem, NormKind};
pub use report::{ConvergenceReport, ConvergenceRow};
