//! Convergence reports produced by the solvers and consumed by the
//! comparison harness and the command-line front end.

use serde::Serialize;

/// How the reference solution for error measurement was obtained, in
/// decreasing order of preference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceKind {
    /// A registered closed-form solution.
    ClosedForm,
    /// A much deeper iterate of the same scheme.
    HighIterate,
    /// A finer-grid iterate (grid backend only).
    FineGrid,
}

/// One iteration row: the observed distance to the reference, both
/// factorial-bound forms (they differ by the constant linking the sup
/// bound `M` of the field to the measured first step), the geometric
/// comparison bound, and the base-level defect.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    /// `d_0(y^n, y_ref)`.
    pub observed: f64,
    /// `e^{αL} (αL)^n M / n!`.
    pub factorial_bound: f64,
    /// `C · Π_{k=1}^{n} α κ_k · d_0(y^1, y^0)` with the measured first step.
    pub chain_bound: f64,
    /// `(αL)^n/(1 − αL) · d_0(y^1, y^0)`; `None` when `αL ≥ 1`.
    pub geometric_bound: Option<f64>,
    /// Base-level defect `sup ‖P y^n − y^n‖ = d_0(P y^n, y^n)`.
    pub defect: f64,
}

/// Full record of one solver run.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub name: Option<String>,
    /// `"grid"`, `"poly"` or `"complex-series"`.
    pub backend: String,
    pub dim: usize,
    pub alpha: f64,
    pub lipschitz: f64,
    /// Sup bound `M` of the right-hand side used in the factorial bound.
    pub field_bound: f64,
    pub grid_n: Option<usize>,
    pub series_order: Option<usize>,
    pub reference: ReferenceKind,
    /// Measured `d_0(y^1, y^0)`.
    pub first_step: f64,
    pub rows: Vec<ConvergenceRow>,
    pub warnings: Vec<String>,
}

impl ConvergenceReport {
    /// Largest ratio `observed / factorial_bound` over all rows (0 when the
    /// bound column is degenerate). A value above 1 means a bound was
    /// violated somewhere.
    pub fn worst_factorial_ratio(&self) -> f64 {
        self.rows
            .iter()
            .filter(|r| r.factorial_bound > 0.0)
            .map(|r| r.observed / r.factorial_bound)
            .fold(0.0, f64::max)
    }

    /// Largest ratio `observed / chain_bound` over rows with `n ≥ 1`.
    pub fn worst_chain_ratio(&self) -> f64 {
        self.rows
            .iter()
            .filter(|r| r.n >= 1 && r.chain_bound > 0.0)
            .map(|r| r.observed / r.chain_bound)
            .fold(0.0, f64::max)
    }
}
