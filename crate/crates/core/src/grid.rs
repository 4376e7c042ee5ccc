//! Uniform sampled-curve backend: `2N + 1` nodes centred at `t0`, with
//! outward cumulative trapezoid quadrature.
//!
//! Nodes are `t_k = t0 + k·(half_width/N)` for `k = −N…N`. Integrals from
//! the centre are accumulated outward in both directions, matching the
//! `∫_{t0}^{t} · |ds|` convention (the measure is positive on both sides).

use crate::error::PicardError;
use serde::Serialize;

/// Descriptor of a symmetric uniform grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub t0: f64,
    pub half_width: f64,
    /// Half-resolution `N`; the grid has `2N + 1` nodes.
    pub n_half: usize,
}

impl Grid {
    pub fn new(t0: f64, half_width: f64, n_half: usize) -> Self {
        assert!(half_width > 0.0 && n_half >= 1);
        Grid {
            t0,
            half_width,
            n_half,
        }
    }

    pub fn len(&self) -> usize {
        2 * self.n_half + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        self.half_width / self.n_half as f64
    }

    /// Node time by array index `i ∈ [0, 2N]` (centre at `i = N`).
    pub fn node(&self, i: usize) -> f64 {
        let k = i as i64 - self.n_half as i64;
        self.t0 + k as f64 * self.step()
    }

    /// Signed offset `t_i − t0`.
    pub fn offset(&self, i: usize) -> f64 {
        (i as i64 - self.n_half as i64) as f64 * self.step()
    }

    pub fn center_index(&self) -> usize {
        self.n_half
    }

    pub fn matches(&self, other: &Grid) -> bool {
        self.t0 == other.t0 && self.half_width == other.half_width && self.n_half == other.n_half
    }
}

/// A vector-valued curve sampled on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub grid: Grid,
    /// `values[i]` is the `ℝ^d` sample at node `i`.
    pub values: Vec<Vec<f64>>,
    /// Number of nodes clamped back onto the b-ball by quadrature noise.
    pub clamped: usize,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<Vec<f64>>) -> Result<Self, PicardError> {
        if values.len() != grid.len() {
            return Err(PicardError::GridMismatch(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        let dim = values.first().map_or(0, Vec::len);
        if dim == 0 || values.iter().any(|v| v.len() != dim) {
            return Err(PicardError::Domain("inconsistent sample dimension".into()));
        }
        Ok(GridFunction {
            grid,
            values,
            clamped: 0,
        })
    }

    /// The constant curve `t ↦ y0`.
    pub fn constant(grid: Grid, y0: &[f64]) -> Self {
        GridFunction {
            grid,
            values: vec![y0.to_vec(); grid.len()],
            clamped: 0,
        }
    }

    /// Sample a closure at every node.
    pub fn from_fn<F: Fn(f64) -> Vec<f64>>(grid: Grid, f: F) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.node(i))).collect();
        GridFunction {
            grid,
            values,
            clamped: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.values[0].len()
    }

    pub fn center_value(&self) -> &[f64] {
        &self.values[self.grid.center_index()]
    }
}

/// A scalar curve sampled on a [`Grid`]; the representation used by the
/// integral operator and its resolvent.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarGrid {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl ScalarGrid {
    pub fn from_fn<F: Fn(f64) -> f64>(grid: Grid, f: F) -> Self {
        ScalarGrid {
            grid,
            values: (0..grid.len()).map(|i| f(grid.node(i))).collect(),
        }
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        ScalarGrid {
            grid,
            values: vec![c; grid.len()],
        }
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
    }

    /// Max absolute difference against another curve on the same grid.
    pub fn sup_abs_diff(&self, other: &ScalarGrid) -> f64 {
        debug_assert!(self.grid.matches(&other.grid));
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()))
    }
}

/// Cumulative trapezoid of sampled vector data, outward from the centre:
/// returns `I[i] ≈ ∫_{t0}^{t_i} g(s) ds` (signed, so `I` is negative-side
/// antisymmetric for even integrands).
pub fn cumulative_trapezoid(grid: &Grid, samples: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = grid.center_index();
    let h = grid.step();
    let dim = samples[0].len();
    let mut out = vec![vec![0.0; dim]; grid.len()];
    for i in n..grid.len() - 1 {
        for c in 0..dim {
            out[i + 1][c] = out[i][c] + 0.5 * h * (samples[i][c] + samples[i + 1][c]);
        }
    }
    for i in (1..=n).rev() {
        for c in 0..dim {
            out[i - 1][c] = out[i][c] - 0.5 * h * (samples[i][c] + samples[i - 1][c]);
        }
    }
    out
}

/// Cumulative trapezoid with the positive arc-length measure `|ds|`:
/// `K[i] ≈ ∫_{t0}^{t_i} g(s) |ds|`, nondecreasing outward on both sides
/// for nonnegative integrands.
pub fn cumulative_trapezoid_abs(grid: &Grid, samples: &[f64]) -> Vec<f64> {
    let n = grid.center_index();
    let h = grid.step();
    let mut out = vec![0.0; grid.len()];
    for i in n..grid.len() - 1 {
        out[i + 1] = out[i] + 0.5 * h * (samples[i] + samples[i + 1]);
    }
    for i in (1..=n).rev() {
        out[i - 1] = out[i] + 0.5 * h * (samples[i] + samples[i - 1]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn nodes_are_symmetric_and_centred() {
        let g = Grid::new(2.0, 1.0, 4);
        assert_eq!(g.len(), 9);
        assert_relative_eq!(g.node(0), 1.0);
        assert_relative_eq!(g.node(4), 2.0);
        assert_relative_eq!(g.node(8), 3.0);
        assert_eq!(g.offset(4), 0.0);
    }

    #[test]
    fn signed_cumulative_integrates_constants_exactly() {
        let g = Grid::new(0.0, 1.0, 8);
        let ones = vec![vec![1.0]; g.len()];
        let integral = cumulative_trapezoid(&g, &ones);
        for (i, row) in integral.iter().enumerate() {
            // ∫_0^{t} 1 ds = t, signed
            assert_relative_eq!(row[0], g.offset(i), epsilon = 1e-15);
        }
    }

    #[test]
    fn abs_cumulative_integrates_constants_to_arc_length() {
        let g = Grid::new(0.0, 1.0, 8);
        let ones = vec![1.0; g.len()];
        let integral = cumulative_trapezoid_abs(&g, &ones);
        for (i, v) in integral.iter().enumerate() {
            assert_relative_eq!(*v, g.offset(i).abs(), epsilon = 1e-15);
        }
    }

    #[test]
    fn trapezoid_is_exact_for_linear_integrands() {
        let g = Grid::new(0.0, 2.0, 16);
        let lin: Vec<Vec<f64>> = (0..g.len()).map(|i| vec![3.0 * g.node(i)]).collect();
        let integral = cumulative_trapezoid(&g, &lin);
        for (i, row) in integral.iter().enumerate() {
            let t = g.offset(i);
            assert_relative_eq!(row[0], 1.5 * t * t, epsilon = 1e-13);
        }
    }
}
