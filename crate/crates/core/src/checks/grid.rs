use alloc::vec::Vec;

use crate::shift::ShiftOperator;

/// Tabulated `ln a_{n,k}` and a weight prefix cache covering `n < horizon`.
pub(crate) struct Grid {
    pub op: ShiftOperator,
    pub horizon: usize,
    cols: Vec<Vec<f64>>,
}

impl Grid {
    pub fn new(op: &ShiftOperator, horizon: usize, ncols: usize) -> Grid {
        let op = op.with_capacity(horizon + 2);
        let cols = (0..ncols)
            .map(|k| (0..horizon).map(|n| op.space.matrix.ln_entry(n, k)).collect())
            .collect();
        Grid { op, horizon, cols }
    }

    /// Keeps the grid if it already covers `horizon` columns `< ncols`.
    pub fn ensure(slot: &mut Option<Grid>, op: &ShiftOperator, horizon: usize, ncols: usize) {
        let ok = slot.as_ref().is_some_and(|g| g.horizon >= horizon && g.cols.len() >= ncols);
        if !ok {
            *slot = Some(Grid::new(op, horizon, ncols));
        }
    }

    /// `ln a_{n,k}`.
    #[inline]
    pub fn a(&self, n: usize, k: usize) -> f64 {
        self.cols[k][n]
    }

    /// `ln prod_{j=n}^{n+m-1} |w_j|`.
    #[inline]
    pub fn w(&self, n: usize, m: usize) -> f64 {
        self.op.weights.ln_window(n, m)
    }
}
