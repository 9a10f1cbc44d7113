//! Per-iteration records produced by a run.

use alloc::vec::Vec;

/// One iteration of a run. Quantities that do not exist for the objective at
/// hand (distance without a known optimum, suboptimality without a closed
/// form) are stored as NaN; `potential` is filled in by post-processing when
/// potential-function parameters are configured.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub t: u64,
    pub evals: u64,
    pub f: f64,
    pub dist: f64,
    pub f_mu: f64,
    pub sigma: f64,
    pub sigma_bar: f64,
    pub potential: Option<f64>,
    pub cond_sigma: f64,
    pub accepted: bool,
}

/// Records of a single run, starting with the initial state at `t = 0`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    pub rows: Vec<TraceRow>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn final_row(&self) -> Option<&TraceRow> {
        self.rows.last()
    }

    /// The best objective value seen at or before each recorded evaluation
    /// count, as a right-continuous step function `(evals, best_f)`.
    pub fn best_so_far(&self) -> Vec<(u64, f64)> {
        let mut best = f64::INFINITY;
        let mut out = Vec::with_capacity(self.rows.len());
        for row in &self.rows {
            if row.f < best {
                best = row.f;
            }
            match out.last_mut() {
                Some((e, b)) if *e == row.evals => *b = best,
                _ => out.push((row.evals, best)),
            }
        }
        out
    }
}
