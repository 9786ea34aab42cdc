//! Convergence bookkeeping shared by the iterative solvers.

/// Trace of an iterative fit. `terminal_step` is the step size in effect at
/// termination for search-based solvers, or the loss-decrease threshold for
/// coordinate descent.
#[derive(Debug, Clone)]
pub struct FitReport {
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub terminal_step: f64,
}

impl FitReport {
    /// Final recorded objective value.
    pub fn objective(&self) -> f64 {
        *self
            .objective_trace
            .last()
            .expect("fit report carries at least one objective value")
    }
}
