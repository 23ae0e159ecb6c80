use alloc::vec::Vec;

use crate::returns::Portfolio;

/// Why an iterative solver stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// Successive iterates within the step tolerance.
    StepConverged,
    /// Outer-iteration budget exhausted.
    MaxIterations,
    /// Trust radius shrank below its floor (CC only).
    TrustRadiusFloor,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::StepConverged => "step_converged",
            Termination::MaxIterations => "max_iterations",
            Termination::TrustRadiusFloor => "trust_radius_floor",
        }
    }
}

/// Outcome of one solver run from one starting point.
#[derive(Debug, Clone)]
pub struct SolveRun {
    pub start: Portfolio,
    pub portfolio: Portfolio,
    pub utility: f64,
    /// True CPT utility per outer iteration, starting with the initial point.
    pub utility_trace: Vec<f64>,
    /// Fixed-weights utility per outer iteration where the solver tracks it
    /// (MM records both notions; empty otherwise).
    pub fixed_pi_trace: Vec<f64>,
    pub iterations: usize,
    pub termination: Termination,
}
