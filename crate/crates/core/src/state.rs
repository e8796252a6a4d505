//! Membrane displacement state and breakdown classification.

use crate::error::{Error, Result};
use crate::grid::TransformedGrid;

/// Displacement samples at one instant, with the x-derivative cached so all
/// modules see the same stencil choice.
#[derive(Debug, Clone)]
pub struct MembraneState {
    pub t: f64,
    pub u: Vec<f64>,
    /// Discrete ∂ₓu at the x nodes (derived, cached).
    pub ux: Vec<f64>,
}

impl MembraneState {
    /// Wraps displacement samples, enforcing the boundary condition
    /// u(±1) = 0 and -1 < u ≤ tol_zero.
    pub fn new(t: f64, u: Vec<f64>, grid: &TransformedGrid, tol_zero: f64) -> Result<Self> {
        if u.len() != grid.nx {
            return Err(Error::ShapeMismatch { expected: grid.nx, got: u.len() });
        }
        if u[0] != 0.0 || u[grid.nx - 1] != 0.0 {
            return Err(Error::InvalidState(format!(
                "boundary condition violated: u(-1) = {:e}, u(1) = {:e}",
                u[0],
                u[grid.nx - 1]
            )));
        }
        for (i, &v) in u.iter().enumerate() {
            if !(v > -1.0) {
                return Err(Error::InvalidState(format!("u[{i}] = {v:e} has reached -1")));
            }
            if v > tol_zero {
                return Err(Error::InvalidState(format!("u[{i}] = {v:e} exceeds 0")));
            }
        }
        let ux = grid.derivative_x(&u)?;
        Ok(MembraneState { t, u, ux })
    }

    /// Smallest gap 1 + u between membrane and plate.
    pub fn min_gap(&self) -> f64 {
        self.u.iter().fold(f64::INFINITY, |m, &v| m.min(1.0 + v))
    }

    pub fn min_u(&self) -> f64 {
        self.u.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    pub fn max_abs_ux(&self) -> f64 {
        self.ux.iter().fold(0.0f64, |m, &v| m.max(v.abs()))
    }
}

/// Vertical position of the mapped node (x_i, η): z = -1 + η (1 + u(x_i)).
pub fn physical_height(state: &MembraneState, x_index: usize, eta: f64) -> f64 {
    -1.0 + eta * (1.0 + state.u[x_index])
}

/// How (and whether) a trajectory ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BreakdownKind {
    Running,
    TimeLimit,
    Touchdown,
    GradientBlowup,
}

impl BreakdownKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BreakdownKind::Running => "running",
            BreakdownKind::TimeLimit => "time_limit",
            BreakdownKind::Touchdown => "touchdown",
            BreakdownKind::GradientBlowup => "gradient_blowup",
        }
    }

    /// True for the two finite-time breakdown modes.
    pub fn is_breakdown(self) -> bool {
        matches!(self, BreakdownKind::Touchdown | BreakdownKind::GradientBlowup)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BreakdownStatus {
    pub kind: BreakdownKind,
    pub t_event: f64,
}
