//! Machine-checked certificates: each entry evaluates one proven inequality
//! on computed data and records left side, right side, slack and verdict.

use crate::error::{Error, Result};
use crate::grid::TransformedGrid;
use crate::potential::TraceSet;
use crate::state::MembraneState;

/// Which inequality a certificate instantiates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertName {
    /// Pointwise upper bound ψ ≤ 1.
    B1Upper,
    /// Pointwise lower bound ψ ≥ 1 + z.
    B1Lower,
    /// Lateral sign condition ±∂ₓψ(±1,·) ≤ 0.
    B2,
    /// Tangential identity ∂ₓψ + u_x ∂_zψ = 0 on the membrane (residual form).
    B3a,
    /// ∂_zψ(±1,·) = 1 (residual form).
    B3b,
    /// ∫(1+ε²u_x²)γ_m² ≥ 2∫(1+ε²u_x²)γ_m - 2.
    B5,
    /// ∫(1+ε²u_x²)γ_m ≥ Dirichlet energy.
    B6,
    /// Dirichlet energy ≥ ∫ dx/(1+u).
    B7,
    /// ∫(1+ε²u_x²)γ_m² ≥ 4/(1-E) - 2.
    B8,
    /// Discrete dE/dt ≥ F_λ(E).
    B10,
    /// t_event ≤ (1 - E(0)) / F_λ(0).
    ThmCBound,
    /// Discrete Jensen inequality for r ↦ 1/(1+r) on u.
    Jensen,
}

impl CertName {
    pub fn as_str(self) -> &'static str {
        match self {
            CertName::B1Upper => "b1_upper",
            CertName::B1Lower => "b1_lower",
            CertName::B2 => "b2",
            CertName::B3a => "b3a",
            CertName::B3b => "b3b",
            CertName::B5 => "b5",
            CertName::B6 => "b6",
            CertName::B7 => "b7",
            CertName::B8 => "b8",
            CertName::B10 => "b10",
            CertName::ThmCBound => "thmC_bound",
            CertName::Jensen => "jensen",
        }
    }
}

/// One evaluated inequality. Convention: the inequality is lhs ≥ rhs, so
/// slack = lhs - rhs and pass ⇔ slack ≥ -tol.
#[derive(Debug, Clone, Copy)]
pub struct CertificateEntry {
    pub name: CertName,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub tol: f64,
    pub pass: bool,
    pub t: f64,
}

impl CertificateEntry {
    pub fn new(name: CertName, lhs: f64, rhs: f64, tol: f64, t: f64) -> Self {
        let slack = lhs - rhs;
        CertificateEntry { name, lhs, rhs, slack, tol, pass: slack >= -tol, t }
    }

    /// Like [`CertificateEntry::new`] but with the tolerance scaled by the
    /// magnitude of the two sides: quadrature and trace errors are relative,
    /// so an absolute tolerance starves certificates whose integrals grow
    /// near breakdown.
    pub fn new_scaled(name: CertName, lhs: f64, rhs: f64, tol: f64, t: f64) -> Self {
        let scale = 1.0f64.max(lhs.abs()).max(rhs.abs());
        Self::new(name, lhs, rhs, tol * scale, t)
    }
}

/// E(t) = -(1/2) ∫ u dx; lies in [0, 1) for admissible states.
pub fn energy_e(u: &MembraneState, grid: &TransformedGrid) -> Result<f64> {
    Ok(-0.5 * grid.integrate_x(&u.u)?)
}

/// F_λ(E) = 2λ/(1-E) - λ - 1/ε, monotone increasing in E.
pub fn f_lambda(energy: f64, lambda: f64, epsilon: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&energy) {
        return Err(Error::InvalidState(format!("energy E = {energy:e} outside [0, 1)")));
    }
    Ok(2.0 * lambda / (1.0 - energy) - lambda - 1.0 / epsilon)
}

fn weighted_gamma_integrals(
    traces: &TraceSet,
    u: &MembraneState,
    epsilon: f64,
    grid: &TransformedGrid,
) -> Result<(f64, f64)> {
    let e2 = epsilon * epsilon;
    let w1: Vec<f64> = traces
        .gamma_m
        .iter()
        .zip(&u.ux)
        .map(|(&g, &ux)| (1.0 + e2 * ux * ux) * g)
        .collect();
    let w2: Vec<f64> = traces
        .gamma_m
        .iter()
        .zip(&u.ux)
        .map(|(&g, &ux)| (1.0 + e2 * ux * ux) * g * g)
        .collect();
    Ok((grid.integrate_x(&w1)?, grid.integrate_x(&w2)?))
}

/// ∫(1+ε²u_x²)γ_m² ≥ 2∫(1+ε²u_x²)γ_m - 2.
pub fn check_lemma1(
    traces: &TraceSet,
    u: &MembraneState,
    epsilon: f64,
    grid: &TransformedGrid,
    tol: f64,
) -> Result<CertificateEntry> {
    let (lin, quad) = weighted_gamma_integrals(traces, u, epsilon, grid)?;
    Ok(CertificateEntry::new_scaled(CertName::B5, quad, 2.0 * lin - 2.0, tol, u.t))
}

/// ∫(1+ε²u_x²)γ_m ≥ Dirichlet energy.
pub fn check_lemma2(
    traces: &TraceSet,
    u: &MembraneState,
    epsilon: f64,
    dirichlet: f64,
    grid: &TransformedGrid,
    tol: f64,
) -> Result<CertificateEntry> {
    let (lin, _) = weighted_gamma_integrals(traces, u, epsilon, grid)?;
    Ok(CertificateEntry::new_scaled(CertName::B6, lin, dirichlet, tol, u.t))
}

/// Dirichlet energy ≥ ∫ dx/(1+u).
pub fn check_lemma3(
    dirichlet: f64,
    u: &MembraneState,
    grid: &TransformedGrid,
    tol: f64,
) -> Result<CertificateEntry> {
    if u.min_gap() <= 0.0 {
        return Err(Error::InvalidState("1 + u must stay positive".into()));
    }
    let inv_gap: Vec<f64> = u.u.iter().map(|&v| 1.0 / (1.0 + v)).collect();
    Ok(CertificateEntry::new_scaled(CertName::B7, dirichlet, grid.integrate_x(&inv_gap)?, tol, u.t))
}

/// ∫(1+ε²u_x²)γ_m² ≥ 4/(1-E) - 2.
pub fn check_prop4(
    traces: &TraceSet,
    u: &MembraneState,
    epsilon: f64,
    grid: &TransformedGrid,
    tol: f64,
) -> Result<CertificateEntry> {
    let (_, quad) = weighted_gamma_integrals(traces, u, epsilon, grid)?;
    let energy = energy_e(u, grid)?;
    Ok(CertificateEntry::new_scaled(CertName::B8, quad, 4.0 / (1.0 - energy) - 2.0, tol, u.t))
}

/// Discrete Jensen inequality (1/2)∫ 1/(1+u) dx ≥ 1/(1 + (1/2)∫u dx),
/// with the same trapezoid weights as the rest of the chain.
pub fn check_jensen(u: &MembraneState, grid: &TransformedGrid, tol: f64) -> Result<CertificateEntry> {
    let inv_gap: Vec<f64> = u.u.iter().map(|&v| 1.0 / (1.0 + v)).collect();
    let lhs = 0.5 * grid.integrate_x(&inv_gap)?;
    let mean_u = 0.5 * grid.integrate_x(&u.u)?;
    Ok(CertificateEntry::new_scaled(CertName::Jensen, lhs, 1.0 / (1.0 + mean_u), tol, u.t))
}

/// Per-snapshot energy inequality dE/dt ≥ F_λ(E), with the time derivative
/// approximated by centered differences over the snapshot times. The
/// tolerance carries an O(dt) term for that approximation.
pub fn check_energy_ode(
    times: &[f64],
    energies: &[f64],
    lambda: f64,
    epsilon: f64,
    base_tol: f64,
) -> Result<Vec<CertificateEntry>> {
    if times.len() != energies.len() {
        return Err(Error::ShapeMismatch { expected: times.len(), got: energies.len() });
    }
    if times.len() < 3 {
        return Err(Error::InvalidState("energy ODE check needs at least 3 snapshots".into()));
    }
    let mut entries = Vec::with_capacity(times.len() - 2);
    for k in 1..times.len() - 1 {
        let span = times[k + 1] - times[k - 1];
        let dedt = (energies[k + 1] - energies[k - 1]) / span;
        let rhs = f_lambda(energies[k], lambda, epsilon)?;
        let dt_local = (times[k + 1] - times[k]).max(times[k] - times[k - 1]);
        let mut entry = CertificateEntry::new(CertName::B10, dedt, rhs, base_tol + 2.0 * dt_local, times[k]);
        entry.t = times[k];
        entries.push(entry);
    }
    Ok(entries)
}

/// Evaluates the full per-state certificate list on a solved potential:
/// pointwise bounds, boundary identities, and the inequality chain
/// b5 → b6 → b7 → b8 with the Jensen sub-certificate.
pub fn state_certificates(
    state: &MembraneState,
    field: &crate::potential::PotentialField,
    traces: &TraceSet,
    dirichlet: f64,
    epsilon: f64,
    grid: &TransformedGrid,
    tol: f64,
) -> Result<Vec<CertificateEntry>> {
    let mut list = crate::potential::verify_potential_bounds(field, state, traces, grid, tol);
    let b3a = crate::potential::membrane_tangential_residual(field, state, traces, grid);
    // the reconstruction error of ψ_x on the membrane grows with the slope
    let steep = 1.0f64.max(state.max_abs_ux().powi(2));
    list.push(CertificateEntry::new(CertName::B3a, -b3a, 0.0, tol * steep, state.t));
    let b3b = traces
        .side_pz_left
        .iter()
        .chain(&traces.side_pz_right)
        .map(|&v| (v - 1.0).abs())
        .fold(0.0f64, f64::max);
    list.push(CertificateEntry::new(CertName::B3b, -b3b, 0.0, tol, state.t));
    // γ_m enters b5/b6/b8 through the weight 1 + ε²u_x², whose dynamic
    // range amplifies the trace error linearly with the worst slope
    let steep_lin = 1.0f64.max(state.max_abs_ux());
    list.push(check_lemma1(traces, state, epsilon, grid, tol * steep_lin)?);
    list.push(check_lemma2(traces, state, epsilon, dirichlet, grid, tol * steep_lin)?);
    list.push(check_lemma3(dirichlet, state, grid, tol)?);
    list.push(check_prop4(traces, state, epsilon, grid, tol * steep_lin)?);
    list.push(check_jensen(state, grid, tol)?);
    Ok(list)
}

/// Finite-time blow-up bounds from the integrated energy inequality.
#[derive(Debug, Clone, Copy)]
pub struct BlowupBounds {
    /// (1 - E(0)) / F_λ(0).
    pub t_bound: f64,
    /// (1 - E(0)) / F_λ(E(0)), the sharper intermediate step.
    pub t_sharp: f64,
}

/// Returns the bounds when the blow-up criterion λ > 1/ε holds, else `None`.
pub fn blowup_time_bound(
    u0: &MembraneState,
    lambda: f64,
    epsilon: f64,
    grid: &TransformedGrid,
) -> Result<Option<BlowupBounds>> {
    if lambda <= 1.0 / epsilon {
        return Ok(None);
    }
    let e0 = energy_e(u0, grid)?;
    let f0 = f_lambda(0.0, lambda, epsilon)?;
    let fe0 = f_lambda(e0, lambda, epsilon)?;
    Ok(Some(BlowupBounds { t_bound: (1.0 - e0) / f0, t_sharp: (1.0 - e0) / fe0 }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;

    fn state(grid: &TransformedGrid, f: impl Fn(f64) -> f64) -> MembraneState {
        let u: Vec<f64> = grid.x.iter().map(|&x| f(x)).collect();
        MembraneState { t: 0.0, ux: grid.derivative_x(&u).unwrap(), u }
    }

    #[test]
    fn energy_of_flat_and_parabolic_states() {
        let grid = build_grid(257, 33).unwrap();
        let flat = state(&grid, |_| 0.0);
        assert_eq!(energy_e(&flat, &grid).unwrap(), 0.0);
        // u ≡ -0.5 ignores the BC; pure quadrature check
        let half = state(&grid, |_| -0.5);
        assert!((energy_e(&half, &grid).unwrap() - 0.5).abs() < 1e-14);
        // ∫ 0.3 (1-x²) = 0.4, so E = 0.2
        let para = state(&grid, |x| -0.3 * (1.0 - x * x));
        assert!((energy_e(&para, &grid).unwrap() - 0.2).abs() < 1e-4);
    }

    #[test]
    fn f_lambda_values_and_threshold() {
        assert_eq!(f_lambda(0.0, 2.0, 1.0).unwrap(), 1.0);
        assert_eq!(f_lambda(0.0, 1.0, 1.0).unwrap(), 0.0);
        assert_eq!(f_lambda(0.5, 4.0, 0.5).unwrap(), 10.0);
        assert!(f_lambda(1.0, 2.0, 1.0).is_err());
        assert!(f_lambda(-0.1, 2.0, 1.0).is_err());
    }

    #[test]
    fn blowup_bounds_examples() {
        let grid = build_grid(257, 33).unwrap();
        let flat = state(&grid, |_| 0.0);
        let b = blowup_time_bound(&flat, 2.0, 1.0, &grid).unwrap().unwrap();
        assert!((b.t_bound - 1.0).abs() < 1e-12);
        assert!((b.t_sharp - 1.0).abs() < 1e-12);
        assert!(blowup_time_bound(&flat, 1.0, 1.0, &grid).unwrap().is_none());

        let para = state(&grid, |x| -0.3 * (1.0 - x * x));
        let b = blowup_time_bound(&para, 2.0, 1.0, &grid).unwrap().unwrap();
        assert!((b.t_bound - 0.8).abs() < 1e-3);
        // F_2(0.2) = 4/0.8 - 3 = 2, so the sharper bound is 0.4
        assert!((b.t_sharp - 0.4).abs() < 1e-3);
    }

    #[test]
    fn stationary_trajectory_fails_b10() {
        let times: Vec<f64> = (0..5).map(|k| k as f64 * 0.1).collect();
        let energies = vec![0.0; 5];
        let entries = check_energy_ode(&times, &energies, 2.0, 1.0, 1e-6).unwrap();
        assert!(entries.iter().all(|e| !e.pass), "dE/dt = 0 < F_2(0) = 1 must fail");
    }

    #[test]
    fn slack_sign_convention() {
        let e = CertificateEntry::new(CertName::B5, 1.0, 2.0, 0.5, 0.0);
        assert!(!e.pass);
        assert_eq!(e.slack, -1.0);
        let e = CertificateEntry::new(CertName::B5, 2.0, 2.0, 0.0, 0.0);
        assert!(e.pass);
    }
}
