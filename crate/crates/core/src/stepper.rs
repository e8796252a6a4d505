//! Semi-implicit time integration of the membrane equation, adaptive step
//! control, and breakdown classification.
//!
//! The curvature operator is linearized by lagging the mobility
//! 1/sqrt(1+ε²u_x²) at the old state, which leaves a linear tridiagonal
//! implicit diffusion; the electrostatic term is treated explicitly.

use crate::certificates::{check_energy_ode, energy_e, BlowupBounds, CertName, CertificateEntry};
use crate::config::SimulationConfig;
use crate::error::{Error, Result};
use crate::grid::TransformedGrid;
use crate::potential::{dirichlet_energy, extract_traces, solve_potential, TraceSet};
use crate::state::{BreakdownKind, BreakdownStatus, MembraneState};

/// Safety factor of the step-size cap c_dt · min(1+u)² / λ_eff.
pub const C_DT: f64 = 0.1;
/// Hard floor on the time step.
pub const DT_MIN: f64 = 1e-12;
/// Growth factor per accepted step.
const DT_GROW: f64 = 1.2;

/// Per-step summary of an accepted state.
#[derive(Debug, Clone, Copy)]
pub struct Snapshot {
    pub t: f64,
    /// Step taken from this state (0 for the terminal row).
    pub dt: f64,
    pub min_u: f64,
    pub max_abs_ux: f64,
    pub max_abs_uxx: f64,
    pub energy: f64,
    pub dirichlet: f64,
}

/// Full record of one run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub snapshots: Vec<Snapshot>,
    /// All evaluated certificates; each entry carries its time.
    pub certificates: Vec<CertificateEntry>,
    pub status: BreakdownStatus,
    pub t_end: f64,
    pub final_state: MembraneState,
    /// Max-norm change of the last accepted step.
    pub final_step_change: f64,
    pub bounds: Option<BlowupBounds>,
    pub small_gap: bool,
    /// Gradient blow-up fired in the semilinear model, where it should not occur.
    pub anomalous_blowup: bool,
}

impl Trajectory {
    pub fn all_certificates_pass(&self) -> bool {
        self.certificates.iter().all(|c| c.pass)
    }

    /// Smallest slack margin slack + tol over all certificates.
    pub fn worst_slack(&self) -> f64 {
        self.certificates
            .iter()
            .map(|c| c.slack + c.tol)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Electrostatic reaction g(x) = -λ (1 + ε²u_x²) γ_m².
pub fn rhs_electrostatic(
    u: &MembraneState,
    traces: &TraceSet,
    lambda: f64,
    epsilon: f64,
) -> Vec<f64> {
    let e2 = epsilon * epsilon;
    u.ux
        .iter()
        .zip(&traces.gamma_m)
        .map(|(&ux, &g)| -lambda * (1.0 + e2 * ux * ux) * g * g)
        .collect()
}

/// Divergence-form curvature operator ∂ₓ(u_x / sqrt(1+ε²u_x²)) with
/// two-point face differences; zero on the Dirichlet rows.
pub fn curvature_operator(u: &MembraneState, epsilon: f64, grid: &TransformedGrid) -> Vec<f64> {
    let n = grid.nx;
    let h = grid.hx;
    let e2 = epsilon * epsilon;
    let flux = |a: f64, b: f64| {
        let d = (b - a) / h;
        d / (1.0 + e2 * d * d).sqrt()
    };
    let mut out = vec![0.0; n];
    for i in 1..n - 1 {
        out[i] = (flux(u.u[i], u.u[i + 1]) - flux(u.u[i - 1], u.u[i])) / h;
    }
    out
}

/// One semi-implicit step with the reaction term supplied by the caller.
///
/// Fails with [`Error::NearTouchdown`] when the update crosses u = -1
/// (callers halve dt and retry) and with [`Error::StepOvershoot`] when u
/// exceeds 0 by more than `clip_tol`.
pub fn step(
    u: &MembraneState,
    rhs: &[f64],
    dt: f64,
    epsilon: f64,
    grid: &TransformedGrid,
    clip_tol: f64,
) -> Result<MembraneState> {
    let n = grid.nx;
    if rhs.len() != n {
        return Err(Error::ShapeMismatch { expected: n, got: rhs.len() });
    }
    let h = grid.hx;
    let e2 = epsilon * epsilon;
    let r = dt / (h * h);

    // lagged mobility at the faces
    let mut mob = vec![0.0; n - 1];
    for i in 0..n - 1 {
        let d = (u.u[i + 1] - u.u[i]) / h;
        mob[i] = 1.0 / (1.0 + e2 * d * d).sqrt();
    }

    // tridiagonal system (identity rows at x = ±1)
    let mut lower = vec![0.0; n];
    let mut diag = vec![1.0; n];
    let mut upper = vec![0.0; n];
    let mut b = vec![0.0; n];
    for i in 1..n - 1 {
        lower[i] = -r * mob[i - 1];
        upper[i] = -r * mob[i];
        diag[i] = 1.0 + r * (mob[i - 1] + mob[i]);
        b[i] = u.u[i] + dt * rhs[i];
    }

    // Thomas sweep
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = upper[0] / diag[0];
    d[0] = b[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - lower[i] * c[i - 1];
        c[i] = upper[i] / m;
        d[i] = (b[i] - lower[i] * d[i - 1]) / m;
    }
    let mut unew = vec![0.0; n];
    unew[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        unew[i] = d[i] - c[i] * unew[i + 1];
    }
    unew[0] = 0.0;
    unew[n - 1] = 0.0;

    let t_new = u.t + dt;
    let min_new = unew.iter().cloned().fold(f64::INFINITY, f64::min);
    if min_new <= -1.0 {
        return Err(Error::NearTouchdown { min_gap: 1.0 + min_new, t: t_new });
    }
    let max_new = unew.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max_new > 0.0 {
        if max_new > clip_tol {
            return Err(Error::StepOvershoot { overshoot: max_new, t: t_new });
        }
        for v in unew.iter_mut() {
            if *v > 0.0 {
                *v = 0.0;
            }
        }
    }
    MembraneState::new(t_new, unew, grid, 0.0)
}

/// Step-size update: grow by 20% but cap at c_dt · min(1+u)² / max(λ, 1).
/// The cap shrinks near touchdown because the reaction scales like (1+u)⁻².
pub fn adapt_dt(u: &MembraneState, dt_prev: f64, lambda: f64) -> Result<f64> {
    let lambda_eff = lambda.max(1.0);
    let gap = u.min_gap();
    let cap = C_DT * gap * gap / lambda_eff;
    let dt = (dt_prev * DT_GROW).min(cap);
    if dt < DT_MIN {
        return Err(Error::DtUnderflow { t: u.t });
    }
    Ok(dt)
}

/// Classifies the current state against the breakdown dichotomy:
/// touchdown (gap closes) or gradient blow-up (second-difference proxy for
/// loss of W²_q control).
pub fn detect_breakdown(
    u: &MembraneState,
    grid: &TransformedGrid,
    config: &SimulationConfig,
) -> Result<BreakdownStatus> {
    if u.min_gap() <= config.delta_touch {
        return Ok(BreakdownStatus { kind: BreakdownKind::Touchdown, t_event: u.t });
    }
    let uxx = grid.second_difference_x(&u.u)?;
    let worst = uxx.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    if worst >= config.grad_max {
        return Ok(BreakdownStatus { kind: BreakdownKind::GradientBlowup, t_event: u.t });
    }
    Ok(BreakdownStatus { kind: BreakdownKind::Running, t_event: u.t })
}

/// Per-state evaluation supplied by the concrete model (full or small-gap).
pub(crate) struct StepEval {
    pub rhs: Vec<f64>,
    pub dirichlet: f64,
    pub certs: Option<Vec<CertificateEntry>>,
}

/// Shared trajectory loop. `eval` computes the reaction term and, on
/// request, the per-state certificate list.
pub(crate) fn run_loop(
    config: &SimulationConfig,
    grid: &TransformedGrid,
    small_gap: bool,
    mut eval: impl FnMut(&MembraneState, bool) -> Result<StepEval>,
) -> Result<Trajectory> {
    config.validate()?;
    let mut state = config.initial_state(grid)?;
    let cert_tol = config.cert_tol(grid);
    let bounds = if small_gap {
        None
    } else {
        crate::certificates::blowup_time_bound(&state, config.lambda, config.epsilon, grid)?
    };

    let mut snapshots: Vec<Snapshot> = Vec::new();
    let mut certificates: Vec<CertificateEntry> = Vec::new();
    let mut dt = config.dt_init;
    let mut step_idx: usize = 0;
    let mut final_step_change = f64::INFINITY;
    let mut last_certified_t = f64::NEG_INFINITY;
    let mut last_dt_used = 0.0;
    let mut last_resolved: Option<MembraneState> = None;
    // the grid resolves the membrane as long as the slope change per cell
    // stays moderate; beyond that, per-state certificates lose meaning
    let resolved = |s: &MembraneState| s.max_abs_ux() * grid.hx <= 0.25;

    let status = loop {
        let status = detect_breakdown(&state, grid, config)?;
        if status.kind.is_breakdown() {
            break status;
        }
        if state.t >= config.t_max * (1.0 - 1e-14) {
            break BreakdownStatus { kind: BreakdownKind::TimeLimit, t_event: state.t };
        }

        let want_certs = step_idx % config.cert_every == 0 && resolved(&state);
        let ev = eval(&state, want_certs)?;
        if let Some(list) = ev.certs {
            certificates.extend(list);
            last_certified_t = state.t;
        }
        if resolved(&state) {
            last_resolved = Some(state.clone());
        }

        // advance, halving on a touchdown crossing
        let mut dt_try = dt.min(config.t_max - state.t);
        let new_state = loop {
            match step(&state, &ev.rhs, dt_try, config.epsilon, grid, cert_tol) {
                Ok(s) => break s,
                Err(Error::NearTouchdown { .. }) => {
                    dt_try *= 0.5;
                    if dt_try < DT_MIN {
                        // touchdown-adjacent stall
                        break MembraneState { t: state.t, u: state.u.clone(), ux: state.ux.clone() };
                    }
                }
                Err(e) => return Err(e),
            }
        };
        if new_state.t == state.t {
            break BreakdownStatus { kind: BreakdownKind::Touchdown, t_event: state.t };
        }

        snapshots.push(make_snapshot(&state, dt_try, ev.dirichlet, grid)?);
        final_step_change = state
            .u
            .iter()
            .zip(&new_state.u)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        state = new_state;
        last_dt_used = dt_try;
        step_idx += 1;
        dt = match adapt_dt(&state, dt_try, config.lambda) {
            Ok(v) => v,
            Err(Error::DtUnderflow { t }) => {
                break BreakdownStatus { kind: BreakdownKind::Touchdown, t_event: t };
            }
            Err(e) => return Err(e),
        };
    };

    // terminal snapshot; the elliptic problem may already be degenerate
    // here, so no Dirichlet energy is recorded for it
    snapshots.push(make_snapshot(&state, 0.0, f64::NAN, grid)?);

    // the final pre-breakdown state is always certified; when the terminal
    // state is already outside the resolvable regime (gap closed, slopes
    // past what the grid can represent), fall back to the last resolved one
    let terminal_ok = state.min_gap() >= config.delta_touch
        && status.kind != BreakdownKind::GradientBlowup
        && resolved(&state);
    let candidate = if terminal_ok { Some(state.clone()) } else { last_resolved };
    if let Some(pre) = candidate {
        if pre.t > last_certified_t {
            let ev = eval(&pre, true)?;
            if let Some(list) = ev.certs {
                certificates.extend(list);
            }
        }
    }

    // trajectory-level certificates
    if !small_gap && snapshots.len() >= 3 {
        let times: Vec<f64> = snapshots.iter().map(|s| s.t).collect();
        let energies: Vec<f64> = snapshots.iter().map(|s| s.energy).collect();
        certificates.extend(check_energy_ode(
            &times,
            &energies,
            config.lambda,
            config.epsilon,
            cert_tol,
        )?);
    }
    if let (Some(b), true) = (bounds.as_ref(), status.kind.is_breakdown()) {
        let tol_time = 0.05 * b.t_bound + last_dt_used;
        certificates.push(CertificateEntry::new(
            CertName::ThmCBound,
            b.t_bound,
            status.t_event,
            tol_time,
            status.t_event,
        ));
    }

    let anomalous = small_gap && status.kind == BreakdownKind::GradientBlowup;
    Ok(Trajectory {
        t_end: state.t,
        final_state: state,
        snapshots,
        certificates,
        status,
        final_step_change,
        bounds,
        small_gap,
        anomalous_blowup: anomalous,
    })
}

fn make_snapshot(
    state: &MembraneState,
    dt: f64,
    dirichlet: f64,
    grid: &TransformedGrid,
) -> Result<Snapshot> {
    let uxx = grid.second_difference_x(&state.u)?;
    Ok(Snapshot {
        t: state.t,
        dt,
        min_u: state.min_u(),
        max_abs_ux: state.max_abs_ux(),
        max_abs_uxx: uxx.iter().fold(0.0f64, |m, &v| m.max(v.abs())),
        energy: energy_e(state, grid)?,
        dirichlet,
    })
}

/// Runs the full coupled model: elliptic solve, traces, certificates,
/// semi-implicit step, adaptive dt, breakdown classification.
pub fn run_simulation(config: &SimulationConfig) -> Result<Trajectory> {
    let grid = config.build_grid()?;
    let cert_tol = config.cert_tol(&grid);
    run_loop(config, &grid, false, |state, want_certs| {
        let field = solve_potential(state, config.epsilon, &grid, config.tol_linear, config.delta_touch)?;
        let traces = extract_traces(&field, state, &grid);
        let dirichlet = dirichlet_energy(&field, state, config.epsilon, &grid)?;
        let certs = if want_certs {
            Some(crate::certificates::state_certificates(
                state,
                &field,
                &traces,
                dirichlet,
                config.epsilon,
                &grid,
                cert_tol,
            )?)
        } else {
            None
        };
        Ok(StepEval {
            rhs: rhs_electrostatic(state, &traces, config.lambda, config.epsilon),
            dirichlet,
            certs,
        })
    })
}
