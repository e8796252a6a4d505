//! Built-in verification suites behind `memsim verify`: manufactured-
//! solution convergence, flat-membrane exactness, the lemma chain on canned
//! deflected states, and the pull-in threshold cross-check.

use crate::certificates::state_certificates;
use crate::error::Result;
use crate::grid::{build_grid, TransformedGrid};
use crate::potential::{dirichlet_energy, extract_traces, solve_potential, solve_potential_with_bc};
use crate::small_gap::{pullin_threshold, shooting_lambda_star};
use crate::state::MembraneState;

/// Outcome of one verification suite.
#[derive(Debug, Clone)]
pub struct SuiteResult {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

/// Manufactured solution ψ = sin(πx)·sinh(επ(1+z)), an exact solution of
/// ε²ψ_xx + ψ_zz = 0, imposed as Dirichlet data on a fixed domain with
/// u ≡ -0.25. Returns the interior L∞ error on an n×n grid.
pub fn mms_interior_error(n: usize, epsilon: f64) -> Result<f64> {
    let grid = build_grid(n, n)?;
    let u_val = -0.25;
    let a = 1.0 + u_val;
    let u = vec![u_val; n];
    let state = MembraneState { t: 0.0, ux: grid.derivative_x(&u)?, u };
    let exact = |x: f64, eta: f64| {
        let z = -1.0 + eta * a;
        (std::f64::consts::PI * x).sin() * (epsilon * std::f64::consts::PI * (1.0 + z)).sinh()
    };
    let field = solve_potential_with_bc(&state, epsilon, &grid, 1e-9, 1e-3, &|i, j| {
        exact(grid.x[i], grid.eta[j])
    })?;
    let mut err = 0.0f64;
    for i in 1..n - 1 {
        for j in 1..n - 1 {
            err = err.max((field.at(i, j) - exact(grid.x[i], grid.eta[j])).abs());
        }
    }
    Ok(err)
}

/// MMS errors over a grid-doubling sequence plus the contraction ratios.
pub fn mms_convergence(sizes: &[usize], epsilon: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut errors = Vec::with_capacity(sizes.len());
    for &n in sizes {
        errors.push(mms_interior_error(n, epsilon)?);
    }
    let ratios = errors.windows(2).map(|w| w[0] / w[1]).collect();
    Ok((errors, ratios))
}

/// Deflected state u = -c(1-x²) on the given grid.
pub fn parabolic_state(c: f64, grid: &TransformedGrid) -> Result<MembraneState> {
    let u: Vec<f64> = grid.x.iter().map(|&x| -c * (1.0 - x * x)).collect();
    MembraneState::new(0.0, u, grid, 0.0)
}

/// Solves and certifies one canned state; returns the certificate list.
pub fn certify_canned_state(
    c: f64,
    epsilon: f64,
    grid: &TransformedGrid,
    tol_linear: f64,
    cert_tol: f64,
) -> Result<Vec<crate::certificates::CertificateEntry>> {
    let state = parabolic_state(c, grid)?;
    let field = solve_potential(&state, epsilon, grid, tol_linear, 1e-3)?;
    let traces = extract_traces(&field, &state, grid);
    let dirichlet = dirichlet_energy(&field, &state, epsilon, grid)?;
    state_certificates(&state, &field, &traces, dirichlet, epsilon, grid, cert_tol)
}

/// Flat-membrane exactness probe: returns (max |φ - η|, max |γ - 1|).
pub fn flat_membrane_errors(epsilon: f64, grid: &TransformedGrid) -> Result<(f64, f64)> {
    let state = parabolic_state(0.0, grid)?;
    let field = solve_potential(&state, epsilon, grid, 1e-10, 1e-3)?;
    let traces = extract_traces(&field, &state, grid);
    let mut phi_err = 0.0f64;
    for i in 0..grid.nx {
        for j in 0..grid.nz {
            phi_err = phi_err.max((field.at(i, j) - grid.eta[j]).abs());
        }
    }
    let gamma_err = traces
        .gamma_m
        .iter()
        .chain(&traces.gamma_g)
        .map(|&g| (g - 1.0).abs())
        .fold(0.0f64, f64::max);
    Ok((phi_err, gamma_err))
}

/// Runs every suite and collects verdicts. `fast` shrinks the grids so the
/// CLI stays interactive; the acceptance tests run the full sizes.
pub fn run_all_suites(fast: bool) -> Vec<SuiteResult> {
    let mut results = Vec::new();

    // MMS convergence
    let sizes: &[usize] = if fast { &[65, 129] } else { &[65, 129, 257] };
    results.push(match mms_convergence(sizes, 1.0) {
        Ok((errors, ratios)) => {
            let ok = ratios.iter().all(|&r| (3.5..=4.5).contains(&r));
            SuiteResult {
                name: "mms_convergence",
                pass: ok,
                detail: format!("errors {errors:?}, ratios {ratios:.2?}"),
            }
        }
        Err(e) => SuiteResult { name: "mms_convergence", pass: false, detail: e.to_string() },
    });

    // flat-membrane saturation
    let grid = build_grid(if fast { 129 } else { 257 }, if fast { 65 } else { 129 }).unwrap();
    let mut worst_phi = 0.0f64;
    let mut worst_gamma = 0.0f64;
    let mut flat_ok = true;
    for &eps in &[0.1, 1.0, 5.0] {
        match flat_membrane_errors(eps, &grid) {
            Ok((p, g)) => {
                worst_phi = worst_phi.max(p);
                worst_gamma = worst_gamma.max(g);
            }
            Err(_) => flat_ok = false,
        }
    }
    results.push(SuiteResult {
        name: "flat_membrane_saturation",
        pass: flat_ok && worst_phi <= 1e-9 && worst_gamma <= 1e-8,
        detail: format!("max|phi-eta| = {worst_phi:.3e}, max|gamma-1| = {worst_gamma:.3e}"),
    });

    // lemma chain on canned states
    let cert_tol = 50.0 * (grid.hx * grid.hx + grid.heta * grid.heta);
    let mut failures = 0usize;
    let mut total = 0usize;
    for &c in &[0.1, 0.3, 0.6] {
        for &eps in &[0.1, 1.0, 2.0] {
            match certify_canned_state(c, eps, &grid, 1e-9, cert_tol) {
                Ok(list) => {
                    total += list.len();
                    failures += list.iter().filter(|e| !e.pass).count();
                }
                Err(_) => failures += 1,
            }
        }
    }
    results.push(SuiteResult {
        name: "lemma_chain_canned_states",
        pass: failures == 0,
        detail: format!("{failures} failures out of {total} certificates"),
    });

    // pull-in threshold against the shooting oracle
    let nx = if fast { 257 } else { 513 };
    results.push(match pullin_threshold(nx, 1e-6) {
        Ok((lambda_star, _)) => {
            let oracle = shooting_lambda_star();
            let rel = (lambda_star - oracle).abs() / oracle;
            SuiteResult {
                name: "pullin_threshold_regression",
                pass: rel < 5e-4,
                detail: format!("continuation {lambda_star:.6}, oracle {oracle:.6}, rel diff {rel:.2e}"),
            }
        }
        Err(e) => SuiteResult { name: "pullin_threshold_regression", pass: false, detail: e.to_string() },
    });

    results
}
