//! Transformed elliptic potential problem on the reference rectangle.
//!
//! The rescaled Laplace equation ε²ψ_xx + ψ_zz = 0 on the moving domain
//! Ω(u) becomes, under η = (1+z)/a(x) with a = 1 + u and L = a'/a,
//!
//! ```text
//! ε² [ φ_xx - 2ηL φ_xη + η²L² φ_ηη + η(2L² - a''/a) φ_η ] + a⁻² φ_ηη = 0
//! ```
//!
//! with Dirichlet data φ(x,0) = 0, φ(x,1) = 1, φ(±1,η) = η. Nodes are
//! stored η-fastest: index = i*nz + j.

pub mod banded;

use crate::certificates::{CertName, CertificateEntry};
use crate::error::{Error, Result};
use crate::grid::TransformedGrid;
use crate::state::MembraneState;

use banded::BandedMatrix;

/// Solved transformed potential φ with the achieved linear-solve residual.
#[derive(Debug, Clone)]
pub struct PotentialField {
    pub nx: usize,
    pub nz: usize,
    /// φ samples, η-fastest.
    pub phi: Vec<f64>,
    /// Relative residual ‖Aφ - b‖₂ / ‖b‖₂ of the linear solve.
    pub residual_norm: f64,
}

impl PotentialField {
    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.phi[i * self.nz + j]
    }
}

/// Boundary traces of ψ reconstructed from the solved field.
#[derive(Debug, Clone)]
pub struct TraceSet {
    /// ∂_zψ on the membrane, γ_m(x) = φ_η(x,1)/a(x).
    pub gamma_m: Vec<f64>,
    /// ∂_zψ on the ground plate, γ_g(x) = φ_η(x,0)/a(x).
    pub gamma_g: Vec<f64>,
    /// ∂ₓψ(-1, ·) and ∂ₓψ(+1, ·) over the z levels.
    pub side_px_left: Vec<f64>,
    pub side_px_right: Vec<f64>,
    /// ∂_zψ(-1, ·) and ∂_zψ(+1, ·) over the z levels.
    pub side_pz_left: Vec<f64>,
    pub side_pz_right: Vec<f64>,
}

/// Assembled discrete operator with right-hand side and Dirichlet mask.
pub struct LinearSystem {
    pub matrix: BandedMatrix,
    pub rhs: Vec<f64>,
    pub dirichlet: Vec<bool>,
}

/// Metric coefficients of the transformed operator at one interior node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricCoeffs {
    /// Multiplies φ_xx.
    pub c_xx: f64,
    /// Multiplies φ_xη.
    pub c_xe: f64,
    /// Multiplies φ_ηη.
    pub c_ee: f64,
    /// Multiplies φ_η.
    pub c_e: f64,
}

/// Evaluates the metric coefficients at node (i, j) from the cached discrete
/// derivatives of u.
pub fn metric_coefficients(
    u: &MembraneState,
    uxx: &[f64],
    epsilon: f64,
    grid: &TransformedGrid,
    i: usize,
    j: usize,
) -> MetricCoeffs {
    let a = 1.0 + u.u[i];
    let l = u.ux[i] / a;
    let eta = grid.eta[j];
    let e2 = epsilon * epsilon;
    MetricCoeffs {
        c_xx: e2,
        c_xe: -2.0 * e2 * eta * l,
        c_ee: e2 * eta * eta * l * l + 1.0 / (a * a),
        c_e: e2 * eta * (2.0 * l * l - uxx[i] / a),
    }
}

fn default_bc(grid: &TransformedGrid, _i: usize, j: usize) -> f64 {
    if j == 0 {
        0.0
    } else if j == grid.nz - 1 {
        1.0
    } else {
        grid.eta[j]
    }
}

/// Discretizes the transformed equation with second-order centered stencils;
/// the mixed term uses the symmetric four-corner cross stencil.
pub fn assemble_transformed_operator(
    u: &MembraneState,
    epsilon: f64,
    grid: &TransformedGrid,
    delta_touch: f64,
) -> Result<LinearSystem> {
    assemble_with_bc(u, epsilon, grid, delta_touch, &|i, j| default_bc(grid, i, j))
}

/// Same operator with caller-supplied Dirichlet data (used by manufactured-
/// solution verification).
pub fn assemble_with_bc(
    u: &MembraneState,
    epsilon: f64,
    grid: &TransformedGrid,
    delta_touch: f64,
    bc: &dyn Fn(usize, usize) -> f64,
) -> Result<LinearSystem> {
    if u.min_gap() < delta_touch {
        return Err(Error::NearTouchdown { min_gap: u.min_gap(), t: u.t });
    }
    let (nx, nz) = (grid.nx, grid.nz);
    let n = nx * nz;
    let bw = nz + 1;
    let mut m = BandedMatrix::new(n, bw, bw);
    let mut rhs = vec![0.0; n];
    let mut dirichlet = vec![false; n];
    let uxx = grid.second_difference_x(&u.u)?;

    let hx2 = grid.hx * grid.hx;
    let he2 = grid.heta * grid.heta;
    let cross = 4.0 * grid.hx * grid.heta;

    for i in 0..nx {
        for j in 0..nz {
            let row = i * nz + j;
            if i == 0 || i == nx - 1 || j == 0 || j == nz - 1 {
                m.set(row, row, 1.0);
                rhs[row] = bc(i, j);
                dirichlet[row] = true;
                continue;
            }
            let c = metric_coefficients(u, &uxx, epsilon, grid, i, j);
            let diag = -2.0 * c.c_xx / hx2 - 2.0 * c.c_ee / he2;
            // equilibrate by the diagonal so every row is O(1); keeps the
            // solution unchanged and the residual norm meaningful
            let s = 1.0 / diag.abs();
            m.set(row, row, s * diag);
            m.set(row, row - nz, s * c.c_xx / hx2);
            m.set(row, row + nz, s * c.c_xx / hx2);
            m.set(row, row - 1, s * (c.c_ee / he2 - c.c_e / (2.0 * grid.heta)));
            m.set(row, row + 1, s * (c.c_ee / he2 + c.c_e / (2.0 * grid.heta)));
            let w = s * c.c_xe / cross;
            m.set(row, row + nz + 1, w);
            m.set(row, row - nz - 1, w);
            m.set(row, row + nz - 1, -w);
            m.set(row, row - nz + 1, -w);
        }
    }
    Ok(LinearSystem { matrix: m, rhs, dirichlet })
}

fn solve_system(sys: LinearSystem, grid: &TransformedGrid, tol_linear: f64, t: f64) -> Result<PotentialField> {
    let mut x = sys.rhs.clone();
    let a_copy = sys.matrix.clone();
    let lu = sys.matrix.factor()?;
    lu.solve(&mut x);
    let relative_residual = |x: &[f64]| {
        let ax = a_copy.mul_vec(x);
        let mut rr = 0.0;
        let mut bb = 0.0;
        for (&axi, &bi) in ax.iter().zip(sys.rhs.iter()) {
            let r = axi - bi;
            rr += r * r;
            bb += bi * bi;
        }
        if bb > 0.0 { (rr / bb).sqrt() } else { rr.sqrt() }
    };
    let mut residual_norm = relative_residual(&x);
    // a round of iterative refinement recovers the digits lost to the
    // conditioning growth as the membrane deflects
    for _ in 0..2 {
        if !(residual_norm.is_finite() && residual_norm > 0.01 * tol_linear) {
            break;
        }
        let ax = a_copy.mul_vec(&x);
        let mut r: Vec<f64> = sys.rhs.iter().zip(&ax).map(|(&b, &a)| b - a).collect();
        lu.solve(&mut r);
        for (xi, di) in x.iter_mut().zip(&r) {
            *xi += di;
        }
        residual_norm = relative_residual(&x);
    }
    if !residual_norm.is_finite() || residual_norm > tol_linear {
        return Err(Error::SolverFailure {
            message: format!("relative residual {residual_norm:.3e} exceeds {tol_linear:.3e}"),
            t,
        });
    }
    // Dirichlet rows are identity rows; pin them exactly.
    let mut phi = x;
    for (k, &is_bc) in sys.dirichlet.iter().enumerate() {
        if is_bc {
            phi[k] = sys.rhs[k];
        }
    }
    Ok(PotentialField { nx: grid.nx, nz: grid.nz, phi, residual_norm })
}

/// Assembles and solves the potential problem for the given membrane state.
pub fn solve_potential(
    u: &MembraneState,
    epsilon: f64,
    grid: &TransformedGrid,
    tol_linear: f64,
    delta_touch: f64,
) -> Result<PotentialField> {
    let sys = assemble_transformed_operator(u, epsilon, grid, delta_touch)?;
    solve_system(sys, grid, tol_linear, u.t)
}

/// Solve with caller-supplied Dirichlet data.
pub fn solve_potential_with_bc(
    u: &MembraneState,
    epsilon: f64,
    grid: &TransformedGrid,
    tol_linear: f64,
    delta_touch: f64,
    bc: &dyn Fn(usize, usize) -> f64,
) -> Result<PotentialField> {
    let sys = assemble_with_bc(u, epsilon, grid, delta_touch, bc)?;
    solve_system(sys, grid, tol_linear, u.t)
}

/// One-sided 3-point ∂/∂η at η = 1 of column i.
fn phi_eta_top(field: &PotentialField, grid: &TransformedGrid, i: usize) -> f64 {
    let nz = grid.nz;
    (3.0 * field.at(i, nz - 1) - 4.0 * field.at(i, nz - 2) + field.at(i, nz - 3)) / (2.0 * grid.heta)
}

/// One-sided 3-point ∂/∂η at η = 0 of column i.
fn phi_eta_bottom(field: &PotentialField, grid: &TransformedGrid, i: usize) -> f64 {
    (-3.0 * field.at(i, 0) + 4.0 * field.at(i, 1) - field.at(i, 2)) / (2.0 * grid.heta)
}

fn phi_eta(field: &PotentialField, grid: &TransformedGrid, i: usize, j: usize) -> f64 {
    if j == 0 {
        phi_eta_bottom(field, grid, i)
    } else if j == grid.nz - 1 {
        phi_eta_top(field, grid, i)
    } else {
        (field.at(i, j + 1) - field.at(i, j - 1)) / (2.0 * grid.heta)
    }
}

fn phi_x(field: &PotentialField, grid: &TransformedGrid, i: usize, j: usize) -> f64 {
    let nx = grid.nx;
    if i == 0 {
        (-3.0 * field.at(0, j) + 4.0 * field.at(1, j) - field.at(2, j)) / (2.0 * grid.hx)
    } else if i == nx - 1 {
        (3.0 * field.at(nx - 1, j) - 4.0 * field.at(nx - 2, j) + field.at(nx - 3, j)) / (2.0 * grid.hx)
    } else {
        (field.at(i + 1, j) - field.at(i - 1, j)) / (2.0 * grid.hx)
    }
}

/// Extracts membrane/plate traces and the lateral derivatives of ψ,
/// reconstructed through the chain rule of the map.
pub fn extract_traces(field: &PotentialField, u: &MembraneState, grid: &TransformedGrid) -> TraceSet {
    let nx = grid.nx;
    let nz = grid.nz;
    let mut gamma_m = vec![0.0; nx];
    let mut gamma_g = vec![0.0; nx];
    for i in 0..nx {
        let a = 1.0 + u.u[i];
        gamma_m[i] = phi_eta_top(field, grid, i) / a;
        gamma_g[i] = phi_eta_bottom(field, grid, i) / a;
    }
    // On x = ±1: a = 1, η coincides with 1 + z, and
    // ψ_x = φ_x - ηL φ_η with L = u_x(±1).
    let side = |i: usize| {
        let l = u.ux[i] / (1.0 + u.u[i]);
        let mut px = vec![0.0; nz];
        let mut pz = vec![0.0; nz];
        for j in 0..nz {
            let fe = phi_eta(field, grid, i, j);
            px[j] = phi_x(field, grid, i, j) - grid.eta[j] * l * fe;
            pz[j] = fe / (1.0 + u.u[i]);
        }
        (px, pz)
    };
    let (side_px_left, side_pz_left) = side(0);
    let (side_px_right, side_pz_right) = side(nx - 1);
    TraceSet { gamma_m, gamma_g, side_px_left, side_px_right, side_pz_left, side_pz_right }
}

/// Dirichlet energy ∬_{Ω(u)} (ε²ψ_x² + ψ_z²) d(x,z), evaluated on the
/// reference rectangle with Jacobian a(x) and the mapped gradient.
pub fn dirichlet_energy(
    field: &PotentialField,
    u: &MembraneState,
    epsilon: f64,
    grid: &TransformedGrid,
) -> Result<f64> {
    let (nx, nz) = (grid.nx, grid.nz);
    let e2 = epsilon * epsilon;
    let mut w = vec![0.0; nx * nz];
    for i in 0..nx {
        let a = 1.0 + u.u[i];
        let l = u.ux[i] / a;
        for j in 0..nz {
            let fx = phi_x(field, grid, i, j);
            let fe = phi_eta(field, grid, i, j);
            let psi_x = fx - grid.eta[j] * l * fe;
            let psi_z = fe / a;
            w[i * nz + j] = (e2 * psi_x * psi_x + psi_z * psi_z) * a;
        }
    }
    grid.integrate_xe(&w)
}

/// Pointwise potential-bound certificates: ψ ≤ 1, ψ ≥ 1 + z, and the
/// lateral sign condition ±∂ₓψ(±1,·) ≤ 0.
///
/// The discrete operator with mixed terms is not an M-matrix, so these are
/// checked with tolerance rather than as exact sign assertions.
pub fn verify_potential_bounds(
    field: &PotentialField,
    u: &MembraneState,
    traces: &TraceSet,
    grid: &TransformedGrid,
    tol: f64,
) -> Vec<CertificateEntry> {
    let (nx, nz) = (grid.nx, grid.nz);
    let mut max_phi = f64::NEG_INFINITY;
    let mut min_above_floor = f64::INFINITY;
    for i in 0..nx {
        let a = 1.0 + u.u[i];
        for j in 0..nz {
            let phi = field.at(i, j);
            max_phi = max_phi.max(phi);
            // 1 + z = η a on the reference rectangle
            min_above_floor = min_above_floor.min(phi - grid.eta[j] * a);
        }
    }
    let worst_side = traces
        .side_px_right
        .iter()
        .copied()
        .chain(traces.side_px_left.iter().map(|&v| -v))
        .fold(f64::NEG_INFINITY, f64::max);
    vec![
        CertificateEntry::new(CertName::B1Upper, 1.0, max_phi, tol, u.t),
        CertificateEntry::new(CertName::B1Lower, min_above_floor, 0.0, tol, u.t),
        CertificateEntry::new(CertName::B2, -worst_side, 0.0, tol, u.t),
    ]
}

/// Residual of the tangential identity ∂ₓψ + u_x ∂_zψ = 0 on the membrane,
/// evaluated through an independent route: ψ_x is reconstructed by finite
/// differencing ψ at constant physical height z = u(x_i), interpolating the
/// neighbouring columns in η. The residual is normalized by the magnitude
/// of the two terms so it stays dimensionless as both grow near touchdown.
pub fn membrane_tangential_residual(
    field: &PotentialField,
    u: &MembraneState,
    traces: &TraceSet,
    grid: &TransformedGrid,
) -> f64 {
    let nx = grid.nx;
    let nz = grid.nz;
    let mut worst = 0.0f64;
    // quadratic interpolation/extrapolation in η through the top three nodes
    let interp_top = |i: usize, eta: f64| -> f64 {
        let e2 = grid.eta[nz - 1];
        let e1 = grid.eta[nz - 2];
        let e0 = grid.eta[nz - 3];
        let f2 = field.at(i, nz - 1);
        let f1 = field.at(i, nz - 2);
        let f0 = field.at(i, nz - 3);
        f0 * (eta - e1) * (eta - e2) / ((e0 - e1) * (e0 - e2))
            + f1 * (eta - e0) * (eta - e2) / ((e1 - e0) * (e1 - e2))
            + f2 * (eta - e0) * (eta - e1) / ((e2 - e0) * (e2 - e1))
    };
    for i in 1..nx - 1 {
        let a = 1.0 + u.u[i];
        // ψ(x_{i±1}, u(x_i)) = φ(x_{i±1}, a_i / a_{i±1})
        let eta_right = a / (1.0 + u.u[i + 1]);
        let eta_left = a / (1.0 + u.u[i - 1]);
        // skip columns whose target height leaves the quadratic's trust
        // region (steep contact zones near touchdown)
        if (eta_right - 1.0).abs() > 2.0 * grid.heta || (eta_left - 1.0).abs() > 2.0 * grid.heta {
            continue;
        }
        let psi_right = interp_top(i + 1, eta_right);
        let psi_left = interp_top(i - 1, eta_left);
        let psi_x = (psi_right - psi_left) / (2.0 * grid.hx);
        let scale = 1.0f64.max(psi_x.abs()).max((u.ux[i] * traces.gamma_m[i]).abs());
        worst = worst.max((psi_x + u.ux[i] * traces.gamma_m[i]).abs() / scale);
    }
    worst
}
