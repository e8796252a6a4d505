//! The ε = 0 reduced model: a singular semilinear heat equation with the
//! closed-form reaction -λ/(1+u)², plus a steady-state continuation solver
//! for the pull-in threshold λ* and a cross-model comparison harness.

use crate::certificates::check_jensen;
use crate::config::SimulationConfig;
use crate::error::{Error, Result};
use crate::state::MembraneState;
use crate::stepper::{run_loop, StepEval, Trajectory};

/// Reaction g(x) = -λ/(1+u(x))² of the small-gap model.
pub fn rhs_small_gap(u: &MembraneState, lambda: f64) -> Result<Vec<f64>> {
    if u.min_gap() <= 0.0 {
        return Err(Error::InvalidState("1 + u must stay positive".into()));
    }
    Ok(u.u
        .iter()
        .map(|&v| {
            let a = 1.0 + v;
            -lambda / (a * a)
        })
        .collect())
}

/// Runs the reduced model with the same stepper contract as the full model;
/// `config.epsilon` is ignored. Gradient blow-up should not occur in this
/// semilinear setting and is flagged as anomalous when it fires.
pub fn run_small_gap(config: &SimulationConfig) -> Result<Trajectory> {
    let grid = config.build_grid()?;
    let cert_tol = config.cert_tol(&grid);
    // the curvature denominator is 1 at ε = 0
    let mut cfg = config.clone();
    cfg.epsilon = 0.0;
    // epsilon = 0 would fail generic validation paths that divide by it;
    // run_loop only uses it inside `step`, where ε² = 0 is exactly the
    // reduced curvature operator.
    run_loop(&cfg, &grid, true, |state, want_certs| {
        let rhs = rhs_small_gap(state, config.lambda)?;
        // limit of the Dirichlet energy as ε → 0
        let inv_gap: Vec<f64> = state.u.iter().map(|&v| 1.0 / (1.0 + v)).collect();
        let dirichlet = grid.integrate_x(&inv_gap)?;
        let certs = if want_certs {
            Some(vec![check_jensen(state, &grid, cert_tol)?])
        } else {
            None
        };
        Ok(StepEval { rhs, dirichlet, certs })
    })
}

/// One point on the steady branch of u'' = λ/(1+u)², u(±1) = 0.
#[derive(Debug, Clone, Copy)]
pub struct BranchPoint {
    pub s: f64,
    pub lambda: f64,
    pub min_u: f64,
}

/// Steady branch with the detected fold (λ*, min u at the fold).
#[derive(Debug, Clone)]
pub struct SteadyBranch {
    pub points: Vec<BranchPoint>,
    pub fold: Option<(f64, f64)>,
}

/// Residual target for accepted continuation points.
const STEADY_RESIDUAL: f64 = 1e-11;

struct SteadyProblem {
    nx: usize,
    h: f64,
}

impl SteadyProblem {
    /// F_i = (u_{i-1} - 2u_i + u_{i+1})/h² - λ/(1+u_i)², identity BC rows.
    fn residual(&self, u: &[f64], lambda: f64) -> Vec<f64> {
        let n = self.nx;
        let h2 = self.h * self.h;
        let mut f = vec![0.0; n];
        f[0] = u[0];
        f[n - 1] = u[n - 1];
        for i in 1..n - 1 {
            let a = 1.0 + u[i];
            f[i] = (u[i - 1] - 2.0 * u[i] + u[i + 1]) / h2 - lambda / (a * a);
        }
        f
    }

    /// ∂F/∂λ.
    fn residual_lambda(&self, u: &[f64]) -> Vec<f64> {
        let n = self.nx;
        let mut f = vec![0.0; n];
        for (i, fi) in f.iter_mut().enumerate().take(n - 1).skip(1) {
            let a = 1.0 + u[i];
            *fi = -1.0 / (a * a);
        }
        f
    }

    /// Solves J y = b with the analytic tridiagonal Jacobian
    /// J = D² + diag(2λ/(1+u)³).
    fn jacobian_solve(&self, u: &[f64], lambda: f64, b: &[f64]) -> Vec<f64> {
        let n = self.nx;
        let h2 = self.h * self.h;
        let mut lower = vec![0.0; n];
        let mut diag = vec![1.0; n];
        let mut upper = vec![0.0; n];
        for i in 1..n - 1 {
            let a = 1.0 + u[i];
            lower[i] = 1.0 / h2;
            upper[i] = 1.0 / h2;
            diag[i] = -2.0 / h2 + 2.0 * lambda / (a * a * a);
        }
        thomas(&lower, &diag, &upper, b)
    }
}

fn thomas(lower: &[f64], diag: &[f64], upper: &[f64], b: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = upper[0] / diag[0];
    d[0] = b[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - lower[i] * c[i - 1];
        c[i] = upper[i] / m;
        d[i] = (b[i] - lower[i] * d[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, &x| m.max(x.abs()))
}

struct ContinuationPoint {
    u: Vec<f64>,
    lambda: f64,
    /// Unit tangent (t_u, t_λ) in arclength parameterization.
    tangent_u: Vec<f64>,
    tangent_lambda: f64,
    s: f64,
}

/// Newton corrector for the pseudo-arclength system, solved by bordering
/// (two tridiagonal solves per iteration).
fn correct(
    prob: &SteadyProblem,
    u: &mut Vec<f64>,
    lambda: &mut f64,
    pred_u: &[f64],
    pred_lambda: f64,
    t_u: &[f64],
    t_lambda: f64,
) -> Result<()> {
    for _ in 0..30 {
        let f = prob.residual(u, *lambda);
        let cons: f64 = u
            .iter()
            .zip(pred_u)
            .zip(t_u)
            .map(|((&ui, &pi), &ti)| (ui - pi) * ti)
            .sum::<f64>()
            + (*lambda - pred_lambda) * t_lambda;
        if norm_inf(&f) < STEADY_RESIDUAL && cons.abs() < STEADY_RESIDUAL {
            return Ok(());
        }
        let fl = prob.residual_lambda(u);
        let y = prob.jacobian_solve(u, *lambda, &f);
        let z = prob.jacobian_solve(u, *lambda, &fl);
        let tu_dot_y: f64 = t_u.iter().zip(&y).map(|(a, b)| a * b).sum();
        let tu_dot_z: f64 = t_u.iter().zip(&z).map(|(a, b)| a * b).sum();
        let denom = t_lambda - tu_dot_z;
        if denom.abs() < 1e-14 {
            return Err(Error::ContinuationStall { s: 0.0, lambda: *lambda });
        }
        let dlambda = (tu_dot_y - cons) / denom;
        for ((ui, yi), zi) in u.iter_mut().zip(&y).zip(&z) {
            *ui += -yi - dlambda * zi;
        }
        *lambda += dlambda;
    }
    Err(Error::ContinuationStall { s: 0.0, lambda: *lambda })
}

fn tangent_at(
    prob: &SteadyProblem,
    u: &[f64],
    lambda: f64,
    prev_tu: &[f64],
    prev_tl: f64,
) -> (Vec<f64>, f64) {
    // J du + F_λ dλ = 0 with dλ = 1, then normalize and orient
    let fl = prob.residual_lambda(u);
    let du = prob.jacobian_solve(u, lambda, &fl);
    let mut tu: Vec<f64> = du.iter().map(|&v| -v).collect();
    let mut tl = 1.0;
    let norm = (tu.iter().map(|v| v * v).sum::<f64>() + tl * tl).sqrt();
    for v in tu.iter_mut() {
        *v /= norm;
    }
    tl /= norm;
    let orient: f64 = tu.iter().zip(prev_tu).map(|(a, b)| a * b).sum::<f64>() + tl * prev_tl;
    if orient < 0.0 {
        for v in tu.iter_mut() {
            *v = -*v;
        }
        tl = -tl;
    }
    (tu, tl)
}

fn continuation_step(
    prob: &SteadyProblem,
    from: &ContinuationPoint,
    ds: f64,
) -> Result<ContinuationPoint> {
    let mut u: Vec<f64> = from
        .u
        .iter()
        .zip(&from.tangent_u)
        .map(|(&ui, &ti)| ui + ds * ti)
        .collect();
    let mut lambda = from.lambda + ds * from.tangent_lambda;
    let pred_u = u.clone();
    let pred_lambda = lambda;
    correct(prob, &mut u, &mut lambda, &pred_u, pred_lambda, &from.tangent_u, from.tangent_lambda)?;
    let (tu, tl) = tangent_at(prob, &u, lambda, &from.tangent_u, from.tangent_lambda);
    Ok(ContinuationPoint { u, lambda, tangent_u: tu, tangent_lambda: tl, s: from.s + ds })
}

/// Newton solve of the steady equation at fixed λ, starting from `u_init`
/// (natural continuation; cannot pass the fold, used for checks below λ*).
pub fn steady_state(nx: usize, lambda: f64, u_init: Option<Vec<f64>>) -> Result<Vec<f64>> {
    let h = 2.0 / (nx - 1) as f64;
    let prob = SteadyProblem { nx, h };
    let mut u = u_init.unwrap_or_else(|| vec![0.0; nx]);
    for _ in 0..50 {
        let f = prob.residual(&u, lambda);
        if norm_inf(&f) < STEADY_RESIDUAL {
            return Ok(u);
        }
        let du = prob.jacobian_solve(&u, lambda, &f);
        for (ui, di) in u.iter_mut().zip(&du) {
            *ui -= di;
        }
    }
    Err(Error::ContinuationStall { s: 0.0, lambda })
}

/// Locates the pull-in threshold λ* as the fold of the steady branch via
/// pseudo-arclength continuation, refined until consecutive fold brackets
/// differ by at most `tol` in λ. Also returns the branch (continued past
/// the fold) for inspection.
pub fn pullin_threshold(nx: usize, tol: f64) -> Result<(f64, SteadyBranch)> {
    if nx < 3 {
        return Err(Error::config("nx", "too small for continuation"));
    }
    if !(tol > 0.0) {
        return Err(Error::config("tol", "must be > 0"));
    }
    let h = 2.0 / (nx - 1) as f64;
    let prob = SteadyProblem { nx, h };

    // start on the trivial solution at λ = 0
    let u0 = vec![0.0; nx];
    let (tu, tl) = tangent_at(&prob, &u0, 0.0, &vec![0.0; nx], 1.0);
    let mut point = ContinuationPoint { u: u0, lambda: 0.0, tangent_u: tu, tangent_lambda: tl, s: 0.0 };

    let mut branch = SteadyBranch { points: Vec::new(), fold: None };
    branch.points.push(BranchPoint { s: 0.0, lambda: 0.0, min_u: 0.0 });

    let mut ds = 0.02;
    let mut lambda_star = f64::NAN;
    let mut past_fold_steps = 0usize;
    for _ in 0..10_000 {
        let next = match continuation_step(&prob, &point, ds) {
            Ok(p) => p,
            Err(_) if ds > 1e-10 => {
                ds *= 0.5;
                continue;
            }
            Err(e) => return Err(e),
        };
        let flipped = point.tangent_lambda > 0.0 && next.tangent_lambda <= 0.0;
        if flipped && branch.fold.is_none() && ds > tol.min(1e-3) {
            // bracketed the fold: tighten from the pre-fold point
            ds *= 0.5;
            continue;
        }
        let min_u = next.u.iter().fold(0.0f64, |m, &v| m.min(v));
        branch.points.push(BranchPoint { s: next.s, lambda: next.lambda, min_u });
        if flipped && branch.fold.is_none() {
            lambda_star = point.lambda.max(next.lambda);
            branch.fold = Some((lambda_star, min_u));
        }
        point = next;
        if branch.fold.is_some() {
            past_fold_steps += 1;
            // collect enough of the upper branch to exhibit the turning point
            if past_fold_steps > 40 || point.lambda < 0.5 * lambda_star {
                return Ok((lambda_star, branch));
            }
            ds = (ds * 1.3).min(0.05);
        } else {
            ds = (ds * 1.3).min(0.05);
        }
    }
    Err(Error::ContinuationStall { s: point.s, lambda: point.lambda })
}

/// Independent shooting oracle for λ*: integrate u'' = λ/(1+u)² from the
/// symmetric midpoint with u(0) = α, u'(0) = 0, bisect on u(1) = 0 to get
/// λ(α), and maximize over α by golden-section search.
pub fn shooting_lambda_star() -> f64 {
    let lambda_of_alpha = |alpha: f64| -> f64 {
        // u(1; λ) is increasing in λ; bracket then bisect
        let endpoint = |lambda: f64| -> f64 {
            let n = 4000;
            let h = 1.0 / n as f64;
            let f = |u: f64| {
                let a = 1.0 + u;
                lambda / (a * a)
            };
            let mut u = alpha;
            let mut v = 0.0;
            for _ in 0..n {
                // RK4 on (u, v)' = (v, f(u))
                let k1u = v;
                let k1v = f(u);
                let k2u = v + 0.5 * h * k1v;
                let k2v = f(u + 0.5 * h * k1u);
                let k3u = v + 0.5 * h * k2v;
                let k3v = f(u + 0.5 * h * k2u);
                let k4u = v + h * k3v;
                let k4v = f(u + h * k3u);
                u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
                v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
            }
            u
        };
        let mut lo = 0.0;
        let mut hi = 1.0;
        while endpoint(hi) < 0.0 {
            hi *= 2.0;
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if endpoint(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    // golden-section maximization of λ(α) on α ∈ (-1, 0)
    let phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut a = -0.95;
    let mut b = -0.01;
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let mut fc = lambda_of_alpha(c);
    let mut fd = lambda_of_alpha(d);
    while (b - a).abs() > 1e-7 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = lambda_of_alpha(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = lambda_of_alpha(d);
        }
    }
    fc.max(fd)
}

/// One row of a cross-model comparison.
#[derive(Debug, Clone, Copy)]
pub struct CompareRow {
    pub epsilon: f64,
    /// Max-norm distance between full-model and small-gap u at t_probe;
    /// NaN when either run broke down first.
    pub distance: f64,
    pub comparable: bool,
}

/// Runs the full model at each ε and the small-gap model once, both to
/// t_probe, and reports the max-norm distance of the final displacements.
pub fn compare_models(
    base: &SimulationConfig,
    epsilon_list: &[f64],
    t_probe: f64,
) -> Result<Vec<CompareRow>> {
    let mut cfg = base.clone();
    cfg.t_max = t_probe;
    let reference = run_small_gap(&cfg)?;
    if reference.status.kind.is_breakdown() {
        return Ok(epsilon_list
            .iter()
            .map(|&epsilon| CompareRow { epsilon, distance: f64::NAN, comparable: false })
            .collect());
    }
    let mut rows = Vec::with_capacity(epsilon_list.len());
    for &epsilon in epsilon_list {
        if epsilon == 0.0 {
            rows.push(CompareRow { epsilon, distance: 0.0, comparable: true });
            continue;
        }
        let mut full_cfg = cfg.clone();
        full_cfg.epsilon = epsilon;
        let full = crate::stepper::run_simulation(&full_cfg)?;
        if full.status.kind.is_breakdown() {
            rows.push(CompareRow { epsilon, distance: f64::NAN, comparable: false });
            continue;
        }
        let distance = full
            .final_state
            .u
            .iter()
            .zip(&reference.final_state.u)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        rows.push(CompareRow { epsilon, distance, comparable: true });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;

    #[test]
    fn rhs_values() {
        let grid = build_grid(33, 33).unwrap();
        let u = MembraneState::new(0.0, vec![0.0; 33], &grid, 0.0).unwrap();
        let g = rhs_small_gap(&u, 2.0).unwrap();
        assert!(g.iter().all(|&v| (v + 2.0).abs() < 1e-15));
        // u ≡ -0.5 (quadrature-only state, BC ignored)
        let mut u2 = u.clone();
        for v in u2.u.iter_mut() {
            *v = -0.5;
        }
        let g = rhs_small_gap(&u2, 1.0).unwrap();
        assert!(g.iter().all(|&v| (v + 4.0).abs() < 1e-12));
    }

    #[test]
    fn steady_points_satisfy_residual() {
        let (_, branch) = pullin_threshold(129, 1e-6).unwrap();
        assert!(branch.fold.is_some());
        // λ positive along the branch, min_u in (-1, 0]
        for p in &branch.points[1..] {
            assert!(p.lambda > 0.0, "λ = {} on branch", p.lambda);
            assert!(p.min_u > -1.0 && p.min_u <= 0.0);
        }
    }

    #[test]
    fn fold_is_a_turning_point() {
        let (lambda_star, branch) = pullin_threshold(129, 1e-6).unwrap();
        let fold_idx = branch
            .points
            .iter()
            .position(|p| (p.lambda - lambda_star).abs() < 1e-5)
            .expect("fold point recorded");
        // right past the fold λ is quadratically flat in s, so compare
        // points separated by a finite arclength rather than neighbors
        let after = &branch.points[fold_idx + 1..];
        let mut coarse: Vec<&BranchPoint> = Vec::new();
        for p in after {
            if coarse.last().map_or(true, |q| p.s - q.s >= 0.05) {
                coarse.push(p);
            }
        }
        assert!(coarse.len() >= 2, "need post-fold arclength, got {} points", after.len());
        for w in coarse.windows(2) {
            assert!(w[1].lambda < w[0].lambda, "λ must decrease past the fold");
        }
        assert!(coarse.last().unwrap().lambda < lambda_star - 1e-4);
    }

    #[test]
    fn small_lambda_steady_deflection_is_perturbative() {
        // For λ = 0.01 the steady center deflection is ≈ -λ/2 within 5%
        let nx = 257;
        let u = steady_state(nx, 0.01, None).unwrap();
        let center = u[(nx - 1) / 2];
        let expected = -0.01 / 2.0;
        assert!(
            (center - expected).abs() < 0.05 * expected.abs(),
            "u(0) = {center}, expected ≈ {expected}"
        );
    }
}
