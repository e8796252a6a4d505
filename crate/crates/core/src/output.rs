//! Deterministic artifact emission: fixed-precision decimal formatting,
//! fixed column order, no timestamps. Identical inputs must produce
//! byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::certificates::CertificateEntry;
use crate::config::{InitialProfile, SimulationConfig};
use crate::error::Result;
use crate::grid::TransformedGrid;
use crate::potential::{PotentialField, TraceSet};
use crate::small_gap::{CompareRow, SteadyBranch};
use crate::stepper::Trajectory;

/// 17 significant digits: round-trip safe for f64.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".to_string() } else { "-inf".to_string() }
    } else {
        format!("{x:.16e}")
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    match x {
        Some(v) => fmt_f64(v),
        None => "null".to_string(),
    }
}

pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::from("t,dt,min_u,max_abs_ux,max_abs_uxx,E,dirichlet_energy,worst_cert_slack\n");
    let worst = traj
        .certificates
        .iter()
        .map(|c| c.slack)
        .fold(f64::INFINITY, f64::min);
    let worst = if traj.certificates.is_empty() { f64::NAN } else { worst };
    for s in &traj.snapshots {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            fmt_f64(s.t),
            fmt_f64(s.dt),
            fmt_f64(s.min_u),
            fmt_f64(s.max_abs_ux),
            fmt_f64(s.max_abs_uxx),
            fmt_f64(s.energy),
            fmt_f64(s.dirichlet),
            fmt_f64(worst),
        );
    }
    out
}

pub fn certificates_csv(entries: &[CertificateEntry]) -> String {
    let mut out = String::from("t,name,lhs,rhs,slack,tol,pass\n");
    for c in entries {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt_f64(c.t),
            c.name.as_str(),
            fmt_f64(c.lhs),
            fmt_f64(c.rhs),
            fmt_f64(c.slack),
            fmt_f64(c.tol),
            c.pass,
        );
    }
    out
}

fn profile_str(p: &InitialProfile) -> String {
    match p {
        InitialProfile::Flat => "flat".to_string(),
        InitialProfile::Parabolic(c) => format!("parabolic({c})"),
        InitialProfile::Custom(_) => "custom".to_string(),
    }
}

/// Summary JSON, hand-assembled so key order and number formatting are fixed.
pub fn summary_json(traj: &Trajectory, config: &SimulationConfig) -> String {
    let failed = traj.certificates.iter().filter(|c| !c.pass).count();
    let t_event = if traj.status.kind.is_breakdown() {
        Some(traj.status.t_event)
    } else {
        None
    };
    let (bp, bs) = match &traj.bounds {
        Some(b) => (Some(b.t_bound), Some(b.t_sharp)),
        None => (None, None),
    };
    format!(
        concat!(
            "{{\n",
            "  \"status\": \"{status}\",\n",
            "  \"t_event\": {t_event},\n",
            "  \"t_end\": {t_end},\n",
            "  \"model\": \"{model}\",\n",
            "  \"anomalous_gradient_blowup\": {anomalous},\n",
            "  \"blowup_bound\": {bp},\n",
            "  \"blowup_bound_sharp\": {bs},\n",
            "  \"certificates_total\": {ct},\n",
            "  \"certificates_failed\": {cf},\n",
            "  \"final_min_gap\": {gap},\n",
            "  \"final_step_change\": {step_change},\n",
            "  \"config\": {{\n",
            "    \"lambda\": {lambda},\n",
            "    \"epsilon\": {epsilon},\n",
            "    \"nx\": {nx},\n",
            "    \"nz\": {nz},\n",
            "    \"dt_init\": {dt_init},\n",
            "    \"t_max\": {t_max},\n",
            "    \"delta_touch\": {delta_touch},\n",
            "    \"grad_max\": {grad_max},\n",
            "    \"tol_linear\": {tol_linear},\n",
            "    \"cert_factor\": {cert_factor},\n",
            "    \"cert_every\": {cert_every},\n",
            "    \"initial_profile\": \"{profile}\"\n",
            "  }}\n",
            "}}\n",
        ),
        status = traj.status.kind.as_str(),
        t_event = fmt_opt(t_event),
        t_end = fmt_f64(traj.t_end),
        model = if traj.small_gap { "small_gap" } else { "full" },
        anomalous = traj.anomalous_blowup,
        bp = fmt_opt(bp),
        bs = fmt_opt(bs),
        ct = traj.certificates.len(),
        cf = failed,
        gap = fmt_f64(traj.final_state.min_gap()),
        step_change = fmt_f64(traj.final_step_change),
        lambda = fmt_f64(config.lambda),
        epsilon = fmt_f64(config.epsilon),
        nx = config.nx,
        nz = config.nz,
        dt_init = fmt_f64(config.dt_init),
        t_max = fmt_f64(config.t_max),
        delta_touch = fmt_f64(config.delta_touch),
        grad_max = fmt_f64(config.grad_max),
        tol_linear = fmt_f64(config.tol_linear),
        cert_factor = fmt_f64(config.cert_factor),
        cert_every = config.cert_every,
        profile = profile_str(&config.initial_profile),
    )
}

pub fn branch_csv(branch: &SteadyBranch) -> String {
    let mut out = String::from("s,lambda,min_u\n");
    for p in &branch.points {
        let _ = writeln!(out, "{},{},{}", fmt_f64(p.s), fmt_f64(p.lambda), fmt_f64(p.min_u));
    }
    out
}

pub fn threshold_json(lambda_star: f64, nx: usize, tol: f64, oracle: f64) -> String {
    format!(
        concat!(
            "{{\n",
            "  \"lambda_star\": {ls},\n",
            "  \"nx\": {nx},\n",
            "  \"tol\": {tol},\n",
            "  \"oracle_value\": {oracle},\n",
            "  \"oracle_method\": \"midpoint shooting with RK4 and bisection on the boundary value\"\n",
            "}}\n",
        ),
        ls = fmt_f64(lambda_star),
        nx = nx,
        tol = fmt_f64(tol),
        oracle = fmt_f64(oracle),
    )
}

pub fn compare_csv(rows: &[CompareRow]) -> String {
    let mut out = String::from("epsilon,distance,comparable\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{}", fmt_f64(r.epsilon), fmt_f64(r.distance), r.comparable);
    }
    out
}

/// Debug dump of the solved field: x, eta, value rows.
pub fn field_csv(field: &PotentialField, grid: &TransformedGrid) -> String {
    let mut out = String::from("x,eta,value\n");
    for i in 0..grid.nx {
        for j in 0..grid.nz {
            let _ = writeln!(
                out,
                "{},{},{}",
                fmt_f64(grid.x[i]),
                fmt_f64(grid.eta[j]),
                fmt_f64(field.at(i, j)),
            );
        }
    }
    out
}

/// Debug dump of the membrane/plate traces: x, gamma_m, gamma_g rows.
pub fn traces_csv(traces: &TraceSet, grid: &TransformedGrid) -> String {
    let mut out = String::from("x,gamma_m,gamma_g\n");
    for i in 0..grid.nx {
        let _ = writeln!(
            out,
            "{},{},{}",
            fmt_f64(grid.x[i]),
            fmt_f64(traces.gamma_m[i]),
            fmt_f64(traces.gamma_g[i]),
        );
    }
    out
}

pub fn write_text(dir: &Path, name: &str, content: &str) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), content)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting_is_roundtrip_safe() {
        for &x in &[0.0, 1.0, -1.5, 1.0 / 3.0, 2.2250738585072014e-308, 0.1 + 0.2] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(fmt_f64(f64::NAN), "nan");
    }
}
