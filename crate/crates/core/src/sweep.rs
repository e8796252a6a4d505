//! Parameter sweeps over (λ, ε) with shared-nothing parallel execution and
//! deterministic row order.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::config::SimulationConfig;
use crate::error::{Error, Result};
use crate::output::fmt_f64;
use crate::small_gap::run_small_gap;
use crate::stepper::{run_simulation, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

/// One sweep axis: `count` values from `start` to `stop`.
#[derive(Debug, Clone, Copy)]
pub struct Axis {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl Axis {
    pub fn single(value: f64) -> Self {
        Axis { start: value, stop: value, count: 1, spacing: Spacing::Linear }
    }

    /// Parses `start:stop:count[:lin|log]`.
    pub fn parse(key: &str, text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 && parts.len() != 4 {
            return Err(Error::config(key, format!("`{text}` is not start:stop:count[:lin|log]")));
        }
        let start: f64 = parts[0]
            .parse()
            .map_err(|_| Error::config(key, format!("bad start `{}`", parts[0])))?;
        let stop: f64 = parts[1]
            .parse()
            .map_err(|_| Error::config(key, format!("bad stop `{}`", parts[1])))?;
        let count: usize = parts[2]
            .parse()
            .map_err(|_| Error::config(key, format!("bad count `{}`", parts[2])))?;
        let spacing = match parts.get(3).copied().unwrap_or("lin") {
            "lin" => Spacing::Linear,
            "log" => Spacing::Log,
            other => return Err(Error::config(key, format!("bad spacing `{other}`"))),
        };
        let axis = Axis { start, stop, count, spacing };
        axis.validate(key)?;
        Ok(axis)
    }

    pub fn validate(&self, key: &str) -> Result<()> {
        if self.count == 0 {
            return Err(Error::config(key, "count must be >= 1"));
        }
        if self.spacing == Spacing::Log && (self.start <= 0.0 || self.stop <= 0.0) {
            return Err(Error::config(key, "log spacing requires positive endpoints"));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let n = self.count;
        (0..n)
            .map(|k| {
                let f = k as f64 / (n - 1) as f64;
                match self.spacing {
                    Spacing::Linear => self.start + f * (self.stop - self.start),
                    Spacing::Log => {
                        (self.start.ln() + f * (self.stop.ln() - self.start.ln())).exp()
                    }
                }
            })
            .collect()
    }
}

/// Sweep specification: both axes plus the per-point config template.
#[derive(Debug, Clone)]
pub struct SweepPlan {
    pub lambda_axis: Axis,
    pub epsilon_axis: Axis,
    pub base: SimulationConfig,
}

/// One atlas row. Failed runs carry the error message and leave the
/// numeric fields NaN.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub lambda: f64,
    pub epsilon: f64,
    pub status: String,
    pub t_event: f64,
    pub t_bound: f64,
    pub t_sharp: f64,
    pub min_final_gap: f64,
    pub worst_slack: f64,
    pub error: String,
}

fn row_from_trajectory(lambda: f64, epsilon: f64, traj: &Trajectory) -> SweepRow {
    let (t_bound, t_sharp) = match &traj.bounds {
        Some(b) => (b.t_bound, b.t_sharp),
        None => (f64::NAN, f64::NAN),
    };
    SweepRow {
        lambda,
        epsilon,
        status: traj.status.kind.as_str().to_string(),
        t_event: if traj.status.kind.is_breakdown() { traj.status.t_event } else { f64::NAN },
        t_bound,
        t_sharp,
        min_final_gap: traj.final_state.min_gap(),
        worst_slack: traj
            .certificates
            .iter()
            .map(|c| c.slack)
            .fold(f64::INFINITY, f64::min),
        error: String::new(),
    }
}

/// Executes the plan. Points run concurrently up to `workers`; rows come
/// back in plan order (λ outer, ε inner) regardless of execution order.
pub fn run_sweep(plan: &SweepPlan, workers: usize) -> Result<Vec<SweepRow>> {
    plan.lambda_axis.validate("lambda_axis")?;
    plan.epsilon_axis.validate("epsilon_axis")?;
    plan.base.validate()?;
    let mut points = Vec::new();
    for &lambda in &plan.lambda_axis.values() {
        for &epsilon in &plan.epsilon_axis.values() {
            points.push((lambda, epsilon));
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidState(format!("worker pool: {e}")))?;
    let rows: Vec<SweepRow> = pool.install(|| {
        points
            .par_iter()
            .map(|&(lambda, epsilon)| {
                let mut cfg = plan.base.clone();
                cfg.lambda = lambda;
                cfg.epsilon = epsilon;
                let result = if epsilon == 0.0 { run_small_gap(&cfg) } else { run_simulation(&cfg) };
                match result {
                    Ok(traj) => row_from_trajectory(lambda, epsilon, &traj),
                    Err(e) => SweepRow {
                        lambda,
                        epsilon,
                        status: "error".to_string(),
                        t_event: f64::NAN,
                        t_bound: f64::NAN,
                        t_sharp: f64::NAN,
                        min_final_gap: f64::NAN,
                        worst_slack: f64::NAN,
                        error: e.to_string().replace(',', ";"),
                    },
                }
            })
            .collect()
    });
    Ok(rows)
}

pub fn atlas_csv(rows: &[SweepRow]) -> String {
    let mut out =
        String::from("lambda,epsilon,status,t_event,t_bound,t_sharp,min_final_gap,worst_slack,error\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            fmt_f64(r.lambda),
            fmt_f64(r.epsilon),
            r.status,
            fmt_f64(r.t_event),
            fmt_f64(r.t_bound),
            fmt_f64(r.t_sharp),
            fmt_f64(r.min_final_gap),
            fmt_f64(r.worst_slack),
            r.error,
        );
    }
    out
}
