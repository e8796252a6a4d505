//! Run configuration: defaults, flat key = value files, and validation.

use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{build_grid, TransformedGrid, MIN_NODES};
use crate::state::MembraneState;

/// Initial membrane profile u⁰.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialProfile {
    /// u⁰ ≡ 0.
    Flat,
    /// u⁰(x) = -c (1 - x²).
    Parabolic(f64),
    /// Piecewise-linear table of (x, u) pairs, interpolated onto the grid.
    Custom(Vec<(f64, f64)>),
}

/// Full run configuration. Defaults are documented on [`SimulationConfig::default`].
#[derive(Debug, Clone)]
pub struct SimulationConfig {
    /// Voltage-squared parameter λ > 0.
    pub lambda: f64,
    /// Aspect ratio ε ≥ 0; ε = 0 selects the small-gap model.
    pub epsilon: f64,
    pub nx: usize,
    pub nz: usize,
    pub dt_init: f64,
    pub t_max: f64,
    /// Touchdown proximity threshold on 1 + u, in (0, 0.1].
    pub delta_touch: f64,
    /// Blow-up proxy threshold on the discrete second difference of u.
    pub grad_max: f64,
    /// Relative residual target for the elliptic solve.
    pub tol_linear: f64,
    /// Certificate tolerance multiplier; tol = cert_factor (h_x² + h_η²).
    pub cert_factor: f64,
    /// Certify every k-th accepted step.
    pub cert_every: usize,
    pub initial_profile: InitialProfile,
}

impl Default for SimulationConfig {
    /// λ = 1, ε = 1, nx = 257, nz = 129, dt_init = 1e-4, t_max = 10,
    /// delta_touch = 1e-3, grad_max = 1e4, tol_linear = 1e-10,
    /// cert_factor = 50, cert_every = 10, flat initial profile.
    fn default() -> Self {
        SimulationConfig {
            lambda: 1.0,
            epsilon: 1.0,
            nx: 257,
            nz: 129,
            dt_init: 1e-4,
            t_max: 10.0,
            delta_touch: 1e-3,
            grad_max: 1e4,
            tol_linear: 1e-10,
            cert_factor: 50.0,
            cert_every: 10,
            initial_profile: InitialProfile::Flat,
        }
    }
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    value
        .parse::<f64>()
        .map_err(|_| Error::config(key, format!("`{value}` is not a number")))
}

fn parse_usize(key: &str, value: &str) -> Result<usize> {
    value
        .parse::<usize>()
        .map_err(|_| Error::config(key, format!("`{value}` is not a count")))
}

fn parse_profile(value: &str) -> Result<InitialProfile> {
    let v = value.trim();
    if v == "flat" {
        return Ok(InitialProfile::Flat);
    }
    if let Some(rest) = v.strip_prefix("parabolic(").and_then(|s| s.strip_suffix(')')) {
        let c = parse_f64("initial_profile", rest)?;
        return Ok(InitialProfile::Parabolic(c));
    }
    if let Some(rest) = v.strip_prefix("custom(").and_then(|s| s.strip_suffix(')')) {
        let text = std::fs::read_to_string(rest.trim()).map_err(|e| {
            Error::config("initial_profile", format!("cannot read table `{}`: {e}", rest.trim()))
        })?;
        let mut table = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split([',', ' ', '\t']).filter(|s| !s.is_empty());
            let (Some(xs), Some(us)) = (parts.next(), parts.next()) else {
                return Err(Error::config("initial_profile", format!("malformed table row `{line}`")));
            };
            table.push((parse_f64("initial_profile", xs)?, parse_f64("initial_profile", us)?));
        }
        if table.len() < 2 {
            return Err(Error::config("initial_profile", "table needs at least two rows"));
        }
        table.sort_by(|a, b| a.0.total_cmp(&b.0));
        return Ok(InitialProfile::Custom(table));
    }
    Err(Error::config(
        "initial_profile",
        format!("`{v}` is not flat, parabolic(c), or custom(path)"),
    ))
}

impl SimulationConfig {
    /// Applies one `key = value` assignment.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "lambda" => self.lambda = parse_f64(key, value)?,
            "epsilon" => self.epsilon = parse_f64(key, value)?,
            "nx" => self.nx = parse_usize(key, value)?,
            "nz" => self.nz = parse_usize(key, value)?,
            "dt_init" => self.dt_init = parse_f64(key, value)?,
            "t_max" => self.t_max = parse_f64(key, value)?,
            "delta_touch" => self.delta_touch = parse_f64(key, value)?,
            "grad_max" => self.grad_max = parse_f64(key, value)?,
            "tol_linear" => self.tol_linear = parse_f64(key, value)?,
            "cert_factor" => self.cert_factor = parse_f64(key, value)?,
            "cert_every" => self.cert_every = parse_usize(key, value)?,
            "initial_profile" => self.initial_profile = parse_profile(value)?,
            _ => return Err(Error::config(key, "unknown key")),
        }
        Ok(())
    }

    /// Parses a flat `key = value` file on top of the defaults.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = SimulationConfig::default();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::config(line, "expected `key = value`"));
            };
            cfg.apply(key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0) {
            return Err(Error::config("lambda", "must be >= 0"));
        }
        if !(self.epsilon >= 0.0) {
            return Err(Error::config("epsilon", "must be >= 0"));
        }
        for (key, n) in [("nx", self.nx), ("nz", self.nz)] {
            if n < MIN_NODES || n % 2 == 0 {
                return Err(Error::config(key, format!("must be an odd count >= {MIN_NODES}")));
            }
        }
        if !(self.dt_init > 0.0) {
            return Err(Error::config("dt_init", "must be > 0"));
        }
        if !(self.t_max > 0.0) {
            return Err(Error::config("t_max", "must be > 0"));
        }
        if !(self.delta_touch > 0.0 && self.delta_touch <= 0.1) {
            return Err(Error::config("delta_touch", "must lie in (0, 0.1]"));
        }
        if !(self.grad_max > 0.0) {
            return Err(Error::config("grad_max", "must be > 0"));
        }
        if !(self.tol_linear > 0.0) {
            return Err(Error::config("tol_linear", "must be > 0"));
        }
        if !(self.cert_factor > 0.0) {
            return Err(Error::config("cert_factor", "must be > 0"));
        }
        if self.cert_every == 0 {
            return Err(Error::config("cert_every", "must be >= 1"));
        }
        if let InitialProfile::Parabolic(c) = self.initial_profile {
            if !(c >= 0.0 && c < 1.0) {
                return Err(Error::config("initial_profile", "parabolic amplitude must lie in [0, 1)"));
            }
        }
        Ok(())
    }

    pub fn build_grid(&self) -> Result<TransformedGrid> {
        build_grid(self.nx, self.nz)
    }

    /// Certificate tolerance cert_factor · (h_x² + h_η²).
    pub fn cert_tol(&self, grid: &TransformedGrid) -> f64 {
        self.cert_factor * (grid.hx * grid.hx + grid.heta * grid.heta)
    }

    /// Samples the initial profile and checks the admissibility constraints
    /// u⁰(±1) = 0 and -1 < u⁰ ≤ 0.
    pub fn initial_state(&self, grid: &TransformedGrid) -> Result<MembraneState> {
        let u: Vec<f64> = match &self.initial_profile {
            InitialProfile::Flat => vec![0.0; grid.nx],
            InitialProfile::Parabolic(c) => {
                grid.x.iter().map(|&x| -c * (1.0 - x * x)).collect()
            }
            InitialProfile::Custom(table) => {
                let mut u: Vec<f64> = grid.x.iter().map(|&x| interp(table, x)).collect();
                u[0] = 0.0;
                u[grid.nx - 1] = 0.0;
                u
            }
        };
        for (i, &v) in u.iter().enumerate() {
            if !(v > -1.0 && v <= 0.0) {
                return Err(Error::config(
                    "initial_profile",
                    format!("u0[{i}] = {v:e} violates -1 < u0 <= 0"),
                ));
            }
        }
        MembraneState::new(0.0, u, grid, 0.0)
    }
}

fn interp(table: &[(f64, f64)], x: f64) -> f64 {
    let n = table.len();
    if x <= table[0].0 {
        return table[0].1;
    }
    if x >= table[n - 1].0 {
        return table[n - 1].1;
    }
    let k = table.partition_point(|&(xt, _)| xt <= x).min(n - 1);
    let (x0, u0) = table[k - 1];
    let (x1, u1) = table[k];
    u0 + (u1 - u0) * (x - x0) / (x1 - x0)
}
