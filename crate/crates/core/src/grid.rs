//! Reference-rectangle grids and the finite-difference/quadrature toolbox
//! shared by every other module.
//!
//! The moving domain `Ω(u) = {(x,z) : -1 < z < u(x)}` is mapped onto the
//! fixed rectangle `[-1,1] × [0,1]` through `η = (1+z)/(1+u(x))`, so the
//! ground plate sits at η = 0 and the membrane at η = 1.

use crate::error::{Error, Result};

/// Minimum admissible node count per direction.
pub const MIN_NODES: usize = 33;

/// Uniform tensor grid on the reference rectangle.
#[derive(Debug, Clone)]
pub struct TransformedGrid {
    pub nx: usize,
    pub nz: usize,
    /// Spacing of the x partition, 2/(nx-1).
    pub hx: f64,
    /// Spacing of the η partition, 1/(nz-1).
    pub heta: f64,
    pub x: Vec<f64>,
    pub eta: Vec<f64>,
}

/// Builds the uniform grid; counts must be odd and at least [`MIN_NODES`]
/// so that x = 0 and η = 1/2 fall on nodes.
pub fn build_grid(nx: usize, nz: usize) -> Result<TransformedGrid> {
    for (key, n) in [("nx", nx), ("nz", nz)] {
        if n < MIN_NODES {
            return Err(Error::config(key, format!("{n} is below the minimum {MIN_NODES}")));
        }
        if n % 2 == 0 {
            return Err(Error::config(key, format!("{n} must be odd")));
        }
    }
    let hx = 2.0 / (nx - 1) as f64;
    let heta = 1.0 / (nz - 1) as f64;
    let mut x: Vec<f64> = (0..nx).map(|i| (2 * i) as f64 / (nx - 1) as f64 - 1.0).collect();
    let mut eta: Vec<f64> = (0..nz).map(|j| j as f64 / (nz - 1) as f64).collect();
    // endpoints exact
    x[0] = -1.0;
    x[nx - 1] = 1.0;
    eta[0] = 0.0;
    eta[nz - 1] = 1.0;
    Ok(TransformedGrid { nx, nz, hx, heta, x, eta })
}

impl TransformedGrid {
    fn check_len(&self, samples: &[f64]) -> Result<()> {
        if samples.len() != self.nx {
            return Err(Error::ShapeMismatch { expected: self.nx, got: samples.len() });
        }
        Ok(())
    }

    /// Discrete ∂ₓ over the x nodes, second-order everywhere
    /// (centered interior, 3-point one-sided at x = ±1).
    pub fn derivative_x(&self, samples: &[f64]) -> Result<Vec<f64>> {
        self.check_len(samples)?;
        let n = self.nx;
        let h = self.hx;
        let mut d = vec![0.0; n];
        d[0] = (-3.0 * samples[0] + 4.0 * samples[1] - samples[2]) / (2.0 * h);
        for i in 1..n - 1 {
            d[i] = (samples[i + 1] - samples[i - 1]) / (2.0 * h);
        }
        d[n - 1] = (3.0 * samples[n - 1] - 4.0 * samples[n - 2] + samples[n - 3]) / (2.0 * h);
        Ok(d)
    }

    /// Discrete ∂ₓ² (centered interior; endpoints copy the adjacent interior
    /// value, which is all the blow-up proxy needs).
    pub fn second_difference_x(&self, samples: &[f64]) -> Result<Vec<f64>> {
        self.check_len(samples)?;
        let n = self.nx;
        let h2 = self.hx * self.hx;
        let mut d = vec![0.0; n];
        for i in 1..n - 1 {
            d[i] = (samples[i - 1] - 2.0 * samples[i] + samples[i + 1]) / h2;
        }
        d[0] = d[1];
        d[n - 1] = d[n - 2];
        Ok(d)
    }

    /// Composite trapezoid approximation of ∫_{-1}^{1} over the x nodes.
    pub fn integrate_x(&self, samples: &[f64]) -> Result<f64> {
        self.check_len(samples)?;
        let n = self.nx;
        let interior: f64 = samples[1..n - 1].iter().sum();
        Ok(self.hx * (0.5 * (samples[0] + samples[n - 1]) + interior))
    }

    /// Trapezoid quadrature over the reference rectangle of nodal values
    /// stored η-fastest (index i*nz + j).
    pub fn integrate_xe(&self, values: &[f64]) -> Result<f64> {
        if values.len() != self.nx * self.nz {
            return Err(Error::ShapeMismatch { expected: self.nx * self.nz, got: values.len() });
        }
        let nz = self.nz;
        let mut column = vec![0.0; self.nx];
        for (i, col) in values.chunks_exact(nz).enumerate() {
            let interior: f64 = col[1..nz - 1].iter().sum();
            column[i] = self.heta * (0.5 * (col[0] + col[nz - 1]) + interior);
        }
        self.integrate_x(&column)
    }
}
