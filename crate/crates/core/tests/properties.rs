//! Property-based invariants of the discrete toolbox.

use memsim::certificates::f_lambda;
use memsim::grid::build_grid;
use memsim::state::{physical_height, MembraneState};
use memsim::sweep::{Axis, Spacing};
use proptest::prelude::*;

proptest! {
    /// derivative_x is linear: D(a f + b g) = a D f + b D g.
    #[test]
    fn derivative_is_linear(a in -5.0f64..5.0, b in -5.0f64..5.0, seed in 0u64..1000) {
        let grid = build_grid(33, 33).unwrap();
        let f: Vec<f64> = grid.x.iter().map(|&x| (seed as f64 * 0.1 + x).sin()).collect();
        let g: Vec<f64> = grid.x.iter().map(|&x| x * x - 0.3 * x).collect();
        let combo: Vec<f64> = f.iter().zip(&g).map(|(&fi, &gi)| a * fi + b * gi).collect();
        let df = grid.derivative_x(&f).unwrap();
        let dg = grid.derivative_x(&g).unwrap();
        let dc = grid.derivative_x(&combo).unwrap();
        for i in 0..33 {
            prop_assert!((dc[i] - a * df[i] - b * dg[i]).abs() < 1e-10);
        }
    }

    /// Exactness on quadratics: the stencils are second order, so p(x) =
    /// c2 x² + c1 x + c0 differentiates without truncation error.
    #[test]
    fn derivative_exact_on_quadratics(c2 in -3.0f64..3.0, c1 in -3.0f64..3.0, c0 in -3.0f64..3.0) {
        let grid = build_grid(65, 33).unwrap();
        let p: Vec<f64> = grid.x.iter().map(|&x| c2 * x * x + c1 * x + c0).collect();
        let dp = grid.derivative_x(&p).unwrap();
        for i in 0..65 {
            prop_assert!((dp[i] - (2.0 * c2 * grid.x[i] + c1)).abs() < 1e-11);
        }
    }

    /// Discrete fundamental theorem: ∫ D f dx = f(1) - f(-1) + O(h²).
    #[test]
    fn integral_of_derivative_telescopes(k in 1.0f64..4.0, phase in 0.0f64..3.0) {
        let grid = build_grid(257, 33).unwrap();
        let f: Vec<f64> = grid.x.iter().map(|&x| (k * x + phase).sin()).collect();
        let df = grid.derivative_x(&f).unwrap();
        let integral = grid.integrate_x(&df).unwrap();
        let exact = f[256] - f[0];
        prop_assert!((integral - exact).abs() < 1e-3, "{integral} vs {exact}");
    }

    /// F_λ is monotone increasing in E on [0, 1).
    #[test]
    fn f_lambda_monotone(lambda in 0.0f64..10.0, epsilon in 0.1f64..5.0,
                         e1 in 0.0f64..0.9, de in 0.001f64..0.09) {
        let lo = f_lambda(e1, lambda, epsilon).unwrap();
        let hi = f_lambda(e1 + de, lambda, epsilon).unwrap();
        prop_assert!(hi >= lo);
    }

    /// physical_height is increasing in η and spans [-1, u].
    #[test]
    fn physical_height_monotone(c in 0.0f64..0.9, eta in 0.0f64..1.0) {
        let grid = build_grid(33, 33).unwrap();
        let u: Vec<f64> = grid.x.iter().map(|&x| -c * (1.0 - x * x)).collect();
        let state = MembraneState::new(0.0, u, &grid, 0.0).unwrap();
        let i = 16;
        let z = physical_height(&state, i, eta);
        prop_assert!(z >= -1.0 - 1e-15 && z <= state.u[i] + 1e-15);
        let z2 = physical_height(&state, i, (eta + 0.05).min(1.0));
        prop_assert!(z2 >= z);
    }

    /// Axis values are sorted, bounded by the endpoints, and count-correct.
    #[test]
    fn axis_values_well_formed(start in 0.01f64..10.0, span in 0.0f64..10.0,
                               count in 1usize..20, log in proptest::bool::ANY) {
        let axis = Axis {
            start,
            stop: start + span,
            count,
            spacing: if log { Spacing::Log } else { Spacing::Linear },
        };
        let v = axis.values();
        prop_assert_eq!(v.len(), count);
        for w in v.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-12);
        }
        prop_assert!((v[0] - start).abs() < 1e-12);
        if count > 1 {
            prop_assert!((v[count - 1] - (start + span)).abs() < 1e-9);
        }
    }
}
