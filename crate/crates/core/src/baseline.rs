//! Time-domain delay-and-sum backprojection, a qualitative reference for the
//! Fourier method.
//!
//! image(r) = Σ_s w_s b_s(|r − r_s| / c), with b_s(t) = 2p(r_s, t) − 2t ∂p/∂t
//! read by linear interpolation. This is not an exact inversion.

use rayon::prelude::*;

use crate::acquisition::{AcousticConstants, PressureSeries};
use crate::error::{ensure, Result};
use crate::grid::{GridSpec, ObjectField};

/// Derivative-weighted trace b(t_j) = 2p_j − 2t_j (dp/dt)_j, central
/// differences inside and one-sided differences at the ends.
pub fn backprojection_term(trace: &[f64], dt: f64) -> Vec<f64> {
    let n = trace.len();
    (0..n)
        .map(|j| {
            let deriv = if n < 2 {
                0.0
            } else if j == 0 {
                (trace[1] - trace[0]) / dt
            } else if j == n - 1 {
                (trace[n - 1] - trace[n - 2]) / dt
            } else {
                (trace[j + 1] - trace[j - 1]) / (2.0 * dt)
            };
            2.0 * trace[j] - 2.0 * (j as f64 * dt) * deriv
        })
        .collect()
}

pub fn delay_and_sum(data: &PressureSeries, grid: &GridSpec, consts: &AcousticConstants) -> Result<ObjectField> {
    let geom = data.geometry();
    ensure!(
        grid.dim() == geom.dim(),
        "image grid is {}D but the sensors are {}D",
        grid.dim(),
        geom.dim()
    );
    let dt = data.dt();
    let nt = data.nt();
    let terms: Vec<Vec<f64>> = data.traces().map(|t| backprojection_term(t, dt)).collect();
    let inv_cdt = 1.0 / (consts.c() * dt);
    let dim = grid.dim();
    let last = grid.shape()[dim - 1];
    let mut values = vec![0.0; grid.len()];
    values.par_chunks_mut(last).enumerate().for_each(|(row, out)| {
        let mut r = grid.position(row * last);
        for (m, o) in out.iter_mut().enumerate() {
            r[dim - 1] = grid.coord(dim - 1, m);
            let mut acc = 0.0;
            for (s, term) in terms.iter().enumerate() {
                let rs = geom.position(s);
                let d2: f64 = r.iter().zip(rs).map(|(a, b)| (a - b) * (a - b)).sum();
                let x = d2.sqrt() * inv_cdt;
                let j = x as usize;
                if j + 1 < nt {
                    let f = x - j as f64;
                    acc += geom.weight(s) * ((1.0 - f) * term[j] + f * term[j + 1]);
                }
            }
            *o = acc;
        }
    });
    ObjectField::new(grid.clone(), values)
}
