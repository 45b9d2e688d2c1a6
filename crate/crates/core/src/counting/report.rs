//! The leading constant, smoothed convolutions, the two-term residual report,
//! and the quasimode window diagnostic.

use crate::error::{Error, Result};
use crate::geometry::{vol_ball, ModelManifold, Submanifold};
use crate::num::KahanSum;
use crate::par::Threads;

use super::kernel::SmoothingKernel;
use super::staircase::CountingFunction;

/// C_{H,M} = (2 pi)^{-codim} vol(H) vol(B^codim).
pub fn main_constant(model: &ModelManifold, h: &Submanifold) -> f64 {
    let codim = model.dim() - h.dim();
    (2.0 * std::f64::consts::PI).powi(-(codim as i32)) * h.vol() * vol_ball(codim)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvMode {
    /// Smooth the measure N': sum of |P_j|^2 rho(lambda - lambda_j).
    Density,
    /// Smooth N itself via the primitive of rho.
    Counting,
}

/// N' * rho or N * rho at lambda, with the tail truncated where rho falls
/// below 1e-14 (total truncation error below 1e-14 N(lambda_max)).
pub fn convolve_counting(
    ncf: &CountingFunction,
    kernel: &SmoothingKernel,
    lambda: f64,
    mode: ConvMode,
) -> f64 {
    let mut acc = KahanSum::new();
    match mode {
        ConvMode::Density => {
            for &(loc, mass) in ncf.jumps() {
                let dx = lambda - loc;
                if dx.abs() <= kernel.tail_cutoff {
                    acc.add(mass * kernel.rho(dx));
                }
            }
        }
        ConvMode::Counting => {
            for &(loc, mass) in ncf.jumps() {
                let dx = lambda - loc;
                if dx > kernel.tail_cutoff {
                    acc.add(mass);
                } else if dx >= -kernel.tail_cutoff {
                    acc.add(mass * kernel.primitive(dx));
                }
            }
        }
    }
    acc.value()
}

#[derive(Debug, Clone)]
pub struct WindowStat {
    pub lo: f64,
    pub hi: f64,
    pub mean_abs: f64,
    pub max_abs: f64,
    pub median: f64,
}

/// Residuals of N against the two-term prediction on a grid.
#[derive(Debug, Clone)]
pub struct TwoTermReport {
    pub grid: Vec<f64>,
    pub n_values: Vec<f64>,
    pub main_term: Vec<f64>,
    pub q_term: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Median residual over the last window when fitting is requested, else 0.
    pub fitted_c: f64,
    /// Equal-width window summaries across the grid span.
    pub windows: Vec<WindowStat>,
    pub warnings: Vec<String>,
}

/// Residuals r(lambda) = N - C lambda^codim - Q(lambda) lambda^{codim-1} - C0.
pub fn two_term_report<Q>(
    ncf: &CountingFunction,
    codim: usize,
    c_main: f64,
    q_eval: Q,
    grid: &[f64],
    fit_c: bool,
    threads: &Threads,
) -> Result<TwoTermReport>
where
    Q: Fn(f64) -> Result<f64> + Sync,
{
    if grid.is_empty() {
        return Err(Error::config("two_term_report needs a nonempty grid"));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::config("grid must be strictly ascending"));
    }
    let mut warnings = Vec::new();
    if grid.len() >= 2 {
        let step = (grid[grid.len() - 1] - grid[0]) / (grid.len() - 1) as f64;
        if step > ncf.mean_gap() {
            warnings.push(format!(
                "staircase aliasing: grid step {step} exceeds the mean eigenvalue gap {}",
                ncf.mean_gap()
            ));
        }
    }
    let rows = threads.map(grid, |&lam| -> Result<(f64, f64, f64)> {
        let n_val = ncf.eval(lam);
        let main = c_main * lam.powi(codim as i32);
        let q = q_eval(lam)? * lam.powi(codim as i32 - 1);
        Ok((n_val, main, q))
    });
    let mut n_values = Vec::with_capacity(grid.len());
    let mut main_term = Vec::with_capacity(grid.len());
    let mut q_term = Vec::with_capacity(grid.len());
    for row in rows {
        let (n, m, q) = row?;
        n_values.push(n);
        main_term.push(m);
        q_term.push(q);
    }
    let raw: Vec<f64> = (0..grid.len())
        .map(|i| n_values[i] - main_term[i] - q_term[i])
        .collect();

    let lo = grid[0];
    let hi = grid[grid.len() - 1];
    let width = (hi - lo) / 4.0;
    let fitted_c = if fit_c {
        let last: Vec<f64> = grid
            .iter()
            .zip(&raw)
            .filter(|(g, _)| **g >= hi - width)
            .map(|(_, r)| *r)
            .collect();
        median(&last)
    } else {
        0.0
    };
    let residuals: Vec<f64> = raw.iter().map(|r| r - fitted_c).collect();

    let mut windows = Vec::new();
    for w in 0..4 {
        let wlo = lo + w as f64 * width;
        let whi = if w == 3 { hi } else { wlo + width };
        let vals: Vec<f64> = grid
            .iter()
            .zip(&residuals)
            .filter(|(g, _)| **g >= wlo && **g <= whi)
            .map(|(_, r)| *r)
            .collect();
        if vals.is_empty() {
            continue;
        }
        let mean_abs = vals.iter().map(|v| v.abs()).sum::<f64>() / vals.len() as f64;
        let max_abs = vals.iter().map(|v| v.abs()).fold(0.0, f64::max);
        windows.push(WindowStat {
            lo: wlo,
            hi: whi,
            mean_abs,
            max_abs,
            median: median(&vals),
        });
    }

    Ok(TwoTermReport {
        grid: grid.to_vec(),
        n_values,
        main_term,
        q_term,
        residuals,
        fitted_c,
        windows,
        warnings,
    })
}

fn median(vals: &[f64]) -> f64 {
    if vals.is_empty() {
        return 0.0;
    }
    let mut sorted = vals.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mid = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        0.5 * (sorted[mid - 1] + sorted[mid])
    }
}

/// Window mass N(lambda + eps) - N(lambda): by Cauchy-Schwarz the square of
/// the best quasimode period over [lambda, lambda + eps].
pub fn quasimode_jump(ncf: &CountingFunction, lambda: f64, eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::config("quasimode window width must be positive"));
    }
    Ok(ncf.eval(lambda + eps) - ncf.eval(lambda))
}
