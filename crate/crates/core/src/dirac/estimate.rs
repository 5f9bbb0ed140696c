//! Empirical size of the constant in `||w||_{1,p} <= C ||f||_p` for the
//! Dirac-Newton potential on the unit disk.
//!
//! Each trial draws a band-limited source
//!
//! ```text
//! f_c(x) = chi(|x|) * sum_{|m|,|l| <= 2} a_{c,m,l} exp(i pi (m x + l y) / rho)
//! ```
//!
//! with `chi(r) = (1 - r^2/rho^2)^4` for `r < rho = 0.7` and coefficients
//! `a` having real and imaginary parts uniform in `[-1, 1)`, drawn from the
//! SplitMix64 stream seeded with `seed + trial` in the order
//! `c, m, l` (outermost first), real part before imaginary part. The same
//! coefficients are used at every refinement level.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use crate::chart::GridChart;
use crate::error::{Result, SpinflowError};
use crate::rng::Rng;
use crate::spinor::{lp_of, SpinorField, C64, ZERO};

use super::fd::{self, FdStencil};
use super::green::green_convolve;

const RHO: f64 = 0.7;
const BAND: i32 = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct RatioOptions {
    pub p: f64,
    pub trials: usize,
    /// Disk lattice sizes, coarse to fine.
    pub levels: Vec<usize>,
    pub seed: u64,
}

impl Default for RatioOptions {
    fn default() -> Self {
        Self { p: 4.0 / 3.0, trials: 50, levels: vec![64, 128, 256], seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelRatio {
    pub n: usize,
    pub max_ratio: f64,
    pub mean_ratio: f64,
    pub trials_used: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioReport {
    pub p: f64,
    pub levels: Vec<LevelRatio>,
    /// `|r_{k+1} / r_k - 1|` between consecutive levels, on the max ratios.
    pub drift: Vec<f64>,
    pub max_drift: f64,
}

/// Source coefficients of one trial, `[component][mode]`.
fn trial_coefficients(seed: u64, trial: usize) -> Vec<Vec<C64>> {
    let mut rng = Rng::new(seed.wrapping_add(trial as u64));
    let modes = ((2 * BAND + 1) * (2 * BAND + 1)) as usize;
    (0..2).map(|_| (0..modes).map(|_| rng.complex_unit()).collect()).collect()
}

/// The trial source sampled on a disk chart.
pub fn trial_source(chart: Arc<GridChart>, seed: u64, trial: usize) -> SpinorField {
    let coeffs = trial_coefficients(seed, trial);
    SpinorField::from_fn(chart, 1, |[x, y]| {
        let r2 = (x * x + y * y) / (RHO * RHO);
        if r2 >= 1.0 {
            return vec![ZERO, ZERO];
        }
        let cutoff = (1.0 - r2).powi(4);
        coeffs
            .iter()
            .map(|a| {
                let mut acc = ZERO;
                let mut idx = 0;
                for m in -BAND..=BAND {
                    for l in -BAND..=BAND {
                        let phase = PI * (m as f64 * x + l as f64 * y) / RHO;
                        acc += a[idx] * C64::from_polar(1.0, phase);
                        idx += 1;
                    }
                }
                acc * cutoff
            })
            .collect()
    })
}

/// `||grad w||_p` with centered differences over all active nodes.
pub fn gradient_lp(w: &SpinorField, p: f64) -> Result<f64> {
    let (dx, dy) = fd::gradient(w, FdStencil::Centered)?;
    let chart = w.chart();
    let nodes: Vec<usize> = chart.active_nodes().collect();
    Ok(lp_of(chart, &nodes, |k| (dx.norm_sqr_at(k) + dy.norm_sqr_at(k)).sqrt(), p))
}

/// Ratio `||grad w||_p / ||f||_p` for `w` the Dirac-Newton potential of `f`;
/// `None` when `f` vanishes.
pub fn potential_ratio(f: &SpinorField, p: f64) -> Result<Option<f64>> {
    let chart = f.chart();
    let nodes: Vec<usize> = chart.active_nodes().collect();
    let f_norm = lp_of(chart, &nodes, |k| f.norm_sqr_at(k).sqrt(), p);
    if f_norm == 0.0 {
        return Ok(None);
    }
    let w = green_convolve(f)?;
    Ok(Some(gradient_lp(&w, p)? / f_norm))
}

pub fn estimate_ratio(opts: &RatioOptions) -> Result<RatioReport> {
    let p = opts.p;
    if !(p > 1.0 && p <= 4.0 && p != 2.0) {
        return Err(SpinflowError::Precondition(format!("exponent p = {p} outside (1, 2) U (2, 4]")));
    }
    let mut levels = Vec::with_capacity(opts.levels.len());
    for &n in &opts.levels {
        let chart = Arc::new(GridChart::disk(1.0, n)?);
        let mut ratios = Vec::with_capacity(opts.trials);
        for trial in 0..opts.trials {
            let f = trial_source(chart.clone(), opts.seed, trial);
            if let Some(r) = potential_ratio(&f, p)? {
                ratios.push(r);
            }
        }
        let max_ratio = ratios.iter().cloned().fold(0.0, f64::max);
        let mean_ratio = if ratios.is_empty() { 0.0 } else { crate::quadrature::pairwise_sum(&ratios) / ratios.len() as f64 };
        levels.push(LevelRatio { n, max_ratio, mean_ratio, trials_used: ratios.len() });
    }
    let drift: Vec<f64> = levels.windows(2).map(|w| (w[1].max_ratio / w[0].max_ratio - 1.0).abs()).collect();
    let max_drift = drift.iter().cloned().fold(0.0, f64::max);
    Ok(RatioReport { p, levels, drift, max_drift })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_p_two() {
        let opts = RatioOptions { p: 2.0, trials: 1, levels: vec![16], seed: 0 };
        assert!(estimate_ratio(&opts).is_err());
    }

    #[test]
    fn zero_source_is_skipped() {
        let chart = Arc::new(GridChart::disk(1.0, 16).unwrap());
        assert_eq!(potential_ratio(&SpinorField::zeros(chart, 1), 1.5).unwrap(), None);
    }

    #[test]
    fn source_vanishes_near_boundary() {
        let chart = Arc::new(GridChart::disk(1.0, 32).unwrap());
        let f = trial_source(chart.clone(), 4, 0);
        for k in chart.boundary_nodes() {
            assert_eq!(f.norm_sqr_at(k), 0.0);
        }
        assert!(f.l2_norm() > 0.0);
    }
}
