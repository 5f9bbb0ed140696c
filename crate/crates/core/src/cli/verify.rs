//! The self-check suite behind `spinflow verify`.
//!
//! Output depends only on the configuration and seed: no timings, no paths.

use std::sync::Arc;

use serde::Serialize;
use serde_json::json;

use crate::blowup::{rescale, sphere_transfer, to_cylinder, CylinderGrid, SphereDirection};
use crate::chart::{GridChart, SpinStructure};
use crate::clifford::CliffordRep;
use crate::dirac::{
    dirac_apply, estimate_ratio, green_convolve, green_convolve_direct, weitzenboeck_residual_with, DiracMode, FdStencil,
    RatioOptions,
};
use crate::error::Result;
use crate::fields::manufactured_torus;
use crate::rng::Rng;
use crate::spinor::{SpinorField, C64, ZERO};
use crate::weierstrass::weierstrass_form;

use super::config::RunConfig;
use super::report::{ensure_dir, guard_block, write_report};
use super::{EXIT_CHECK_FAILED, EXIT_OK};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub(crate) struct Check {
    pub name: &'static str,
    pub value: f64,
    /// Human-readable acceptance rule for `value`.
    pub rule: String,
    pub passed: bool,
    /// Supporting measurements, e.g. per-level errors.
    pub series: Vec<f64>,
}

impl Check {
    fn at_most(name: &'static str, value: f64, limit: f64) -> Self {
        Self { name, value, rule: format!("<= {limit:e}"), passed: value <= limit, series: Vec::new() }
    }

    fn below(name: &'static str, value: f64, limit: f64) -> Self {
        Self { name, value, rule: format!("< {limit:e}"), passed: value < limit, series: Vec::new() }
    }

    /// Every ratio of consecutive errors in `[lo, hi]`; `value` is the
    /// smallest ratio.
    fn order(name: &'static str, errors: Vec<f64>, lo: f64, hi: f64) -> Self {
        let factors: Vec<f64> = errors.windows(2).map(|w| w[0] / w[1]).collect();
        let passed = factors.iter().all(|f| (lo..=hi).contains(f));
        let value = factors.iter().cloned().fold(f64::INFINITY, f64::min);
        Self { name, value, rule: format!("refinement factors in [{lo}, {hi}]"), passed, series: errors }
    }

    fn with_series(mut self, series: Vec<f64>) -> Self {
        self.series = series;
        self
    }

    pub(crate) fn line(&self) -> String {
        let status = if self.passed { "PASS" } else { "FAIL" };
        format!("{status} {} value={:.6e} ({})", self.name, self.value, self.rule)
    }
}

fn compact_bump(chart: Arc<GridChart>, c: [f64; 2], rho: f64) -> SpinorField {
    SpinorField::from_fn(chart, 1, move |[x, y]| {
        let r2 = ((x - c[0]).powi(2) + (y - c[1]).powi(2)) / (rho * rho);
        if r2 >= 1.0 {
            return vec![ZERO, ZERO];
        }
        let b = (1.0 - r2).powi(4);
        vec![C64::new(b * (1.0 + x), b * y), C64::new(b * x * y, -b)]
    })
}

fn relative_energy_gap(a: &SpinorField, b: &SpinorField) -> f64 {
    let (ea, eb) = (a.total_energy(), b.total_energy());
    ((ea - eb) / ea).abs()
}

fn null_identity(seed: u64) -> Result<f64> {
    let chart = Arc::new(GridChart::unit_torus(8, SpinStructure::AntiAnti)?);
    let mut rng = Rng::new(seed);
    let values = (0..chart.len() * 2).map(|_| rng.complex_unit() * 3.0).collect();
    let psi = SpinorField::from_values(chart, 1, values)?;
    let forms = weierstrass_form(&psi)?;
    Ok((0..forms.len())
        .map(|k| {
            let [a, b, c] = forms[k];
            (a * a + b * b + c * c).norm() / psi.norm_sqr_at(k).powi(2).max(f64::MIN_POSITIVE)
        })
        .fold(0.0, f64::max))
}

pub(crate) fn checks(cfg: &RunConfig) -> Result<Vec<Check>> {
    let levels = cfg.verify.levels;
    let mut out = Vec::new();

    out.push(Check::at_most("clifford_relations", CliffordRep::standard().relation_defect(), 1e-12));
    out.push(Check::at_most("null_identity", null_identity(cfg.seed)?, 1e-12));

    let torus = |n: usize| GridChart::unit_torus(n, SpinStructure::AntiAnti).map(Arc::new);
    let probe = manufactured_torus(torus(levels[1])?, 1, 1.0);
    out.push(Check::at_most(
        "weitzenboeck_spectral",
        weitzenboeck_residual_with(&probe, DiracMode::Spectral, FdStencil::Centered)?,
        1e-10,
    ));
    let stencil = if cfg.verify.broken_stencil { FdStencil::Forward } else { FdStencil::Centered };
    let errors = levels
        .iter()
        .map(|&n| weitzenboeck_residual_with(&manufactured_torus(torus(n)?, 1, 1.0), DiracMode::Fd, stencil))
        .collect::<Result<Vec<_>>>()?;
    out.push(Check::order("weitzenboeck_fd_order", errors, 3.0, 5.0));

    let mut errors = Vec::new();
    for &n in &levels {
        let chart = Arc::new(GridChart::disk(1.0, n)?);
        let psi = compact_bump(chart, [0.0, 0.0], 0.6);
        let w = green_convolve(&dirac_apply(&psi, DiracMode::Fd)?)?;
        errors.push(w.sub(&psi).l2_norm() / psi.l2_norm());
    }
    out.push(Check::order("green_roundtrip_order", errors, 3.0, 5.0));

    let small = Arc::new(GridChart::disk(1.0, 24)?);
    let f = dirac_apply(&compact_bump(small, [0.1, 0.0], 0.5), DiracMode::Fd)?;
    let direct = green_convolve_direct(&f)?;
    let scale = direct.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
    out.push(Check::at_most("green_fft_vs_direct", green_convolve(&f)?.max_abs_diff(&direct) / scale, 1e-10));

    let ratio = estimate_ratio(&RatioOptions {
        p: 4.0 / 3.0,
        trials: cfg.verify.trials,
        levels: levels.to_vec(),
        seed: cfg.seed,
    })?;
    let maxima = ratio.levels.iter().map(|l| l.max_ratio).collect();
    out.push(Check::below("estimate_ratio_drift", ratio.max_drift, 0.2).with_series(maxima));

    let n = levels[2];
    let src = compact_bump(torus(n)?, [0.5, 0.5], 0.3);
    let scaled = rescale(&src, [0.5, 0.5], 0.4, Arc::new(GridChart::disk(1.0, n + 1)?))?;
    out.push(Check::at_most("conformal_rescale", relative_energy_gap(&src, &scaled), 5e-4));

    let plane = compact_bump(Arc::new(GridChart::disk(3.0, 3 * n / 2 + 1)?), [0.2, 0.1], 1.5);
    let up = sphere_transfer(&plane, SphereDirection::ToSphere, Arc::new(GridChart::sphere(n)?))?;
    out.push(Check::at_most("conformal_sphere", relative_energy_gap(&plane, &up), 5e-4));

    let ring = SpinorField::from_fn(Arc::new(GridChart::disk(1.0, n + 1)?), 1, |[x, y]| {
        let s = (x.hypot(y) - 0.55) / 0.3;
        if s.abs() >= 1.0 {
            return vec![ZERO, ZERO];
        }
        let b = (1.0 - s * s).powi(4);
        vec![C64::new(b * (1.0 + x), 0.0), C64::new(0.0, b * y)]
    });
    let grid = CylinderGrid { t_min: 0.1, t_max: 1.7, n_theta: 2 * n, n_t: n / 2 };
    let cyl = to_cylinder(&ring, [0.0, 0.0], grid)?;
    out.push(Check::at_most("conformal_cylinder", relative_energy_gap(&ring, &cyl), 5e-4));

    Ok(out)
}

pub(super) fn run(cfg: &RunConfig) -> Result<i32> {
    let checks = checks(cfg)?;
    let passed = checks.iter().all(|c| c.passed);
    for c in &checks {
        println!("{}", c.line());
    }
    println!("{}", if passed { "verify: all checks passed" } else { "verify: some checks failed" });

    let probe = manufactured_torus(Arc::new(GridChart::unit_torus(cfg.verify.levels[1], SpinStructure::AntiAnti)?), 1, 1.0);
    let report = json!({
        "command": "verify",
        "seed": cfg.seed,
        "levels": cfg.verify.levels,
        "trials": cfg.verify.trials,
        "broken_stencil": cfg.verify.broken_stencil,
        "checks": checks,
        "passed": passed,
        "guard": guard_block(cfg.analysis.h0 * probe.total_energy().sqrt(), cfg.analysis.guard),
    });
    ensure_dir(&cfg.output_dir)?;
    write_report(&cfg.output_dir, "verify_report.json", &report)?;
    Ok(if passed { EXIT_OK } else { EXIT_CHECK_FAILED })
}
