//! Solvers for `D psi = F(psi) + forcing` with a cubic `F`.
//!
//! The Picard map is `psi <- (1 - theta) psi + theta D^{-1}(F(psi) + forcing)`.
//! On the torus `D^{-1}` is the spectral inverse, which exists unless the spin
//! structure is periodic in both directions. On the disk it is
//! [`disk_solve`](crate::dirac::disk_solve) with the trace of the seed held
//! fixed.

pub mod gmres;
pub mod reaction;

pub use reaction::{rhs_derivative, rhs_eval, ChiralPreset, Reaction, ReactionSpec, Tensor4, UvCoefficients};

use serde::Serialize;

use crate::chart::{Domain, Region, SpinStructure};
use crate::dirac::{self, DiracMode, DiskSolveOptions, SpectralTorus};
use crate::error::{Result, SpinflowError};
use crate::spinor::{SpinorField, C64, ONE};

use gmres::{gmres, GmresOptions};

/// `h0 * ||psi||_{L^4}^2 = h0 * sqrt(E(psi))`.
pub fn smallness_margin(spec: &ReactionSpec, psi: &SpinorField) -> f64 {
    spec.h0() * psi.total_energy().sqrt()
}

/// `D psi - F(psi)` and its `L^{4/3}` norm.
pub fn residual(spec: &ReactionSpec, psi: &SpinorField, mode: DiracMode) -> Result<(SpinorField, f64)> {
    residual_forced(spec, psi, None, mode)
}

/// `D psi - F(psi) - forcing` and its `L^{4/3}` norm.
pub fn residual_forced(
    spec: &ReactionSpec,
    psi: &SpinorField,
    forcing: Option<&SpinorField>,
    mode: DiracMode,
) -> Result<(SpinorField, f64)> {
    let mut r = dirac::dirac_apply(psi, mode)?.sub(&rhs_eval(spec, psi)?);
    if let Some(f) = forcing {
        check_forcing(psi, f)?;
        r = r.sub(f);
    }
    let norm = r.lp_norm(4.0 / 3.0, &Region::All)?;
    Ok((r, norm))
}

fn check_forcing(psi: &SpinorField, f: &SpinorField) -> Result<()> {
    if psi.same_shape(f) {
        Ok(())
    } else {
        Err(SpinflowError::Configuration("forcing does not match the field's chart or component count".into()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PicardOptions {
    /// `theta` in `(0, 1]`.
    pub damping: f64,
    /// Stop once the `L^2` norm of the update drops below this.
    pub tol: f64,
    pub max_iter: usize,
    /// Smallness margins at or above this are flagged.
    pub guard: f64,
}

impl Default for PicardOptions {
    fn default() -> Self {
        Self { damping: 0.5, tol: 1e-8, max_iter: 2000, guard: 0.5 }
    }
}

/// Per-iteration record of a solve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationReport {
    pub iterations: usize,
    pub update_history: Vec<f64>,
    /// `L^{4/3}` residual after each iteration.
    pub residual_history: Vec<f64>,
    pub final_residual: f64,
    pub smallness_margin: f64,
    pub guard_exceeded: bool,
}

enum Inverse {
    Torus(SpectralTorus),
    Disk(SpinorField),
}

impl Inverse {
    fn new(seed: &SpinorField) -> Result<Self> {
        let chart = seed.chart();
        match chart.domain() {
            Domain::Torus { .. } => {
                if chart.spin_structure() == Some(SpinStructure::PeriodicPeriodic) {
                    return Err(SpinflowError::Configuration(
                        "the Dirac operator has harmonic spinors on the periodic-periodic torus and cannot be inverted"
                            .into(),
                    ));
                }
                Ok(Inverse::Torus(SpectralTorus::new(chart)?))
            }
            Domain::Disk { .. } => Ok(Inverse::Disk(seed.clone())),
            d => Err(SpinflowError::UnsupportedDomain { op: "picard_solve", domain: d.name() }),
        }
    }

    fn solve(&self, f: &SpinorField) -> Result<SpinorField> {
        match self {
            Inverse::Torus(sp) => Ok(sp.dirac_inverse(f)),
            Inverse::Disk(trace) => Ok(dirac::disk_solve(f, trace, DiskSolveOptions::default())?.field),
        }
    }

    fn mode(&self) -> DiracMode {
        match self {
            Inverse::Torus(_) => DiracMode::Spectral,
            Inverse::Disk(_) => DiracMode::Fd,
        }
    }
}

/// Damped Picard iteration from `seed`.
pub fn picard_solve(
    spec: &ReactionSpec,
    seed: &SpinorField,
    forcing: Option<&SpinorField>,
    opts: PicardOptions,
) -> Result<(SpinorField, IterationReport)> {
    if !(opts.damping > 0.0 && opts.damping <= 1.0) {
        return Err(SpinflowError::Configuration(format!("damping {} outside (0, 1]", opts.damping)));
    }
    if !(opts.tol > 0.0) {
        return Err(SpinflowError::Configuration("tolerance must be positive".into()));
    }
    seed.validate()?;
    if let Some(f) = forcing {
        check_forcing(seed, f)?;
    }
    rhs_eval(spec, seed)?;
    let inverse = Inverse::new(seed)?;
    let theta = C64::new(opts.damping, 0.0);

    let mut psi = seed.clone();
    let mut updates = Vec::new();
    let mut residuals = Vec::new();
    loop {
        let mut source = rhs_eval(spec, &psi)?;
        if let Some(f) = forcing {
            source = source.add(f);
        }
        let target = inverse.solve(&source)?;
        let next = psi.lin_comb(ONE - theta, &target, theta);
        let update = next.sub(&psi).l2_norm();
        psi = next;
        updates.push(update);
        let k = updates.len();
        if !update.is_finite() || (k > 20 && update > 10.0 * updates[k - 21]) {
            return Err(SpinflowError::Divergence { iterations: k, last: update, history: updates });
        }
        residuals.push(residual_forced(spec, &psi, forcing, inverse.mode())?.1);
        if update < opts.tol {
            break;
        }
        if k >= opts.max_iter {
            return Err(SpinflowError::NonConvergence { iterations: k, last: update, history: updates });
        }
    }
    let margin = smallness_margin(spec, &psi);
    let report = IterationReport {
        iterations: updates.len(),
        final_residual: *residuals.last().unwrap_or(&0.0),
        update_history: updates,
        residual_history: residuals,
        smallness_margin: margin,
        guard_exceeded: margin >= opts.guard,
    };
    Ok((psi, report))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NewtonOptions {
    /// Target `L^{4/3}` residual.
    pub tol: f64,
    pub max_steps: usize,
    pub linear: GmresSettings,
}

/// Serializable mirror of [`GmresOptions`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GmresSettings {
    pub tol: f64,
    pub restart: usize,
    pub max_iter: usize,
}

impl From<GmresSettings> for GmresOptions {
    fn from(s: GmresSettings) -> Self {
        GmresOptions { tol: s.tol, restart: s.restart, max_iter: s.max_iter }
    }
}

impl Default for NewtonOptions {
    fn default() -> Self {
        let g = GmresOptions::default();
        Self { tol: 1e-10, max_steps: 8, linear: GmresSettings { tol: g.tol, restart: g.restart, max_iter: g.max_iter } }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NewtonReport {
    pub steps: usize,
    /// Residual before the first step and after each accepted step.
    pub residual_history: Vec<f64>,
    pub update_history: Vec<f64>,
    pub linear_iterations: Vec<usize>,
    /// Set when a step failed to reduce the residual or the linear solve did
    /// not converge; the last good iterate is returned.
    pub stagnated: bool,
}

fn to_real(f: &SpinorField) -> Vec<f64> {
    f.values().iter().flat_map(|c| [c.re, c.im]).collect()
}

fn from_real(template: &SpinorField, x: &[f64]) -> SpinorField {
    let mut out = template.clone();
    for (v, pair) in out.values_mut().iter_mut().zip(x.chunks_exact(2)) {
        *v = C64::new(pair[0], pair[1]);
    }
    out
}

/// Newton steps on the torus: solve `(I - D^{-1} dF) delta = -D^{-1} r` by
/// GMRES and update `psi += delta` while the residual decreases.
pub fn newton_refine(
    spec: &ReactionSpec,
    psi: &SpinorField,
    forcing: Option<&SpinorField>,
    opts: NewtonOptions,
) -> Result<(SpinorField, NewtonReport)> {
    let inverse = Inverse::new(psi)?;
    let Inverse::Torus(sp) = &inverse else {
        return Err(SpinflowError::UnsupportedDomain { op: "newton_refine", domain: psi.chart().domain().name() });
    };
    let mut current = psi.clone();
    let (mut r, mut norm) = residual_forced(spec, &current, forcing, DiracMode::Spectral)?;
    let mut report = NewtonReport {
        steps: 0,
        residual_history: vec![norm],
        update_history: Vec::new(),
        linear_iterations: Vec::new(),
        stagnated: false,
    };
    while norm > opts.tol && report.steps < opts.max_steps {
        let b: Vec<f64> = to_real(&sp.dirac_inverse(&r)).iter().map(|v| -v).collect();
        let base = current.clone();
        let apply = |x: &[f64]| -> Vec<f64> {
            let d = from_real(&base, x);
            let jd = rhs_derivative(spec, &base, &d).expect("shape checked by residual");
            let out = d.sub(&sp.dirac_inverse(&jd));
            to_real(&out)
        };
        let outcome = gmres(apply, &b, opts.linear.into());
        report.linear_iterations.push(outcome.iterations);
        let delta = from_real(&current, &outcome.x);
        let candidate = current.add(&delta);
        let (r_new, norm_new) = residual_forced(spec, &candidate, forcing, DiracMode::Spectral)?;
        if !(norm_new < norm) {
            report.stagnated = true;
            break;
        }
        report.update_history.push(delta.l2_norm());
        report.steps += 1;
        report.residual_history.push(norm_new);
        current = candidate;
        r = r_new;
        norm = norm_new;
        if !outcome.converged {
            report.stagnated = true;
            break;
        }
    }
    Ok((current, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::GridChart;
    use crate::rng::Rng;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn torus(n: usize) -> Arc<GridChart> {
        Arc::new(GridChart::unit_torus(n, SpinStructure::AntiAnti).unwrap())
    }

    fn manufactured(chart: Arc<GridChart>, amp: f64) -> SpinorField {
        SpinorField::from_fn(chart, 1, |[x, y]| {
            vec![
                C64::from_polar(amp, PI * (x + y)) * (1.0 + 0.3 * (2.0 * PI * x).cos()),
                C64::from_polar(0.5 * amp, PI * (x - 3.0 * y)),
            ]
        })
    }

    #[test]
    fn linear_problem_contracts_to_zero() {
        let c = torus(16);
        let spec = ReactionSpec::scalar_h(&c, vec![0.0]).unwrap();
        let mut rng = Rng::new(1);
        let seed = SpinorField::from_values(c.clone(), 1, (0..c.len() * 2).map(|_| rng.complex_unit()).collect()).unwrap();
        let (psi, report) = picard_solve(&spec, &seed, None, PicardOptions::default()).unwrap();
        assert!(psi.l2_norm() < 1e-7);
        assert!(report.smallness_margin == 0.0);
    }

    #[test]
    fn periodic_torus_is_rejected() {
        let c = Arc::new(GridChart::unit_torus(16, SpinStructure::PeriodicPeriodic).unwrap());
        let spec = ReactionSpec::scalar_h(&c, vec![1.0]).unwrap();
        let seed = SpinorField::zeros(c, 1);
        assert!(matches!(
            picard_solve(&spec, &seed, None, PicardOptions::default()),
            Err(SpinflowError::Configuration(_))
        ));
    }

    #[test]
    fn constant_spinor_is_harmonic_on_periodic_torus() {
        let c = Arc::new(GridChart::unit_torus(16, SpinStructure::PeriodicPeriodic).unwrap());
        let spec = ReactionSpec::scalar_h(&c, vec![0.0]).unwrap();
        let psi = SpinorField::constant(c, &[ONE, C64::new(0.0, 2.0)]);
        assert!(residual(&spec, &psi, DiracMode::Spectral).unwrap().1 < 1e-14);
    }

    #[test]
    fn manufactured_solution_is_recovered() {
        let c = torus(32);
        let spec = ReactionSpec::scalar_h(&c, vec![1.0]).unwrap();
        let truth = manufactured(c.clone(), 0.5);
        let forcing = dirac::dirac_apply(&truth, DiracMode::Spectral).unwrap().sub(&rhs_eval(&spec, &truth).unwrap());
        let seed = SpinorField::zeros(c, 1);
        let opts = PicardOptions { tol: 1e-6, ..Default::default() };
        let (psi, report) = picard_solve(&spec, &seed, Some(&forcing), opts).unwrap();
        let tail = &report.residual_history[5..];
        assert!(tail.windows(2).all(|w| w[1] <= w[0]));
        let (psi, newton) = newton_refine(&spec, &psi, Some(&forcing), NewtonOptions::default()).unwrap();
        assert!(newton.steps <= 5, "{newton:?}");
        assert!(*newton.residual_history.last().unwrap() <= 1e-10);
        assert!(psi.sub(&truth).l2_norm() < 1e-9);
    }

    #[test]
    fn newton_is_a_fixed_point_at_a_solution() {
        let c = torus(16);
        let spec = ReactionSpec::scalar_h(&c, vec![1.0]).unwrap();
        let zero = SpinorField::zeros(c, 1);
        let (psi, report) = newton_refine(&spec, &zero, None, NewtonOptions::default()).unwrap();
        assert_eq!(report.steps, 0);
        assert_eq!(psi, zero);
    }

    #[test]
    fn large_data_diverges() {
        let c = torus(16);
        let spec = ReactionSpec::scalar_h(&c, vec![1.0]).unwrap();
        let truth = manufactured(c.clone(), 8.0);
        let forcing = dirac::dirac_apply(&truth, DiracMode::Spectral).unwrap().sub(&rhs_eval(&spec, &truth).unwrap());
        assert!(smallness_margin(&spec, &truth) >= 1.0);
        let seed = SpinorField::zeros(c, 1);
        let err = picard_solve(&spec, &seed, Some(&forcing), PicardOptions::default()).unwrap_err();
        assert!(matches!(err, SpinflowError::Divergence { .. }), "{err}");
    }

    #[test]
    fn margin_scales_quadratically() {
        let c = torus(16);
        let spec = ReactionSpec::scalar_h(&c, vec![1.0]).unwrap();
        let psi = manufactured(c, 0.3);
        let m1 = smallness_margin(&spec, &psi);
        let m2 = smallness_margin(&spec, &psi.scaled(C64::new(2.0, 0.0)));
        assert!((m2 - 4.0 * m1).abs() < 1e-12 * m2);
    }
}
