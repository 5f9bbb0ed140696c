use serde_json::{json, Value};

use crate::chart::{GridChart, NodeKind};
use crate::dirac::{dirac_apply, DiracMode};
use crate::error::{Result, SpinflowError};
use crate::fields::{manufactured_disk, manufactured_torus};
use crate::formats::write_field;
use crate::nonlinear::{
    newton_refine, picard_solve, residual_forced, rhs_eval, smallness_margin, NewtonOptions,
    PicardOptions,
};
use crate::rng::Rng;
use crate::spinor::SpinorField;

use super::config::{ProblemKind, RunConfig};
use super::report::{chart_summary, ensure_dir, guard_block, write_report};
use super::{EXIT_OK, EXIT_SOLVER};

/// Random values of size `amplitude` on inside nodes and `boundary` values
/// on boundary nodes.
fn seed_field(chart: &GridChart, boundary: &SpinorField, amplitude: f64, seed: u64) -> SpinorField {
    let mut rng = Rng::new(seed);
    let mut out = SpinorField::zeros(boundary.chart_arc().clone(), boundary.n());
    for k in 0..chart.len() {
        match chart.kind(k) {
            NodeKind::Inside => {
                for v in out.node_mut(k) {
                    *v = rng.complex_unit() * amplitude;
                }
            }
            NodeKind::Boundary => out.node_mut(k).copy_from_slice(boundary.node(k)),
            NodeKind::Outside => {}
        }
    }
    out
}

pub(super) fn run(cfg: &RunConfig) -> Result<i32> {
    let chart = cfg.chart.build()?;
    let spec = cfg.reaction.build(&chart)?;
    let n = spec.n();
    let mode = if chart.is_torus() { DiracMode::Spectral } else { DiracMode::Fd };

    let truth = match cfg.problem.kind {
        ProblemKind::Zero => SpinorField::zeros(chart.clone(), n),
        ProblemKind::Manufactured if chart.is_torus() => manufactured_torus(chart.clone(), n, cfg.problem.amplitude),
        ProblemKind::Manufactured => manufactured_disk(chart.clone(), n, cfg.problem.amplitude),
    };
    let forcing = match cfg.problem.kind {
        ProblemKind::Zero => None,
        ProblemKind::Manufactured => Some(dirac_apply(&truth, mode)?.sub(&rhs_eval(&spec, &truth)?)),
    };
    let seed = seed_field(&chart, &truth, cfg.problem.seed_amplitude, cfg.seed);

    let picard_opts = PicardOptions {
        damping: cfg.solver.damping,
        tol: cfg.solver.tol,
        max_iter: cfg.solver.max_iter,
        guard: cfg.solver.guard,
    };
    let base = json!({
        "command": "solve",
        "chart": chart_summary(&chart),
        "reaction": { "kind": cfg.reaction.name(), "n": n, "h0": spec.h0(), "h1": spec.h1() },
        "problem": {
            "kind": match cfg.problem.kind { ProblemKind::Zero => "zero", ProblemKind::Manufactured => "manufactured" },
            "amplitude": cfg.problem.amplitude,
            "seed_amplitude": cfg.problem.seed_amplitude,
        },
        "solver": picard_opts,
        "seed": cfg.seed,
    });

    ensure_dir(&cfg.output_dir)?;
    let (psi, picard) = match picard_solve(&spec, &seed, forcing.as_ref(), picard_opts) {
        Ok(v) => v,
        Err(err @ (SpinflowError::Divergence { .. } | SpinflowError::NonConvergence { .. })) => {
            let (status, history) = match &err {
                SpinflowError::Divergence { history, .. } => ("diverged", history.clone()),
                SpinflowError::NonConvergence { history, .. } => ("not_converged", history.clone()),
                _ => unreachable!("matched above"),
            };
            let margin = smallness_margin(&spec, &truth);
            let mut report = base;
            report["status"] = json!(status);
            report["diagnostic"] = json!(err.to_string());
            report["update_history"] = json!(history);
            report["guard"] = guard_block(margin, cfg.solver.guard);
            write_report(&cfg.output_dir, "solve_report.json", &report)?;
            eprintln!("error: {err}");
            return Ok(EXIT_SOLVER);
        }
        Err(err) => return Err(err),
    };

    let (psi, newton) = if cfg.solver.newton && chart.is_torus() && cfg.solver.newton_steps > 0 {
        let opts = NewtonOptions {
            tol: cfg.solver.newton_tol,
            max_steps: cfg.solver.newton_steps,
            ..NewtonOptions::default()
        };
        let (refined, report) = newton_refine(&spec, &psi, forcing.as_ref(), opts)?;
        (refined, Some(report))
    } else {
        (psi, None)
    };

    let residual = residual_forced(&spec, &psi, forcing.as_ref(), mode)?.1;
    let error = match cfg.problem.kind {
        ProblemKind::Manufactured => {
            let scale = truth.l2_norm();
            json!(if scale > 0.0 { psi.sub(&truth).l2_norm() / scale } else { psi.l2_norm() })
        }
        ProblemKind::Zero => json!(psi.l2_norm()),
    };
    let margin = smallness_margin(&spec, &psi);
    let mut report = base;
    report["status"] = json!("converged");
    report["picard"] = json!(picard);
    report["newton"] = newton.map_or(Value::Null, |r| json!(r));
    report["energy"] = json!(psi.total_energy());
    report["residual"] = json!(residual);
    report["error_vs_truth"] = error;
    report["guard"] = guard_block(margin, cfg.solver.guard);

    let field_path = cfg.output_dir.join("solution.spnf");
    write_field(&field_path, &psi)?;
    let report_path = write_report(&cfg.output_dir, "solve_report.json", &report)?;
    eprintln!("wrote {} and {}", field_path.display(), report_path.display());
    Ok(EXIT_OK)
}
