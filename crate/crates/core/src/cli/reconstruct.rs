use serde_json::json;

use crate::chart::Domain;
use crate::error::{Result, SpinflowError};
use crate::formats::{plane_fit_residual, read_field, write_obj};
use crate::weierstrass::{induced_metric_residual, integrate_surface, mean_curvature, mesh_area};

use super::config::RunConfig;
use super::report::{chart_summary, ensure_dir, guard_block, write_report};
use super::EXIT_OK;

/// Rows of lattice nodes excluded from the interior curvature summary.
const CURVATURE_MARGIN: usize = 2;

pub(super) fn run(cfg: &RunConfig) -> Result<i32> {
    let path = cfg
        .input
        .field
        .as_ref()
        .ok_or_else(|| SpinflowError::Configuration("reconstruct needs input.field".into()))?;
    let psi = read_field(path)?;
    if psi.n() != 1 {
        return Err(SpinflowError::Configuration(format!(
            "the Weierstrass representation needs one spinor block, the field has {}",
            psi.n()
        )));
    }
    let chart = psi.chart();
    let basepoint = match chart.domain() {
        Domain::Disk { .. } => chart.index(chart.nx() / 2, chart.ny() / 2),
        _ => 0,
    };
    let mesh = integrate_surface(&psi, basepoint)?;
    let curvature = mean_curvature(&mesh);
    let area = mesh_area(&mesh);
    let energy = psi.total_energy();
    let defined: Vec<f64> = curvature.values.iter().flatten().copied().collect();
    let mean_abs = if defined.is_empty() { 0.0 } else { defined.iter().map(|v| v.abs()).sum::<f64>() / defined.len() as f64 };

    let report = json!({
        "command": "reconstruct",
        "chart": chart_summary(chart),
        "basepoint": basepoint,
        "vertices": mesh.vertex_count(),
        "faces": mesh.faces.len(),
        "loop_residual": mesh.loop_residual,
        "metric_residual": induced_metric_residual(&mesh, &psi)?,
        "mesh_area": area,
        "energy": energy,
        "area_gap": if energy > 0.0 { (area - energy).abs() / energy } else { area },
        "plane_fit_residual": plane_fit_residual(&mesh.positions),
        "mean_curvature": {
            "max_abs": curvature.max_abs(),
            "max_abs_interior": curvature.max_abs_within(&mesh, CURVATURE_MARGIN),
            "interior_margin": CURVATURE_MARGIN,
            "mean_abs": mean_abs,
            "excluded_vertices": curvature.excluded.len(),
        },
        "guard": guard_block(cfg.analysis.h0 * energy.sqrt(), cfg.analysis.guard),
    });

    ensure_dir(&cfg.output_dir)?;
    let obj = cfg.output_dir.join("surface.obj");
    write_obj(&obj, &mesh)?;
    let report_path = write_report(&cfg.output_dir, "reconstruct_report.json", &report)?;
    eprintln!("wrote {} and {}", obj.display(), report_path.display());
    Ok(EXIT_OK)
}
