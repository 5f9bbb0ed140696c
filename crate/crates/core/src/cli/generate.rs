use std::sync::Arc;

use serde_json::json;

use crate::chart::{GridChart, SpinStructure};
use crate::error::{Result, SpinflowError};
use crate::fields::{bubbling_field, single_point_design, two_point_design, PlantedSequence, DESIGN_BACKGROUND};
use crate::formats::write_field;
use crate::spinor::SpinorField;
use crate::weierstrass::{enneper_data, plane_data};

use super::config::{ChartDomain, GenerateKind, RunConfig};
use super::report::{ensure_dir, guard_block, write_report};
use super::EXIT_OK;

fn sequence_names(len: usize) -> Vec<String> {
    (0..len).map(|m| format!("seq_{m:02}.spnf")).collect()
}

fn planted_files(design: PlantedSequence) -> (Vec<(String, SpinorField)>, serde_json::Value) {
    let truth = json!({
        "points": design.points,
        "scales": design.bubbles.iter().map(|per_point| {
            per_point.iter().map(|b| b.iter().map(|x| x.scale).collect::<Vec<_>>()).collect::<Vec<_>>()
        }).collect::<Vec<_>>(),
    });
    let mut files: Vec<(String, SpinorField)> = sequence_names(design.sequence.len()).into_iter().zip(design.sequence).collect();
    files.push(("background.spnf".into(), design.background));
    (files, truth)
}

pub(super) fn run(cfg: &RunConfig) -> Result<i32> {
    let g = &cfg.generate;
    let nx = cfg.chart.nx;
    let (kind, files, truth) = match g.kind {
        GenerateKind::Plane => ("plane", vec![("plane.spnf".to_string(), plane_data(cfg.chart.build()?))], json!(null)),
        GenerateKind::Enneper => {
            if cfg.chart.domain != ChartDomain::Disk {
                return Err(SpinflowError::Configuration("enneper data is generated on a disk chart".into()));
            }
            ("enneper", vec![("enneper.spnf".to_string(), enneper_data(cfg.chart.build()?))], json!(null))
        }
        GenerateKind::PlantedSingle => {
            let (files, truth) = planted_files(single_point_design(nx, g.elements)?);
            ("planted_single", files, truth)
        }
        GenerateKind::PlantedTwo => {
            let (files, truth) = planted_files(two_point_design(nx, g.elements)?);
            ("planted_two", files, truth)
        }
        GenerateKind::FlatSequence => {
            let chart = Arc::new(GridChart::unit_torus(nx, SpinStructure::PeriodicPeriodic)?);
            let files = sequence_names(g.elements)
                .into_iter()
                .enumerate()
                .map(|(m, name)| {
                    let amp = DESIGN_BACKGROUND * (1.0 + 0.1 * 0.5f64.powi(m as i32));
                    (name, bubbling_field(chart.clone(), amp, &[]))
                })
                .collect();
            ("flat_sequence", files, json!(null))
        }
    };

    let bound = files.iter().map(|(_, f)| f.total_energy()).fold(0.0, f64::max);
    ensure_dir(&cfg.output_dir)?;
    for (name, field) in &files {
        write_field(&cfg.output_dir.join(name), field)?;
    }
    let report = json!({
        "command": "generate",
        "kind": kind,
        "files": files.iter().map(|(name, _)| name).collect::<Vec<_>>(),
        "energies": files.iter().map(|(_, f)| f.total_energy()).collect::<Vec<_>>(),
        "planted": truth,
        "guard": guard_block(cfg.analysis.h0 * bound.sqrt(), cfg.analysis.guard),
    });
    let path = write_report(&cfg.output_dir, "generate_report.json", &report)?;
    eprintln!("wrote {} field files and {}", files.len(), path.display());
    Ok(EXIT_OK)
}
