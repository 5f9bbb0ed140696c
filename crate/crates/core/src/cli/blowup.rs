use serde_json::json;

use crate::blowup::{blowup_set, extract_bubbles, ledger_assemble, Bubble, ExtractOptions};
use crate::error::{Result, SpinflowError};
use crate::formats::read_field;
use crate::spinor::{SpinorField, ZERO};

use super::config::RunConfig;
use super::report::{chart_summary, ensure_dir, guard_block, write_report};
use super::EXIT_OK;

/// Fewest sequence elements the analysis accepts.
pub(super) const MIN_SEQUENCE: usize = 4;

/// The last element with every ball `B(p, delta)` around a blow-up point
/// cleared: a stand-in for the weak limit when none is supplied.
fn background_surrogate(last: &SpinorField, points: &[[f64; 2]], delta: f64) -> SpinorField {
    let mut out = last.clone();
    let chart = last.chart_arc().clone();
    for k in 0..chart.len() {
        let x = chart.coords(k);
        if points.iter().any(|&p| chart.distance(x, p) < delta) {
            out.node_mut(k).fill(ZERO);
        }
    }
    out
}

pub(super) fn run(cfg: &RunConfig) -> Result<i32> {
    let paths = &cfg.input.sequence;
    if paths.len() < MIN_SEQUENCE {
        return Err(SpinflowError::Configuration(format!(
            "blow-up analysis needs at least {MIN_SEQUENCE} fields in input.sequence, got {}",
            paths.len()
        )));
    }
    let sequence = paths.iter().map(|p| read_field(p)).collect::<Result<Vec<_>>>()?;
    let first = sequence[0].chart();
    for (p, psi) in paths.iter().zip(&sequence).skip(1) {
        if !psi.chart().compatible(first) || psi.n() != sequence[0].n() {
            return Err(SpinflowError::Configuration(format!(
                "{} lives on a different chart than {}",
                p.display(),
                paths[0].display()
            )));
        }
    }

    let a = &cfg.analysis;
    let points = blowup_set(&sequence, a.epsilon, &a.radii)?;
    let opts = ExtractOptions { delta: a.delta, big_r: a.big_r, limit_n: a.limit_n };
    let mut bubbles: Vec<Bubble> = Vec::new();
    for p in &points {
        bubbles.extend(extract_bubbles(&sequence, p.location, a.epsilon, opts)?);
    }

    let (background, background_source) = match &cfg.input.background {
        Some(path) => {
            let bg = read_field(path)?;
            if !bg.chart().compatible(first) || bg.n() != sequence[0].n() {
                return Err(SpinflowError::Configuration("background lives on a different chart than the sequence".into()));
            }
            (bg, "file")
        }
        None => {
            let locations: Vec<[f64; 2]> = points.iter().map(|p| p.location).collect();
            (background_surrogate(sequence.last().expect("non-empty"), &locations, a.delta), "surrogate")
        }
    };
    let ledger = ledger_assemble(&sequence, &background, &bubbles, a.h0)?;

    let bubble_reports: Vec<_> = bubbles
        .iter()
        .map(|b| {
            json!({
                "point": b.point,
                "scales": b.scales,
                "centers": b.centers,
                "energy": b.energy,
            })
        })
        .collect();
    let report = json!({
        "command": "blowup",
        "chart": chart_summary(first),
        "sequence_length": sequence.len(),
        "analysis": {
            "epsilon": a.epsilon,
            "radii": a.radii,
            "delta": a.delta,
            "big_r": a.big_r,
            "limit_n": a.limit_n,
            "h0": a.h0,
        },
        "points": points,
        "bubbles": bubble_reports,
        "ledger": {
            "total_limit": ledger.total_limit,
            "background": ledger.background,
            "background_source": background_source,
            "bubble_energies": ledger.bubble_energies(),
            "defect": ledger.defect,
            "relative_defect": ledger.relative_defect(),
            "energy_bound": ledger.energy_bound,
            "points": ledger.points,
        },
        "guard": guard_block(ledger.guard, a.guard),
    });
    ensure_dir(&cfg.output_dir)?;
    let path = write_report(&cfg.output_dir, "blowup_report.json", &report)?;
    eprintln!("wrote {}", path.display());
    Ok(EXIT_OK)
}
