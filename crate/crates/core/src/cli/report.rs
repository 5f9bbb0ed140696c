//! JSON report helpers. `serde_json` maps keep their keys sorted, so every
//! report is written in a canonical order.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::chart::{Domain, GridChart};
use crate::error::Result;

/// The smallness guard `h0 * sqrt(E)` against its threshold.
pub fn guard_block(value: f64, threshold: f64) -> Value {
    json!({ "value": value, "threshold": threshold, "exceeded": value >= threshold })
}

pub(crate) fn chart_summary(chart: &GridChart) -> Value {
    let params = match chart.domain() {
        Domain::Torus { period_x, period_y } => json!({ "period_x": period_x, "period_y": period_y }),
        Domain::Disk { radius } => json!({ "radius": radius }),
        Domain::SphereChart => json!({}),
        Domain::Cylinder { t_min, t_max } => json!({ "t_min": t_min, "t_max": t_max }),
    };
    json!({
        "domain": chart.domain().name(),
        "nx": chart.nx(),
        "ny": chart.ny(),
        "spacing": chart.spacing(),
        "spin": chart.spin_structure().map(|s| s.short_name()),
        "parameters": params,
    })
}

pub(crate) fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

pub(crate) fn report_text(report: &Value) -> String {
    let mut text = serde_json::to_string_pretty(report).expect("JSON values always serialize");
    text.push('\n');
    text
}

pub(crate) fn write_report(dir: &Path, name: &str, report: &Value) -> Result<PathBuf> {
    let path = dir.join(name);
    fs::write(&path, report_text(report))?;
    Ok(path)
}
