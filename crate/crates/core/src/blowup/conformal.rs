//! Conformal transfers of spinor fields.
//!
//! All three maps carry the weight `|dilation|^{1/2}`, which leaves both the
//! energy `int |psi|^4` and the form of the cubic Dirac equation unchanged.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::chart::{Domain, GridChart, Region};
use crate::error::{Result, SpinflowError};
use crate::spinor::{SpinorField, ZERO};

use super::interp::Sampler;

/// `lambda^{1/2} psi(x0 + lambda x)` sampled on the nodes of `target`.
///
/// ```
/// use std::sync::Arc;
/// use spinflow::blowup::rescale;
/// use spinflow::chart::GridChart;
/// use spinflow::spinor::{SpinorField, C64, ZERO};
///
/// let chart = Arc::new(GridChart::disk(1.0, 65).unwrap());
/// let psi = SpinorField::from_fn(chart.clone(), 1, |[x, y]| vec![C64::new(x, y), ZERO]);
/// let same = rescale(&psi, [0.0, 0.0], 1.0, chart).unwrap();
/// assert!(same.max_abs_diff(&psi) < 1e-14);
/// ```
pub fn rescale(psi: &SpinorField, x0: [f64; 2], lambda: f64, target: Arc<GridChart>) -> Result<SpinorField> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(SpinflowError::Precondition(format!("scale must be positive, got {lambda}")));
    }
    let sampler = Sampler::new(psi);
    let weight = lambda.sqrt();
    let s = psi.stride();
    let mut values = vec![ZERO; target.len() * s];
    for k in target.active_nodes() {
        let [x, y] = target.coords(k);
        let v = sampler.sample([x0[0] + lambda * x, x0[1] + lambda * y])?;
        for (o, vi) in values[k * s..(k + 1) * s].iter_mut().zip(v) {
            *o = vi * weight;
        }
    }
    SpinorField::from_values(target, psi.n(), values)
}

/// Sampling of the cylinder `[t_min, t_max] x S^1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylinderGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub n_theta: usize,
    pub n_t: usize,
}

/// `Psi(theta, t) = e^{-t/2} psi(center + e^{-t} e^{i theta})`; the segment
/// `[t1, t2]` corresponds to the annulus `e^{-t2} <= r <= e^{-t1}`.
pub fn to_cylinder(psi: &SpinorField, center: [f64; 2], grid: CylinderGrid) -> Result<SpinorField> {
    let source = psi.chart();
    if !matches!(source.domain(), Domain::Disk { .. } | Domain::Torus { .. }) {
        return Err(SpinflowError::UnsupportedDomain { op: "to_cylinder", domain: source.domain().name() });
    }
    let inner = (-grid.t_max).exp();
    if inner < source.spacing() {
        return Err(SpinflowError::Precondition(format!(
            "inner radius {inner:.3e} reaches the centre cell (spacing {:.3e})",
            source.spacing()
        )));
    }
    let chart = Arc::new(GridChart::cylinder(grid.t_min, grid.t_max, grid.n_theta, grid.n_t)?);
    let sampler = Sampler::new(psi);
    let s = psi.stride();
    let mut values = vec![ZERO; chart.len() * s];
    for k in 0..chart.len() {
        let [theta, t] = chart.coords(k);
        let r = (-t).exp();
        let p = [center[0] + r * theta.cos(), center[1] + r * theta.sin()];
        let v = sampler.sample(p)?;
        let w = (-0.5 * t).exp();
        for (o, vi) in values[k * s..(k + 1) * s].iter_mut().zip(v) {
            *o = vi * w;
        }
    }
    SpinorField::from_values(chart, psi.n(), values)
}

/// Energy of each unit-length `t` segment of a cylinder field, starting at
/// `t_min`; a trailing partial segment is reported as well.
pub fn cylinder_segment_energies(psi: &SpinorField) -> Result<Vec<f64>> {
    let chart = psi.chart();
    let Domain::Cylinder { t_min, t_max } = chart.domain() else {
        return Err(SpinflowError::UnsupportedDomain { op: "cylinder_segment_energies", domain: chart.domain().name() });
    };
    let count = (t_max - t_min).ceil().max(1.0) as usize;
    let mut buckets = vec![Vec::new(); count];
    for k in chart.active_nodes() {
        let t = chart.coords(k)[1];
        let b = (((t - t_min).floor()) as usize).min(count - 1);
        buckets[b].push(k);
    }
    Ok(buckets.iter().map(|nodes| psi.energy_on(nodes)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SphereDirection {
    ToSphere,
    ToPlane,
}

/// Fraction of the energy allowed in the outer tenth of the plane chart
/// before the field is considered non-decaying.
pub const DECAY_THRESHOLD: f64 = 1e-6;

/// Stereographic projection from the north pole: colatitude/longitude of a
/// plane point.
fn plane_to_sphere([x, y]: [f64; 2]) -> [f64; 2] {
    let r = x.hypot(y);
    let theta = 2.0 * (1.0f64).atan2(r);
    let phi = y.atan2(x).rem_euclid(2.0 * PI);
    [phi, theta]
}

fn sphere_to_plane([phi, theta]: [f64; 2]) -> Option<[f64; 2]> {
    let half = 0.5 * theta;
    if half.sin() == 0.0 {
        return None;
    }
    let r = half.cos() / half.sin();
    Some([r * phi.cos(), r * phi.sin()])
}

/// Conformal factor `((1 + |x|^2) / 2)^{1/2}` of the spinor weight.
fn weight(p: [f64; 2]) -> f64 {
    (0.5 * (1.0 + p[0] * p[0] + p[1] * p[1])).sqrt()
}

/// Moves a field between a centred disk chart of the plane and the sphere.
///
/// `target` is the sphere chart for [`SphereDirection::ToSphere`] and the
/// disk chart for [`SphereDirection::ToPlane`].
pub fn sphere_transfer(psi: &SpinorField, direction: SphereDirection, target: Arc<GridChart>) -> Result<SpinorField> {
    let source = psi.chart();
    let s = psi.stride();
    let mut values = vec![ZERO; target.len() * s];
    match direction {
        SphereDirection::ToSphere => {
            let Domain::Disk { radius } = source.domain() else {
                return Err(SpinflowError::UnsupportedDomain { op: "sphere_transfer", domain: source.domain().name() });
            };
            if target.domain() != Domain::SphereChart {
                return Err(SpinflowError::Precondition("target of a transfer to the sphere must be a sphere chart".into()));
            }
            let total = psi.total_energy();
            let outer = psi.energy(&Region::Annulus { center: [0.0, 0.0], inner: 0.9 * radius, outer: 2.0 * radius });
            let fraction = if total > 0.0 { outer / total } else { 0.0 };
            if fraction > DECAY_THRESHOLD {
                return Err(SpinflowError::Decay { fraction });
            }
            let sampler = Sampler::new(psi);
            // beyond the decay annulus the field is negligible
            let reach = 0.9 * radius;
            for k in 0..target.len() {
                let Some(p) = sphere_to_plane(target.coords(k)) else { continue };
                if p[0].hypot(p[1]) >= reach {
                    continue;
                }
                let v = sampler.sample(p)?;
                let w = weight(p);
                for (o, vi) in values[k * s..(k + 1) * s].iter_mut().zip(v) {
                    *o = vi * w;
                }
            }
        }
        SphereDirection::ToPlane => {
            if source.domain() != Domain::SphereChart {
                return Err(SpinflowError::UnsupportedDomain { op: "sphere_transfer", domain: source.domain().name() });
            }
            if !matches!(target.domain(), Domain::Disk { .. }) {
                return Err(SpinflowError::Precondition("target of a transfer to the plane must be a disk chart".into()));
            }
            let sampler = Sampler::new(psi);
            for k in target.active_nodes() {
                let p = target.coords(k);
                let v = sampler.sample(plane_to_sphere(p))?;
                let w = 1.0 / weight(p);
                for (o, vi) in values[k * s..(k + 1) * s].iter_mut().zip(v) {
                    *o = vi * w;
                }
            }
        }
    }
    SpinorField::from_values(target, psi.n(), values)
}
