//! Surfaces in `R^3` from spinor fields.
//!
//! For a spinor `psi = (psi_1, psi_2)` the three components
//!
//! ```text
//! phi = ( i (psi_1^2 + conj(psi_2)^2),  conj(psi_2)^2 - psi_1^2,  2 psi_1 conj(psi_2) )
//! ```
//!
//! satisfy `phi_1^2 + phi_2^2 + phi_3^2 = 0`, and the immersion is
//! `X = Re int phi dzbar`. When `D psi = 0` the components are
//! antiholomorphic, `phi dzbar` is closed and the integral is path
//! independent. The induced metric is `|psi|^4 |dz|^2`, so the area of the
//! surface equals the energy of `psi`.
//!
//! ```
//! use std::sync::Arc;
//! use spinflow::chart::{GridChart, SpinStructure};
//! use spinflow::spinor::{SpinorField, ONE, ZERO};
//! use spinflow::weierstrass::{integrate_surface, mesh_area};
//!
//! let chart = Arc::new(GridChart::unit_torus(16, SpinStructure::PeriodicPeriodic).unwrap());
//! let psi = SpinorField::constant(chart, &[ZERO, ONE]);
//! let mesh = integrate_surface(&psi, 0).unwrap();
//! assert!((mesh_area(&mesh) - 1.0).abs() < 1e-12);
//! ```

mod curvature;
mod mesh;

use std::sync::Arc;

use crate::chart::GridChart;
use crate::error::{Result, SpinflowError};
use crate::spinor::{SpinorField, C64, ONE, ZERO};

pub use curvature::{mean_curvature, MeanCurvature};
pub use mesh::{induced_metric_residual, integrate_surface, mesh_area, SurfaceMesh, METRIC_FLOOR};

/// `(phi_1, phi_2, phi_3)` at every node.
pub fn weierstrass_form(psi: &SpinorField) -> Result<Vec<[C64; 3]>> {
    if psi.n() != 1 {
        return Err(SpinflowError::Configuration(format!(
            "surface reconstruction needs a single spinor block, got n = {}",
            psi.n()
        )));
    }
    Ok((0..psi.chart().len()).map(|k| form_at(psi.block(k, 0))).collect())
}

pub(crate) fn form_at([a, b]: [C64; 2]) -> [C64; 3] {
    let bb = b.conj() * b.conj();
    let i = C64::new(0.0, 1.0);
    [i * (a * a + bb), bb - a * a, 2.0 * a * b.conj()]
}

/// `psi = (conj z, 1)`: harmonic spinor whose surface is Enneper's.
pub fn enneper_data(chart: Arc<GridChart>) -> SpinorField {
    SpinorField::from_fn(chart, 1, |[x, y]| vec![C64::new(x, -y), ONE])
}

/// `psi = (0, 1)`: the flat plane with unit metric.
pub fn plane_data(chart: Arc<GridChart>) -> SpinorField {
    SpinorField::constant(chart, &[ZERO, ONE])
}
