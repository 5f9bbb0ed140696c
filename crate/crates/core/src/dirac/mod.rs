//! The flat Dirac operator `D = sigma_1 d_x + sigma_2 d_y = 2[[0, dbar], [-d, 0]]`,
//! its Green kernel and the boundary-value solve on the disk.

pub mod disk;
pub mod estimate;
pub mod fd;
pub mod green;
pub mod spectral;

pub use disk::{disk_solve, trace_norm, DiskSolution, DiskSolveOptions};
pub use estimate::{estimate_ratio, LevelRatio, RatioOptions, RatioReport};
pub use fd::FdStencil;
pub use green::{green_convolve, green_convolve_direct, GreenKernel};
pub use spectral::SpectralTorus;

use crate::error::{Result, SpinflowError};
use crate::spinor::SpinorField;

/// Discretization used by [`dirac_apply`] and [`laplace_apply`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DiracMode {
    /// Finite differences; any chart except the sphere.
    #[default]
    Fd,
    /// Fourier symbols; torus only.
    Spectral,
}

/// `D psi`, per 2-block `(2 dbar psi_2, -2 d psi_1)`.
pub fn dirac_apply(psi: &SpinorField, mode: DiracMode) -> Result<SpinorField> {
    match mode {
        DiracMode::Fd => fd::dirac(psi, FdStencil::Centered),
        DiracMode::Spectral => Ok(SpectralTorus::new(psi.chart())?.dirac(psi)),
    }
}

/// Componentwise flat Laplacian.
pub fn laplace_apply(psi: &SpinorField, mode: DiracMode) -> Result<SpinorField> {
    match mode {
        DiracMode::Fd => fd::laplace(psi),
        DiracMode::Spectral => Ok(SpectralTorus::new(psi.chart())?.laplace(psi)),
    }
}

/// `|| D(D psi) + Laplacian psi ||_{L^2}` on the torus.
pub fn weitzenboeck_residual(psi: &SpinorField, mode: DiracMode) -> Result<f64> {
    weitzenboeck_residual_with(psi, mode, FdStencil::Centered)
}

/// As [`weitzenboeck_residual`], choosing the first-derivative stencil used in
/// finite-difference mode.
pub fn weitzenboeck_residual_with(psi: &SpinorField, mode: DiracMode, stencil: FdStencil) -> Result<f64> {
    if !psi.chart().is_torus() {
        return Err(SpinflowError::UnsupportedDomain { op: "weitzenboeck_residual", domain: psi.chart().domain().name() });
    }
    let (dd, lap) = match mode {
        DiracMode::Spectral => {
            let sp = SpectralTorus::new(psi.chart())?;
            (sp.dirac(&sp.dirac(psi)), sp.laplace(psi))
        }
        DiracMode::Fd => (fd::dirac(&fd::dirac(psi, stencil)?, stencil)?, fd::laplace(psi)?),
    };
    Ok(dd.add(&lap).l2_norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::{GridChart, SpinStructure};
    use crate::spinor::{C64, ZERO};
    use std::f64::consts::PI;
    use std::sync::Arc;

    #[test]
    fn conjugate_coordinate_gives_constant() {
        let chart = Arc::new(GridChart::disk(1.0, 33).unwrap());
        let psi = SpinorField::from_fn(chart.clone(), 1, |[x, y]| vec![ZERO, C64::new(x, -y)]);
        let out = dirac_apply(&psi, DiracMode::Fd).unwrap();
        for k in chart.active_nodes() {
            let [a, b] = out.block(k, 0);
            assert!((a - C64::new(2.0, 0.0)).norm() < 1e-12 && b.norm() < 1e-12);
        }
    }

    #[test]
    fn sine_is_a_laplace_eigenfunction() {
        let chart = Arc::new(GridChart::unit_torus(32, SpinStructure::PeriodicPeriodic).unwrap());
        let psi = SpinorField::from_fn(chart.clone(), 1, |[x, _]| vec![C64::new((2.0 * PI * x).sin(), 0.0), ZERO]);
        let out = laplace_apply(&psi, DiracMode::Spectral).unwrap();
        let expect = psi.scaled(C64::new(-4.0 * PI * PI, 0.0));
        assert!(out.max_abs_diff(&expect) < 1e-10);
    }

    #[test]
    fn spectral_on_disk_is_rejected() {
        let chart = Arc::new(GridChart::disk(1.0, 16).unwrap());
        let psi = SpinorField::zeros(chart, 1);
        assert!(matches!(dirac_apply(&psi, DiracMode::Spectral), Err(SpinflowError::UnsupportedDomain { .. })));
        assert!(weitzenboeck_residual(&psi, DiracMode::Fd).is_err());
    }
}
