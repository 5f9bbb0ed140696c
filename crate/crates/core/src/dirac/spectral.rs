//! Fourier representation on the flat torus.
//!
//! Antiperiodic directions are handled by a half-integer frequency shift:
//! a spinor that flips sign around the x cycle is multiplied by
//! `exp(-i pi x / L_x)` before the transform, which makes it periodic, and
//! mode `m` then carries wavenumber `2 pi (m + 1/2) / L_x`.
//!
//! For periodic directions with an even node count the Nyquist mode is given
//! wavenumber zero, so first and second derivatives share one symbol and
//! `D^2 = -Laplacian` holds exactly in the discrete setting.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::chart::{Domain, GridChart, SpinStructure};
use crate::error::{Result, SpinflowError};
use crate::spinor::{SpinorField, C64, I, ZERO};

/// Precomputed transforms and symbols for one torus chart.
#[derive(Clone)]
pub struct SpectralTorus {
    nx: usize,
    ny: usize,
    kx: Vec<f64>,
    ky: Vec<f64>,
    twist_x: Vec<C64>,
    twist_y: Vec<C64>,
    fwd_x: Arc<dyn Fft<f64>>,
    inv_x: Arc<dyn Fft<f64>>,
    fwd_y: Arc<dyn Fft<f64>>,
    inv_y: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for SpectralTorus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralTorus").field("nx", &self.nx).field("ny", &self.ny).finish()
    }
}

fn wavenumbers(n: usize, period: f64, anti: bool) -> Vec<f64> {
    (0..n)
        .map(|m| {
            let signed = if m < n.div_ceil(2) { m as f64 } else { m as f64 - n as f64 };
            if anti {
                2.0 * PI * (signed + 0.5) / period
            } else if n.is_multiple_of(2) && m == n / 2 {
                0.0
            } else {
                2.0 * PI * signed / period
            }
        })
        .collect()
}

fn twist(n: usize, anti: bool) -> Vec<C64> {
    (0..n)
        .map(|i| if anti { C64::from_polar(1.0, -PI * i as f64 / n as f64) } else { C64::new(1.0, 0.0) })
        .collect()
}

impl SpectralTorus {
    pub fn new(chart: &GridChart) -> Result<Self> {
        let Domain::Torus { period_x, period_y } = chart.domain() else {
            return Err(SpinflowError::UnsupportedDomain { op: "spectral transform", domain: chart.domain().name() });
        };
        let spin = chart.spin_structure().expect("torus charts carry a spin structure");
        let (nx, ny) = (chart.nx(), chart.ny());
        let anti_x = spin.sign_x() < 0.0;
        let anti_y = spin.sign_y() < 0.0;
        let mut planner = FftPlanner::new();
        Ok(Self {
            nx,
            ny,
            kx: wavenumbers(nx, period_x, anti_x),
            ky: wavenumbers(ny, period_y, anti_y),
            twist_x: twist(nx, anti_x),
            twist_y: twist(ny, anti_y),
            fwd_x: planner.plan_fft_forward(nx),
            inv_x: planner.plan_fft_inverse(nx),
            fwd_y: planner.plan_fft_forward(ny),
            inv_y: planner.plan_fft_inverse(ny),
        })
    }

    pub fn kx(&self) -> &[f64] {
        &self.kx
    }

    pub fn ky(&self) -> &[f64] {
        &self.ky
    }

    /// Number of modes on which the Dirac symbol vanishes.
    pub fn kernel_dimension(&self) -> usize {
        let mut count = 0;
        for &ky in &self.ky {
            for &kx in &self.kx {
                if kx == 0.0 && ky == 0.0 {
                    count += 1;
                }
            }
        }
        count
    }

    /// Smallest `|k|` over all modes; zero iff the Dirac operator has a kernel.
    pub fn min_symbol(&self) -> f64 {
        let mut best = f64::INFINITY;
        for &ky in &self.ky {
            for &kx in &self.kx {
                best = best.min(kx.hypot(ky));
            }
        }
        best
    }

    fn forward(&self, data: &mut [C64]) {
        let (nx, ny) = (self.nx, self.ny);
        for j in 0..ny {
            for i in 0..nx {
                data[j * nx + i] *= self.twist_x[i] * self.twist_y[j];
            }
        }
        self.fwd_x.process(data);
        let mut col = vec![ZERO; ny];
        for i in 0..nx {
            for j in 0..ny {
                col[j] = data[j * nx + i];
            }
            self.fwd_y.process(&mut col);
            for j in 0..ny {
                data[j * nx + i] = col[j];
            }
        }
    }

    fn inverse(&self, data: &mut [C64]) {
        let (nx, ny) = (self.nx, self.ny);
        let mut col = vec![ZERO; ny];
        for i in 0..nx {
            for j in 0..ny {
                col[j] = data[j * nx + i];
            }
            self.inv_y.process(&mut col);
            for j in 0..ny {
                data[j * nx + i] = col[j];
            }
        }
        self.inv_x.process(data);
        let scale = 1.0 / (nx * ny) as f64;
        for j in 0..ny {
            for i in 0..nx {
                data[j * nx + i] *= self.twist_x[i].conj() * self.twist_y[j].conj() * scale;
            }
        }
    }

    /// Transform every complex component of a field; returns one spectrum per
    /// component, component-major.
    fn spectra(&self, psi: &SpinorField) -> Vec<Vec<C64>> {
        let s = psi.stride();
        let len = self.nx * self.ny;
        (0..s)
            .map(|c| {
                let mut buf: Vec<C64> = (0..len).map(|k| psi.values()[k * s + c]).collect();
                self.forward(&mut buf);
                buf
            })
            .collect()
    }

    fn assemble(&self, template: &SpinorField, mut spectra: Vec<Vec<C64>>) -> SpinorField {
        let s = template.stride();
        let mut out = template.clone();
        for (c, spec) in spectra.iter_mut().enumerate() {
            self.inverse(spec);
            for (k, v) in spec.iter().enumerate() {
                out.values_mut()[k * s + c] = *v;
            }
        }
        out
    }

    /// Apply a per-mode 2x2 symbol to every spinor block.
    fn apply_block_symbol(&self, psi: &SpinorField, symbol: impl Fn(f64, f64) -> [[C64; 2]; 2]) -> SpinorField {
        let spectra = self.spectra(psi);
        let mut out = spectra.clone();
        for b in 0..psi.n() {
            let (a_spec, b_spec) = (&spectra[2 * b], &spectra[2 * b + 1]);
            for j in 0..self.ny {
                for i in 0..self.nx {
                    let k = j * self.nx + i;
                    let m = symbol(self.kx[i], self.ky[j]);
                    let (a, bb) = (a_spec[k], b_spec[k]);
                    out[2 * b][k] = m[0][0] * a + m[0][1] * bb;
                    out[2 * b + 1][k] = m[1][0] * a + m[1][1] * bb;
                }
            }
        }
        self.assemble(psi, out)
    }

    /// `D psi = sigma_1 d_x psi + sigma_2 d_y psi`.
    pub fn dirac(&self, psi: &SpinorField) -> SpinorField {
        self.apply_block_symbol(psi, dirac_symbol)
    }

    /// Componentwise flat Laplacian.
    pub fn laplace(&self, psi: &SpinorField) -> SpinorField {
        self.apply_block_symbol(psi, |kx, ky| {
            let d = C64::new(-(kx * kx + ky * ky), 0.0);
            [[d, ZERO], [ZERO, d]]
        })
    }

    /// Solve `D w = f` mode by mode (`D^{-1} = D / |k|^2`); modes in the kernel
    /// are set to zero.
    pub fn dirac_inverse(&self, f: &SpinorField) -> SpinorField {
        self.apply_block_symbol(f, |kx, ky| {
            let k2 = kx * kx + ky * ky;
            if k2 == 0.0 {
                return [[ZERO; 2]; 2];
            }
            let m = dirac_symbol(kx, ky);
            [[m[0][0] / k2, m[0][1] / k2], [m[1][0] / k2, m[1][1] / k2]]
        })
    }

    /// Spatial partial derivatives `(d_x psi, d_y psi)`.
    pub fn gradient(&self, psi: &SpinorField) -> (SpinorField, SpinorField) {
        let spectra = self.spectra(psi);
        let mut dx = spectra.clone();
        let mut dy = spectra;
        for c in 0..psi.stride() {
            for j in 0..self.ny {
                for i in 0..self.nx {
                    let k = j * self.nx + i;
                    dx[c][k] *= I * self.kx[i];
                    dy[c][k] *= I * self.ky[j];
                }
            }
        }
        (self.assemble(psi, dx), self.assemble(psi, dy))
    }
}

/// Fourier symbol of the Dirac operator on one block: `i kx sigma_1 + i ky sigma_2`.
pub fn dirac_symbol(kx: f64, ky: f64) -> [[C64; 2]; 2] {
    // sigma_1 = [[0,1],[-1,0]], sigma_2 = [[0,i],[i,0]]
    [[ZERO, C64::new(-ky, kx)], [C64::new(-ky, -kx), ZERO]]
}

/// Whether the Dirac operator of this spin structure has a kernel, read off
/// its Fourier symbol.
pub fn has_harmonic_spinors(spin: SpinStructure) -> bool {
    spin == SpinStructure::PeriodicPeriodic
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spinor::ONE;

    #[test]
    fn symbol_kernel_matches_spin_structure() {
        for spin in SpinStructure::ALL {
            let chart = GridChart::unit_torus(16, spin).unwrap();
            let sp = SpectralTorus::new(&chart).unwrap();
            let has_kernel = sp.min_symbol() == 0.0;
            assert_eq!(has_kernel, has_harmonic_spinors(spin), "{spin:?}");
        }
        let chart = GridChart::unit_torus(16, SpinStructure::AntiAnti).unwrap();
        let sp = SpectralTorus::new(&chart).unwrap();
        assert!((sp.min_symbol() - std::f64::consts::PI * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn constants_are_harmonic_on_periodic_torus() {
        let chart = Arc::new(GridChart::unit_torus(16, SpinStructure::PeriodicPeriodic).unwrap());
        let sp = SpectralTorus::new(&chart).unwrap();
        let psi = SpinorField::constant(chart, &[ONE, C64::new(0.3, -2.0)]);
        assert!(sp.dirac(&psi).values().iter().all(|v| v.norm() < 1e-13));
    }

    #[test]
    fn round_trip_is_identity() {
        let chart = GridChart::unit_torus(16, SpinStructure::AntiPeriodic).unwrap();
        let sp = SpectralTorus::new(&chart).unwrap();
        let mut data: Vec<C64> = (0..256).map(|k| C64::new((k as f64).sin(), (k as f64 * 0.5).cos())).collect();
        let orig = data.clone();
        sp.forward(&mut data);
        sp.inverse(&mut data);
        for (a, b) in data.iter().zip(&orig) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn rejects_non_torus() {
        let chart = GridChart::disk(1.0, 16).unwrap();
        assert!(matches!(SpectralTorus::new(&chart), Err(SpinflowError::UnsupportedDomain { .. })));
    }
}
