//! The Dirac-Newton potential `w(x) = sum_y K(x - y) f(y) h^2`.
//!
//! `K(x) = -(1/2 pi) (x_1 sigma_1 + x_2 sigma_2) / |x|^2` is the fundamental
//! solution of `D`. It is odd, so its average over the cell centred on the
//! singularity is zero and the self term drops out.
//!
//! Per block the kernel acts as
//!
//! ```text
//! w_1 = -(h / 2 pi) sum (d_1 + i d_2)/|d|^2 f_2
//! w_2 = -(h / 2 pi) sum (i d_2 - d_1)/|d|^2 f_1
//! ```
//!
//! with `d` the integer lattice offset. The accelerated path evaluates these
//! two scalar convolutions with zero-padded FFTs.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::chart::{Domain, GridChart, NodeKind};
use crate::clifford::{apply, mat_add, mat_scale, CliffordRep, Mat2};
use crate::error::{Result, SpinflowError};
use crate::fft2::Fft2;
use crate::spinor::{SpinorField, C64, ZERO};

use super::spectral::{dirac_symbol, SpectralTorus};

/// Matrix-valued fundamental solution of the flat Dirac operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenKernel {
    /// Offsets shorter than half this length evaluate to the cell average, zero.
    pub regularization_radius: f64,
}

impl GreenKernel {
    /// Regularized over one cell of side `h`.
    pub fn for_spacing(h: f64) -> Self {
        Self { regularization_radius: h }
    }

    pub fn eval(&self, x: [f64; 2]) -> Mat2 {
        let r2 = x[0] * x[0] + x[1] * x[1];
        if r2.sqrt() < 0.5 * self.regularization_radius {
            return [[ZERO; 2]; 2];
        }
        let rep = CliffordRep::standard();
        let m = mat_add(&mat_scale(&rep.sigma1, C64::new(x[0], 0.0)), &mat_scale(&rep.sigma2, C64::new(x[1], 0.0)));
        mat_scale(&m, C64::new(-1.0 / (2.0 * PI * r2), 0.0))
    }
}

fn check_support(f: &SpinorField) -> Result<()> {
    let chart = f.chart();
    let scale = f.values().iter().fold(0.0f64, |m, v| m.max(v.norm()));
    if scale == 0.0 {
        return Ok(());
    }
    for k in chart.boundary_nodes() {
        if f.node(k).iter().any(|v| v.norm() > 1e-14 * scale) {
            let [x, y] = chart.coords(k);
            return Err(SpinflowError::Precondition(format!(
                "source does not vanish on the boundary ring (node at ({x:.4}, {y:.4}))"
            )));
        }
    }
    Ok(())
}

/// Dirac-Newton potential of `f`.
///
/// On the torus this is the spectral inverse of `D` (modes in the kernel of
/// `D`, present only for the periodic-periodic structure, are dropped). On the
/// disk `f` must vanish on the boundary nodes.
pub fn green_convolve(f: &SpinorField) -> Result<SpinorField> {
    f.validate()?;
    match f.chart().domain() {
        Domain::Torus { .. } => Ok(SpectralTorus::new(f.chart())?.dirac_inverse(f)),
        Domain::Disk { .. } => {
            check_support(f)?;
            disk_fft(f)
        }
        d => Err(SpinflowError::UnsupportedDomain { op: "green_convolve", domain: d.name() }),
    }
}

fn disk_fft(f: &SpinorField) -> Result<SpinorField> {
    let chart = f.chart();
    let n = chart.nx();
    let h = chart.spacing();
    let p = 2 * n;
    let fft = Fft2::new(p, p);
    let mut k_plus = vec![ZERO; p * p];
    let mut k_minus = vec![ZERO; p * p];
    let span = n as isize - 1;
    for dj in -span..=span {
        for di in -span..=span {
            if di == 0 && dj == 0 {
                continue;
            }
            let (d1, d2) = (di as f64, dj as f64);
            let r2 = d1 * d1 + d2 * d2;
            let slot = dj.rem_euclid(p as isize) as usize * p + di.rem_euclid(p as isize) as usize;
            k_plus[slot] = C64::new(d1, d2) / r2;
            k_minus[slot] = C64::new(-d1, d2) / r2;
        }
    }
    fft.forward(&mut k_plus);
    fft.forward(&mut k_minus);

    let s = f.stride();
    let scale = -h / (2.0 * PI);
    let mut out = vec![ZERO; f.values().len()];
    let padded = |c: usize| {
        let mut buf = vec![ZERO; p * p];
        for j in 0..n {
            for i in 0..n {
                let k = chart.index(i, j);
                buf[j * p + i] = f.values()[k * s + c];
            }
        }
        buf
    };
    for b in 0..f.n() {
        let w1 = fft.convolve(&padded(2 * b + 1), &k_plus);
        let w2 = fft.convolve(&padded(2 * b), &k_minus);
        for k in chart.active_nodes() {
            let (i, j) = chart.ij(k);
            out[k * s + 2 * b] = w1[j * p + i] * scale;
            out[k * s + 2 * b + 1] = w2[j * p + i] * scale;
        }
    }
    SpinorField::from_values(f.chart_arc().clone(), f.n(), out)
}

/// Reference implementation by direct `O(N^2)` summation.
pub fn green_convolve_direct(f: &SpinorField) -> Result<SpinorField> {
    f.validate()?;
    match f.chart().domain() {
        Domain::Torus { .. } => torus_direct(f),
        Domain::Disk { .. } => {
            check_support(f)?;
            disk_direct(f)
        }
        d => Err(SpinflowError::UnsupportedDomain { op: "green_convolve_direct", domain: d.name() }),
    }
}

fn disk_direct(f: &SpinorField) -> Result<SpinorField> {
    let chart = f.chart();
    let h = chart.spacing();
    let kernel = GreenKernel::for_spacing(h);
    let sources: Vec<usize> = chart.active_nodes().filter(|&k| f.node(k).iter().any(|v| *v != ZERO)).collect();
    let s = f.stride();
    let n = f.n();
    let mut out = vec![ZERO; f.values().len()];
    out.par_chunks_mut(s).enumerate().for_each(|(target, slot)| {
        if chart.kind(target) == NodeKind::Outside {
            return;
        }
        let xt = chart.coords(target);
        for &src in &sources {
            let xs = chart.coords(src);
            let m = kernel.eval([xt[0] - xs[0], xt[1] - xs[1]]);
            for b in 0..n {
                let [a, c] = apply(&m, f.block(src, b));
                slot[2 * b] += a * (h * h);
                slot[2 * b + 1] += c * (h * h);
            }
        }
    });
    SpinorField::from_values(f.chart_arc().clone(), n, out)
}

/// `exp(2 pi i (m + shift) d / n)`: the lattice basis function of mode `m`.
/// The Nyquist mode carries a zero derivative symbol but still oscillates.
fn lattice_phase(m: usize, n: usize, shift: f64, d: usize) -> C64 {
    C64::from_polar(1.0, 2.0 * PI * (m as f64 + shift) * d as f64 / n as f64)
}

/// Periodized kernel `g(d) = (1/N) sum_k S(k) e^{i k d}` tabulated on
/// nonnegative lattice offsets by explicit (slow) DFT sums.
fn torus_kernel_table(chart: &GridChart) -> Result<[Vec<C64>; 2]> {
    let sp = SpectralTorus::new(chart)?;
    let (nx, ny) = (chart.nx(), chart.ny());
    let spin = chart.spin_structure().expect("torus charts carry a spin structure");
    let sx = if spin.sign_x() < 0.0 { 0.5 } else { 0.0 };
    let sy = if spin.sign_y() < 0.0 { 0.5 } else { 0.0 };
    let (kx, ky) = (sp.kx(), sp.ky());
    let norm = 1.0 / (nx * ny) as f64;
    let mut tables = [vec![ZERO; nx * ny], vec![ZERO; nx * ny]];
    for (which, table) in tables.iter_mut().enumerate() {
        let sym = |i: usize, j: usize| {
            let k2 = kx[i] * kx[i] + ky[j] * ky[j];
            if k2 == 0.0 {
                return ZERO;
            }
            let m = dirac_symbol(kx[i], ky[j]);
            if which == 0 { m[0][1] / k2 } else { m[1][0] / k2 }
        };
        // partial sums over ky for every (mode_x, dy)
        let mut partial = vec![ZERO; nx * ny];
        for mi in 0..nx {
            for dy in 0..ny {
                let mut acc = ZERO;
                for mj in 0..ny {
                    acc += sym(mi, mj) * lattice_phase(mj, ny, sy, dy);
                }
                partial[mi * ny + dy] = acc;
            }
        }
        for dy in 0..ny {
            for dx in 0..nx {
                let mut acc = ZERO;
                for mi in 0..nx {
                    acc += partial[mi * ny + dy] * lattice_phase(mi, nx, sx, dx);
                }
                table[dy * nx + dx] = acc * norm;
            }
        }
    }
    Ok(tables)
}

fn torus_direct(f: &SpinorField) -> Result<SpinorField> {
    let chart = f.chart();
    let spin = chart.spin_structure().expect("torus charts carry a spin structure");
    let (nx, ny) = (chart.nx() as isize, chart.ny() as isize);
    let [g_plus, g_minus] = torus_kernel_table(chart)?;
    let lookup = |table: &[C64], dx: isize, dy: isize| {
        let mut sign = 1.0;
        let (mut dx, mut dy) = (dx, dy);
        if dx < 0 {
            dx += nx;
            sign *= spin.sign_x();
        }
        if dy < 0 {
            dy += ny;
            sign *= spin.sign_y();
        }
        table[(dy * nx + dx) as usize] * sign
    };
    let s = f.stride();
    let n = f.n();
    let mut out = vec![ZERO; f.values().len()];
    out.par_chunks_mut(s).enumerate().for_each(|(target, slot)| {
        let (ti, tj) = chart.ij(target);
        for src in 0..chart.len() {
            let (si, sj) = chart.ij(src);
            let (dx, dy) = (ti as isize - si as isize, tj as isize - sj as isize);
            let gp = lookup(&g_plus, dx, dy);
            let gm = lookup(&g_minus, dx, dy);
            for b in 0..n {
                let [a, c] = f.block(src, b);
                slot[2 * b] += gp * c;
                slot[2 * b + 1] += gm * a;
            }
        }
    });
    SpinorField::from_values(f.chart_arc().clone(), n, out)
}
