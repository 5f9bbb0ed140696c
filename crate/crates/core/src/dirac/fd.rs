//! Finite-difference derivatives on the lattice.
//!
//! Interior nodes use centered differences. On the disk, a node whose
//! neighbour on one side is missing falls back to a one-sided second-order
//! stencil; first order is used only when fewer than three nodes are
//! available along that line.

use rayon::prelude::*;

use crate::chart::{Domain, GridChart};
use crate::error::{Result, SpinflowError};
use crate::spinor::{SpinorField, C64, ZERO};

/// Stencil family for first derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FdStencil {
    /// Second-order centered differences with one-sided closure.
    #[default]
    Centered,
    /// First-order forward differences. Used as a deliberately inaccurate
    /// stencil in self-checks.
    Forward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Axis {
    X,
    Y,
}

/// Lattice neighbourhood lookup shared by all stencils.
pub(crate) struct Lattice<'a> {
    chart: &'a GridChart,
    wrap_x: Option<f64>,
    wrap_y: Option<f64>,
}

impl<'a> Lattice<'a> {
    pub(crate) fn new(chart: &'a GridChart, op: &'static str) -> Result<Self> {
        let (wrap_x, wrap_y) = match chart.domain() {
            Domain::Torus { .. } => {
                let spin = chart.spin_structure().expect("torus charts carry a spin structure");
                (Some(spin.sign_x()), Some(spin.sign_y()))
            }
            Domain::Cylinder { .. } => (Some(1.0), None),
            Domain::Disk { .. } => (None, None),
            Domain::SphereChart => {
                return Err(SpinflowError::UnsupportedDomain { op, domain: chart.domain().name() })
            }
        };
        Ok(Self { chart, wrap_x, wrap_y })
    }

    /// Value of component `c` at `(i + di, j + dj)`, or `None` when that node
    /// does not exist. Wrapping across a torus seam applies the spin sign.
    #[inline]
    fn sample(&self, comp: &dyn Fn(usize) -> C64, i: usize, j: usize, di: isize, dj: isize) -> Option<C64> {
        let (nx, ny) = (self.chart.nx() as isize, self.chart.ny() as isize);
        let mut ii = i as isize + di;
        let mut jj = j as isize + dj;
        let mut sign = 1.0;
        if ii < 0 || ii >= nx {
            let s = self.wrap_x?;
            let turns = ii.div_euclid(nx);
            ii = ii.rem_euclid(nx);
            if turns % 2 != 0 {
                sign *= s;
            }
        }
        if jj < 0 || jj >= ny {
            let s = self.wrap_y?;
            let turns = jj.div_euclid(ny);
            jj = jj.rem_euclid(ny);
            if turns % 2 != 0 {
                sign *= s;
            }
        }
        let node = self.chart.index(ii as usize, jj as usize);
        if !self.chart.is_active(node) {
            return None;
        }
        Some(comp(node) * sign)
    }

    fn step(&self, axis: Axis) -> f64 {
        let (hx, hy) = self.chart.spacing_xy();
        match axis {
            Axis::X => hx,
            Axis::Y => hy,
        }
    }

    fn offsets(axis: Axis, k: isize) -> (isize, isize) {
        match axis {
            Axis::X => (k, 0),
            Axis::Y => (0, k),
        }
    }

    pub(crate) fn first(&self, comp: &dyn Fn(usize) -> C64, node: usize, axis: Axis, stencil: FdStencil) -> C64 {
        let (i, j) = self.chart.ij(node);
        let h = self.step(axis);
        let at = |k: isize| {
            let (di, dj) = Self::offsets(axis, k);
            self.sample(comp, i, j, di, dj)
        };
        let f0 = comp(node);
        if stencil == FdStencil::Forward {
            return match (at(1), at(-1)) {
                (Some(p), _) => (p - f0) / h,
                (None, Some(m)) => (f0 - m) / h,
                _ => ZERO,
            };
        }
        match (at(-1), at(1)) {
            (Some(m), Some(p)) => (p - m) / (2.0 * h),
            (None, Some(p1)) => match at(2) {
                Some(p2) => (-3.0 * f0 + 4.0 * p1 - p2) / (2.0 * h),
                None => (p1 - f0) / h,
            },
            (Some(m1), None) => match at(-2) {
                Some(m2) => (3.0 * f0 - 4.0 * m1 + m2) / (2.0 * h),
                None => (f0 - m1) / h,
            },
            (None, None) => ZERO,
        }
    }

    pub(crate) fn second(&self, comp: &dyn Fn(usize) -> C64, node: usize, axis: Axis) -> C64 {
        let (i, j) = self.chart.ij(node);
        let h = self.step(axis);
        let h2 = h * h;
        let at = |k: isize| {
            let (di, dj) = Self::offsets(axis, k);
            self.sample(comp, i, j, di, dj)
        };
        let f0 = comp(node);
        if let (Some(m), Some(p)) = (at(-1), at(1)) {
            return (p - 2.0 * f0 + m) / h2;
        }
        for dir in [1isize, -1] {
            match (at(dir), at(2 * dir), at(3 * dir)) {
                (Some(a), Some(b), Some(c)) => return (2.0 * f0 - 5.0 * a + 4.0 * b - c) / h2,
                (Some(a), Some(b), None) => return (f0 - 2.0 * a + b) / h2,
                _ => {}
            }
        }
        ZERO
    }
}

fn component_map(
    psi: &SpinorField,
    op: &'static str,
    f: impl Fn(&Lattice<'_>, &dyn Fn(usize) -> C64, usize) -> C64 + Sync,
) -> Result<SpinorField> {
    let chart = psi.chart();
    let lattice = Lattice::new(chart, op)?;
    let s = psi.stride();
    let values = psi.values();
    let mut out = vec![ZERO; values.len()];
    out.par_chunks_mut(s).enumerate().for_each(|(node, slot)| {
        if !chart.is_active(node) {
            return;
        }
        for (c, v) in slot.iter_mut().enumerate() {
            let comp = |k: usize| values[k * s + c];
            *v = f(&lattice, &comp, node);
        }
    });
    SpinorField::from_values(psi.chart_arc().clone(), psi.n(), out)
}

/// Partial derivatives `(d_x psi, d_y psi)` of every component.
pub fn gradient(psi: &SpinorField, stencil: FdStencil) -> Result<(SpinorField, SpinorField)> {
    let dx = component_map(psi, "finite-difference gradient", |l, c, k| l.first(c, k, Axis::X, stencil))?;
    let dy = component_map(psi, "finite-difference gradient", |l, c, k| l.first(c, k, Axis::Y, stencil))?;
    Ok((dx, dy))
}

/// `D psi` with the given stencil: per block `(a, b) -> (b_x + i b_y, -a_x + i a_y)`.
pub fn dirac(psi: &SpinorField, stencil: FdStencil) -> Result<SpinorField> {
    let (dx, dy) = gradient(psi, stencil)?;
    Ok(combine_dirac(&dx, &dy))
}

pub(crate) fn combine_dirac(dx: &SpinorField, dy: &SpinorField) -> SpinorField {
    let mut out = dx.clone();
    let i = crate::spinor::I;
    for k in 0..dx.chart().len() {
        for b in 0..dx.n() {
            let [ax, bx] = dx.block(k, b);
            let [ay, by] = dy.block(k, b);
            out.set_block(k, b, [bx + i * by, -ax + i * ay]);
        }
    }
    out
}

/// Five-point Laplacian, with one-sided closure at disk boundaries.
pub fn laplace(psi: &SpinorField) -> Result<SpinorField> {
    component_map(psi, "finite-difference Laplacian", |l, c, k| l.second(c, k, Axis::X) + l.second(c, k, Axis::Y))
}
