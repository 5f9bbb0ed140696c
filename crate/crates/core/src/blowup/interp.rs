//! Bicubic (Catmull-Rom) sampling of a field at arbitrary chart points.

use crate::chart::{Domain, GridChart};
use crate::error::{Result, SpinflowError};
use crate::spinor::{SpinorField, C64, ZERO};

/// Catmull-Rom weights for offsets `-1, 0, 1, 2` at fractional position `t`.
fn weights(t: f64) -> [f64; 4] {
    let t2 = t * t;
    let t3 = t2 * t;
    [
        0.5 * (-t3 + 2.0 * t2 - t),
        0.5 * (3.0 * t3 - 5.0 * t2 + 2.0),
        0.5 * (-3.0 * t3 + 4.0 * t2 + t),
        0.5 * (t3 - t2),
    ]
}

/// Reads field values with the chart's wrap-around rules.
pub struct Sampler<'a> {
    field: &'a SpinorField,
}

impl<'a> Sampler<'a> {
    pub fn new(field: &'a SpinorField) -> Self {
        Self { field }
    }

    fn chart(&self) -> &GridChart {
        self.field.chart()
    }

    /// Node and sign for lattice index `(i, j)`, or `None` off the chart.
    fn resolve(&self, i: isize, j: isize) -> Option<(usize, f64)> {
        let chart = self.chart();
        let (nx, ny) = (chart.nx() as isize, chart.ny() as isize);
        let (mut i, mut j, mut sign) = (i, j, 1.0);
        match chart.domain() {
            Domain::Torus { .. } => {
                let spin = chart.spin_structure().expect("torus charts carry a spin structure");
                if i.div_euclid(nx) % 2 != 0 {
                    sign *= spin.sign_x();
                }
                if j.div_euclid(ny) % 2 != 0 {
                    sign *= spin.sign_y();
                }
                i = i.rem_euclid(nx);
                j = j.rem_euclid(ny);
            }
            Domain::SphereChart => {
                // rows are cell centred; stepping past a pole comes back on
                // the opposite meridian
                if j < 0 {
                    j = -1 - j;
                    i += nx / 2;
                } else if j >= ny {
                    j = 2 * ny - 1 - j;
                    i += nx / 2;
                }
                if j < 0 || j >= ny {
                    return None;
                }
                i = i.rem_euclid(nx);
            }
            Domain::Cylinder { .. } => {
                i = i.rem_euclid(nx);
                j = j.clamp(0, ny - 1);
            }
            Domain::Disk { .. } => {
                if i < 0 || j < 0 || i >= nx || j >= ny {
                    return None;
                }
            }
        }
        let node = chart.index(i as usize, j as usize);
        chart.is_active(node).then_some((node, sign))
    }

    /// All `2n` components at chart point `p`.
    pub fn sample(&self, p: [f64; 2]) -> Result<Vec<C64>> {
        let chart = self.chart();
        let [fi, fj] = chart.lattice_position(p);
        let (i0, j0) = (fi.floor(), fj.floor());
        let (tx, ty) = (fi - i0, fj - j0);
        let (i0, j0) = (i0 as isize, j0 as isize);
        let s = self.field.stride();
        let mut out = vec![ZERO; s];

        let mut nodes = [[None; 4]; 4];
        let mut complete = true;
        for (b, row) in nodes.iter_mut().enumerate() {
            for (a, slot) in row.iter_mut().enumerate() {
                *slot = self.resolve(i0 + a as isize - 1, j0 + b as isize - 1);
                complete &= slot.is_some();
            }
        }
        if complete {
            let (wx, wy) = (weights(tx), weights(ty));
            for (b, row) in nodes.iter().enumerate() {
                for (a, slot) in row.iter().enumerate() {
                    let (node, sign) = slot.expect("checked complete");
                    let w = wx[a] * wy[b] * sign;
                    for (o, v) in out.iter_mut().zip(self.field.node(node)) {
                        *o += v * w;
                    }
                }
            }
            return Ok(out);
        }
        // near a disk rim: bilinear if every cell corner with weight is on
        // the chart, so points on rim nodes and rim edges still resolve
        let cell = [nodes[1][1], nodes[1][2], nodes[2][1], nodes[2][2]];
        let w = [(1.0 - tx) * (1.0 - ty), tx * (1.0 - ty), (1.0 - tx) * ty, tx * ty];
        if cell.iter().zip(w).all(|(c, wk)| c.is_some() || wk == 0.0) {
            for (c, wk) in cell.iter().zip(w) {
                let Some((node, sign)) = c else { continue };
                for (o, v) in out.iter_mut().zip(self.field.node(*node)) {
                    *o += v * (wk * sign);
                }
            }
            return Ok(out);
        }
        Err(SpinflowError::OutOfDomain { x: p[0], y: p[1] })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::SpinStructure;
    use std::f64::consts::PI;
    use std::sync::Arc;

    #[test]
    fn reproduces_nodes_and_quadratics() {
        let chart = Arc::new(GridChart::disk(1.0, 33).unwrap());
        let f = |x: f64, y: f64| C64::new(x * x - 2.0 * x * y + 0.5, y * y);
        let psi = SpinorField::from_fn(chart.clone(), 1, |[x, y]| vec![f(x, y), ZERO]);
        let s = Sampler::new(&psi);
        let node = chart.index(16, 10);
        assert_eq!(s.sample(chart.coords(node)).unwrap()[0], psi.node(node)[0]);
        let v = s.sample([0.123, -0.31]).unwrap()[0];
        assert!((v - f(0.123, -0.31)).norm() < 1e-12);
        assert!(matches!(s.sample([0.99, 0.99]), Err(SpinflowError::OutOfDomain { .. })));
        for k in chart.boundary_nodes() {
            assert_eq!(s.sample(chart.coords(k)).unwrap()[0], psi.node(k)[0]);
        }
    }

    #[test]
    fn antiperiodic_wrap() {
        let chart = Arc::new(GridChart::unit_torus(64, SpinStructure::AntiAnti).unwrap());
        let psi = SpinorField::from_fn(chart, 1, |[x, y]| vec![C64::from_polar(1.0, PI * (x + y)), ZERO]);
        let s = Sampler::new(&psi);
        for p in [[0.995, 0.5], [0.001, 0.999], [1.3, -0.2]] {
            let want = C64::from_polar(1.0, PI * (p[0] + p[1]));
            assert!((s.sample(p).unwrap()[0] - want).norm() < 1e-5);
        }
    }

    #[test]
    fn sphere_pole_crossing() {
        let chart = Arc::new(GridChart::sphere(32).unwrap());
        // z = cos(theta) is smooth across the poles
        let psi = SpinorField::from_fn(chart, 1, |[_, theta]| vec![C64::new(theta.cos(), 0.0), ZERO]);
        let s = Sampler::new(&psi);
        let v = s.sample([1.0, 0.01]).unwrap()[0];
        assert!((v.re - 0.01f64.cos()).abs() < 1e-4);
    }
}
