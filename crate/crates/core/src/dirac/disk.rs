//! Boundary-value problem `D psi = f` in the disk with `psi = phi` on the
//! boundary nodes.
//!
//! The discrete system stacks three row types:
//!
//! * centered Dirac rows `D_c psi = f` on inside nodes,
//! * trace rows `psi / h = phi / h` on boundary nodes,
//! * consistency rows `h L psi = -h D_c f` on inside nodes, `L` the five-point
//!   Laplacian.
//!
//! Every solution of `D psi = f` satisfies the last rows because
//! `D^2 = -Laplacian`. Without them the centered Dirac stencil decouples the
//! lattice into parity classes and the least-squares problem has spurious
//! oscillating null vectors. The weights make all three row types scale like
//! `1/h`. The system is overdetermined and is solved in the least-squares
//! sense by conjugate gradients on the normal equations (CGNR).

use crate::chart::{Domain, GridChart, NodeKind};
use crate::error::{Result, SpinflowError};
use crate::quadrature::pairwise_sum_by;
use crate::spinor::{SpinorField, C64, I, ZERO};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskSolveOptions {
    /// Stop when the normal-equation residual falls below `tol` relative to
    /// `||A^H b||`.
    pub tol: f64,
    /// Iteration cap; `None` means ten times the number of unknowns.
    pub max_iter: Option<usize>,
}

impl Default for DiskSolveOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: None }
    }
}

#[derive(Debug, Clone)]
pub struct DiskSolution {
    pub field: SpinorField,
    /// Final relative normal-equation residual.
    pub residual: f64,
    /// Final relative residual of the stacked system itself.
    pub system_residual: f64,
    pub iterations: usize,
    pub history: Vec<f64>,
}

struct System<'a> {
    chart: &'a GridChart,
    n: usize,
    h: f64,
}

impl System<'_> {
    fn s(&self) -> usize {
        2 * self.n
    }

    fn neighbours(&self, node: usize) -> [usize; 4] {
        let (i, j) = self.chart.ij(node);
        [
            self.chart.index(i + 1, j),
            self.chart.index(i - 1, j),
            self.chart.index(i, j + 1),
            self.chart.index(i, j - 1),
        ]
    }

    /// `x` has one entry per field value; `out` has twice that: first the
    /// Dirac and trace rows, then the consistency rows.
    fn apply(&self, x: &[C64], out: &mut [C64]) {
        let s = self.s();
        let len = x.len();
        let inv2h = 1.0 / (2.0 * self.h);
        let lap_w = 1.0 / self.h;
        out.fill(ZERO);
        for node in 0..self.chart.len() {
            match self.chart.kind(node) {
                NodeKind::Outside => {}
                NodeKind::Boundary => {
                    for c in 0..s {
                        out[node * s + c] = x[node * s + c] / self.h;
                    }
                }
                NodeKind::Inside => {
                    let [e, w, nn, so] = self.neighbours(node);
                    for b in 0..self.n {
                        let (ca, cb) = (2 * b, 2 * b + 1);
                        let dxa = (x[e * s + ca] - x[w * s + ca]) * inv2h;
                        let dya = (x[nn * s + ca] - x[so * s + ca]) * inv2h;
                        let dxb = (x[e * s + cb] - x[w * s + cb]) * inv2h;
                        let dyb = (x[nn * s + cb] - x[so * s + cb]) * inv2h;
                        out[node * s + ca] = dxb + I * dyb;
                        out[node * s + cb] = -dxa + I * dya;
                    }
                    for c in 0..s {
                        let sum = x[e * s + c] + x[w * s + c] + x[nn * s + c] + x[so * s + c];
                        out[len + node * s + c] = (sum - x[node * s + c] * 4.0) * lap_w;
                    }
                }
            }
        }
    }

    fn apply_adjoint(&self, r: &[C64], out: &mut [C64]) {
        let s = self.s();
        let len = out.len();
        let inv2h = 1.0 / (2.0 * self.h);
        let lap_w = 1.0 / self.h;
        out.fill(ZERO);
        for node in 0..self.chart.len() {
            match self.chart.kind(node) {
                NodeKind::Outside => {}
                NodeKind::Boundary => {
                    for c in 0..s {
                        out[node * s + c] += r[node * s + c] / self.h;
                    }
                }
                NodeKind::Inside => {
                    let [e, w, nn, so] = self.neighbours(node);
                    for b in 0..self.n {
                        let (ca, cb) = (2 * b, 2 * b + 1);
                        let ra = r[node * s + ca] * inv2h;
                        let rb = r[node * s + cb] * inv2h;
                        out[e * s + cb] += ra;
                        out[w * s + cb] -= ra;
                        out[nn * s + cb] -= I * ra;
                        out[so * s + cb] += I * ra;
                        out[e * s + ca] -= rb;
                        out[w * s + ca] += rb;
                        out[nn * s + ca] -= I * rb;
                        out[so * s + ca] += I * rb;
                    }
                    for c in 0..s {
                        let q = r[len + node * s + c] * lap_w;
                        out[node * s + c] -= q * 4.0;
                        for nb in [e, w, nn, so] {
                            out[nb * s + c] += q;
                        }
                    }
                }
            }
        }
    }
}

fn norm_sqr(v: &[C64]) -> f64 {
    pairwise_sum_by(v.len(), |k| v[k].norm_sqr())
}

/// Solve `D psi = f` inside the disk with `psi = trace` on the boundary
/// nodes. Values of `trace` away from the boundary are ignored, as are values
/// of `f` on the boundary.
pub fn disk_solve(f: &SpinorField, trace: &SpinorField, opts: DiskSolveOptions) -> Result<DiskSolution> {
    let chart = f.chart();
    if !matches!(chart.domain(), Domain::Disk { .. }) {
        return Err(SpinflowError::UnsupportedDomain { op: "disk_solve", domain: chart.domain().name() });
    }
    if !f.same_shape(trace) {
        return Err(SpinflowError::Precondition("source and boundary trace live on different charts".into()));
    }
    f.validate()?;
    trace.validate()?;
    let sys = System { chart, n: f.n(), h: chart.spacing() };
    let s = sys.s();
    let len = f.values().len();

    // D_c f at inside nodes, for the consistency rows
    let df = super::fd::dirac(f, super::fd::FdStencil::Centered)?;
    let mut rhs = vec![ZERO; 2 * len];
    for node in 0..chart.len() {
        for c in 0..s {
            let k = node * s + c;
            match chart.kind(node) {
                NodeKind::Inside => {
                    rhs[k] = f.values()[k];
                    rhs[len + k] = -df.values()[k] * sys.h;
                }
                NodeKind::Boundary => rhs[k] = trace.values()[k] / sys.h,
                NodeKind::Outside => {}
            }
        }
    }

    let mut x = vec![ZERO; len];
    for node in chart.boundary_nodes() {
        for c in 0..s {
            x[node * s + c] = trace.values()[node * s + c];
        }
    }
    let mut ax = vec![ZERO; 2 * len];
    sys.apply(&x, &mut ax);
    let mut r: Vec<C64> = rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let mut z = vec![ZERO; len];
    sys.apply_adjoint(&r, &mut z);
    let mut p = z.clone();
    let mut zz = norm_sqr(&z);

    let mut atb = vec![ZERO; len];
    sys.apply_adjoint(&rhs, &mut atb);
    let scale = norm_sqr(&atb).sqrt().max(f64::MIN_POSITIVE);
    let rhs_norm = norm_sqr(&rhs).sqrt().max(f64::MIN_POSITIVE);
    let unknowns = chart.active_count() * s;
    let max_iter = opts.max_iter.unwrap_or(10 * unknowns);

    let mut history = vec![zz.sqrt() / scale];
    let mut w = vec![ZERO; 2 * len];
    let mut iterations = 0;
    while zz.sqrt() / scale > opts.tol {
        if iterations >= max_iter {
            return Err(SpinflowError::NonConvergence { iterations, last: zz.sqrt() / scale, history });
        }
        sys.apply(&p, &mut w);
        let ww = norm_sqr(&w);
        if ww == 0.0 {
            break;
        }
        let alpha = zz / ww;
        for k in 0..len {
            x[k] += p[k] * alpha;
        }
        for k in 0..2 * len {
            r[k] -= w[k] * alpha;
        }
        sys.apply_adjoint(&r, &mut z);
        let zz_new = norm_sqr(&z);
        let beta = zz_new / zz;
        for k in 0..len {
            p[k] = z[k] + p[k] * beta;
        }
        zz = zz_new;
        iterations += 1;
        history.push(zz.sqrt() / scale);
    }
    let field = SpinorField::from_values(f.chart_arc().clone(), f.n(), x)?;
    Ok(DiskSolution {
        field,
        residual: zz.sqrt() / scale,
        system_residual: norm_sqr(&r).sqrt() / rhs_norm,
        iterations,
        history,
    })
}

/// Boundary nodes of a disk chart ordered by polar angle, with ties broken by
/// radius and then node index.
pub fn boundary_cycle(chart: &GridChart) -> Vec<usize> {
    let mut nodes = chart.boundary_nodes();
    nodes.sort_by(|&a, &b| {
        let [xa, ya] = chart.coords(a);
        let [xb, yb] = chart.coords(b);
        ya.atan2(xa)
            .total_cmp(&yb.atan2(xb))
            .then(xa.hypot(ya).total_cmp(&xb.hypot(yb)))
            .then(a.cmp(&b))
    });
    nodes
}

/// Discrete `W^{1,p}` norm of a boundary trace: the `L^p` norm of `phi` plus
/// that of its arclength derivative, both along the boundary cycle with
/// centered differences and arclength weights.
pub fn trace_norm(trace: &SpinorField, p: f64) -> Result<f64> {
    let chart = trace.chart();
    if !matches!(chart.domain(), Domain::Disk { .. }) {
        return Err(SpinflowError::UnsupportedDomain { op: "trace_norm", domain: chart.domain().name() });
    }
    let cycle = boundary_cycle(chart);
    let m = cycle.len();
    let pos = |k: usize| chart.coords(cycle[k % m]);
    let seg = |a: usize, b: usize| {
        let (pa, pb) = (pos(a), pos(b));
        (pa[0] - pb[0]).hypot(pa[1] - pb[1])
    };
    let ds: Vec<f64> = (0..m).map(|k| 0.5 * (seg(k + m - 1, k) + seg(k, k + 1))).collect();
    let value: Vec<f64> = (0..m).map(|k| trace.norm_sqr_at(cycle[k]).sqrt()).collect();
    let deriv: Vec<f64> = (0..m)
        .map(|k| {
            let (prev, next) = (cycle[(k + m - 1) % m], cycle[(k + 1) % m]);
            let span = 2.0 * ds[k];
            let d: f64 = trace
                .node(next)
                .iter()
                .zip(trace.node(prev))
                .map(|(a, b)| ((a - b) / span).norm_sqr())
                .sum();
            d.sqrt()
        })
        .collect();
    let lp = |vals: &[f64]| {
        if p.is_infinite() {
            vals.iter().cloned().fold(0.0, f64::max)
        } else {
            pairwise_sum_by(m, |k| ds[k] * vals[k].powf(p)).powf(1.0 / p)
        }
    };
    Ok(lp(&value) + lp(&deriv))
}
