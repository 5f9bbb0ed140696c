//! Triangle meshes over a chart lattice and their integration from a form.

use std::collections::VecDeque;
use std::sync::Arc;

use crate::chart::{Domain, GridChart};
use crate::error::{Result, SpinflowError};
use crate::quadrature::pairwise_sum_by;
use crate::spinor::{SpinorField, C64};

use super::weierstrass_form;

/// Floor under relative metric comparisons.
pub const METRIC_FLOOR: f64 = 1e-12;

/// A triangulated surface whose vertices are lattice positions of a chart.
///
/// On the torus the lattice is unwrapped to `(nx + 1) x (ny + 1)` positions
/// so the seam cells are part of the mesh; on the disk the positions are the
/// active nodes.
#[derive(Debug, Clone)]
pub struct SurfaceMesh {
    chart: Arc<GridChart>,
    /// Lattice width of the vertex grid.
    mx: usize,
    my: usize,
    vertex_of: Vec<Option<usize>>,
    lattice: Vec<[usize; 2]>,
    pub positions: Vec<[f64; 3]>,
    pub faces: Vec<[usize; 3]>,
    /// Node the integration started from.
    pub basepoint: usize,
    /// Largest plaquette closure defect divided by the plaquette area.
    pub loop_residual: f64,
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub(crate) fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

impl SurfaceMesh {
    /// Mesh with vertex positions given per lattice position `[i, j]`.
    ///
    /// ```
    /// use std::sync::Arc;
    /// use spinflow::chart::GridChart;
    /// use spinflow::weierstrass::{mesh_area, SurfaceMesh};
    ///
    /// let chart = Arc::new(GridChart::disk(1.0, 33).unwrap());
    /// let flat = SurfaceMesh::from_positions(chart.clone(), |p| [p[0], p[1], 0.0]);
    /// assert!((mesh_area(&flat) - chart.area()).abs() < 1e-12);
    /// ```
    pub fn from_positions(chart: Arc<GridChart>, place: impl Fn([f64; 2]) -> [f64; 3]) -> Self {
        let mut mesh = Self::skeleton(chart.clone());
        mesh.positions = mesh.lattice.iter().map(|&[i, j]| place(chart.coords_ij(i as f64, j as f64))).collect();
        mesh
    }

    fn skeleton(chart: Arc<GridChart>) -> Self {
        let (mx, my) = if chart.is_torus() { (chart.nx() + 1, chart.ny() + 1) } else { (chart.nx(), chart.ny()) };
        let tris = chart.cell_triangles();
        let mut vertex_of = vec![None; mx * my];
        let mut lattice = Vec::new();
        for j in 0..my {
            for i in 0..mx {
                let node = chart.index(i % chart.nx(), j % chart.ny());
                if chart.is_active(node) {
                    vertex_of[j * mx + i] = Some(lattice.len());
                    lattice.push([i, j]);
                }
            }
        }
        let faces = tris
            .iter()
            .map(|t| t.map(|[i, j]| vertex_of[j * mx + i].expect("triangle corners are active")))
            .collect();
        Self {
            chart,
            mx,
            my,
            vertex_of,
            positions: vec![[0.0; 3]; lattice.len()],
            lattice,
            faces,
            basepoint: 0,
            loop_residual: 0.0,
        }
    }

    pub fn chart(&self) -> &GridChart {
        &self.chart
    }

    /// Vertex at lattice position `[i, j]`, if any.
    pub fn vertex_at(&self, i: isize, j: isize) -> Option<usize> {
        if i < 0 || j < 0 || i >= self.mx as isize || j >= self.my as isize {
            return None;
        }
        self.vertex_of[j as usize * self.mx + i as usize]
    }

    pub fn lattice_position(&self, v: usize) -> [usize; 2] {
        self.lattice[v]
    }

    /// Chart node carrying vertex `v`.
    pub fn node_of(&self, v: usize) -> usize {
        let [i, j] = self.lattice[v];
        self.chart.index(i % self.chart.nx(), j % self.chart.ny())
    }

    pub fn vertex_count(&self) -> usize {
        self.positions.len()
    }

    /// Whether all four lattice cells around `v` are fully present.
    pub fn is_interior(&self, v: usize) -> bool {
        let [i, j] = self.lattice[v];
        let (i, j) = (i as isize, j as isize);
        (-1..=1).all(|dj| (-1..=1).all(|di| self.vertex_at(i + di, j + dj).is_some()))
    }

    /// Area of face `f`.
    pub fn face_area(&self, f: usize) -> f64 {
        let [a, b, c] = self.faces[f].map(|v| self.positions[v]);
        0.5 * norm(cross(sub(b, a), sub(c, a)))
    }

    /// Vertices translated so their mean is zero.
    pub fn centered_positions(&self) -> Vec<[f64; 3]> {
        let n = self.positions.len() as f64;
        let mean: [f64; 3] = std::array::from_fn(|c| pairwise_sum_by(self.positions.len(), |v| self.positions[v][c]) / n);
        self.positions.iter().map(|p| sub(*p, mean)).collect()
    }
}

/// `Re (phi_p + phi_q) / 2 * dzbar` for the lattice step `(di, dj)`.
fn increment(phi_p: &[C64; 3], phi_q: &[C64; 3], di: isize, dj: isize, h: f64) -> [f64; 3] {
    // dzbar = dx - i dy
    let dzbar = C64::new(di as f64 * h, -(dj as f64) * h);
    std::array::from_fn(|c| (0.5 * (phi_p[c] + phi_q[c]) * dzbar).re)
}

/// Integrates `Re phi dzbar` with the trapezoid rule along a spanning tree
/// of lattice edges rooted at `basepoint`: first the basepoint's column,
/// then every row from that column, then breadth-first for whatever is
/// left. Path dependence is reported in `loop_residual`.
pub fn integrate_surface(psi: &SpinorField, basepoint: usize) -> Result<SurfaceMesh> {
    let phi = weierstrass_form(psi)?;
    let chart = psi.chart_arc().clone();
    if !matches!(chart.domain(), Domain::Torus { .. } | Domain::Disk { .. }) {
        return Err(SpinflowError::UnsupportedDomain { op: "integrate_surface", domain: chart.domain().name() });
    }
    if basepoint >= chart.len() || !chart.is_active(basepoint) {
        return Err(SpinflowError::Precondition(format!("basepoint {basepoint} is not an active node")));
    }
    if phi.iter().any(|p| p.iter().any(|v| !v.re.is_finite() || !v.im.is_finite())) {
        return Err(SpinflowError::InvalidField("non-finite spinor values".into()));
    }
    let h = chart.spacing();
    let mut mesh = SurfaceMesh::skeleton(chart.clone());
    mesh.basepoint = basepoint;
    let nv = mesh.vertex_count();
    let phi_v: Vec<[C64; 3]> = (0..nv).map(|v| phi[mesh.node_of(v)]).collect();

    let (i0, j0) = chart.ij(basepoint);
    let root = mesh.vertex_at(i0 as isize, j0 as isize).expect("active basepoint is a vertex");
    let mut done = vec![false; nv];
    done[root] = true;
    let mut pos = vec![[0.0; 3]; nv];

    let step = |pos: &mut Vec<[f64; 3]>, done: &mut Vec<bool>, from: usize, to: usize, di: isize, dj: isize| {
        let inc = increment(&phi_v[from], &phi_v[to], di, dj, h);
        pos[to] = [pos[from][0] + inc[0], pos[from][1] + inc[1], pos[from][2] + inc[2]];
        done[to] = true;
    };
    let walk = |pos: &mut Vec<[f64; 3]>, done: &mut Vec<bool>, start: usize, di: isize, dj: isize| {
        let mut cur = start;
        loop {
            let [i, j] = mesh.lattice[cur];
            match mesh.vertex_at(i as isize + di, j as isize + dj) {
                Some(next) if !done[next] => {
                    step(pos, done, cur, next, di, dj);
                    cur = next;
                }
                _ => break,
            }
        }
    };
    walk(&mut pos, &mut done, root, 0, 1);
    walk(&mut pos, &mut done, root, 0, -1);
    let column: Vec<usize> = (0..nv).filter(|&v| done[v] && mesh.lattice[v][0] == i0).collect();
    for v in column {
        walk(&mut pos, &mut done, v, 1, 0);
        walk(&mut pos, &mut done, v, -1, 0);
    }
    let mut queue: VecDeque<usize> = (0..nv).filter(|&v| done[v]).collect();
    while let Some(v) = queue.pop_front() {
        let [i, j] = mesh.lattice[v];
        for (di, dj) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
            if let Some(w) = mesh.vertex_at(i as isize + di, j as isize + dj) {
                if !done[w] {
                    step(&mut pos, &mut done, v, w, di, dj);
                    queue.push_back(w);
                }
            }
        }
    }
    mesh.positions = pos;

    // closure defect around every full lattice cell
    let mut worst: f64 = 0.0;
    for j in 0..mesh.my.saturating_sub(1) {
        for i in 0..mesh.mx.saturating_sub(1) {
            let (i, j) = (i as isize, j as isize);
            let corners = [mesh.vertex_at(i, j), mesh.vertex_at(i + 1, j), mesh.vertex_at(i + 1, j + 1), mesh.vertex_at(i, j + 1)];
            let [Some(a), Some(b), Some(c), Some(d)] = corners else { continue };
            let loop_sum = [
                increment(&phi_v[a], &phi_v[b], 1, 0, h),
                increment(&phi_v[b], &phi_v[c], 0, 1, h),
                increment(&phi_v[c], &phi_v[d], -1, 0, h),
                increment(&phi_v[d], &phi_v[a], 0, -1, h),
            ]
            .iter()
            .fold([0.0; 3], |acc, v| [acc[0] + v[0], acc[1] + v[1], acc[2] + v[2]]);
            worst = worst.max(norm(loop_sum) / (h * h));
        }
    }
    mesh.loop_residual = worst;
    Ok(mesh)
}

/// Largest relative mismatch between squared edge lengths and the metric
/// `|psi|^4 h^2` (endpoint average) over the lattice edges of the mesh.
/// Edges where the metric is below [`METRIC_FLOOR`] are compared in
/// absolute terms.
pub fn induced_metric_residual(mesh: &SurfaceMesh, psi: &SpinorField) -> Result<f64> {
    if !psi.chart().compatible(mesh.chart()) {
        return Err(SpinflowError::Precondition("mesh and field live on different charts".into()));
    }
    let h = mesh.chart().spacing();
    let mut worst: f64 = 0.0;
    for v in 0..mesh.vertex_count() {
        let [i, j] = mesh.lattice[v];
        for (di, dj) in [(1isize, 0isize), (0, 1)] {
            let Some(w) = mesh.vertex_at(i as isize + di, j as isize + dj) else { continue };
            let len2 = dot(sub(mesh.positions[w], mesh.positions[v]), sub(mesh.positions[w], mesh.positions[v]));
            let s = 0.5 * (psi.norm_sqr_at(mesh.node_of(v)) + psi.norm_sqr_at(mesh.node_of(w)));
            let metric = s * s * h * h;
            let gap = (len2 - metric).abs();
            worst = worst.max(if metric < METRIC_FLOOR { gap } else { gap / (metric + METRIC_FLOOR) });
        }
    }
    Ok(worst)
}

/// Sum of the face areas.
pub fn mesh_area(mesh: &SurfaceMesh) -> f64 {
    pairwise_sum_by(mesh.faces.len(), |f| mesh.face_area(f))
}
