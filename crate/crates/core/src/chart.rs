//! Discretized domains.
//!
//! A [`GridChart`] is a uniform `nx x ny` lattice laid over one of the flat
//! domains the toolkit works on. Nodes are stored row-major with `x` fastest:
//! node `(i, j)` has index `j * nx + i`.
//!
//! | domain        | node `(i, j)` sits at                    | weight            |
//! |---------------|------------------------------------------|-------------------|
//! | torus         | `(i h, j h)`                             | `h^2`             |
//! | disk          | `(-R + i h, -R + j h)`, `h = 2R/(n-1)`   | lumped cell area  |
//! | sphere chart  | `(phi_i, theta_j)` longitude, colatitude | `sin(theta) h^2`  |
//! | cylinder      | `(theta_i, t_j)`                         | `h_theta h_t`     |
//!
//! Disk weights are a third of the area of the lattice triangles touching the
//! node (see [`GridChart::cell_triangles`]): `h^2` inside, less on the rim.
//! Integrals over the disk are then exact for piecewise linear data on the
//! same triangulation that surface meshes use.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SpinflowError};

/// Periodicity of spinors along each torus cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpinStructure {
    PeriodicPeriodic,
    PeriodicAnti,
    AntiPeriodic,
    AntiAnti,
}

impl SpinStructure {
    pub const ALL: [SpinStructure; 4] = [
        SpinStructure::PeriodicPeriodic,
        SpinStructure::PeriodicAnti,
        SpinStructure::AntiPeriodic,
        SpinStructure::AntiAnti,
    ];

    /// Sign picked up by a spinor when it wraps once around the x cycle.
    pub fn sign_x(self) -> f64 {
        match self {
            SpinStructure::AntiPeriodic | SpinStructure::AntiAnti => -1.0,
            _ => 1.0,
        }
    }

    /// Sign picked up when wrapping once around the y cycle.
    pub fn sign_y(self) -> f64 {
        match self {
            SpinStructure::PeriodicAnti | SpinStructure::AntiAnti => -1.0,
            _ => 1.0,
        }
    }

    pub fn tag(self) -> u8 {
        match self {
            SpinStructure::PeriodicPeriodic => 0,
            SpinStructure::PeriodicAnti => 1,
            SpinStructure::AntiPeriodic => 2,
            SpinStructure::AntiAnti => 3,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        Self::ALL.get(tag as usize).copied()
    }

    pub fn short_name(self) -> &'static str {
        match self {
            SpinStructure::PeriodicPeriodic => "pp",
            SpinStructure::PeriodicAnti => "pa",
            SpinStructure::AntiPeriodic => "ap",
            SpinStructure::AntiAnti => "aa",
        }
    }
}

/// The continuous domain underlying a chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Domain {
    Torus { period_x: f64, period_y: f64 },
    Disk { radius: f64 },
    /// Longitude/colatitude grid on the unit sphere; colatitude is measured
    /// from the north pole `N`.
    SphereChart,
    /// `[t_min, t_max] x S^1`, the conformal cylinder over an annulus.
    Cylinder { t_min: f64, t_max: f64 },
}

impl Domain {
    pub fn name(&self) -> &'static str {
        match self {
            Domain::Torus { .. } => "torus",
            Domain::Disk { .. } => "disk",
            Domain::SphereChart => "sphere",
            Domain::Cylinder { .. } => "cylinder",
        }
    }
}

/// Role of a node in the chart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Inside,
    Boundary,
    Outside,
}

/// A uniform lattice over a [`Domain`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridChart {
    domain: Domain,
    nx: usize,
    ny: usize,
    hx: f64,
    hy: f64,
    spin: Option<SpinStructure>,
    mask: Vec<NodeKind>,
    /// Per-node weights where they are not uniform (disk only).
    lumped: Vec<f64>,
}

const SPACING_RTOL: f64 = 1e-9;

impl GridChart {
    /// A flat torus `[0, period_x) x [0, period_y)`; the spacing must agree in
    /// both directions.
    pub fn torus(
        period_x: f64,
        period_y: f64,
        nx: usize,
        ny: usize,
        spin: SpinStructure,
    ) -> Result<Self> {
        check_counts(nx, ny)?;
        if !(period_x > 0.0 && period_y > 0.0 && period_x.is_finite() && period_y.is_finite()) {
            return Err(SpinflowError::InvalidChart(
                "torus periods must be positive and finite".into(),
            ));
        }
        let hx = period_x / nx as f64;
        let hy = period_y / ny as f64;
        if ((hx - hy) / hx).abs() > SPACING_RTOL {
            return Err(SpinflowError::InvalidChart(format!(
                "non-uniform torus spacing: {hx} along x vs {hy} along y"
            )));
        }
        Ok(Self {
            domain: Domain::Torus { period_x, period_y },
            nx,
            ny,
            hx,
            hy: hx,
            spin: Some(spin),
            mask: vec![NodeKind::Inside; nx * ny],
            lumped: Vec::new(),
        })
    }

    /// Unit-period torus with `n x n` nodes.
    pub fn unit_torus(n: usize, spin: SpinStructure) -> Result<Self> {
        Self::torus(1.0, 1.0, n, n, spin)
    }

    /// The disk of the given radius centred at the origin, covered by an
    /// `n x n` lattice spanning `[-R, R]^2`.
    ///
    /// Nodes with `|x| <= R` are active, except isolated tips of the lattice
    /// disk that have too few neighbours along an axis for a one-sided
    /// stencil. An active node with a missing 4-neighbour is a boundary node,
    /// the rest are inside nodes.
    pub fn disk(radius: f64, n: usize) -> Result<Self> {
        check_counts(n, n)?;
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(SpinflowError::InvalidChart(
                "disk radius must be positive and finite".into(),
            ));
        }
        let h = 2.0 * radius / (n - 1) as f64;
        let r2 = radius * radius * (1.0 + 1e-12);
        let mut active = vec![false; n * n];
        for j in 0..n {
            for i in 0..n {
                let x = -radius + i as f64 * h;
                let y = -radius + j as f64 * h;
                active[j * n + i] = x * x + y * y <= r2;
            }
        }
        // Drop lattice points that cannot carry a second-order stencil along
        // both axes: each kept node needs both neighbours on a line, or two
        // consecutive ones on one side. Repeat until nothing changes.
        let at = |active: &[bool], i: isize, j: isize| -> bool {
            i >= 0 && j >= 0 && i < n as isize && j < n as isize && active[j as usize * n + i as usize]
        };
        loop {
            let mut changed = false;
            for j in 0..n as isize {
                for i in 0..n as isize {
                    if !at(&active, i, j) {
                        continue;
                    }
                    let line_ok = |di: isize, dj: isize| {
                        let p1 = at(&active, i + di, j + dj);
                        let m1 = at(&active, i - di, j - dj);
                        (p1 && m1) || (p1 && at(&active, i + 2 * di, j + 2 * dj)) || (m1 && at(&active, i - 2 * di, j - 2 * dj))
                    };
                    if !(line_ok(1, 0) && line_ok(0, 1)) {
                        active[j as usize * n + i as usize] = false;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let mut mask = vec![NodeKind::Outside; n * n];
        for j in 0..n as isize {
            for i in 0..n as isize {
                if !at(&active, i, j) {
                    continue;
                }
                let full = at(&active, i - 1, j) && at(&active, i + 1, j) && at(&active, i, j - 1) && at(&active, i, j + 1);
                mask[j as usize * n + i as usize] =
                    if full { NodeKind::Inside } else { NodeKind::Boundary };
            }
        }
        let mut chart = Self {
            domain: Domain::Disk { radius },
            nx: n,
            ny: n,
            hx: h,
            hy: h,
            spin: None,
            mask,
            lumped: Vec::new(),
        };
        let mut lumped = vec![0.0; n * n];
        for tri in chart.cell_triangles() {
            for [i, j] in tri {
                lumped[j * n + i] += h * h / 6.0;
            }
        }
        chart.lumped = lumped;
        Ok(chart)
    }

    /// Longitude/colatitude grid on the unit sphere with `2 * n_theta`
    /// longitudes and `n_theta` cell-centred colatitude rows.
    pub fn sphere(n_theta: usize) -> Result<Self> {
        let nx = 2 * n_theta;
        check_counts(nx, n_theta)?;
        let h = PI / n_theta as f64;
        Ok(Self {
            domain: Domain::SphereChart,
            nx,
            ny: n_theta,
            hx: h,
            hy: h,
            spin: None,
            mask: vec![NodeKind::Inside; nx * n_theta],
            lumped: Vec::new(),
        })
    }

    /// Cylinder `[t_min, t_max] x S^1` with `n_theta` angular nodes and `n_t`
    /// cell-centred rows in `t`.
    pub fn cylinder(t_min: f64, t_max: f64, n_theta: usize, n_t: usize) -> Result<Self> {
        check_counts(n_theta, n_t)?;
        if !(t_max > t_min && t_min.is_finite() && t_max.is_finite()) {
            return Err(SpinflowError::InvalidChart("cylinder needs t_min < t_max".into()));
        }
        Ok(Self {
            domain: Domain::Cylinder { t_min, t_max },
            nx: n_theta,
            ny: n_t,
            hx: 2.0 * PI / n_theta as f64,
            hy: (t_max - t_min) / n_t as f64,
            spin: None,
            mask: vec![NodeKind::Inside; n_theta * n_t],
            lumped: Vec::new(),
        })
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Lattice spacing. On the cylinder this is the angular spacing; use
    /// [`GridChart::spacing_xy`] there.
    pub fn spacing(&self) -> f64 {
        self.hx
    }

    pub fn spacing_xy(&self) -> (f64, f64) {
        (self.hx, self.hy)
    }

    pub fn spin_structure(&self) -> Option<SpinStructure> {
        self.spin
    }

    pub fn is_torus(&self) -> bool {
        matches!(self.domain, Domain::Torus { .. })
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn ij(&self, node: usize) -> (usize, usize) {
        (node % self.nx, node / self.nx)
    }

    #[inline]
    pub fn kind(&self, node: usize) -> NodeKind {
        self.mask[node]
    }

    /// Inside or boundary.
    #[inline]
    pub fn is_active(&self, node: usize) -> bool {
        self.mask[node] != NodeKind::Outside
    }

    pub fn active_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&k| self.is_active(k))
    }

    pub fn boundary_nodes(&self) -> Vec<usize> {
        (0..self.len()).filter(|&k| self.mask[k] == NodeKind::Boundary).collect()
    }

    pub fn active_count(&self) -> usize {
        self.mask.iter().filter(|k| **k != NodeKind::Outside).count()
    }

    /// Chart coordinates of a node (see the module table).
    pub fn coords(&self, node: usize) -> [f64; 2] {
        let (i, j) = self.ij(node);
        self.coords_ij(i as f64, j as f64)
    }

    /// Chart coordinates of fractional lattice position `(fi, fj)`.
    pub fn coords_ij(&self, fi: f64, fj: f64) -> [f64; 2] {
        match self.domain {
            Domain::Torus { .. } => [fi * self.hx, fj * self.hy],
            Domain::Disk { radius } => [-radius + fi * self.hx, -radius + fj * self.hy],
            Domain::SphereChart => [fi * self.hx, (fj + 0.5) * self.hy],
            Domain::Cylinder { t_min, .. } => [fi * self.hx, t_min + (fj + 0.5) * self.hy],
        }
    }

    /// Inverse of [`GridChart::coords_ij`].
    pub fn lattice_position(&self, p: [f64; 2]) -> [f64; 2] {
        match self.domain {
            Domain::Torus { .. } => [p[0] / self.hx, p[1] / self.hy],
            Domain::Disk { radius } => [(p[0] + radius) / self.hx, (p[1] + radius) / self.hy],
            Domain::SphereChart => [p[0] / self.hx, p[1] / self.hy - 0.5],
            Domain::Cylinder { t_min, .. } => [p[0] / self.hx, (p[1] - t_min) / self.hy - 0.5],
        }
    }

    /// Quadrature weight of a node.
    pub fn weight(&self, node: usize) -> f64 {
        let h2 = self.hx * self.hy;
        match self.domain {
            Domain::Disk { .. } => self.lumped[node],
            Domain::SphereChart => {
                let [_, theta] = self.coords(node);
                theta.sin() * h2
            }
            _ => h2,
        }
    }

    /// Triangulation of the lattice cells, as lattice positions `[i, j]` in
    /// counter-clockwise order.
    ///
    /// A cell with four active corners is split along the diagonal from
    /// `(i, j)` to `(i + 1, j + 1)`; a cell with three active corners gives
    /// one triangle. On the torus every cell is full and positions run up to
    /// `nx` and `ny`, so the seam cells are included.
    pub fn cell_triangles(&self) -> Vec<[[usize; 2]; 3]> {
        let (cx, cy) = match self.domain {
            Domain::Torus { .. } => (self.nx, self.ny),
            _ => (self.nx - 1, self.ny - 1),
        };
        let active = |i: usize, j: usize| self.is_active(self.index(i % self.nx, j % self.ny));
        let mut out = Vec::new();
        for j in 0..cy {
            for i in 0..cx {
                let corners = [[i, j], [i + 1, j], [i + 1, j + 1], [i, j + 1]];
                let on: Vec<bool> = corners.iter().map(|&[a, b]| active(a, b)).collect();
                match on.iter().filter(|x| **x).count() {
                    4 => {
                        out.push([corners[0], corners[1], corners[2]]);
                        out.push([corners[0], corners[2], corners[3]]);
                    }
                    3 => {
                        let tri: Vec<[usize; 2]> = corners.iter().zip(&on).filter(|(_, o)| **o).map(|(c, _)| *c).collect();
                        out.push([tri[0], tri[1], tri[2]]);
                    }
                    _ => {}
                }
            }
        }
        out
    }

    /// Total quadrature weight (area of the chart).
    pub fn area(&self) -> f64 {
        crate::quadrature::pairwise_sum_by(self.len(), |k| self.weight(k))
    }

    /// Euclidean distance between two chart points; minimum-image on the
    /// torus and the angular direction of the cylinder.
    pub fn distance(&self, a: [f64; 2], b: [f64; 2]) -> f64 {
        let mut dx = a[0] - b[0];
        let mut dy = a[1] - b[1];
        match self.domain {
            Domain::Torus { period_x, period_y } => {
                dx -= period_x * (dx / period_x).round();
                dy -= period_y * (dy / period_y).round();
            }
            Domain::Cylinder { .. } => {
                dx -= 2.0 * PI * (dx / (2.0 * PI)).round();
            }
            _ => {}
        }
        dx.hypot(dy)
    }

    /// Nodes of a region, in increasing index order.
    pub fn region_nodes(&self, region: &Region) -> Vec<usize> {
        match region {
            Region::All => self.active_nodes().collect(),
            Region::Nodes(nodes) => {
                let mut v: Vec<usize> =
                    nodes.iter().copied().filter(|&k| k < self.len() && self.is_active(k)).collect();
                v.sort_unstable();
                v.dedup();
                v
            }
            Region::Ball { center, radius } => self
                .active_nodes()
                .filter(|&k| self.distance(self.coords(k), *center) <= *radius)
                .collect(),
            Region::Annulus { center, inner, outer } => self
                .active_nodes()
                .filter(|&k| {
                    let d = self.distance(self.coords(k), *center);
                    d >= *inner && d <= *outer
                })
                .collect(),
        }
    }

    /// Whether two charts describe the same lattice.
    pub fn compatible(&self, other: &GridChart) -> bool {
        self.domain == other.domain
            && self.nx == other.nx
            && self.ny == other.ny
            && self.spin == other.spin
    }
}

fn check_counts(nx: usize, ny: usize) -> Result<()> {
    if nx < 8 || ny < 8 {
        return Err(SpinflowError::InvalidChart(format!(
            "grid needs at least 8 nodes per direction, got {nx} x {ny}"
        )));
    }
    if nx * ny < 64 {
        return Err(SpinflowError::InvalidChart("grid needs at least 64 nodes".into()));
    }
    Ok(())
}

/// A subset of chart nodes over which integrals are taken.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    /// Every active node.
    All,
    /// Explicit node list.
    Nodes(Vec<usize>),
    /// Closed ball in chart coordinates.
    Ball { center: [f64; 2], radius: f64 },
    /// `inner <= |x - center| <= outer`.
    Annulus { center: [f64; 2], inner: f64, outer: f64 },
}
