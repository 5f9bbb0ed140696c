//! Discrete mean curvature from the cotangent Laplacian.

use serde::Serialize;

use super::mesh::{cross, dot, norm, SurfaceMesh};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanCurvature {
    /// Per vertex; `None` off the interior or next to a degenerate face.
    pub values: Vec<Option<f64>>,
    /// Interior vertices skipped because a face around them has no area.
    pub excluded: Vec<usize>,
}

impl MeanCurvature {
    pub fn max_abs(&self) -> f64 {
        self.values.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max)
    }

    /// Largest `|H|` over vertices farther than `margin` lattice steps from
    /// any missing vertex.
    pub fn max_abs_within(&self, mesh: &SurfaceMesh, margin: usize) -> f64 {
        let m = margin as isize;
        (0..self.values.len())
            .filter(|&v| {
                let [i, j] = mesh.lattice_position(v);
                (-m..=m).all(|dj| (-m..=m).all(|di| mesh.vertex_at(i as isize + di, j as isize + dj).is_some()))
            })
            .filter_map(|v| self.values[v])
            .map(f64::abs)
            .fold(0.0, f64::max)
    }
}

/// `H = <Delta X, N> / 2` at interior vertices, with the cotangent Laplacian
/// normalized by a third of the surrounding face area and `N` the unit
/// normal along `X_x x X_y` (inward on a sphere, so `H = 1` there).
pub fn mean_curvature(mesh: &SurfaceMesh) -> MeanCurvature {
    let nv = mesh.vertex_count();
    let mut lap = vec![[0.0; 3]; nv];
    let mut area = vec![0.0; nv];
    let mut normal = vec![[0.0; 3]; nv];
    let mut degenerate = vec![false; nv];
    let scale = mesh.positions.iter().map(|p| norm(*p)).fold(0.0, f64::max).max(1.0);
    let floor = 1e-14 * scale * scale * mesh.chart().spacing().powi(2);
    for face in &mesh.faces {
        let x = face.map(|v| mesh.positions[v]);
        let n = cross(sub(x[1], x[0]), sub(x[2], x[0]));
        let a = 0.5 * norm(n);
        if a <= floor {
            for &v in face {
                degenerate[v] = true;
            }
            continue;
        }
        for k in 0..3 {
            let (p, q, r) = (face[k], face[(k + 1) % 3], face[(k + 2) % 3]);
            // angle at r faces the edge p-q
            let (u, w) = (sub(mesh.positions[p], mesh.positions[r]), sub(mesh.positions[q], mesh.positions[r]));
            let cot = dot(u, w) / norm(cross(u, w));
            let e = sub(mesh.positions[q], mesh.positions[p]);
            for c in 0..3 {
                lap[p][c] += 0.5 * cot * e[c];
                lap[q][c] -= 0.5 * cot * e[c];
            }
        }
        for &v in face {
            area[v] += a / 3.0;
            for c in 0..3 {
                normal[v][c] += n[c];
            }
        }
    }
    let mut values = vec![None; nv];
    let mut excluded = Vec::new();
    for v in 0..nv {
        if !mesh.is_interior(v) {
            continue;
        }
        if degenerate[v] || norm(normal[v]) == 0.0 {
            excluded.push(v);
            continue;
        }
        let nn = norm(normal[v]);
        let unit = normal[v].map(|c| c / nn);
        let delta = lap[v].map(|c| c / area[v]);
        values[v] = Some(0.5 * dot(delta, unit));
    }
    MeanCurvature { values, excluded }
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}
