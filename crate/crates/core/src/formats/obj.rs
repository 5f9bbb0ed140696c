//! Wavefront OBJ output for surface meshes: `v x y z` lines, then 1-based
//! `f i j k` lines, LF line endings.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Result, SpinflowError};
use crate::weierstrass::SurfaceMesh;

/// OBJ text of a mesh. Coordinates use the shortest decimal form that reads
/// back to the same `f64`.
pub fn obj_string(mesh: &SurfaceMesh) -> String {
    let mut s = String::with_capacity(mesh.positions.len() * 48 + mesh.faces.len() * 24);
    for [x, y, z] in &mesh.positions {
        writeln!(s, "v {x} {y} {z}").expect("writing to a String");
    }
    for [a, b, c] in &mesh.faces {
        writeln!(s, "f {} {} {}", a + 1, b + 1, c + 1).expect("writing to a String");
    }
    s
}

pub fn write_obj(path: &Path, mesh: &SurfaceMesh) -> Result<()> {
    fs::write(path, obj_string(mesh))?;
    Ok(())
}

/// The `v` lines of an OBJ document.
pub fn read_obj_vertices(text: &str) -> Result<Vec<[f64; 3]>> {
    let mut out = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        let mut parts = line.split_whitespace();
        if parts.next() != Some("v") {
            continue;
        }
        let coords: Vec<f64> = parts
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| SpinflowError::Format(format!("line {}: {e}", line_no + 1)))?;
        let [x, y, z] = coords[..] else {
            return Err(SpinflowError::Format(format!("line {}: expected three coordinates", line_no + 1)));
        };
        out.push([x, y, z]);
    }
    Ok(out)
}

/// Eigen-decomposition of a symmetric 3x3 matrix by cyclic Jacobi
/// rotations. Returns eigenvalues and the matching eigenvectors (columns).
#[allow(clippy::needless_range_loop)]
fn symmetric_eigen(mut a: [[f64; 3]; 3]) -> ([f64; 3], [[f64; 3]; 3]) {
    let mut v = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    for _ in 0..64 {
        let off = a[0][1].powi(2) + a[0][2].powi(2) + a[1][2].powi(2);
        let scale = a[0][0].powi(2) + a[1][1].powi(2) + a[2][2].powi(2);
        if off <= 1e-30 * scale || off == 0.0 {
            break;
        }
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            if a[p][q] == 0.0 {
                continue;
            }
            let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;
            for k in 0..3 {
                let (akp, akq) = (a[k][p], a[k][q]);
                a[k][p] = c * akp - s * akq;
                a[k][q] = s * akp + c * akq;
            }
            for k in 0..3 {
                let (apk, aqk) = (a[p][k], a[q][k]);
                a[p][k] = c * apk - s * aqk;
                a[q][k] = s * apk + c * aqk;
            }
            for row in v.iter_mut() {
                let (vp, vq) = (row[p], row[q]);
                row[p] = c * vp - s * vq;
                row[q] = s * vp + c * vq;
            }
        }
    }
    ([a[0][0], a[1][1], a[2][2]], v)
}

/// Largest distance of a point from its least-squares plane.
pub fn plane_fit_residual(points: &[[f64; 3]]) -> f64 {
    if points.len() < 3 {
        return 0.0;
    }
    let m = points.len() as f64;
    let mut c = [0.0; 3];
    for p in points {
        for d in 0..3 {
            c[d] += p[d] / m;
        }
    }
    let mut cov = [[0.0; 3]; 3];
    for p in points {
        let q = [p[0] - c[0], p[1] - c[1], p[2] - c[2]];
        for r in 0..3 {
            for s in 0..3 {
                cov[r][s] += q[r] * q[s];
            }
        }
    }
    let (values, vectors) = symmetric_eigen(cov);
    let smallest = (0..3).min_by(|&i, &j| values[i].total_cmp(&values[j])).expect("three eigenvalues");
    let normal = [vectors[0][smallest], vectors[1][smallest], vectors[2][smallest]];
    points
        .iter()
        .map(|p| ((p[0] - c[0]) * normal[0] + (p[1] - c[1]) * normal[1] + (p[2] - c[2]) * normal[2]).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::{GridChart, SpinStructure};
    use std::sync::Arc;

    #[test]
    fn tilted_plane_fits_exactly() {
        let n = [0.3f64, -0.5, 0.81];
        let pts: Vec<[f64; 3]> = (0..50)
            .map(|k| {
                let (u, v) = ((k % 7) as f64, (k / 7) as f64 * 0.37);
                // two directions orthogonal to n
                let a = [n[1], -n[0], 0.0];
                let b = [n[0] * n[2], n[1] * n[2], -(n[0] * n[0] + n[1] * n[1])];
                [u * a[0] + v * b[0] + 2.0, u * a[1] + v * b[1], u * a[2] + v * b[2] - 1.0]
            })
            .collect();
        assert!(plane_fit_residual(&pts) < 1e-12);
        let mut bent = pts.clone();
        bent[10][2] += 0.1;
        assert!(plane_fit_residual(&bent) > 1e-3);
    }

    #[test]
    fn obj_text_reads_back() {
        let chart = Arc::new(GridChart::unit_torus(8, SpinStructure::AntiAnti).unwrap());
        let mesh = SurfaceMesh::from_positions(chart, |[x, y]| [x, y, 0.1 * x * y]);
        let text = obj_string(&mesh);
        assert!(!text.contains('\r'));
        let indices: Vec<usize> =
            text.lines().filter(|l| l.starts_with("f ")).flat_map(|l| l[2..].split(' ').map(|t| t.parse().unwrap())).collect();
        assert_eq!(indices.iter().min(), Some(&1));
        assert_eq!(indices.iter().max(), Some(&mesh.positions.len()));
        assert_eq!(read_obj_vertices(&text).unwrap(), mesh.positions);
    }
}
