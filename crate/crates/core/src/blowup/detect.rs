//! Local energies on balls and detection of concentration points.

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::Serialize;

use crate::chart::{Domain, GridChart};
use crate::error::{Result, SpinflowError};
use crate::fft2::Fft2;
use crate::spinor::{SpinorField, C64, ZERO};

/// Ball energies `int_{B(x, r)} |psi|^4` at every node, for many radii.
///
/// The ball indicator is softened over one cell, `clamp((r - d)/h + 1/2, 0, 1)`,
/// so that the energy is continuous in `r` and in the centre. Torus charts
/// convolve cyclically; disk charts are zero padded.
pub struct BallConvolver {
    nx: usize,
    ny: usize,
    px: usize,
    py: usize,
    h: f64,
    periodic: Option<(f64, f64)>,
    fft: Fft2,
}

impl BallConvolver {
    pub fn new(chart: &GridChart) -> Result<Self> {
        let (nx, ny) = (chart.nx(), chart.ny());
        let (px, py, periodic) = match chart.domain() {
            Domain::Torus { period_x, period_y } => (nx, ny, Some((period_x, period_y))),
            Domain::Disk { .. } => (2 * nx, 2 * ny, None),
            other => return Err(SpinflowError::UnsupportedDomain { op: "ball energies", domain: other.name() }),
        };
        Ok(Self { nx, ny, px, py, h: chart.spacing(), periodic, fft: Fft2::new(px, py) })
    }

    /// Transform of the weighted energy density `w_k |psi_k|^4`.
    pub fn density_hat(&self, density: &[f64]) -> Vec<C64> {
        let mut buf = vec![ZERO; self.px * self.py];
        for j in 0..self.ny {
            for i in 0..self.nx {
                buf[j * self.px + i] = C64::new(density[j * self.nx + i], 0.0);
            }
        }
        self.fft.forward(&mut buf);
        buf
    }

    fn kernel_hat(&self, radius: f64) -> Vec<C64> {
        let h = self.h;
        let mut buf = vec![ZERO; self.px * self.py];
        let reach = (radius / h + 1.0).ceil() as isize;
        for dj in -reach..=reach {
            for di in -reach..=reach {
                let d = h * ((di * di + dj * dj) as f64).sqrt();
                let w = ((radius - d) / h + 0.5).clamp(0.0, 1.0);
                if w == 0.0 {
                    continue;
                }
                let i = di.rem_euclid(self.px as isize) as usize;
                let j = dj.rem_euclid(self.py as isize) as usize;
                buf[j * self.px + i] += C64::new(w, 0.0);
            }
        }
        self.fft.forward(&mut buf);
        buf
    }

    /// Ball energies of radius `radius` at every node of the chart.
    pub fn energies(&self, density_hat: &[C64], radius: f64) -> Result<Vec<f64>> {
        if let Some((lx, ly)) = self.periodic {
            if 2.0 * radius >= lx.min(ly) {
                return Err(SpinflowError::Precondition(format!("ball radius {radius} wraps around the torus")));
            }
        }
        let kernel = self.kernel_hat(radius);
        let mut buf: Vec<C64> = density_hat.iter().zip(&kernel).map(|(a, b)| a * b).collect();
        self.fft.inverse(&mut buf);
        let mut out = vec![0.0; self.nx * self.ny];
        for j in 0..self.ny {
            for i in 0..self.nx {
                out[j * self.nx + i] = buf[j * self.px + i].re.max(0.0);
            }
        }
        Ok(out)
    }
}

/// Quadrature-weighted density `w_k |psi_k|^4`; zero off the chart.
pub fn energy_density(psi: &SpinorField) -> Vec<f64> {
    let chart = psi.chart();
    (0..chart.len())
        .map(|k| {
            let s = psi.norm_sqr_at(k);
            chart.weight(k) * s * s
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlowupPoint {
    /// Representative node and its coordinates.
    pub node: usize,
    pub location: [f64; 2],
    pub radius_schedule: Vec<f64>,
    /// Lower envelope of the ball energy at the smallest radius.
    pub liminf_energy: f64,
    /// Number of grid points in the detected cluster.
    pub cluster_size: usize,
}

/// Start of the sequence tail over which lower envelopes are taken.
pub fn tail_start(len: usize) -> usize {
    len / 2
}

/// Points whose ball energies stay at least `epsilon` along the tail of the
/// sequence, for every radius in the (decreasing) schedule.
///
/// Candidate nodes are grouped into 8-connected clusters; clusters whose
/// representatives lie within twice the largest radius of each other are
/// merged. The representative maximizes the envelope at the smallest
/// radius, ties going to the smallest node index, and points are returned
/// in increasing node order.
pub fn blowup_set(sequence: &[SpinorField], epsilon: f64, radii: &[f64]) -> Result<Vec<BlowupPoint>> {
    if !(epsilon > 0.0) {
        return Err(SpinflowError::Precondition(format!("threshold must be positive, got {epsilon}")));
    }
    if radii.is_empty() || radii.windows(2).any(|w| w[1] >= w[0]) || radii.iter().any(|r| !(*r > 0.0)) {
        return Err(SpinflowError::Precondition("radius schedule must be positive and strictly decreasing".into()));
    }
    let Some(first) = sequence.first() else { return Ok(Vec::new()) };
    let chart = first.chart_arc().clone();
    if sequence.iter().any(|f| !f.chart().compatible(&chart)) {
        return Err(SpinflowError::Precondition("sequence fields live on different charts".into()));
    }
    let conv = BallConvolver::new(&chart)?;
    let tail = &sequence[tail_start(sequence.len())..];
    let hats: Vec<Vec<C64>> = tail.par_iter().map(|f| conv.density_hat(&energy_density(f))).collect();

    let mut candidate: Vec<bool> = (0..chart.len()).map(|k| chart.is_active(k)).collect();
    let mut finest = Vec::new();
    for &r in radii {
        let per_field: Vec<Vec<f64>> = hats.par_iter().map(|hat| conv.energies(hat, r)).collect::<Result<_>>()?;
        let envelope: Vec<f64> =
            (0..chart.len()).map(|k| per_field.iter().map(|e| e[k]).fold(f64::INFINITY, f64::min)).collect();
        for (c, e) in candidate.iter_mut().zip(&envelope) {
            *c &= *e >= epsilon;
        }
        finest = envelope;
    }

    let clusters = clusters(&chart, &candidate);
    let reps: Vec<usize> = clusters.iter().map(|c| representative(c, &finest)).collect();
    // single-linkage merge of nearby clusters
    let merge = 2.0 * radii[0];
    let mut group: Vec<usize> = (0..clusters.len()).collect();
    fn find(g: &mut [usize], a: usize) -> usize {
        let mut a = a;
        while g[a] != a {
            g[a] = g[g[a]];
            a = g[a];
        }
        a
    }
    for a in 0..reps.len() {
        for b in a + 1..reps.len() {
            if chart.distance(chart.coords(reps[a]), chart.coords(reps[b])) <= merge {
                let (ra, rb) = (find(&mut group, a), find(&mut group, b));
                if ra != rb {
                    group[ra.max(rb)] = ra.min(rb);
                }
            }
        }
    }
    let mut points = Vec::new();
    for root in 0..clusters.len() {
        if find(&mut group, root) != root {
            continue;
        }
        let members: Vec<usize> = (0..clusters.len())
            .filter(|&c| find(&mut group, c) == root)
            .flat_map(|c| clusters[c].iter().copied())
            .collect();
        let node = representative(&members, &finest);
        points.push(BlowupPoint {
            node,
            location: chart.coords(node),
            radius_schedule: radii.to_vec(),
            liminf_energy: finest[node],
            cluster_size: members.len(),
        });
    }
    points.sort_by_key(|p| p.node);
    Ok(points)
}

fn representative(nodes: &[usize], values: &[f64]) -> usize {
    let mut best = nodes[0];
    for &k in nodes {
        if values[k] > values[best] || (values[k] == values[best] && k < best) {
            best = k;
        }
    }
    best
}

/// 8-connected components of the flagged nodes, each sorted, ordered by
/// their smallest node.
fn clusters(chart: &GridChart, flagged: &[bool]) -> Vec<Vec<usize>> {
    let (nx, ny) = (chart.nx() as isize, chart.ny() as isize);
    let wrap = chart.is_torus();
    let mut seen = vec![false; flagged.len()];
    let mut out = Vec::new();
    for start in 0..flagged.len() {
        if !flagged[start] || seen[start] {
            continue;
        }
        let mut comp = Vec::new();
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(k) = queue.pop_front() {
            comp.push(k);
            let (i, j) = chart.ij(k);
            for dj in -1..=1isize {
                for di in -1..=1isize {
                    let (mut a, mut b) = (i as isize + di, j as isize + dj);
                    if wrap {
                        a = a.rem_euclid(nx);
                        b = b.rem_euclid(ny);
                    } else if a < 0 || b < 0 || a >= nx || b >= ny {
                        continue;
                    }
                    let q = chart.index(a as usize, b as usize);
                    if flagged[q] && !seen[q] {
                        seen[q] = true;
                        queue.push_back(q);
                    }
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}
