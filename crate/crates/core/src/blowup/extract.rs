//! Bubble extraction at a concentration point.

use std::sync::Arc;

use crate::chart::{GridChart, Region};
use crate::error::{Result, SpinflowError};
use crate::spinor::SpinorField;

use super::conformal::rescale;
use super::detect::{energy_density, tail_start, BallConvolver};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtractOptions {
    /// Search radius around the blow-up point.
    pub delta: f64,
    /// Radius, in bubble units, of the ball carrying the bubble.
    pub big_r: f64,
    /// Lattice size of the disk chart holding the rescaled fields.
    pub limit_n: usize,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        Self { delta: 0.15, big_r: 8.0, limit_n: 65 }
    }
}

/// One bubble, followed along the tail of the sequence.
#[derive(Debug, Clone)]
pub struct Bubble {
    pub point: [f64; 2],
    /// Scales `lambda_m`, one per tail element.
    pub scales: Vec<f64>,
    /// Centres `x_m` and their nodes.
    pub centers: Vec<[f64; 2]>,
    pub center_nodes: Vec<usize>,
    /// `E(psi_m; B(x_m, lambda_m R))` on the last tail element.
    pub energy: f64,
    /// `lambda_m^{1/2} psi_m(x_m + lambda_m x)` on the disk of radius `R`.
    pub rescaled: Vec<SpinorField>,
}

impl Bubble {
    /// The rescaled field of the last tail element.
    pub fn limit(&self) -> &SpinorField {
        self.rescaled.last().expect("bubbles carry at least one field")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Found {
    scale: f64,
    node: usize,
}

/// Largest ball energy of radius `lambda` over the window.
fn window_max(conv: &BallConvolver, hat: &[crate::spinor::C64], window: &[usize], lambda: f64) -> Result<(f64, usize)> {
    let e = conv.energies(hat, lambda)?;
    let mut best = (f64::NEG_INFINITY, usize::MAX);
    for &k in window {
        if e[k] > best.0 || (e[k] == best.0 && k < best.1) {
            best = (e[k], k);
        }
    }
    Ok(best)
}

/// Scale at which the maximal ball energy over `window` equals `target`,
/// to within `target / 50` (that is `epsilon / 100`). `None` when even the
/// largest ball stays below the target.
fn bisect_scale(conv: &BallConvolver, density: &[f64], window: &[usize], target: f64, h: f64, delta: f64) -> Result<Option<Found>> {
    let hat = conv.density_hat(density);
    let (q_hi, _) = window_max(conv, &hat, window, delta)?;
    if q_hi < target {
        return Ok(None);
    }
    let (mut lo, mut hi) = (0.5 * h, delta);
    let (q_lo, _) = window_max(conv, &hat, window, lo)?;
    if q_lo > target {
        return Err(SpinflowError::Extraction(format!(
            "a single cell carries more than {target:.3e} energy; the bubble is below grid resolution"
        )));
    }
    let tol = target / 50.0;
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        let (q, node) = window_max(conv, &hat, window, mid)?;
        if (q - target).abs() <= tol || hi / lo < 1.0 + 1e-12 {
            return Ok(Some(Found { scale: mid, node }));
        }
        if q < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (_, node) = window_max(conv, &hat, window, hi)?;
    Ok(Some(Found { scale: hi, node }))
}

/// Every bubble concentrating at `point`, strongest first.
///
/// For each tail element the first bubble maximizes ball energy over the
/// `delta` window with the scale chosen so the maximum equals `epsilon / 2`.
/// Its ball `B(x_m, lambda_m R)` is then removed and the search repeated. A
/// bubble is kept when it is found on every tail element.
pub fn extract_bubbles(sequence: &[SpinorField], point: [f64; 2], epsilon: f64, opts: ExtractOptions) -> Result<Vec<Bubble>> {
    if !(epsilon > 0.0) || !(opts.delta > 0.0) || !(opts.big_r > 0.0) {
        return Err(SpinflowError::Precondition("threshold, search radius and R must be positive".into()));
    }
    let Some(first) = sequence.first() else {
        return Err(SpinflowError::Extraction("empty sequence".into()));
    };
    let chart = first.chart_arc().clone();
    if sequence.iter().any(|f| !f.chart().compatible(&chart)) {
        return Err(SpinflowError::Precondition("sequence fields live on different charts".into()));
    }
    let conv = BallConvolver::new(&chart)?;
    let h = chart.spacing();
    let window = chart.region_nodes(&Region::Ball { center: point, radius: opts.delta });
    let tail = &sequence[tail_start(sequence.len())..];

    // per tail element, the bubbles found so far
    let mut found: Vec<Vec<Found>> = vec![Vec::new(); tail.len()];
    let mut densities: Vec<Vec<f64>> = tail.iter().map(energy_density).collect();
    'outer: loop {
        let mut round = Vec::with_capacity(tail.len());
        for density in &densities {
            match bisect_scale(&conv, density, &window, 0.5 * epsilon, h, opts.delta)? {
                Some(f) => round.push(f),
                None => break 'outer,
            }
        }
        for ((f, density), list) in round.iter().zip(densities.iter_mut()).zip(found.iter_mut()) {
            let c = chart.coords(f.node);
            for k in chart.region_nodes(&Region::Ball { center: c, radius: f.scale * opts.big_r }) {
                density[k] = 0.0;
            }
            list.push(*f);
        }
        if found[0].len() > 64 {
            break;
        }
    }

    let count = found[0].len();
    let limit_chart = Arc::new(GridChart::disk(opts.big_r, opts.limit_n)?);
    let mut bubbles = Vec::with_capacity(count);
    for a in 0..count {
        let per: Vec<Found> = found.iter().map(|l| l[a]).collect();
        let centers: Vec<[f64; 2]> = per.iter().map(|f| chart.coords(f.node)).collect();
        let rescaled = tail
            .iter()
            .zip(&per)
            .zip(&centers)
            .map(|((psi, f), c)| rescale(psi, *c, f.scale, limit_chart.clone()))
            .collect::<Result<Vec<_>>>()?;
        let last = per.len() - 1;
        let energy = tail[last].energy(&Region::Ball { center: centers[last], radius: per[last].scale * opts.big_r });
        bubbles.push(Bubble {
            point,
            scales: per.iter().map(|f| f.scale).collect(),
            center_nodes: per.iter().map(|f| f.node).collect(),
            centers,
            energy,
            rescaled,
        });
    }
    Ok(bubbles)
}

/// The strongest bubble at `point`.
pub fn extract_bubble(sequence: &[SpinorField], point: [f64; 2], epsilon: f64, opts: ExtractOptions) -> Result<Bubble> {
    extract_bubbles(sequence, point, epsilon, opts)?
        .into_iter()
        .next()
        .ok_or_else(|| SpinflowError::Extraction(format!("ball energies near ({:.4}, {:.4}) never reach {:.3e}", point[0], point[1], 0.5 * epsilon)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::SpinStructure;
    use crate::spinor::{C64, ZERO};

    #[test]
    fn no_concentration_fails() {
        let chart = Arc::new(GridChart::unit_torus(64, SpinStructure::AntiAnti).unwrap());
        let seq = vec![SpinorField::from_fn(chart, 1, |[x, y]| vec![C64::new(0.1 * (x + y), 0.0), ZERO]); 2];
        let err = extract_bubble(&seq, [0.5, 0.5], 0.5, ExtractOptions::default()).unwrap_err();
        assert!(matches!(err, SpinflowError::Extraction(_)));
    }
}
