//! Neck energies and decay profiles around a point.

use serde::Serialize;

use crate::chart::{Domain, GridChart};
use crate::dirac::fd::{self, FdStencil};
use crate::error::{Result, SpinflowError};
use crate::quadrature::pairwise_sum_by;
use crate::spinor::SpinorField;

/// Fitted exponents below this are flagged as non-decaying.
pub const DECAY_FLAG: f64 = 0.05;

fn check_ball(chart: &GridChart, center: [f64; 2], radius: f64) -> Result<()> {
    let fits = match chart.domain() {
        Domain::Disk { radius: big } => center[0].hypot(center[1]) + radius <= big * (1.0 + 1e-12),
        Domain::Torus { period_x, period_y } => 2.0 * radius < period_x.min(period_y),
        other => return Err(SpinflowError::UnsupportedDomain { op: "annulus energies", domain: other.name() }),
    };
    if fits {
        Ok(())
    } else {
        Err(SpinflowError::Precondition(format!("ball of radius {radius} around {center:?} leaves the chart")))
    }
}

/// Energy on the annulus `lambda R <= |x - center| < delta`.
///
/// The outer edge is open so that nested annuli sharing a radius add up
/// exactly.
pub fn neck_energy(psi: &SpinorField, center: [f64; 2], delta: f64, big_r: f64, lambda: f64) -> Result<f64> {
    let inner = lambda * big_r;
    if !(inner > 0.0 && inner < delta) {
        return Err(SpinflowError::Precondition(format!("annulus needs 0 < lambda R < delta, got {inner} and {delta}")));
    }
    let chart = psi.chart();
    check_ball(chart, center, delta)?;
    let nodes: Vec<usize> = chart
        .active_nodes()
        .filter(|&k| {
            let d = chart.distance(chart.coords(k), center);
            d >= inner && d < delta
        })
        .collect();
    Ok(psi.energy_on(&nodes))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayProfile {
    pub radii: Vec<f64>,
    /// `F(r) = int_{B_r \ {center}} |psi|^4 + |grad psi|^{4/3}`.
    pub values: Vec<f64>,
    /// Least-squares slope of `log F` against `log r`.
    pub exponent: f64,
    pub flagged: bool,
}

/// `F(r)` on the punctured balls around `center` and its power-law fit.
///
/// The centre node is left out, so a field may be singular there.
pub fn decay_profile(psi: &SpinorField, center: [f64; 2], radii: &[f64]) -> Result<DecayProfile> {
    let chart = psi.chart();
    let h = chart.spacing();
    if radii.len() < 2 || radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(SpinflowError::Precondition("need at least two strictly decreasing radii".into()));
    }
    let smallest = radii[radii.len() - 1];
    if smallest < 4.0 * h * (1.0 - 1e-12) {
        return Err(SpinflowError::Precondition(format!("smallest radius {smallest} is below four cells ({})", 4.0 * h)));
    }
    check_ball(chart, center, radii[0])?;
    let (dx, dy) = fd::gradient(psi, FdStencil::Centered)?;
    let mut values = Vec::with_capacity(radii.len());
    for &r in radii {
        let nodes: Vec<usize> = chart
            .active_nodes()
            .filter(|&k| {
                let d = chart.distance(chart.coords(k), center);
                d >= 0.5 * h && d <= r
            })
            .collect();
        let f = pairwise_sum_by(nodes.len(), |m| {
            let k = nodes[m];
            let s = psi.norm_sqr_at(k);
            let g = dx.norm_sqr_at(k) + dy.norm_sqr_at(k);
            chart.weight(k) * (s * s + g.powf(2.0 / 3.0))
        });
        if !(f > 0.0) {
            return Err(SpinflowError::DegenerateFit(format!("F vanishes at radius {r}")));
        }
        values.push(f);
    }
    let xs: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let ys: Vec<f64> = values.iter().map(|f| f.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let exponent = sxy / sxx;
    Ok(DecayProfile { radii: radii.to_vec(), values, exponent, flagged: exponent < DECAY_FLAG })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spinor::{C64, ZERO};
    use std::sync::Arc;

    #[test]
    fn zero_field() {
        let chart = Arc::new(GridChart::disk(1.0, 65).unwrap());
        let psi = SpinorField::zeros(chart, 1);
        assert_eq!(neck_energy(&psi, [0.0, 0.0], 0.5, 4.0, 0.01).unwrap(), 0.0);
        assert!(matches!(
            decay_profile(&psi, [0.0, 0.0], &[0.5, 0.25, 0.125]),
            Err(SpinflowError::DegenerateFit(_))
        ));
    }

    #[test]
    fn annulus_additivity_and_preconditions() {
        let chart = Arc::new(GridChart::disk(1.0, 129).unwrap());
        let psi = SpinorField::from_fn(chart, 1, |[x, y]| vec![C64::new(1.0 + x, y), ZERO]);
        let c = [0.05, -0.1];
        let whole = neck_energy(&psi, c, 0.8, 1.0, 0.1).unwrap();
        let a = neck_energy(&psi, c, 0.37, 1.0, 0.1).unwrap();
        let b = neck_energy(&psi, c, 0.8, 1.0, 0.37).unwrap();
        assert!((whole - (a + b)).abs() <= 1e-14 * whole);
        assert!(matches!(neck_energy(&psi, c, 0.1, 1.0, 0.2), Err(SpinflowError::Precondition(_))));
        assert!(matches!(neck_energy(&psi, c, 0.99, 1.0, 0.1), Err(SpinflowError::Precondition(_))));
    }

    #[test]
    fn smooth_field_decays() {
        let chart = Arc::new(GridChart::disk(1.0, 129).unwrap());
        let psi = SpinorField::from_fn(chart, 1, |[x, y]| vec![C64::new(0.5 + x * y, x), C64::new(0.0, 0.3)]);
        let prof = decay_profile(&psi, [0.0, 0.0], &[0.5, 0.35, 0.25, 0.18, 0.125, 0.09, 0.0625]).unwrap();
        assert!(prof.exponent >= 0.1 && !prof.flagged);
        assert!(prof.values.windows(2).all(|w| w[0] >= w[1]));
    }
}
