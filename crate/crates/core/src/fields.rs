//! Synthetic fields with known structure: planted bubbles, smooth
//! backgrounds and singular profiles.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::chart::{GridChart, SpinStructure};
use crate::error::Result;
use crate::spinor::{SpinorField, C64, ZERO};

/// Amplitude giving the bubble profile unit energy: `a^4 = 3 / (4 pi)`.
pub fn bubble_amplitude() -> f64 {
    (3.0 / (4.0 * PI)).powf(0.25)
}

/// Unit-energy bubble `a (1 + |y|^2 / 4)^{-1} (1, 0)`.
pub fn bubble_profile(y: [f64; 2]) -> [C64; 2] {
    let r2 = y[0] * y[0] + y[1] * y[1];
    [C64::new(bubble_amplitude() / (1.0 + 0.25 * r2), 0.0), ZERO]
}

/// Energy of the bubble profile outside the ball of radius `r`.
pub fn bubble_tail_energy(r: f64) -> f64 {
    (1.0 + 0.25 * r * r).powi(-3)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantedBubble {
    pub center: [f64; 2],
    pub scale: f64,
}

/// Smooth periodic background in the second spinor component, orthogonal
/// to the bubbles.
pub fn background_value([x, y]: [f64; 2], amplitude: f64) -> [C64; 2] {
    let v = C64::new((2.0 * PI * x).cos(), (2.0 * PI * y).sin()) * (amplitude / 2.0f64.sqrt());
    [ZERO, v]
}

/// Background plus `lambda^{-1/2} xi((x - c) / lambda)` for every bubble.
pub fn bubbling_field(chart: Arc<GridChart>, background: f64, bubbles: &[PlantedBubble]) -> SpinorField {
    let c = chart.clone();
    let bubbles = bubbles.to_vec();
    SpinorField::from_fn(chart, 1, move |p| {
        let [_, b] = background_value(p, background);
        let mut a = ZERO;
        for bub in &bubbles {
            let d = displacement(&c, p, bub.center);
            let [xi, _] = bubble_profile([d[0] / bub.scale, d[1] / bub.scale]);
            a += xi / bub.scale.sqrt();
        }
        vec![a, b]
    })
}

fn displacement(chart: &GridChart, p: [f64; 2], c: [f64; 2]) -> [f64; 2] {
    let mut d = [p[0] - c[0], p[1] - c[1]];
    if let crate::chart::Domain::Torus { period_x, period_y } = chart.domain() {
        d[0] -= period_x * (d[0] / period_x).round();
        d[1] -= period_y * (d[1] / period_y).round();
    }
    d
}

/// A planted bubbling sequence and its ground truth.
#[derive(Debug, Clone)]
pub struct PlantedSequence {
    pub sequence: Vec<SpinorField>,
    pub background: SpinorField,
    /// Concentration points with, per point, the bubbles of every element.
    pub points: Vec<[f64; 2]>,
    pub bubbles: Vec<Vec<Vec<PlantedBubble>>>,
}

impl PlantedSequence {
    /// Planted bubbles of element `m`, all points together.
    pub fn element(&self, m: usize) -> Vec<PlantedBubble> {
        self.bubbles.iter().flat_map(|per_point| per_point.iter().map(move |b| b[m])).collect()
    }
}

/// Unit torus with two concentration points: a pair of bubbles at the first
/// point, drifting together as `0.7 lambda^{1/2}`, and a single bubble at
/// the second. Scales are `lambda_m = 0.02 * 2^{-m/2}`.
pub fn two_point_design(n: usize, elements: usize) -> Result<PlantedSequence> {
    let chart = Arc::new(GridChart::unit_torus(n, SpinStructure::PeriodicPeriodic)?);
    let (a, b) = ([0.3, 0.3], [0.7, 0.65]);
    let scale = |m: usize| 0.02 * 2f64.powf(-(m as f64) / 2.0);
    let pair = |m: usize, side: f64| {
        let lambda = scale(m);
        let d = 0.7 * lambda.sqrt();
        PlantedBubble { center: [a[0] + side * d, a[1]], scale: lambda }
    };
    let bubbles = vec![
        vec![(0..elements).map(|m| pair(m, -1.0)).collect(), (0..elements).map(|m| pair(m, 1.0)).collect()],
        vec![(0..elements).map(|m| PlantedBubble { center: b, scale: scale(m) }).collect()],
    ];
    assemble(chart, vec![a, b], bubbles, elements)
}

/// One bubble at `(0.5, 0.5)` with `lambda_m = 0.04 * 2^{-m/2}`.
pub fn single_point_design(n: usize, elements: usize) -> Result<PlantedSequence> {
    let chart = Arc::new(GridChart::unit_torus(n, SpinStructure::PeriodicPeriodic)?);
    let p = [0.5, 0.5];
    let bubbles = vec![vec![(0..elements).map(|m| PlantedBubble { center: p, scale: 0.04 * 2f64.powf(-(m as f64) / 2.0) }).collect()]];
    assemble(chart, vec![p], bubbles, elements)
}

/// Background amplitude of the planted designs.
pub const DESIGN_BACKGROUND: f64 = 0.3;

fn assemble(
    chart: Arc<GridChart>,
    points: Vec<[f64; 2]>,
    bubbles: Vec<Vec<Vec<PlantedBubble>>>,
    elements: usize,
) -> Result<PlantedSequence> {
    let mut out = PlantedSequence {
        sequence: Vec::with_capacity(elements),
        background: bubbling_field(chart.clone(), DESIGN_BACKGROUND, &[]),
        points,
        bubbles,
    };
    for m in 0..elements {
        let planted = out.element(m);
        out.sequence.push(bubbling_field(chart.clone(), DESIGN_BACKGROUND, &planted));
    }
    Ok(out)
}

/// `A r^{-1/4} exp(-(r / (2h))^2)` in the first component around `center`;
/// the centre node itself is set to zero.
pub fn decay_spike(chart: Arc<GridChart>, center: [f64; 2], amplitude: f64) -> SpinorField {
    let h = chart.spacing();
    let c = chart.clone();
    SpinorField::from_fn(chart, 1, move |p| {
        let r = c.distance(p, center);
        if r < 0.5 * h {
            return vec![ZERO, ZERO];
        }
        let v = amplitude * r.powf(-0.25) * (-(r / (2.0 * h)).powi(2)).exp();
        vec![C64::new(v, 0.0), ZERO]
    })
}

/// A smooth field on the disk with `sin`/`exp` structure and no symmetry.
pub fn smooth_disk_field(chart: Arc<GridChart>) -> SpinorField {
    SpinorField::from_fn(chart, 1, |[x, y]| {
        vec![
            C64::new(0.6 + 0.3 * (2.0 * x).sin() * y, 0.2 * x * x),
            C64::new(0.1 * y, 0.4 * (0.5 * x - y).cos()),
        ]
    })
}

/// Smooth spinor on the unit torus, antiperiodic in both directions. Block `b` is the base profile scaled by `1 / (b + 1)` and shifted in
/// phase by `b`.
///
/// ```text
/// psi_1 = A e^{i pi (x + y)} (1 + 0.3 cos 2 pi x)
/// psi_2 = (A / 2) e^{i pi (x - 3y)}
/// ```
pub fn manufactured_torus(chart: Arc<GridChart>, n: usize, amplitude: f64) -> SpinorField {
    SpinorField::from_fn(chart, n, move |[x, y]| {
        (0..n)
            .flat_map(|b| {
                let a = amplitude / (b + 1) as f64;
                let shift = C64::from_polar(1.0, b as f64);
                [
                    shift * C64::from_polar(a, PI * (x + y)) * (1.0 + 0.3 * (2.0 * PI * x).cos()),
                    shift * C64::from_polar(0.5 * a, PI * (x - 3.0 * y)),
                ]
            })
            .collect()
    })
}

/// Smooth non-harmonic spinor on a disk, blocks as in [`manufactured_torus`].
pub fn manufactured_disk(chart: Arc<GridChart>, n: usize, amplitude: f64) -> SpinorField {
    SpinorField::from_fn(chart, n, move |[x, y]| {
        (0..n)
            .flat_map(|b| {
                let a = amplitude / (b + 1) as f64;
                let shift = C64::from_polar(1.0, b as f64);
                [
                    shift * C64::new(a * (1.0 + 0.5 * x * y), 0.3 * a * (2.0 * y).sin()),
                    shift * C64::new(0.2 * a * x, a * (0.5 - 0.3 * x * x)),
                ]
            })
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bubble_has_unit_energy() {
        // radial quadrature of |xi|^4 = a^4 (1 + r^2/4)^{-4}
        let a4 = bubble_amplitude().powi(4);
        let n = 200_000;
        let rmax = 400.0;
        let dr = rmax / n as f64;
        let e: f64 = (0..n)
            .map(|k| {
                let r = (k as f64 + 0.5) * dr;
                2.0 * PI * r * a4 * (1.0 + 0.25 * r * r).powi(-4) * dr
            })
            .sum();
        assert!((e - 1.0).abs() < 1e-6, "{e}");
        assert!((bubble_tail_energy(2.0) - 0.125).abs() < 1e-15);
    }

    #[test]
    fn planted_energies_add_up() {
        let design = single_point_design(256, 3).unwrap();
        let e = design.sequence[2].total_energy();
        let bg = design.background.total_energy();
        assert!((e - bg - 1.0).abs() < 0.02, "{e} {bg}");
    }
}
