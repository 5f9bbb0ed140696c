//! Energy bookkeeping for a bubbling sequence.

use serde::Serialize;

use crate::error::{Result, SpinflowError};
use crate::quadrature::pairwise_sum;
use crate::spinor::SpinorField;

use super::extract::Bubble;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BubbleEntry {
    pub scale: f64,
    pub center: [f64; 2],
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointEntry {
    pub location: [f64; 2],
    pub bubbles: Vec<BubbleEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyLedger {
    /// Energy of the last sequence element.
    pub total_limit: f64,
    pub background: f64,
    pub points: Vec<PointEntry>,
    /// `total_limit - background - sum of bubble energies`.
    pub defect: f64,
    /// `max_m E(psi_m)`.
    pub energy_bound: f64,
    /// `h0 * sqrt(energy_bound)`.
    pub guard: f64,
}

impl EnergyLedger {
    /// Bubble energies in ledger order.
    pub fn bubble_energies(&self) -> Vec<f64> {
        self.points.iter().flat_map(|p| p.bubbles.iter().map(|b| b.energy)).collect()
    }

    pub fn recompute_defect(&self) -> f64 {
        defect(self.total_limit, self.background, &self.bubble_energies())
    }

    pub fn relative_defect(&self) -> f64 {
        if self.total_limit > 0.0 {
            self.defect.abs() / self.total_limit
        } else {
            self.defect.abs()
        }
    }

    pub fn bubble_count(&self) -> usize {
        self.points.iter().map(|p| p.bubbles.len()).sum()
    }
}

fn defect(total: f64, background: f64, bubbles: &[f64]) -> f64 {
    total - background - pairwise_sum(bubbles)
}

/// Collects energies into a ledger. Bubbles are grouped by their point in
/// order of first appearance; `h0` is the coefficient bound of the
/// nonlinearity.
pub fn ledger_assemble(sequence: &[SpinorField], background: &SpinorField, bubbles: &[Bubble], h0: f64) -> Result<EnergyLedger> {
    let Some(last) = sequence.last() else {
        return Err(SpinflowError::Precondition("empty sequence".into()));
    };
    if sequence.iter().any(|f| !f.chart().compatible(background.chart())) {
        return Err(SpinflowError::Precondition("sequence and background live on different charts".into()));
    }
    let energies: Vec<f64> = sequence.iter().map(|f| f.total_energy()).collect();
    let energy_bound = energies.iter().cloned().fold(0.0, f64::max);
    let mut points: Vec<PointEntry> = Vec::new();
    for b in bubbles {
        let entry = BubbleEntry {
            scale: *b.scales.last().expect("bubbles carry scales"),
            center: *b.centers.last().expect("bubbles carry centres"),
            energy: b.energy,
        };
        match points.iter_mut().find(|p| p.location == b.point) {
            Some(p) => p.bubbles.push(entry),
            None => points.push(PointEntry { location: b.point, bubbles: vec![entry] }),
        }
    }
    let mut ledger = EnergyLedger {
        total_limit: last.total_energy(),
        background: background.total_energy(),
        points,
        defect: 0.0,
        energy_bound,
        guard: h0 * energy_bound.sqrt(),
    };
    ledger.defect = ledger.recompute_defect();
    Ok(ledger)
}
