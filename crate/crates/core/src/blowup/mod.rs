//! Blow-up analysis: conformal transfers, concentration points, bubbles and
//! the energy ledger.
//!
//! A sequence concentrates at `p` when the energy of every small ball around
//! `p` stays above a threshold. Over a finite sequence the lower limit is
//! replaced by the minimum over the last half of the sequence.

pub mod conformal;
pub mod decay;
pub mod detect;
pub mod extract;
pub mod interp;
pub mod ledger;

pub use conformal::{cylinder_segment_energies, rescale, sphere_transfer, to_cylinder, CylinderGrid, SphereDirection};
pub use decay::{decay_profile, neck_energy, DecayProfile};
pub use detect::{blowup_set, BlowupPoint};
pub use extract::{extract_bubble, extract_bubbles, Bubble, ExtractOptions};
pub use ledger::{ledger_assemble, BubbleEntry, EnergyLedger, PointEntry};
