//! Sub-level sets of the potential and their shape statistics.

pub mod decay;
pub mod dh;
pub mod frame;
pub mod ladder;
pub mod section;
pub mod stats;

pub use decay::{decay_profile, DecayProfile, DecaySide};
pub use dh::{dh_set, DhSet};
pub use frame::{Frame, LocalPotential};
pub use ladder::{LadderOptions, SlopeRule};
pub use section::{centred_section, plain_section, Affine, Section, SectionKind, SectionOptions};
pub use stats::{balance_stats, density_ratio, pairing_stats, sandwich_constant, scaling_fit, BalanceStats, PairingStats, ScalingFit};
