//! Frame-transformed multichannel quantum defect theory for a heteronuclear
//! pair of ground-state alkali atoms, plus the spectrum of such a pair in an
//! anisotropic harmonic trap.
//!
//! The pipeline runs `physics` (constants, van der Waals scales) →
//! `angular` (channels, recoupling matrix) → `mqdt` (short-range K matrix,
//! closed-channel elimination, scattering length), with `longrange`
//! supplying closed-channel parameters. `trap` maps scattering lengths to
//! trapped-pair energies and `shift` turns those into microwave shifts and
//! fits.

pub mod angular;
pub mod halfint;
pub mod hypergeometric;
pub mod longrange;
pub mod measurements;
pub mod mqdt;
pub mod physics;
pub mod roots;
pub mod shift;
pub mod special;
pub mod trap;

pub use angular::{ChannelLabel, ChannelSpace, EigenChannel, EigenLabel, FragChannel};
pub use halfint::HalfInt;
pub use mqdt::{DefectClass, DefectSet};
pub use physics::{Dataset, Species, SpeciesPair, VdwScales};
