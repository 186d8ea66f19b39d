//! Coherence-preserving leakage detection and sideband cooling for
//! nuclear-spin qudits in alkaline-earth-like atoms, from first principles:
//! exact angular-momentum algebra `angmom`, atomic structure `structure`,
//! laser-atom operators and cancellation solvers `lightmatter`, Lindblad
//! dynamics `dynamics`, and the scenario drivers `protocols`.
//!
//! Units: angular frequencies in rad/µs and times in µs internally; every
//! external surface uses /2π MHz (see `units`).

pub mod angmom;
pub mod dynamics;
pub mod lightmatter;
pub mod protocols;
pub mod structure;
pub mod units;
