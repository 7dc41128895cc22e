//! Displacement metrology with an entangled atom-cavity resource.
//!
//! A coherent cavity field interacts resonantly with a two-level atom for a
//! preparation time `T1`, which splits the field into two coherent
//! components entangled with the atom. After an atomic phase flip and a
//! small real displacement `beta` of the field, the resonant interaction is
//! resumed for a measurement time `T2`; the two components merge again and
//! the probability `P_g` of detecting the atom in `|g>` oscillates with
//! `beta` much faster than a coherent-state scheme allows.
//!
//! The crate is organised bottom-up:
//!
//! * [`fockspace`]: truncated Fock-space states and operators;
//! * [`dynamics`]: exact resonant Jaynes-Cummings propagation, effective
//!   interaction times and the atomic phase flip;
//! * [`protocol`]: the full measurement sequence, analytic and numeric,
//!   with detection errors and atomic position spread;
//! * [`fisher`]: classical and quantum Fisher information, bounds and
//!   fringe-based extraction;
//! * [`montecarlo`]: simulated repetitions, local maximum-likelihood
//!   inversion and Cramér-Rao checks.
//!
//! Times are in microseconds, angular frequencies in rad/µs and lengths in
//! millimetres throughout.
//!
//! Data-parallel loops go through [`Execution`]; with the default
//! `parallel` feature they run on rayon, otherwise serially. Both paths
//! produce bit-identical results.

pub mod dynamics;
pub mod error;
pub mod exec;
pub mod fisher;
pub mod fockspace;
pub mod montecarlo;
pub mod protocol;

pub use error::{Error, Result};
pub use exec::Execution;

pub use dynamics::{AtomFieldState, AtomLevel, CavityMode};

pub use fisher::{FisherReport, FringeDataset, FringeFisher};
pub use fockspace::{FieldVector, OperatorMatrix};
pub use montecarlo::{TrialConfig, TrialReport};
pub use protocol::{ImperfectionModel, ProtocolParams, SpreadRule};

/// Crate version, recorded in output metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Complex amplitude type used everywhere in the crate.
pub type C64 = num_complex::Complex64;
