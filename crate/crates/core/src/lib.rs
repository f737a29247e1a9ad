//! Ambiguity accounting for two-hint secret storage.
//!
//! The library measures how hard a secret is to guess — through moments of
//! guessing functions and candidate-list sizes under Rényi/Arimoto
//! entropies of order below one — and uses that machinery to build and
//! audit a distributed storage scheme: two hints that together let a
//! reader pin the secret down while either hint alone, even chosen
//! adversarially by a genie, leaves an eavesdropper provably lost.
//!
//! Layering, bottom up:
//!
//! * [`pmf`] — joint distributions, Rényi and Arimoto entropies, i.i.d.
//!   extensions;
//! * [`guessing`] — guessing functions, moments, entropy sandwiches, and
//!   rank-residue side information;
//! * [`task`] — task encoders, candidate lists, and the two reductions
//!   between list and guessing performance;
//! * [`storage`] — the padded two-hint scheme, both readers' exact
//!   ambiguities, the eavesdropper searches, and every closed-form bound;
//! * [`asymptotics`] — blocklength sweeps toward the single-letter
//!   exponent;
//! * [`oracles`] — budgeted exhaustive recomputations of each optimum,
//!   kept deliberately independent of the fast paths.

pub mod asymptotics;
mod assignment;
pub mod cli;
pub mod error;
pub mod guessing;
pub mod oracles;
pub mod pmf;
pub mod storage;
pub mod task;

pub use error::{Error, Result};
pub use pmf::{arimoto_conditional_entropy, renyi_entropy, tilt_order, CondPMF, JointPMF};
