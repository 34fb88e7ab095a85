//! Multi-UAV integrated sensing and communication (ISAC) trade-off optimizer.
//!
//! The crate is split along the pipeline:
//!
//! * [`model`] evaluates the physics: SINR, proportional-fair utility, Fisher
//!   information and the localization CRB, and maps a normalized genome to
//!   the bi-objective vector `(-utility, ln sum CRB)`.
//! * [`moead`] is a decomposition-based evolutionary framework (Tchebycheff
//!   subproblems, neighborhoods, external archive) generic over the
//!   offspring generator.
//! * [`operators`] holds the classical generators (SBX/PM genetic, DE, random).
//! * [`llm`] turns a chat-completion model into an offspring generator via a
//!   text prompt protocol, with a deterministic offline mock.
//! * [`metrics`] provides front normalization and exact 2-D hypervolume.

// `!(a < b)` is used deliberately so NaN lands on the error path.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod llm;
pub mod metrics;
pub mod model;
pub mod moead;
pub mod objective;
pub mod operators;
pub mod rng;

pub use objective::ObjectiveVector;
