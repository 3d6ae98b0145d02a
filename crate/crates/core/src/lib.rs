//! Bellman functions for BMO and A_p on nonconvex planar domains, their
//! semigroup extensions, and sampled transference checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]


pub mod constants;
pub mod domain;
pub mod envelope;
pub mod error;
pub mod interval;
pub mod profile;
pub mod quadrature;
pub mod semigroup;
pub mod special;
pub mod stochastic;
pub mod transfer;

pub use domain::{BellmanPoint, DomainSpec};
pub use envelope::{solve_envelope, EnvelopeConfig, EnvelopeSolution, GridFunction};
pub use error::{Error, Result};
pub use interval::StepFunction;
pub use profile::BoundaryProfile;
pub use semigroup::{extend, Extension, KernelKind, ProbeSet, SpaceTimePoint, TestFunction, Transform};
