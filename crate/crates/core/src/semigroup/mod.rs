//! Heat and Poisson extensions of functions on R^n and the quantities built
//! from them.

mod extend;
mod kernel;
mod norms;
mod table;
mod testfn;

pub use extend::{divergence_test, extend, DivergenceTest, Extension};
pub use kernel::{integrability_check, kernel_eval, kernel_radial, KernelKind, SpaceTimePoint};
pub use norms::{ap_characteristic_k, k_bmo_norm, k_variance, ProbeSet, ProbeSup};
pub use table::LogAbsTable;
pub use testfn::{Growth, Op, Shape, TestFunction, Transform};
