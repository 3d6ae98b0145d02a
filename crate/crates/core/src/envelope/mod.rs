//! Minimal locally concave functions on Bellman domains.

mod chords;
mod grid;
mod interp;
mod ops;
mod sampler;
mod solver;

pub use chords::{Chord, ChordGeometry, ChordSet};
pub use grid::GridFunction;
pub use ops::{mollify, mollify_value, mollify_with, shrink, shrink_intrinsic, Mollifier};
pub use sampler::{lower_bound_sampler, SampledBound};
pub use solver::{
    boundary_init, chord_sweep, concavity_deficiency, solve_envelope, EnvelopeConfig, EnvelopeSolution, Seed,
    Sweeper,
};
