//! Degenerations of Gaudin algebras and the bending-flow limit.

pub mod bending;
pub mod classical;
pub mod sweep;

pub use bending::{alim_generators, bending_quadratic_family, compare_spans, diagonal_center, SpanComparison, SpanVerdict};
pub use classical::{
    bending_functions, classical_bending, fd_poisson_bracket, gr_consistency, poisson_bracket, ClassicalFn, ClassicalPoint, GrCheck,
};
pub use sweep::{glued_space, limit_sweep, loglog_slope, predicted_limit_family, projective_distance, DegenSchedule, SweepReport};
