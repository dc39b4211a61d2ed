//! Matrix-level laboratory for Gaudin algebras of `gl_N`.
//!
//! Operators are explicit matrices over exact rationals or complex floats.
//! Commutativity and span identities are checked exactly; floats are used for
//! spectra only.

pub mod duality;
pub mod error;
pub mod gaudin;
pub mod limits;
pub mod opcore;
pub mod repspace;
pub mod scalar;
pub mod speclab;
pub mod symgroup;

pub use error::{Error, Result};
pub use gaudin::{OperatorFamily, SitePoints};
pub use opcore::{LinOp, SpanResult};
pub use repspace::{ModuleRep, TensorSpace};
pub use scalar::{Field, Rational, Scalar};

pub type QOp = LinOp<Rational>;
pub type FOp = LinOp<f64>;
pub type COp = LinOp<num_complex::Complex64>;
