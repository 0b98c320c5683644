//! Exact convex-roof evaluation for degree-2 polynomial entanglement
//! measures on rank-2 states whose range contains a single vanishing state.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod convexroof;
pub mod error;
pub mod families;
pub mod grid;
pub mod io;
pub mod measures;
pub mod qstate;
pub mod tolerance;
pub mod zeropolytope;

pub use error::{Error, Result};
pub use measures::{Measure, MeasureDescriptor, SloccOperator};
pub use qstate::{BlochVector, DensityMatrix, Ket, PureState, RankTwoState, C64};
pub use tolerance::Tolerances;
