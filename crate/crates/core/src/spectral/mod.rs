//! Discretized kinetic operators, matrix functions and negative-part traces.

pub mod dense;
pub mod lanczos;
pub mod matfun;
pub mod pauli;
pub mod radial;
pub mod trace;
pub mod tridiag;

pub use matfun::{rel_scalar, rel_transform, rel_transform_herm};
pub use radial::{build_radial_channel, ChannelOperator, KineticForm, RadialGrid, RadialGridSpec};
pub use trace::{channel_sum, negative_sum, negative_sum_tridiag, ChannelSum};
pub use tridiag::Tridiag;
