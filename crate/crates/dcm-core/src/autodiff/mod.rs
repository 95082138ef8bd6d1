//! Nested automatic differentiation.
//!
//! Forward mode in the two spatial inputs up to second order ([`Jet2`]),
//! reverse mode in the network parameters ([`Tape`]), composed
//! forward-over-reverse: the tape's scalars are spatial jets, so the gradient
//! of a loss containing spatial second derivatives is exact.

mod jet;
mod tape;

pub use jet::{sigmoid, unary_derivs, Activation, Jet2, UnaryKind};
pub use tape::{JetScalar, Lane, TJet, Tape};
