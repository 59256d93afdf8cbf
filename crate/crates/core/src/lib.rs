//! Exact typechecking of macro tree transducers.
//!
//! The output type is inverted through the transducer into an alternating
//! tree automaton, intersected with the input type, and checked for
//! emptiness. A non-empty intersection yields a counterexample input.

pub mod emptiness;
pub mod error;
pub mod frontend;
pub mod inference;
mod maxplus;
pub mod oracle;
pub mod reference;
pub mod schema;
mod text;
pub mod alternating;
pub mod automata;
pub mod transducer;
pub mod trees;

pub use error::{Error, Position, Result};

pub use maxplus::Bound;
