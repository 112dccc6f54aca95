//! Line arrangements in the projective plane: combinatorics, logarithmic
//! derivations, the Saito functional, exact freeness certificates and
//! search for free arrangements.

pub mod arrangement;
pub mod derivation;
pub mod exact;
pub mod fixtures;
pub mod poly;
pub mod saito;
pub mod search;
pub mod tensor;
pub mod verify;

pub use arrangement::{Arrangement, ArrangementError, Line, Point, Rational};
