//! Coefficient recovery for the test functions, and rotation-invariant
//! classification of glyph images.

mod exp1;
mod exp2;

pub use exp1::*;
pub use exp2::*;
