// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod evolution;
pub mod grid;
pub mod lightcone;
pub mod linear;
pub mod modestab;
pub mod operators;
pub mod profiles;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/profiles.md")]
    mod profiles {}
    #[doc = include_str!("../../../book/src/mode-stability.md")]
    mod mode_stability {}
    #[doc = include_str!("../../../book/src/linear-flow.md")]
    mod linear_flow {}
    #[doc = include_str!("../../../book/src/similarity-evolution.md")]
    mod similarity_evolution {}
    #[doc = include_str!("../../../book/src/physical-blowup.md")]
    mod physical_blowup {}
}
