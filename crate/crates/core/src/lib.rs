//! Radial solutions of the stationary cubic nonlinear Schrödinger equation.
//!
//! [`cnls`] defines the equations, [`integrate`] solves them from the origin
//! with event detection, [`analysis`] labels the results and
//! [`oscillation`] holds the canonical-form oscillation criterion. The guide
//! in `book/` walks through each of these.

pub mod analysis;
pub mod cli;
pub mod cnls;
pub mod error;
pub mod integrate;
pub mod oscillation;

pub use error::{Error, Result};

// The guide's snippets run as doctests of these empty modules.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/index.md")]
    mod index {}
    #[doc = include_str!("../../../book/src/criterion.md")]
    mod criterion {}
    #[doc = include_str!("../../../book/src/equations.md")]
    mod equations {}
    #[doc = include_str!("../../../book/src/integration.md")]
    mod integration {}
    #[doc = include_str!("../../../book/src/classification.md")]
    mod classification {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
