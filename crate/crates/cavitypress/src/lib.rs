//! Desk-scale laboratory for pressure, entropy, and sequential cavity
//! estimates on subshifts over finite extensions of `Z^d`.

pub mod cache;
pub mod error;
pub mod gibbs;
pub mod group;
pub mod model;
pub mod potential;
pub mod pressure;
pub mod run;
pub mod subshift;

pub use error::{Error, Result};
