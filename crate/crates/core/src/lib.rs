//! Nine-state model of a hydropower unit (penstock, turbine, speed governor,
//! synchronous generator on an infinite bus) with tools for steady states,
//! local stability and long transient runs.

// `!(x > 0.0)` style checks are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checks;
pub mod config;
pub mod electrical;
pub mod equilibria;
pub mod error;
pub mod governor;
pub mod model;
pub mod params;
pub mod stability;
pub mod state;
pub mod tolerances;
pub mod transient;

pub use error::{Error, Result};
pub use params::UnitParams;
pub use state::State;
