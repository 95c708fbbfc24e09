pub mod error;
pub mod highprec;
pub mod weight;
pub mod orthopoly;
pub mod piii;
pub mod asympt;
pub mod harness;

pub use error::{Error, Result};
