#![allow(clippy::result_large_err)]

pub mod crepant;
pub mod decompose;
pub mod error;
pub mod fixtures;
pub mod moves;
pub mod ratlin;
pub mod surface;

pub use error::{Error, Result};
