pub mod algebra;
pub mod bae;
pub mod cli;
pub mod config;
pub mod error;
pub mod io;
pub mod model;
pub mod spectrum;
pub mod thermo;

pub use error::{Error, Result};
