pub mod cli;
pub mod clustering;
pub mod error;
pub mod estimation;
pub mod features;
pub mod frf;
pub mod io;
pub mod metrics;
pub mod report;

pub use error::{Error, Result};
