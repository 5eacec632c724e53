pub mod baths;
pub mod error;
pub mod fdme;
pub mod grid;
pub mod liouville;
pub mod measures;
pub mod ode;
pub mod oracle;
pub mod quad;
pub mod redfield;
pub mod spectrum;
pub mod waveguide;

pub use error::{Error, Result};
