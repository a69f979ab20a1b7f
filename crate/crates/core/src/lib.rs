pub mod characteristics;
pub mod error;
pub mod pcfb;
pub mod profiles;
pub mod quantities;
pub mod quadrature;
pub mod spec;

pub use error::{Error, Result};
