pub mod acceptance;
pub mod bers;
pub mod boundary;
pub mod domains;
pub mod error;
pub mod solver;

pub use error::{Error, Result};
