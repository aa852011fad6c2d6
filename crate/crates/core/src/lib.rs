pub mod cli;
pub mod error;
pub mod evolution;
pub mod linalg;
pub mod periodic;
pub mod periodsolver;
pub mod qgeometry;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
