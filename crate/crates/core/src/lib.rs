pub mod bench;
pub mod cli;
pub mod cosamp;
pub mod dictionary;
pub mod ensembles;
pub mod error;
pub mod factorize;
pub mod linalg;
pub mod matrix;

pub use error::{Error, Result};
pub use matrix::Matrix;
