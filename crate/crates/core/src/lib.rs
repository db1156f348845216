pub mod cli;
pub mod config;
pub mod defaults;
pub mod dispersion;
pub mod error;
pub mod field;
pub mod linalg;
pub mod oracle;
pub mod par;
pub mod roots;
pub mod three_body;
pub mod torus;
pub mod two_body;

pub use error::{Error, Result};
