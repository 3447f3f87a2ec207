pub mod error;
pub mod fixtures;
pub mod fock;
pub mod characters;
pub mod corr;
pub mod cover;
pub mod equiv;
pub mod graph;
pub mod io;
pub mod nest;
pub mod space;

pub use error::{Error, ErrorCategory, Result};
