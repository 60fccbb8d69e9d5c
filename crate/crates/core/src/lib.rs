pub mod analysis;
pub mod error;
pub mod geometry;
pub mod gp;
pub mod io;
pub mod spatial;
pub mod epidemic;
pub mod synthpop;

pub use error::{Error, Result};
