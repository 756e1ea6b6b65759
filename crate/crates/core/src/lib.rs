pub mod error;
pub mod estimators;
pub mod io;
pub mod model;
mod optim;
pub mod oracles;
pub mod scaling;
pub mod sim;

pub use error::{Error, Result};
