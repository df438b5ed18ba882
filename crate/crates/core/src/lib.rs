//! Minimal connections of singular points in planar domains, liftings of
//! Q-tensor fields through the double cover `z -> z^2`, and a coupled
//! Ginzburg-Landau / Allen-Cahn solver for ferronematic vortex-and-wall states.

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub mod connection;
pub mod cover;
pub mod error;
pub mod ferrosim;
pub mod lifting;
pub mod renorm;
pub mod geom;
mod linalg;

pub use error::{Error, Result};
