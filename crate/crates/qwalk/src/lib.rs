pub mod coin;
pub mod curved;
pub mod engine;
pub mod error;
pub mod expr;
pub mod linalg;
pub mod neutrino;
pub mod observables;
pub mod scenario;
pub mod shift;
pub mod spectral;
pub mod state;
pub mod stencil;
pub mod two_particle;

pub use error::{Error, Result};
