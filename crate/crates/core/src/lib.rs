//! Husimi Q-functions and phase distributions of squeezed vacuum states with
//! heralded photon subtraction, addition and catalysis, including their
//! evolution under amplitude damping.

pub mod cli;
pub mod damping;
pub mod error;
pub mod fock_oracle;
pub mod husimi;
pub mod phasedist;
pub mod polyform;
pub mod states;

pub use error::{Error, Result};
