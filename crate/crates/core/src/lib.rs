pub mod cert;
pub mod certify;
pub mod cli;
pub mod error;
pub mod gen;
pub mod poly;
pub mod reduce;
pub mod sdp;
pub mod sos;
pub mod sphere;
pub mod verify;

pub use error::{Error, Result};
