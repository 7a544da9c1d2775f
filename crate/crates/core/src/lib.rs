pub mod bench;
pub mod chebcore;
pub mod cli;
pub mod error;
pub mod kummer;
pub mod phasefile;
pub mod rng;
pub mod solve;
pub mod specfun;
pub mod stiffode;
pub mod tabulated;

pub use error::{Error, Result};
