//! Number variance and Gaussian fluctuation limits for lattice systems of
//! independent symmetric α-stable particles.

pub mod acceptance;
pub mod error;
pub mod gp;
pub mod io;
pub mod numvar;
pub mod particles;
pub mod quad;
pub mod rng;
pub mod special;
pub mod stable;

pub use error::{Error, Result};
pub use numvar::SystemConfig;
pub use stable::{StableLawAtTime, StableParams};

pub const VERSION: &str = concat!("stabvar ", env!("CARGO_PKG_VERSION"));
