pub mod error;
pub mod ext;
pub mod kernels;
pub mod quad;

pub use error::{Error, Result};
pub use ext::ExtReal;
