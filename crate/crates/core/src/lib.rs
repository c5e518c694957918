pub mod bloch;
pub mod elliptic;
pub mod error;
pub mod frobenius;
pub mod hill;
pub mod numeric;
pub mod susy;
pub mod verify;

pub use error::{Error, Result};
