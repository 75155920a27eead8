//! Executable matrix corona/ideal constructions on polynomial data.

pub mod assemble;
pub mod combinat;
pub mod corona;
pub mod detk;
pub mod estimates;
pub mod error;
pub mod exterior;
pub mod identities;
pub mod linalg;
pub mod opdet;
pub mod oracle;
pub mod poly;
pub mod ring;

pub use error::{Error, Result};
pub use ring::{Ring, C64};
