//! Rate and detection-error tradeoffs for identity-depolarizing-erasure
//! channels whose state switches between two configurations.

pub mod channels;
pub mod cli;
pub mod error;
pub mod numfmt;
pub mod presets;
pub mod qmath;
pub mod regions;
pub mod sim;

pub use error::{Error, Result};
