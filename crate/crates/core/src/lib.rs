pub mod allocation;
pub mod blacklitterman;
pub mod cli;
pub mod envelope;
pub mod error;
pub mod forward;
pub mod geometry;
pub mod golden;
pub mod inverse;
pub mod linalg;
pub mod lp;
pub mod order;
pub mod probspace;
pub mod selector;

pub use error::{Error, Result};
