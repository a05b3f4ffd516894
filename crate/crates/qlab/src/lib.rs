pub mod error;
pub mod fusion;
pub mod glrep;
pub mod lax;
pub mod oscillator;
pub mod tensor;

pub use error::{QlabError, Result};
pub mod spectral;
pub mod transfer;
pub mod relations;
pub mod cli;
