pub mod advice;
pub mod assets;
pub mod bench;
pub mod distance;
pub mod domain;
pub mod error;
pub mod induction;
pub mod logic;
pub mod pac;
pub mod plan;
pub mod search;
pub mod session;

pub use error::{Error, ParseError, Result};
