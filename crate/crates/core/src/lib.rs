//! A deeply embedded expression language with user-defined algebraic data
//! types. Host functions that pattern match on embedded terms are turned into
//! embedded `Case` expressions by re-running them on `Match`-wrapped dummy
//! arguments, one per trace of the argument type.

pub mod ast;
pub mod cli;
pub mod error;
pub mod eval;
pub mod json;
pub mod lower;
pub mod matcher;
pub mod pattern;
pub mod programs;
pub mod trace;
pub mod types;

pub use error::{Error, Result};
