//! Code-indexed memory vacua of a doubled, damped boson system.
//!
//! - [`su11`]: closed-form states, evolution, overlaps and observables.
//! - [`fock`]: truncated Fock-space oracle for one mode pair.
//! - [`thermo`]: entropy, effective temperatures, free energy, first-law ledger.
//! - [`capacity`]: registries of printed memories and capacity experiments.
//! - [`verify`]: oracle-versus-closed-form comparison suite.
//! - [`cli`]: the `memvac` command-line front end.

pub mod capacity;
pub mod cli;
pub mod error;
pub mod exec;
pub mod fock;
pub mod su11;
pub mod thermo;
pub mod verify;

pub use error::{Error, Result};
pub use exec::Execution;
pub use su11::{Code, MemoryState, ModeList, ModeParams};
