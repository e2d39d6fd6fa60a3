//! Command-line front end for the `kindap` solvers: file formats, result
//! documents, and the synthetic benchmark sweep.

pub mod bench;
pub mod commands;
pub mod error;
pub mod io;
pub mod methods;
pub mod report;

pub use commands::run;
pub use error::{CliError, CliResult};
pub use methods::{run_method, Method, MethodRun, SolveOptions};
