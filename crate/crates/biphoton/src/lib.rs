//! Configuration, file formats, parallel drivers and the command line for
//! `biphoton-core`.

pub mod app;
pub mod config;
pub mod error;
pub mod output;
pub mod plots;
pub mod report;
pub mod sweep;
pub mod tomo;

pub use config::RunConfig;
pub use error::{AppError, AppResult};
