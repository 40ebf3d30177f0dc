//! File formats, experiment runners and the `kgns` command line on top of
//! [`kgns_core`].
//!
//! Triple files are tab-separated ([`io`]), ontologies use a two-section
//! text format ([`ontology`]), runs are configured in TOML ([`config`]) and
//! trained models are saved as checksummed binaries ([`checkpoint`]).

pub mod checkpoint;
pub mod cli;
pub mod config;
pub mod error;
pub mod experiment;
pub mod hooks;
pub mod io;
pub mod ontology;
pub mod report;
pub mod synthetic;

pub use error::{Error, Result};
