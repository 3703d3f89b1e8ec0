//! Support library of the `dqssa` binary: configuration files, CSV
//! emitters/readers, and the minimal SVG renderer.

pub mod config;
pub mod csvio;
pub mod svg;
