//! Hybrid hydrogen-electrolyzer / supercapacitor DC-bus design lab.
//!
//! Droop-bank modelling, closed-form synthesis, frequency and time-domain
//! analysis, and mixed-potential large-signal stability.

pub mod cli;
pub mod config;
pub mod csv;
pub mod design;
pub mod error;
pub mod freq;
pub mod model;
pub mod mpt;
pub mod report;
pub mod sim;

pub use error::{Branch, Error, Result};
pub use model::DroopBank;
