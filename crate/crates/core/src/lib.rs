//! Calibration of sufficiency factors and risk aversion for a CRRA
//! consumption-based asset-pricing model, and classification of investors
//! into five risk attitudes by comparing certain and uncertain utility.
//!
//! The pipeline runs dataset -> moments -> calibration -> utility ->
//! classification -> report. Every stage is a pure function of its inputs.

pub mod calibration;
pub mod classify;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod moments;
pub mod report;
pub mod root;
pub mod utility;

pub use error::{Error, Result};
