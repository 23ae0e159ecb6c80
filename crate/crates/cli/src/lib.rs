//! IO, data generation, and command drivers for the CPT portfolio
//! optimizer. The numerical work lives in `cptport-core`; this crate adds
//! CSV ingestion, the Gaussian-mixture synthesizer, random starts, JSON
//! reports, and the `cptport` binary.

pub mod commands;
pub mod config;
pub mod data;
pub mod linalg;
pub mod report;
