//! Outage and DBPSK error-rate analysis for multi-user, multi-hop hybrid
//! RF/FSO relay links under negative-exponential turbulence with pointing
//! errors.

pub mod channel;
pub mod closed_form;
pub mod composition;
pub mod error;
pub mod montecarlo;
pub mod quadrature;
pub mod special;
pub mod stats;

pub use error::{Error, Result};