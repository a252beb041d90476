//! Certified isolation and local topology of the singularities of plane
//! curves given as resultants or discriminants of trivariate polynomials.

pub mod assumptions;
pub mod cli;
pub mod config;
pub mod interval;
pub mod isolate;
pub mod mpoly;
pub mod oracle;
pub mod random;
pub mod system;
pub mod topology;
