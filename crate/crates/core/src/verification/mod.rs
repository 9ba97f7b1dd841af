//! Independent reference implementations and property drivers.

pub mod checks;
pub mod convergence;
pub mod manufactured;
pub mod oracle;
pub mod suite;
