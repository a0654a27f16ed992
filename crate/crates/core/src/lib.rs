//! Supercompilation of the first-order language L and safety verification
//! of counting-abstraction protocol models.

pub mod config;
pub mod corpus;
pub mod encoding;
pub mod eval;
pub mod lang;
pub mod driving;
pub mod engine;
pub mod relations;
pub mod residual;
pub mod transform;
pub mod verify;
